//! Cache-first retrieval of coefficient files.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, SystemTime};

use super::{bundled, CoefficientEntry, CoefficientFile, FormLabel, LmfdbError, Source};

/// Overrides the cache directory.
pub const CACHE_DIR_ENV: &str = "MODTERRAIN_CACHE_DIR";
/// Overrides the coefficient endpoint.
pub const BASE_URL_ENV: &str = "MODTERRAIN_BASE_URL";

/// Endpoint template; `{label}` and `{count}` are substituted. A template
/// without `{label}` gets `/<label>` appended.
pub const DEFAULT_BASE_URL: &str =
    "https://www.lmfdb.org/ModularForm/GL2/Q/holomorphic/download_cc_data/{label}";

pub const DEFAULT_MIN_COEFFS: usize = 1000;

#[derive(Clone, Debug)]
pub struct FetchConfig {
    pub base_url: String,
    pub cache_dir: PathBuf,
    /// Never touch the network.
    pub offline: bool,
    pub timeout: Duration,
}

impl FetchConfig {
    pub fn new(cache_dir: impl Into<PathBuf>) -> Self {
        FetchConfig {
            base_url: DEFAULT_BASE_URL.to_string(),
            cache_dir: cache_dir.into(),
            offline: false,
            timeout: Duration::from_secs(60),
        }
    }

    /// Defaults with the environment overrides applied.
    pub fn from_env() -> Self {
        let mut config = FetchConfig::new(default_cache_dir());
        if let Ok(url) = std::env::var(BASE_URL_ENV) {
            if !url.is_empty() {
                config.base_url = url;
            }
        }
        config
    }

    fn url_for(&self, label: &FormLabel, count: usize) -> String {
        let label = label.to_string();
        let url = if self.base_url.contains("{label}") {
            self.base_url.replace("{label}", &label)
        } else {
            format!("{}/{}", self.base_url.trim_end_matches('/'), label)
        };
        url.replace("{count}", &count.to_string())
    }

    fn cache_path(&self, label: &FormLabel) -> PathBuf {
        self.cache_dir.join(label.to_string())
    }
}

/// `$MODTERRAIN_CACHE_DIR`, else `$XDG_CACHE_HOME/modterrain`, else
/// `$HOME/.cache/modterrain`.
pub fn default_cache_dir() -> PathBuf {
    if let Some(dir) = std::env::var_os(CACHE_DIR_ENV).filter(|d| !d.is_empty()) {
        return PathBuf::from(dir);
    }
    if let Some(dir) = std::env::var_os("XDG_CACHE_HOME").filter(|d| !d.is_empty()) {
        return PathBuf::from(dir).join("modterrain");
    }
    match std::env::var_os("HOME") {
        Some(home) => PathBuf::from(home).join(".cache").join("modterrain"),
        None => std::env::temp_dir().join("modterrain-cache"),
    }
}

/// At least `min_coeffs` coefficients for `label`: the cache first, then one
/// HTTP GET (persisted to the cache). Bundled fixtures answer when offline,
/// and stand in when the remote attempt fails.
pub fn fetch(
    label: &FormLabel,
    min_coeffs: usize,
    config: &FetchConfig,
) -> Result<CoefficientFile, LmfdbError> {
    let min_coeffs = min_coeffs.max(1);
    if let Some(file) = read_cache(label, config)? {
        if file.count() >= min_coeffs {
            return Ok(file);
        }
    }
    let bundle = || -> Result<Option<CoefficientFile>, LmfdbError> {
        match bundled(label, min_coeffs) {
            Some(file) => Ok(Some(file?)),
            None => Ok(None),
        }
    };
    if config.offline {
        return match bundle()? {
            Some(file) if file.count() >= min_coeffs => Ok(file),
            Some(file) => Err(LmfdbError::InsufficientCoefficients {
                label: label.to_string(),
                needed: min_coeffs,
                available: file.count(),
            }),
            None => Err(LmfdbError::Offline(label.to_string())),
        };
    }
    match fetch_remote(label, min_coeffs, config) {
        Ok(file) => Ok(file),
        Err(remote_error) => match bundle()? {
            Some(file) if file.count() >= min_coeffs => Ok(file),
            _ => Err(remote_error),
        },
    }
}

fn fetch_remote(
    label: &FormLabel,
    min_coeffs: usize,
    config: &FetchConfig,
) -> Result<CoefficientFile, LmfdbError> {
    let body = http_get(label, &config.url_for(label, min_coeffs), config.timeout)?;
    let entries = parse_coefficient_response(label, &body)?;
    let mut file = CoefficientFile::new(label.clone(), entries, Source::Remote)?;
    if file.count() < min_coeffs {
        return Err(LmfdbError::InsufficientCoefficients {
            label: label.to_string(),
            needed: min_coeffs,
            available: file.count(),
        });
    }
    write_cache(&config.cache_path(label), &file.to_text())?;
    file.fetched_at = Some(SystemTime::now());
    Ok(file)
}

fn read_cache(label: &FormLabel, config: &FetchConfig) -> Result<Option<CoefficientFile>, LmfdbError> {
    let path = config.cache_path(label);
    let text = match fs::read_to_string(&path) {
        Ok(text) => text,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(e.into()),
    };
    let mut file = CoefficientFile::from_text(&text, Source::Cache)?;
    if file.label != *label {
        return Err(LmfdbError::Format {
            line: 1,
            message: format!("cache file {} holds {}", path.display(), file.label),
        });
    }
    file.fetched_at = fs::metadata(&path).and_then(|m| m.modified()).ok();
    Ok(Some(file))
}

/// Write-to-temp-then-rename, so readers never see a partial file.
fn write_cache(path: &Path, text: &str) -> Result<(), LmfdbError> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    fs::create_dir_all(dir)?;
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("coefficients");
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(text.as_bytes())?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

fn http_get(label: &FormLabel, url: &str, timeout: Duration) -> Result<String, LmfdbError> {
    let network = |message: String| LmfdbError::Network {
        label: label.to_string(),
        message,
    };
    let agent: ureq::Agent = ureq::Agent::config_builder()
        .timeout_global(Some(timeout))
        .http_status_as_error(false)
        .build()
        .into();
    let mut response = agent.get(url).call().map_err(|e| network(e.to_string()))?;
    let status = response.status();
    if status.as_u16() == 404 {
        return Err(LmfdbError::NotFound(label.to_string()));
    }
    if !status.is_success() {
        return Err(network(format!("HTTP {status} from {url}")));
    }
    response
        .body_mut()
        .with_config()
        .limit(64 * 1024 * 1024)
        .read_to_string()
        .map_err(|e| network(e.to_string()))
}

/// Adapter for the endpoint's response body.
///
/// Accepts either a full [`CoefficientFile`] text (header line first) or bare
/// `n re [im]` lines separated by whitespace or commas; `#` starts a comment.
pub fn parse_coefficient_response(
    label: &FormLabel,
    body: &str,
) -> Result<Vec<CoefficientEntry>, LmfdbError> {
    let first = body
        .lines()
        .find(|l| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
    if let Some(first) = first {
        if first.split_whitespace().next() == Some(label.to_string().as_str()) {
            let file = CoefficientFile::from_text(body.trim_start(), Source::Remote)?;
            return Ok(file.entries);
        }
    }
    let mut entries = Vec::new();
    for (idx, raw) in body.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|f| !f.is_empty())
            .collect();
        let bad = || LmfdbError::Format {
            line: idx + 1,
            message: format!("expected `n re [im]`, found {raw:?}"),
        };
        let (n, re, im) = match fields.as_slice() {
            [n, re] => (n, re, &"0"),
            [n, re, im] => (n, re, im),
            _ => return Err(bad()),
        };
        entries.push(CoefficientEntry {
            n: n.parse().map_err(|_| bad())?,
            re: re.to_string(),
            im: im.to_string(),
        });
    }
    if entries.is_empty() {
        return Err(LmfdbError::Empty);
    }
    Ok(entries)
}
