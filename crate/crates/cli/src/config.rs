//! Render recipes and their flat `key = value` file format.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use modterrain::lmfdb::{parse_label, DEFAULT_MIN_COEFFS};
use modterrain::terrain::{GridSpec, HeightMapKind, HeightMapSpec, DEFAULT_LIGHT_DIR};
use modterrain::EvalOptions;

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Output {
    MeshPly,
    MeshObj,
    Image2d,
    Hillshade,
}

impl Output {
    pub const ALL: [Output; 4] = [Output::MeshPly, Output::MeshObj, Output::Image2d, Output::Hillshade];

    pub fn as_str(self) -> &'static str {
        match self {
            Output::MeshPly => "mesh_ply",
            Output::MeshObj => "mesh_obj",
            Output::Image2d => "image_2d",
            Output::Hillshade => "hillshade",
        }
    }

    pub fn file_name(self) -> &'static str {
        match self {
            Output::MeshPly => "terrain.ply",
            Output::MeshObj => "terrain.obj",
            Output::Image2d => "domain.png",
            Output::Hillshade => "hillshade.png",
        }
    }
}

impl fmt::Display for Output {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Output {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Output::ALL
            .into_iter()
            .find(|o| o.as_str() == s)
            .ok_or_else(|| {
                CliError::Config(format!(
                    "unknown output {s:?} (mesh_ply, mesh_obj, image_2d, hillshade)"
                ))
            })
    }
}

/// Everything that determines a render.
#[derive(Clone, Debug, PartialEq)]
pub struct RenderConfig {
    pub form_label: String,
    pub grid: GridSpec,
    pub heightmap: HeightMapSpec,
    pub eval: EvalOptions,
    /// Coefficients requested from the data layer.
    pub min_coeffs: usize,
    /// `None` picks 0.35 times the shorter side of the grid.
    pub vertical_scale: Option<f64>,
    pub light_dir: [f64; 3],
    pub outputs: BTreeSet<Output>,
    pub output_dir: PathBuf,
    pub offline: bool,
}

impl Default for RenderConfig {
    fn default() -> Self {
        RenderConfig {
            form_label: "1.12.a.a".into(),
            grid: GridSpec {
                x_min: -0.5,
                x_max: 0.5,
                y_min: 0.03,
                y_max: 1.03,
                nx: 256,
                ny: 256,
            },
            heightmap: HeightMapSpec::default(),
            eval: EvalOptions::default(),
            min_coeffs: DEFAULT_MIN_COEFFS,
            vertical_scale: None,
            light_dir: DEFAULT_LIGHT_DIR,
            outputs: Output::ALL.into_iter().collect(),
            output_dir: PathBuf::from("out"),
            offline: false,
        }
    }
}

const KEYS: [&str; 18] = [
    "form",
    "grid.x_min",
    "grid.x_max",
    "grid.y_min",
    "grid.y_max",
    "grid.nx",
    "grid.ny",
    "heightmap.kind",
    "heightmap.alpha",
    "eval.target_rel_err",
    "eval.initial_bits",
    "eval.max_bits",
    "eval.y_floor",
    "eval.min_coeffs",
    "render.vertical_scale",
    "render.light",
    "render.outputs",
    "render.output_dir",
];

// not part of the recipe hash: they say where, not what
const LOCAL_KEYS: [&str; 2] = ["render.output_dir", "render.offline"];

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .parse()
        .map_err(|_| CliError::Config(format!("{key}: cannot parse {value:?}")))
}

pub fn parse_light(value: &str) -> Result<[f64; 3], CliError> {
    let parts: Vec<f64> = value
        .split(',')
        .map(|p| parse_num("render.light", p.trim()))
        .collect::<Result<_, _>>()?;
    match parts.as_slice() {
        [x, y, z] => Ok([*x, *y, *z]),
        _ => Err(CliError::Config(format!(
            "render.light: expected three comma-separated numbers, got {value:?}"
        ))),
    }
}

pub fn parse_outputs(value: &str) -> Result<BTreeSet<Output>, CliError> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::parse)
        .collect()
}

fn parse_bool(key: &str, value: &str) -> Result<bool, CliError> {
    match value {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(CliError::Config(format!("{key}: expected true or false, got {value:?}"))),
    }
}

impl RenderConfig {
    /// Sets one dotted key.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        match key {
            "form" => self.form_label = value.to_string(),
            "grid.x_min" => self.grid.x_min = parse_num(key, value)?,
            "grid.x_max" => self.grid.x_max = parse_num(key, value)?,
            "grid.y_min" => self.grid.y_min = parse_num(key, value)?,
            "grid.y_max" => self.grid.y_max = parse_num(key, value)?,
            "grid.nx" => self.grid.nx = parse_num(key, value)?,
            "grid.ny" => self.grid.ny = parse_num(key, value)?,
            "heightmap.kind" => {
                self.heightmap.kind = value
                    .parse::<HeightMapKind>()
                    .map_err(|e| CliError::Config(format!("{key}: {e}")))?
            }
            "heightmap.alpha" => self.heightmap.alpha = parse_num(key, value)?,
            "eval.target_rel_err" => self.eval.target_rel_err = parse_num(key, value)?,
            "eval.initial_bits" => self.eval.initial_bits = parse_num(key, value)?,
            "eval.max_bits" => self.eval.max_bits = parse_num(key, value)?,
            "eval.y_floor" => self.eval.y_floor = parse_num(key, value)?,
            "eval.min_coeffs" => self.min_coeffs = parse_num(key, value)?,
            "render.vertical_scale" => {
                self.vertical_scale = match value {
                    "auto" => None,
                    v => Some(parse_num(key, v)?),
                }
            }
            "render.light" => self.light_dir = parse_light(value)?,
            "render.outputs" => self.outputs = parse_outputs(value)?,
            "render.output_dir" => self.output_dir = PathBuf::from(value),
            "render.offline" => self.offline = parse_bool(key, value)?,
            _ => return Err(CliError::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    /// Applies a config file on top of `self`. Blank lines and `#` comments
    /// are ignored; a key may appear once.
    pub fn apply_text(&mut self, text: &str) -> Result<(), CliError> {
        let mut seen = BTreeSet::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Config(format!("line {}: expected `key = value`, got {raw:?}", idx + 1))
            })?;
            let key = key.trim();
            if !seen.insert(key.to_string()) {
                return Err(CliError::Config(format!("line {}: duplicate key {key:?}", idx + 1)));
            }
            self.set(key, value.trim())
                .map_err(|e| CliError::Config(format!("line {}: {}", idx + 1, e.message())))?;
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self, CliError> {
        let mut config = RenderConfig::default();
        config.apply_text(text)?;
        Ok(config)
    }

    fn entries(&self) -> BTreeMap<&'static str, String> {
        let f = |v: f64| format!("{v:?}");
        let outputs: Vec<&str> = self.outputs.iter().map(|o| o.as_str()).collect();
        let [lx, ly, lz] = self.light_dir.map(f);
        let values = [
            self.form_label.clone(),
            f(self.grid.x_min),
            f(self.grid.x_max),
            f(self.grid.y_min),
            f(self.grid.y_max),
            self.grid.nx.to_string(),
            self.grid.ny.to_string(),
            self.heightmap.kind.to_string(),
            f(self.heightmap.alpha),
            f(self.eval.target_rel_err),
            self.eval.initial_bits.to_string(),
            self.eval.max_bits.to_string(),
            f(self.eval.y_floor),
            self.min_coeffs.to_string(),
            self.vertical_scale.map_or("auto".to_string(), f),
            format!("{lx},{ly},{lz}"),
            outputs.join(","),
            self.output_dir.display().to_string(),
        ];
        let mut map: BTreeMap<&'static str, String> = KEYS.into_iter().zip(values).collect();
        map.insert("render.offline", self.offline.to_string());
        map
    }

    /// Canonical text: every key, in a fixed order.
    pub fn to_text(&self) -> String {
        let map = self.entries();
        KEYS.iter()
            .chain(&["render.offline"])
            .map(|k| format!("{k} = {}\n", map[k]))
            .collect()
    }

    /// The canonical text minus machine-local keys; hashed into manifests.
    pub fn recipe_text(&self) -> String {
        let map = self.entries();
        KEYS.iter()
            .filter(|k| !LOCAL_KEYS.contains(k))
            .map(|k| format!("{k} = {}\n", map[k]))
            .collect()
    }

    pub fn effective_vertical_scale(&self) -> f64 {
        self.vertical_scale
            .unwrap_or_else(|| self.grid.default_vertical_scale())
    }

    /// Light direction scaled to unit length.
    pub fn unit_light(&self) -> Result<[f64; 3], CliError> {
        let [x, y, z] = self.light_dir;
        let len = (x * x + y * y + z * z).sqrt();
        if !(len > 0.0 && len.is_finite() && z > 0.0) {
            return Err(CliError::Config(format!(
                "render.light {:?} must be finite, nonzero and point upward (z > 0)",
                self.light_dir
            )));
        }
        Ok(self.light_dir.map(|c| c / len))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |e: &dyn fmt::Display| CliError::Config(e.to_string());
        parse_label(&self.form_label).map_err(|e| bad(&e))?;
        self.grid.validate().map_err(|e| bad(&e))?;
        self.heightmap.validate().map_err(|e| bad(&e))?;
        self.eval.validate().map_err(|e| bad(&e))?;
        if self.outputs.is_empty() {
            return Err(CliError::Config("select at least one output".into()));
        }
        if self.min_coeffs == 0 {
            return Err(CliError::Config("eval.min_coeffs must be positive".into()));
        }
        if let Some(s) = self.vertical_scale {
            if !(s > 0.0 && s.is_finite()) {
                return Err(CliError::Config(format!("render.vertical_scale {s} must be positive")));
            }
        }
        self.unit_light()?;
        Ok(())
    }
}
