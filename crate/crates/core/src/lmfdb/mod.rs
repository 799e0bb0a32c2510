//! q-expansion coefficient data keyed by LMFDB newform label.
//!
//! Coefficients travel as exact decimal strings in a small line-oriented text
//! format ([`CoefficientFile`]) and are only rounded to binary floats when a
//! [`FormDescriptor`] is evaluated. Data comes from an on-disk cache, from
//! fixtures bundled with the crate, or from one HTTP GET.

mod bundled;
mod fetch;

use std::fmt;
use std::str::FromStr;
use std::time::SystemTime;

use rug::{Integer, Rational};
use thiserror::Error;

use crate::qexpansion::{Coefficient, FormDescriptor};

pub use bundled::{bundled, BUNDLED_LABELS};
pub use fetch::{
    default_cache_dir, fetch, parse_coefficient_response, FetchConfig, BASE_URL_ENV,
    CACHE_DIR_ENV, DEFAULT_BASE_URL, DEFAULT_MIN_COEFFS,
};

#[derive(Debug, Error)]
pub enum LmfdbError {
    #[error("malformed label {label:?}: bad {segment} segment {value:?}")]
    Label {
        label: String,
        segment: &'static str,
        value: String,
    },
    #[error("form {0} not found")]
    NotFound(String),
    #[error("network error fetching {label}: {message}")]
    Network { label: String, message: String },
    #[error("form {0} is not cached or bundled and network access is disabled")]
    Offline(String),
    #[error("form {label}: {available} coefficients available, {needed} requested")]
    InsufficientCoefficients {
        label: String,
        needed: usize,
        available: usize,
    },
    #[error("form {0} is not normalized: a(1) must be 1")]
    NotNormalized(String),
    #[error("coefficient data has no entries")]
    Empty,
    #[error("coefficient data, line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("undecodable number {0:?}")]
    Decode(String),
    #[error("cache I/O: {0}")]
    Io(#[from] std::io::Error),
}

/// `N.k.char.iso`, e.g. `5.4.a.a`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FormLabel {
    pub level: u64,
    pub weight: u32,
    pub character_orbit: String,
    pub isogeny_letter: String,
}

fn is_letters(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_lowercase())
}

/// Splits `N.k.char.iso` into its four fields.
pub fn parse_label(s: &str) -> Result<FormLabel, LmfdbError> {
    let bad = |segment: &'static str, value: &str| LmfdbError::Label {
        label: s.to_string(),
        segment,
        value: value.to_string(),
    };
    let parts: Vec<&str> = s.split('.').collect();
    if parts.len() != 4 {
        return Err(bad("structure", s));
    }
    let positive = |segment: &'static str, v: &str| -> Result<u64, LmfdbError> {
        if v.is_empty() || !v.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad(segment, v));
        }
        match v.parse::<u64>() {
            Ok(n) if n >= 1 => Ok(n),
            _ => Err(bad(segment, v)),
        }
    };
    let level = positive("level", parts[0])?;
    let weight = positive("weight", parts[1])?;
    let weight = u32::try_from(weight).map_err(|_| bad("weight", parts[1]))?;
    if !is_letters(parts[2]) {
        return Err(bad("character", parts[2]));
    }
    if !is_letters(parts[3]) {
        return Err(bad("isogeny", parts[3]));
    }
    Ok(FormLabel {
        level,
        weight,
        character_orbit: parts[2].to_string(),
        isogeny_letter: parts[3].to_string(),
    })
}

impl fmt::Display for FormLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}.{}.{}.{}",
            self.level, self.weight, self.character_orbit, self.isogeny_letter
        )
    }
}

impl FromStr for FormLabel {
    type Err = LmfdbError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_label(s)
    }
}

/// Where a coefficient file came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Source {
    Remote,
    Cache,
    Bundled,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Source::Remote => "remote",
            Source::Cache => "cache",
            Source::Bundled => "bundled",
        })
    }
}

/// One coefficient line: `n re im` as exact decimal strings.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoefficientEntry {
    pub n: usize,
    pub re: String,
    pub im: String,
}

/// Coefficients a₁..a_count of one form.
///
/// Text format: a header `label N k char iso count`, then one `n re im` line
/// per coefficient, LF-terminated.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientFile {
    pub label: FormLabel,
    pub entries: Vec<CoefficientEntry>,
    pub source: Source,
    pub fetched_at: Option<SystemTime>,
}

impl CoefficientFile {
    /// Validates contiguity, number syntax and a(1) = 1.
    pub fn new(
        label: FormLabel,
        entries: Vec<CoefficientEntry>,
        source: Source,
    ) -> Result<Self, LmfdbError> {
        if entries.is_empty() {
            return Err(LmfdbError::Empty);
        }
        for (i, e) in entries.iter().enumerate() {
            if e.n != i + 1 {
                return Err(LmfdbError::Format {
                    line: i + 2,
                    message: format!("expected index {}, found {}", i + 1, e.n),
                });
            }
            parse_decimal(&e.re)?;
            parse_decimal(&e.im)?;
        }
        let first = &entries[0];
        if parse_decimal(&first.re)? != 1 || parse_decimal(&first.im)? != 0 {
            return Err(LmfdbError::NotNormalized(label.to_string()));
        }
        Ok(CoefficientFile {
            label,
            entries,
            source,
            fetched_at: None,
        })
    }

    pub fn count(&self) -> usize {
        self.entries.len()
    }

    /// Keeps only the first `n` coefficients.
    pub fn truncated(mut self, n: usize) -> Self {
        self.entries.truncate(n.max(1));
        self
    }

    pub fn to_text(&self) -> String {
        let l = &self.label;
        let mut out = format!(
            "{} {} {} {} {} {}\n",
            l,
            l.level,
            l.weight,
            l.character_orbit,
            l.isogeny_letter,
            self.entries.len()
        );
        for e in &self.entries {
            out.push_str(&format!("{} {} {}\n", e.n, e.re, e.im));
        }
        out
    }

    pub fn from_text(text: &str, source: Source) -> Result<Self, LmfdbError> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or(LmfdbError::Empty)?;
        let label = parse_header(header)?;
        let (label, declared) = label;
        let mut entries = Vec::with_capacity(declared);
        for (idx, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            entries.push(parse_entry(line, idx + 1)?);
        }
        if entries.len() != declared {
            return Err(LmfdbError::Format {
                line: 1,
                message: format!("header declares {declared} coefficients, found {}", entries.len()),
            });
        }
        CoefficientFile::new(label, entries, source)
    }
}

fn parse_header(line: &str) -> Result<(FormLabel, usize), LmfdbError> {
    let fmt_err = |message: String| LmfdbError::Format { line: 1, message };
    let fields: Vec<&str> = line.split_whitespace().collect();
    if fields.len() != 6 {
        return Err(fmt_err(format!("header needs 6 fields, found {}", fields.len())));
    }
    let label = parse_label(fields[0])?;
    let consistent = fields[1] == label.level.to_string()
        && fields[2] == label.weight.to_string()
        && fields[3] == label.character_orbit
        && fields[4] == label.isogeny_letter;
    if !consistent {
        return Err(fmt_err(format!("header fields disagree with label {}", fields[0])));
    }
    let count = fields[5]
        .parse::<usize>()
        .map_err(|_| fmt_err(format!("bad count {:?}", fields[5])))?;
    Ok((label, count))
}

fn parse_entry(line: &str, line_no: usize) -> Result<CoefficientEntry, LmfdbError> {
    let fields: Vec<&str> = line.split_whitespace().collect();
    if fields.len() != 3 {
        return Err(LmfdbError::Format {
            line: line_no,
            message: format!("expected `n re im`, found {line:?}"),
        });
    }
    let n = fields[0].parse::<usize>().map_err(|_| LmfdbError::Format {
        line: line_no,
        message: format!("bad index {:?}", fields[0]),
    })?;
    Ok(CoefficientEntry {
        n,
        re: fields[1].to_string(),
        im: fields[2].to_string(),
    })
}

/// Exact value of a decimal string such as `-24`, `0.125` or `1.5e-3`.
pub fn parse_decimal(s: &str) -> Result<Rational, LmfdbError> {
    let err = || LmfdbError::Decode(s.to_string());
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => {
            let exp = s[pos + 1..].parse::<i32>().map_err(|_| err())?;
            (&s[..pos], exp)
        }
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.as_bytes().first() {
        Some(b'-') => (true, &mantissa[1..]),
        Some(b'+') => (false, &mantissa[1..]),
        _ => (false, mantissa),
    };
    let (int_part, frac_part) = match digits.split_once('.') {
        Some((i, f)) => (i, f),
        None => (digits, ""),
    };
    let all_digits = |t: &str| t.bytes().all(|b| b.is_ascii_digit());
    if (int_part.is_empty() && frac_part.is_empty()) || !all_digits(int_part) || !all_digits(frac_part) {
        return Err(err());
    }
    let joined = format!("{int_part}{frac_part}");
    let mut value = Rational::from(Integer::from_str(&joined).map_err(|_| err())?);
    let scale = exponent - frac_part.len() as i32;
    if scale >= 0 {
        value *= Integer::from(Integer::u_pow_u(10, scale as u32));
    } else {
        value /= Integer::from(Integer::u_pow_u(10, scale.unsigned_abs()));
    }
    if negative {
        value = -value;
    }
    Ok(value)
}

/// Converts exact decimal entries into an evaluable descriptor.
pub fn to_descriptor(file: &CoefficientFile) -> Result<FormDescriptor, LmfdbError> {
    if file.entries.is_empty() {
        return Err(LmfdbError::Empty);
    }
    let coefficients = file
        .entries
        .iter()
        .map(|e| {
            Ok(Coefficient {
                re: parse_decimal(&e.re)?,
                im: parse_decimal(&e.im)?,
            })
        })
        .collect::<Result<Vec<_>, LmfdbError>>()?;
    FormDescriptor::new(
        file.label.to_string(),
        file.label.level,
        i64::from(file.label.weight),
        coefficients,
    )
    .map_err(|_| LmfdbError::NotNormalized(file.label.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_from_the_three_forms() {
        let d = parse_label("1.12.a.a").unwrap();
        assert_eq!((d.level, d.weight), (1, 12));
        let f = parse_label("5.4.a.a").unwrap();
        assert_eq!((f.level, f.weight), (5, 4));
        let g = parse_label("56.1.h.a").unwrap();
        assert_eq!((g.level, g.weight), (56, 1));
        assert_eq!(g.character_orbit, "h");
        assert_eq!(g.to_string(), "56.1.h.a");
    }

    #[test]
    fn malformed_labels_name_the_segment() {
        let seg = |s: &str| match parse_label(s) {
            Err(LmfdbError::Label { segment, .. }) => segment,
            other => panic!("{s}: {other:?}"),
        };
        assert_eq!(seg("x.y"), "structure");
        assert_eq!(seg("x.12.a.a"), "level");
        assert_eq!(seg("0.12.a.a"), "level");
        assert_eq!(seg("1.-2.a.a"), "weight");
        assert_eq!(seg("1.12.A.a"), "character");
        assert_eq!(seg("1.12.a.3"), "isogeny");
        assert_eq!(seg("1.12.a."), "isogeny");
    }

    #[test]
    fn decimals_are_exact() {
        assert_eq!(parse_decimal("-24").unwrap(), -24);
        assert_eq!(parse_decimal("0.125").unwrap(), Rational::from((1, 8)));
        assert_eq!(parse_decimal("-1.5e-3").unwrap(), Rational::from((-3, 2000)));
        assert_eq!(parse_decimal("2E2").unwrap(), 200);
        assert_eq!(parse_decimal(".5").unwrap(), Rational::from((1, 2)));
        for bad in ["", "-", "1.2.3", "abc", "1e", "0x10", "1,5"] {
            assert!(parse_decimal(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn text_format_round_trip() {
        let text = "5.4.a.a 5 4 a a 3\n1 1 0\n2 -4 0\n3 2 0\n";
        let file = CoefficientFile::from_text(text, Source::Cache).unwrap();
        assert_eq!(file.count(), 3);
        assert_eq!(file.to_text(), text);
    }

    #[test]
    fn text_format_errors() {
        let gap = "5.4.a.a 5 4 a a 2\n1 1 0\n3 2 0\n";
        assert!(matches!(
            CoefficientFile::from_text(gap, Source::Cache),
            Err(LmfdbError::Format { .. })
        ));
        let short = "5.4.a.a 5 4 a a 3\n1 1 0\n2 -4 0\n";
        assert!(CoefficientFile::from_text(short, Source::Cache).is_err());
        let unnormalized = "5.4.a.a 5 4 a a 1\n1 2 0\n";
        assert!(matches!(
            CoefficientFile::from_text(unnormalized, Source::Cache),
            Err(LmfdbError::NotNormalized(_))
        ));
        let mismatch = "5.4.a.a 5 6 a a 1\n1 1 0\n";
        assert!(CoefficientFile::from_text(mismatch, Source::Cache).is_err());
    }

    #[test]
    fn empty_entries_rejected() {
        let label = parse_label("5.4.a.a").unwrap();
        assert!(matches!(
            CoefficientFile::new(label.clone(), Vec::new(), Source::Remote),
            Err(LmfdbError::Empty)
        ));
        let file = CoefficientFile {
            label,
            entries: Vec::new(),
            source: Source::Remote,
            fetched_at: None,
        };
        assert!(matches!(to_descriptor(&file), Err(LmfdbError::Empty)));
    }

    #[test]
    fn descriptor_flags_complex_coefficients() {
        let text = "3.1.b.a 3 1 b a 2\n1 1 0\n2 0.5 -0.25\n";
        let file = CoefficientFile::from_text(text, Source::Remote).unwrap();
        let form = to_descriptor(&file).unwrap();
        assert!(!form.has_real_coefficients());
        assert_eq!(form.coefficient(2).unwrap().im, Rational::from((-1, 4)));
    }
}
