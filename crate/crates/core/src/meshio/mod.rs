//! Interchange formats: ASCII PLY and OBJ meshes, PNG images.

mod obj;
mod ply;
mod png;

use thiserror::Error;

pub use self::obj::{export_obj, import_obj};
pub use self::ply::{export_ply, import_ply};
pub use self::png::write_png;

#[derive(Debug, Error)]
pub enum MeshIoError {
    #[error("schema mismatch: {0}")]
    Schema(String),
    #[error("malformed count: expected {expected} {element} records, found {found}")]
    MalformedCount {
        element: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("face {face} references vertex {index} but only {vertices} vertices exist")]
    IndexOutOfRange {
        face: usize,
        index: i64,
        vertices: usize,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("invalid image: {0}")]
    InvalidImage(String),
    #[error("png encoding failed: {0}")]
    Png(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// 8-bit RGB raster, row-major from the top-left pixel.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Image {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<[u8; 3]>,
}

impl Image {
    /// Panics unless `pixels.len() == width * height`.
    pub fn new(width: usize, height: usize, pixels: Vec<[u8; 3]>) -> Self {
        assert_eq!(pixels.len(), width * height, "pixel count must equal width·height");
        Image {
            width,
            height,
            pixels,
        }
    }

    pub fn pixel(&self, x: usize, y: usize) -> [u8; 3] {
        self.pixels[y * self.width + x]
    }

    pub fn validate(&self) -> Result<(), MeshIoError> {
        if self.width == 0 || self.height == 0 {
            return Err(MeshIoError::InvalidImage(format!(
                "dimensions {}×{} must be positive",
                self.width, self.height
            )));
        }
        if self.pixels.len() != self.width * self.height {
            return Err(MeshIoError::InvalidImage(format!(
                "{} pixels for {}×{}",
                self.pixels.len(),
                self.width,
                self.height
            )));
        }
        Ok(())
    }
}

/// `%.9g`: nine significant digits, trailing zeros dropped.
pub(crate) fn fmt_g9(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let sci = format!("{v:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        trim_zeros(format!("{v:.decimals$}"))
    } else {
        let mantissa = trim_zeros(mantissa.to_string());
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

pub(crate) fn color_byte(c: f64) -> u8 {
    (c.clamp(0.0, 1.0) * 255.0).round() as u8
}
