//! From modular-form values to terrain: sampled fields, meshes and images.
//!
//! A [`ScalarField`] stores, for every node of a [`GridSpec`], the magnitude
//! and phase of f(z), the height derived from the magnitude by a
//! [`HeightMapSpec`], and the color derived from the phase. [`triangulate`]
//! turns a field into a [`TerrainMesh`]; [`hillshade`] and
//! [`domain_color_image`] turn it into 2D images.

mod color;
mod mesh;
mod shade;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use thiserror::Error;

use crate::numerics::APComplex;
use crate::qexpansion::{evaluate, EvalError, EvalOptions, FormDescriptor};

pub use color::{height, hsv_to_rgb, phase_to_color};
pub use mesh::{triangulate, TerrainMesh, Vertex};
pub use shade::{
    domain_color_2d, domain_color_image, domain_color_pixel, hillshade, DEFAULT_LIGHT_DIR,
    HILLSHADE_AMBIENT,
};

#[derive(Debug, Error)]
pub enum TerrainError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("degenerate grid: {nx}×{ny} cells")]
    DegenerateGrid { nx: usize, ny: usize },
    #[error("invalid height map: {0}")]
    InvalidHeightMap(String),
    #[error("every node lies below the evaluation floor")]
    EmptyField,
    #[error("invalid light direction {0:?}: must be unit length with positive z")]
    InvalidLight([f64; 3]),
    #[error("vertical scale {0} must be positive and finite")]
    InvalidScale(f64),
    #[error("field arrays have {found} entries, grid has {expected} nodes")]
    FieldShape { expected: usize, found: usize },
    #[error("evaluation at z = {x} + {y}i failed: {source}")]
    Evaluation {
        x: f64,
        y: f64,
        #[source]
        source: EvalError,
    },
}

/// Rectangle `[x_min, x_max] × [y_min, y_max]` in ℍ split into `nx × ny` cells.
#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    pub fn new(
        x_min: f64,
        x_max: f64,
        y_min: f64,
        y_max: f64,
        nx: usize,
        ny: usize,
    ) -> Result<Self, TerrainError> {
        let grid = GridSpec {
            x_min,
            x_max,
            y_min,
            y_max,
            nx,
            ny,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<(), TerrainError> {
        let finite = [self.x_min, self.x_max, self.y_min, self.y_max]
            .iter()
            .all(|v| v.is_finite());
        if !finite || !(self.x_min < self.x_max) {
            return Err(TerrainError::InvalidGrid(format!(
                "need x_min < x_max, got [{}, {}]",
                self.x_min, self.x_max
            )));
        }
        if !(0.0 < self.y_min && self.y_min < self.y_max) {
            return Err(TerrainError::InvalidGrid(format!(
                "need 0 < y_min < y_max, got [{}, {}]",
                self.y_min, self.y_max
            )));
        }
        if self.nx == 0 || self.ny == 0 {
            return Err(TerrainError::DegenerateGrid {
                nx: self.nx,
                ny: self.ny,
            });
        }
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        (self.nx + 1) * (self.ny + 1)
    }

    /// Row-major node index; rows run along x at fixed y.
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * (self.nx + 1) + i
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + (self.x_max - self.x_min) * (i as f64 / self.nx as f64)
    }

    pub fn y(&self, j: usize) -> f64 {
        self.y_min + (self.y_max - self.y_min) * (j as f64 / self.ny as f64)
    }

    /// 0.35 times the shorter side of the rectangle.
    pub fn default_vertical_scale(&self) -> f64 {
        0.35 * (self.x_max - self.x_min).min(self.y_max - self.y_min)
    }

    /// Coordinates of node `k` in index order.
    pub fn node(&self, k: usize) -> (f64, f64) {
        let row = self.nx + 1;
        (self.x(k % row), self.y(k / row))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HeightMapKind {
    /// clamp(tanh r)
    Tanh,
    /// clamp(arctan(1/r))
    ArctanRecip,
    /// clamp(arctan(log(r^α + 1)))
    LogArctan,
}

impl fmt::Display for HeightMapKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HeightMapKind::Tanh => "tanh",
            HeightMapKind::ArctanRecip => "arctan_recip",
            HeightMapKind::LogArctan => "log_arctan",
        })
    }
}

impl FromStr for HeightMapKind {
    type Err = TerrainError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "tanh" => Ok(HeightMapKind::Tanh),
            "arctan_recip" => Ok(HeightMapKind::ArctanRecip),
            "log_arctan" => Ok(HeightMapKind::LogArctan),
            other => Err(TerrainError::InvalidHeightMap(format!(
                "unknown kind {other:?} (tanh, arctan_recip, log_arctan)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HeightMapSpec {
    pub kind: HeightMapKind,
    /// Exponent on r for `LogArctan`, in (0, 1].
    pub alpha: f64,
}

impl Default for HeightMapSpec {
    fn default() -> Self {
        HeightMapSpec {
            kind: HeightMapKind::LogArctan,
            alpha: 0.5,
        }
    }
}

impl HeightMapSpec {
    pub fn validate(&self) -> Result<(), TerrainError> {
        if self.alpha > 0.0 && self.alpha <= 1.0 {
            Ok(())
        } else {
            Err(TerrainError::InvalidHeightMap(format!(
                "alpha {} must lie in (0, 1]",
                self.alpha
            )))
        }
    }
}

/// Per-node samples over a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    pub grid: GridSpec,
    pub magnitude: Vec<f64>,
    pub phase: Vec<f64>,
    pub height: Vec<f64>,
    pub color: Vec<[f64; 3]>,
    /// False where the node was below the evaluation floor.
    pub confidence: Vec<bool>,
    /// Precision of the accepted evaluation rung; 0 for low-confidence nodes.
    pub precision_bits: Vec<u32>,
}

impl ScalarField {
    /// A field with given heights and colors and no evaluation behind it.
    pub fn from_heights(
        grid: GridSpec,
        height: Vec<f64>,
        color: Vec<[f64; 3]>,
    ) -> Result<Self, TerrainError> {
        grid.validate()?;
        let n = grid.node_count();
        for found in [height.len(), color.len()] {
            if found != n {
                return Err(TerrainError::FieldShape { expected: n, found });
            }
        }
        Ok(ScalarField {
            grid,
            magnitude: vec![0.0; n],
            phase: vec![0.0; n],
            height,
            color,
            confidence: vec![true; n],
            precision_bits: vec![0; n],
        })
    }

    pub fn low_confidence_count(&self) -> usize {
        self.confidence.iter().filter(|c| !**c).count()
    }

    /// Node count per accepted precision, over confident nodes.
    pub fn precision_histogram(&self) -> BTreeMap<u32, usize> {
        let mut hist = BTreeMap::new();
        for (bits, ok) in self.precision_bits.iter().zip(&self.confidence) {
            if *ok {
                *hist.entry(*bits).or_insert(0) += 1;
            }
        }
        hist
    }
}

struct NodeSample {
    magnitude: f64,
    phase: f64,
    bits: u32,
}

/// Evaluates `form` at every grid node (in parallel) and derives heights and
/// colors. Nodes below the level-N floor are kept as low-confidence: height
/// 0, phase 0, black.
pub fn sample_field(
    form: &FormDescriptor,
    grid: &GridSpec,
    hmap: &HeightMapSpec,
    opts: &EvalOptions,
) -> Result<ScalarField, TerrainError> {
    grid.validate()?;
    hmap.validate()?;
    opts.validate().map_err(|source| TerrainError::Evaluation {
        x: grid.x_min,
        y: grid.y_min,
        source,
    })?;

    let samples: Vec<Result<Option<NodeSample>, TerrainError>> = (0..grid.node_count())
        .into_par_iter()
        .map(|k| {
            let (x, y) = grid.node(k);
            let z = APComplex::from_f64(x, y, opts.initial_bits);
            match evaluate(form, &z, opts) {
                Ok(ev) => Ok(Some(NodeSample {
                    magnitude: ev.polar.magnitude_f64(),
                    phase: ev.polar.phase_f64(),
                    bits: ev.bits,
                })),
                Err(EvalError::BelowFloor { .. }) => Ok(None),
                Err(source) => Err(TerrainError::Evaluation { x, y, source }),
            }
        })
        .collect();

    let n = grid.node_count();
    let mut field = ScalarField {
        grid: grid.clone(),
        magnitude: Vec::with_capacity(n),
        phase: Vec::with_capacity(n),
        height: Vec::with_capacity(n),
        color: Vec::with_capacity(n),
        confidence: Vec::with_capacity(n),
        precision_bits: Vec::with_capacity(n),
    };
    for sample in samples {
        match sample? {
            Some(s) => {
                field.magnitude.push(s.magnitude);
                field.phase.push(s.phase);
                field.height.push(height(hmap, s.magnitude));
                field.color.push(phase_to_color(s.phase));
                field.confidence.push(true);
                field.precision_bits.push(s.bits);
            }
            None => {
                field.magnitude.push(0.0);
                field.phase.push(0.0);
                field.height.push(0.0);
                field.color.push([0.0; 3]);
                field.confidence.push(false);
                field.precision_bits.push(0);
            }
        }
    }
    if field.low_confidence_count() == n {
        return Err(TerrainError::EmptyField);
    }
    Ok(field)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_validation() {
        assert!(GridSpec::new(-0.5, 0.5, 0.1, 1.1, 4, 4).is_ok());
        assert!(matches!(
            GridSpec::new(0.5, -0.5, 0.1, 1.1, 4, 4),
            Err(TerrainError::InvalidGrid(_))
        ));
        assert!(GridSpec::new(-0.5, 0.5, 0.0, 1.1, 4, 4).is_err());
        assert!(GridSpec::new(-0.5, 0.5, 1.1, 0.1, 4, 4).is_err());
        assert!(matches!(
            GridSpec::new(-0.5, 0.5, 0.1, 1.1, 0, 4),
            Err(TerrainError::DegenerateGrid { .. })
        ));
    }

    #[test]
    fn grid_nodes_cover_the_rectangle() {
        let g = GridSpec::new(-0.5, 0.5, 0.5, 1.5, 4, 2).unwrap();
        assert_eq!(g.node_count(), 15);
        assert_eq!(g.node(0), (-0.5, 0.5));
        assert_eq!(g.node(g.index(4, 2)), (0.5, 1.5));
        assert_eq!(g.node(g.index(2, 1)), (0.0, 1.0));
    }

    #[test]
    fn height_map_parsing_and_validation() {
        assert_eq!("log_arctan".parse::<HeightMapKind>().unwrap(), HeightMapKind::LogArctan);
        assert!("cosh".parse::<HeightMapKind>().is_err());
        let bad = HeightMapSpec {
            kind: HeightMapKind::LogArctan,
            alpha: 1.5,
        };
        assert!(bad.validate().is_err());
        assert!(HeightMapSpec::default().validate().is_ok());
    }

    #[test]
    fn smallest_grid_samples_four_nodes() {
        let form = FormDescriptor::delta(200);
        let grid = GridSpec::new(-0.2, 0.3, 0.8, 1.2, 1, 1).unwrap();
        let field = sample_field(&form, &grid, &HeightMapSpec::default(), &EvalOptions::default())
            .unwrap();
        assert_eq!(field.magnitude.len(), 4);
        assert_eq!(field.low_confidence_count(), 0);
        assert!(field.height.iter().all(|h| (0.0..=1.0).contains(h)));
    }

    #[test]
    fn all_below_floor_is_empty() {
        let form = crate::lmfdb::to_descriptor(
            &crate::lmfdb::bundled(&crate::lmfdb::parse_label("5.4.a.a").unwrap(), 1)
                .unwrap()
                .unwrap(),
        )
        .unwrap();
        let grid = GridSpec::new(-0.5, 0.5, 0.01, 0.02, 2, 2).unwrap();
        let r = sample_field(&form, &grid, &HeightMapSpec::default(), &EvalOptions::default());
        assert!(matches!(r, Err(TerrainError::EmptyField)));
    }
}
