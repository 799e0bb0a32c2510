//! Numerical evaluation of classical modular forms and conversion of the
//! sampled values into "modular terrain": vertex-colored heightfield meshes,
//! domain-coloring images and hillshaded relief.
//!
//! The pipeline runs bottom-up through the modules:
//!
//! - [`numerics`]: arbitrary-precision complex kernel and precision escalation
//! - [`moebius`]: SL(2, ℤ) action, fundamental-domain reduction
//! - [`qexpansion`]: Δ coefficients, product and series evaluation, reduced evaluation
//! - [`lmfdb`]: coefficient data by LMFDB label (cache, bundled fixtures, HTTP)
//! - [`terrain`]: height maps, phase coloring, sampling, triangulation, shading
//! - [`meshio`]: PLY/OBJ/PNG writers and readers

pub mod lmfdb;
pub mod meshio;
pub mod moebius;
pub mod numerics;
pub mod qexpansion;
pub mod terrain;

pub use moebius::{UnimodularMatrix, ReductionResult};
pub use numerics::{APComplex, PolarForm};
pub use qexpansion::{EvalOptions, FormDescriptor};
