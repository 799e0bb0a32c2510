//! The action of SL(2, ℤ) on the upper half-plane.
//!
//! [`reduce`] moves a point into the standard fundamental domain
//! `|Re z| ≤ 1/2, |z| ≥ 1` and records the matrix that did it, so that a
//! level-one form can be evaluated where its q-expansion converges fastest and
//! transported back with [`automorphy_factor`].

use std::fmt;
use std::ops::Mul;

use rug::{Float, Integer};
use thiserror::Error;

use crate::numerics::{cpow_int, APComplex, NumericsError};

#[derive(Debug, Error)]
pub enum MoebiusError {
    #[error("matrix ({a}, {b}; {c}, {d}) has determinant {det}, expected 1")]
    NotUnimodular {
        a: Integer,
        b: Integer,
        c: Integer,
        d: Integer,
        det: Integer,
    },
    #[error("point is not in the upper half-plane (Im z = {0})")]
    NotInUpperHalfPlane(String),
    #[error("reduction did not finish within {0} iterations")]
    IterationCap(u32),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// An integer matrix `(a b; c d)` with `ad − bc = 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct UnimodularMatrix {
    a: Integer,
    b: Integer,
    c: Integer,
    d: Integer,
}

impl UnimodularMatrix {
    pub fn new(
        a: impl Into<Integer>,
        b: impl Into<Integer>,
        c: impl Into<Integer>,
        d: impl Into<Integer>,
    ) -> Result<Self, MoebiusError> {
        let (a, b, c, d) = (a.into(), b.into(), c.into(), d.into());
        let det = Integer::from(&a * &d) - Integer::from(&b * &c);
        if det != 1 {
            return Err(MoebiusError::NotUnimodular { a, b, c, d, det });
        }
        Ok(UnimodularMatrix { a, b, c, d })
    }

    pub fn identity() -> Self {
        Self::raw(1, 0, 0, 1)
    }

    /// S: z ↦ −1/z.
    pub fn s() -> Self {
        Self::raw(0, -1, 1, 0)
    }

    /// Tⁿ: z ↦ z + n.
    pub fn t_pow(n: impl Into<Integer>) -> Self {
        UnimodularMatrix {
            a: Integer::from(1),
            b: n.into(),
            c: Integer::new(),
            d: Integer::from(1),
        }
    }

    fn raw(a: i64, b: i64, c: i64, d: i64) -> Self {
        UnimodularMatrix {
            a: a.into(),
            b: b.into(),
            c: c.into(),
            d: d.into(),
        }
    }

    pub fn a(&self) -> &Integer {
        &self.a
    }
    pub fn b(&self) -> &Integer {
        &self.b
    }
    pub fn c(&self) -> &Integer {
        &self.c
    }
    pub fn d(&self) -> &Integer {
        &self.d
    }

    pub fn is_identity(&self) -> bool {
        self.a == 1 && self.b == 0 && self.c == 0 && self.d == 1
    }

    pub fn inverse(&self) -> Self {
        UnimodularMatrix {
            a: self.d.clone(),
            b: Integer::from(-&self.b),
            c: Integer::from(-&self.c),
            d: self.a.clone(),
        }
    }

    /// Largest absolute value among the four entries.
    pub fn max_abs_entry(&self) -> Integer {
        [&self.a, &self.b, &self.c, &self.d]
            .into_iter()
            .map(|e| Integer::from(e.abs_ref()))
            .max()
            .unwrap_or_default()
    }

    /// cz + d at the precision of `z`.
    pub fn denominator(&self, z: &APComplex) -> APComplex {
        let prec = z.precision_bits();
        let c = Float::with_val(prec, &self.c);
        let d = Float::with_val(prec, &self.d);
        let re = Float::with_val(prec, z.re().mul_add_ref(&c, &d));
        let im = Float::with_val(prec, z.im() * &c);
        APComplex::new(re, im)
    }

    fn numerator(&self, z: &APComplex) -> APComplex {
        let prec = z.precision_bits();
        let a = Float::with_val(prec, &self.a);
        let b = Float::with_val(prec, &self.b);
        let re = Float::with_val(prec, z.re().mul_add_ref(&a, &b));
        let im = Float::with_val(prec, z.im() * &a);
        APComplex::new(re, im)
    }
}

impl fmt::Display for UnimodularMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.a, self.b, self.c, self.d)
    }
}

impl Mul<&UnimodularMatrix> for &UnimodularMatrix {
    type Output = UnimodularMatrix;
    fn mul(self, rhs: &UnimodularMatrix) -> UnimodularMatrix {
        let dot = |x: &Integer, y: &Integer, u: &Integer, v: &Integer| -> Integer {
            Integer::from(x * y) + Integer::from(u * v)
        };
        UnimodularMatrix {
            a: dot(&self.a, &rhs.a, &self.b, &rhs.c),
            b: dot(&self.a, &rhs.b, &self.b, &rhs.d),
            c: dot(&self.c, &rhs.a, &self.d, &rhs.c),
            d: dot(&self.c, &rhs.b, &self.d, &rhs.d),
        }
    }
}

fn check_upper(z: &APComplex) -> Result<(), MoebiusError> {
    if z.im().is_sign_positive() && !z.im().is_zero() && z.im().is_finite() {
        Ok(())
    } else {
        Err(MoebiusError::NotInUpperHalfPlane(
            z.im().to_string_radix(10, Some(17)),
        ))
    }
}

/// (az + b)/(cz + d).
pub fn apply(m: &UnimodularMatrix, z: &APComplex) -> Result<APComplex, MoebiusError> {
    check_upper(z)?;
    if m.c == 0 {
        // a = d = ±1 here, so this is an exact translation
        let num = m.numerator(z);
        return Ok(if m.d == 1 { num } else { -&num });
    }
    Ok(m.numerator(z).div(&m.denominator(z)))
}

/// A point moved into the fundamental domain.
#[derive(Clone, Debug)]
pub struct ReductionResult {
    pub z_reduced: APComplex,
    /// Satisfies `apply(matrix, z_original) = z_reduced`.
    pub matrix: UnimodularMatrix,
    /// Number of inversions applied.
    pub steps: u32,
}

/// Reduction tolerance 2^(−bits/2) used when the caller does not pick one.
pub fn default_epsilon(bits: u32) -> f64 {
    (-(bits as f64) / 2.0).exp2()
}

/// Iteration budget for a point of imaginary part `y`.
fn iteration_cap(y: f64) -> u32 {
    let growth = if y > 0.0 && y < 1.0 { (1.0 / y).log2() } else { 0.0 };
    (10.0 * (1.0 + growth)).ceil() as u32
}

/// Moves `z` into `|Re z| ≤ 1/2, |z| ≥ 1 − ε`.
///
/// Each round translates by `T^{−n}` with `n = round(Re z)` (ties to even)
/// and inverts with `S` while `|z| < 1 − ε`.
pub fn reduce(z: &APComplex, epsilon: f64) -> Result<ReductionResult, MoebiusError> {
    check_upper(z)?;
    let prec = z.precision_bits();
    let cap = iteration_cap(z.im().to_f64());
    let radius = Float::with_val(prec, 1u32) - Float::with_val(prec, epsilon);
    let radius_sqr = Float::with_val(prec, radius.square_ref());

    let mut w = z.clone();
    let mut matrix = UnimodularMatrix::identity();
    let mut steps = 0u32;
    for _ in 0..cap {
        // MPFR's nearest rounding breaks ties to even
        let n = w.re().to_integer().expect("finite real part");
        if n != 0 {
            let shift = Float::with_val(prec, &n);
            w = APComplex::new(Float::with_val(prec, w.re() - &shift), w.im().clone());
            matrix = &UnimodularMatrix::t_pow(-n) * &matrix;
        }
        if w.norm_sqr() < radius_sqr {
            w = -&w.recip();
            matrix = &UnimodularMatrix::s() * &matrix;
            steps += 1;
        } else {
            return Ok(ReductionResult {
                z_reduced: w,
                matrix,
                steps,
            });
        }
    }
    Err(MoebiusError::IterationCap(cap))
}

/// (cz + d)^k, the factor with f(mz) = (cz + d)^k f(z) for weight k.
pub fn automorphy_factor(
    m: &UnimodularMatrix,
    z: &APComplex,
    k: i64,
) -> Result<APComplex, MoebiusError> {
    check_upper(z)?;
    Ok(cpow_int(&m.denominator(z), k)?)
}
