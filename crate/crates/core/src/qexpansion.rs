//! Evaluation of modular forms from their q-expansions.
//!
//! Δ is available both as the product `q ∏ (1 − qⁿ)²⁴` and as the series
//! `Σ τ(n) qⁿ`. Any form described by a [`FormDescriptor`] is evaluated by
//! Horner's rule in q. Level-one forms go through [`eval_reduced`], which
//! reduces the point into the fundamental domain first; other levels only use
//! the period-1 translation ([`eval_general_level`]) and refuse points below a
//! height floor.

use std::collections::HashMap;
use std::f64::consts::{LN_2, PI};
use std::fmt;
use std::sync::{Arc, RwLock};

use rug::{Float, Integer, Rational};
use thiserror::Error;

use crate::moebius::{automorphy_factor, default_epsilon, reduce, MoebiusError};
use crate::numerics::{escalate, nome, polar, APComplex, NumericsError, PolarForm};

/// Beyond this many terms a point counts as too close to the real axis.
pub const MAX_TRUNCATION_TERMS: usize = 1_000_000;

const HORNER_GUARD_BITS: u32 = 32;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("form {label} needs {needed} coefficients, only {available} stored")]
    InsufficientCoefficients {
        label: String,
        needed: usize,
        available: usize,
    },
    #[error("Im z = {y} is too close to the real axis for a series bound; reduce first")]
    TooCloseToBoundary { y: f64 },
    #[error("Im z = {y} is below the evaluation floor {floor}")]
    BelowFloor { y: f64, floor: f64 },
    #[error("form {label} has level {level}; reduced evaluation needs level 1")]
    LevelNotOne { label: String, level: u64 },
    #[error("invalid form descriptor: {0}")]
    InvalidForm(String),
    #[error("invalid evaluation options: {0}")]
    InvalidOptions(String),
    #[error("point is not in the upper half-plane")]
    NotInUpperHalfPlane,
    #[error(transparent)]
    Moebius(#[from] MoebiusError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// One q-expansion coefficient, stored exactly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coefficient {
    pub re: Rational,
    pub im: Rational,
}

impl Coefficient {
    pub fn real(re: impl Into<Rational>) -> Self {
        Coefficient {
            re: re.into(),
            im: Rational::new(),
        }
    }
}

/// A modular form: label, level, weight and the coefficients a₁..a_M.
pub struct FormDescriptor {
    label: String,
    level: u64,
    weight: i64,
    coefficients: Vec<Coefficient>,
    has_real_coefficients: bool,
    // coefficients rounded to a working precision, filled on first use
    converted: RwLock<HashMap<u32, Arc<[APComplex]>>>,
}

impl FormDescriptor {
    pub fn new(
        label: impl Into<String>,
        level: u64,
        weight: i64,
        coefficients: Vec<Coefficient>,
    ) -> Result<Self, EvalError> {
        let label = label.into();
        if level < 1 {
            return Err(EvalError::InvalidForm(format!("{label}: level must be at least 1")));
        }
        let first = coefficients
            .first()
            .ok_or_else(|| EvalError::InvalidForm(format!("{label}: no coefficients")))?;
        if first.re != 1 || first.im != 0 {
            return Err(EvalError::InvalidForm(format!(
                "{label}: a(1) = {} + {}i, newforms are normalized to a(1) = 1",
                first.re, first.im
            )));
        }
        let has_real_coefficients = coefficients.iter().all(|c| c.im == 0);
        Ok(FormDescriptor {
            label,
            level,
            weight,
            coefficients,
            has_real_coefficients,
            converted: RwLock::new(HashMap::new()),
        })
    }

    /// Δ = Σ τ(n) qⁿ with `n_max` exact coefficients.
    pub fn delta(n_max: usize) -> Self {
        let coefficients = delta_coefficients(n_max.max(1))
            .into_iter()
            .map(Coefficient::real)
            .collect();
        Self::new("1.12.a.a", 1, 12, coefficients).expect("τ(1) = 1")
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn level(&self) -> u64 {
        self.level
    }

    pub fn weight(&self) -> i64 {
        self.weight
    }

    pub fn coefficient_count(&self) -> usize {
        self.coefficients.len()
    }

    pub fn has_real_coefficients(&self) -> bool {
        self.has_real_coefficients
    }

    /// Exact coefficient aₙ, 1-based.
    pub fn coefficient(&self, n: usize) -> Option<&Coefficient> {
        n.checked_sub(1).and_then(|i| self.coefficients.get(i))
    }

    pub fn coefficients(&self) -> &[Coefficient] {
        &self.coefficients
    }

    /// All coefficients rounded to `bits`.
    pub fn coefficients_at(&self, bits: u32) -> Arc<[APComplex]> {
        if let Some(found) = self.converted.read().expect("cache lock").get(&bits) {
            return Arc::clone(found);
        }
        let values: Arc<[APComplex]> = self
            .coefficients
            .iter()
            .map(|c| APComplex::new(Float::with_val(bits, &c.re), Float::with_val(bits, &c.im)))
            .collect();
        let mut cache = self.converted.write().expect("cache lock");
        Arc::clone(cache.entry(bits).or_insert(values))
    }
}

impl Clone for FormDescriptor {
    fn clone(&self) -> Self {
        FormDescriptor {
            label: self.label.clone(),
            level: self.level,
            weight: self.weight,
            coefficients: self.coefficients.clone(),
            has_real_coefficients: self.has_real_coefficients,
            converted: RwLock::new(HashMap::new()),
        }
    }
}

impl fmt::Debug for FormDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FormDescriptor")
            .field("label", &self.label)
            .field("level", &self.level)
            .field("weight", &self.weight)
            .field("coefficient_count", &self.coefficients.len())
            .field("has_real_coefficients", &self.has_real_coefficients)
            .finish()
    }
}

/// Accuracy and precision policy for one evaluation.
#[derive(Clone, Debug, PartialEq)]
pub struct EvalOptions {
    /// Successive precision rungs must agree to this relative tolerance.
    pub target_rel_err: f64,
    pub initial_bits: u32,
    pub max_bits: u32,
    /// Lowest Im z accepted by [`eval_general_level`].
    pub y_floor: f64,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            target_rel_err: 1e-10,
            initial_bits: 53,
            max_bits: 1024,
            y_floor: 0.05,
        }
    }
}

impl EvalOptions {
    pub fn validate(&self) -> Result<(), EvalError> {
        if !(self.target_rel_err > 0.0 && self.target_rel_err < 1.0) {
            return Err(EvalError::InvalidOptions(format!(
                "target_rel_err {} must lie in (0, 1)",
                self.target_rel_err
            )));
        }
        if self.initial_bits > self.max_bits {
            return Err(EvalError::InvalidOptions(format!(
                "initial_bits {} exceeds max_bits {}",
                self.initial_bits, self.max_bits
            )));
        }
        if !(self.y_floor > 0.0) {
            return Err(EvalError::InvalidOptions(format!(
                "y_floor {} must be positive",
                self.y_floor
            )));
        }
        Ok(())
    }
}

/// A converged value together with the precision that produced it.
#[derive(Clone, Debug)]
pub struct Evaluation {
    pub value: APComplex,
    pub polar: PolarForm,
    pub bits: u32,
    pub runs: u32,
}

/// Truncated power series with exact integer coefficients (index = power of q).
fn series_mul(a: &[Integer], b: &[Integer], len: usize) -> Vec<Integer> {
    let mut out = vec![Integer::new(); len];
    for (i, x) in a.iter().enumerate().take(len) {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(len - i) {
            if !y.is_zero() {
                out[i + j] += x * y;
            }
        }
    }
    out
}

fn series_pow(base: &[Integer], mut exp: u32, len: usize) -> Vec<Integer> {
    let mut acc = vec![Integer::new(); len];
    acc[0] = Integer::from(1);
    let mut base = base.to_vec();
    while exp > 0 {
        if exp & 1 == 1 {
            acc = series_mul(&acc, &base, len);
        }
        exp >>= 1;
        if exp > 0 {
            base = series_mul(&base, &base, len);
        }
    }
    acc
}

/// Ramanujan's τ(1), …, τ(n_max), from the exact expansion of q ∏ (1 − qⁿ)²⁴.
pub fn delta_coefficients(n_max: usize) -> Vec<Integer> {
    if n_max == 0 {
        return Vec::new();
    }
    // ∏ (1 − qᵐ) truncated below q^{n_max − 1}, one factor at a time
    let len = n_max;
    let mut euler = vec![Integer::new(); len];
    euler[0] = Integer::from(1);
    for m in 1..len {
        for i in (m..len).rev() {
            let (lo, hi) = euler.split_at_mut(i);
            hi[0] -= &lo[i - m];
        }
    }
    series_pow(&euler, 24, len)
}

/// q ∏_{n=1}^{num_factors} (1 − qⁿ)²⁴ with q = e^{2πiz}.
pub fn delta_product(z: &APComplex, num_factors: usize) -> Result<APComplex, EvalError> {
    if !is_upper(z) {
        return Err(EvalError::NotInUpperHalfPlane);
    }
    let prec = z.precision_bits();
    let work = prec + HORNER_GUARD_BITS;
    let q = nome(&z.with_precision(work))?;
    let one = APComplex::one(work);
    let mut qn = q.clone();
    let mut product = APComplex::one(work);
    for _ in 0..num_factors.max(1) {
        product = &product * &(&one - &qn);
        qn = &qn * &q;
    }
    let product = crate::numerics::cpow_int(&product, 24)?;
    Ok((&q * &product).with_precision(prec))
}

/// Σ_{n=1}^{n_terms} aₙ qⁿ by Horner's rule in q.
pub fn eval_series(
    form: &FormDescriptor,
    z: &APComplex,
    n_terms: usize,
) -> Result<APComplex, EvalError> {
    if n_terms > form.coefficient_count() {
        return Err(EvalError::InsufficientCoefficients {
            label: form.label.clone(),
            needed: n_terms,
            available: form.coefficient_count(),
        });
    }
    if !is_upper(z) {
        return Err(EvalError::NotInUpperHalfPlane);
    }
    let prec = z.precision_bits();
    let work = prec + HORNER_GUARD_BITS;
    let coeffs = form.coefficients_at(work);
    let q = nome(&z.with_precision(work))?;
    let mut acc = APComplex::zero(work);
    for a in coeffs[..n_terms.max(1)].iter().rev() {
        acc = &(&acc * &q) + a;
    }
    Ok((&acc * &q).with_precision(prec))
}

/// Natural log of Σ_{n>N} n^w e^{−2π(n−1)y}, the majorant tail relative to |q|.
fn log_tail(n_cut: usize, y: f64, weight: f64) -> f64 {
    let log_term = |n: f64| weight * n.ln() - 2.0 * PI * (n - 1.0) * y;
    // the summand peaks near n = w / 2πy
    let peak = (weight / (2.0 * PI * y)).max(1.0);
    let mut n = n_cut as f64 + 1.0;
    let top = if n >= peak {
        log_term(n)
    } else {
        log_term(peak.floor().max(n)).max(log_term(peak.ceil()))
    };
    let mut sum = 0.0f64;
    loop {
        let rel = (log_term(n) - top).exp();
        sum += rel;
        if n > peak && rel < 1e-18 * sum {
            break;
        }
        n += 1.0;
    }
    top + sum.ln()
}

/// Smallest N with Σ_{n>N} n^weight e^{−2πny} < e^{ln_target} e^{−2πy}.
fn truncation_terms_ln(y: f64, weight: i64, ln_target: f64) -> Result<usize, EvalError> {
    if !(y > 0.0) || !y.is_finite() {
        return Err(EvalError::NotInUpperHalfPlane);
    }
    let w = weight.max(0) as f64;
    // past the cap the majorant is still growing, so its tail exceeds any target below 1
    if w > 0.0 && w / (2.0 * PI * y) > MAX_TRUNCATION_TERMS as f64 && ln_target < 0.0 {
        return Err(EvalError::TooCloseToBoundary { y });
    }
    if log_tail(MAX_TRUNCATION_TERMS, y, w) >= ln_target {
        return Err(EvalError::TooCloseToBoundary { y });
    }
    // the tail shrinks as N grows, so bisect on [1, MAX]
    let (mut lo, mut hi) = (0usize, MAX_TRUNCATION_TERMS);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if log_tail(mid, y, w) < ln_target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Number of q-expansion terms needed at height `y` for a relative error
/// below `target_rel_err`, majorizing |aₙ| by n^weight.
pub fn truncation_terms(y: f64, weight: i64, target_rel_err: f64) -> Result<usize, EvalError> {
    truncation_terms_ln(y, weight, target_rel_err.ln())
}

/// Truncation matched to a precision of `bits`: target 2^(−bits).
pub fn truncation_terms_for_bits(y: f64, weight: i64, bits: u32) -> Result<usize, EvalError> {
    truncation_terms_ln(y, weight, -(bits as f64) * LN_2)
}

fn is_upper(z: &APComplex) -> bool {
    z.im().is_finite() && *z.im() > 0
}

/// One rung of reduced evaluation: f(z) = f(mz) / (cz + d)^k at `bits`.
pub fn eval_reduced_at(
    form: &FormDescriptor,
    z: &APComplex,
    bits: u32,
) -> Result<APComplex, EvalError> {
    if form.level != 1 {
        return Err(EvalError::LevelNotOne {
            label: form.label.clone(),
            level: form.level,
        });
    }
    if !is_upper(z) {
        return Err(EvalError::NotInUpperHalfPlane);
    }
    let z = z.with_precision(bits);
    let reduction = reduce(&z, default_epsilon(bits))?;
    let y0 = reduction.z_reduced.im().to_f64();
    let n_terms = truncation_terms_for_bits(y0, form.weight, bits)?;
    let value = eval_series(form, &reduction.z_reduced, n_terms)?;
    if reduction.matrix.is_identity() {
        return Ok(value);
    }
    let factor = automorphy_factor(&reduction.matrix, &z, form.weight)?;
    Ok(value.div(&factor))
}

/// Level-one evaluation anywhere in ℍ, escalating precision until stable.
pub fn eval_reduced(
    form: &FormDescriptor,
    z: &APComplex,
    opts: &EvalOptions,
) -> Result<Evaluation, EvalError> {
    opts.validate()?;
    if form.level != 1 {
        return Err(EvalError::LevelNotOne {
            label: form.label.clone(),
            level: form.level,
        });
    }
    let run = escalate(
        |bits| eval_reduced_at(form, z, bits),
        opts.initial_bits,
        opts.max_bits,
        opts.target_rel_err,
    )?;
    Ok(Evaluation {
        polar: polar(&run.value),
        value: run.value,
        bits: run.bits,
        runs: run.runs,
    })
}

/// One rung of level-N evaluation: translate into |Re z| ≤ 1/2, then sum.
pub fn eval_general_level_at(
    form: &FormDescriptor,
    z: &APComplex,
    bits: u32,
    y_floor: f64,
) -> Result<APComplex, EvalError> {
    if !is_upper(z) {
        return Err(EvalError::NotInUpperHalfPlane);
    }
    let z = z.with_precision(bits);
    let shift = z.re().to_integer().expect("finite real part");
    let x = Float::with_val(bits, z.re() - &shift);
    let z = APComplex::new(x, z.im().clone());
    let y = z.im().to_f64();
    if y < y_floor {
        return Err(EvalError::BelowFloor { y, floor: y_floor });
    }
    let n_terms = truncation_terms_for_bits(y, form.weight, bits)?;
    eval_series(form, &z, n_terms)
}

/// Evaluation for any level using only the period-1 symmetry.
pub fn eval_general_level(
    form: &FormDescriptor,
    z: &APComplex,
    opts: &EvalOptions,
) -> Result<Evaluation, EvalError> {
    opts.validate()?;
    if !is_upper(z) {
        return Err(EvalError::NotInUpperHalfPlane);
    }
    let y = z.im().to_f64();
    if y < opts.y_floor {
        return Err(EvalError::BelowFloor {
            y,
            floor: opts.y_floor,
        });
    }
    let run = escalate(
        |bits| eval_general_level_at(form, z, bits, opts.y_floor),
        opts.initial_bits,
        opts.max_bits,
        opts.target_rel_err,
    )?;
    Ok(Evaluation {
        polar: polar(&run.value),
        value: run.value,
        bits: run.bits,
        runs: run.runs,
    })
}

/// Picks [`eval_reduced`] for level 1 and [`eval_general_level`] otherwise.
pub fn evaluate(
    form: &FormDescriptor,
    z: &APComplex,
    opts: &EvalOptions,
) -> Result<Evaluation, EvalError> {
    if form.level == 1 {
        eval_reduced(form, z, opts)
    } else {
        eval_general_level(form, z, opts)
    }
}
