//! Arbitrary-precision complex arithmetic.
//!
//! Everything above this module works with [`APComplex`] values that carry an
//! explicit working precision in bits. Binary operations run at the larger of
//! their operands' precisions. The real arithmetic is MPFR (through `rug`);
//! this module adds the complex layer, the polar decomposition, and the
//! precision-escalation ladder used by the evaluators.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use rug::float::Constant;
use rug::ops::CompleteRound;
use rug::Float;
use thiserror::Error;

/// Lowest precision ever used: the width of an IEEE double mantissa.
pub const MIN_PRECISION: u32 = 53;

/// Rungs visited by [`escalate`] when starting from [`MIN_PRECISION`].
pub const PRECISION_LADDER: [u32; 5] = [53, 128, 256, 512, 1024];

/// Extra bits carried internally by composite operations before the final
/// rounding to the working precision.
const GUARD_BITS: u32 = 32;

#[derive(Debug, Error)]
pub enum NumericsError {
    #[error("exponential overflow: real part {0} exceeds the exponent range")]
    Overflow(String),
    #[error("zero raised to negative power {0}")]
    ZeroToNegativePower(i64),
    #[error("invalid precision ladder: initial {initial} bits, max {max} bits")]
    InvalidLadder { initial: u32, max: u32 },
    #[error("no agreement up to {bits} bits: last two runs gave {previous} and {last}")]
    NoConvergence {
        bits: u32,
        previous: APComplex,
        last: APComplex,
    },
}

/// A complex number with both parts stored at the same binary precision.
#[derive(Clone, Debug, PartialEq)]
pub struct APComplex {
    re: Float,
    im: Float,
}

impl APComplex {
    /// Builds a value from two floats; the precision is the larger of the
    /// two (never below [`MIN_PRECISION`]), and widening is exact.
    pub fn new(mut re: Float, mut im: Float) -> Self {
        let prec = re.prec().max(im.prec()).max(MIN_PRECISION);
        re.set_prec(prec);
        im.set_prec(prec);
        APComplex { re, im }
    }

    pub fn from_f64(re: f64, im: f64, bits: u32) -> Self {
        let bits = bits.max(MIN_PRECISION);
        APComplex {
            re: Float::with_val(bits, re),
            im: Float::with_val(bits, im),
        }
    }

    pub fn zero(bits: u32) -> Self {
        Self::from_f64(0.0, 0.0, bits)
    }

    pub fn one(bits: u32) -> Self {
        Self::from_f64(1.0, 0.0, bits)
    }

    pub fn i(bits: u32) -> Self {
        Self::from_f64(0.0, 1.0, bits)
    }

    pub fn precision_bits(&self) -> u32 {
        self.re.prec()
    }

    pub fn re(&self) -> &Float {
        &self.re
    }

    pub fn im(&self) -> &Float {
        &self.im
    }

    pub fn into_parts(self) -> (Float, Float) {
        (self.re, self.im)
    }

    /// Rounds (or exactly widens) both parts to `bits`.
    pub fn with_precision(&self, bits: u32) -> Self {
        let bits = bits.max(MIN_PRECISION);
        APComplex {
            re: Float::with_val(bits, &self.re),
            im: Float::with_val(bits, &self.im),
        }
    }

    pub fn to_f64_pair(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }

    pub fn conj(&self) -> Self {
        APComplex {
            re: self.re.clone(),
            im: Float::with_val(self.im.prec(), -&self.im),
        }
    }

    /// |z|², correctly rounded.
    pub fn norm_sqr(&self) -> Float {
        self.re
            .mul_add_mul_ref(&self.re, &self.im, &self.im)
            .complete(self.precision_bits())
    }

    /// |z|, correctly rounded.
    pub fn abs(&self) -> Float {
        Float::with_val(self.precision_bits(), self.re.hypot_ref(&self.im))
    }

    /// Multiplies by a real scalar, keeping this value's precision.
    pub fn scale(&self, factor: &Float) -> Self {
        let prec = self.precision_bits().max(factor.prec());
        APComplex {
            re: Float::with_val(prec, &self.re * factor),
            im: Float::with_val(prec, &self.im * factor),
        }
    }

    /// Complex reciprocal 1/z. Returns infinities for z = 0.
    pub fn recip(&self) -> Self {
        let prec = self.precision_bits();
        let work = prec + GUARD_BITS;
        let den = self.re.mul_add_mul_ref(&self.re, &self.im, &self.im).complete(work);
        let re = Float::with_val(work, &self.re / &den);
        let im = Float::with_val(work, -&self.im) / &den;
        APComplex::new(re, im).with_precision(prec)
    }

    /// Complex division, at the larger operand precision.
    pub fn div(&self, rhs: &APComplex) -> Self {
        let prec = self.precision_bits().max(rhs.precision_bits());
        let work = prec + GUARD_BITS;
        let (a, b, c, d) = (&self.re, &self.im, &rhs.re, &rhs.im);
        let den = c.mul_add_mul_ref(c, d, d).complete(work);
        let re = a.mul_add_mul_ref(c, b, d).complete(work) / &den;
        let im = b.mul_sub_mul_ref(c, a, d).complete(work) / &den;
        APComplex::new(re, im).with_precision(prec)
    }

    /// Relative distance |self − other| / max(|self|, |other|); zero when both are zero.
    pub fn rel_diff(&self, other: &APComplex) -> Float {
        let prec = self.precision_bits().max(other.precision_bits());
        let diff = (self - other).abs();
        let scale = {
            let a = self.abs();
            let b = other.abs();
            if a > b {
                a
            } else {
                b
            }
        };
        if scale.is_zero() {
            return Float::new(prec);
        }
        Float::with_val(prec, &diff / &scale)
    }
}

impl fmt::Display for APComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = (self.precision_bits() as f64 * std::f64::consts::LOG10_2).ceil() as usize;
        let digits = digits.min(40);
        let sign = if self.im.is_sign_negative() { '-' } else { '+' };
        write!(
            f,
            "{} {} {}i",
            self.re.to_string_radix(10, Some(digits)),
            sign,
            Float::with_val(self.im.prec(), self.im.abs_ref()).to_string_radix(10, Some(digits))
        )
    }
}

impl Add<&APComplex> for &APComplex {
    type Output = APComplex;
    fn add(self, rhs: &APComplex) -> APComplex {
        let prec = self.precision_bits().max(rhs.precision_bits());
        APComplex {
            re: Float::with_val(prec, &self.re + &rhs.re),
            im: Float::with_val(prec, &self.im + &rhs.im),
        }
    }
}

impl Sub<&APComplex> for &APComplex {
    type Output = APComplex;
    fn sub(self, rhs: &APComplex) -> APComplex {
        let prec = self.precision_bits().max(rhs.precision_bits());
        APComplex {
            re: Float::with_val(prec, &self.re - &rhs.re),
            im: Float::with_val(prec, &self.im - &rhs.im),
        }
    }
}

impl Mul<&APComplex> for &APComplex {
    type Output = APComplex;
    /// Each component is a correctly rounded `ac − bd` / `ad + bc`.
    fn mul(self, rhs: &APComplex) -> APComplex {
        let prec = self.precision_bits().max(rhs.precision_bits());
        let (a, b, c, d) = (&self.re, &self.im, &rhs.re, &rhs.im);
        APComplex {
            re: a.mul_sub_mul_ref(c, b, d).complete(prec),
            im: a.mul_add_mul_ref(d, b, c).complete(prec),
        }
    }
}

impl Neg for &APComplex {
    type Output = APComplex;
    fn neg(self) -> APComplex {
        APComplex {
            re: Float::with_val(self.re.prec(), -&self.re),
            im: Float::with_val(self.im.prec(), -&self.im),
        }
    }
}

/// Magnitude and principal phase of a complex value.
#[derive(Clone, Debug, PartialEq)]
pub struct PolarForm {
    /// r ≥ 0.
    pub r: Float,
    /// θ ∈ (−π, π]; 0 when r = 0.
    pub theta: Float,
}

impl PolarForm {
    pub fn magnitude_f64(&self) -> f64 {
        self.r.to_f64()
    }

    /// Phase as a double, kept inside (−π, π] after rounding.
    pub fn phase_f64(&self) -> f64 {
        let t = self.theta.to_f64();
        if t <= -std::f64::consts::PI {
            std::f64::consts::PI
        } else {
            t
        }
    }

    /// Reconstructs r·e^{iθ} at the precision of `r`.
    pub fn rebuild(&self) -> APComplex {
        let prec = self.r.prec().max(self.theta.prec());
        let work = prec + GUARD_BITS;
        let (s, c) = Float::with_val(work, &self.theta).sin_cos(Float::new(work));
        APComplex::new(c * &self.r, s * &self.r).with_precision(prec)
    }
}

/// Polar decomposition with the phase convention (−π, π] and arg 0 = 0.
pub fn polar(z: &APComplex) -> PolarForm {
    let prec = z.precision_bits();
    let r = z.abs();
    if r.is_zero() {
        return PolarForm {
            r: Float::new(prec),
            theta: Float::new(prec),
        };
    }
    let theta = if z.im.is_zero() {
        // a signed zero must not flip π to −π
        if z.re.is_sign_negative() {
            Float::with_val(prec, Constant::Pi)
        } else {
            Float::new(prec)
        }
    } else {
        Float::with_val(prec, z.im.atan2_ref(&z.re))
    };
    PolarForm { r, theta }
}

/// e^z, with both parts computed at guard precision and rounded once.
pub fn cexp(z: &APComplex) -> Result<APComplex, NumericsError> {
    let prec = z.precision_bits();
    let work = prec + GUARD_BITS;
    let modulus = Float::with_val(work, z.re.exp_ref());
    if !modulus.is_finite() {
        return Err(NumericsError::Overflow(z.re.to_string_radix(10, Some(20))));
    }
    let (s, c) = Float::with_val(work, &z.im).sin_cos(Float::new(work));
    Ok(APComplex::new(c * &modulus, s * &modulus).with_precision(prec))
}

/// z^k by binary exponentiation; negative powers invert the positive power.
pub fn cpow_int(z: &APComplex, k: i64) -> Result<APComplex, NumericsError> {
    let prec = z.precision_bits();
    if k == 0 {
        return Ok(APComplex::one(prec));
    }
    if k < 0 && z.is_zero() {
        return Err(NumericsError::ZeroToNegativePower(k));
    }
    let mut exp = k.unsigned_abs();
    // every squaring can double the relative error, so the guard grows with log2 |k|
    let work = prec + GUARD_BITS + 2 * (64 - exp.leading_zeros());
    let mut base = z.with_precision(work);
    let mut acc = APComplex::one(work);
    while exp > 0 {
        if exp & 1 == 1 {
            acc = &acc * &base;
        }
        exp >>= 1;
        if exp > 0 {
            base = &base * &base;
        }
    }
    if k < 0 {
        acc = acc.recip();
    }
    Ok(acc.with_precision(prec))
}

/// 2π·i·z, the exponent of q = e^{2πiz}.
pub fn two_pi_i_times(z: &APComplex) -> APComplex {
    let prec = z.precision_bits();
    let two_pi = Float::with_val(prec + GUARD_BITS, Constant::Pi) * 2u32;
    let re = Float::with_val(prec + GUARD_BITS, -&z.im) * &two_pi;
    let im = Float::with_val(prec + GUARD_BITS, &z.re) * &two_pi;
    APComplex::new(re, im).with_precision(prec)
}

/// q = e^{2πiz}.
pub fn nome(z: &APComplex) -> Result<APComplex, NumericsError> {
    let prec = z.precision_bits();
    let arg = two_pi_i_times(&z.with_precision(prec + GUARD_BITS));
    Ok(cexp(&arg)?.with_precision(prec))
}

/// The rung after `bits` on the escalation ladder.
pub fn next_precision(bits: u32) -> u32 {
    if bits < 128 {
        128
    } else {
        bits.saturating_mul(2)
    }
}

/// Outcome of a converged escalation.
#[derive(Clone, Debug)]
pub struct Escalated {
    pub value: APComplex,
    /// Precision of the run whose value was returned.
    pub bits: u32,
    /// Number of times the computation was run.
    pub runs: u32,
}

/// True when |a − b| ≤ rel_tol·max(|a|, |b|).
pub fn agrees(a: &APComplex, b: &APComplex, rel_tol: f64) -> bool {
    let d = a.rel_diff(b);
    d.partial_cmp(&rel_tol) != Some(Ordering::Greater)
}

/// Reruns `compute` at increasing precision until two successive results agree
/// to `rel_tol`, returning the later one.
///
/// The ladder starts at `initial_bits` (at least 53), steps with
/// [`next_precision`], and its last rung is clamped to `max_bits`.
pub fn escalate<F, E>(
    mut compute: F,
    initial_bits: u32,
    max_bits: u32,
    rel_tol: f64,
) -> Result<Escalated, E>
where
    F: FnMut(u32) -> Result<APComplex, E>,
    E: From<NumericsError>,
{
    let initial = initial_bits.max(MIN_PRECISION);
    if initial >= max_bits {
        return Err(NumericsError::InvalidLadder {
            initial: initial_bits,
            max: max_bits,
        }
        .into());
    }
    let mut bits = initial;
    let mut previous = compute(bits)?;
    let mut runs = 1;
    loop {
        bits = next_precision(bits).min(max_bits);
        let value = compute(bits)?;
        runs += 1;
        if agrees(&previous, &value, rel_tol) {
            return Ok(Escalated { value, bits, runs });
        }
        if bits >= max_bits {
            return Err(NumericsError::NoConvergence {
                bits,
                previous,
                last: value,
            }
            .into());
        }
        previous = value;
    }
}
