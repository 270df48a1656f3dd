//! Coefficient fields: exact rationals and tolerant reals.
//!
//! A computation is generic over one [`Scalar`] type, so the two modes
//! cannot mix. Exact arithmetic uses [`Rational`]; [`Real`] wraps `f64` and
//! treats a coefficient as zero when it is small relative to the magnitude
//! of the values it was computed from.

use std::fmt::{self, Debug, Display};
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};

use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exact rational coefficient.
pub type Rational = BigRational;

/// Default relative zero threshold for tolerant polynomial arithmetic.
pub const DEFAULT_EPS_ZERO: f64 = 1e-9;

/// Default relative threshold for signal equality and support in tolerant mode.
pub const DEFAULT_EPS_SIG: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Tolerant,
}

impl Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Exact => f.write_str("exact"),
            Mode::Tolerant => f.write_str("tolerant"),
        }
    }
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Mode::Exact),
            "tolerant" => Ok(Mode::Tolerant),
            other => Err(Error::Parse(format!("unknown mode `{other}`"))),
        }
    }
}

/// Field element used as polynomial coefficient and signal sample.
pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    const MODE: Mode;

    fn zero() -> Self;
    fn one() -> Self;
    /// Exact zero test (no tolerance).
    fn is_zero(&self) -> bool;
    fn magnitude(&self) -> f64;
    /// True when the value counts as zero relative to `scale`.
    /// Exact types ignore `eps` and `scale`.
    fn negligible(&self, eps: f64, scale: f64) -> bool;
    /// Relative zero threshold applied by polynomial arithmetic (0 in exact mode).
    fn zero_tolerance() -> f64;
    /// Exact conversion for rationals (every finite `f64` is a dyadic rational).
    fn from_f64(v: f64) -> Result<Self>;
    fn to_f64(&self) -> f64;
    fn from_i64(v: i64) -> Self;
    fn parse_scalar(s: &str) -> Result<Self>;
    fn format_scalar(&self) -> String;
}

impl Scalar for Rational {
    const MODE: Mode = Mode::Exact;

    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn magnitude(&self) -> f64 {
        ToPrimitive::to_f64(&self.abs()).unwrap_or(f64::INFINITY)
    }
    fn negligible(&self, _eps: f64, _scale: f64) -> bool {
        Zero::is_zero(self)
    }
    fn zero_tolerance() -> f64 {
        0.0
    }
    fn from_f64(v: f64) -> Result<Self> {
        <BigRational as FromPrimitive>::from_f64(v).ok_or_else(|| Error::Parse(format!("non-finite value {v}")))
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn parse_scalar(s: &str) -> Result<Self> {
        parse_rational(s)
    }
    fn format_scalar(&self) -> String {
        if self.is_integer() {
            self.numer().to_string()
        } else {
            format!("{}/{}", self.numer(), self.denom())
        }
    }
}

/// Parses `p/q`, an integer, or a decimal with optional exponent, exactly.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n = parse_rational(n)?;
        let d = parse_rational(d)?;
        if Zero::is_zero(&d) {
            return Err(Error::Parse(format!("zero denominator in `{s}`")));
        }
        return Ok(n / d);
    }
    let bad = || Error::Parse(format!("invalid number `{s}`"));
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => {
            let e: i64 = s[pos + 1..].parse().map_err(|_| bad())?;
            (&s[..pos], e)
        }
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let all: String = format!("{int_part}{frac_part}");
    let numer: BigInt = if all.is_empty() { BigInt::zero() } else { all.parse().map_err(|_| bad())? };
    let shift = exponent - frac_part.len() as i64;
    let ten = BigInt::from(10);
    let magnitude = if shift >= 0 {
        BigRational::from_integer(numer * num::pow(ten, shift as usize))
    } else {
        BigRational::new(numer, num::pow(ten, (-shift) as usize))
    };
    Ok(if negative { -magnitude } else { magnitude })
}

/// Real coefficient with magnitude-relative zero tests.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Real(pub f64);

static REAL_EPS_ZERO: AtomicU64 = AtomicU64::new(0x3E11_2E0B_E826_D695); // 1e-9

impl Real {
    /// Sets the process-wide relative zero threshold used by tolerant
    /// polynomial arithmetic. Non-positive values are rejected.
    pub fn set_zero_tolerance(eps: f64) -> Result<()> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::DegenerateInput(format!("eps_zero must be positive, got {eps}")));
        }
        REAL_EPS_ZERO.store(eps.to_bits(), Ordering::Relaxed);
        Ok(())
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.format_scalar())
    }
}

macro_rules! real_binop {
    ($tr:ident, $m:ident, $op:tt) => {
        impl $tr for Real {
            type Output = Real;
            fn $m(self, rhs: Real) -> Real {
                Real(self.0 $op rhs.0)
            }
        }
    };
}
real_binop!(Add, add, +);
real_binop!(Sub, sub, -);
real_binop!(Mul, mul, *);
real_binop!(Div, div, /);

impl Neg for Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real(-self.0)
    }
}

impl Scalar for Real {
    const MODE: Mode = Mode::Tolerant;

    fn zero() -> Self {
        Real(0.0)
    }
    fn one() -> Self {
        Real(1.0)
    }
    fn is_zero(&self) -> bool {
        self.0 == 0.0
    }
    fn magnitude(&self) -> f64 {
        self.0.abs()
    }
    fn negligible(&self, eps: f64, scale: f64) -> bool {
        self.0 == 0.0 || self.0.abs() <= eps * scale
    }
    fn zero_tolerance() -> f64 {
        f64::from_bits(REAL_EPS_ZERO.load(Ordering::Relaxed))
    }
    fn from_f64(v: f64) -> Result<Self> {
        if v.is_finite() {
            Ok(Real(v))
        } else {
            Err(Error::Parse(format!("non-finite value {v}")))
        }
    }
    fn to_f64(&self) -> f64 {
        self.0
    }
    fn from_i64(v: i64) -> Self {
        Real(v as f64)
    }
    fn parse_scalar(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some((n, d)) = s.split_once('/') {
            let n = Real::parse_scalar(n)?;
            let d = Real::parse_scalar(d)?;
            return Ok(n / d);
        }
        s.parse::<f64>().map(Real).map_err(|_| Error::Parse(format!("invalid number `{s}`")))
    }
    fn format_scalar(&self) -> String {
        let v = self.0;
        let a = v.abs();
        if v != 0.0 && !(1e-4..1e15).contains(&a) {
            format!("{v:e}")
        } else {
            format!("{v}")
        }
    }
}
