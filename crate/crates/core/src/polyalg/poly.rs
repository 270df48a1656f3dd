use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::polyalg::scalar::Scalar;

/// Univariate polynomial in the shift indeterminate.
///
/// Coefficients are stored in ascending powers; `coeffs[k]` multiplies `x^k`.
/// The zero polynomial has no coefficients and degree `None`.
#[derive(Clone, PartialEq, Debug)]
pub struct Poly<F> {
    coeffs: Vec<F>,
}

/// Zeroes coefficients that are negligible against `scale`, then trims
/// trailing zeros.
fn cleaned<F: Scalar>(mut coeffs: Vec<F>, scale: f64) -> Vec<F> {
    let eps = F::zero_tolerance();
    if eps > 0.0 {
        for c in coeffs.iter_mut() {
            if !c.is_zero() && c.negligible(eps, scale) {
                *c = F::zero();
            }
        }
    }
    while coeffs.last().is_some_and(|c| c.is_zero()) {
        coeffs.pop();
    }
    coeffs
}

fn max_magnitude<F: Scalar>(coeffs: &[F]) -> f64 {
    coeffs.iter().map(Scalar::magnitude).fold(0.0, f64::max)
}

impl<F: Scalar> Poly<F> {
    /// Builds a polynomial from ascending coefficients.
    pub fn new(coeffs: Vec<F>) -> Self {
        let scale = max_magnitude(&coeffs);
        Poly { coeffs: cleaned(coeffs, scale) }
    }

    fn with_scale(coeffs: Vec<F>, scale: f64) -> Self {
        Poly { coeffs: cleaned(coeffs, scale) }
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(F::one())
    }

    pub fn constant(c: F) -> Self {
        Self::new(vec![c])
    }

    /// The indeterminate `x`.
    pub fn x() -> Self {
        Self::monomial(F::one(), 1)
    }

    pub fn monomial(c: F, power: usize) -> Self {
        let mut coeffs = vec![F::zero(); power + 1];
        coeffs[power] = c;
        Self::new(coeffs)
    }

    /// Ascending integer coefficients.
    pub fn from_ints(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| F::from_i64(c)).collect())
    }

    pub fn coeffs(&self) -> &[F] {
        &self.coeffs
    }

    /// Coefficient of `x^k` (zero beyond the degree).
    pub fn coeff(&self, k: usize) -> F {
        self.coeffs.get(k).cloned().unwrap_or_else(F::zero)
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Nonzero constant, i.e. a unit of the polynomial ring.
    pub fn is_unit(&self) -> bool {
        self.coeffs.len() == 1
    }

    pub fn leading(&self) -> Option<&F> {
        self.coeffs.last()
    }

    /// Largest coefficient magnitude.
    pub fn scale(&self) -> f64 {
        max_magnitude(&self.coeffs)
    }

    /// Sum of coefficient magnitudes; bounds the gain of `p(σ)` on bounded signals.
    pub fn abs_sum(&self) -> f64 {
        self.coeffs.iter().map(Scalar::magnitude).sum()
    }

    pub fn scaled(&self, c: &F) -> Self {
        let scale = self.scale() * c.magnitude();
        Self::with_scale(self.coeffs.iter().map(|a| a.clone() * c.clone()).collect(), scale)
    }

    /// Divides by the leading coefficient. The zero polynomial is returned unchanged.
    pub fn monic(&self) -> Self {
        match self.leading() {
            Some(lc) => {
                let inv = F::one() / lc.clone();
                let mut p = self.scaled(&inv);
                if let Some(last) = p.coeffs.last_mut() {
                    *last = F::one();
                }
                p
            }
            None => Self::zero(),
        }
    }

    pub fn eval(&self, x: &F) -> F {
        self.coeffs.iter().rev().fold(F::zero(), |acc, c| acc * x.clone() + c.clone())
    }

    /// Euclidean division: `self = q * divisor + r` with `deg r < deg divisor`.
    ///
    /// Panics if `divisor` is zero.
    pub fn div_rem(&self, divisor: &Self) -> (Self, Self) {
        let d = divisor.degree().expect("division by the zero polynomial");
        let lc = divisor.coeffs[d].clone();
        let mut rem = self.coeffs.clone();
        if rem.len() <= d {
            return (Self::zero(), self.clone());
        }
        let mut quot = vec![F::zero(); rem.len() - d];
        let mut scale = self.scale();
        let dscale = divisor.scale();
        while rem.len() > d {
            let top = rem.len() - 1;
            let shift = top - d;
            let c = rem[top].clone() / lc.clone();
            scale = scale.max(c.magnitude() * dscale);
            for (k, dk) in divisor.coeffs[..d].iter().enumerate() {
                rem[shift + k] = rem[shift + k].clone() - c.clone() * dk.clone();
            }
            rem.pop();
            quot[shift] = c;
            while rem.len() > d && rem.last().is_some_and(|v| v.negligible(F::zero_tolerance(), scale)) {
                rem.pop();
            }
        }
        (Self::new(quot), Self::with_scale(rem, scale))
    }

    /// Extended Euclid: returns `(g, p, q)` with `p*a + q*b = g`, `g` monic.
    ///
    /// When `g = 1` the pair is the unique one with `deg p < deg b` and
    /// `deg q < deg a`.
    pub fn ext_gcd(a: &Self, b: &Self) -> Result<(Self, Self, Self)> {
        if a.is_zero() && b.is_zero() {
            return Err(Error::DegenerateInput("GCD of two zero polynomials".into()));
        }
        let (mut old_r, mut r) = (a.clone(), b.clone());
        let (mut old_s, mut s) = (Self::one(), Self::zero());
        let (mut old_t, mut t) = (Self::zero(), Self::one());
        while !r.is_zero() {
            let (quot, rem) = old_r.div_rem(&r);
            old_r = std::mem::replace(&mut r, rem);
            let next_s = &old_s - &(&quot * &s);
            old_s = std::mem::replace(&mut s, next_s);
            let next_t = &old_t - &(&quot * &t);
            old_t = std::mem::replace(&mut t, next_t);
        }
        let inv = F::one() / old_r.leading().cloned().expect("nonzero gcd");
        Ok((old_r.monic(), old_s.scaled(&inv), old_t.scaled(&inv)))
    }

    /// Monic greatest common divisor.
    pub fn gcd(a: &Self, b: &Self) -> Result<Self> {
        Self::ext_gcd(a, b).map(|(g, _, _)| g)
    }

    /// Parses the text grammar, e.g. `-6x^2+7x-6` or `x^3 - 3/2 x^2`.
    pub fn parse(text: &str) -> Result<Self> {
        let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if s.is_empty() {
            return Err(Error::Parse("empty polynomial".into()));
        }
        let bytes = s.as_bytes();
        let mut terms = Vec::new();
        let mut start = 0;
        for i in 1..bytes.len() {
            let c = bytes[i];
            if (c == b'+' || c == b'-') && !matches!(bytes[i - 1], b'e' | b'E' | b'^' | b'*' | b'/') {
                terms.push(&s[start..i]);
                start = i;
            }
        }
        terms.push(&s[start..]);

        let mut coeffs: Vec<F> = Vec::new();
        for term in terms {
            let (power, coeff) = parse_term::<F>(term)?;
            if coeffs.len() <= power {
                coeffs.resize(power + 1, F::zero());
            }
            coeffs[power] = coeffs[power].clone() + coeff;
        }
        Ok(Self::new(coeffs))
    }
}

fn parse_term<F: Scalar>(term: &str) -> Result<(usize, F)> {
    let bad = || Error::Parse(format!("invalid polynomial term `{term}`"));
    let (negative, body) = match term.as_bytes().first() {
        Some(b'-') => (true, &term[1..]),
        Some(b'+') => (false, &term[1..]),
        _ => (false, term),
    };
    if body.is_empty() {
        return Err(bad());
    }
    let (coeff_text, power) = match body.find('x') {
        Some(pos) => {
            let rest = &body[pos + 1..];
            let power = if rest.is_empty() {
                1
            } else {
                rest.strip_prefix('^').ok_or_else(bad)?.parse::<usize>().map_err(|_| bad())?
            };
            let c = body[..pos].strip_suffix('*').unwrap_or(&body[..pos]);
            (c, power)
        }
        None => (body, 0),
    };
    let mut coeff = if coeff_text.is_empty() {
        if power == 0 {
            return Err(bad());
        }
        F::one()
    } else {
        F::parse_scalar(coeff_text)?
    };
    if negative {
        coeff = -coeff;
    }
    Ok((power, coeff))
}

impl<F: Scalar> FromStr for Poly<F> {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Poly::parse(s)
    }
}

impl<F: Scalar> fmt::Display for Poly<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let text = c.format_scalar();
            let (negative, magnitude) = match text.strip_prefix('-') {
                Some(m) => (true, m.to_string()),
                None => (false, text),
            };
            if negative {
                f.write_str("-")?;
            } else if !first {
                f.write_str("+")?;
            }
            first = false;
            let unit = *c == F::one() || *c == -F::one();
            match k {
                0 => f.write_str(&magnitude)?,
                _ => {
                    if !unit {
                        f.write_str(&magnitude)?;
                    }
                    if k == 1 {
                        f.write_str("x")?;
                    } else {
                        write!(f, "x^{k}")?;
                    }
                }
            }
        }
        Ok(())
    }
}

impl<F: Scalar> Add for &Poly<F> {
    type Output = Poly<F>;
    fn add(self, rhs: &Poly<F>) -> Poly<F> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect();
        Poly::with_scale(coeffs, self.scale().max(rhs.scale()))
    }
}

impl<F: Scalar> Sub for &Poly<F> {
    type Output = Poly<F>;
    fn sub(self, rhs: &Poly<F>) -> Poly<F> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..n).map(|k| self.coeff(k) - rhs.coeff(k)).collect();
        Poly::with_scale(coeffs, self.scale().max(rhs.scale()))
    }
}

impl<F: Scalar> Mul for &Poly<F> {
    type Output = Poly<F>;
    fn mul(self, rhs: &Poly<F>) -> Poly<F> {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut coeffs = vec![F::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j] = coeffs[i + j].clone() + a.clone() * b.clone();
            }
        }
        let terms = self.coeffs.len().min(rhs.coeffs.len()) as f64;
        Poly::with_scale(coeffs, self.scale() * rhs.scale() * terms)
    }
}

impl<F: Scalar> Neg for &Poly<F> {
    type Output = Poly<F>;
    fn neg(self) -> Poly<F> {
        Poly { coeffs: self.coeffs.iter().map(|c| -c.clone()).collect() }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl<F: Scalar> $tr for Poly<F> {
            type Output = Poly<F>;
            fn $m(self, rhs: Poly<F>) -> Poly<F> {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl<F: Scalar> Neg for Poly<F> {
    type Output = Poly<F>;
    fn neg(self) -> Poly<F> {
        -&self
    }
}
