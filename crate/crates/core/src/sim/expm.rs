//! Matrix exponential by scaling and squaring with a degree-13 Padé
//! approximant.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// Largest 1-norm for which the degree-13 approximant is accurate to unit
/// roundoff without scaling.
const THETA13: f64 = 5.371920351148152;

/// `exp(A ts)`.
pub fn exponentiate(a: &DMatrix<f64>, ts: f64) -> Result<DMatrix<f64>> {
    if !a.is_square() {
        return Err(Error::Shape(format!("exponent must be square, got {}x{}", a.nrows(), a.ncols())));
    }
    if !(ts > 0.0 && ts.is_finite()) {
        return Err(Error::DegenerateInput(format!("sampling period must be positive, got {ts}")));
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::DegenerateInput("non-finite matrix entry".into()));
    }
    let n = a.nrows();
    let scaled = a * ts;
    let norm = scaled.column_iter().map(|c| c.abs().sum()).fold(0.0, f64::max);
    let squarings = if norm > THETA13 { (norm / THETA13).log2().ceil() as i32 } else { 0 };
    let x = scaled / 2f64.powi(squarings);

    let b = &PADE13;
    let id = DMatrix::<f64>::identity(n, n);
    let x2 = &x * &x;
    let x4 = &x2 * &x2;
    let x6 = &x4 * &x2;
    let u_inner = &x6 * (&x6 * b[13] + &x4 * b[11] + &x2 * b[9]) + &x6 * b[7] + &x4 * b[5] + &x2 * b[3] + &id * b[1];
    let u = &x * u_inner;
    let v = &x6 * (&x6 * b[12] + &x4 * b[10] + &x2 * b[8]) + &x6 * b[6] + &x4 * b[4] + &x2 * b[2] + &id * b[0];

    let mut r = (&v - &u)
        .lu()
        .solve(&(&v + &u))
        .ok_or_else(|| Error::DegenerateInput("Padé denominator is singular".into()))?;
    for _ in 0..squarings {
        r = &r * &r;
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel_err(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
        (a - b).abs().max() / b.abs().max()
    }

    /// Truncated Taylor series with compensated scaling, for small norms.
    fn taylor(a: &DMatrix<f64>) -> DMatrix<f64> {
        let n = a.nrows();
        let mut sum = DMatrix::identity(n, n);
        let mut term = DMatrix::identity(n, n);
        for k in 1..60 {
            term = &term * a / k as f64;
            sum += &term;
        }
        sum
    }

    #[test]
    fn zero_gives_identity() {
        let e = exponentiate(&DMatrix::zeros(3, 3), 1.0).unwrap();
        assert_eq!(e, DMatrix::identity(3, 3));
    }

    #[test]
    fn diagonal() {
        let lambdas = [-3.0, 0.5, 2.0, -40.0];
        let e = exponentiate(&DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(&lambdas)), 0.25).unwrap();
        for (k, l) in lambdas.iter().enumerate() {
            let want = (l * 0.25f64).exp();
            assert!(((e[(k, k)] - want) / want).abs() < 1e-12);
        }
    }

    #[test]
    fn rotation_generator() {
        let w = 100.0 * std::f64::consts::PI;
        let a = DMatrix::from_row_slice(2, 2, &[0.0, w, -w, 0.0]);
        let e = exponentiate(&a, 0.013).unwrap();
        let (s, c) = (w * 0.013).sin_cos();
        let want = DMatrix::from_row_slice(2, 2, &[c, s, -s, c]);
        assert!(rel_err(&e, &want) < 1e-12);
    }

    #[test]
    fn bad_inputs() {
        assert!(matches!(exponentiate(&DMatrix::zeros(2, 3), 1.0), Err(Error::Shape(_))));
        assert!(matches!(exponentiate(&DMatrix::zeros(2, 2), 0.0), Err(Error::DegenerateInput(_))));
    }

    proptest! {
        #[test]
        fn agrees_with_taylor(entries in prop::collection::vec(-0.5f64..0.5, 16)) {
            let a = DMatrix::from_row_slice(4, 4, &entries);
            let e = exponentiate(&a, 1.0).unwrap();
            prop_assert!(rel_err(&e, &taylor(&a)) < 1e-12);
        }

        #[test]
        fn squaring_consistency(entries in prop::collection::vec(-3.0f64..3.0, 9)) {
            let a = DMatrix::from_row_slice(3, 3, &entries);
            let full = exponentiate(&a, 2.0).unwrap();
            let half = exponentiate(&a, 1.0).unwrap();
            prop_assert!(rel_err(&(&half * &half), &full) < 1e-10);
        }
    }
}
