//! Kronecker-Hermite canonical kernel representations.

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::polyalg::matrix::PolyMatrix;
use crate::polyalg::poly::Poly;
use crate::polyalg::scalar::Scalar;

/// Blocks read off the canonical matrix.
#[derive(Clone, Debug, PartialEq)]
pub enum Companion<F> {
    /// Identity block of size `N-1`: last column is `(-c_1, ..., -c_{N-1}, a)`.
    MaximallySecure { a: Poly<F>, c: Vec<Poly<F>> },
    /// Identity block of size `L < N-1` above the upper-triangular `D`.
    General { d: PolyMatrix<F> },
}

/// `transform * original = canonical`, with `canonical = [I_L, -M_1; 0, D]`.
#[derive(Clone, Debug)]
pub struct CanonicalForm<F> {
    pub canonical: PolyMatrix<F>,
    pub transform: PolyMatrix<F>,
    pub l: usize,
    pub companion: Companion<F>,
}

impl<F: Scalar> CanonicalForm<F> {
    pub fn n(&self) -> usize {
        self.canonical.rows()
    }

    /// Image representation `y = M(σ)ℓ`, `D(σ)ℓ = 0` with `M = [M_1; I]`.
    pub fn md(&self) -> Result<(PolyMatrix<F>, PolyMatrix<F>)> {
        let n = self.n();
        let m = n - self.l;
        let mut big_m = PolyMatrix::zeros(n, m);
        for i in 0..self.l {
            for j in 0..m {
                big_m.set(i, j, -self.canonical.get(i, self.l + j));
            }
        }
        for j in 0..m {
            big_m.set(self.l + j, j, Poly::one());
        }
        let d = self.canonical.block(self.l, self.l, m, m)?;
        Ok((big_m, d))
    }
}

/// Lexicographically first `size`-subset of columns whose submatrix is not
/// left unimodular.
pub fn first_non_left_unimodular_subset<F: Scalar>(r: &PolyMatrix<F>, size: usize) -> Result<Option<Vec<usize>>> {
    if size == 0 {
        return Ok(None);
    }
    for subset in (0..r.cols()).combinations(size) {
        if !r.select_cols(&subset)?.is_left_unimodular()? {
            return Ok(Some(subset));
        }
    }
    Ok(None)
}

/// Brings a square nonsingular `R` to canonical form with identity block of
/// size `l`. Every `l`-column subset of `R` must be left unimodular.
pub fn kronecker_hermite<F: Scalar>(r: &PolyMatrix<F>, l: usize) -> Result<CanonicalForm<F>> {
    if !r.is_square() {
        return Err(Error::Shape(format!("kernel must be square, got {}x{}", r.rows(), r.cols())));
    }
    let n = r.rows();
    if l >= n {
        return Err(Error::DegenerateInput(format!("identity block {l} must be below N = {n}")));
    }
    let red = r.row_reduce_upper()?;
    if red.determinant().is_zero() {
        return Err(Error::SingularKernel);
    }
    if let Some(witness) = first_non_left_unimodular_subset(r, l)? {
        return Err(Error::NotReducible { witness });
    }
    let canonical = red.upper;
    debug_assert!((0..l).all(|k| *canonical.get(k, k) == Poly::one()));

    let companion = if l + 1 == n {
        let last = n - 1;
        Companion::MaximallySecure {
            a: canonical.get(last, last).clone(),
            c: (0..last).map(|j| -canonical.get(j, last)).collect(),
        }
    } else {
        Companion::General { d: canonical.block(l, l, n - l, n - l)? }
    };
    Ok(CanonicalForm { canonical, transform: red.transform, l, companion })
}
