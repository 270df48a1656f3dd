//! Security index: the fewest sensors an attacker must corrupt to stay
//! undetectable.

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::labels;
use crate::polyalg::{first_non_left_unimodular_subset, PolyMatrix, Scalar};

/// Detection and correction capability of a system.
///
/// Sensor indices are 0-based in Rust and serialized as 1-based labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SecurityReport {
    pub index: usize,
    pub n: usize,
    /// Largest size such that every column subset of that size is left unimodular.
    pub l: usize,
    pub maximally_secure: bool,
    pub detectable_weight_max: usize,
    pub correctable_weight_max: usize,
    /// Sensors carrying a nonzero behavior trajectory of weight `index`.
    #[serde(with = "labels::option")]
    pub witness_subset: Option<Vec<usize>>,
}

impl SecurityReport {
    fn new(n: usize, l: usize, witness_subset: Option<Vec<usize>>) -> Self {
        let index = l + 1;
        SecurityReport {
            index,
            n,
            l,
            maximally_secure: index == n,
            detectable_weight_max: index - 1,
            correctable_weight_max: (index - 1) / 2,
            witness_subset,
        }
    }
}

fn check_kernel<F: Scalar>(r: &PolyMatrix<F>) -> Result<()> {
    if !r.is_square() {
        return Err(Error::Shape(format!("kernel must be square, got {}x{}", r.rows(), r.cols())));
    }
    let det = r.det()?;
    if det.is_zero() {
        return Err(Error::SingularKernel);
    }
    if det.is_unit() {
        return Err(Error::ZeroBehavior);
    }
    Ok(())
}

/// Security index from a square kernel matrix.
///
/// Scans subset sizes downward from `N-1`; the first size at which every
/// column subset is left unimodular is `L`, and the lexicographically first
/// failing subset one size up is the witness.
pub fn security_index_kernel<F: Scalar>(r: &PolyMatrix<F>) -> Result<SecurityReport> {
    check_kernel(r)?;
    let n = r.rows();
    // The full column set never passes: R is square with non-constant determinant.
    let mut witness = (0..n).collect::<Vec<_>>();
    for size in (1..n).rev() {
        match first_non_left_unimodular_subset(r, size)? {
            Some(failing) => witness = failing,
            None => return Ok(SecurityReport::new(n, size, Some(witness))),
        }
    }
    Ok(SecurityReport::new(n, 0, Some(witness)))
}

/// Maximally secure iff every `N x (N-1)` column submatrix is left unimodular.
pub fn is_maximally_secure<F: Scalar>(r: &PolyMatrix<F>) -> Result<bool> {
    check_kernel(r)?;
    let n = r.rows();
    Ok(first_non_left_unimodular_subset(r, n - 1)?.is_none())
}

fn stack_rows<F: Scalar>(m: &PolyMatrix<F>, d: &PolyMatrix<F>, rows: &[usize]) -> Result<PolyMatrix<F>> {
    if rows.is_empty() {
        Ok(d.clone())
    } else {
        m.select_rows(rows)?.vstack(d)
    }
}

/// Security index from an image representation `y = M(σ)ℓ`, `D(σ)ℓ = 0`.
///
/// `L~` is the smallest size such that every row subset `M_J` stacked on
/// `D` is left unimodular; the index is `N + 1 - L~`. The witness is the
/// complement of the lexicographically first failing subset of size `L~ - 1`.
pub fn security_index_md<F: Scalar>(m: &PolyMatrix<F>, d: &PolyMatrix<F>) -> Result<SecurityReport> {
    if !d.is_square() || d.cols() != m.cols() {
        return Err(Error::Shape(format!("M is {}x{} but D is {}x{}", m.rows(), m.cols(), d.rows(), d.cols())));
    }
    let det = d.det()?;
    if det.is_zero() {
        return Err(Error::SingularKernel);
    }
    if det.is_unit() {
        return Err(Error::ZeroBehavior);
    }
    if !m.vstack(d)?.is_left_unimodular()? {
        return Err(Error::NotObservable);
    }
    let n = m.rows();
    // Size 0 always fails since D alone is not unimodular.
    let mut failing: Vec<usize> = Vec::new();
    for size in 1..=n {
        let mut first_fail = None;
        for subset in (0..n).combinations(size) {
            if !stack_rows(m, d, &subset)?.is_left_unimodular()? {
                first_fail = Some(subset);
                break;
            }
        }
        match first_fail {
            Some(subset) => failing = subset,
            None => {
                let witness = (0..n).filter(|i| !failing.contains(i)).collect();
                return Ok(SecurityReport::new(n, n - size, Some(witness)));
            }
        }
    }
    unreachable!("full stack is left unimodular")
}

/// Kernel matrix describing the same behavior as `(M, D)`.
///
/// With `V [M; D] = [I; 0]` for unimodular `V`, `y` lies in the behavior iff
/// the lower rows of `V` annihilate `[y; 0]`, so `R` is the lower-left
/// `N x N` block of `V`.
pub fn kernel_from_md<F: Scalar>(m: &PolyMatrix<F>, d: &PolyMatrix<F>) -> Result<PolyMatrix<F>> {
    let stack = m.vstack(d)?;
    let red = stack.row_reduce_upper()?;
    if !red.has_unit_diagonal() {
        return Err(Error::NotObservable);
    }
    red.transform.block(m.cols(), 0, m.rows(), m.rows())
}
