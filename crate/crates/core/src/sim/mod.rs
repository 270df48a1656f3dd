//! Trajectory generation, attack injection and end-to-end scenario runs.

mod expm;
mod scenario;
mod system;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use expm::exponentiate;
pub use scenario::{
    observer_table, prepare_scenario, run_scenario, write_outputs, AttackScenario, Generator, RunReport, ScenarioFile,
    ScenarioResult, SensorAttack, SystemRef,
};
pub use system::{Number, Plan, Representation, System, SystemSpec};

use crate::error::{Error, Result};
use crate::polyalg::{PolyMatrix, Scalar};
use crate::signals::{apply_poly, apply_poly_matrix, SignalVector};

/// Degree of `det R`: the number of free initial samples of `R(σ)w = 0`.
pub fn free_samples<F: Scalar>(r: &PolyMatrix<F>) -> Result<usize> {
    let red = r.row_reduce_upper()?;
    (0..r.cols()).map(|k| red.upper.get(k, k).degree().ok_or(Error::SingularKernel)).sum()
}

/// A trajectory of `R(σ)w = 0` on `horizon` samples.
///
/// `R` is brought to upper-triangular form with monic diagonal `d_ii`;
/// component `i` takes `deg d_ii` free samples from `initial` (components in
/// order) and is then advanced by its row recursion. Components feeding rows
/// above them are generated on longer horizons so every row has the
/// lookahead it needs; the result is a prefix of an infinite trajectory.
pub fn behavior_trajectory<F: Scalar>(r: &PolyMatrix<F>, initial: &[F], horizon: usize) -> Result<SignalVector<F>> {
    if !r.is_square() {
        return Err(Error::Shape(format!("kernel must be square, got {}x{}", r.rows(), r.cols())));
    }
    let n = r.rows();
    let t = r.row_reduce_upper()?.upper;
    let degs = (0..n).map(|k| t.get(k, k).degree().ok_or(Error::SingularKernel)).collect::<Result<Vec<_>>>()?;
    let total: usize = degs.iter().sum();
    if initial.len() != total {
        return Err(Error::DegenerateInput(format!("expected {total} initial samples, got {}", initial.len())));
    }

    let mut lens = vec![horizon; n];
    for j in 0..n {
        for i in 0..j {
            if let Some(dij) = t.get(i, j).degree() {
                lens[j] = lens[j].max((lens[i] + dij).saturating_sub(degs[i]));
            }
        }
        lens[j] = lens[j].max(degs[j]);
    }

    let mut w: Vec<Vec<F>> = vec![Vec::new(); n];
    let mut offsets = Vec::with_capacity(n);
    degs.iter().fold(0, |acc, d| {
        offsets.push(acc);
        acc + d
    });
    for i in (0..n).rev() {
        let d = degs[i];
        let steps = lens[i] - d;
        // Forcing term Σ_{j>i} t_ij(σ) w_j over the steps taken by row i.
        let mut forcing = vec![F::zero(); steps];
        for (j, wj) in w.iter().enumerate().skip(i + 1) {
            let tij = t.get(i, j);
            if tij.is_zero() {
                continue;
            }
            let image = apply_poly(tij, wj)?;
            for (f, v) in forcing.iter_mut().zip(image) {
                *f = f.clone() + v;
            }
        }
        let diag = t.get(i, i).coeffs();
        let mut wi: Vec<F> = initial[offsets[i]..offsets[i] + d].to_vec();
        for (s, force) in forcing.into_iter().enumerate() {
            let mut acc = force;
            for (k, c) in diag[..d].iter().enumerate() {
                if !c.is_zero() {
                    acc = acc + c.clone() * wi[s + k].clone();
                }
            }
            wi.push(-acc);
        }
        w[i] = wi;
    }
    SignalVector::new(
        w.into_iter()
            .map(|mut c| {
                c.truncate(horizon);
                c
            })
            .collect(),
        0,
    )
}

/// Attack-free outputs on `horizon` samples.
///
/// State-space systems take `x(0)`; kernel systems take the free samples of
/// [`behavior_trajectory`]; `(M, D)` systems take the free samples of
/// `D(σ)ℓ = 0` and return `M(σ)ℓ`.
pub fn simulate<F: Scalar>(system: &System<F>, initial: &[F], horizon: usize) -> Result<SignalVector<F>> {
    if horizon == 0 {
        return Err(Error::DegenerateInput("horizon must be positive".into()));
    }
    let expected = system.initial_len()?;
    if initial.len() != expected {
        return Err(Error::DegenerateInput(format!("expected {expected} initial samples, got {}", initial.len())));
    }
    if let Some(a) = system.state_matrix() {
        let n = a.len();
        let mut rows: Vec<Vec<F>> = initial.iter().map(|v| vec![v.clone()]).collect();
        for t in 0..horizon - 1 {
            for i in 0..n {
                let next = (0..n)
                    .filter(|&j| !a[i][j].is_zero())
                    .fold(F::zero(), |acc, j| acc + a[i][j].clone() * rows[j][t].clone());
                rows[i].push(next);
            }
        }
        return SignalVector::new(rows, 0);
    }
    if let Some((m, d)) = system.md() {
        let extra = m.max_degree().unwrap_or(0);
        let latent = behavior_trajectory(d, initial, horizon + extra)?;
        return Ok(apply_poly_matrix(m, &latent)?.truncated(horizon));
    }
    behavior_trajectory(system.kernel(), initial, horizon)
}

/// A nonzero behavior trajectory supported on the sensors in `subset`,
/// which must index a column submatrix of `R` that is not left unimodular.
///
/// Such a signal passes detection unnoticed.
pub fn undetectable_attack<F: Scalar>(
    r: &PolyMatrix<F>,
    subset: &[usize],
    initial: &[F],
    horizon: usize,
) -> Result<SignalVector<F>> {
    let cols = r.select_cols(subset)?;
    let red = cols.row_reduce_upper()?;
    if red.has_unit_diagonal() {
        return Err(Error::DegenerateInput(format!(
            "sensors {:?} carry no behavior trajectory",
            subset.iter().map(|i| i + 1).collect::<Vec<_>>()
        )));
    }
    let square = red.upper.block(0, 0, subset.len(), subset.len())?;
    let part = behavior_trajectory(&square, initial, horizon)?;
    let mut rows = vec![vec![F::zero(); horizon]; r.cols()];
    for (k, &s) in subset.iter().enumerate() {
        rows[s] = part.component(k).to_vec();
    }
    SignalVector::new(rows, 0)
}

/// Free-sample count for [`undetectable_attack`] on `subset`.
pub fn undetectable_attack_len<F: Scalar>(r: &PolyMatrix<F>, subset: &[usize]) -> Result<usize> {
    let cols = r.select_cols(subset)?;
    let red = cols.row_reduce_upper()?;
    let square = red.upper.block(0, 0, subset.len(), subset.len())?;
    free_samples(&square)
}

/// `len` values drawn uniformly from `(-1, 1)`, converted exactly.
pub fn random_initial<F: Scalar>(len: usize, seed: u64) -> Result<Vec<F>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..len).map(|_| F::from_f64(rng.gen_range(-1.0..1.0))).collect()
}
