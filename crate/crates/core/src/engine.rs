//! Attack detection by residual generation and attack correction by
//! majority vote over a bank of Bézout observers.
//!
//! All signals use true-time indexing: an observer `p(σ)` applied to a
//! received sequence of `T` samples yields `T - deg p` samples aligned with
//! the original time axis. Watermarks mark the first sample covered by the
//! correctness guarantee; the valid window of a correction is
//! `valid_from..horizon`.

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::labels;
use crate::polyalg::kronecker_hermite;
use crate::polyalg::{CanonicalForm, Companion, Poly, PolyMatrix, Scalar};
use crate::security::{security_index_kernel, SecurityReport};
use crate::signals::{apply_poly, apply_poly_matrix, majority_vote, SignalVector, SupportProfile};

/// Outcome of residual-based detection.
#[derive(Clone, Debug, PartialEq)]
pub struct DetectionVerdict<F> {
    pub attacked: bool,
    /// `s = R(σ)r`.
    pub residual: SignalVector<F>,
    pub residual_support: SupportProfile,
}

/// JSON view of a [`DetectionVerdict`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictSummary {
    pub attacked: bool,
    pub residual_support: SupportProfile,
    pub residual_horizon: usize,
}

impl<F: Scalar> DetectionVerdict<F> {
    pub fn summary(&self) -> VerdictSummary {
        VerdictSummary {
            attacked: self.attacked,
            residual_support: self.residual_support.clone(),
            residual_horizon: self.residual.horizon(),
        }
    }
}

/// Computes `s = R(σ)r` and flags an attack when `s` is nonzero.
///
/// In tolerant mode a residual sample counts as zero when it is within
/// `eps_sig` times (largest row coefficient sum of `R`) times (largest
/// received magnitude).
pub fn detect<F: Scalar>(r: &PolyMatrix<F>, received: &SignalVector<F>, eps_sig: f64) -> Result<DetectionVerdict<F>> {
    let residual = apply_poly_matrix(r, received)?;
    let row_gain = (0..r.rows()).map(|i| r.row(i).iter().map(Poly::abs_sum).sum::<f64>()).fold(0.0, f64::max);
    let scale = row_gain * received.max_magnitude();
    let residual_support = residual.support_with_scale(eps_sig, scale);
    Ok(DetectionVerdict { attacked: residual_support.weight > 0, residual, residual_support })
}

/// Observer reconstructing `y_N` from sensor `sensor`: `p c + q a = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarObserver<F> {
    pub sensor: usize,
    pub p: Poly<F>,
    pub q: Poly<F>,
    pub c: Poly<F>,
}

/// Observer reconstructing the latent driver from the sensors in `subset`:
/// `P M_J + Q D = I`.
#[derive(Clone, Debug, PartialEq)]
pub struct SubsetObserver<F> {
    pub subset: Vec<usize>,
    pub p: PolyMatrix<F>,
    pub q: PolyMatrix<F>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Observers<F> {
    /// One observer per sensor `1..N-1`; sensor `N` reads `y_N` directly.
    MaximallySecure { a: Poly<F>, observers: Vec<ScalarObserver<F>> },
    /// One observer per sensor subset of size `N + 1 - δ`.
    General { m: PolyMatrix<F>, d: PolyMatrix<F>, index: usize, observers: Vec<SubsetObserver<F>> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BankKind {
    MaximallySecure,
    General,
}

/// Precomputed observers for one system.
#[derive(Clone, Debug, PartialEq)]
pub struct ObserverBank<F> {
    pub observers: Observers<F>,
    pub n: usize,
    /// Largest observer degree.
    pub latency: usize,
    /// `latency` plus the largest degree of the regeneration operators.
    pub regen_latency: usize,
}

impl<F: Scalar> ObserverBank<F> {
    pub fn kind(&self) -> BankKind {
        match self.observers {
            Observers::MaximallySecure { .. } => BankKind::MaximallySecure,
            Observers::General { .. } => BankKind::General,
        }
    }

    /// Candidates fed to the vote.
    pub fn candidate_count(&self) -> usize {
        match &self.observers {
            Observers::MaximallySecure { observers, .. } => observers.len() + 1,
            Observers::General { observers, .. } => observers.len(),
        }
    }

    /// Shortest received horizon with a nonempty valid window.
    pub fn required_horizon(&self) -> usize {
        2 * self.regen_latency + 1
    }

    /// Sensors feeding each vote candidate, in candidate order.
    pub fn candidate_sensors(&self) -> Vec<Vec<usize>> {
        match &self.observers {
            Observers::MaximallySecure { observers, .. } => {
                observers.iter().map(|o| vec![o.sensor]).chain(std::iter::once(vec![self.n - 1])).collect()
            }
            Observers::General { observers, .. } => observers.iter().map(|o| o.subset.clone()).collect(),
        }
    }
}

/// `C(n, k)`, zero when `k > n`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Honest observers outnumber corrupted ones when at most `t` sensors are
/// attacked: `C(N-t, N+1-δ) > C(N-δ+t, N+1-δ)`.
pub fn majority_bound_holds(n: usize, index: usize, t: usize) -> bool {
    let k = n + 1 - index;
    binomial(n - t, k) > binomial(n + t - index, k)
}

/// Bézout observers for a maximally secure canonical form.
pub fn build_observers_ms<F: Scalar>(canon: &CanonicalForm<F>) -> Result<ObserverBank<F>> {
    let Companion::MaximallySecure { a, c } = &canon.companion else {
        return Err(Error::InconsistentIndex(format!("identity block {} is not N - 1 = {}", canon.l, canon.n() - 1)));
    };
    let mut observers = Vec::with_capacity(c.len());
    for (j, cj) in c.iter().enumerate() {
        let (g, p, q) = Poly::ext_gcd(cj, a)?;
        if g.degree() != Some(0) {
            return Err(Error::NotMaximallySecure { index: j + 1 });
        }
        observers.push(ScalarObserver { sensor: j, p, q, c: cj.clone() });
    }
    let latency = observers.iter().filter_map(|o| o.p.degree()).max().unwrap_or(0);
    let regen = observers.iter().filter_map(|o| o.c.degree()).max().unwrap_or(0);
    Ok(ObserverBank {
        observers: Observers::MaximallySecure { a: a.clone(), observers },
        n: canon.n(),
        latency,
        regen_latency: latency + regen,
    })
}

/// Left-inverse observers for every sensor subset of size `N + 1 - index`.
pub fn build_observers_general<F: Scalar>(
    m: &PolyMatrix<F>,
    d: &PolyMatrix<F>,
    index: usize,
) -> Result<ObserverBank<F>> {
    let n = m.rows();
    if !d.is_square() || d.cols() != m.cols() {
        return Err(Error::Shape(format!("M is {}x{} but D is {}x{}", n, m.cols(), d.rows(), d.cols())));
    }
    if index == 0 || index > n {
        return Err(Error::InconsistentIndex(format!("index {index} outside 1..={n}")));
    }
    debug_assert!(
        (0..=(index - 1) / 2).all(|t| majority_bound_holds(n, index, t)),
        "majority bound fails for N = {n}, index = {index}"
    );
    let size = n + 1 - index;
    let mut observers = Vec::with_capacity(binomial(n, size) as usize);
    for subset in (0..n).combinations(size) {
        let stack = m.select_rows(&subset)?.vstack(d)?;
        let x = stack.left_inverse().map_err(|e| match e {
            Error::NoLeftInverse => Error::InconsistentIndex(format!(
                "sensor subset {:?} with D has no left inverse",
                subset.iter().map(|i| i + 1).collect::<Vec<_>>()
            )),
            other => other,
        })?;
        let p = x.block(0, 0, m.cols(), size)?;
        let q = x.block(0, size, m.cols(), m.cols())?;
        observers.push(SubsetObserver { subset, p, q });
    }
    let latency = observers.iter().filter_map(|o| o.p.max_degree()).max().unwrap_or(0);
    let regen = m.max_degree().unwrap_or(0);
    Ok(ObserverBank {
        observers: Observers::General { m: m.clone(), d: d.clone(), index, observers },
        n,
        latency,
        regen_latency: latency + regen,
    })
}

/// Security report, canonical form and observer bank for a kernel matrix:
/// Bézout observers when maximally secure, subset observers otherwise.
pub fn plan<F: Scalar>(r: &PolyMatrix<F>) -> Result<(SecurityReport, CanonicalForm<F>, ObserverBank<F>)> {
    let report = security_index_kernel(r)?;
    let form = kronecker_hermite(r, report.l)?;
    let bank = if report.maximally_secure {
        build_observers_ms(&form)?
    } else {
        let (m, d) = form.md()?;
        build_observers_general(&m, &d, report.index)?
    };
    Ok((report, form, bank))
}

/// Corrected outputs with the vote evidence behind them.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrectionResult<F> {
    /// `ŷ`, horizon `T - regen_latency`.
    pub corrected: SignalVector<F>,
    /// `ŷ_N` or `ℓ̂`.
    pub latent: SignalVector<F>,
    /// Observer outputs in bank order.
    pub candidates: Vec<SignalVector<F>>,
    /// Candidates left out of the vote because they contradict the data they
    /// were computed from.
    pub rejected: Vec<usize>,
    pub tally: Vec<usize>,
    /// Candidate indices per agreement class.
    pub classes: Vec<Vec<usize>>,
    pub winning_class: usize,
    pub valid_from: usize,
}

/// JSON view of a [`CorrectionResult`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorrectionSummary {
    pub tally: Vec<usize>,
    pub winning_count: usize,
    /// 1-based candidate labels in the winning class.
    #[serde(with = "labels")]
    pub winning_candidates: Vec<usize>,
    #[serde(with = "labels")]
    pub rejected_candidates: Vec<usize>,
    pub valid_from: usize,
    pub corrected_horizon: usize,
}

impl<F: Scalar> CorrectionResult<F> {
    pub fn winning_count(&self) -> usize {
        self.tally[self.winning_class]
    }

    pub fn summary(&self) -> CorrectionSummary {
        CorrectionSummary {
            tally: self.tally.clone(),
            winning_count: self.winning_count(),
            winning_candidates: self.classes[self.winning_class].clone(),
            rejected_candidates: self.rejected.clone(),
            valid_from: self.valid_from,
            corrected_horizon: self.corrected.horizon(),
        }
    }
}

fn check_horizon<F: Scalar>(bank: &ObserverBank<F>, received: &SignalVector<F>) -> Result<()> {
    if received.len() != bank.n {
        return Err(Error::Shape(format!("{} sensors received, bank expects {}", received.len(), bank.n)));
    }
    let required = bank.required_horizon() + received.valid_from();
    if received.horizon() < required {
        return Err(Error::HorizonTooShort { horizon: received.horizon(), required });
    }
    Ok(())
}

/// Maximally secure correction: vote over `{p_j(σ)r_j} ∪ {r_N}`, then
/// `ŷ_j = c_j(σ)ŷ_N`.
pub fn correct_ms<F: Scalar>(
    bank: &ObserverBank<F>,
    received: &SignalVector<F>,
    eps_sig: f64,
) -> Result<CorrectionResult<F>> {
    let Observers::MaximallySecure { observers, .. } = &bank.observers else {
        return Err(Error::InconsistentIndex("bank is not maximally secure".into()));
    };
    check_horizon(bank, received)?;
    let vote_from = received.valid_from() + bank.latency;
    let mut candidates = Vec::with_capacity(observers.len() + 1);
    for o in observers {
        let out = apply_poly(&o.p, received.component(o.sensor))?;
        candidates.push(SignalVector::scalar(out, vote_from)?);
    }
    candidates.push(SignalVector::scalar(received.component(bank.n - 1).to_vec(), vote_from)?);

    let vote = majority_vote(&candidates, vote_from, eps_sig)?;
    let latent = vote.winner;
    let y_n = latent.component(0);
    let mut rows = Vec::with_capacity(bank.n);
    for o in observers {
        rows.push(apply_poly(&o.c, y_n)?);
    }
    rows.push(y_n.to_vec());
    let h = rows.iter().map(Vec::len).min().unwrap_or(0);
    rows.iter_mut().for_each(|r| r.truncate(h));
    let valid_from = received.valid_from() + bank.regen_latency;
    Ok(CorrectionResult {
        corrected: SignalVector::new(rows, valid_from)?,
        latent,
        candidates,
        rejected: Vec::new(),
        tally: vote.tally,
        classes: vote.classes,
        winning_class: vote.winning_class,
        valid_from,
    })
}

/// Whether `[M_J; D](σ)ℓ̂ = [r_J; 0]` on the samples the candidate covers.
/// Every honest candidate passes. A window too short to test passes.
fn consistent<F: Scalar>(
    stack: &PolyMatrix<F>,
    subset: &[usize],
    candidate: &SignalVector<F>,
    received: &SignalVector<F>,
    eps_sig: f64,
) -> Result<bool> {
    let deg = stack.max_degree().unwrap_or(0);
    if candidate.horizon() <= candidate.valid_from() + deg {
        return Ok(true);
    }
    let image = apply_poly_matrix(stack, candidate)?;
    let (from, to) = (image.valid_from(), image.horizon());
    let scale = received.select(subset)?.truncated(to).with_valid_from(from).max_magnitude();
    let zero = F::zero();
    Ok(image.components().iter().enumerate().all(|(i, row)| {
        (from..to).all(|t| {
            let target = subset.get(i).map_or(&zero, |&s| &received.component(s)[t]);
            (row[t].clone() - target.clone()).negligible(eps_sig, scale)
        })
    }))
}

/// General correction: vote over `{P_J(σ)r_J}`, then `ŷ = M(σ)ℓ̂`.
///
/// A left inverse may ignore part of its subset, so several attacked subsets
/// can share one wrong estimate. Candidates with `[M_J; D](σ)ℓ̂ ≠ [r_J; 0]`
/// are therefore dropped before voting; if none survive, all vote.
pub fn correct_general<F: Scalar>(
    bank: &ObserverBank<F>,
    received: &SignalVector<F>,
    eps_sig: f64,
) -> Result<CorrectionResult<F>> {
    let Observers::General { m, d, observers, .. } = &bank.observers else {
        return Err(Error::InconsistentIndex("bank is not general".into()));
    };
    check_horizon(bank, received)?;
    let vote_from = received.valid_from() + bank.latency;
    let candidates = observers
        .iter()
        .map(|o| Ok(apply_poly_matrix(&o.p, &received.select(&o.subset)?)?.with_valid_from(vote_from)))
        .collect::<Result<Vec<_>>>()?;
    let mut voters = Vec::with_capacity(candidates.len());
    let mut rejected = Vec::new();
    for (k, (o, cand)) in observers.iter().zip(&candidates).enumerate() {
        let stack = m.select_rows(&o.subset)?.vstack(d)?;
        if consistent(&stack, &o.subset, cand, received, eps_sig)? {
            voters.push(k);
        } else {
            rejected.push(k);
        }
    }
    if voters.is_empty() {
        voters = (0..candidates.len()).collect();
        rejected.clear();
    }
    let pool: Vec<SignalVector<F>> = voters.iter().map(|&k| candidates[k].clone()).collect();
    let vote = majority_vote(&pool, vote_from, eps_sig)?;
    let classes = vote.classes.iter().map(|c| c.iter().map(|&i| voters[i]).collect()).collect();
    let common = candidates.iter().map(SignalVector::horizon).min().unwrap_or(0);
    let latent = vote.winner.truncated(common);
    let valid_from = received.valid_from() + bank.regen_latency;
    let corrected = apply_poly_matrix(m, &latent)?.with_valid_from(valid_from);
    Ok(CorrectionResult {
        corrected,
        latent,
        candidates,
        rejected,
        tally: vote.tally,
        classes,
        winning_class: vote.winning_class,
        valid_from,
    })
}

/// Dispatches on the bank kind.
pub fn correct<F: Scalar>(
    bank: &ObserverBank<F>,
    received: &SignalVector<F>,
    eps_sig: f64,
) -> Result<CorrectionResult<F>> {
    match bank.kind() {
        BankKind::MaximallySecure => correct_ms(bank, received, eps_sig),
        BankKind::General => correct_general(bank, received, eps_sig),
    }
}
