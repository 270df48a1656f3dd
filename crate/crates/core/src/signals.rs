//! Finite-horizon signal vectors and shift-operator application.
//!
//! A polynomial `p(ξ) = Σ p_k ξ^k` acts on a sequence as
//! `(p(σ)u)(t) = Σ p_k u(t+k)`. On a horizon of `T` samples the output has
//! `T - deg p` samples; sample `t` of the output still refers to time `t`.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::labels;
use crate::polyalg::{Poly, PolyMatrix, Scalar};

/// `N` equally long component sequences with a validity watermark.
#[derive(Clone, Debug, PartialEq)]
pub struct SignalVector<F> {
    components: Vec<Vec<F>>,
    valid_from: usize,
}

/// Components that are not identically zero on the valid window.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupportProfile {
    #[serde(with = "labels")]
    pub support: Vec<usize>,
    pub weight: usize,
}

impl<F: Scalar> SignalVector<F> {
    pub fn new(components: Vec<Vec<F>>, valid_from: usize) -> Result<Self> {
        let horizon = components.first().map_or(0, Vec::len);
        if components.is_empty() {
            return Err(Error::DegenerateInput("signal vector needs a component".into()));
        }
        if components.iter().any(|c| c.len() != horizon) {
            return Err(Error::Shape("components have different horizons".into()));
        }
        if valid_from > horizon {
            return Err(Error::Shape(format!("valid_from {valid_from} beyond horizon {horizon}")));
        }
        Ok(SignalVector { components, valid_from })
    }

    pub fn zeros(n: usize, horizon: usize) -> Self {
        SignalVector { components: vec![vec![F::zero(); horizon]; n.max(1)], valid_from: 0 }
    }

    pub fn scalar(samples: Vec<F>, valid_from: usize) -> Result<Self> {
        Self::new(vec![samples], valid_from)
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.horizon() == 0
    }

    pub fn horizon(&self) -> usize {
        self.components[0].len()
    }

    pub fn valid_from(&self) -> usize {
        self.valid_from
    }

    pub fn component(&self, i: usize) -> &[F] {
        &self.components[i]
    }

    pub fn components(&self) -> &[Vec<F>] {
        &self.components
    }

    pub fn into_components(self) -> Vec<Vec<F>> {
        self.components
    }

    pub fn with_valid_from(mut self, valid_from: usize) -> Self {
        self.valid_from = valid_from.min(self.horizon());
        self
    }

    /// Keeps the first `horizon` samples.
    pub fn truncated(&self, horizon: usize) -> Self {
        let h = horizon.min(self.horizon());
        SignalVector {
            components: self.components.iter().map(|c| c[..h].to_vec()).collect(),
            valid_from: self.valid_from.min(h),
        }
    }

    /// Components at the given indices, in order.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        if indices.iter().any(|&i| i >= self.len()) {
            return Err(Error::Shape(format!("component index out of range in {indices:?}")));
        }
        Self::new(indices.iter().map(|&i| self.components[i].clone()).collect(), self.valid_from)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(F, F) -> F) -> Result<Self> {
        if self.len() != other.len() {
            return Err(Error::Shape(format!("{} vs {} components", self.len(), other.len())));
        }
        let h = self.horizon().min(other.horizon());
        let components = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a[..h].iter().zip(&b[..h]).map(|(x, y)| f(x.clone(), y.clone())).collect())
            .collect();
        Self::new(components, self.valid_from.max(other.valid_from).min(h))
    }

    /// Samplewise sum on the common horizon.
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    /// Samplewise difference on the common horizon.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    /// Largest magnitude over all components on the valid window.
    pub fn max_magnitude(&self) -> f64 {
        self.components.iter().flat_map(|c| c[self.valid_from..].iter()).map(Scalar::magnitude).fold(0.0, f64::max)
    }

    /// Support against the vector's own largest valid-window magnitude.
    pub fn support(&self, eps_sig: f64) -> SupportProfile {
        self.support_with_scale(eps_sig, self.max_magnitude())
    }

    /// Support where samples at or below `eps_sig * scale` count as zero
    /// (exact mode: exactly zero).
    pub fn support_with_scale(&self, eps_sig: f64, scale: f64) -> SupportProfile {
        let support: Vec<usize> = (0..self.len())
            .filter(|&i| self.components[i][self.valid_from..].iter().any(|v| !v.negligible(eps_sig, scale)))
            .collect();
        SupportProfile { weight: support.len(), support }
    }

    /// Writes `t,<prefix>1,...,<prefix>N` followed by one row per sample.
    pub fn write_csv<W: Write>(&self, writer: W, prefix: &str) -> Result<()> {
        let names: Vec<String> = (1..=self.len()).map(|i| format!("{prefix}{i}")).collect();
        self.write_csv_named(writer, &names)
    }

    /// Like [`SignalVector::write_csv`] with explicit column names.
    pub fn write_csv_named<W: Write>(&self, writer: W, names: &[String]) -> Result<()> {
        if names.len() != self.len() {
            return Err(Error::Shape(format!("{} column names for {} components", names.len(), self.len())));
        }
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["t".to_string()];
        header.extend(names.iter().cloned());
        w.write_record(&header)?;
        for t in 0..self.horizon() {
            let mut record = vec![t.to_string()];
            record.extend(self.components.iter().map(|c| c[t].format_scalar()));
            w.write_record(&record)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads the CSV layout produced by [`SignalVector::write_csv`]; the first
    /// column must be `t` and count up from 0.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let header = r.headers()?.clone();
        if header.get(0) != Some("t") || header.len() < 2 {
            return Err(Error::Parse("signal CSV header must be `t,y1,...,yN`".into()));
        }
        let n = header.len() - 1;
        let mut components = vec![Vec::new(); n];
        for (row, record) in r.records().enumerate() {
            let record = record?;
            let t: usize = record[0].parse().map_err(|_| Error::Parse(format!("bad time index `{}`", &record[0])))?;
            if t != row {
                return Err(Error::Parse(format!("expected t = {row}, found {t}")));
            }
            for (i, comp) in components.iter_mut().enumerate() {
                comp.push(F::parse_scalar(&record[i + 1])?);
            }
        }
        Self::new(components, 0)
    }
}

/// `(p(σ)u)(t) = Σ_k p_k u(t+k)` for `t < T - deg p`.
pub fn apply_poly<F: Scalar>(p: &Poly<F>, u: &[F]) -> Result<Vec<F>> {
    let deg = p.degree().unwrap_or(0);
    if u.len() < deg + 1 {
        return Err(Error::HorizonTooShort { horizon: u.len(), required: deg + 1 });
    }
    let out_len = u.len() - deg;
    if p.is_zero() {
        return Ok(vec![F::zero(); out_len]);
    }
    Ok((0..out_len)
        .map(|t| {
            p.coeffs()
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .fold(F::zero(), |acc, (k, c)| acc + c.clone() * u[t + k].clone())
        })
        .collect())
}

/// Row `i` of the output is `Σ_j P_ij(σ) u_j`; horizon shrinks by the
/// largest entry degree of `P`.
pub fn apply_poly_matrix<F: Scalar>(p: &PolyMatrix<F>, u: &SignalVector<F>) -> Result<SignalVector<F>> {
    if p.cols() != u.len() {
        return Err(Error::Shape(format!("{}x{} operator applied to {} components", p.rows(), p.cols(), u.len())));
    }
    let deg = p.max_degree().unwrap_or(0);
    if u.horizon() < deg + 1 {
        return Err(Error::HorizonTooShort { horizon: u.horizon(), required: deg + 1 });
    }
    let h = u.horizon() - deg;
    let mut out = Vec::with_capacity(p.rows());
    for i in 0..p.rows() {
        let mut acc = vec![F::zero(); h];
        for j in 0..p.cols() {
            let entry = p.get(i, j);
            if entry.is_zero() {
                continue;
            }
            for (a, v) in acc.iter_mut().zip(apply_poly(entry, u.component(j))?) {
                *a = a.clone() + v;
            }
        }
        out.push(acc);
    }
    SignalVector::new(out, u.valid_from().min(h))
}

/// Outcome of [`majority_vote`].
#[derive(Clone, Debug, PartialEq)]
pub struct Vote<F> {
    /// Earliest member of the largest class, truncated to the common horizon.
    pub winner: SignalVector<F>,
    pub winner_index: usize,
    /// Class sizes in order of first appearance.
    pub tally: Vec<usize>,
    /// Candidate indices of each class.
    pub classes: Vec<Vec<usize>>,
    /// Position of the winning class in `classes`.
    pub winning_class: usize,
}

fn agree<F: Scalar>(a: &SignalVector<F>, b: &SignalVector<F>, from: usize, to: usize, eps: f64, scale: f64) -> bool {
    a.components()
        .iter()
        .zip(b.components())
        .all(|(x, y)| x[from..to].iter().zip(&y[from..to]).all(|(p, q)| (p.clone() - q.clone()).negligible(eps, scale)))
}

/// Groups candidates by agreement on samples `valid_from..H` (`H` = shortest
/// candidate horizon) and returns the strictly largest class.
///
/// Agreement is exact for rationals and within `eps_sig` times the largest
/// candidate magnitude for reals; each candidate joins the first class whose
/// representative it matches.
pub fn majority_vote<F: Scalar>(candidates: &[SignalVector<F>], valid_from: usize, eps_sig: f64) -> Result<Vote<F>> {
    let first = candidates.first().ok_or_else(|| Error::DegenerateInput("majority vote over no candidates".into()))?;
    if candidates.iter().any(|c| c.len() != first.len()) {
        return Err(Error::Shape("candidates have different component counts".into()));
    }
    let horizon = candidates.iter().map(SignalVector::horizon).min().unwrap_or(0);
    if valid_from >= horizon {
        return Err(Error::HorizonTooShort { horizon, required: valid_from + 1 });
    }
    let scale = candidates
        .iter()
        .flat_map(|c| c.components().iter().flat_map(|s| s[valid_from..horizon].iter()))
        .map(Scalar::magnitude)
        .fold(0.0, f64::max);

    let mut classes: Vec<Vec<usize>> = Vec::new();
    for (idx, cand) in candidates.iter().enumerate() {
        let home =
            classes.iter_mut().find(|class| agree(&candidates[class[0]], cand, valid_from, horizon, eps_sig, scale));
        match home {
            Some(class) => class.push(idx),
            None => classes.push(vec![idx]),
        }
    }
    let tally: Vec<usize> = classes.iter().map(Vec::len).collect();
    let best = *tally.iter().max().expect("at least one class");
    let mut leaders = tally.iter().enumerate().filter(|(_, &c)| c == best);
    let (winning_class, _) = leaders.next().expect("at least one class");
    if leaders.next().is_some() {
        return Err(Error::MajorityTie { tally });
    }
    let winner_index = classes[winning_class][0];
    let winner = candidates[winner_index].truncated(horizon).with_valid_from(valid_from);
    Ok(Vote { winner, winner_index, tally, classes, winning_class })
}
