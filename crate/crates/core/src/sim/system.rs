use std::path::Path;
use std::sync::OnceLock;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::engine::{plan, ObserverBank};
use crate::error::{Error, Result};
use crate::polyalg::{CanonicalForm, Mode, PolyMatrix, Scalar};
use crate::security::{kernel_from_md, SecurityReport};
use crate::sim::expm::exponentiate;

/// JSON number or numeric string (`"3/2"`, `"-0.25"`, `"1e-3"`).
///
/// Strings parse exactly in exact mode; JSON numbers pass through `f64`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Number {
    Value(f64),
    Text(String),
}

impl Number {
    pub fn to_scalar<F: Scalar>(&self) -> Result<F> {
        match self {
            Number::Value(v) => F::from_f64(*v),
            Number::Text(s) => F::parse_scalar(s),
        }
    }

    pub fn to_f64(&self) -> Result<f64> {
        match self {
            Number::Value(v) => Ok(*v),
            Number::Text(s) => crate::polyalg::Real::parse_scalar(s).map(|r| r.0),
        }
    }
}

impl From<f64> for Number {
    fn from(v: f64) -> Self {
        Number::Value(v)
    }
}

impl From<&str> for Number {
    fn from(s: &str) -> Self {
        Number::Text(s.to_string())
    }
}

/// How the system law is given.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Representation {
    /// `R(σ)y = 0`, entries in the polynomial text grammar.
    Kernel { r: Vec<Vec<String>> },
    /// `y(t+1) = A y(t)` with all states measured.
    StateSpace { a: Vec<Vec<Number>> },
    /// `y = M(σ)ℓ`, `D(σ)ℓ = 0`.
    Md { m: Vec<Vec<String>>, d: Vec<Vec<String>> },
    /// `A = exp(Ã ts)` with all states measured; always tolerant.
    Sampled { a_tilde: Vec<Vec<Number>>, ts: f64 },
}

/// System description as stored on disk.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    #[serde(flatten)]
    pub representation: Representation,
    /// Default initial data for [`simulate`](crate::sim::simulate).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<Vec<Number>>,
}

fn parse_grid<F: Scalar>(rows: &[Vec<String>]) -> Result<PolyMatrix<F>> {
    PolyMatrix::parse_rows(rows)
}

fn scalar_grid<F: Scalar>(rows: &[Vec<Number>]) -> Result<Vec<Vec<F>>> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(Error::Shape("state matrix must be square and nonempty".into()));
    }
    rows.iter().map(|r| r.iter().map(Number::to_scalar).collect()).collect()
}

impl SystemSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: SystemSpec = serde_json::from_str(text)?;
        if let Representation::Sampled { ts, .. } = spec.representation {
            if !(ts > 0.0 && ts.is_finite()) {
                return Err(Error::DegenerateInput(format!("sampling period must be positive, got {ts}")));
            }
        }
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Mode after applying `requested`; sampled systems must be tolerant.
    pub fn resolve_mode(&self, requested: Option<Mode>) -> Result<Mode> {
        let sampled = matches!(self.representation, Representation::Sampled { .. });
        match requested.or(self.mode) {
            Some(Mode::Exact) if sampled => {
                Err(Error::DegenerateInput("sampled systems have irrational data and need tolerant mode".into()))
            }
            Some(mode) => Ok(mode),
            None if sampled => Ok(Mode::Tolerant),
            None => Ok(Mode::Exact),
        }
    }

    pub fn build<F: Scalar>(&self) -> Result<System<F>> {
        let dynamics = match &self.representation {
            Representation::Kernel { r } => Dynamics::Kernel(parse_grid(r)?),
            Representation::StateSpace { a } => Dynamics::StateSpace(scalar_grid(a)?),
            Representation::Md { m, d } => Dynamics::Md(parse_grid(m)?, parse_grid(d)?),
            Representation::Sampled { a_tilde, ts } => {
                if F::MODE == Mode::Exact {
                    return Err(Error::DegenerateInput("sampled systems need tolerant mode".into()));
                }
                let n = a_tilde.len();
                let values = a_tilde.iter().flatten().map(Number::to_f64).collect::<Result<Vec<_>>>()?;
                if values.len() != n * n {
                    return Err(Error::Shape("Ã must be square".into()));
                }
                let e = exponentiate(&DMatrix::from_row_slice(n, n, &values), *ts)?;
                let a = (0..n)
                    .map(|i| (0..n).map(|j| F::from_f64(e[(i, j)])).collect())
                    .collect::<Result<Vec<Vec<F>>>>()?;
                Dynamics::StateSpace(a)
            }
        };
        System::new(dynamics)
    }

    pub fn initial<F: Scalar>(&self) -> Result<Option<Vec<F>>> {
        self.initial.as_ref().map(|v| v.iter().map(Number::to_scalar).collect()).transpose()
    }
}

#[derive(Clone, Debug)]
enum Dynamics<F> {
    Kernel(PolyMatrix<F>),
    StateSpace(Vec<Vec<F>>),
    Md(PolyMatrix<F>, PolyMatrix<F>),
}

/// Security report, canonical form and observer bank of a system.
#[derive(Clone, Debug)]
pub struct Plan<F> {
    pub report: SecurityReport,
    pub canonical: CanonicalForm<F>,
    pub bank: ObserverBank<F>,
}

/// A system in one coefficient mode with its kernel matrix derived and the
/// observer plan computed on first use.
#[derive(Debug)]
pub struct System<F> {
    kernel: PolyMatrix<F>,
    dynamics: Dynamics<F>,
    plan: OnceLock<Result<Plan<F>>>,
}

impl<F: Scalar> System<F> {
    fn new(dynamics: Dynamics<F>) -> Result<Self> {
        let kernel = match &dynamics {
            Dynamics::Kernel(r) => {
                if !r.is_square() {
                    return Err(Error::Shape(format!("kernel must be square, got {}x{}", r.rows(), r.cols())));
                }
                r.clone()
            }
            Dynamics::StateSpace(a) => PolyMatrix::shift_minus(a)?,
            Dynamics::Md(m, d) => kernel_from_md(m, d)?,
        };
        Ok(System { kernel, dynamics, plan: OnceLock::new() })
    }

    pub fn from_kernel(r: PolyMatrix<F>) -> Result<Self> {
        Self::new(Dynamics::Kernel(r))
    }

    pub fn from_state_space(a: Vec<Vec<F>>) -> Result<Self> {
        Self::new(Dynamics::StateSpace(a))
    }

    pub fn from_md(m: PolyMatrix<F>, d: PolyMatrix<F>) -> Result<Self> {
        Self::new(Dynamics::Md(m, d))
    }

    pub fn n(&self) -> usize {
        self.kernel.rows()
    }

    pub fn kernel(&self) -> &PolyMatrix<F> {
        &self.kernel
    }

    pub fn state_matrix(&self) -> Option<&[Vec<F>]> {
        match &self.dynamics {
            Dynamics::StateSpace(a) => Some(a),
            _ => None,
        }
    }

    pub fn plan(&self) -> Result<&Plan<F>> {
        self.plan
            .get_or_init(|| plan(&self.kernel).map(|(report, canonical, bank)| Plan { report, canonical, bank }))
            .as_ref()
            .map_err(Clone::clone)
    }

    /// Number of initial samples [`simulate`](crate::sim::simulate) expects.
    pub fn initial_len(&self) -> Result<usize> {
        match &self.dynamics {
            Dynamics::StateSpace(a) => Ok(a.len()),
            Dynamics::Kernel(r) => super::free_samples(r),
            Dynamics::Md(_, d) => super::free_samples(d),
        }
    }

    pub(crate) fn md(&self) -> Option<(&PolyMatrix<F>, &PolyMatrix<F>)> {
        match &self.dynamics {
            Dynamics::Md(m, d) => Some((m, d)),
            _ => None,
        }
    }
}
