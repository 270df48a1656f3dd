use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::engine::{correct, detect, CorrectionResult, CorrectionSummary, DetectionVerdict, VerdictSummary};
use crate::error::{Error, Result};
use crate::labels;
use crate::polyalg::{Mode, Scalar};
use crate::security::SecurityReport;
use crate::signals::SignalVector;

use super::simulate;
use super::system::{Number, System, SystemSpec};

/// Attack samples for one sensor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Generator {
    /// I.i.d. uniform on `[lo, hi)`.
    Uniform {
        lo: f64,
        hi: f64,
    },
    Constant {
        value: Number,
    },
    /// Explicit samples from the start time on; zero afterwards.
    Samples {
        values: Vec<Number>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SensorAttack {
    #[serde(with = "labels::one")]
    pub sensor: usize,
    pub generator: Generator,
}

/// Additive sensor attack; samples before `start_time` are zero.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AttackScenario {
    #[serde(default)]
    pub start_time: usize,
    #[serde(default)]
    pub sensors: Vec<SensorAttack>,
}

impl AttackScenario {
    /// Attacked sensors in ascending order.
    pub fn support(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self.sensors.iter().map(|a| a.sensor).collect();
        s.sort_unstable();
        s.dedup();
        s
    }

    /// Draws `η`. Uniform generators share one ChaCha8 stream seeded by
    /// `seed`, consumed sensor by sensor in listed order.
    pub fn generate<F: Scalar>(&self, n: usize, horizon: usize, seed: u64) -> Result<SignalVector<F>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rows = vec![vec![F::zero(); horizon]; n];
        let mut seen = vec![false; n];
        for attack in &self.sensors {
            let s = attack.sensor;
            if s >= n {
                return Err(Error::Shape(format!("sensor {} of {n} attacked", s + 1)));
            }
            if std::mem::replace(&mut seen[s], true) {
                return Err(Error::DegenerateInput(format!("sensor {} attacked twice", s + 1)));
            }
            let start = self.start_time.min(horizon);
            for (k, sample) in rows[s][start..].iter_mut().enumerate() {
                *sample = match &attack.generator {
                    Generator::Uniform { lo, hi } => {
                        if lo >= hi || lo.is_nan() || hi.is_nan() {
                            return Err(Error::DegenerateInput(format!("empty range [{lo}, {hi})")));
                        }
                        F::from_f64(rng.gen_range(*lo..*hi))?
                    }
                    Generator::Constant { value } => value.to_scalar()?,
                    Generator::Samples { values } => match values.get(k) {
                        Some(v) => v.to_scalar()?,
                        None => F::zero(),
                    },
                };
            }
        }
        SignalVector::new(rows, 0)
    }
}

/// Inline system or a path relative to the scenario file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SystemRef {
    Path(PathBuf),
    Inline(Box<SystemSpec>),
}

/// Scenario description as stored on disk.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioFile {
    pub system: SystemRef,
    /// Falls back to the system's `initial`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<Vec<Number>>,
    pub horizon: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_true")]
    pub correct: bool,
    #[serde(default)]
    pub attack: AttackScenario,
}

fn default_true() -> bool {
    true
}

impl ScenarioFile {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Reads the scenario and its system; relative system paths resolve
    /// against the scenario's directory.
    pub fn load(path: &Path) -> Result<(Self, SystemSpec)> {
        let file = Self::from_json(&std::fs::read_to_string(path)?)?;
        let spec = match &file.system {
            SystemRef::Inline(spec) => (**spec).clone(),
            SystemRef::Path(p) => {
                let base = path.parent().unwrap_or_else(|| Path::new("."));
                SystemSpec::load(&base.join(p))?
            }
        };
        Ok((file, spec))
    }

    pub fn initial<F: Scalar>(&self, spec: &SystemSpec) -> Result<Vec<F>> {
        match &self.initial {
            Some(v) => v.iter().map(Number::to_scalar).collect(),
            None => {
                spec.initial()?.ok_or_else(|| Error::DegenerateInput("no initial data in scenario or system".into()))
            }
        }
    }
}

/// Signals and verdicts of one run.
#[derive(Clone, Debug)]
pub struct ScenarioResult<F> {
    pub clean: SignalVector<F>,
    pub attack: SignalVector<F>,
    /// `clean + attack`.
    pub received: SignalVector<F>,
    pub verdict: DetectionVerdict<F>,
    pub correction: Option<CorrectionResult<F>>,
}

impl<F: Scalar> ScenarioResult<F> {
    /// `ŷ - y` on the corrected horizon, watermarked at the correction's
    /// valid window.
    pub fn error_signal(&self) -> Option<SignalVector<F>> {
        let c = self.correction.as_ref()?;
        let err = c.corrected.sub(&self.clean).ok()?;
        Some(err.with_valid_from(c.valid_from))
    }

    /// Largest `|ŷ - y|` on the valid window.
    pub fn max_error(&self) -> Option<f64> {
        self.error_signal().map(|e| e.max_magnitude())
    }

    /// `ŷ = y` on the valid window: exactly in exact mode, within `eps_sig`
    /// of the largest clean magnitude in tolerant mode.
    pub fn corrected_matches(&self, eps_sig: f64) -> Option<bool> {
        let e = self.error_signal()?;
        let scale = self.clean.max_magnitude();
        Some(e.support_with_scale(eps_sig, scale).weight == 0)
    }
}

/// Clean trajectory, attack, received signal and detection verdict.
pub fn prepare_scenario<F: Scalar>(
    system: &System<F>,
    scenario: &AttackScenario,
    initial: &[F],
    horizon: usize,
    seed: u64,
    eps_sig: f64,
) -> Result<ScenarioResult<F>> {
    let clean = simulate(system, initial, horizon)?;
    let attack = scenario.generate(system.n(), horizon, seed)?;
    let received = clean.add(&attack)?;
    let verdict = detect(system.kernel(), &received, eps_sig)?;
    Ok(ScenarioResult { clean, attack, received, verdict, correction: None })
}

/// [`prepare_scenario`] followed, when `correct` is set, by correction with
/// the system's observer bank.
pub fn run_scenario<F: Scalar>(
    system: &System<F>,
    scenario: &AttackScenario,
    initial: &[F],
    horizon: usize,
    seed: u64,
    correct_attack: bool,
    eps_sig: f64,
) -> Result<ScenarioResult<F>> {
    let mut result = prepare_scenario(system, scenario, initial, horizon, seed, eps_sig)?;
    if correct_attack {
        let plan = system.plan()?;
        result.correction = Some(correct(&plan.bank, &result.received, eps_sig)?);
    }
    Ok(result)
}

/// Contents of `result.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub mode: Mode,
    pub n: usize,
    pub horizon: usize,
    pub seed: u64,
    #[serde(with = "labels")]
    pub attack_support: Vec<usize>,
    pub security: SecurityReport,
    pub latency: usize,
    pub regen_latency: usize,
    pub verdict: VerdictSummary,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub correction: Option<CorrectionSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_abs_error: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corrected_matches_clean: Option<bool>,
    /// Correction failure, e.g. a majority tie.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub correction_error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tie_tally: Option<Vec<usize>>,
}

impl RunReport {
    pub fn new<F: Scalar>(
        system: &System<F>,
        scenario: &AttackScenario,
        result: &ScenarioResult<F>,
        seed: u64,
        eps_sig: f64,
    ) -> Result<Self> {
        let plan = system.plan()?;
        Ok(RunReport {
            mode: F::MODE,
            n: system.n(),
            horizon: result.clean.horizon(),
            seed,
            attack_support: scenario.support(),
            security: plan.report.clone(),
            latency: plan.bank.latency,
            regen_latency: plan.bank.regen_latency,
            verdict: result.verdict.summary(),
            correction: result.correction.as_ref().map(CorrectionResult::summary),
            max_abs_error: result.max_error(),
            corrected_matches_clean: result.corrected_matches(eps_sig),
            correction_error: None,
            tie_tally: None,
        })
    }

    /// Records a failed correction.
    pub fn with_error(mut self, err: &Error) -> Self {
        if let Error::MajorityTie { tally } = err {
            self.tie_tally = Some(tally.clone());
        }
        self.correction_error = Some(err.to_string());
        self
    }
}

fn write_signal<F: Scalar>(dir: &Path, name: &str, s: &SignalVector<F>, prefix: &str) -> Result<()> {
    s.write_csv(BufWriter::new(File::create(dir.join(name))?), prefix)
}

/// Observer outputs as one table on their common horizon; vector-valued
/// candidates get one column per component.
pub fn observer_table<F: Scalar>(candidates: &[SignalVector<F>]) -> Result<(SignalVector<F>, Vec<String>)> {
    let h = candidates.iter().map(SignalVector::horizon).min().unwrap_or(0);
    let mut cols = Vec::new();
    let mut names = Vec::new();
    for (k, c) in candidates.iter().enumerate() {
        for (i, comp) in c.components().iter().enumerate() {
            cols.push(comp[..h].to_vec());
            names.push(if c.len() == 1 { format!("o{}", k + 1) } else { format!("o{}_{}", k + 1, i + 1) });
        }
    }
    let valid_from = candidates.first().map_or(0, SignalVector::valid_from).min(h);
    Ok((SignalVector::new(cols, valid_from)?, names))
}

/// Writes `clean.csv`, `attack.csv`, `received.csv`, `residual.csv`,
/// `result.json` and, after a correction, `corrected.csv`, `observers.csv`
/// and `error.csv`.
pub fn write_outputs<F: Scalar>(dir: &Path, result: &ScenarioResult<F>, report: &RunReport) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    write_signal(dir, "clean.csv", &result.clean, "y")?;
    write_signal(dir, "attack.csv", &result.attack, "eta")?;
    write_signal(dir, "received.csv", &result.received, "y")?;
    write_signal(dir, "residual.csv", &result.verdict.residual, "s")?;
    if let Some(c) = &result.correction {
        write_signal(dir, "corrected.csv", &c.corrected, "y")?;
        let (table, names) = observer_table(&c.candidates)?;
        table.write_csv_named(BufWriter::new(File::create(dir.join("observers.csv"))?), &names)?;
    }
    if let Some(e) = result.error_signal() {
        write_signal(dir, "error.csv", &e, "e")?;
    }
    std::fs::write(dir.join("result.json"), serde_json::to_string_pretty(report)?)?;
    Ok(())
}
