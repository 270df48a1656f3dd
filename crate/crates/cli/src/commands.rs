use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use sentinel_core::engine::{self, BankKind, CorrectionSummary, Observers, VerdictSummary};
use sentinel_core::polyalg::{Companion, Mode, PolyMatrix, Rational, Real, Scalar, DEFAULT_EPS_SIG};
use sentinel_core::security::{security_index_kernel, SecurityReport};
use sentinel_core::signals::SignalVector;
use sentinel_core::sim::{
    observer_table, prepare_scenario, write_outputs, RunReport, ScenarioFile, System, SystemSpec,
};
use sentinel_core::{Error, Result};
use serde::Serialize;
use serde_json::{json, Value};

use crate::{status, CorrectArgs, DetectArgs, OutArgs, SimulateArgs, SystemArgs, Tuning};

/// Resolved coefficient field and signal tolerance.
struct Settings {
    mode: Mode,
    eps_sig: f64,
}

fn settings(spec: &SystemSpec, tuning: &Tuning) -> Result<Settings> {
    let mode = spec.resolve_mode(tuning.mode)?;
    if let Some(eps) = tuning.eps_zero {
        Real::set_zero_tolerance(eps)?;
    }
    Ok(Settings { mode, eps_sig: tuning.eps_sig.unwrap_or(DEFAULT_EPS_SIG) })
}

macro_rules! dispatch {
    ($mode:expr, $f:ident($($arg:expr),*)) => {
        match $mode {
            Mode::Exact => $f::<Rational>($($arg),*),
            Mode::Tolerant => $f::<Real>($($arg),*),
        }
    };
}

fn load(args: &SystemArgs) -> Result<(SystemSpec, Settings)> {
    let spec = SystemSpec::load(&args.system).map_err(at(&args.system))?;
    let settings = settings(&spec, &args.tuning)?;
    Ok((spec, settings))
}

/// Prints to stdout, ignoring a closed pipe.
fn emit(text: impl std::fmt::Display) {
    let _ = writeln!(std::io::stdout(), "{text}");
}

/// Prefixes I/O failures with the path involved.
fn at(path: &Path) -> impl Fn(Error) -> Error + '_ {
    move |e| match e {
        Error::Io(msg) => Error::Io(format!("{}: {msg}", path.display())),
        other => other,
    }
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(value)? + "\n").map_err(|e| at(path)(e.into()))
}

fn read_signals<F: Scalar>(path: &Path, n: usize) -> Result<SignalVector<F>> {
    let s = SignalVector::read_csv(File::open(path).map_err(|e| at(path)(e.into()))?)?;
    if s.len() != n {
        return Err(Error::Shape(format!("{} has {} sensors, system has {n}", path.display(), s.len())));
    }
    Ok(s)
}

pub fn index(args: &SystemArgs) -> Result<u8> {
    let (spec, settings) = load(args)?;
    let report = dispatch!(settings.mode, report_of(&spec))?;
    emit(serde_json::to_string_pretty(&report)?);
    Ok(status::OK)
}

fn report_of<F: Scalar>(spec: &SystemSpec) -> Result<SecurityReport> {
    security_index_kernel(spec.build::<F>()?.kernel())
}

pub fn canon(args: &OutArgs) -> Result<u8> {
    let (spec, settings) = load(&args.system)?;
    std::fs::create_dir_all(&args.out)?;
    dispatch!(settings.mode, write_canon(&spec, &args.out))?;
    emit(args.out.join("canonical.json").display());
    emit(args.out.join("observers.json").display());
    Ok(status::OK)
}

fn grid<F: Scalar>(m: &PolyMatrix<F>) -> Value {
    json!(m.to_strings())
}

fn write_canon<F: Scalar>(spec: &SystemSpec, out: &Path) -> Result<()> {
    let sys = spec.build::<F>()?;
    let plan = sys.plan()?;
    let form = &plan.canonical;
    let companion = match &form.companion {
        Companion::MaximallySecure { a, c } => json!({
            "kind": "maximally_secure",
            "a": a.to_string(),
            "c": c.iter().map(ToString::to_string).collect::<Vec<_>>(),
        }),
        Companion::General { .. } => {
            let (m, d) = form.md()?;
            json!({ "kind": "general", "m": grid(&m), "d": grid(&d) })
        }
    };
    write_json(
        &out.join("canonical.json"),
        &json!({
            "mode": F::MODE,
            "n": form.n(),
            "l": form.l,
            "security": plan.report,
            "canonical": grid(&form.canonical),
            "transform": grid(&form.transform),
            "companion": companion,
        }),
    )?;

    let bank = &plan.bank;
    let observers = match &bank.observers {
        Observers::MaximallySecure { a, observers } => json!({
            "a": a.to_string(),
            "direct_sensor": bank.n,
            "observers": observers.iter().map(|o| json!({
                "sensor": o.sensor + 1,
                "p": o.p.to_string(),
                "q": o.q.to_string(),
                "c": o.c.to_string(),
            })).collect::<Vec<_>>(),
        }),
        Observers::General { index, observers, .. } => json!({
            "index": index,
            "observers": observers.iter().map(|o| json!({
                "sensors": o.subset.iter().map(|s| s + 1).collect::<Vec<_>>(),
                "p": grid(&o.p),
                "q": grid(&o.q),
            })).collect::<Vec<_>>(),
        }),
    };
    let mut doc = json!({
        "kind": bank.kind(),
        "latency": bank.latency,
        "regen_latency": bank.regen_latency,
        "required_horizon": bank.required_horizon(),
    });
    if let (Value::Object(doc), Value::Object(rest)) = (&mut doc, observers) {
        doc.extend(rest);
    }
    write_json(&out.join("observers.json"), &doc)
}

pub fn detect(args: &DetectArgs) -> Result<u8> {
    let (spec, settings) = load(&args.system)?;
    let verdict = dispatch!(settings.mode, run_detect(&spec, args, settings.eps_sig))?;
    emit(serde_json::to_string_pretty(&verdict)?);
    Ok(if verdict.attacked { status::ATTACK_DETECTED } else { status::OK })
}

fn run_detect<F: Scalar>(spec: &SystemSpec, args: &DetectArgs, eps_sig: f64) -> Result<VerdictSummary> {
    let sys = spec.build::<F>()?;
    let received = read_signals::<F>(&args.signals, sys.n())?;
    let verdict = engine::detect(sys.kernel(), &received, eps_sig)?;
    let summary = verdict.summary();
    if let Some(out) = &args.out {
        std::fs::create_dir_all(out)?;
        verdict.residual.write_csv(BufWriter::new(File::create(out.join("residual.csv"))?), "s")?;
        write_json(&out.join("verdict.json"), &summary)?;
    }
    Ok(summary)
}

/// Contents of `result.json` written by `correct`.
#[derive(Serialize)]
struct CorrectReport {
    mode: Mode,
    n: usize,
    horizon: usize,
    security: SecurityReport,
    bank: BankKind,
    latency: usize,
    regen_latency: usize,
    verdict: VerdictSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    correction: Option<CorrectionSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    correction_error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tie_tally: Option<Vec<usize>>,
}

pub fn correct(args: &CorrectArgs) -> Result<u8> {
    let (spec, settings) = load(&args.system)?;
    std::fs::create_dir_all(&args.out)?;
    dispatch!(settings.mode, run_correct(&spec, args, settings.eps_sig))
}

fn run_correct<F: Scalar>(spec: &SystemSpec, args: &CorrectArgs, eps_sig: f64) -> Result<u8> {
    let sys: System<F> = spec.build()?;
    let received = read_signals::<F>(&args.signals, sys.n())?;
    let plan = sys.plan()?;
    let verdict = engine::detect(sys.kernel(), &received, eps_sig)?;
    let mut report = CorrectReport {
        mode: F::MODE,
        n: sys.n(),
        horizon: received.horizon(),
        security: plan.report.clone(),
        bank: plan.bank.kind(),
        latency: plan.bank.latency,
        regen_latency: plan.bank.regen_latency,
        verdict: verdict.summary(),
        correction: None,
        correction_error: None,
        tie_tally: None,
    };
    let code = match engine::correct(&plan.bank, &received, eps_sig) {
        Ok(res) => {
            res.corrected.write_csv(BufWriter::new(File::create(args.out.join("corrected.csv"))?), "y")?;
            let (table, names) = observer_table(&res.candidates)?;
            table.write_csv_named(BufWriter::new(File::create(args.out.join("observers.csv"))?), &names)?;
            report.correction = Some(res.summary());
            status::OK
        }
        Err(Error::MajorityTie { tally }) => {
            eprintln!("sentinel: majority vote tie, class sizes {tally:?}");
            report.correction_error = Some(Error::MajorityTie { tally: tally.clone() }.to_string());
            report.tie_tally = Some(tally);
            status::MAJORITY_TIE
        }
        Err(e) => return Err(e),
    };
    write_json(&args.out.join("result.json"), &report)?;
    emit(args.out.join("result.json").display());
    Ok(code)
}

/// Seed from `SENTINEL_SEED` when set.
fn seed_override() -> Result<Option<u64>> {
    match std::env::var("SENTINEL_SEED") {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::Parse(format!("SENTINEL_SEED must be an unsigned integer, got `{v}`"))),
        Err(_) => Ok(None),
    }
}

pub fn simulate(args: &SimulateArgs) -> Result<u8> {
    let (file, mut spec) = ScenarioFile::load(&args.scenario).map_err(at(&args.scenario))?;
    if let Some(path) = &args.system {
        spec = SystemSpec::load(path).map_err(at(path))?;
    }
    let settings = settings(&spec, &args.tuning)?;
    let seed = seed_override()?.unwrap_or(file.seed);
    dispatch!(settings.mode, run_simulate(&file, &spec, seed, &args.out, settings.eps_sig))
}

fn run_simulate<F: Scalar>(file: &ScenarioFile, spec: &SystemSpec, seed: u64, out: &Path, eps_sig: f64) -> Result<u8> {
    let sys: System<F> = spec.build()?;
    let initial = file.initial::<F>(spec)?;
    let mut result = prepare_scenario(&sys, &file.attack, &initial, file.horizon, seed, eps_sig)?;
    let mut failure = None;
    if file.correct {
        match engine::correct(&sys.plan()?.bank, &result.received, eps_sig) {
            Ok(c) => result.correction = Some(c),
            Err(e @ Error::MajorityTie { .. }) => failure = Some(e),
            Err(e) => return Err(e),
        }
    }
    let mut report = RunReport::new(&sys, &file.attack, &result, seed, eps_sig)?;
    if let Some(e) = &failure {
        report = report.with_error(e);
    }
    write_outputs(out, &result, &report)?;
    emit(serde_json::to_string_pretty(&report)?);
    match failure {
        Some(e) => {
            eprintln!("sentinel: {e}");
            Ok(status::MAJORITY_TIE)
        }
        None => Ok(status::OK),
    }
}
