//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the report is always printed; the
//! process exits nonzero when any criterion fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use common::*;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sentinel_core::engine::{
    binomial, build_observers_general, build_observers_ms, correct_general, correct_ms, detect, majority_bound_holds,
    plan, Observers,
};
use sentinel_core::polyalg::{kronecker_hermite, Companion, Poly, PolyMatrix, Real, Scalar};
use sentinel_core::security::{kernel_from_md, security_index_kernel, security_index_md};
use sentinel_core::signals::{apply_poly_matrix, SignalVector};
use sentinel_core::sim::{behavior_trajectory, exponentiate, simulate, AttackScenario, ScenarioFile, System};

// Pinned tolerances and budgets.
const FAST_BUDGET: Duration = Duration::from_secs(1);
const EX2_BUDGET: Duration = Duration::from_secs(30);
/// Relative tolerance for signal equality in tolerant mode.
const EPS_SIG: f64 = 1e-6;
/// Largest `|ŷ - y|` over the valid window, relative to the largest `|y|`.
const EX2_CORRECTION_REL: f64 = 1e-6;
/// Significant figures of the printed coefficients.
const SIG_FIGS: i32 = 2;
const C6_PAIRS: usize = 200;
const C7_SYSTEMS: usize = 100;
const C9_MATRICES: usize = 500;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if $cond {
        } else {
            return Err(format!($($msg)+));
        }
    };
}

fn timed(budget: Option<Duration>, f: impl FnOnce() -> Outcome) -> (Outcome, Duration) {
    let start = Instant::now();
    let out = f();
    let elapsed = start.elapsed();
    let out = match (out, budget) {
        (Ok(msg), Some(b)) if elapsed > b => Err(format!("{msg}; took {elapsed:?}, budget {b:?}")),
        (other, _) => other,
    };
    (out, elapsed)
}

fn example1_a() -> Vec<Vec<Q>> {
    let p = |s: &str| Q::parse_scalar(s).unwrap();
    vec![vec![p("0"), p("1"), p("0")], vec![p("0"), p("0"), p("1")], vec![p("1/2"), p("-3/2"), p("3/2")]]
}

fn example1_kernel() -> QMatrix {
    PolyMatrix::shift_minus(&example1_a()).unwrap()
}

fn c1_canonical() -> Outcome {
    let r = example1_kernel();
    let form = kronecker_hermite(&r, 2).map_err(|e| e.to_string())?;
    let want = [["1", "0", "-6x^2+7x-6"], ["0", "1", "-2x^2+3x-3"], ["0", "0", "x^3-3/2x^2+3/2x-1/2"]];
    let got = form.canonical.to_strings();
    for (i, row) in want.iter().enumerate() {
        for (j, w) in row.iter().enumerate() {
            ensure!(got[i][j] == *w, "entry ({}, {}) is {} not {}", i + 1, j + 1, got[i][j], w);
        }
    }
    ensure!(form.transform.mul(&r).unwrap() == form.canonical, "U R differs from the canonical matrix");
    ensure!(form.transform.det().unwrap().is_unit(), "U is not unimodular");
    Ok("exact match of all nine entries; U R = canonical; det U constant".into())
}

fn c2_index() -> Outcome {
    let report = security_index_kernel(&example1_kernel()).map_err(|e| e.to_string())?;
    ensure!(report.index == 3, "index {}", report.index);
    ensure!(report.maximally_secure, "not maximally secure");
    Ok(format!(
        "index {}, maximally secure, detects up to {}, corrects up to {}",
        report.index, report.detectable_weight_max, report.correctable_weight_max
    ))
}

fn c3_observers() -> Outcome {
    let form = kronecker_hermite(&example1_kernel(), 2).map_err(|e| e.to_string())?;
    let bank = build_observers_ms(&form).map_err(|e| e.to_string())?;
    let Observers::MaximallySecure { observers, .. } = &bank.observers else {
        return Err("bank is not maximally secure".into());
    };
    let got: Vec<(String, String)> = observers.iter().map(|o| (o.p.to_string(), o.q.to_string())).collect();
    let want = [("x^2", "-6x-2"), ("x", "-2")];
    for (k, (p, q)) in want.iter().enumerate() {
        ensure!(got[k].0 == *p && got[k].1 == *q, "observer {}: p = {}, q = {}", k + 1, got[k].0, got[k].1);
    }
    Ok(format!("p1 = {}, q1 = {}, p2 = {}, q2 = {}", got[0].0, got[0].1, got[1].0, got[1].1))
}

fn c4_latency() -> Outcome {
    let (file, spec) = ScenarioFile::load(&data_path("example1_scenario.json")).map_err(|e| e.to_string())?;
    ensure!(file.horizon == 60, "fixture horizon {}", file.horizon);
    let sys = spec.build::<Q>().map_err(|e| e.to_string())?;
    let y = simulate(&sys, &file.initial::<Q>(&spec).unwrap(), file.horizon).map_err(|e| e.to_string())?;
    let eta: SignalVector<Q> = file.attack.generate(3, file.horizon, file.seed).map_err(|e| e.to_string())?;
    ensure!(eta.support(0.0).support == vec![2], "attack support {:?}", eta.support(0.0).support);
    let r = y.add(&eta).unwrap();
    let bank = &sys.plan().map_err(|e| e.to_string())?.bank;
    ensure!((bank.latency, bank.regen_latency) == (2, 4), "latencies {} / {}", bank.latency, bank.regen_latency);
    let res = correct_ms(bank, &r, 0.0).map_err(|e| e.to_string())?;

    let (c1, c2) = (&res.candidates[0], &res.candidates[1]);
    let h = c1.horizon().min(c2.horizon());
    ensure!(c1.component(0)[2..h] == c2.component(0)[2..h], "observer outputs 1 and 2 differ for t >= 2");
    let diverge = (0..h).rev().find(|&t| c1.component(0)[t] != res.candidates[2].component(0)[t]);
    ensure!(diverge.is_some(), "attacked observer agrees with the others");

    let err = res.corrected.sub(&y).unwrap();
    let h = err.horizon();
    for (i, comp) in err.components().iter().enumerate() {
        if let Some(t) = (4..h).find(|&t| comp[t] != Q::from_integer(0.into())) {
            return Err(format!("ŷ{} - y{} nonzero at t = {t}", i + 1, i + 1));
        }
    }
    ensure!(res.tally == vec![2, 1], "tally {:?}", res.tally);
    Ok(format!(
        "seed {}, horizon 60: observers 1,2 identical on t in [2, {}), ŷ - y = 0 exactly on t in [4, {h}), tally {:?}",
        file.seed,
        c1.horizon().min(c2.horizon()),
        res.tally
    ))
}

/// Half a unit in the last printed place of a 2-significant-figure value.
fn half_ulp(printed: f64) -> f64 {
    0.5 * 10f64.powi(printed.abs().log10().floor() as i32 - (SIG_FIGS - 1))
}

fn rounds_to(value: f64, printed: f64) -> bool {
    (value - printed).abs() <= half_ulp(printed) * (1.0 + 1e-12)
}

/// Printed coefficients whose exponent is off by one.
struct Erratum {
    what: &'static str,
    printed: f64,
}

const ERRATA: &[Erratum] = &[
    Erratum { what: "row 4, coefficient of ξ", printed: 2.9e3 },
    Erratum { what: "p4, coefficient of ξ^5", printed: -2.3e-3 },
];

/// Compares descending computed coefficients with printed ones, allowing
/// listed errata whose mantissa matches with exponent off by exactly one.
fn compare(label: &str, computed: &[f64], printed: &[f64], used: &mut Vec<String>) -> Result<(), String> {
    ensure!(computed.len() == printed.len(), "{label}: {} coefficients, printed {}", computed.len(), printed.len());
    for (k, (&v, &p)) in computed.iter().zip(printed).enumerate() {
        if rounds_to(v, p) {
            continue;
        }
        let erratum = ERRATA.iter().find(|e| e.printed == p && e.what.starts_with(label));
        match erratum {
            Some(e) if rounds_to(v, p * 10.0) || rounds_to(v, p / 10.0) => {
                used.push(format!("{} printed {:e}, computed {:.4e}", e.what, p, v));
            }
            _ => return Err(format!("{label}: coefficient {k} (descending) is {v:.5e}, printed {p:e}")),
        }
    }
    Ok(())
}

fn descending(p: &Poly<Real>) -> Vec<f64> {
    p.coeffs().iter().rev().map(|c| c.0).collect()
}

fn example2_a_tilde() -> DMatrix<f64> {
    let (l1, r1, l2, r2, c0) = (4.3e-3, 83.1e-3, 2.4e-3, 67.3e-3, 18e-6);
    let w = 100.0 * std::f64::consts::PI;
    #[rustfmt::skip]
    let rows = [
        -r1 / l1, w, 0.0, 0.0, -1.0 / l1, 0.0,
        -w, -r1 / l1, 0.0, 0.0, 0.0, -1.0 / l1,
        0.0, 0.0, -r2 / l2, w, 1.0 / l2, 0.0,
        0.0, 0.0, -w, -r2 / l2, 0.0, 1.0 / l2,
        1.0 / c0, 0.0, -1.0 / c0, 0.0, 0.0, w,
        0.0, 1.0 / c0, 0.0, -1.0 / c0, -w, 0.0,
    ];
    DMatrix::from_row_slice(6, 6, &rows)
}

fn c5_example2() -> Outcome {
    let e = exponentiate(&example2_a_tilde(), 200e-6).map_err(|e| e.to_string())?;
    let a: Vec<Vec<Real>> = (0..6).map(|i| (0..6).map(|j| Real(e[(i, j)])).collect()).collect();
    let sys = System::from_state_space(a).map_err(|e| e.to_string())?;
    let plan = sys.plan().map_err(|e| e.to_string())?;
    ensure!(plan.report.index == 6, "index {}", plan.report.index);
    let Companion::MaximallySecure { a, .. } = &plan.canonical.companion else {
        return Err("canonical form is not maximally secure".into());
    };
    let mut errata_used = Vec::new();

    #[rustfmt::skip]
    let printed_column: [[f64; 6]; 5] = [
        [7.4e2, -1.8e3, 2.9e3, -2.9e3, 1.8e3, -7.3e2],
        [94.0, -2.7e2, 4.3e2, -4.8e2, 2.9e2, -1.4e2],
        [7.4e2, -1.8e3, 2.9e3, -2.9e3, 1.8e3, -7.3e2],
        [94.0, -2.7e2, 4.3e2, -4.8e2, 2.9e3, -1.4e2],
        [4.7, -3.2, 3.3, -2.4, 1.2, -3.3],
    ];
    for (i, printed) in printed_column.iter().enumerate() {
        let entry = descending(plan.canonical.canonical.get(i, 5));
        compare(&format!("row {}", i + 1), &entry, printed, &mut errata_used)?;
    }

    // a(ξ) is monic here; the printed one carries a rounded leading 3.6e4.
    // Intersect, over all coefficients, the scales s that make s·a_k round
    // to the printed value.
    let printed_a = [3.6e4, -1.3e5, 2.3e5, -2.9e5, 2.3e5, -1.2e5, 3.6e4];
    let coeffs = descending(a);
    ensure!(coeffs.len() == 7, "deg a = {}", coeffs.len() - 1);
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    for (&v, &p) in coeffs.iter().zip(&printed_a) {
        let h = half_ulp(p);
        let (x, y) = ((p - h) / v, (p + h) / v);
        lo = lo.max(x.min(y));
        hi = hi.min(x.max(y));
    }
    ensure!(lo <= hi, "no common scale rounds every coefficient of a(ξ) to its printed value");
    let scale = 0.5 * (lo + hi);

    // Printed p_j carry the opposite sign to the Bézout pairs of the column
    // convention used by the first example; compare up to one global sign.
    #[rustfmt::skip]
    let printed_p: [[f64; 6]; 5] = [
        [1.3e2, -2.7e2, 2.2e2, -69.0, -88.0, 78.0],
        [4.1e-2, -19.0, 44.0, -65.0, 75.0, -35.0],
        [-72.0, 1.5e2, -1.2e2, 39.0, 49.0, -44.0],
        [-2.3e-3, 11.0, -24.0, 36.0, -42.0, 19.0],
        [-4.7, 3.2, -3.3, 2.4, -1.2, 3.3],
    ];
    let Observers::MaximallySecure { observers, .. } = &plan.bank.observers else {
        return Err("bank is not maximally secure".into());
    };
    let mut sign_report = None;
    for sign in [1.0, -1.0] {
        let mut used = Vec::new();
        let ok = observers.iter().zip(&printed_p).enumerate().try_for_each(|(j, (o, printed))| {
            let c: Vec<f64> = descending(&o.p).iter().map(|v| sign * v).collect();
            compare(&format!("p{}", j + 1), &c, printed, &mut used)
        });
        if ok.is_ok() {
            errata_used.extend(used);
            sign_report = Some(sign);
            break;
        }
    }
    let Some(sign) = sign_report else {
        return Err("observers p1..p5 do not match the printed ones under either sign".into());
    };

    // All 15 two-sensor attack supports.
    let init: Vec<Real> = [1.0, -0.5, 0.8, 0.3, -1.0, 0.6].iter().map(|&v| Real(v)).collect();
    let horizon = 120;
    let y = simulate(&sys, &init, horizon).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    let mut patterns = 0;
    for (k, pair) in itertools::Itertools::combinations(0..6usize, 2).enumerate() {
        let scenario: AttackScenario = serde_json::from_value(serde_json::json!({
            "sensors": pair.iter().map(|s| serde_json::json!({
                "sensor": s + 1, "generator": {"kind": "uniform", "lo": -1.0, "hi": 1.0}
            })).collect::<Vec<_>>()
        }))
        .unwrap();
        let eta: SignalVector<Real> = scenario.generate(6, horizon, 100 + k as u64).unwrap();
        let r = y.add(&eta).unwrap();
        ensure!(detect(sys.kernel(), &r, EPS_SIG).unwrap().attacked, "attack on {pair:?} not detected");
        let res = correct_ms(&plan.bank, &r, EPS_SIG).map_err(|e| format!("attack on {pair:?}: {e}"))?;
        ensure!(res.winning_count() >= 4, "attack on {pair:?}: tally {:?}", res.tally);
        let to = res.corrected.horizon();
        let rel = max_abs_diff(&res.corrected, &y.truncated(to), res.valid_from, to)
            / y.truncated(to).with_valid_from(res.valid_from).max_magnitude();
        ensure!(rel < EX2_CORRECTION_REL, "attack on {pair:?}: relative error {rel:.3e}");
        worst = worst.max(rel);
        patterns += 1;
    }
    Ok(format!(
        "index 6; column and a(ξ) match to {SIG_FIGS} s.f. with a(ξ) scale in [{lo:.0}, {hi:.0}] (used {scale:.0}); \
         p1..p5 match with sign {sign:+}; errata: [{}]; {patterns}/15 two-sensor attacks corrected, \
         worst relative error {worst:.2e}",
        errata_used.join("; ")
    ))
}

fn c6_detection() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let horizon = 16;
    let mut by_index = [0usize; 6];
    let mut heavy_checked = 0;
    for pair in 0..C6_PAIRS {
        let n = rng.gen_range(2..=5);
        let density = [1.0, 0.7, 0.5][pair % 3];
        let r = random_kernel(&mut rng, n, 3, density);
        let report = security_index_kernel(&r).map_err(|e| e.to_string())?;
        by_index[report.index] += 1;
        let init = random_ints(&mut rng, sentinel_core::sim::free_samples(&r).unwrap());
        let y = behavior_trajectory(&r, &init, horizon).map_err(|e| e.to_string())?;

        let clean = detect(&r, &y, 0.0).unwrap();
        ensure!(!clean.attacked, "pair {pair}: clean trajectory flagged");

        let w = rng.gen_range(0..=n);
        let support = random_support(&mut rng, n, w);
        let eta = random_attack(&mut rng, n, &support, horizon);
        let verdict = detect(&r, &y.add(&eta).unwrap(), 0.0).unwrap();
        ensure!(verdict.residual == apply_poly_matrix(&r, &eta).unwrap(), "pair {pair}: residual is not R(σ)η");

        if report.index >= 2 {
            let w = rng.gen_range(1..report.index);
            let support = random_support(&mut rng, n, w);
            let eta = random_attack(&mut rng, n, &support, horizon);
            let verdict = detect(&r, &y.add(&eta).unwrap(), 0.0).unwrap();
            ensure!(verdict.attacked, "pair {pair}: weight {w} < index {} undetected", report.index);
            heavy_checked += 1;
        }
    }
    Ok(format!(
        "{C6_PAIRS} pairs (index histogram 1..5: {:?}); residual = R(σ)η and clean ⇒ no alarm in all; \
         {heavy_checked} attacks of weight below the index all detected",
        &by_index[1..]
    ))
}

fn c7_correction() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut ms_runs = 0;
    let mut with_rejections = 0;
    let mut by_t = [0usize; 3];
    for sys_no in 0..C7_SYSTEMS {
        let n = rng.gen_range(3..=6);
        let m = rng.gen_range(1..=2);
        let (big_m, d, index) = random_md(&mut rng, n, m);
        let general = build_observers_general(&big_m, &d, index).map_err(|e| e.to_string())?;
        let ms = if index == n {
            let r = kernel_from_md(&big_m, &d).unwrap();
            let (report, _, bank) = plan(&r).map_err(|e| e.to_string())?;
            ensure!(report.index == index, "system {sys_no}: kernel index {} vs {index}", report.index);
            Some(bank)
        } else {
            None
        };
        let need = ms.iter().map(|b| b.required_horizon()).max().unwrap_or(0).max(general.required_horizon());
        let horizon = need + 6;
        let sys = System::from_md(big_m.clone(), d.clone()).unwrap();
        let init = random_ints(&mut rng, sys.initial_len().unwrap());
        let y = simulate(&sys, &init, horizon).unwrap();

        let t = (index - 1) / 2;
        by_t[t.min(2)] += 1;
        let support = random_support(&mut rng, n, t);
        let r = y.add(&random_attack(&mut rng, n, &support, horizon)).unwrap();

        let res = correct_general(&general, &r, 0.0).map_err(|e| format!("system {sys_no}: {e}"))?;
        let err = res.corrected.sub(&y).unwrap();
        ensure!(
            err.support(0.0).weight == 0,
            "system {sys_no}: general correction wrong (N {n}, index {index}, t {t})"
        );
        with_rejections += usize::from(!res.rejected.is_empty());
        let bound = binomial(n - t, n + 1 - index);
        ensure!(
            res.winning_count() as u128 >= bound,
            "system {sys_no}: winning count {} below {bound}",
            res.winning_count()
        );
        if let Some(bank) = ms {
            let res = correct_ms(&bank, &r, 0.0).map_err(|e| format!("system {sys_no}: {e}"))?;
            ensure!(res.corrected.sub(&y).unwrap().support(0.0).weight == 0, "system {sys_no}: correct_ms wrong");
            ms_runs += 1;
        }
    }
    Ok(format!(
        "{C7_SYSTEMS} systems (attack weight t = 0/1/2+: {:?}); general path exact in all, \
         maximally secure path exact in {ms_runs}; winning count ≥ C(N-t, N+1-δ) in all; \
         inconsistent candidates dropped in {with_rejections}",
        by_t
    ))
}

fn c8_counting() -> Outcome {
    let mut checked = 0;
    for n in 3..=12 {
        for index in 1..=n {
            for t in (0..).take_while(|t| 2 * t < index) {
                ensure!(majority_bound_holds(n, index, t), "fails at N {n}, δ {index}, t {t}");
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} triples (N, δ, t) with 3 ≤ N ≤ 12, 2t < δ"))
}

fn c9_oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut lu, mut not_lu) = (0, 0);
    for k in 0..C9_MATRICES {
        let cols = rng.gen_range(1..=3);
        let rows = rng.gen_range(cols..=cols + 2);
        let mut mat = random_matrix(&mut rng, rows, cols, 3, [1.0, 0.6, 0.4][k % 3]);
        if rng.gen_bool(0.3) {
            let j = rng.gen_range(0..cols);
            let factor = Poly::from_ints(&[rng.gen_range(-2..=2), 1]);
            for i in 0..rows {
                let e = mat.get(i, j) * &factor;
                mat.set(i, j, e);
            }
        }
        let got = mat.is_left_unimodular().unwrap();
        ensure!(got == minors_gcd_oracle(&mat), "matrix {k} disagrees with the minors oracle:\n{mat}");
        if got {
            lu += 1;
        } else {
            not_lu += 1;
        }
    }

    let mut reps = 0;
    for _ in 0..40 {
        let n = rng.gen_range(2..=5);
        let m = rng.gen_range(1..=2);
        let (big_m, d, index) = random_md(&mut rng, n, m);
        let r = kernel_from_md(&big_m, &d).unwrap();
        let k = security_index_kernel(&r).unwrap().index;
        ensure!(k == index, "kernel index {k}, (M, D) index {index}");
        reps += 1;
    }
    for _ in 0..40 {
        let n = rng.gen_range(2..=4);
        let r = random_kernel(&mut rng, n, 2, 0.7);
        let report = security_index_kernel(&r).unwrap();
        let (big_m, d) = kronecker_hermite(&r, report.l).unwrap().md().unwrap();
        let k = security_index_md(&big_m, &d).unwrap().index;
        ensure!(k == report.index, "(M, D) index {k}, kernel index {}", report.index);
        reps += 1;
    }

    let mut agree = 0;
    let mut systems = vec![example1_kernel()];
    while systems.len() < 25 {
        let n = rng.gen_range(2..=4);
        let r = random_kernel(&mut rng, n, 2, 1.0);
        if security_index_kernel(&r).unwrap().maximally_secure {
            systems.push(r);
        }
    }
    for r in &systems {
        let n = r.rows();
        let form = kronecker_hermite(r, n - 1).unwrap();
        let ms = build_observers_ms(&form).unwrap();
        let (big_m, d) = form.md().unwrap();
        let general = build_observers_general(&big_m, &d, n).unwrap();
        let horizon = ms.required_horizon().max(general.required_horizon()) + 4;
        let init = random_ints(&mut rng, sentinel_core::sim::free_samples(r).unwrap());
        let y = behavior_trajectory(r, &init, horizon).unwrap();
        let support = random_support(&mut rng, n, (n - 1) / 2);
        let rcv = y.add(&random_attack(&mut rng, n, &support, horizon)).unwrap();
        let a = correct_ms(&ms, &rcv, 0.0).map_err(|e| e.to_string())?;
        let b = correct_general(&general, &rcv, 0.0).map_err(|e| e.to_string())?;
        let from = a.valid_from.max(b.valid_from);
        let to = a.corrected.horizon().min(b.corrected.horizon());
        ensure!(from < to, "empty common window");
        ensure!(max_abs_diff(&a.corrected, &b.corrected, from, to) == 0.0, "paths disagree");
        agree += 1;
    }
    Ok(format!(
        "left unimodularity = minors-GCD oracle on {C9_MATRICES} matrices ({lu} true, {not_lu} false); \
         kernel and (M, D) indices agree on {reps} systems; both correction paths agree on {agree} \
         maximally secure systems"
    ))
}

fn main() {
    type Criterion = (&'static str, &'static str, Option<Duration>, fn() -> Outcome);
    let criteria: Vec<Criterion> = vec![
        ("1", "Example 1 canonical form", Some(FAST_BUDGET), c1_canonical),
        ("2", "Example 1 security index", Some(FAST_BUDGET), c2_index),
        ("3", "Example 1 observers", Some(FAST_BUDGET), c3_observers),
        ("4", "Example 1 correction latency", None, c4_latency),
        ("5", "Example 2 pipeline", Some(EX2_BUDGET), c5_example2),
        ("6", "detection soundness/completeness", None, c6_detection),
        ("7", "correction guarantee", None, c7_correction),
        ("8", "counting inequality", None, c8_counting),
        ("9", "oracle equivalences", None, c9_oracles),
    ];
    let mut failures = 0;
    for (id, title, budget, f) in criteria {
        let (outcome, elapsed) = timed(budget, || {
            catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
                let msg = p
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                Err(format!("panicked: {msg}"))
            })
        });
        match outcome {
            Ok(msg) => println!("PASS criterion {id} ({title}): {msg} [{elapsed:.2?}]"),
            Err(msg) => {
                failures += 1;
                println!("FAIL criterion {id} ({title}): {msg} [{elapsed:.2?}]");
            }
        }
    }
    if failures > 0 {
        println!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
}
