//! Acceptance runner. Prints one PASS/FAIL line per criterion followed by the
//! measurements behind it. A failing criterion is a finding and does not
//! change the exit status; the runner exits nonzero only when a criterion
//! cannot be evaluated.

mod support;

use std::time::Instant;

use radial_mes::data::{radial_decompose, DataMatrix, RadialSample};
use radial_mes::evt::{
    auto_s, confidence_interval, confidence_interval_serial, fit_tail, hill_sorted, plain_mes,
    variance_inflation, CiKind, Variant,
};
use radial_mes::models::diagnostics::kendall_tau;
use radial_mes::models::presets::{preset, reference_mes, PRESET_NAMES, REFERENCE_TAU};
use radial_mes::models::series::{ar1_pareto, armax_frechet, dirichlet_panel, frechet_tail_mean};
use radial_mes::models::{sample_copula, sample_model, Copula, Marginal, ModelSpec};
use radial_mes::oracle::true_mes;
use radial_mes::sim::{k_grid_from_fractions, run_experiment, CiSpec, CurveResult, ExperimentConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use support::*;

type Outcome = Result<(bool, Vec<String>), String>;

/// `ACCEPTANCE_ORACLE_DRAWS` lowers the oracle budget for quick local runs.
fn oracle_draws() -> u64 {
    std::env::var("ACCEPTANCE_ORACLE_DRAWS").ok().and_then(|v| v.parse().ok()).unwrap_or(100_000_000)
}

const REPLICATES: usize = 1000;

fn main() {
    let criteria: [(&str, fn() -> Outcome); 7] = [
        ("1 oracle reproduces the reference MES values", oracle_truth),
        ("2 plain estimator beats both competitors in MSE", dominance),
        ("3 adjusted estimator stays close to or below plain MSE", bias_correction),
        ("4 refined interval coverage in [0.90, 0.99]", refined_coverage),
        ("5 invariant suite on random inputs within a minute", invariants),
        ("6 tail index and copula consistency", consistency),
        ("7 serial variance inflation", serial),
    ];
    let mut unevaluated = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        match run() {
            Ok((pass, lines)) => {
                println!("{} {name} ({:.1} s)", if pass { "PASS" } else { "FAIL" }, start.elapsed().as_secs_f64());
                for l in lines {
                    println!("    {l}");
                }
            }
            Err(e) => {
                unevaluated += 1;
                println!("FAIL {name}: not evaluated: {e}");
            }
        }
    }
    if unevaluated > 0 {
        std::process::exit(1);
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn within(value: f64, target: f64, rel: f64) -> bool {
    (value - target).abs() <= rel * target.abs()
}

fn oracle_truth() -> Outcome {
    let mut pass = true;
    let mut lines = vec![format!("{} draws per model at tau {REFERENCE_TAU}", oracle_draws())];
    for (i, name) in PRESET_NAMES.iter().enumerate() {
        let spec = preset(name).map_err(err)?;
        let published = reference_mes(name).ok_or("no reference values")?;
        let res = true_mes(&spec, REFERENCE_TAU, oracle_draws(), 1000 + i as u64).map_err(err)?;
        for (j, &target) in published.iter().enumerate() {
            let ok = within(res.theta[j], target, 0.02);
            pass &= ok;
            lines.push(format!(
                "{name} theta_{}: {:.5} (se {:.5}) vs {target}, {:+.2}% {}",
                j + 1,
                res.theta[j],
                res.standard_error[j],
                100.0 * (res.theta[j] / target - 1.0),
                if ok { "ok" } else { "outside 2%" }
            ));
        }
    }
    Ok((pass, lines))
}

fn study(name: &str, fractions: &[f64], estimators: &[Variant], intervals: &[CiSpec], seed: u64) -> Result<CurveResult, String> {
    study_with_truth(name, fractions, estimators, intervals, seed, None)
}

fn study_with_truth(
    name: &str,
    fractions: &[f64],
    estimators: &[Variant],
    intervals: &[CiSpec],
    seed: u64,
    truth: Option<Vec<f64>>,
) -> Result<CurveResult, String> {
    let mut cfg = ExperimentConfig::for_preset(name).map_err(err)?;
    if truth.is_some() {
        cfg.truth = truth;
    }
    cfg.replicates = REPLICATES;
    cfg.k_grid = k_grid_from_fractions(cfg.n, fractions);
    cfg.estimators = estimators.to_vec();
    cfg.intervals = intervals.to_vec();
    cfg.master_seed = seed;
    run_experiment(&cfg).map_err(err)
}

fn mse(res: &CurveResult, v: Variant) -> Result<Vec<(usize, f64)>, String> {
    let c = res.estimator_curve(v, 0).ok_or_else(|| format!("no {v} curve"))?;
    Ok(c.points.iter().map(|p| (p.k, p.mse)).collect())
}

fn dominance() -> Outcome {
    let fractions = [0.05, 0.10, 0.20, 0.30];
    let mut pass = true;
    let mut lines = Vec::new();
    for (i, name) in ["model_ii", "model_iii", "model_v"].iter().enumerate() {
        let res = study(name, &fractions, &[Variant::Plain, Variant::Emp, Variant::Cai], &[], 2000 + i as u64)?;
        let (plain, emp, cai) = (mse(&res, Variant::Plain)?, mse(&res, Variant::Emp)?, mse(&res, Variant::Cai)?);
        for ((&(k, p), &(_, e)), &(_, c)) in plain.iter().zip(&emp).zip(&cai) {
            let ok = p < e && p < c;
            pass &= ok;
            lines.push(format!(
                "{name} k/n {:.2}: mse plain {p:.4}, emp {e:.4}, cai {c:.4} {}",
                k as f64 / res.n as f64,
                if ok { "ok" } else { "not dominated" }
            ));
        }
    }
    let truth = oracle_reference("model_iii")?;
    let res = study_with_truth("model_iii", &fractions, &[Variant::Plain, Variant::Emp, Variant::Cai], &[], 2001, Some(truth))?;
    let (plain, emp, cai) = (mse(&res, Variant::Plain)?, mse(&res, Variant::Emp)?, mse(&res, Variant::Cai)?);
    let cells: Vec<String> = plain.iter().zip(&emp).zip(&cai).map(|((p, e), c)| format!("{:.4}/{:.4}/{:.4}", p.1, e.1, c.1)).collect();
    lines.push(format!("(reported only) model_iii with oracle truth, plain/emp/cai mse: {}", cells.join(", ")));
    Ok((pass, lines))
}

fn bias_correction() -> Outcome {
    let fractions: Vec<f64> = (5..=30).map(|p| p as f64 / 100.0).collect();
    let mut pass = true;
    let mut lines = Vec::new();
    for (i, name) in ["model_i", "model_ii", "model_iii"].iter().enumerate() {
        let res = study(name, &fractions, &[Variant::Plain, Variant::Adjusted], &[], 3000 + i as u64)?;
        let (ok, line) = adjusted_vs_plain(name, &res)?;
        pass &= ok;
        lines.push(line);
    }
    // the model (iii) reference value is far from the oracle; rerun the same
    // replicates against an oracle truth for comparison
    let truth = oracle_reference("model_iii")?;
    let res = study_with_truth("model_iii", &fractions, &[Variant::Plain, Variant::Adjusted], &[], 3002, Some(truth))?;
    lines.push(format!("(reported only) {}", adjusted_vs_plain("model_iii with oracle truth", &res)?.1));
    Ok((pass, lines))
}

fn oracle_reference(name: &str) -> Result<Vec<f64>, String> {
    let spec = preset(name).map_err(err)?;
    Ok(true_mes(&spec, REFERENCE_TAU, 20_000_000, 9000).map_err(err)?.theta)
}

fn adjusted_vs_plain(name: &str, res: &CurveResult) -> Result<(bool, String), String> {
    let (plain, adj) = (mse(res, Variant::Plain)?, mse(res, Variant::Adjusted)?);
    let worst = plain
        .iter()
        .zip(&adj)
        .map(|(&(k, p), &(_, a))| (k, a / p))
        .max_by(|x, y| x.1.total_cmp(&y.1))
        .ok_or("empty grid")?;
    let (&(_, p_end), &(_, a_end)) = (plain.last().ok_or("empty grid")?, adj.last().ok_or("empty grid")?);
    let (lo, hi) = adj.iter().fold((f64::INFINITY, 0f64), |(lo, hi), &(_, a)| (lo.min(a), hi.max(a)));
    let (ok_ratio, ok_end, ok_flat) = (worst.1 <= 1.1, a_end < p_end, hi / lo <= 3.0);
    let line = format!(
        "{name}: max adjusted/plain mse {:.3} at k/n {:.2} {}; at k/n 0.30 adjusted {a_end:.4} vs plain {p_end:.4} {}; adjusted max/min {:.2} {}",
        worst.1,
        worst.0 as f64 / res.n as f64,
        if ok_ratio { "ok" } else { "above 1.1" },
        if ok_end { "ok" } else { "not lower" },
        hi / lo,
        if ok_flat { "ok" } else { "above 3" },
    );
    Ok((ok_ratio && ok_end && ok_flat, line))
}

fn refined_coverage() -> Outcome {
    let res = study("model_ii", &[0.10, 0.20, 0.30], &[Variant::Plain], &CiSpec::ALL, 4000)?;
    let coverage = |spec: CiSpec| -> Result<Vec<(usize, f64)>, String> {
        let c = res.coverage_curve(spec, 0).ok_or_else(|| format!("no {spec} curve"))?;
        Ok(c.points.iter().map(|p| (p.k, 1.0 - p.non_coverage)).collect())
    };
    let refined = coverage(CiSpec { kind: CiKind::Refined, variant: Variant::Plain })?;
    let basic = coverage(CiSpec { kind: CiKind::Basic, variant: Variant::Plain })?;
    let mut pass = true;
    let mut lines = Vec::new();
    for (&(k, r), &(_, b)) in refined.iter().zip(&basic) {
        let (in_band, worse) = ((0.90..=0.99).contains(&r), b < r);
        pass &= in_band && worse;
        lines.push(format!(
            "k/n {:.2}: refined coverage {r:.3} {}, basic {b:.3} {}",
            k as f64 / res.n as f64,
            if in_band { "ok" } else { "outside band" },
            if worse { "worse, ok" } else { "not worse" }
        ));
    }
    for spec in [CiSpec { kind: CiKind::Refined, variant: Variant::Adjusted }, CiSpec { kind: CiKind::Basic, variant: Variant::Adjusted }] {
        let cov: Vec<String> = coverage(spec)?.iter().map(|(_, c)| format!("{c:.3}")).collect();
        lines.push(format!("{spec} coverage (reported only): {}", cov.join(", ")));
    }
    Ok((pass, lines))
}

fn invariants() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5000);
    let mut counts = [0usize; 3];
    let mut failures = Vec::new();
    let mut record = |name: &str, check: Check, counts: &mut [usize; 3]| match check {
        Ok(()) => counts[0] += 1,
        Err(e) if e.contains("unbounded") => counts[1] += 1,
        Err(e) => {
            counts[2] += 1;
            if failures.len() < 5 {
                failures.push(format!("{name}: {e}"));
            }
        }
    };
    for _ in 0..200 {
        let seed: u64 = rng.random();
        let n = rng.random_range(200..800);
        let d = rng.random_range(1..6);
        let tau = rng.random_range(0.99..0.999);
        let k = admissible_k(n, tau, rng.random_range(0.08..0.3));
        let x = pareto_panel(n, d, rng.random_range(0.1..0.45), seed);
        record("scale", scale_equivariance(&x, k, tau, rng.random_range(0.01..100.0)), &mut counts);
        record("closure", angular_closure(&x, k), &mut counts);
        record("aggregation", aggregation_identity(&x, k, tau), &mut counts);
        record("weissman anchor", weissman_anchor(&x, k, rng.random_range(0.01..2.0)), &mut counts);
        record("reduction", adjusted_reduction(&x, k, tau, rng.random_range(-5.0..-0.01)), &mut counts);
        record("lag zero", lag_zero_reduction(&x, k, tau), &mut counts);
        record("monotone in tau", tau_monotonicity(&x, k, &[0.99, 0.995, 0.999, 0.9999]), &mut counts);
    }
    for _ in 0..10 {
        let seed: u64 = rng.random();
        record("mse decomposition", mse_decomposition(seed), &mut counts);
        record("threads", thread_invariance(seed), &mut counts);
        record("csv round trip", csv_round_trip(seed), &mut counts);
        let d = rng.random_range(2..6);
        let caps: Vec<f64> = (0..d).map(|_| rng.random_range(0.5..500.0)).collect();
        let mut perm: Vec<usize> = (0..d).collect();
        perm.reverse();
        let x = pareto_panel(600, d, 0.3, seed);
        record("report", report_invariants(&x, 60, 0.998, &caps, rng.random_range(0.001..1000.0), &perm), &mut counts);
    }
    let secs = start.elapsed().as_secs_f64();
    let mut lines = vec![format!(
        "{} checks held, {} skipped (tail index estimate >= 1), {} violated, {secs:.1} s",
        counts[0], counts[1], counts[2]
    )];
    lines.extend(failures);
    Ok((counts[2] == 0 && secs < 60.0, lines))
}

fn pareto_radii(n: usize, gamma: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| (1.0 - rng.random::<f64>()).powf(-gamma)).collect()
}

fn sorted_hill(mut v: Vec<f64>, k: usize) -> Result<f64, String> {
    v.sort_by(f64::total_cmp);
    hill_sorted(&v, k).map_err(err)
}

fn consistency() -> Outcome {
    let mut pass = true;
    let mut lines = Vec::new();
    for gamma in [0.25, 0.5] {
        let est: Vec<f64> = (0..100u64)
            .into_par_iter()
            .map(|s| sorted_hill(pareto_radii(100_000, gamma, 6000 + s), 2000))
            .collect::<Result<_, _>>()?;
        let mean = est.iter().sum::<f64>() / est.len() as f64;
        let mae = est.iter().map(|g| (g - gamma).abs()).sum::<f64>() / est.len() as f64;
        let ok = (mean - gamma).abs() <= 0.02 && mae <= 0.02;
        pass &= ok;
        lines.push(format!(
            "hill on pareto({gamma}), n 1e5, k 2000, 100 runs: mean {mean:.4}, mean abs error {mae:.4} {}",
            if ok { "ok" } else { "off" }
        ));
    }
    for (label, copula, target) in [
        ("clayton(3)", Copula::clayton(3.0).map_err(err)?, 0.6),
        ("clayton(1e-6)", Copula::clayton(1e-6).map_err(err)?, 0.0),
        ("gumbel(1)", Copula::gumbel(1.0).map_err(err)?, 0.0),
    ] {
        let spec = ModelSpec::new(label, copula, vec![Marginal::pareto(0.5).map_err(err)?; 2]).map_err(err)?;
        let u = sample_copula(&spec, 100_000, 6100).map_err(err)?;
        let t = kendall_tau(&u.column(0), &u.column(1));
        let ok = (t - target).abs() <= 0.01;
        pass &= ok;
        lines.push(format!("{label} kendall tau {t:.4} vs {target} {}", if ok { "ok" } else { "off" }));
    }
    for (i, name) in PRESET_NAMES.iter().enumerate() {
        let spec = preset(name).map_err(err)?;
        let x = sample_model(&spec, 1_000_000, 6200 + i as u64).map_err(err)?.data;
        let mut worst = (0, f64::NAN, f64::NAN);
        for (j, m) in spec.marginals().iter().enumerate() {
            let g = sorted_hill(x.column(j), 5000)?;
            if !((g - m.tail_index()).abs() <= (worst.1 - worst.2).abs()) {
                worst = (j, g, m.tail_index());
            }
        }
        let ok = (worst.1 - worst.2).abs() <= 0.02;
        pass &= ok;
        lines.push(format!(
            "{name} margins, n 1e6, k 5000: largest deviation on x{} with {:.4} vs {:.4} {}",
            worst.0 + 1,
            worst.1,
            worst.2,
            if ok { "ok" } else { "off" }
        ));
    }
    Ok((pass, lines))
}

fn mean_inflation(series: impl Fn(u64) -> Result<Vec<f64>, String> + Sync) -> Result<f64, String> {
    let runs = 50u64;
    let total: f64 = (0..runs)
        .into_par_iter()
        .map(|s| {
            let r = RadialSample::from_radii(series(7000 + s)?).map_err(err)?;
            Ok(variance_inflation(&r, 250, 10).map_err(err)?.inflation)
        })
        .collect::<Result<Vec<f64>, String>>()?
        .iter()
        .sum();
    Ok(total / runs as f64)
}

fn serial() -> Outcome {
    let iid = mean_inflation(|s| Ok(pareto_radii(5000, 0.5, s)))?;
    let ar = mean_inflation(|s| ar1_pareto(5000, 0.7, 0.5, s).map_err(err))?;
    let ok_iid = (1.0..=1.5).contains(&iid);
    let ok_ar = ar > iid;
    let mut lines = vec![
        format!("i.i.d. pareto radii, n 5000, k 250, L 10: mean inflation {iid:.3} {}", if ok_iid { "ok" } else { "outside [1, 1.5]" }),
        format!("AR(1) phi 0.7 radii: mean inflation {ar:.3} {}", if ok_ar { "larger, ok" } else { "not larger" }),
    ];

    // Dirichlet spread of ARMAX Frechet radii: E(X_j | R) = R / d, so the
    // true MES of every component is the Frechet tail mean over d.
    let (n, d, alpha, phi, tau, k, lag) = (1000, 2, 3.0, 0.7, 0.998, 100, 10);
    let truth = frechet_tail_mean(alpha, tau) / d as f64;
    let hits: Vec<(bool, bool, f64)> = (0..500u64)
        .into_par_iter()
        .map(|s| {
            let radii = armax_frechet(n, alpha, phi, 8000 + s).map_err(err)?;
            let x: DataMatrix = dirichlet_panel(&radii, d, 8000 + s).map_err(err)?;
            let r = radial_decompose(&x);
            let est = plain_mes(&r, k, tau).map_err(err)?;
            let fit = fit_tail(&r, k, Some(auto_s(&r))).map_err(err)?;
            let plain = confidence_interval(&est, &fit, CiKind::Refined, 0.05).map_err(err)?;
            let adj = variance_inflation(&r, k, lag).map_err(err)?;
            let inflated = confidence_interval_serial(&est, &fit, CiKind::Refined, 0.05, &adj).map_err(err)?;
            Ok((plain[0].contains(truth), inflated[0].contains(truth), adj.inflation))
        })
        .collect::<Result<_, String>>()?;
    let m = hits.len() as f64;
    let cov_plain = hits.iter().filter(|h| h.0).count() as f64 / m;
    let cov_inflated = hits.iter().filter(|h| h.1).count() as f64 / m;
    let mean_infl = hits.iter().map(|h| h.2).sum::<f64>() / m;
    let ok_cov = cov_inflated >= cov_plain;
    lines.push(format!(
        "ARMAX frechet({alpha}) phi {phi}, n {n}, k {k}, L {lag}, M 500: refined coverage {cov_plain:.3} uninflated, {cov_inflated:.3} inflated (mean inflation {mean_infl:.2}) {}",
        if ok_cov { "ok" } else { "lower" }
    ));
    Ok((ok_iid && ok_ar && ok_cov, lines))
}
