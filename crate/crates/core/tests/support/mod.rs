//! Invariant checks shared by the property tests and the acceptance runner.
//! Each check returns a description of the first violation.

#![allow(dead_code)]

use radial_mes::data::{radial_decompose, DataMatrix};
use radial_mes::evt::{
    adjusted_mes, angular_mean, auto_s, cai_from_radial, confidence_interval, confidence_interval_serial,
    emp_from_radial, fit_tail, plain_mes, second_order_params, variance_inflation, weissman_quantile,
    CiKind, SecondOrder,
};
use radial_mes::models::series::dirichlet_panel;
use radial_mes::returns::{analyze_panel, synthetic_panel, PricePanel, ReportOptions, ReturnKind, RiskReport};
use radial_mes::sim::{k_grid_from_fractions, read_curve_csv, run_experiment, ExperimentConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Check = Result<(), String>;

fn close(a: f64, b: f64, rel: f64, what: &str) -> Check {
    if (a - b).abs() <= rel * a.abs().max(b.abs()).max(f64::MIN_POSITIVE) {
        Ok(())
    } else {
        Err(format!("{what}: {a} vs {b}"))
    }
}

fn close_all(a: &[f64], b: &[f64], rel: f64, what: &str) -> Check {
    if a.len() != b.len() {
        return Err(format!("{what}: lengths {} and {}", a.len(), b.len()));
    }
    a.iter().zip(b).try_for_each(|(x, y)| close(*x, *y, rel, what))
}

/// Pareto(gamma) radii spread over `d` components with flat Dirichlet
/// directions.
pub fn pareto_panel(n: usize, d: usize, gamma: f64, seed: u64) -> DataMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let radii: Vec<f64> = (0..n).map(|_| (1.0 - rng.random::<f64>()).powf(-gamma)).collect();
    dirichlet_panel(&radii, d, seed).unwrap()
}

/// `k` with `k > n(1 - tau)` so that intervals exist.
pub fn admissible_k(n: usize, tau: f64, frac: f64) -> usize {
    let lo = (n as f64 * (1.0 - tau)).floor() as usize + 1;
    ((frac * n as f64) as usize).clamp(lo.max(5), n - 2)
}

/// Multiplying the panel by `c` multiplies every estimate and bound by `c`
/// and leaves tail index and directions unchanged.
pub fn scale_equivariance(x: &DataMatrix, k: usize, tau: f64, c: f64) -> Check {
    let (r, rc) = (radial_decompose(x), radial_decompose(&x.scaled(c)));
    let tol = 1e-9;
    let so = second_order_params(&r, auto_s(&r)).map_err(|e| e.to_string())?;
    let soc = second_order_params(&rc, auto_s(&rc)).map_err(|e| e.to_string())?;
    // second-order fits difference nearly equal log-spacing moments, so they
    // only match to a looser tolerance
    close(so.rho, soc.rho, 1e-6, "rho")?;
    close(so.beta, soc.beta, 1e-6, "beta")?;
    let fit = fit_tail(&r, k, Some(auto_s(&r))).map_err(|e| e.to_string())?;
    let fitc = fit_tail(&rc, k, Some(auto_s(&rc))).map_err(|e| e.to_string())?;
    close(fit.gamma_hat, fitc.gamma_hat, tol, "gamma")?;
    close_all(
        &angular_mean(&r, k).map_err(|e| e.to_string())?,
        &angular_mean(&rc, k).map_err(|e| e.to_string())?,
        tol,
        "angular mean",
    )?;
    for (a, b) in [
        (plain_mes(&r, k, tau), plain_mes(&rc, k, tau)),
        (adjusted_mes(&r, k, tau, &so), adjusted_mes(&rc, k, tau, &soc)),
    ] {
        let (a, b) = (a.map_err(|e| e.to_string())?, b.map_err(|e| e.to_string())?);
        close(c * a.quantile, b.quantile, tol, "quantile")?;
        let scaled: Vec<f64> = a.theta_hat.iter().map(|t| c * t).collect();
        close_all(&scaled, &b.theta_hat, tol, "theta")?;
        for kind in [CiKind::Basic, CiKind::Refined] {
            let ia = confidence_interval(&a, &fit, kind, 0.05).map_err(|e| e.to_string())?;
            let ib = confidence_interval(&b, &fitc, kind, 0.05).map_err(|e| e.to_string())?;
            for (p, q) in ia.iter().zip(&ib) {
                close(c * p.lower, q.lower, tol, "lower bound")?;
                close(c * p.upper, q.upper, tol, "upper bound")?;
            }
        }
    }
    for j in 0..x.d() {
        let xc = x.scaled(c);
        close(
            c * emp_from_radial(x, &r, j, k, tau).map_err(|e| e.to_string())?,
            emp_from_radial(&xc, &rc, j, k, tau).map_err(|e| e.to_string())?,
            tol,
            "emp",
        )?;
        close(
            c * cai_from_radial(x, &r, j, k, tau).map_err(|e| e.to_string())?,
            cai_from_radial(&xc, &rc, j, k, tau).map_err(|e| e.to_string())?,
            tol,
            "cai",
        )?;
    }
    Ok(())
}

/// Directions of nonnegative data sum to one, so the angular mean does too.
pub fn angular_closure(x: &DataMatrix, k: usize) -> Check {
    let w = angular_mean(&radial_decompose(x), k).map_err(|e| e.to_string())?;
    close(w.iter().sum::<f64>(), 1.0, 1e-12, "sum of angular means")
}

/// `sum_j theta_j = Q_R(tau) / (1 - gamma)` for both proposed estimators.
pub fn aggregation_identity(x: &DataMatrix, k: usize, tau: f64) -> Check {
    let r = radial_decompose(x);
    let so = second_order_params(&r, auto_s(&r)).map_err(|e| e.to_string())?;
    for est in [plain_mes(&r, k, tau), adjusted_mes(&r, k, tau, &so)] {
        let est = est.map_err(|e| e.to_string())?;
        close(est.theta_hat.iter().sum(), est.quantile / (1.0 - est.gamma), 1e-12, "aggregation")?;
    }
    Ok(())
}

/// At `tau = 1 - k/n` the extrapolation factor is one and the Weissman
/// quantile is the threshold order statistic.
pub fn weissman_anchor(x: &DataMatrix, k: usize, gamma: f64) -> Check {
    let r = radial_decompose(x);
    let tau = 1.0 - k as f64 / r.n() as f64;
    let q = weissman_quantile(&r, k, tau, gamma).map_err(|e| e.to_string())?;
    close(q, r.sorted()[r.n() - k - 1], 1e-12, "Weissman anchor")
}

/// With `beta = 0` the adjusted estimator is the plain one.
pub fn adjusted_reduction(x: &DataMatrix, k: usize, tau: f64, rho: f64) -> Check {
    let r = radial_decompose(x);
    let plain = plain_mes(&r, k, tau).map_err(|e| e.to_string())?;
    let adj = adjusted_mes(&r, k, tau, &SecondOrder { beta: 0.0, rho, s: auto_s(&r) }).map_err(|e| e.to_string())?;
    if plain.theta_hat != adj.theta_hat || plain.quantile != adj.quantile || plain.gamma != adj.gamma {
        return Err(format!("adjusted {:?} vs plain {:?}", adj.theta_hat, plain.theta_hat));
    }
    Ok(())
}

/// Lag 0 gives inflation one and exactly the independent intervals.
pub fn lag_zero_reduction(x: &DataMatrix, k: usize, tau: f64) -> Check {
    let r = radial_decompose(x);
    let adj = variance_inflation(&r, k, 0).map_err(|e| e.to_string())?;
    if adj.inflation != 1.0 {
        return Err(format!("inflation {} at lag 0", adj.inflation));
    }
    let fit = fit_tail(&r, k, Some(auto_s(&r))).map_err(|e| e.to_string())?;
    let est = plain_mes(&r, k, tau).map_err(|e| e.to_string())?;
    for kind in [CiKind::Basic, CiKind::Refined] {
        let a = confidence_interval(&est, &fit, kind, 0.05).map_err(|e| e.to_string())?;
        let b = confidence_interval_serial(&est, &fit, kind, 0.05, &adj).map_err(|e| e.to_string())?;
        if a != b {
            return Err(format!("{kind} interval changed at lag 0"));
        }
    }
    Ok(())
}

fn tiny_experiment(seed: u64) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::for_preset("model_ii").unwrap();
    cfg.n = 120;
    cfg.replicates = 12;
    cfg.k_grid = k_grid_from_fractions(cfg.n, &[0.1, 0.25]);
    cfg.master_seed = seed;
    cfg
}

/// `mse = squared_bias + variance` at every grid point.
pub fn mse_decomposition(seed: u64) -> Check {
    let res = run_experiment(&tiny_experiment(seed)).map_err(|e| e.to_string())?;
    for c in &res.estimators {
        for p in &c.points {
            if p.successes > 0 {
                close(p.mse, p.squared_bias + p.variance, 1e-9, "mse decomposition")?;
            }
        }
    }
    Ok(())
}

/// Plain estimates grow strictly with `tau` when every angular mean is
/// positive. The adjusted estimate carries a `tau`-dependent correction
/// factor and is not monotone in general.
pub fn tau_monotonicity(x: &DataMatrix, k: usize, taus: &[f64]) -> Check {
    let r = radial_decompose(x);
    let mut taus = taus.to_vec();
    taus.sort_by(f64::total_cmp);
    taus.dedup();
    let mut prev: Option<Vec<f64>> = None;
    for &tau in &taus {
        let theta = plain_mes(&r, k, tau).map_err(|e| e.to_string())?.theta_hat;
        if let Some(p) = &prev {
            if let Some(j) = (0..theta.len()).find(|&j| !(theta[j] > p[j])) {
                return Err(format!("estimate of component {} not increasing at tau = {tau}", j + 1));
            }
        }
        prev = Some(theta);
    }
    Ok(())
}

/// Curve CSV written to disk reads back bit for bit.
pub fn csv_round_trip(seed: u64) -> Check {
    let res = run_experiment(&tiny_experiment(seed)).map_err(|e| e.to_string())?;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("curves.csv");
    std::fs::write(&path, res.to_csv().map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let back = read_curve_csv(&path).map_err(|e| e.to_string())?;
    if back != res.rows() {
        return Err("curve rows changed on the way through csv".into());
    }
    Ok(())
}

/// One worker thread and several give identical results.
pub fn thread_invariance(seed: u64) -> Check {
    let cfg = tiny_experiment(seed);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| run_experiment(&cfg))
    };
    let (a, b) = (run(1).map_err(|e| e.to_string())?, run(3).map_err(|e| e.to_string())?);
    if a.to_csv().unwrap() != b.to_csv().unwrap() {
        return Err("results differ between 1 and 3 threads".into());
    }
    Ok(())
}

fn same_rows(a: &RiskReport, b: &RiskReport, what: &str) -> Check {
    for (p, q) in a.rows.iter().zip(&b.rows) {
        if p.name != q.name || (p.rank_size, p.rank_mes, p.rank_capital_loss) != (q.rank_size, q.rank_mes, q.rank_capital_loss) {
            return Err(format!("{what}: row {} differs", p.name));
        }
        for (u, v) in [
            (p.size_share, q.size_share),
            (p.mes, q.mes),
            (p.mes_share, q.mes_share),
            (p.capital_loss, q.capital_loss),
            (p.lower, q.lower),
            (p.upper, q.upper),
            (p.cumulative_mes_share, q.cumulative_mes_share),
        ] {
            close(u, v, 1e-9, what)?;
        }
    }
    Ok(())
}

/// Share closure, invariance under rescaled capitalisations and
/// equivariance under a permutation of the institutions, on a price panel
/// built from the losses `x`.
pub fn report_invariants(x: &DataMatrix, k: usize, tau: f64, caps: &[f64], c: f64, perm: &[usize]) -> Check {
    let d = x.d();
    let names: Vec<String> = (0..d).map(|j| format!("b{j}")).collect();
    let start = chrono::NaiveDate::from_ymd_opt(2000, 1, 7).unwrap();
    let panel = synthetic_panel(x, names, caps.to_vec(), 0.01, start).map_err(|e| e.to_string())?;
    let opts = ReportOptions::default();
    let report = |p: &PricePanel| analyze_panel(p, ReturnKind::IntraWeek, k, tau, &opts).map_err(|e| e.to_string());
    let rep = report(&panel)?;
    close(rep.rows.iter().map(|r| r.mes_share).sum(), 1.0, 1e-9, "MES shares")?;
    close(rep.rows.iter().map(|r| r.size_share).sum(), 1.0, 1e-9, "size shares")?;
    for ranks in [
        rep.rows.iter().map(|r| r.rank_mes).collect::<Vec<_>>(),
        rep.rows.iter().map(|r| r.rank_size).collect(),
        rep.rows.iter().map(|r| r.rank_capital_loss).collect(),
    ] {
        let mut sorted = ranks.clone();
        sorted.sort_unstable();
        if sorted != (1..=d).collect::<Vec<_>>() {
            return Err(format!("ranks {ranks:?} are not a permutation"));
        }
    }

    let rep_c = report(&panel.with_scaled_caps(c).map_err(|e| e.to_string())?)?;
    same_rows(&rep, &rep_c, "rescaled capitalisations")?;

    let rep_p = report(&panel.permuted(perm).map_err(|e| e.to_string())?)?;
    let reordered = RiskReport { rows: perm.iter().map(|&j| rep.rows[j].clone()).collect(), ..rep.clone() };
    same_rows(&reordered, &rep_p, "permuted institutions")
}
