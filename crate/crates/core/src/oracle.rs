//! Brute-force Monte Carlo values of `theta_j(tau) = E(X_j | R > Q_R(tau))`.
//!
//! Draws are streamed in batches, each with its own generator stream, and
//! only the rows with the largest radii are retained: the top
//! `N - ceil(tau N) + 1` rows determine both the empirical quantile (the order
//! statistic at `ceil(tau N)`) and the exceedance means. Each batch keeps
//! a buffer of at most twice that many rows and discards draws that cannot
//! enter it; a cheap monotone upper bound on the radius, from tabulated
//! marginal quantiles, avoids evaluating exact quantiles for most draws.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{MesError, Result};
use crate::models::{stream_rng, Marginal, ModelSpec};

/// Minimum number of exceedances for a usable result.
pub const MIN_EXCEEDANCES: usize = 100;
pub const DEFAULT_BATCH: usize = 1 << 16;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleResult {
    pub model: String,
    pub theta: Vec<f64>,
    pub standard_error: Vec<f64>,
    pub tau: f64,
    pub total_draws: u64,
    pub exceedance_count: usize,
    /// Empirical `Q_R(tau)`.
    pub quantile: f64,
    /// `E(R | R > Q_R(tau))`, the sum of the `theta_j`.
    pub system_es: f64,
    pub system_se: f64,
}

impl OracleResult {
    /// CSV with columns `component,theta,se,tau,draws`, components from 1.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["component", "theta", "se", "tau", "draws"])?;
        for (j, (t, s)) in self.theta.iter().zip(&self.standard_error).enumerate() {
            w.write_record([
                (j + 1).to_string(),
                t.to_string(),
                s.to_string(),
                self.tau.to_string(),
                self.total_draws.to_string(),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| MesError::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(self.to_csv()?.as_bytes())?;
        Ok(())
    }
}

/// Number of top rows needed: positions `ceil(tau N) ..= N` of the ascending sample.
fn top_count(tau: f64, n: u64) -> u64 {
    // guard against tau * n landing one ulp above an integer
    let idx = (tau * n as f64 * (1.0 - 1e-15)).ceil().max(1.0) as u64;
    n - idx.min(n) + 1
}

/// Upper bounds on marginal quantiles from a table over `xi = -ln(1 - u)`.
struct QuantileBound {
    step: f64,
    table: Vec<f64>,
    cap: Marginal,
}

impl QuantileBound {
    const STEP: f64 = 1.0 / 32.0;
    const XI_MAX: f64 = 40.0;

    fn new(m: Marginal) -> Self {
        let len = (Self::XI_MAX / Self::STEP) as usize + 1;
        let table = (0..len)
            .map(|i| m.upper_quantile((-(i as f64) * Self::STEP).exp()) * (1.0 + 1e-9))
            .collect();
        Self { step: Self::STEP, table, cap: m }
    }

    #[inline]
    fn bound(&self, u: f64) -> f64 {
        let xi = -(-u).ln_1p();
        let idx = ((xi / self.step).ceil() as usize).saturating_add(1);
        match self.table.get(idx) {
            Some(&v) => v,
            None => self.cap.quantile_unchecked(u),
        }
    }
}

/// The retained rows, stored flat as `[radius, x_1, .., x_d]`.
struct TopRows {
    d: usize,
    keep: usize,
    rows: Vec<f64>,
    floor: f64,
}

impl TopRows {
    fn new(d: usize, keep: usize) -> Self {
        Self { d, keep, rows: Vec::new(), floor: f64::NEG_INFINITY }
    }

    fn len(&self) -> usize {
        self.rows.len() / (self.d + 1)
    }

    fn push(&mut self, r: f64, x: &[f64]) {
        if r <= self.floor {
            return;
        }
        self.rows.push(r);
        self.rows.extend_from_slice(x);
        if self.len() >= 2 * self.keep.max(16) {
            self.trim();
        }
    }

    fn trim(&mut self) {
        let stride = self.d + 1;
        let count = self.len();
        if count <= self.keep {
            return;
        }
        let mut radii: Vec<f64> = self.rows.iter().step_by(stride).copied().collect();
        let (_, kth, _) = radii.select_nth_unstable_by(count - self.keep, f64::total_cmp);
        let kth = *kth;
        let mut out = Vec::with_capacity((self.keep + 1) * stride);
        for row in self.rows.chunks_exact(stride) {
            if row[0] >= kth {
                out.extend_from_slice(row);
            }
        }
        self.rows = out;
        // anything at or below the kth largest radius can no longer be needed
        // once `keep` rows above it are held, up to ties
        self.floor = self.floor.max(kth.next_down());
    }

    fn merge(mut self, other: TopRows) -> TopRows {
        self.rows.extend_from_slice(&other.rows);
        self.floor = self.floor.max(other.floor);
        self.trim();
        self
    }
}

/// [`true_mes_batched`] with the default batch size.
pub fn true_mes(spec: &ModelSpec, tau: f64, total_draws: u64, seed: u64) -> Result<OracleResult> {
    true_mes_batched(spec, tau, total_draws, seed, DEFAULT_BATCH)
}

/// Monte Carlo `theta_j(tau)` from `total_draws` draws of `spec`. Batch `b`
/// uses generator stream `b` of `seed`; the result does not depend on the
/// number of worker threads.
pub fn true_mes_batched(
    spec: &ModelSpec,
    tau: f64,
    total_draws: u64,
    seed: u64,
    batch_size: usize,
) -> Result<OracleResult> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(MesError::InvalidTau(tau));
    }
    if batch_size == 0 {
        return Err(MesError::InvalidInput("batch size must be positive".into()));
    }
    let keep = top_count(tau, total_draws) as usize;
    let exceed = keep.saturating_sub(1);
    if exceed < MIN_EXCEEDANCES {
        return Err(MesError::InsufficientExceedances { count: exceed, required: MIN_EXCEEDANCES });
    }
    let d = spec.d();
    let bounds: Vec<QuantileBound> = spec.marginals().iter().map(|&m| QuantileBound::new(m)).collect();
    let batches = total_draws.div_ceil(batch_size as u64);

    let top = (0..batches)
        .into_par_iter()
        .fold(
            || TopRows::new(d, keep),
            |mut top, b| {
                let start = b * batch_size as u64;
                let count = (total_draws - start).min(batch_size as u64);
                let mut rng = stream_rng(seed, b);
                let (mut u, mut x) = (vec![0.0; d], vec![0.0; d]);
                for _ in 0..count {
                    spec.copula().sample_into(&mut rng, &mut u);
                    if top.floor > f64::NEG_INFINITY {
                        let ub: f64 = bounds.iter().zip(&u).map(|(q, &uj)| q.bound(uj)).sum();
                        if ub <= top.floor {
                            continue;
                        }
                    }
                    let mut r = 0.0;
                    for ((xj, &uj), m) in x.iter_mut().zip(&u).zip(spec.marginals()) {
                        *xj = m.quantile_unchecked(uj);
                        r += *xj;
                    }
                    top.push(r, &x);
                }
                top
            },
        )
        .reduce(|| TopRows::new(d, keep), TopRows::merge);

    let stride = d + 1;
    let mut rows: Vec<&[f64]> = top.rows.chunks_exact(stride).collect();
    if rows.len() < keep {
        return Err(MesError::InsufficientExceedances { count: rows.len(), required: keep });
    }
    rows.sort_by(|a, b| b[0].total_cmp(&a[0]).then_with(|| b[1..].partial_cmp(&a[1..]).unwrap_or(std::cmp::Ordering::Equal)));
    let quantile = rows[keep - 1][0];
    let exceedances: Vec<&[f64]> = rows[..keep].iter().copied().filter(|r| r[0] > quantile).collect();
    let m = exceedances.len();
    if m < MIN_EXCEEDANCES {
        return Err(MesError::InsufficientExceedances { count: m, required: MIN_EXCEEDANCES });
    }
    let mf = m as f64;
    let mut mean = vec![0.0; stride];
    for row in &exceedances {
        for (acc, v) in mean.iter_mut().zip(row.iter()) {
            *acc += v;
        }
    }
    mean.iter_mut().for_each(|v| *v /= mf);
    let mut ss = vec![0.0; stride];
    for row in &exceedances {
        for ((acc, v), mu) in ss.iter_mut().zip(row.iter()).zip(&mean) {
            *acc += (v - mu) * (v - mu);
        }
    }
    let se: Vec<f64> = ss.iter().map(|s| (s / (mf - 1.0) / mf).sqrt()).collect();
    Ok(OracleResult {
        model: spec.name().to_string(),
        theta: mean[1..].to_vec(),
        standard_error: se[1..].to_vec(),
        tau,
        total_draws,
        exceedance_count: m,
        quantile,
        system_es: mean[0],
        system_se: se[0],
    })
}
