//! Institution-level analysis of weekly stock returns.
//!
//! Prices are turned into capitalisation-weighted losses
//! `X_j = phi_j (1 - P_close / P_ref)`, whose sum is the loss of the market
//! portfolio. The MES of every institution is then estimated on the radial
//! tail, and institutions are ranked by size, by MES and by the expected
//! loss relative to their own capitalisation.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use chrono::{Duration, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::data::{radial_decompose, DataMatrix};
use crate::error::{MesError, Result};
use crate::evt::{
    adjusted_mes, auto_s, confidence_interval_serial, fit_tail, hill_estimate, plain_mes,
    second_order_params, variance_inflation, CiKind, SerialAdjustment, Variant,
};
use crate::svg::{render, Panel, Series};

const DATE_FORMAT: &str = "%Y-%m-%d";

/// Weekly open and close prices of `d` institutions with their market
/// capitalisations.
#[derive(Debug, Clone, PartialEq)]
pub struct PricePanel {
    dates: Vec<NaiveDate>,
    names: Vec<String>,
    open: Vec<f64>,
    close: Vec<f64>,
    capitalizations: Vec<f64>,
}

impl PricePanel {
    /// Validates and builds a panel. Prices are row-major, one row per date.
    pub fn new(
        dates: Vec<NaiveDate>,
        names: Vec<String>,
        open: Vec<f64>,
        close: Vec<f64>,
        capitalizations: Vec<f64>,
    ) -> Result<Self> {
        let (n, d) = (dates.len(), names.len());
        if n == 0 || d == 0 {
            return Err(MesError::InvalidPrices("panel is empty".into()));
        }
        if open.len() != n * d || close.len() != n * d {
            return Err(MesError::InvalidPrices(format!(
                "expected {} prices per side for {n} dates and {d} institutions",
                n * d
            )));
        }
        if capitalizations.len() != d {
            return Err(MesError::InvalidPrices(format!(
                "{} capitalizations for {d} institutions",
                capitalizations.len()
            )));
        }
        if let Some(w) = dates.windows(2).find(|w| w[0] >= w[1]) {
            return Err(MesError::InvalidPrices(format!("dates not strictly increasing at {}", w[1])));
        }
        let mut seen = std::collections::HashSet::new();
        if let Some(dup) = names.iter().find(|name| !seen.insert(name.as_str())) {
            return Err(MesError::InvalidPrices(format!("duplicate institution '{dup}'")));
        }
        for (side, prices) in [("open", &open), ("close", &close)] {
            if let Some(pos) = prices.iter().position(|p| !(p.is_finite() && *p > 0.0)) {
                return Err(MesError::InvalidPrices(format!(
                    "nonpositive {side} price {} for {} on {}",
                    prices[pos],
                    names[pos % d],
                    dates[pos / d]
                )));
            }
        }
        if let Some(pos) = capitalizations.iter().position(|c| !(c.is_finite() && *c > 0.0)) {
            return Err(MesError::InvalidPrices(format!(
                "nonpositive capitalization for {}",
                names[pos]
            )));
        }
        Ok(Self { dates, names, open, close, capitalizations })
    }

    /// Reads `date,<name>_open,<name>_close,...` and a `name,capitalization`
    /// sidecar file.
    pub fn from_csv(prices: &Path, caps: &Path) -> Result<Self> {
        let caps = read_capitalizations(caps)?;
        let mut reader = csv::Reader::from_path(prices)?;
        let headers = reader.headers()?.clone();
        if headers.get(0) != Some("date") {
            return Err(MesError::Parse("price file must start with a 'date' column".into()));
        }
        let mut names: Vec<String> = Vec::new();
        let mut open_col = HashMap::new();
        let mut close_col = HashMap::new();
        for (c, h) in headers.iter().enumerate().skip(1) {
            let (name, side) = h
                .rsplit_once('_')
                .ok_or_else(|| MesError::Parse(format!("column '{h}' should read <name>_open or <name>_close")))?;
            let target = match side {
                "open" => &mut open_col,
                "close" => &mut close_col,
                _ => return Err(MesError::Parse(format!("column '{h}' should read <name>_open or <name>_close"))),
            };
            if target.insert(name.to_string(), c).is_some() {
                return Err(MesError::Parse(format!("duplicate column '{h}'")));
            }
            if !names.iter().any(|n| n == name) {
                names.push(name.to_string());
            }
        }
        let mut columns = Vec::with_capacity(names.len());
        for name in &names {
            match (open_col.get(name), close_col.get(name)) {
                (Some(&o), Some(&c)) => columns.push((o, c)),
                _ => return Err(MesError::Parse(format!("institution '{name}' needs both open and close columns"))),
            }
        }
        let capitalizations = names
            .iter()
            .map(|name| {
                caps.get(name)
                    .copied()
                    .ok_or_else(|| MesError::Parse(format!("no capitalization for '{name}'")))
            })
            .collect::<Result<Vec<f64>>>()?;

        let (mut dates, mut open, mut close) = (Vec::new(), Vec::new(), Vec::new());
        for (line, record) in reader.records().enumerate() {
            let record = record?;
            let field = |c: usize| -> Result<f64> {
                let raw = record.get(c).unwrap_or("");
                raw.trim()
                    .parse()
                    .map_err(|_| MesError::Parse(format!("row {}: '{raw}' is not a number", line + 2)))
            };
            let raw_date = record.get(0).unwrap_or("");
            dates.push(
                NaiveDate::parse_from_str(raw_date.trim(), DATE_FORMAT)
                    .map_err(|e| MesError::Parse(format!("row {}: date '{raw_date}': {e}", line + 2)))?,
            );
            for &(o, c) in &columns {
                open.push(field(o)?);
                close.push(field(c)?);
            }
        }
        Self::new(dates, names, open, close, capitalizations)
    }

    /// Writes the price file and the capitalization sidecar.
    pub fn write_csv(&self, prices: &Path, caps: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(prices)?;
        let mut header = vec!["date".to_string()];
        for name in &self.names {
            header.push(format!("{name}_open"));
            header.push(format!("{name}_close"));
        }
        w.write_record(&header)?;
        let d = self.d();
        for (i, date) in self.dates.iter().enumerate() {
            let mut rec = vec![date.format(DATE_FORMAT).to_string()];
            for j in 0..d {
                rec.push(self.open[i * d + j].to_string());
                rec.push(self.close[i * d + j].to_string());
            }
            w.write_record(&rec)?;
        }
        w.flush()?;
        let mut w = csv::Writer::from_path(caps)?;
        w.write_record(["name", "capitalization"])?;
        for (name, cap) in self.names.iter().zip(&self.capitalizations) {
            w.write_record([name.clone(), cap.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.dates.len()
    }

    pub fn d(&self) -> usize {
        self.names.len()
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn capitalizations(&self) -> &[f64] {
        &self.capitalizations
    }

    pub fn open(&self, i: usize, j: usize) -> f64 {
        self.open[i * self.d() + j]
    }

    pub fn close(&self, i: usize, j: usize) -> f64 {
        self.close[i * self.d() + j]
    }

    /// Size shares `phi_j = c_j / sum c`.
    pub fn weights(&self) -> Vec<f64> {
        let total: f64 = self.capitalizations.iter().sum();
        self.capitalizations.iter().map(|c| c / total).collect()
    }

    /// Rescales every capitalization by `c`.
    pub fn with_scaled_caps(&self, c: f64) -> Result<Self> {
        let caps = self.capitalizations.iter().map(|v| v * c).collect();
        Self::new(self.dates.clone(), self.names.clone(), self.open.clone(), self.close.clone(), caps)
    }

    /// Reorders institutions: column `j` of the result is column `perm[j]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let d = self.d();
        let mut check = perm.to_vec();
        check.sort_unstable();
        if check != (0..d).collect::<Vec<_>>() {
            return Err(MesError::InvalidInput("not a permutation of the institutions".into()));
        }
        let pick = |v: &[f64]| -> Vec<f64> { v.chunks_exact(d).flat_map(|row| perm.iter().map(|&j| row[j])).collect() };
        Self::new(
            self.dates.clone(),
            perm.iter().map(|&j| self.names[j].clone()).collect(),
            pick(&self.open),
            pick(&self.close),
            perm.iter().map(|&j| self.capitalizations[j]).collect(),
        )
    }
}

fn read_capitalizations(path: &Path) -> Result<HashMap<String, f64>> {
    #[derive(Deserialize)]
    struct Row {
        name: String,
        capitalization: f64,
    }
    let mut out = HashMap::new();
    for row in csv::Reader::from_path(path)?.deserialize() {
        let row: Row = row?;
        if out.insert(row.name.clone(), row.capitalization).is_some() {
            return Err(MesError::Parse(format!("duplicate capitalization for '{}'", row.name)));
        }
    }
    Ok(out)
}

/// How the weekly loss of a stock is measured.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReturnKind {
    /// `1 - close_t / open_t` within each week.
    #[default]
    IntraWeek,
    /// `1 - close_t / close_(t-1)`; the first week is dropped.
    CloseToClose,
}

impl std::str::FromStr for ReturnKind {
    type Err = MesError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "intra-week" | "intraweek" | "open-close" => Ok(ReturnKind::IntraWeek),
            "close-to-close" | "close-close" => Ok(ReturnKind::CloseToClose),
            other => Err(MesError::Parse(format!("unknown return definition '{other}'"))),
        }
    }
}

/// Capitalisation-weighted losses, one column per institution.
pub fn compute_returns(panel: &PricePanel, kind: ReturnKind) -> Result<DataMatrix> {
    let (n, d) = (panel.n(), panel.d());
    let phi = panel.weights();
    let mut values = Vec::with_capacity(n * d);
    let first = match kind {
        ReturnKind::IntraWeek => 0,
        ReturnKind::CloseToClose => 1,
    };
    if first >= n {
        return Err(MesError::InvalidPrices("close-to-close returns need at least two weeks".into()));
    }
    for i in first..n {
        for j in 0..d {
            let reference = match kind {
                ReturnKind::IntraWeek => panel.open(i, j),
                ReturnKind::CloseToClose => panel.close(i - 1, j),
            };
            values.push(phi[j] * (1.0 - panel.close(i, j) / reference));
        }
    }
    DataMatrix::new(n - first, d, values)
}

/// `tau = 1 - 1/(frequency * years)`: the level exceeded on average once per
/// horizon.
pub fn return_period_tau(frequency_per_year: f64, years: f64) -> Result<f64> {
    let periods = frequency_per_year * years;
    if !(frequency_per_year > 0.0 && years > 0.0 && periods > 1.0 && periods.is_finite()) {
        return Err(MesError::InvalidHorizon { frequency: frequency_per_year, years });
    }
    Ok(1.0 - 1.0 / periods)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportOptions {
    /// `Adjusted` (default) or `Plain`.
    pub variant: Variant,
    pub ci_kind: CiKind,
    pub alpha: f64,
    /// Serial truncation lag; 0 treats the weeks as independent.
    pub serial_lag: usize,
    /// Second-order level; automatic when `None`.
    pub second_order_s: Option<usize>,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self { variant: Variant::Adjusted, ci_kind: CiKind::Refined, alpha: 0.05, serial_lag: 0, second_order_s: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstitutionRow {
    pub name: String,
    /// `phi_j`
    pub size_share: f64,
    /// `theta_j`, the expected weighted loss of the institution in a market
    /// crisis, in units of the market capitalisation.
    pub mes: f64,
    pub mes_share: f64,
    /// `theta_j / phi_j`: expected fraction of the institution's own value lost.
    pub capital_loss: f64,
    pub lower: f64,
    pub upper: f64,
    pub rank_size: usize,
    pub rank_mes: usize,
    pub rank_capital_loss: usize,
    /// Share of the system ES held by this institution and every institution
    /// ranked above it by MES.
    pub cumulative_mes_share: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskReport {
    pub n: usize,
    pub k: usize,
    pub tau: f64,
    pub variant: Variant,
    pub gamma: f64,
    pub quantile: f64,
    /// Sum of the MES values: the expected loss of the market portfolio.
    pub system_es: f64,
    pub inflation: f64,
    pub rows: Vec<InstitutionRow>,
}

/// Rank 1 for the largest value; ties keep column order.
fn ranks(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    let mut ranks = vec![0; values.len()];
    for (r, &j) in order.iter().enumerate() {
        ranks[j] = r + 1;
    }
    ranks
}

/// Estimates the MES of every institution and ranks them.
pub fn build_report(
    x: &DataMatrix,
    names: &[String],
    weights: &[f64],
    k: usize,
    tau: f64,
    options: &ReportOptions,
) -> Result<RiskReport> {
    let d = x.d();
    if names.len() != d || weights.len() != d {
        return Err(MesError::InvalidInput(format!(
            "{} names and {} weights for {d} institutions",
            names.len(),
            weights.len()
        )));
    }
    let r = radial_decompose(x);
    if !matches!(options.variant, Variant::Plain | Variant::Adjusted) {
        return Err(MesError::InvalidInput(format!("reports use plain or adjusted estimates, not {}", options.variant)));
    }
    let so = second_order_params(&r, options.second_order_s.unwrap_or_else(|| auto_s(&r)))?;
    let est = match options.variant {
        Variant::Adjusted => adjusted_mes(&r, k, tau, &so)?,
        _ => plain_mes(&r, k, tau)?,
    };
    let mut fit = fit_tail(&r, k, None)?;
    fit.second_order = Some(so);
    let serial = if options.serial_lag > 0 {
        variance_inflation(&r, k, options.serial_lag)?
    } else {
        SerialAdjustment::independent()
    };
    let ci = confidence_interval_serial(&est, &fit, options.ci_kind, options.alpha, &serial)?;

    let theta = &est.theta_hat;
    let system_es: f64 = theta.iter().sum();
    let capital: Vec<f64> = theta.iter().zip(weights).map(|(t, w)| t / w).collect();
    let (rank_size, rank_mes, rank_capital) = (ranks(weights), ranks(theta), ranks(&capital));
    let mut by_mes: Vec<usize> = (0..d).collect();
    by_mes.sort_by_key(|&j| rank_mes[j]);
    let mut cumulative = vec![0.0; d];
    let mut acc = 0.0;
    for &j in &by_mes {
        acc += theta[j] / system_es;
        cumulative[j] = acc;
    }
    let rows = (0..d)
        .map(|j| InstitutionRow {
            name: names[j].clone(),
            size_share: weights[j],
            mes: theta[j],
            mes_share: theta[j] / system_es,
            capital_loss: capital[j],
            lower: ci[j].lower,
            upper: ci[j].upper,
            rank_size: rank_size[j],
            rank_mes: rank_mes[j],
            rank_capital_loss: rank_capital[j],
            cumulative_mes_share: cumulative[j],
        })
        .collect();
    Ok(RiskReport {
        n: x.n(),
        k,
        tau,
        variant: est.variant,
        gamma: est.gamma,
        quantile: est.quantile,
        system_es,
        inflation: serial.inflation,
        rows,
    })
}

/// Returns from the panel and the report on them.
pub fn analyze_panel(
    panel: &PricePanel,
    kind: ReturnKind,
    k: usize,
    tau: f64,
    options: &ReportOptions,
) -> Result<RiskReport> {
    let x = compute_returns(panel, kind)?;
    build_report(&x, panel.names(), &panel.weights(), k, tau, options)
}

impl RiskReport {
    /// One row per institution, in input order.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in &self.rows {
            w.serialize(row)?;
        }
        let bytes = w.into_inner().map_err(|e| MesError::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    /// Number of institutions, largest MES first, needed to exceed `share`
    /// of the system ES.
    pub fn institutions_covering(&self, share: f64) -> usize {
        self.rows.iter().filter(|r| r.cumulative_mes_share - r.mes_share < share).count()
    }

    /// Human-readable table ordered by MES.
    pub fn summary(&self) -> String {
        let mut rows: Vec<&InstitutionRow> = self.rows.iter().collect();
        rows.sort_by_key(|r| r.rank_mes);
        let mut out = format!(
            "n = {}, k = {}, tau = {}, {} estimate, gamma = {:.4}, system ES = {:.6}, inflation = {:.3}\n",
            self.n, self.k, self.tau, self.variant, self.gamma, self.system_es, self.inflation
        );
        let _ = writeln!(
            out,
            "{:<12} {:>8} {:>10} {:>8} {:>10} {:>22} {:>5} {:>5} {:>5}",
            "name", "size%", "MES", "MES%", "cap.loss", "interval", "r.sz", "r.mes", "r.cl"
        );
        for r in rows {
            let _ = writeln!(
                out,
                "{:<12} {:>8.2} {:>10.6} {:>8.2} {:>10.4} [{:>9.6}, {:>9.6}] {:>5} {:>5} {:>5}",
                r.name,
                100.0 * r.size_share,
                r.mes,
                100.0 * r.mes_share,
                r.capital_loss,
                r.lower,
                r.upper,
                r.rank_size,
                r.rank_mes,
                r.rank_capital_loss
            );
        }
        out
    }
}

/// Hill index of the radial tail against `k`, with the bias-corrected index
/// alongside when the second-order fit succeeds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityPoint {
    pub k: usize,
    pub gamma: f64,
    pub gamma_adjusted: f64,
}

pub fn gamma_stability(x: &DataMatrix, ks: &[usize], s: Option<usize>) -> Result<Vec<StabilityPoint>> {
    let r = radial_decompose(x);
    let so = second_order_params(&r, s.unwrap_or_else(|| auto_s(&r))).ok();
    ks.iter()
        .map(|&k| {
            let gamma = hill_estimate(&r, k)?;
            let gamma_adjusted = so
                .and_then(|so| crate::evt::adjusted_gamma(gamma, so.beta, so.rho, r.n(), k).ok())
                .unwrap_or(f64::NAN);
            Ok(StabilityPoint { k, gamma, gamma_adjusted })
        })
        .collect()
}

pub fn stability_csv(points: &[StabilityPoint]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for p in points {
        w.serialize(p)?;
    }
    let bytes = w.into_inner().map_err(|e| MesError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn stability_svg(points: &[StabilityPoint]) -> String {
    let x: Vec<f64> = points.iter().map(|p| p.k as f64).collect();
    let panel = Panel {
        title: "Tail index against k".into(),
        x_label: "k".into(),
        series: vec![
            Series { label: "hill".into(), x: x.clone(), y: points.iter().map(|p| p.gamma).collect(), dashed: false, color: Some(7) },
            Series {
                label: "adjusted".into(),
                x,
                y: points.iter().map(|p| p.gamma_adjusted).collect(),
                dashed: true,
                color: Some(0),
            },
        ],
        hline: None,
    };
    render(&[panel], 1)
}

/// Writes `report.csv`, `gamma_stability.csv` and `gamma_stability.svg`.
pub fn write_outputs(report: &RiskReport, stability: &[StabilityPoint], dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("report.csv"), report.to_csv()?)?;
    fs::write(dir.join("gamma_stability.csv"), stability_csv(stability)?)?;
    fs::write(dir.join("gamma_stability.svg"), stability_svg(stability))?;
    Ok(())
}

/// Weekly price panel whose intra-week losses are `1 - exp(-scale * x)` for
/// the rows of `x`. Each week opens at the previous close, starting from 100
/// on `start`.
pub fn synthetic_panel(
    x: &DataMatrix,
    names: Vec<String>,
    capitalizations: Vec<f64>,
    scale: f64,
    start: NaiveDate,
) -> Result<PricePanel> {
    let (n, d) = (x.n(), x.d());
    let dates = (0..n).map(|i| start + Duration::weeks(i as i64)).collect();
    let mut level = vec![100.0; d];
    let (mut open, mut close) = (Vec::with_capacity(n * d), Vec::with_capacity(n * d));
    for row in x.rows() {
        for (j, v) in row.iter().enumerate() {
            open.push(level[j]);
            level[j] *= (-scale * v).exp();
            close.push(level[j]);
        }
    }
    PricePanel::new(dates, names, open, close, capitalizations)
}
