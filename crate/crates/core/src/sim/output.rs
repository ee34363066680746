//! CSV and SVG output of experiment curves.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{CurveResult, EstimatorCurve};
use crate::error::{MesError, Result};
use crate::evt::{CiKind, Variant};
use crate::svg::{render, Panel, Series};

/// One line of the long-format curve file. The component is part of the
/// label: `plain:x1`, `ci_refined_adjusted:x2`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurveRow {
    pub model: String,
    pub estimator_or_ci: String,
    pub k: usize,
    pub k_over_n: f64,
    pub metric: String,
    pub value: f64,
    pub failures: usize,
}

impl PartialEq for CurveRow {
    // NaN metrics (no successful replicate) compare equal to each other
    fn eq(&self, other: &Self) -> bool {
        self.model == other.model
            && self.estimator_or_ci == other.estimator_or_ci
            && self.k == other.k
            && self.k_over_n.to_bits() == other.k_over_n.to_bits()
            && self.metric == other.metric
            && (self.value.to_bits() == other.value.to_bits() || (self.value.is_nan() && other.value.is_nan()))
            && self.failures == other.failures
    }
}

impl CurveResult {
    pub fn rows(&self) -> Vec<CurveRow> {
        let n = self.n as f64;
        let mut rows = Vec::new();
        for c in &self.estimators {
            let label = format!("{}:x{}", c.estimator, c.component + 1);
            for p in &c.points {
                for (metric, value) in
                    [("mean", p.mean), ("squared_bias", p.squared_bias), ("variance", p.variance), ("mse", p.mse)]
                {
                    rows.push(CurveRow {
                        model: self.model.clone(),
                        estimator_or_ci: label.clone(),
                        k: p.k,
                        k_over_n: p.k as f64 / n,
                        metric: metric.into(),
                        value,
                        failures: p.failures,
                    });
                }
            }
        }
        for c in &self.coverage {
            let label = format!("ci_{}:x{}", c.interval, c.component + 1);
            for p in &c.points {
                rows.push(CurveRow {
                    model: self.model.clone(),
                    estimator_or_ci: label.clone(),
                    k: p.k,
                    k_over_n: p.k as f64 / n,
                    metric: "non_coverage".into(),
                    value: p.non_coverage,
                    failures: p.failures,
                });
            }
        }
        rows
    }

    /// Long-format CSV text. Floats use the shortest representation that
    /// parses back to the same value.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["model", "estimator_or_ci", "k", "k_over_n", "metric", "value", "failures"])?;
        for r in self.rows() {
            w.serialize((&r.model, &r.estimator_or_ci, r.k, r.k_over_n, &r.metric, r.value, r.failures))?;
        }
        let bytes = w.into_inner().map_err(|e| MesError::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

pub fn read_curve_csv(path: &Path) -> Result<Vec<CurveRow>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| row.map_err(MesError::from)).collect()
}

/// Pointwise maximum and mean MSE across per-component curves.
#[derive(Debug, Clone, PartialEq)]
pub struct MseEnvelope {
    pub k: Vec<usize>,
    pub max: Vec<f64>,
    pub avg: Vec<f64>,
}

pub fn max_avg_mse(curves: &[&EstimatorCurve]) -> Result<MseEnvelope> {
    let first = curves.first().ok_or(MesError::GridMismatch)?;
    let k: Vec<usize> = first.points.iter().map(|p| p.k).collect();
    for c in curves {
        if c.points.len() != k.len() || c.points.iter().zip(&k).any(|(p, &kk)| p.k != kk) {
            return Err(MesError::GridMismatch);
        }
    }
    let m = curves.len() as f64;
    let max = (0..k.len()).map(|g| curves.iter().map(|c| c.points[g].mse).fold(f64::NEG_INFINITY, f64::max)).collect();
    let avg = (0..k.len()).map(|g| curves.iter().map(|c| c.points[g].mse).sum::<f64>() / m).collect();
    Ok(MseEnvelope { k, max, avg })
}

fn estimator_style(v: Variant) -> (usize, bool) {
    match v {
        Variant::Plain => (0, false),
        Variant::Adjusted => (0, true),
        Variant::Emp => (1, false),
        Variant::Cai => (2, false),
    }
}

/// Writes `curves.csv`, one four-panel `figure_x<j>.svg` per component with
/// curves, and `envelope.csv` / `envelope.svg` with the max and mean MSE when
/// several components were estimated. Returns the written paths.
pub fn emit_outputs(result: &CurveResult, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let csv_path = dir.join("curves.csv");
    fs::write(&csv_path, result.to_csv()?)?;
    written.push(csv_path);

    let n = result.n as f64;
    let mut components: Vec<usize> = result
        .estimators
        .iter()
        .map(|c| c.component)
        .chain(result.coverage.iter().map(|c| c.component))
        .collect();
    components.sort_unstable();
    components.dedup();
    for &j in &components {
        let metric_panel = |title: &str, f: fn(&super::CurvePoint) -> f64| Panel {
            title: title.into(),
            x_label: "k/n".into(),
            series: result
                .estimators
                .iter()
                .filter(|c| c.component == j)
                .map(|c| {
                    let (color, dashed) = estimator_style(c.estimator);
                    Series {
                        label: c.estimator.to_string(),
                        x: c.points.iter().map(|p| p.k as f64 / n).collect(),
                        y: c.points.iter().map(f).collect(),
                        dashed,
                        color: Some(color),
                    }
                })
                .collect(),
            hline: None,
        };
        let coverage = Panel {
            title: "Non-coverage".into(),
            x_label: "k/n".into(),
            series: result
                .coverage
                .iter()
                .filter(|c| c.component == j)
                .map(|c| Series {
                    label: c.interval.to_string(),
                    x: c.points.iter().map(|p| p.k as f64 / n).collect(),
                    y: c.points.iter().map(|p| p.non_coverage).collect(),
                    dashed: c.interval.kind == CiKind::Basic,
                    color: Some(if c.interval.variant == Variant::Plain { 1 } else { 0 }),
                })
                .collect(),
            hline: Some(result.alpha),
        };
        let panels = [
            metric_panel("Squared bias", |p| p.squared_bias),
            metric_panel("Variance", |p| p.variance),
            metric_panel("MSE", |p| p.mse),
            coverage,
        ];
        let path = dir.join(format!("figure_x{}.svg", j + 1));
        fs::write(&path, render(&panels, 4))?;
        written.push(path);
    }

    let mut variants: Vec<Variant> = result.estimators.iter().map(|c| c.estimator).collect();
    variants.dedup();
    let multi = variants
        .iter()
        .any(|&v| result.estimators.iter().filter(|c| c.estimator == v).count() > 1);
    if multi {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["model", "estimator", "k", "k_over_n", "max_mse", "avg_mse"])?;
        let mut max_series = Vec::new();
        let mut avg_series = Vec::new();
        for &v in &variants {
            let curves: Vec<&EstimatorCurve> = result.estimators.iter().filter(|c| c.estimator == v).collect();
            let env = max_avg_mse(&curves)?;
            for ((k, mx), av) in env.k.iter().zip(&env.max).zip(&env.avg) {
                w.serialize((&result.model, v.as_str(), k, *k as f64 / n, mx, av))?;
            }
            let (color, dashed) = estimator_style(v);
            let x: Vec<f64> = env.k.iter().map(|&k| k as f64 / n).collect();
            max_series.push(Series { label: v.to_string(), x: x.clone(), y: env.max, dashed, color: Some(color) });
            avg_series.push(Series { label: v.to_string(), x, y: env.avg, dashed, color: Some(color) });
        }
        let bytes = w.into_inner().map_err(|e| MesError::Io(e.into_error()))?;
        let path = dir.join("envelope.csv");
        fs::write(&path, bytes)?;
        written.push(path);
        let panels = [
            Panel { title: "Maximum MSE".into(), x_label: "k/n".into(), series: max_series, hline: None },
            Panel { title: "Average MSE".into(), x_label: "k/n".into(), series: avg_series, hline: None },
        ];
        let path = dir.join("envelope.svg");
        fs::write(&path, render(&panels, 2))?;
        written.push(path);
    }
    Ok(written)
}
