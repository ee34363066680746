//! A reduced Monte Carlo study: MSE of the four estimators and the
//! non-coverage of the refined intervals, written as CSV and SVG.

use radial_mes::evt::Variant;
use radial_mes::sim::{emit_outputs, k_grid_from_fractions, run_experiment, CiSpec, ExperimentConfig};

fn main() -> radial_mes::error::Result<()> {
    let mut cfg = ExperimentConfig::for_preset("model_ii")?;
    cfg.replicates = 200;
    cfg.k_grid = k_grid_from_fractions(cfg.n, &[0.05, 0.1, 0.2, 0.3]);
    let res = run_experiment(&cfg)?;
    for v in Variant::ALL {
        let c = res.estimator_curve(v, 0).unwrap();
        let mse: Vec<String> = c.points.iter().map(|p| format!("{:.3}", p.mse)).collect();
        println!("{v:>8} mse: {}", mse.join(" "));
    }
    for ci in CiSpec::ALL {
        let c = res.coverage_curve(ci, 0).unwrap();
        let nc: Vec<String> = c.points.iter().map(|p| format!("{:.3}", p.non_coverage)).collect();
        println!("{ci:>16}: {}", nc.join(" "));
    }
    let dir = std::env::temp_dir().join("radial-mes-simulation");
    for p in emit_outputs(&res, &dir)? {
        println!("wrote {}", p.display());
    }
    Ok(())
}
