//! Variance inflation of the tail index under serial extremal dependence.

use radial_mes::data::RadialSample;
use radial_mes::evt::{default_lag, variance_inflation};
use radial_mes::models::series::{ar1_pareto, armax_frechet};

fn main() -> radial_mes::error::Result<()> {
    let n = 20_000;
    let (k, lag) = (1000, default_lag(n));
    for (label, series) in [
        ("armax phi = 0", armax_frechet(n, 2.0, 0.0, 1)?),
        ("armax phi = 0.5", armax_frechet(n, 2.0, 0.5, 1)?),
        ("armax phi = 0.8", armax_frechet(n, 2.0, 0.8, 1)?),
        ("ar1 phi = 0.5", ar1_pareto(n, 0.5, 0.5, 1)?),
    ] {
        let adj = variance_inflation(&RadialSample::from_radii(series)?, k, lag)?;
        let head: Vec<String> = adj.r_hat.iter().take(3).map(|r| format!("{r:.3}")).collect();
        println!("{label:>16}: inflation {:.3}, r_1..r_3 = {}", adj.inflation, head.join(" "));
    }
    Ok(())
}
