//! Hill, Weissman and second-order estimates on exact Pareto and Frechet radii.

use radial_mes::data::RadialSample;
use radial_mes::evt::{adjusted_gamma, hill_estimate, second_order_params, weissman_quantile, default_s};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> radial_mes::error::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let n = 20_000;
    let gamma = 0.4;
    let pareto: Vec<f64> = (0..n).map(|_| (1.0 - rng.random::<f64>()).powf(-gamma)).collect();
    let frechet: Vec<f64> = (0..n).map(|_| (-rng.random::<f64>().ln()).powf(-gamma)).collect();
    let tau = 0.9995;

    for (label, radii, truth) in [
        ("pareto", pareto, (1.0f64 - tau).powf(-gamma)),
        ("frechet", frechet, (-tau.ln()).powf(-gamma)),
    ] {
        let r = RadialSample::from_radii(radii)?;
        let so = second_order_params(&r, default_s(n))?;
        println!("{label}: rho = {:.3}, beta = {:.3}", so.rho, so.beta);
        for k in [200, 1000, 4000] {
            let g = hill_estimate(&r, k)?;
            let ga = adjusted_gamma(g, so.beta, so.rho, n, k)?;
            let q = weissman_quantile(&r, k, tau, g)?;
            println!("  k = {k:>4}: gamma {g:.4}, adjusted {ga:.4}, Q({tau}) {q:.3} (true {truth:.3})");
        }
    }
    Ok(())
}
