//! Brute-force ground truth for every preset at a modest number of draws.

use radial_mes::models::{preset, reference_mes, PRESET_NAMES};
use radial_mes::oracle::true_mes;

fn main() -> radial_mes::error::Result<()> {
    let draws = 2_000_000;
    for name in PRESET_NAMES {
        let res = true_mes(&preset(name)?, 0.998, draws, 1)?;
        let reference = reference_mes(name).unwrap();
        for (j, (t, se)) in res.theta.iter().zip(&res.standard_error).enumerate() {
            let published = reference.get(j).copied().unwrap_or(reference[0]);
            println!("{name} x{}: {t:.4} +- {se:.4}  (reference {published})", j + 1);
        }
    }
    Ok(())
}
