//! Draws from each copula family and compares the sample Kendall's tau with
//! the closed form.

use radial_mes::models::copula::Copula;
use radial_mes::models::diagnostics::{kendall_tau, ks_uniform, upper_tail_dependence};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> radial_mes::error::Result<()> {
    let n = 20_000;
    for spec in ["clayton:3", "gumbel:1.25", "joe:2", "t:4,0.5"] {
        let copula = Copula::parse(spec, 2)?;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (mut a, mut b) = (Vec::with_capacity(n), Vec::with_capacity(n));
        let mut u = [0.0; 2];
        for _ in 0..n {
            copula.sample_into(&mut rng, &mut u);
            a.push(u[0]);
            b.push(u[1]);
        }
        println!(
            "{copula}: tau {:.4} (theory {:.4}), KS {:.4}, upper tail dependence at 0.99 {:.3}",
            kendall_tau(&a, &b),
            copula.kendall_tau(0, 1),
            ks_uniform(&a),
            upper_tail_dependence(&a, &b, 0.99)
        );
    }
    Ok(())
}
