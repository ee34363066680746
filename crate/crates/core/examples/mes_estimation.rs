//! Plain and bias-corrected MES estimates with confidence intervals, next to
//! the two competitors, on one sample of a preset model.

use radial_mes::data::radial_decompose;
use radial_mes::evt::{
    adjusted_mes, auto_s, competitor_cai, competitor_emp, confidence_interval, fit_tail, plain_mes, CiKind,
};
use radial_mes::models::{preset, reference_mes, sample_model};

fn main() -> radial_mes::error::Result<()> {
    let model = preset("model_ii")?;
    let x = sample_model(&model, 500, 2024)?.data;
    let (k, tau) = (100, 0.998);
    let r = radial_decompose(&x);
    let fit = fit_tail(&r, k, Some(auto_s(&r)))?;
    let so = fit.second_order.expect("requested above");
    println!("{model}\ngamma = {:.4}, rho = {:.3}, beta = {:.3}", fit.gamma_hat, so.rho, so.beta);
    println!("reference theta_1 = {}", reference_mes("model_ii").unwrap()[0]);

    for est in [plain_mes(&r, k, tau)?, adjusted_mes(&r, k, tau, &so)?] {
        let ci = confidence_interval(&est, &fit, CiKind::Refined, 0.05)?;
        println!(
            "{:>8}: theta_1 = {:.3}  95% refined [{:.3}, {:.3}]",
            est.variant, est.theta_hat[0], ci[0].lower, ci[0].upper
        );
    }
    println!("     emp: theta_1 = {:.3}", competitor_emp(&x, 0, k, tau)?);
    println!("     cai: theta_1 = {:.3}", competitor_cai(&x, 0, k, tau)?);
    Ok(())
}
