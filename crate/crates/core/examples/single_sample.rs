//! Inference from a single sample: the crossing regularization follows from the overlap
//! `θ` of the sample with the true covariance.

use graphreg::gamma::{find_gamma_cross, log_grid, sample_theta, small_alpha_prediction, Regime, ScanContext};
use graphreg::sampling::sample_gaussian;
use graphreg::spherical::{covariance_from_interaction, generate_goe, DEFAULT_MU_TOL};
use nalgebra::DVector;

fn main() -> graphreg::Result<()> {
    let n = 300;
    let grid = log_grid(1e-4, 1e3, 71)?;
    for (sigma, regime) in [(0.5, Regime::Disordered), (3.0, Regime::Ferro)] {
        let truth = generate_goe(n, sigma, 5)?;
        let model = covariance_from_interaction(&truth, DEFAULT_MU_TOL)?;
        let samples = sample_gaussian(&model, 3, 6)?;
        for k in 0..3 {
            let x = DVector::from_vec(samples.row(k));
            let theta = sample_theta(&x, &model.covariance, true)?;
            let u = &x / x.norm();
            let c = &u * u.transpose() * n as f64;
            let ctx = ScanContext::new(&c, &model.covariance, 1.0 / n as f64)?;
            let cross = find_gamma_cross(&ctx, &grid)?;
            let pred = small_alpha_prediction(theta, n, regime)?;
            println!("sigma {sigma}: theta {theta:.4}  cross {cross:?}  prediction {pred:?}");
        }
    }
    Ok(())
}
