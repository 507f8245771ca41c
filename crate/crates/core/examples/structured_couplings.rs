//! Crossing regularization for band and ring-chain couplings at high sampling.

use graphreg::gamma::{default_grid, find_gamma_cross, predict_gamma_cross_infinite, ScanContext};
use graphreg::sampling::{empirical_covariance, rescale_trace, sample_gaussian};
use graphreg::spherical::{covariance_from_interaction, generate_band, generate_ring_chain, DEFAULT_MU_TOL};

fn main() -> graphreg::Result<()> {
    let (n, alpha) = (200, 100.0);
    for (name, truth) in [("band w=10", generate_band(n, 10, 0.5, 1)?), ("ring", generate_ring_chain(n, 0.5)?)] {
        let model = covariance_from_interaction(&truth, DEFAULT_MU_TOL)?;
        let samples = sample_gaussian(&model, (alpha * n as f64) as usize, 2)?;
        let c = rescale_trace(&empirical_covariance(&samples), n)?;
        let ctx = ScanContext::new(&c, &model.covariance, alpha)?;
        let cross = find_gamma_cross(&ctx, &default_grid())?;
        println!("{name:<10} cross {cross:?}, prediction {:.4}", predict_gamma_cross_infinite(&truth).value);
    }
    Ok(())
}
