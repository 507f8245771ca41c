//! Metropolis sampling of the posterior over couplings at two temperatures.

use graphreg::posterior::{default_proposal_scale, metropolis_posterior, DEFAULT_SPARSITY};
use graphreg::sampling::{empirical_covariance, rescale_trace, sample_gaussian};
use graphreg::spherical::{covariance_from_interaction, generate_goe, DEFAULT_MU_TOL};

fn main() -> graphreg::Result<()> {
    let (n, alpha, gamma, steps) = (20, 5.0, 5.0, 20_000);
    let truth = generate_goe(n, 0.5, 1)?;
    let model = covariance_from_interaction(&truth, DEFAULT_MU_TOL)?;
    let samples = sample_gaussian(&model, (alpha * n as f64) as usize, 2)?;
    let c = rescale_trace(&empirical_covariance(&samples), n)?;
    for beta_over_n in [100.0, 10_000.0] {
        let beta = beta_over_n * n as f64;
        let t = metropolis_posterior(&c, &model.covariance, alpha, gamma, beta, steps, default_proposal_scale(n), DEFAULT_SPARSITY, 3)?;
        let late = t.window_mean(steps * 3 / 4, steps, |r| r.train_energy).unwrap_or(f64::NAN);
        let last = t.records.last().map(|r| r.acceptance).unwrap_or(0.0);
        println!("beta/n {beta_over_n:>7}: late train energy {late:.5} vs MAP {:.5}; acceptance {last:.2}", t.map_train_energy);
    }
    Ok(())
}
