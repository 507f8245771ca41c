//! Scans the L2 regularization, locates the optimal, crossing and half-gap strengths and
//! compares the crossing with the infinite-sampling prediction `n / Σ J_tr²`.

use graphreg::gamma::{default_grid, predict_gamma_cross_infinite, run_scan, ScanContext};
use graphreg::sampling::{empirical_covariance, rescale_trace, sample_gaussian};
use graphreg::spherical::{covariance_from_interaction, generate_goe, DEFAULT_MU_TOL};

fn main() -> graphreg::Result<()> {
    let n = 100;
    for alpha in [1.0, 10.0, 100.0] {
        let truth = generate_goe(n, 0.5, 3)?;
        let model = covariance_from_interaction(&truth, DEFAULT_MU_TOL)?;
        let samples = sample_gaussian(&model, (alpha * n as f64) as usize, 4)?;
        let c = rescale_trace(&empirical_covariance(&samples), n)?;
        let ctx = ScanContext::new(&c, &model.covariance, alpha)?.with_truth(&truth)?;
        let scan = run_scan(&ctx, &default_grid())?;
        println!(
            "alpha {alpha:>5}: opt {:?}  cross {:?}  half {:?}  prediction {:.3}",
            scan.gamma_opt,
            scan.gamma_cross,
            scan.gamma_half,
            predict_gamma_cross_infinite(&truth).value
        );
    }
    Ok(())
}
