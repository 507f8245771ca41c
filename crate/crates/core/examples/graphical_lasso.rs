//! L1-regularized precision estimate and the likelihood scan over `γ1`.

use graphreg::gamma::log_grid;
use graphreg::lasso::{graphical_lasso, kkt_violation, off_diagonal_support, run_l1_scan, DEFAULT_LASSO_SWEEPS, DEFAULT_LASSO_TOL};
use graphreg::sampling::{empirical_covariance, rescale_trace, sample_gaussian};
use graphreg::spherical::{covariance_from_interaction, generate_goe, DEFAULT_MU_TOL};

fn main() -> graphreg::Result<()> {
    let (n, alpha) = (50, 4.0);
    let truth = generate_goe(n, 0.5, 1)?;
    let model = covariance_from_interaction(&truth, DEFAULT_MU_TOL)?;
    let samples = sample_gaussian(&model, (alpha * n as f64) as usize, 2)?;
    let c = rescale_trace(&empirical_covariance(&samples), n)?;

    let sol = graphical_lasso(&c, 0.2, DEFAULT_LASSO_TOL, DEFAULT_LASSO_SWEEPS)?;
    println!("gamma1 0.2: {} nonzero off-diagonal entries, KKT violation {:.2e}", off_diagonal_support(&sol.precision), kkt_violation(&c, &sol)?);

    let scan = run_l1_scan(&c, &model.covariance, alpha, &log_grid(1e-3, 10.0, 41)?)?;
    println!("L1 opt {:?}, cross {:?}", scan.gamma_opt, scan.gamma_cross);
    Ok(())
}
