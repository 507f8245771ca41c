//! Draws GOE couplings, builds the spherical model and shows the top of the covariance
//! spectrum condensing once `σ > 1`.

use graphreg::linalg::symmetric_eigenvalues;
use graphreg::spherical::{covariance_from_interaction, generate_goe, DEFAULT_MU_TOL};

fn main() -> graphreg::Result<()> {
    let n = 400;
    for sigma in [0.5, 1.5, 2.0, 3.0] {
        let j = generate_goe(n, sigma, 7)?;
        let model = covariance_from_interaction(&j, DEFAULT_MU_TOL)?;
        let c = symmetric_eigenvalues(&model.covariance)?;
        let top = c.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let condensed = if sigma > 1.0 { n as f64 * (1.0 - 1.0 / sigma) } else { 0.0 };
        println!("sigma {sigma:>4}: mu = {:.4}, largest covariance eigenvalue {top:9.3} (condensate {condensed:.1})", model.mu);
    }
    Ok(())
}
