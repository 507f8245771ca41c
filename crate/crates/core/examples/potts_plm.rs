//! Pseudo-likelihood inference of a Potts model over a `γ` grid, scored by the exact KL
//! divergence to the truth.

use graphreg::gamma::log_grid;
use graphreg::potts::{default_gamma_h, generate_er_potts, kl_divergence, mcmc_sample, plm_infer, KlMethod, DEFAULT_PLM_MAX_ITER, DEFAULT_PLM_TOL};

fn main() -> graphreg::Result<()> {
    let d = 2.5;
    let truth = generate_er_potts(8, 3, d, 5f64.sqrt(), 1.0, 1)?;
    let train = mcmc_sample(&truth, 1000, 1000, 10, 2)?;
    let mut best = (f64::NAN, f64::INFINITY);
    for gamma in log_grid(1e-3, 1e2, 11)? {
        let inferred = plm_infer(&train, gamma, default_gamma_h(gamma, truth.n()), DEFAULT_PLM_TOL, DEFAULT_PLM_MAX_ITER)?;
        let kl = kl_divergence(&inferred, &truth, KlMethod::Exact)?.value;
        println!("gamma {gamma:9.4}: KL {kl:.5}");
        if kl < best.1 {
            best = (gamma, kl);
        }
    }
    println!("argmin {:.4} (1/d = {:.2})", best.0, 1.0 / d);
    Ok(())
}
