//! L2-regularized MAP estimate from samples, its invariants and its text serialization.

use graphreg::io::{map_solution_from_text, map_solution_to_text};
use graphreg::likelihoods::likelihood_triple;
use graphreg::map_l2::{solve_map, DEFAULT_MAP_TOL};
use graphreg::sampling::{empirical_covariance, rescale_trace, sample_gaussian};
use graphreg::spherical::{covariance_from_interaction, generate_goe, DEFAULT_MU_TOL};

fn main() -> graphreg::Result<()> {
    let (n, alpha, gamma) = (30, 5.0, 4.0);
    let truth = generate_goe(n, 0.5, 1)?;
    let model = covariance_from_interaction(&truth, DEFAULT_MU_TOL)?;
    let samples = sample_gaussian(&model, (alpha * n as f64) as usize, 2)?;
    let c = rescale_trace(&empirical_covariance(&samples), n)?;

    let sol = solve_map(&c, alpha, gamma, DEFAULT_MAP_TOL)?;
    sol.check_invariants(1e-8)?;
    println!("mu* = {:.6}, |J*|^2 = {:.4}, |J_tr|^2 = {:.4}", sol.mu_star, sol.frobenius_sq(), truth.frobenius_sq());

    let l = likelihood_triple(&sol, &c, &model.covariance)?;
    println!("L_train {:.4}  L_test {:.4}  L_gen {:.4}", l.l_train, l.l_test, l.l_gen);

    let text = map_solution_to_text(&sol);
    let back = map_solution_from_text(&text)?;
    println!("serialized {} bytes, mu* after round trip {:.6}", text.len(), back.mu_star);
    Ok(())
}
