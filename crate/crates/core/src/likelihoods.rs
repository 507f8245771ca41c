//! Train, test and generated log-likelihoods of an inferred spherical model.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg;
use crate::map_l2::{MapSolution, Penalty};
use crate::sampling::SampleSet;
use crate::spherical::{self, SphericalModel};

/// Relative tolerance on the two evaluations of the generated likelihood.
const GEN_CHECK_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LikelihoodTriple {
    pub l_train: f64,
    pub l_test: f64,
    pub l_gen: f64,
    pub gamma: f64,
    pub alpha: f64,
}

fn check_dim(sol: &MapSolution, m: &DMatrix<f64>) -> Result<()> {
    let n = sol.n();
    if m.nrows() != n || m.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, got: m.nrows() });
    }
    Ok(())
}

/// `½ Σ_k j*_k c_k − log Z(J*)`.
pub fn train_likelihood(sol: &MapSolution, c_emp: &DMatrix<f64>) -> Result<f64> {
    check_dim(sol, c_emp)?;
    let fit: f64 = sol.j_star.iter().zip(&sol.c_emp).map(|(j, c)| j * c).sum();
    Ok(0.5 * fit - sol.log_partition()?)
}

/// `½ Σ_ij J*_ij C^tr_ij − log Z(J*)`, with `J*` in the original basis.
pub fn test_likelihood(sol: &MapSolution, c_tr: &DMatrix<f64>) -> Result<f64> {
    check_dim(sol, c_tr)?;
    Ok(0.5 * linalg::frobenius_inner(sol.interaction.entries(), c_tr) - sol.log_partition()?)
}

/// `½ Σ_k j*_k/(μ* − j*_k) − log Z(J*)`.
///
/// For the L2 penalty this is cross-checked against `L_train − (γ/2α) Σ J*²`.
pub fn gen_likelihood(sol: &MapSolution) -> Result<f64> {
    let log_z = sol.log_partition()?;
    let direct: f64 = 0.5 * sol.j_star.iter().map(|j| j / (sol.mu_star - j)).sum::<f64>() - log_z;
    if sol.penalty == Penalty::L2 {
        let fit: f64 = sol.j_star.iter().zip(&sol.c_emp).map(|(j, c)| j * c).sum();
        let via_train = 0.5 * fit - log_z - sol.gamma / (2.0 * sol.alpha) * sol.frobenius_sq();
        if (direct - via_train).abs() > GEN_CHECK_TOL * (1.0 + direct.abs()) {
            return Err(Error::InvariantViolation(format!("generated likelihood {direct} disagrees with the train identity {via_train}")));
        }
    }
    Ok(direct)
}

pub fn likelihood_triple(sol: &MapSolution, c_emp: &DMatrix<f64>, c_tr: &DMatrix<f64>) -> Result<LikelihoodTriple> {
    Ok(LikelihoodTriple {
        l_train: train_likelihood(sol, c_emp)?,
        l_test: test_likelihood(sol, c_tr)?,
        l_gen: gen_likelihood(sol)?,
        gamma: sol.gamma,
        alpha: sol.alpha,
    })
}

/// Triple from spectral data only: `c` are empirical eigenvalues, `t` the diagonal of
/// the true covariance in the same basis.
pub fn spectral_triple(j: &[f64], mu: f64, c: &[f64], t: &[f64], alpha: f64, gamma: f64) -> Result<LikelihoodTriple> {
    let log_z = spherical::log_partition(j, mu)?;
    let train: f64 = j.iter().zip(c).map(|(a, b)| a * b).sum();
    let test: f64 = j.iter().zip(t).map(|(a, b)| a * b).sum();
    let gen: f64 = j.iter().map(|a| a / (mu - a)).sum();
    Ok(LikelihoodTriple { l_train: 0.5 * train - log_z, l_test: 0.5 * test - log_z, l_gen: 0.5 * gen - log_z, gamma, alpha })
}

/// Average log-likelihood of a finite sample set under the inferred model.
pub fn sample_likelihood(sol: &MapSolution, samples: &SampleSet) -> Result<f64> {
    let j = sol.interaction.entries();
    if samples.n() != sol.n() {
        return Err(Error::DimensionMismatch { expected: sol.n(), got: samples.n() });
    }
    let xj = &samples.data * j;
    let quad: f64 = xj.component_mul(&samples.data).sum() / samples.p() as f64;
    Ok(0.5 * quad - sol.log_partition()?)
}

/// Likelihood of the true model on infinitely many of its own samples,
/// `½ Σ J^tr C^tr − log Z(J^tr)`.
pub fn true_likelihood(model: &SphericalModel) -> Result<f64> {
    let spectrum = model.interaction.spectrum()?;
    let fit: f64 = spectrum.iter().map(|j| j / (model.mu - j)).sum();
    Ok(0.5 * fit - spherical::log_partition(spectrum, model.mu)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map_l2::solve_map;
    use crate::sampling::{empirical_covariance, rescale_trace, sample_gaussian};
    use crate::spherical::{covariance_from_interaction, generate_goe};

    fn instance(n: usize, alpha: f64, seed: u64) -> (DMatrix<f64>, DMatrix<f64>) {
        let j = generate_goe(n, 0.5, seed).unwrap();
        let model = covariance_from_interaction(&j, 1e-13).unwrap();
        let p = (alpha * n as f64).round() as usize;
        let c = empirical_covariance(&sample_gaussian(&model, p, seed + 1).unwrap());
        (rescale_trace(&c, n).unwrap(), model.covariance)
    }

    #[test]
    fn zero_couplings() {
        let id = DMatrix::identity(6, 6);
        let sol = solve_map(&id, 1.0, 1.0, 1e-14).unwrap();
        let t = likelihood_triple(&sol, &id, &id).unwrap();
        for v in [t.l_train, t.l_test, t.l_gen] {
            assert!((v + 3.0).abs() < 1e-9);
        }
    }

    #[test]
    fn spectral_and_basis_forms_agree() {
        let (c, ctr) = instance(30, 3.0, 5);
        let sol = solve_map(&c, 3.0, 0.7, 1e-14).unwrap();
        let full = linalg::frobenius_inner(sol.interaction.entries(), &c);
        let spectral: f64 = sol.j_star.iter().zip(&sol.c_emp).map(|(a, b)| a * b).sum();
        assert!((full - spectral).abs() < 1e-10 * full.abs().max(1.0));
        let t = linalg::rotated_diagonal(&sol.basis, &ctr);
        let fast = spectral_triple(&sol.j_star, sol.mu_star, &sol.c_emp, &t, 3.0, 0.7).unwrap();
        let slow = likelihood_triple(&sol, &c, &ctr).unwrap();
        assert!((fast.l_test - slow.l_test).abs() < 1e-10 * (1.0 + slow.l_test.abs()));
        assert!((fast.l_gen - slow.l_gen).abs() < 1e-10 * (1.0 + slow.l_gen.abs()));
    }

    #[test]
    fn common_limit_and_ordering() {
        let (c, ctr) = instance(40, 2.0, 8);
        let sol = solve_map(&c, 2.0, 1e6, 1e-14).unwrap();
        let t = likelihood_triple(&sol, &c, &ctr).unwrap();
        for v in [t.l_train, t.l_test, t.l_gen] {
            assert!((v + 20.0).abs() < 1e-3);
        }
        for g in [1e-3, 0.1, 1.0, 10.0] {
            let t = likelihood_triple(&solve_map(&c, 2.0, g, 1e-14).unwrap(), &c, &ctr).unwrap();
            assert!(t.l_test <= t.l_train + 1e-9 * (1.0 + t.l_train.abs()));
        }
    }

    #[test]
    fn same_matrix_train_equals_test() {
        let (_, ctr) = instance(20, 1.0, 3);
        let sol = solve_map(&ctr, 1.0, 1e-4, 1e-14).unwrap();
        let t = likelihood_triple(&sol, &ctr, &ctr).unwrap();
        assert!((t.l_train - t.l_test).abs() < 1e-9 * (1.0 + t.l_train.abs()));
        let zero = solve_map(&ctr, 1.0, 0.0, 1e-14).unwrap();
        let z = likelihood_triple(&zero, &ctr, &ctr).unwrap();
        assert!((z.l_train - z.l_gen).abs() < 1e-8 * (1.0 + z.l_train.abs()));
    }

    #[test]
    fn sample_likelihood_tracks_train() {
        let j = generate_goe(10, 0.5, 1).unwrap();
        let model = covariance_from_interaction(&j, 1e-13).unwrap();
        let s = sample_gaussian(&model, 200, 2).unwrap();
        let c = empirical_covariance(&s);
        let sol = solve_map(&rescale_trace(&c, 10).unwrap(), 20.0, 0.5, 1e-14).unwrap();
        // Unrescaled samples: compare against the train formula on the raw covariance.
        let raw = 0.5 * linalg::frobenius_inner(sol.interaction.entries(), &c) - sol.log_partition().unwrap();
        assert!((sample_likelihood(&sol, &s).unwrap() - raw).abs() < 1e-10);
        assert!(true_likelihood(&model).unwrap().is_finite());
    }
}
