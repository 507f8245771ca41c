//! Shared helpers for the integration tests.
#![allow(dead_code)]

use graphreg::potts::{default_gamma_h, generate_er_potts, kl_divergence, mcmc_sample, plm_infer, KlMethod, DEFAULT_PLM_MAX_ITER, DEFAULT_PLM_TOL};
use graphreg::rng::derive_seed;
use graphreg::sampling::{empirical_covariance, rescale_trace, sample_gaussian};
use graphreg::spherical::{covariance_from_interaction, InteractionMatrix, SphericalModel};
use nalgebra::DMatrix;

/// Exact KL of the PLM estimate to the truth over `grid`, for an Erdős–Rényi Potts model.
pub fn potts_kl_curve(n: usize, q: usize, d: f64, p: usize, seed: u64, grid: &[f64]) -> Vec<f64> {
    let truth = generate_er_potts(n, q, d, 5f64.sqrt(), 1.0, seed).unwrap();
    let train = mcmc_sample(&truth, p, 1000, 10, derive_seed(seed, 1)).unwrap();
    grid.iter()
        .map(|&g| {
            let inf = plm_infer(&train, g, default_gamma_h(g, n), DEFAULT_PLM_TOL, DEFAULT_PLM_MAX_ITER).unwrap();
            kl_divergence(&inf, &truth, KlMethod::Exact).unwrap().value
        })
        .collect()
}

/// Grid value at the minimum, or `None` when the minimum sits on an endpoint.
pub fn interior_argmin(grid: &[f64], values: &[f64]) -> Option<f64> {
    let k = (0..values.len()).min_by(|&a, &b| values[a].total_cmp(&values[b]))?;
    (k > 0 && k + 1 < values.len()).then(|| grid[k])
}

pub fn geometric_mean(v: &[f64]) -> f64 {
    (v.iter().map(|x| x.ln()).sum::<f64>() / v.len() as f64).exp()
}

/// A sampled Gaussian instance: trace-rescaled empirical covariance and the true model.
pub struct Instance {
    pub j_tr: InteractionMatrix,
    pub model: SphericalModel,
    pub c_emp: DMatrix<f64>,
    pub alpha: f64,
}

pub fn gaussian_instance(j_tr: InteractionMatrix, alpha: f64, seed: u64) -> Instance {
    let n = j_tr.n();
    let model = covariance_from_interaction(&j_tr, 1e-13).unwrap();
    let p = ((alpha * n as f64).round() as usize).max(1);
    let c = empirical_covariance(&sample_gaussian(&model, p, derive_seed(seed, 1)).unwrap());
    let c_emp = rescale_trace(&c, n).unwrap();
    Instance { j_tr, model, c_emp, alpha: p as f64 / n as f64 }
}
