//! Pseudo-likelihood maximization with L2 penalties.
//!
//! Site `i` has its own copy of the fields `h_i` and of every block `J_ij`. Its objective is
//!
//! `f_i = −(1/p) Σ_k log P(x^k_i | x^k_{−i}) + (n/2p) (γ Σ_j ‖J_ij‖² + γ_h ‖h_i‖²)`,
//!
//! the per-site share of a total penalty `(nγ/2) Σ_{i<j} ‖J_ij‖²`, matching the scaling of the
//! Gaussian energy. The two copies of each block are averaged afterwards.

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::optim::{lbfgs, LbfgsSettings};

use super::mcmc::PottsSampleSet;
use super::PottsParams;

pub const DEFAULT_PLM_TOL: f64 = 1e-7;
pub const DEFAULT_PLM_MAX_ITER: usize = 10_000;

/// Default field penalty `γ/(10n)`.
pub fn default_gamma_h(gamma: f64, n: usize) -> f64 {
    gamma / (10.0 * n as f64)
}

/// Number of variables of one site problem: `q + (n−1) q²`.
pub fn site_dimension(n: usize, q: usize) -> usize {
    q + (n - 1) * q * q
}

/// Objective and gradient of site `i`. Layout of `x`: `h_i(a)`, then for each `j ≠ i` in
/// increasing order the block `J_ij(a, b)` row-major with `a` the state of `i`.
pub fn site_objective(samples: &PottsSampleSet, i: usize, x: &[f64], gamma: f64, gamma_h: f64, grad: &mut [f64]) -> f64 {
    let (n, q) = (samples.n, samples.q);
    let p = samples.p() as f64;
    let qq = q * q;
    grad.iter_mut().for_each(|g| *g = 0.0);
    let block_offset = |j: usize| q + (if j < i { j } else { j - 1 }) * qq;
    let mut l = vec![0.0; q];
    let mut nll = 0.0;
    for cfg in samples.iter() {
        l.copy_from_slice(&x[..q]);
        for (j, &xj) in cfg.iter().enumerate() {
            if j == i {
                continue;
            }
            let off = block_offset(j) + xj as usize;
            for (a, la) in l.iter_mut().enumerate() {
                *la += x[off + a * q];
            }
        }
        let max = l.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut total = 0.0;
        for la in l.iter_mut() {
            *la = (*la - max).exp();
            total += *la;
        }
        let xi = cfg[i] as usize;
        nll += total.ln() - (l[xi].ln());
        // Residuals P(a) − δ(a, x_i).
        for la in l.iter_mut() {
            *la /= total;
        }
        l[xi] -= 1.0;
        for (a, r) in l.iter().enumerate() {
            grad[a] += r;
        }
        for (j, &xj) in cfg.iter().enumerate() {
            if j == i {
                continue;
            }
            let off = block_offset(j) + xj as usize;
            for (a, r) in l.iter().enumerate() {
                grad[off + a * q] += r;
            }
        }
    }
    let scale = n as f64 / p;
    let mut penalty = 0.0;
    for (k, (g, v)) in grad.iter_mut().zip(x).enumerate() {
        let c = if k < q { gamma_h } else { gamma };
        *g = *g / p + scale * c * v;
        penalty += 0.5 * scale * c * v * v;
    }
    nll / p + penalty
}

/// Moves the row means of each block into the fields and drops the column means, which are
/// constant in the conditional of site `i`.
fn gauge_site(mut x: Vec<f64>, n: usize, q: usize) -> Vec<f64> {
    let qf = q as f64;
    for k in 0..(n - 1) {
        let off = q + k * q * q;
        let blk = &x[off..off + q * q];
        let row: Vec<f64> = (0..q).map(|a| blk[a * q..(a + 1) * q].iter().sum::<f64>() / qf).collect();
        let col: Vec<f64> = (0..q).map(|b| (0..q).map(|a| blk[a * q + b]).sum::<f64>() / qf).collect();
        let all = row.iter().sum::<f64>() / qf;
        for a in 0..q {
            for b in 0..q {
                x[off + a * q + b] += all - row[a] - col[b];
            }
            x[a] += row[a] - all;
        }
    }
    x
}

/// Solves every site problem, symmetrizes the couplings and returns a dense model in the
/// zero-sum gauge.
/// Sites whose gradient does not reach `tol` within `max_iter` iterations yield
/// [`Error::Convergence`].
pub fn plm_infer(samples: &PottsSampleSet, gamma: f64, gamma_h: f64, tol: f64, max_iter: usize) -> Result<PottsParams> {
    let (n, q) = (samples.n, samples.q);
    if n < 2 {
        return Err(invalid("pseudo-likelihood needs at least two sites"));
    }
    if !(gamma >= 0.0 && gamma_h >= 0.0) || !(tol > 0.0) {
        return Err(invalid("penalties must be non-negative and the tolerance positive"));
    }
    let settings = LbfgsSettings { memory: 10, grad_tol: tol, rel_decrease_tol: 1e-13, max_iter };
    let dim = site_dimension(n, q);
    let sites: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let f = |x: &[f64], g: &mut [f64]| site_objective(samples, i, x, gamma, gamma_h, g);
            match lbfgs(f, vec![0.0; dim], settings) {
                Ok(r) => Ok(r.x),
                Err(Error::Convergence { iterations, last }) => {
                    log::warn!("site {i}: L-BFGS stopped after {iterations} iterations, gradient {last:.3e}");
                    Err(Error::Convergence { iterations, last })
                }
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_>>()?;

    let qq = q * q;
    let sites: Vec<Vec<f64>> = sites.into_iter().map(|x| gauge_site(x, n, q)).collect();
    let mut out = PottsParams::dense_zeros(n, q)?;
    for (i, x) in sites.iter().enumerate() {
        for (a, &v) in x.iter().take(q).enumerate() {
            out.set_field(i, a, v);
        }
    }
    let offset = |i: usize, j: usize| q + (if j < i { j } else { j - 1 }) * qq;
    let edges = out.edges().to_vec();
    for (e, (i, j)) in edges.into_iter().enumerate() {
        let (xi, xj) = (&sites[i], &sites[j]);
        let (oi, oj) = (offset(i, j), offset(j, i));
        let blk = out.block_mut(e);
        for a in 0..q {
            for b in 0..q {
                blk[a * q + b] = 0.5 * (xi[oi + a * q + b] + xj[oj + b * q + a]);
            }
        }
    }
    Ok(out.zero_sum_gauge())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potts::{generate_er_potts, mcmc_sample};
    use crate::rng;
    use rand::Rng as _;

    #[test]
    fn gradient_matches_finite_differences() {
        let truth = generate_er_potts(4, 3, 2.0, 1.0, 1.0, 3).unwrap();
        let samples = mcmc_sample(&truth, 50, 20, 2, 4).unwrap();
        let dim = site_dimension(4, 3);
        let mut r = rng::seeded(1);
        for i in 0..4 {
            let x: Vec<f64> = (0..dim).map(|_| r.random_range(-0.5..0.5)).collect();
            let mut g = vec![0.0; dim];
            site_objective(&samples, i, &x, 0.3, 0.05, &mut g);
            let mut scratch = vec![0.0; dim];
            for k in 0..dim {
                let h = 1e-5;
                let mut xp = x.clone();
                xp[k] += h;
                let fp = site_objective(&samples, i, &xp, 0.3, 0.05, &mut scratch);
                xp[k] -= 2.0 * h;
                let fm = site_objective(&samples, i, &xp, 0.3, 0.05, &mut scratch);
                let fd = (fp - fm) / (2.0 * h);
                assert!((fd - g[k]).abs() <= 1e-5 * g[k].abs().max(1e-3), "site {i} var {k}: {fd} vs {}", g[k]);
            }
        }
    }

    #[test]
    fn strong_penalty_gives_independent_sites() {
        let truth = generate_er_potts(5, 3, 2.0, 1.0, 1.0, 3).unwrap();
        let samples = mcmc_sample(&truth, 200, 20, 2, 4).unwrap();
        let fit = plm_infer(&samples, 1e6, 0.0, DEFAULT_PLM_TOL, DEFAULT_PLM_MAX_ITER).unwrap();
        assert!(fit.max_abs_coupling() < 1e-4);
        // Fields reproduce the empirical single-site marginals.
        for i in 0..5 {
            let counts: Vec<f64> = (0..3).map(|a| samples.iter().filter(|x| x[i] == a as u8).count() as f64).collect();
            for a in 0..3 {
                for b in 0..3 {
                    if counts[a] > 0.0 && counts[b] > 0.0 {
                        let d = fit.field(i, a) - fit.field(i, b);
                        assert!((d - (counts[a] / counts[b]).ln()).abs() < 1e-3);
                    }
                }
            }
        }
    }

    #[test]
    fn recovers_couplings_and_shrinks() {
        let truth = generate_er_potts(6, 3, 3.0, 0.5, 0.8, 8).unwrap();
        let samples = mcmc_sample(&truth, 20_000, 50, 5, 9).unwrap();
        let fit = plm_infer(&samples, 1e-4, 1e-6, DEFAULT_PLM_TOL, DEFAULT_PLM_MAX_ITER).unwrap();
        let g = truth.zero_sum_gauge();
        let mut sq = 0.0;
        for i in 0..6 {
            for j in (i + 1)..6 {
                for a in 0..3 {
                    for b in 0..3 {
                        sq += (g.coupling(i, j, a, b) - fit.coupling(i, j, a, b)).powi(2);
                    }
                }
            }
        }
        let rms = (sq / (15.0 * 9.0)).sqrt();
        assert!(rms < 0.08, "{rms}");
        let zero = PottsParams::zeros(6, 3).unwrap();
        let null = mcmc_sample(&zero, 10_000, 10, 2, 3).unwrap();
        let fit = plm_infer(&null, 1.0, default_gamma_h(1.0, 6), DEFAULT_PLM_TOL, DEFAULT_PLM_MAX_ITER).unwrap();
        assert!(fit.max_abs_coupling() < 0.1);
        let small = mcmc_sample(&generate_er_potts(4, 3, 2.0, 1.0, 1.0, 3).unwrap(), 50, 20, 2, 4).unwrap();
        let fit = plm_infer(&small, 1e4, default_gamma_h(1e4, 4), DEFAULT_PLM_TOL, DEFAULT_PLM_MAX_ITER).unwrap();
        assert!(fit.max_abs_coupling() < 1e-3, "{}", fit.max_abs_coupling());
    }

    #[test]
    fn kl_small_after_fit() {
        let truth = generate_er_potts(6, 3, 3.0, 0.5, 0.8, 8).unwrap();
        let samples = mcmc_sample(&truth, 20_000, 50, 5, 9).unwrap();
        let fit = plm_infer(&samples, 1e-4, 1e-6, DEFAULT_PLM_TOL, DEFAULT_PLM_MAX_ITER).unwrap();
        let kl = crate::potts::kl_divergence(&fit, &truth, crate::potts::KlMethod::Exact).unwrap().value;
        assert!(kl < 0.01, "{kl}");
    }
}
