//! L1-penalized precision estimation (graphical lasso) and its use as a MAP
//! estimator for the spherical model.
//!
//! The solver is the block coordinate descent of Friedman, Hastie and Tibshirani:
//! each column of the working covariance `W` is updated by a coordinate-descent
//! lasso, and the precision matrix is read off the final regression coefficients.
//! Only off-diagonal entries are penalized, so `W_ii = S_ii` throughout.

use nalgebra::{Cholesky, DMatrix};
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::likelihoods::{likelihood_triple, LikelihoodTriple};
use crate::linalg::{self, SymmetricEigen};
use crate::map_l2::{MapSolution, Penalty};
use crate::roots::brent_root;
use crate::spherical::{self, InteractionMatrix};

pub const DEFAULT_LASSO_TOL: f64 = 1e-10;
pub const DEFAULT_LASSO_SWEEPS: usize = 1000;
const INNER_PASSES: usize = 10_000;

#[derive(Debug, Clone)]
pub struct LassoSolution {
    /// Precision matrix `Θ`.
    pub precision: DMatrix<f64>,
    /// Working covariance `W ≈ Θ⁻¹`.
    pub covariance: DMatrix<f64>,
    pub gamma1: f64,
    /// `Tr(SΘ) + γ1 Σ_{i≠j} |Θ_ij| − n`.
    pub dual_gap: f64,
    pub iterations: usize,
    /// `log det W` after each sweep; block coordinate ascent never decreases it.
    pub objective_trace: Vec<f64>,
}

fn soft_threshold(x: f64, t: f64) -> f64 {
    if x > t {
        x - t
    } else if x < -t {
        x + t
    } else {
        0.0
    }
}

fn log_det(m: &DMatrix<f64>) -> f64 {
    match Cholesky::new(m.clone()) {
        Some(ch) => 2.0 * ch.l().diagonal().iter().map(|x| x.ln()).sum::<f64>(),
        None => f64::NAN,
    }
}

/// Penalized log-likelihood `log det Θ − Tr(SΘ) − γ1 Σ_{i≠j} |Θ_ij|`.
pub fn penalized_objective(s: &DMatrix<f64>, theta: &DMatrix<f64>, gamma1: f64) -> f64 {
    log_det(theta) - linalg::frobenius_inner(s, theta) - gamma1 * off_diagonal_l1(theta)
}

fn off_diagonal_l1(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let mut acc = 0.0;
    for j in 0..n {
        for i in 0..n {
            if i != j {
                acc += m[(i, j)].abs();
            }
        }
    }
    acc
}

/// Coordinate-descent lasso for column `j`: minimizes
/// `½ βᵀ W₁₁ β − s₁₂ᵀ β + λ‖β‖₁` over the entries `k ≠ j` of `beta`.
/// Returns `W₁₁ β` in `wb` (entry `j` unused).
fn column_lasso(w: &DMatrix<f64>, s: &DMatrix<f64>, j: usize, lambda: f64, beta: &mut [f64], wb: &mut [f64], tol: f64) {
    let n = w.nrows();
    wb.iter_mut().for_each(|x| *x = 0.0);
    for k in 0..n {
        if k != j && beta[k] != 0.0 {
            for i in 0..n {
                wb[i] += w[(i, k)] * beta[k];
            }
        }
    }
    for _ in 0..INNER_PASSES {
        let mut max_delta: f64 = 0.0;
        for k in 0..n {
            if k == j {
                continue;
            }
            let wkk = w[(k, k)];
            let r = s[(k, j)] - (wb[k] - wkk * beta[k]);
            let new = soft_threshold(r, lambda) / wkk;
            let delta = new - beta[k];
            if delta != 0.0 {
                for i in 0..n {
                    wb[i] += w[(i, k)] * delta;
                }
                beta[k] = new;
                max_delta = max_delta.max(delta.abs() * wkk.sqrt());
            }
        }
        if max_delta < tol {
            break;
        }
    }
}

/// Maximizes `log det Θ − Tr(SΘ) − γ1 Σ_{i≠j} |Θ_ij|`.
///
/// Sweeps stop once the largest change of `W` during a sweep drops below `tol`.
pub fn graphical_lasso(s: &DMatrix<f64>, gamma1: f64, tol: f64, max_iter: usize) -> Result<LassoSolution> {
    let n = s.nrows();
    if !s.is_square() || n == 0 {
        return Err(invalid("covariance must be square and non-empty"));
    }
    if !linalg::is_symmetric(s, 1e-10) {
        return Err(invalid("covariance must be symmetric"));
    }
    if !(gamma1 >= 0.0) || !gamma1.is_finite() || !(tol > 0.0) {
        return Err(invalid("gamma1 must be non-negative and tol positive"));
    }
    if (0..n).any(|i| !(s[(i, i)] > 0.0)) {
        return Err(invalid("covariance diagonal must be positive"));
    }
    let eigs = linalg::symmetric_eigenvalues(s)?;
    let scale = eigs[0].abs().max(1.0);
    if eigs[n - 1] < -1e-8 * scale {
        return Err(Error::Domain(format!("covariance not positive semidefinite (eigenvalue {})", eigs[n - 1])));
    }

    let mut w = s.clone();
    let mut betas = DMatrix::<f64>::zeros(n, n);
    let mut beta = vec![0.0; n];
    let mut wb = vec![0.0; n];
    let mut trace = Vec::new();
    let inner_tol = (tol * 1e-2).max(1e-15);
    let mut iterations = 0;
    let mut converged = n == 1;
    while !converged && iterations < max_iter {
        iterations += 1;
        let mut max_change: f64 = 0.0;
        for j in 0..n {
            beta.copy_from_slice(betas.column(j).as_slice());
            column_lasso(&w, s, j, gamma1, &mut beta, &mut wb, inner_tol);
            for k in 0..n {
                if k != j {
                    max_change = max_change.max((w[(k, j)] - wb[k]).abs());
                    w[(k, j)] = wb[k];
                    w[(j, k)] = wb[k];
                }
            }
            betas.column_mut(j).copy_from_slice(&beta);
        }
        trace.push(log_det(&w));
        converged = max_change < tol;
    }

    let mut theta = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let mut quad = 0.0;
        for k in 0..n {
            if k != j {
                quad += w[(k, j)] * betas[(k, j)];
            }
        }
        let tjj = 1.0 / (w[(j, j)] - quad);
        theta[(j, j)] = tjj;
        for k in 0..n {
            if k != j {
                theta[(k, j)] = -betas[(k, j)] * tjj;
            }
        }
    }
    let theta = (&theta + theta.transpose()) * 0.5;
    let dual_gap = linalg::frobenius_inner(s, &theta) + gamma1 * off_diagonal_l1(&theta) - n as f64;
    if !converged {
        return Err(Error::Convergence { iterations, last: dual_gap });
    }
    Ok(LassoSolution { precision: theta, covariance: w, gamma1, dual_gap, iterations, objective_trace: trace })
}

/// Largest violation of the optimality conditions, with `W = Θ⁻¹`:
/// active entries need `|S_ij − W_ij + γ1 sign Θ_ij| ≤ 1e-4 (1 + |S_ij|)` and zero
/// entries need `|S_ij − W_ij| ≤ γ1 + 1e-6`. Returns `0` when both hold.
pub fn kkt_violation(s: &DMatrix<f64>, sol: &LassoSolution) -> Result<f64> {
    let n = s.nrows();
    let w = Cholesky::new(sol.precision.clone()).ok_or_else(|| Error::Domain("precision is not positive definite".into()))?.inverse();
    let mut worst: f64 = 0.0;
    for j in 0..n {
        for i in 0..n {
            if i == j {
                continue;
            }
            let t = sol.precision[(i, j)];
            let g = s[(i, j)] - w[(i, j)];
            let excess = if t != 0.0 { (g + sol.gamma1 * t.signum()).abs() - 1e-4 * (1.0 + s[(i, j)].abs()) } else { g.abs() - sol.gamma1 - 1e-6 };
            worst = worst.max(excess);
        }
    }
    Ok(worst)
}

/// Number of nonzero entries above the diagonal.
pub fn off_diagonal_support(theta: &DMatrix<f64>) -> usize {
    let n = theta.nrows();
    (0..n).flat_map(|j| (0..j).map(move |i| (i, j))).filter(|&(i, j)| theta[(i, j)] != 0.0).count()
}

/// Spherical MAP solution built from a precision matrix: `J* = μ₀I − Θ` with
/// `μ₀ = Tr Θ / n`, then `μ*` re-solved for `J*`.
pub fn map_from_precision(theta: &DMatrix<f64>, c_emp: &DMatrix<f64>, alpha: f64, gamma1: f64) -> Result<MapSolution> {
    let n = theta.nrows();
    let mu0 = theta.trace() / n as f64;
    let eig = SymmetricEigen::new(theta)?;
    // Θ descending means J* ascending; flip to keep J* descending.
    let j_star: Vec<f64> = eig.values.iter().rev().map(|t| mu0 - t).collect();
    let mut vectors = eig.vectors.clone();
    for k in 0..n {
        vectors.set_column(k, &eig.vectors.column(n - 1 - k));
    }
    let entries = DMatrix::identity(n, n) * mu0 - theta;
    let interaction = InteractionMatrix::with_eigen(entries, SymmetricEigen { values: j_star.clone(), vectors: vectors.clone() })?;
    let mu_star = spherical::solve_lagrange_multiplier(&j_star, spherical::DEFAULT_MU_TOL)?;
    let c_rot = linalg::rotated_diagonal(&vectors, c_emp);
    Ok(MapSolution { j_star, c_emp: c_rot, mu_star, basis: vectors, interaction, gamma: gamma1, alpha, penalty: Penalty::L1 })
}

/// L1 MAP: the lasso runs with strength `γ1/α`, matching the `γ/α` balance between
/// penalty and likelihood in the L2 energy.
pub fn map_l1(c_emp: &DMatrix<f64>, alpha: f64, gamma1: f64) -> Result<MapSolution> {
    map_l1_with(c_emp, alpha, gamma1, DEFAULT_LASSO_TOL, DEFAULT_LASSO_SWEEPS)
}

pub fn map_l1_with(c_emp: &DMatrix<f64>, alpha: f64, gamma1: f64, tol: f64, max_iter: usize) -> Result<MapSolution> {
    if !(alpha > 0.0) {
        return Err(invalid("alpha must be positive"));
    }
    let sol = graphical_lasso(c_emp, gamma1 / alpha, tol, max_iter)?;
    map_from_precision(&sol.precision, c_emp, alpha, gamma1)
}

/// Likelihood scan over an L1 grid with grid-located optimum and crossing.
#[derive(Debug, Clone)]
pub struct L1Scan {
    pub rows: Vec<LikelihoodTriple>,
    pub frobenius_sq: Vec<f64>,
    pub mu_star: Vec<f64>,
    pub support: Vec<usize>,
    /// Interior maximum of `L_test`, refined by a parabola in `log γ1`.
    pub gamma_opt: Option<f64>,
    /// Brent-refined crossing of `L_test` and `L_gen`.
    pub gamma_cross: Option<f64>,
}

pub fn run_l1_scan(c_emp: &DMatrix<f64>, c_tr: &DMatrix<f64>, alpha: f64, grid: &[f64]) -> Result<L1Scan> {
    let eval = |g: f64| -> Result<(LikelihoodTriple, f64, f64, usize)> {
        let sol = map_l1(c_emp, alpha, g)?;
        let t = likelihood_triple(&sol, c_emp, c_tr)?;
        let support = off_diagonal_support(sol.interaction.entries());
        Ok((t, sol.frobenius_sq(), sol.mu_star, support))
    };
    let out: Vec<_> = grid.par_iter().map(|&g| eval(g)).collect::<Result<_>>()?;
    let rows: Vec<LikelihoodTriple> = out.iter().map(|o| o.0).collect();

    let lt: Vec<f64> = rows.iter().map(|r| r.l_test).collect();
    let arg = (0..lt.len()).fold(0, |b, i| if lt[i] > lt[b] { i } else { b });
    let gamma_opt = if arg > 0 && arg + 1 < lt.len() {
        let (x0, x1, x2) = (grid[arg - 1].ln(), grid[arg].ln(), grid[arg + 1].ln());
        let (y0, y1, y2) = (lt[arg - 1], lt[arg], lt[arg + 1]);
        let den = (x0 - x1) * (x0 - x2) * (x1 - x2);
        let a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / den;
        let b = (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0) + x0 * x0 * (y1 - y2)) / den;
        let vertex = if a < 0.0 { (-b / (2.0 * a)).clamp(x0, x2) } else { x1 };
        Some(vertex.exp())
    } else {
        None
    };

    let diff: Vec<f64> = rows.iter().map(|r| r.l_gen - r.l_test).collect();
    let bracket = (0..diff.len().saturating_sub(1)).find(|&i| diff[i] > 0.0 && diff[i + 1] <= 0.0);
    let gamma_cross = match bracket {
        Some(i) => {
            let f = |s: f64| eval(s.exp()).map(|(t, ..)| t.l_gen - t.l_test).unwrap_or(f64::NAN);
            Some(brent_root(f, grid[i].ln(), grid[i + 1].ln(), 1e-10, 200)?.exp())
        }
        None => None,
    };
    Ok(L1Scan {
        rows,
        frobenius_sq: out.iter().map(|o| o.1).collect(),
        mu_star: out.iter().map(|o| o.2).collect(),
        support: out.iter().map(|o| o.3).collect(),
        gamma_opt,
        gamma_cross,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::likelihoods::train_likelihood;
    use crate::map_l2::solve_map;
    use crate::sampling::{empirical_covariance, rescale_trace, sample_gaussian};
    use crate::spherical::{covariance_from_interaction, generate_goe};

    fn sample_cov(n: usize, p: usize, seed: u64) -> DMatrix<f64> {
        let j = generate_goe(n, 0.5, seed).unwrap();
        let model = covariance_from_interaction(&j, 1e-13).unwrap();
        rescale_trace(&empirical_covariance(&sample_gaussian(&model, p, seed + 1).unwrap()), n).unwrap()
    }

    #[test]
    fn unpenalized_is_inverse() {
        let s = sample_cov(6, 60, 1);
        let sol = graphical_lasso(&s, 0.0, 1e-12, 5000).unwrap();
        let inv = s.clone().try_inverse().unwrap();
        assert!((&sol.precision - &inv).norm() / inv.norm() < 1e-6);
    }

    #[test]
    fn large_penalty_is_diagonal() {
        let s = sample_cov(5, 50, 2);
        let mut max_off: f64 = 0.0;
        for j in 0..5 {
            for i in 0..5 {
                if i != j {
                    max_off = max_off.max(s[(i, j)].abs());
                }
            }
        }
        let sol = graphical_lasso(&s, max_off, 1e-10, 100).unwrap();
        for j in 0..5 {
            for i in 0..5 {
                if i == j {
                    assert!((sol.precision[(i, i)] - 1.0 / s[(i, i)]).abs() < 1e-12);
                } else {
                    assert_eq!(sol.precision[(i, j)], 0.0);
                }
            }
        }
        assert!(kkt_violation(&s, &sol).unwrap() <= 0.0);
    }

    #[test]
    fn kkt_and_dual_ascent() {
        let s = sample_cov(5, 15, 3);
        let sol = graphical_lasso(&s, 0.1, 1e-10, 1000).unwrap();
        assert!(kkt_violation(&s, &sol).unwrap() <= 0.0);
        assert!(sol.dual_gap.abs() < 1e-6);
        for w in sol.objective_trace.windows(2) {
            assert!(w[1] >= w[0] - 1e-10);
        }
        assert!(Cholesky::new(sol.precision.clone()).is_some());
    }

    #[test]
    fn rejects_bad_input() {
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(graphical_lasso(&bad, 0.1, 1e-8, 100).is_err());
        let zero_diag = DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 1.0]);
        assert!(graphical_lasso(&zero_diag, 0.1, 1e-8, 100).is_err());
        let s = sample_cov(8, 10, 4);
        let r = graphical_lasso(&s, 0.05, 1e-14, 1);
        assert!(matches!(r, Err(Error::Convergence { .. })), "{r:?}");
    }

    #[test]
    fn l1_and_l2_agree_without_penalty() {
        let s = sample_cov(8, 200, 5);
        let l1 = map_l1(&s, 25.0, 1e-9).unwrap();
        let l2 = solve_map(&s, 25.0, 0.0, 1e-12).unwrap();
        let a = train_likelihood(&l1, &s).unwrap();
        let b = train_likelihood(&l2, &s).unwrap();
        assert!((a - b).abs() < 1e-4 * b.abs(), "{a} vs {b}");
        l1.check_invariants(1e-9).unwrap();
    }

    #[test]
    fn strong_penalty_reaches_common_limit() {
        let n = 10;
        let s = sample_cov(n, 4000, 6);
        let j = generate_goe(n, 0.5, 6).unwrap();
        let ctr = covariance_from_interaction(&j, 1e-13).unwrap().covariance;
        let sol = map_l1(&s, 400.0, 1e6).unwrap();
        assert_eq!(off_diagonal_support(sol.interaction.entries()), 0);
        let t = likelihood_triple(&sol, &s, &ctr).unwrap();
        for v in [t.l_train, t.l_test, t.l_gen] {
            assert!((v + n as f64 / 2.0).abs() < 0.05, "{v}");
        }
    }
}
