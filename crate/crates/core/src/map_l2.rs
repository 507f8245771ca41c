//! L2-regularized MAP inference of the coupling matrix.
//!
//! The MAP equation `γJ − αC + α(μI − J)⁻¹ = 0` is diagonal in the eigenbasis of
//! the empirical covariance, so each inferred eigenvalue is the smaller root of a
//! quadratic in `j`, and `μ*` is the root of a scalar residual.

use nalgebra::DMatrix;

use crate::error::{invalid, Error, Result};
use crate::linalg::{self, SymmetricEigen};
use crate::roots::brent_root;
use crate::spherical::{self, InteractionMatrix};

/// Absolute tolerance on the normalization residual used by [`solve_map`].
pub const DEFAULT_MAP_TOL: f64 = 1e-12;

/// Relative distance of `Tr C_emp` from `n` accepted at `γ = 0`.
const TRACE_TOL: f64 = 1e-8;

/// Which penalty produced a [`MapSolution`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Penalty {
    L2,
    L1,
}

/// Result of a MAP solve.
///
/// `j_star[k]` and `c_emp[k]` are paired: for the L2 penalty `c_emp` holds the
/// eigenvalues of the empirical covariance (descending) and `basis` its
/// eigenvectors. For the L1 penalty `basis` diagonalizes `J*` and `c_emp[k]` is the
/// empirical covariance rotated into that basis.
#[derive(Debug, Clone)]
pub struct MapSolution {
    pub j_star: Vec<f64>,
    pub c_emp: Vec<f64>,
    pub mu_star: f64,
    pub basis: DMatrix<f64>,
    pub interaction: InteractionMatrix,
    pub gamma: f64,
    pub alpha: f64,
    pub penalty: Penalty,
}

impl MapSolution {
    pub fn n(&self) -> usize {
        self.j_star.len()
    }

    /// Eigenvalues `1/(μ* − j*_k)` of the inferred covariance.
    pub fn covariance_spectrum(&self) -> Vec<f64> {
        self.j_star.iter().map(|j| 1.0 / (self.mu_star - j)).collect()
    }

    /// The inferred covariance `C* = (μ*I − J*)⁻¹` in the original basis.
    pub fn covariance(&self) -> DMatrix<f64> {
        let eig = SymmetricEigen { values: self.covariance_spectrum(), vectors: self.basis.clone() };
        eig.reconstruct()
    }

    pub fn log_partition(&self) -> Result<f64> {
        spherical::log_partition(&self.j_star, self.mu_star)
    }

    /// `Σ_ij J*_ij² = Σ_k j*_k²`.
    pub fn frobenius_sq(&self) -> f64 {
        self.j_star.iter().map(|j| j * j).sum()
    }

    /// Largest absolute residual of `γj² − (γμ + αc)j + α(μc − 1)` over `k`.
    pub fn quadratic_residual(&self) -> f64 {
        let (a, g, mu) = (self.alpha, self.gamma, self.mu_star);
        self.j_star.iter().zip(&self.c_emp).map(|(&j, &c)| (g * j * j - (g * mu + a * c) * j + a * (mu * c - 1.0)).abs()).fold(0.0, f64::max)
    }

    /// Checks the structural invariants: the quadratic (L2 only), `j* < μ*`, the
    /// normalization, and monotone pairing with `c_emp` (L2 only).
    pub fn check_invariants(&self, tol: f64) -> Result<()> {
        if self.j_star.iter().any(|&j| !(j < self.mu_star)) {
            return Err(Error::InvariantViolation("an inferred eigenvalue reaches mu".into()));
        }
        let res = spherical::normalization_residual(&self.j_star, self.mu_star);
        if res.abs() > tol {
            return Err(Error::InvariantViolation(format!("normalization residual {res}")));
        }
        if self.penalty == Penalty::L2 {
            let q = self.quadratic_residual();
            if q > tol {
                return Err(Error::InvariantViolation(format!("quadratic residual {q}")));
            }
            for k in 1..self.n() {
                if self.c_emp[k - 1] >= self.c_emp[k] && self.j_star[k - 1] < self.j_star[k] - tol {
                    return Err(Error::InvariantViolation("j* not monotone in c".into()));
                }
            }
        }
        Ok(())
    }
}

/// Smaller root of `γj² − (γμ + αc)j + α(μc − 1) = 0`.
///
/// For `γ = 0` this is the unregularized limit `μ − 1/c`.
pub fn inferred_eigenvalue(c_emp: f64, mu: f64, alpha: f64, gamma: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(invalid("alpha must be positive"));
    }
    if gamma < 0.0 || !gamma.is_finite() {
        return Err(invalid("gamma must be a finite non-negative number"));
    }
    if gamma == 0.0 {
        if c_emp == 0.0 {
            return Err(Error::Domain("unregularized eigenvalue undefined at c = 0".into()));
        }
        return Ok(mu - 1.0 / c_emp);
    }
    Ok(eigenvalue_unchecked(c_emp, mu, alpha, gamma))
}

#[inline]
pub(crate) fn eigenvalue_unchecked(c: f64, mu: f64, alpha: f64, gamma: f64) -> f64 {
    let s = alpha * c + gamma * mu;
    let d = discriminant_sqrt(c, mu, alpha, gamma);
    if s > 0.0 {
        // Rationalized form avoids cancellation in s − D.
        2.0 * alpha * (mu * c - 1.0) / (s + d)
    } else {
        (s - d) / (2.0 * gamma)
    }
}

/// `D = sqrt((αc − γμ)² + 4αγ)`.
#[inline]
pub(crate) fn discriminant_sqrt(c: f64, mu: f64, alpha: f64, gamma: f64) -> f64 {
    let x = alpha * c - gamma * mu;
    (x * x + 4.0 * alpha * gamma).sqrt()
}

/// `1/(μ − j*(c, μ)) = (D + αc − γμ)/(2α)`, the matching eigenvalue of `C*`.
#[inline]
pub(crate) fn inverse_gap(c: f64, mu: f64, alpha: f64, gamma: f64) -> f64 {
    let x = alpha * c - gamma * mu;
    let d = discriminant_sqrt(c, mu, alpha, gamma);
    if x >= 0.0 {
        (d + x) / (2.0 * alpha)
    } else {
        2.0 * gamma / (d - x)
    }
}

/// `1 − (1/n) Σ_k 1/(μ − j*(c_k, μ))`, for `γ > 0`.
pub fn norm_residual(mu: f64, c_emp: &[f64], alpha: f64, gamma: f64) -> f64 {
    let n = c_emp.len() as f64;
    1.0 - c_emp.iter().map(|&c| inverse_gap(c, mu, alpha, gamma)).sum::<f64>() / n
}

/// Root of [`norm_residual`]; the residual increases from −∞ to 1 over the whole
/// real line, so the bracket is grown outward from `μ = 1`.
pub fn solve_mu_star(c_emp: &[f64], alpha: f64, gamma: f64, tol: f64) -> Result<f64> {
    if !(gamma > 0.0) {
        return Err(invalid("the residual solve needs gamma > 0"));
    }
    let res = |mu: f64| norm_residual(mu, c_emp, alpha, gamma);
    let start = 1.0;
    let r0 = res(start);
    if r0 == 0.0 {
        return Ok(start);
    }
    let dir = if r0 < 0.0 { 1.0 } else { -1.0 };
    let mut step = 1.0;
    let mut prev = start;
    for _ in 0..1100 {
        let next = start + dir * step;
        let r = res(next);
        if r == 0.0 {
            return Ok(next);
        }
        if r.signum() != r0.signum() {
            let (lo, hi) = if dir > 0.0 { (prev, next) } else { (next, prev) };
            return brent_root(res, lo, hi, tol, 1000);
        }
        prev = next;
        step *= 2.0;
        if !step.is_finite() {
            break;
        }
    }
    Err(Error::NoRoot("no sign change of the normalization residual".into()))
}

/// Checks shared by the MAP entry points.
pub(crate) fn validate_map_input(alpha: f64, gamma: f64, tol: f64) -> Result<()> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(invalid("alpha must be positive"));
    }
    if !(gamma >= 0.0) || !gamma.is_finite() {
        return Err(invalid("gamma must be a finite non-negative number"));
    }
    if !(tol > 0.0) {
        return Err(invalid("tolerance must be positive"));
    }
    Ok(())
}

/// `(μ*, j*)` for the eigenvalues `c` of the empirical covariance.
pub fn solve_spectrum(c: &[f64], alpha: f64, gamma: f64, tol: f64) -> Result<(f64, Vec<f64>)> {
    validate_map_input(alpha, gamma, tol)?;
    if c.is_empty() {
        return Err(invalid("empty spectrum"));
    }
    if gamma == 0.0 {
        let n = c.len() as f64;
        if c.iter().any(|&x| !(x > 0.0)) {
            return Err(Error::Domain("gamma = 0 needs an invertible empirical covariance".into()));
        }
        let trace: f64 = c.iter().sum();
        if ((trace - n) / n).abs() > TRACE_TOL {
            return Err(Error::Domain(format!("gamma = 0 needs trace n, got {trace} for n = {n}")));
        }
        // The normalization no longer fixes μ; pick the traceless gauge.
        let mu = c.iter().map(|x| 1.0 / x).sum::<f64>() / n;
        let j = c.iter().map(|x| mu - 1.0 / x).collect();
        return Ok((mu, j));
    }
    let mu = solve_mu_star(c, alpha, gamma, tol)?;
    let j = c.iter().map(|&x| eigenvalue_unchecked(x, mu, alpha, gamma)).collect();
    Ok((mu, j))
}

/// Solves the MAP problem for an empirical covariance.
pub fn solve_map(c_emp: &DMatrix<f64>, alpha: f64, gamma: f64, tol: f64) -> Result<MapSolution> {
    validate_map_input(alpha, gamma, tol)?;
    let eig = SymmetricEigen::new(c_emp)?;
    solve_map_with_eigen(&eig, alpha, gamma, tol)
}

/// As [`solve_map`], reusing a precomputed eigendecomposition of `C_emp`.
pub fn solve_map_with_eigen(eig: &SymmetricEigen, alpha: f64, gamma: f64, tol: f64) -> Result<MapSolution> {
    let (mu_star, j_star) = solve_spectrum(&eig.values, alpha, gamma, tol)?;
    let interaction = InteractionMatrix::from_spectrum(j_star.clone(), eig.vectors.clone())?;
    Ok(MapSolution { j_star, c_emp: eig.values.clone(), mu_star, basis: eig.vectors.clone(), interaction, gamma, alpha, penalty: Penalty::L2 })
}

/// MAP energy `−(α/2) Σ J C + α log Z(J) + (γ/4) Σ J²`, with `μ` re-solved for `J`.
pub fn map_energy(j: &InteractionMatrix, c: &DMatrix<f64>, alpha: f64, gamma: f64) -> Result<f64> {
    if c.nrows() != j.n() || c.ncols() != j.n() {
        return Err(Error::DimensionMismatch { expected: j.n(), got: c.nrows() });
    }
    let spectrum = j.spectrum()?;
    let mu = spherical::solve_lagrange_multiplier(spectrum, spherical::DEFAULT_MU_TOL)?;
    let log_z = spherical::log_partition(spectrum, mu)?;
    Ok(-0.5 * alpha * linalg::frobenius_inner(j.entries(), c) + alpha * log_z + 0.25 * gamma * j.frobenius_sq())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use rand::Rng as _;

    #[test]
    fn eigenvalue_examples() {
        let j = inferred_eigenvalue(1.0, 2.0, 1.0, 1.0).unwrap();
        assert!((j - (3.0 - 5f64.sqrt()) / 2.0).abs() < 1e-15);
        assert!((j * j - 3.0 * j + 1.0).abs() < 1e-14);
        let j = inferred_eigenvalue(1.0, 2.0, 1.0, 1e-6).unwrap();
        assert!((j - 1.0).abs() < 1e-5);
        assert_eq!(inferred_eigenvalue(0.5, 3.0, 1.0, 0.0).unwrap(), 1.0);
        assert!(inferred_eigenvalue(0.0, 3.0, 1.0, 0.0).is_err());
        assert!(inferred_eigenvalue(1.0, 3.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn both_forms_agree() {
        let mut r = rng::seeded(2);
        for _ in 0..1000 {
            let c: f64 = r.random_range(0.0..5.0);
            let mu = r.random_range(-3.0..5.0);
            let a = r.random_range(0.1..10.0);
            let g = r.random_range(0.01..10.0);
            let naive = (a * c + g * mu - ((a * c - g * mu).powi(2) + 4.0 * a * g).sqrt()) / (2.0 * g);
            let stable = eigenvalue_unchecked(c, mu, a, g);
            assert!((naive - stable).abs() < 1e-9 * (1.0 + naive.abs()));
            let gap = inverse_gap(c, mu, a, g);
            assert!((gap * (mu - stable) - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn eigenvalue_increasing_in_mu() {
        let mut r = rng::seeded(3);
        for _ in 0..200 {
            let c = r.random_range(0.0..4.0);
            let mu = r.random_range(-2.0..4.0);
            let a = r.random_range(0.1..10.0);
            let g = r.random_range(0.01..10.0);
            let h = 1e-6;
            let d = eigenvalue_unchecked(c, mu + h, a, g) - eigenvalue_unchecked(c, mu - h, a, g);
            assert!(d > 0.0);
        }
    }

    #[test]
    fn residual_limits_and_monotone() {
        let c = [3.0, 1.0, 0.5, 0.0];
        assert!((norm_residual(1e9, &c, 2.0, 0.5) - 1.0).abs() < 1e-6);
        let mut r = rng::seeded(4);
        for _ in 0..20 {
            let c: Vec<f64> = (0..8).map(|_| r.random_range(0.0..3.0)).collect();
            let a = r.random_range(0.1..10.0);
            let g = r.random_range(0.01..10.0);
            let mut prev = f64::NEG_INFINITY;
            for i in 0..100 {
                let mu = -5.0 + 0.1 * i as f64;
                let v = norm_residual(mu, &c, a, g);
                assert!(v > prev && v < 1.0);
                prev = v;
            }
        }
    }

    #[test]
    fn identity_gives_zero_couplings() {
        for &(a, g) in &[(1.0, 1.0), (0.1, 5.0), (10.0, 0.01)] {
            let sol = solve_map(&DMatrix::identity(5, 5), a, g, 1e-14).unwrap();
            assert!((sol.mu_star - 1.0).abs() < 1e-10);
            assert!(sol.interaction.entries().amax() < 1e-10);
        }
    }

    #[test]
    fn strong_penalty_underfits() {
        let c = DMatrix::from_row_slice(3, 3, &[1.5, 0.3, 0.0, 0.3, 1.0, -0.2, 0.0, -0.2, 0.5]);
        let sol = solve_map(&c, 1.0, 1e6, 1e-14).unwrap();
        assert!(sol.interaction.frobenius_sq().sqrt() < 1e-3);
        assert!((sol.mu_star - 1.0).abs() < 1e-3);
    }

    #[test]
    fn two_by_two_against_direct_minimization() {
        let c = DMatrix::from_row_slice(2, 2, &[1.5, 0.0, 0.0, 0.5]);
        let sol = solve_map(&c, 1.0, 1.0, 1e-14).unwrap();
        sol.check_invariants(1e-8).unwrap();
        // In the diagonal basis the energy depends on (j1, j2) only; minimize it by
        // a coarse-to-fine grid search as an independent check.
        let energy = |j1: f64, j2: f64| {
            let j = InteractionMatrix::new(DMatrix::from_row_slice(2, 2, &[j1, 0.0, 0.0, j2])).unwrap();
            map_energy(&j, &c, 1.0, 1.0).unwrap()
        };
        let (mut b1, mut b2) = (0.0, 0.0);
        let mut width = 2.0;
        for _ in 0..40 {
            let mut best = (f64::INFINITY, b1, b2);
            for i in -10..=10 {
                for k in -10..=10 {
                    let (x, y) = (b1 + width * i as f64 / 10.0, b2 + width * k as f64 / 10.0);
                    let e = energy(x, y);
                    if e < best.0 {
                        best = (e, x, y);
                    }
                }
            }
            b1 = best.1;
            b2 = best.2;
            width *= 0.5;
        }
        assert!((b1 - sol.j_star[0]).abs() < 1e-6, "{b1} vs {:?}", sol.j_star);
        assert!((b2 - sol.j_star[1]).abs() < 1e-6, "{b2} vs {:?}", sol.j_star);
    }

    #[test]
    fn zero_gamma_branch() {
        let c = DMatrix::from_row_slice(2, 2, &[1.5, 0.0, 0.0, 0.5]);
        let sol = solve_map(&c, 2.0, 0.0, 1e-12).unwrap();
        let cs = sol.covariance_spectrum();
        assert!((cs[0] - 1.5).abs() < 1e-12 && (cs[1] - 0.5).abs() < 1e-12);
        assert!(sol.j_star.iter().sum::<f64>().abs() < 1e-12);
        let singular = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.0]);
        assert!(solve_map(&singular, 1.0, 0.0, 1e-12).is_err());
        let wrong_trace = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 1.0]);
        assert!(solve_map(&wrong_trace, 1.0, 0.0, 1e-12).is_err());
    }

    #[test]
    fn rank_deficient_covariance_is_fine() {
        let x = nalgebra::DVector::from_vec(vec![1.0, -1.0, 2.0, 0.5]);
        let c = &x * x.transpose();
        let c = &c * (4.0 / c.trace());
        let sol = solve_map(&c, 0.25, 2.0, 1e-14).unwrap();
        sol.check_invariants(1e-8).unwrap();
        // The three zero modes share one inferred eigenvalue.
        assert!((sol.j_star[1] - sol.j_star[3]).abs() < 1e-10);
    }
}
