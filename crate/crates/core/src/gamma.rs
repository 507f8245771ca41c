//! Locating the characteristic regularization strengths.
//!
//! * `γ^opt` maximizes the test likelihood,
//! * `γ^cross` is where the test and generated likelihoods meet,
//! * `γ^half` is where the generated likelihood sits halfway between train and test.
//!
//! Every root is first bracketed on a log-spaced grid and then refined with Brent's
//! method. After one eigendecomposition of `C_emp` each evaluation costs `O(n)`.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::likelihoods::{spectral_triple, LikelihoodTriple};
use crate::linalg::{self, SymmetricEigen};
use crate::map_l2::{self, MapSolution};
use crate::roots::brent_root;
use crate::spherical::InteractionMatrix;

pub const DEFAULT_GRID_LO: f64 = 1e-3;
pub const DEFAULT_GRID_HI: f64 = 1e3;
pub const DEFAULT_GRID_POINTS: usize = 61;

/// Residual tolerance for `μ*` inside scans. Tight enough that the bracket-width
/// criterion, not the residual, ends the solve.
pub const SCAN_MU_TOL: f64 = 1e-15;

/// Residual tolerance for refining the `γ` roots.
const GAMMA_ROOT_TOL: f64 = 1e-14;
const GAMMA_ROOT_EVALS: usize = 300;

/// `points` values spaced evenly in `log γ` from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo && hi.is_finite()) || points < 2 {
        return Err(invalid("grid needs 0 < lo < hi and at least two points"));
    }
    let (a, b) = (lo.ln(), hi.ln());
    let step = (b - a) / (points - 1) as f64;
    let mut g: Vec<f64> = (0..points).map(|i| (a + step * i as f64).exp()).collect();
    g[0] = lo;
    g[points - 1] = hi;
    Ok(g)
}

pub fn default_grid() -> Vec<f64> {
    log_grid(DEFAULT_GRID_LO, DEFAULT_GRID_HI, DEFAULT_GRID_POINTS).expect("default grid is valid")
}

/// Everything needed to evaluate likelihoods and residuals at any `γ`.
#[derive(Debug, Clone)]
pub struct ScanContext {
    pub alpha: f64,
    /// Eigendecomposition of `C_emp`, eigenvalues descending.
    pub eig: SymmetricEigen,
    /// Diagonal of `C_tr` in the eigenbasis of `C_emp`.
    pub t: Vec<f64>,
    /// Diagonal of `J_tr` in the same basis, when the truth is known.
    pub truth_rot: Option<Vec<f64>>,
}

/// MAP spectrum at one `γ`.
#[derive(Debug, Clone)]
pub struct ScanPoint {
    pub gamma: f64,
    pub mu: f64,
    pub j: Vec<f64>,
}

impl ScanContext {
    pub fn new(c_emp: &DMatrix<f64>, c_tr: &DMatrix<f64>, alpha: f64) -> Result<Self> {
        Self::from_eigen(SymmetricEigen::new(c_emp)?, c_tr, alpha)
    }

    pub fn from_eigen(eig: SymmetricEigen, c_tr: &DMatrix<f64>, alpha: f64) -> Result<Self> {
        if c_tr.nrows() != eig.dim() || c_tr.ncols() != eig.dim() {
            return Err(Error::DimensionMismatch { expected: eig.dim(), got: c_tr.nrows() });
        }
        if !(alpha > 0.0) {
            return Err(invalid("alpha must be positive"));
        }
        let t = linalg::rotated_diagonal(&eig.vectors, c_tr);
        Ok(Self { alpha, eig, t, truth_rot: None })
    }

    /// Attaches the true couplings, enabling the `γ^half` diagnostic.
    pub fn with_truth(mut self, j_tr: &InteractionMatrix) -> Result<Self> {
        if j_tr.n() != self.n() {
            return Err(Error::DimensionMismatch { expected: self.n(), got: j_tr.n() });
        }
        self.truth_rot = Some(linalg::rotated_diagonal(&self.eig.vectors, j_tr.entries()));
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.eig.dim()
    }

    pub fn c(&self) -> &[f64] {
        &self.eig.values
    }

    pub fn point(&self, gamma: f64) -> Result<ScanPoint> {
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::Domain(format!("gamma = {gamma} must be positive")));
        }
        let (mu, j) = map_l2::solve_spectrum(self.c(), self.alpha, gamma, SCAN_MU_TOL)?;
        Ok(ScanPoint { gamma, mu, j })
    }

    pub fn triple(&self, p: &ScanPoint) -> Result<LikelihoodTriple> {
        spectral_triple(&p.j, p.mu, self.c(), &self.t, self.alpha, p.gamma)
    }

    pub fn likelihoods(&self, gamma: f64) -> Result<LikelihoodTriple> {
        self.triple(&self.point(gamma)?)
    }

    /// Full MAP solution, including `J*` in the original basis.
    pub fn map_solution(&self, gamma: f64) -> Result<MapSolution> {
        map_l2::solve_map_with_eigen(&self.eig, self.alpha, gamma, SCAN_MU_TOL)
    }

    fn cross_at(&self, p: &ScanPoint) -> Result<f64> {
        let sq: f64 = p.j.iter().map(|j| j * j).sum();
        if sq == 0.0 {
            return Err(Error::Degenerate("inferred couplings vanish".into()));
        }
        let num: f64 = p.j.iter().zip(self.c()).zip(&self.t).map(|((j, c), t)| j * (c - t)).sum();
        Ok(self.alpha * num / sq - p.gamma)
    }

    fn opt_at(&self, p: &ScanPoint) -> f64 {
        let w = DerivativeWorkspace::new(p, self.c(), self.alpha);
        let n = self.n() as f64;
        let cstar: Vec<f64> = p.j.iter().map(|j| 1.0 / (p.mu - j)).collect();
        let dlogz = 0.5 * n * w.d_mu_d_gamma - 0.5 * w.dj.iter().zip(&cstar).map(|(dj, cs)| (w.d_mu_d_gamma - dj) * cs).sum::<f64>();
        0.5 * w.dj.iter().zip(&self.t).map(|(dj, t)| dj * t).sum::<f64>() - dlogz
    }

    fn half_at(&self, p: &ScanPoint) -> Result<f64> {
        let l = self.triple(p)?;
        Ok(l.l_gen - 0.5 * (l.l_train + l.l_test))
    }

    /// `|Σ J*C^tr − Σ J^tr C*| / |Σ J*C^tr|`, the approximate identity expected at `γ^half`.
    pub fn half_mismatch(&self, gamma: f64) -> Result<Option<f64>> {
        let Some(truth) = &self.truth_rot else { return Ok(None) };
        let p = self.point(gamma)?;
        let a: f64 = p.j.iter().zip(&self.t).map(|(j, t)| j * t).sum();
        let b: f64 = p.j.iter().zip(truth).map(|(j, jt)| jt / (p.mu - j)).sum();
        Ok(Some((a - b).abs() / a.abs()))
    }
}

/// Per-eigenvalue terms of the `γ`-derivative of the MAP spectrum.
#[derive(Debug, Clone)]
pub struct DerivativeWorkspace {
    pub d: Vec<f64>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    /// `∂γ j*_k`.
    pub dj: Vec<f64>,
    pub d_mu_d_gamma: f64,
}

impl DerivativeWorkspace {
    /// With `x = γμ − αc` and `D = sqrt(x² + 4αγ)`:
    /// `A = ½(1 − x/D)`, `B = (μA − α/D)/γ`, `∂j = A ∂μ + B − j/γ`, and `∂μ` from
    /// differentiating the normalization.
    pub fn new(p: &ScanPoint, c: &[f64], alpha: f64) -> Self {
        let g = p.gamma;
        let n = c.len();
        let mut d = Vec::with_capacity(n);
        let mut a = Vec::with_capacity(n);
        let mut one_minus_a = Vec::with_capacity(n);
        let mut weight = Vec::with_capacity(n);
        for (&ck, &jk) in c.iter().zip(&p.j) {
            let x = g * p.mu - alpha * ck;
            let dk = (x * x + 4.0 * alpha * g).sqrt();
            // (D − x)(D + x) = 4αγ; pick the form without cancellation.
            let (ak, om) =
                if x <= 0.0 { ((dk - x) / (2.0 * dk), 2.0 * alpha * g / (dk * (dk - x))) } else { (2.0 * alpha * g / (dk * (dk + x)), (dk + x) / (2.0 * dk)) };
            let gap = p.mu - jk;
            d.push(dk);
            a.push(ak);
            one_minus_a.push(om);
            weight.push(1.0 / (gap * gap));
        }
        // (μ − j)A = α/D, hence B = A j/γ and B − j/γ = −(1 − A) j/γ.
        let b: Vec<f64> = a.iter().zip(&p.j).map(|(ak, jk)| ak * jk / g).collect();
        let num: f64 = one_minus_a.iter().zip(&p.j).zip(&weight).map(|((om, jk), w)| -om * jk / g * w).sum();
        let den: f64 = one_minus_a.iter().zip(&weight).map(|(om, w)| om * w).sum();
        let d_mu = num / den;
        let dj = a.iter().zip(&one_minus_a).zip(&p.j).map(|((ak, om), jk)| ak * d_mu - om * jk / g).collect();
        Self { d, a, b, dj, d_mu_d_gamma: d_mu }
    }
}

/// `α Σ J*(C_emp − C_tr) / Σ J*² − γ`.
pub fn cross_residual(gamma: f64, ctx: &ScanContext) -> Result<f64> {
    ctx.cross_at(&ctx.point(gamma)?)
}

/// `∂L_test/∂γ`.
pub fn opt_residual(gamma: f64, ctx: &ScanContext) -> Result<f64> {
    Ok(ctx.opt_at(&ctx.point(gamma)?))
}

/// `L_gen − (L_train + L_test)/2`.
pub fn half_residual(gamma: f64, ctx: &ScanContext) -> Result<f64> {
    ctx.half_at(&ctx.point(gamma)?)
}

/// Sign-change brackets `(i, i + 1)` of `values`; `falling_only` keeps `+ → −` changes.
fn brackets(values: &[f64], falling_only: bool) -> Vec<usize> {
    (0..values.len().saturating_sub(1))
        .filter(|&i| {
            let (a, b) = (values[i], values[i + 1]);
            if falling_only {
                a > 0.0 && b <= 0.0
            } else {
                (a > 0.0 && b <= 0.0) || (a < 0.0 && b >= 0.0)
            }
        })
        .collect()
}

fn refine<F>(f: F, grid: &[f64], i: usize) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    // Work in log γ; failures inside the bracket surface as NaN and abort Brent.
    let g = |s: f64| f(s.exp()).unwrap_or(f64::NAN);
    let s = brent_root(g, grid[i].ln(), grid[i + 1].ln(), GAMMA_ROOT_TOL, GAMMA_ROOT_EVALS)?;
    Ok(s.exp())
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.len() < 2 || grid.windows(2).any(|w| !(w[1] > w[0])) || !(grid[0] > 0.0) {
        return Err(invalid("grid must be positive and strictly increasing"));
    }
    Ok(())
}

fn pick_cross(residual: &[f64]) -> Option<usize> {
    let b = brackets(residual, false);
    if b.len() > 1 {
        log::warn!("{} sign changes of the cross residual; using the smallest gamma", b.len());
    }
    b.first().copied()
}

fn pick_opt(residual: &[f64], l_test: &[f64]) -> Option<usize> {
    let b = brackets(residual, true);
    if b.len() > 1 {
        log::warn!("{} maxima of the test likelihood; using the one nearest the grid argmax", b.len());
    }
    let argmax = l_test.iter().enumerate().fold((0, f64::NEG_INFINITY), |best, (i, &v)| if v > best.1 { (i, v) } else { best }).0;
    b.into_iter().min_by_key(|&i| (i as isize - argmax as isize).abs().min((i as isize + 1 - argmax as isize).abs()))
}

fn pick_half(residual: &[f64]) -> Option<usize> {
    let b = brackets(residual, false);
    if b.len() > 1 {
        log::warn!("{} sign changes of the half residual; using the smallest gamma", b.len());
    }
    b.first().copied()
}

/// `γ^cross`, or `None` when the test and generated likelihoods never cross on the grid.
pub fn find_gamma_cross(ctx: &ScanContext, grid: &[f64]) -> Result<Option<f64>> {
    check_grid(grid)?;
    let r: Vec<f64> = grid.par_iter().map(|&g| cross_residual(g, ctx)).collect::<Result<_>>()?;
    pick_cross(&r).map(|i| refine(|g| cross_residual(g, ctx), grid, i)).transpose()
}

/// `γ^opt`, or `None` when the test likelihood has no interior maximum on the grid.
pub fn find_gamma_opt(ctx: &ScanContext, grid: &[f64]) -> Result<Option<f64>> {
    check_grid(grid)?;
    let evals: Vec<(f64, f64)> = grid
        .par_iter()
        .map(|&g| {
            let p = ctx.point(g)?;
            Ok((ctx.opt_at(&p), ctx.triple(&p)?.l_test))
        })
        .collect::<Result<_>>()?;
    let (r, lt): (Vec<f64>, Vec<f64>) = evals.into_iter().unzip();
    pick_opt(&r, &lt).map(|i| refine(|g| opt_residual(g, ctx), grid, i)).transpose()
}

/// `γ^half`, or `None` without a bracket.
pub fn find_gamma_half(ctx: &ScanContext, grid: &[f64]) -> Result<Option<f64>> {
    check_grid(grid)?;
    let r: Vec<f64> = grid.par_iter().map(|&g| half_residual(g, ctx)).collect::<Result<_>>()?;
    pick_half(&r).map(|i| refine(|g| half_residual(g, ctx), grid, i)).transpose()
}

/// One grid row of a scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanRow {
    pub likelihoods: LikelihoodTriple,
    pub mu_star: f64,
    pub frobenius_sq: f64,
}

impl ScanRow {
    pub fn gamma(&self) -> f64 {
        self.likelihoods.gamma
    }
}

/// Likelihoods over a grid plus the located roots.
#[derive(Debug, Clone)]
pub struct GammaScan {
    pub rows: Vec<ScanRow>,
    pub gamma_opt: Option<f64>,
    pub gamma_cross: Option<f64>,
    pub gamma_half: Option<f64>,
    /// Relative mismatch of the approximate identity at `γ^half`, when the truth is known.
    pub half_mismatch: Option<f64>,
    pub theta: Option<f64>,
}

struct GridEval {
    row: ScanRow,
    cross: f64,
    opt: f64,
    half: f64,
}

/// Evaluates the grid once and locates all three roots.
pub fn run_scan(ctx: &ScanContext, grid: &[f64]) -> Result<GammaScan> {
    check_grid(grid)?;
    let evals: Vec<GridEval> = grid
        .par_iter()
        .map(|&g| {
            let p = ctx.point(g)?;
            let l = ctx.triple(&p)?;
            let frobenius_sq = p.j.iter().map(|j| j * j).sum();
            // A vanished J* only happens deep in the underfitting tail.
            let cross = ctx.cross_at(&p).unwrap_or(-g);
            Ok(GridEval {
                row: ScanRow { likelihoods: l, mu_star: p.mu, frobenius_sq },
                cross,
                opt: ctx.opt_at(&p),
                half: l.l_gen - 0.5 * (l.l_train + l.l_test),
            })
        })
        .collect::<Result<_>>()?;
    let cross: Vec<f64> = evals.iter().map(|e| e.cross).collect();
    let opt: Vec<f64> = evals.iter().map(|e| e.opt).collect();
    let half: Vec<f64> = evals.iter().map(|e| e.half).collect();
    let lt: Vec<f64> = evals.iter().map(|e| e.row.likelihoods.l_test).collect();

    let gamma_cross = pick_cross(&cross).map(|i| refine(|g| cross_residual(g, ctx), grid, i)).transpose()?;
    let gamma_opt = pick_opt(&opt, &lt).map(|i| refine(|g| opt_residual(g, ctx), grid, i)).transpose()?;
    let gamma_half = pick_half(&half).map(|i| refine(|g| half_residual(g, ctx), grid, i)).transpose()?;
    let half_mismatch = match gamma_half {
        Some(g) => ctx.half_mismatch(g)?,
        None => None,
    };
    if let Some(m) = half_mismatch {
        log::info!("gamma_half identity mismatch {m:.3e}");
    }
    Ok(GammaScan { rows: evals.into_iter().map(|e| e.row).collect(), gamma_opt, gamma_cross, gamma_half, half_mismatch, theta: None })
}

/// Infinite-sampling prediction `γ^cross ≈ n / Σ J_tr²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossPrediction {
    pub value: f64,
    /// Set when `J_tr = 0`, in which case `value` is `+∞`.
    pub infinite: bool,
}

pub fn predict_gamma_cross_infinite(j_tr: &InteractionMatrix) -> CrossPrediction {
    let sq = j_tr.frobenius_sq();
    if sq == 0.0 {
        return CrossPrediction { value: f64::INFINITY, infinite: true };
    }
    CrossPrediction { value: j_tr.n() as f64 / sq, infinite: false }
}

/// `θ = (1/n) uᵀ C_tr u` for a unit vector `u`.
pub fn overlap_theta(u: &DVector<f64>, c_tr: &DMatrix<f64>) -> Result<f64> {
    let n = c_tr.nrows();
    if u.len() != n || c_tr.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, got: u.len() });
    }
    if (u.norm() - 1.0).abs() > 1e-10 {
        return Err(invalid(format!("u must have unit norm, got {}", u.norm())));
    }
    Ok(u.dot(&(c_tr * u)) / n as f64)
}

/// `θ` for a single raw sample `x`. With `rescaled` the sample is normalized to a
/// unit vector (the trace-rescaled convention); otherwise `u = x/√n`.
pub fn sample_theta(x: &DVector<f64>, c_tr: &DMatrix<f64>, rescaled: bool) -> Result<f64> {
    let n = x.len() as f64;
    let u = if rescaled {
        let norm = x.norm();
        if norm == 0.0 {
            return Err(Error::Degenerate("zero sample".into()));
        }
        x / norm
    } else {
        x / n.sqrt()
    };
    if c_tr.nrows() != x.len() {
        return Err(Error::DimensionMismatch { expected: c_tr.nrows(), got: x.len() });
    }
    Ok(u.dot(&(c_tr * &u)) / n)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Disordered,
    Ferro,
}

/// Single-sample prediction of `γ^cross = γ^opt`; `None` means no finite crossing.
pub fn small_alpha_prediction(theta: f64, n: usize, regime: Regime) -> Result<Option<f64>> {
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(Error::Domain(format!("theta = {theta} must lie in (0, 1]")));
    }
    match regime {
        Regime::Disordered => {
            let nt = n as f64 * theta;
            Ok(if nt > 1.0 { Some(nt / (nt - 1.0)) } else { None })
        }
        Regime::Ferro => Ok(Some((1.0 - theta).powi(2))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use crate::sampling::{empirical_covariance, rescale_trace, sample_gaussian};
    use crate::spherical::{covariance_from_interaction, generate_goe, generate_ring_chain};
    use rand::Rng as _;

    fn context(n: usize, sigma: f64, alpha: f64, seed: u64) -> (ScanContext, InteractionMatrix) {
        let j = generate_goe(n, sigma, seed).unwrap();
        let model = covariance_from_interaction(&j, 1e-13).unwrap();
        let p = (alpha * n as f64).round() as usize;
        let c = rescale_trace(&empirical_covariance(&sample_gaussian(&model, p, seed + 7).unwrap()), n).unwrap();
        (ScanContext::new(&c, &model.covariance, alpha).unwrap().with_truth(&j).unwrap(), j)
    }

    #[test]
    fn grid_shape() {
        let g = default_grid();
        assert_eq!(g.len(), 61);
        assert_eq!(g[0], 1e-3);
        assert_eq!(g[60], 1e3);
        assert!((g[30] - 1.0).abs() < 1e-12);
        assert!(log_grid(1.0, 1.0, 5).is_err());
    }

    #[test]
    fn workspace_bounds_and_definition() {
        let mut r = rng::seeded(1);
        for _ in 0..200 {
            let c: Vec<f64> = (0..5).map(|_| r.random_range(0.0..3.0)).collect();
            let alpha = r.random_range(0.05..20.0);
            let gamma = 10f64.powf(r.random_range(-3.0..3.0));
            let (mu, j) = map_l2::solve_spectrum(&c, alpha, gamma, 1e-15).unwrap();
            let p = ScanPoint { gamma, mu, j };
            let w = DerivativeWorkspace::new(&p, &c, alpha);
            for k in 0..5 {
                assert!(w.d[k] >= 2.0 * (alpha * gamma).sqrt() * (1.0 - 1e-12));
                assert!((0.0..=1.0).contains(&w.a[k]));
                let b_def = (mu * w.a[k] - alpha / w.d[k]) / gamma;
                assert!((b_def - w.b[k]).abs() < 1e-8 * (1.0 + b_def.abs()));
            }
        }
    }

    #[test]
    fn opt_residual_matches_finite_difference() {
        let (ctx, _) = context(40, 0.5, 2.0, 3);
        for gamma in [0.01, 0.3, 2.0, 30.0] {
            let h = 1e-5 * gamma;
            let fd = (ctx.likelihoods(gamma + h).unwrap().l_test - ctx.likelihoods(gamma - h).unwrap().l_test) / (2.0 * h);
            let an = opt_residual(gamma, &ctx).unwrap();
            assert!((fd - an).abs() < 1e-5 * (1.0 + an.abs()), "gamma {gamma}: {fd} vs {an}");
        }
    }

    #[test]
    fn identical_covariances_never_cross() {
        let j = generate_ring_chain(12, 0.3).unwrap();
        let model = covariance_from_interaction(&j, 1e-13).unwrap();
        let ctx = ScanContext::new(&model.covariance, &model.covariance, 5.0).unwrap();
        for g in [0.01, 1.0, 100.0] {
            assert!((cross_residual(g, &ctx).unwrap() + g).abs() < 1e-9 * g.max(1.0));
        }
        assert_eq!(find_gamma_cross(&ctx, &default_grid()).unwrap(), None);
    }

    #[test]
    fn roots_satisfy_their_definitions() {
        let (ctx, _) = context(60, 0.5, 3.0, 11);
        let scan = run_scan(&ctx, &default_grid()).unwrap();
        let gc = scan.gamma_cross.unwrap();
        let l = ctx.likelihoods(gc).unwrap();
        assert!((l.l_test - l.l_gen).abs() <= 1e-8 * (1.0 + l.l_test.abs()));
        let gh = scan.gamma_half.unwrap();
        let l = ctx.likelihoods(gh).unwrap();
        assert!((l.l_gen - 0.5 * (l.l_train + l.l_test)).abs() < 1e-8 * (1.0 + l.l_train.abs()));
        let go = scan.gamma_opt.unwrap();
        let best = ctx.likelihoods(go).unwrap().l_test;
        for row in &scan.rows {
            assert!(best >= row.likelihoods.l_test - 1e-9 * (1.0 + best.abs()));
        }
        assert_eq!(find_gamma_cross(&ctx, &default_grid()).unwrap(), Some(gc));
        assert_eq!(find_gamma_opt(&ctx, &default_grid()).unwrap(), Some(go));
        assert_eq!(find_gamma_half(&ctx, &default_grid()).unwrap(), Some(gh));
    }

    #[test]
    fn predictions() {
        let ring = generate_ring_chain(10, 0.5).unwrap();
        let p = predict_gamma_cross_infinite(&ring);
        assert!((p.value - 1.0 / (2.0 * 0.25)).abs() < 1e-12);
        let z = predict_gamma_cross_infinite(&InteractionMatrix::zeros(3));
        assert!(z.infinite && z.value.is_infinite());
        let goe = generate_goe(800, 0.5, 1).unwrap();
        assert!((predict_gamma_cross_infinite(&goe).value - 4.0).abs() < 0.2);
        assert_eq!(small_alpha_prediction(0.02, 100, Regime::Disordered).unwrap(), Some(2.0));
        assert_eq!(small_alpha_prediction(1.0, 100, Regime::Ferro).unwrap(), Some(0.0));
        assert_eq!(small_alpha_prediction(0.005, 100, Regime::Disordered).unwrap(), None);
        assert!(small_alpha_prediction(0.0, 100, Regime::Ferro).is_err());
        assert!(small_alpha_prediction(1.5, 100, Regime::Ferro).is_err());
    }

    #[test]
    fn theta_cases() {
        let id = DMatrix::<f64>::identity(4, 4);
        let u = DVector::from_vec(vec![0.5, 0.5, 0.5, 0.5]);
        assert!((overlap_theta(&u, &id).unwrap() - 0.25).abs() < 1e-15);
        let c = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 1.0, 0.5, 0.5]));
        let e0 = DVector::from_vec(vec![1.0, 0.0, 0.0, 0.0]);
        assert!((overlap_theta(&e0, &c).unwrap() - 0.5).abs() < 1e-15);
        assert!(overlap_theta(&(e0 * 2.0), &c).is_err());
        let x = DVector::from_vec(vec![3.0, 0.0, 0.0, 0.0]);
        assert!((sample_theta(&x, &c, true).unwrap() - 0.5).abs() < 1e-15);
        assert!((sample_theta(&x, &c, false).unwrap() - 18.0 / 16.0).abs() < 1e-15);
    }
}
