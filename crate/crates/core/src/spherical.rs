//! The spherical (Gaussian vectors) model.
//!
//! A symmetric interaction matrix `J` defines the covariance `C = (μI − J)⁻¹`, where
//! the multiplier `μ` enforces `Tr C = n`. This module holds the matrix types, the
//! multiplier solve, the log-partition function and the three ground-truth
//! generators (GOE, random band, deterministic ring chain).

use std::sync::OnceLock;

use nalgebra::DMatrix;
use rand_distr::{Distribution, Normal};

use crate::error::{invalid, Error, Result};
use crate::linalg::{self, SymmetricEigen};
use crate::rng;
use crate::roots::brent_root;

/// Default absolute tolerance on the normalization residual.
pub const DEFAULT_MU_TOL: f64 = 1e-12;

/// Bracket expansion stops once the upper bound exceeds this many eigenvalue spreads.
pub const DEFAULT_BRACKET_CAP: f64 = 1e6;

/// Symmetric coupling matrix with a lazily cached eigendecomposition.
#[derive(Debug, Clone)]
pub struct InteractionMatrix {
    entries: DMatrix<f64>,
    eigen: OnceLock<SymmetricEigen>,
}

impl InteractionMatrix {
    /// Wraps a symmetric matrix. The lower triangle is mirrored from the upper one,
    /// so the stored matrix is exactly symmetric.
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        if !entries.is_square() {
            return Err(invalid("interaction matrix must be square"));
        }
        if entries.iter().any(|x| !x.is_finite()) {
            return Err(invalid("interaction matrix has non-finite entries"));
        }
        if !linalg::is_symmetric(&entries, 1e-10) {
            return Err(invalid("interaction matrix is not symmetric"));
        }
        let n = entries.nrows();
        let mut entries = entries;
        for j in 0..n {
            for i in (j + 1)..n {
                entries[(i, j)] = entries[(j, i)];
            }
        }
        Ok(Self { entries, eigen: OnceLock::new() })
    }

    /// Builds `V diag(values) Vᵀ` and keeps the decomposition as the cache.
    pub fn from_spectrum(values: Vec<f64>, vectors: DMatrix<f64>) -> Result<Self> {
        let eig = SymmetricEigen { values, vectors };
        let m = eig.reconstruct();
        let out = Self::new(m)?;
        let _ = out.eigen.set(eig);
        Ok(out)
    }

    /// Wraps `entries` together with a decomposition already known to match it.
    pub(crate) fn with_eigen(entries: DMatrix<f64>, eig: SymmetricEigen) -> Result<Self> {
        let out = Self::new(entries)?;
        let _ = out.eigen.set(eig);
        Ok(out)
    }

    pub fn zeros(n: usize) -> Self {
        Self { entries: DMatrix::zeros(n, n), eigen: OnceLock::new() }
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn into_entries(self) -> DMatrix<f64> {
        self.entries
    }

    pub fn eigen(&self) -> Result<&SymmetricEigen> {
        if let Some(e) = self.eigen.get() {
            return Ok(e);
        }
        let e = SymmetricEigen::new(&self.entries)?;
        let _ = self.eigen.set(e);
        Ok(self.eigen.get().expect("cache was just filled"))
    }

    /// Eigenvalues, descending.
    pub fn spectrum(&self) -> Result<&[f64]> {
        Ok(&self.eigen()?.values)
    }

    /// `Σ_ij J_ij²`.
    pub fn frobenius_sq(&self) -> f64 {
        linalg::frobenius_sq(&self.entries)
    }
}

impl PartialEq for InteractionMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.entries == other.entries
    }
}

/// `(J, μ, C)` with `C = (μI − J)⁻¹` and `Tr C = n`.
#[derive(Debug, Clone)]
pub struct SphericalModel {
    pub interaction: InteractionMatrix,
    pub mu: f64,
    pub covariance: DMatrix<f64>,
}

impl SphericalModel {
    pub fn n(&self) -> usize {
        self.interaction.n()
    }

    /// Covariance eigenvalues `1/(μ − j_k)`, descending, sharing the eigenvectors of `J`.
    pub fn covariance_spectrum(&self) -> Result<Vec<f64>> {
        Ok(self.interaction.spectrum()?.iter().map(|j| 1.0 / (self.mu - j)).collect())
    }

    pub fn log_partition(&self) -> Result<f64> {
        log_partition(self.interaction.spectrum()?, self.mu)
    }
}

/// Normalization residual `1 − (1/n) Σ_k 1/(μ − j_k)`.
pub fn normalization_residual(eigenvalues: &[f64], mu: f64) -> f64 {
    let n = eigenvalues.len() as f64;
    1.0 - eigenvalues.iter().map(|j| 1.0 / (mu - j)).sum::<f64>() / n
}

/// Solves `(1/n) Σ_k 1/(μ − j_k) = 1` for `μ > max_k j_k`.
pub fn solve_lagrange_multiplier(eigenvalues: &[f64], tol: f64) -> Result<f64> {
    solve_lagrange_multiplier_with_cap(eigenvalues, tol, DEFAULT_BRACKET_CAP)
}

pub fn solve_lagrange_multiplier_with_cap(eigenvalues: &[f64], tol: f64, cap: f64) -> Result<f64> {
    if eigenvalues.is_empty() {
        return Err(invalid("empty spectrum"));
    }
    if eigenvalues.iter().any(|x| !x.is_finite()) {
        return Err(invalid("non-finite eigenvalue"));
    }
    if !(tol > 0.0) {
        return Err(invalid("tolerance must be positive"));
    }
    let max = eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    let spread = (max - min).max(1.0);
    // Work with t = μ − max so the bracket tolerance does not scale with |max|.
    let gaps: Vec<f64> = eigenvalues.iter().map(|j| max - j).collect();
    let n = gaps.len() as f64;
    let res = |t: f64| 1.0 - gaps.iter().map(|g| 1.0 / (t + g)).sum::<f64>() / n;

    let mut lo = 1e-9;
    let mut halvings = 0;
    while res(lo) >= 0.0 {
        if res(lo) == 0.0 {
            return Ok(max + lo);
        }
        lo *= 0.5;
        halvings += 1;
        if halvings > 900 || lo == 0.0 {
            return Err(Error::NoRoot("cannot place lower bracket above the top eigenvalue".into()));
        }
    }

    // The root never exceeds max + 1, since every term of the sum is then at most 1.
    let mut hi = spread;
    while res(hi) < 0.0 {
        hi *= 2.0;
        if hi > cap * spread {
            return Err(Error::NoRoot(format!("bracket expansion exceeded {cap} spreads")));
        }
    }
    let t = brent_root(res, lo, hi, tol, 500)?;
    Ok(max + t)
}

/// `log Z = n μ/2 − ½ Σ_k log(μ − j_k)`.
pub fn log_partition(spectrum: &[f64], mu: f64) -> Result<f64> {
    let max = spectrum.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(mu > max) {
        return Err(Error::Domain(format!("mu = {mu} must exceed the top eigenvalue {max}")));
    }
    let n = spectrum.len() as f64;
    Ok(0.5 * n * mu - 0.5 * spectrum.iter().map(|j| (mu - j).ln()).sum::<f64>())
}

pub fn covariance_from_interaction(j: &InteractionMatrix, tol: f64) -> Result<SphericalModel> {
    let eig = j.eigen()?;
    let mu = solve_lagrange_multiplier(&eig.values, tol)?;
    let covariance = eig.map_spectrum(|x| 1.0 / (mu - x));
    Ok(SphericalModel { interaction: j.clone(), mu, covariance })
}

/// Symmetric matrix whose strict upper triangle is filled by `draw(i, j)`.
fn symmetric_from_upper(n: usize, mut draw: impl FnMut(usize, usize) -> f64) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = draw(i, j);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

fn circular_distance(n: usize, i: usize, j: usize) -> usize {
    let d = i.abs_diff(j);
    d.min(n - d)
}

/// GOE couplings: off-diagonal `J_ij ~ N(0, σ/√n)`, zero diagonal.
pub fn generate_goe(n: usize, sigma: f64, seed: u64) -> Result<InteractionMatrix> {
    if n < 2 {
        return Err(invalid("GOE needs n >= 2"));
    }
    if !(sigma > 0.0) {
        return Err(invalid("sigma must be positive"));
    }
    let normal = Normal::new(0.0, sigma / (n as f64).sqrt()).map_err(|e| invalid(e.to_string()))?;
    let mut r = rng::seeded(seed);
    let m = symmetric_from_upper(n, |_, _| normal.sample(&mut r));
    InteractionMatrix::new(m)
}

/// Random band matrix on a ring: couplings with circular distance `1 ≤ δ ≤ w/2`
/// are `N(0, σ/√w)`, everything else is zero.
pub fn generate_band(n: usize, w: usize, sigma: f64, seed: u64) -> Result<InteractionMatrix> {
    if w < 1 || w >= n {
        return Err(invalid(format!("band width {w} must satisfy 1 <= w < n = {n}")));
    }
    if !(sigma > 0.0) {
        return Err(invalid("sigma must be positive"));
    }
    let normal = Normal::new(0.0, sigma / (w as f64).sqrt()).map_err(|e| invalid(e.to_string()))?;
    let mut r = rng::seeded(seed);
    let m = symmetric_from_upper(n, |i, j| if in_band(n, w, i, j) { normal.sample(&mut r) } else { 0.0 });
    InteractionMatrix::new(m)
}

/// Band mask used by [`generate_band`].
pub fn in_band(n: usize, w: usize, i: usize, j: usize) -> bool {
    let d = circular_distance(n, i, j);
    d >= 1 && 2 * d <= w
}

/// Uniform nearest-neighbour ring: `J_ij = σ` iff `i` and `j` are adjacent on the ring.
pub fn generate_ring_chain(n: usize, sigma: f64) -> Result<InteractionMatrix> {
    if n < 3 {
        return Err(invalid("ring chain needs n >= 3"));
    }
    let m = symmetric_from_upper(n, |i, j| if circular_distance(n, i, j) == 1 { sigma } else { 0.0 });
    InteractionMatrix::new(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn multiplier_trivial_cases() {
        for n in [1, 3, 10] {
            let mu = solve_lagrange_multiplier(&vec![0.0; n], 1e-14).unwrap();
            assert!((mu - 1.0).abs() < 1e-12);
        }
        // Clearing denominators for {+1, -1} gives mu^2 - mu - 1 = 0.
        let mu = solve_lagrange_multiplier(&[1.0, -1.0], 1e-14).unwrap();
        let golden = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((mu - 1.6180339887).abs() < 1e-9);
        assert!(normalization_residual(&[1.0, -1.0], mu).abs() < 1e-12);
        assert!((mu - golden).abs() < 1e-12);
    }

    #[test]
    fn multiplier_rejects_bad_input() {
        assert!(solve_lagrange_multiplier(&[f64::NAN, 1.0], 1e-12).is_err());
        assert!(solve_lagrange_multiplier(&[], 1e-12).is_err());
        assert!(solve_lagrange_multiplier(&[0.0], 0.0).is_err());
    }

    #[test]
    fn multiplier_huge_offset() {
        let eigs = [1e8, 1e8 - 1.0, 1e8 - 2.0];
        let mu = solve_lagrange_multiplier(&eigs, 1e-12).unwrap();
        assert!(mu > 1e8);
        // μ itself is only representable to about 1e-8 here.
        assert!(normalization_residual(&eigs, mu).abs() < 1e-6);
        let shifted = solve_lagrange_multiplier(&[0.0, -1.0, -2.0], 1e-12).unwrap();
        assert!((mu - 1e8 - shifted).abs() < 1e-7);
    }

    #[test]
    fn residual_strictly_increasing() {
        let mut r = rng::seeded(5);
        for _ in 0..20 {
            let eigs: Vec<f64> = (0..15).map(|_| r.random_range(-2.0..2.0)).collect();
            let max = eigs.iter().copied().fold(f64::MIN, f64::max);
            let grid: Vec<f64> = (1..=100).map(|k| max + 0.01 * k as f64 * (1.0 + k as f64)).collect();
            let vals: Vec<f64> = grid.iter().map(|&m| normalization_residual(&eigs, m)).collect();
            assert!(vals.windows(2).all(|w| w[1] > w[0]));
        }
    }

    #[test]
    fn log_partition_values() {
        assert!((log_partition(&[0.0; 10], 1.0).unwrap() - 5.0).abs() < 1e-15);
        let mu = solve_lagrange_multiplier(&[1.0, -1.0], 1e-15).unwrap();
        let lz = log_partition(&[1.0, -1.0], mu).unwrap();
        // Second evaluation route: mu - ½ log(mu² - 1).
        let direct = mu - 0.5 * (mu * mu - 1.0).ln();
        assert!((lz - direct).abs() < 1e-14);
        assert!((lz - 1.377).abs() < 1e-3);
        assert!(log_partition(&[1.0], 1.0).is_err());
    }

    #[test]
    fn log_partition_shift_identity() {
        let values = [0.3, -0.2, 0.1, -0.7];
        let mu = 1.5;
        let c = 0.37;
        let shifted: Vec<f64> = values.iter().map(|x| x + c).collect();
        let a = log_partition(&values, mu).unwrap();
        let b = log_partition(&shifted, mu + c).unwrap();
        assert!((b - a - 4.0 * c / 2.0).abs() < 1e-13);
    }

    #[test]
    fn log_partition_convex_increasing_in_eigenvalues() {
        // With mu re-solved, d logZ / d j_k = 1 / (2 (mu - j_k)) > 0, and the
        // second derivative is positive.
        let mut r = rng::seeded(9);
        for _ in 0..20 {
            let eigs: Vec<f64> = (0..8).map(|_| r.random_range(-1.0..1.0)).collect();
            let k = r.random_range(0..8);
            let h = 1e-4;
            let f = |dx: f64| {
                let mut e = eigs.clone();
                e[k] += dx;
                let mu = solve_lagrange_multiplier(&e, 1e-15).unwrap();
                log_partition(&e, mu).unwrap()
            };
            let (fm, f0, fp) = (f(-h), f(0.0), f(h));
            assert!(fp > f0 && f0 > fm);
            assert!(fp - 2.0 * f0 + fm > 0.0);
        }
    }

    #[test]
    fn covariance_of_zero_coupling() {
        let m = covariance_from_interaction(&InteractionMatrix::zeros(4), 1e-12).unwrap();
        assert!((m.mu - 1.0).abs() < 1e-12);
        assert!((&m.covariance - DMatrix::identity(4, 4)).amax() < 1e-12);
    }

    #[test]
    fn covariance_contract_ring() {
        let j = generate_ring_chain(100, 0.3).unwrap();
        let m = covariance_from_interaction(&j, 1e-12).unwrap();
        assert!((m.covariance.trace() - 100.0).abs() < 1e-6 * 100.0);
        let top = j.spectrum().unwrap()[0];
        assert!(m.mu > top);
        // C (μI − J) = I
        let prod = &m.covariance * (DMatrix::identity(100, 100) * m.mu - j.entries());
        assert!((prod - DMatrix::identity(100, 100)).amax() < 1e-8);
    }

    #[test]
    fn generators_are_deterministic_and_symmetric() {
        let a = generate_goe(30, 0.5, 42).unwrap();
        let b = generate_goe(30, 0.5, 42).unwrap();
        let c = generate_goe(30, 0.5, 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        let e = a.entries();
        for i in 0..30 {
            assert_eq!(e[(i, i)], 0.0);
            for j in 0..30 {
                assert_eq!(e[(i, j)], e[(j, i)]);
            }
        }
        assert_eq!(generate_band(40, 6, 0.5, 1).unwrap(), generate_band(40, 6, 0.5, 1).unwrap());
    }

    #[test]
    fn goe_variance() {
        let j = generate_goe(1000, 0.5, 7).unwrap();
        let v = j.frobenius_sq() / 1000.0;
        assert!((v - 0.25).abs() < 0.05 * 0.25, "{v}");
    }

    #[test]
    fn band_structure() {
        assert_eq!(generate_band(20, 1, 0.5, 3).unwrap().frobenius_sq(), 0.0);
        let n = 200;
        let j = generate_band(n, 10, 0.5, 3).unwrap();
        let v = j.frobenius_sq() / n as f64;
        assert!((v - 0.25).abs() < 0.1 * 0.25, "{v}");
        let e = j.entries();
        for i in 0..n {
            for k in 0..n {
                assert_eq!(e[(i, k)] != 0.0, in_band(n, 10, i, k), "({i},{k})");
            }
        }
        assert!(generate_band(10, 10, 0.5, 1).is_err());
        assert!(generate_band(10, 0, 0.5, 1).is_err());
    }

    #[test]
    fn ring_chain_structure_and_spectrum() {
        let j = generate_ring_chain(4, 1.0).unwrap();
        for i in 0..4 {
            let row: Vec<f64> = j.entries().row(i).iter().copied().collect();
            assert_eq!(row.iter().filter(|&&x| x == 1.0).count(), 2);
            assert_eq!(row.iter().filter(|&&x| x == 0.0).count(), 2);
        }
        let (n, sigma) = (17, 0.4);
        let j = generate_ring_chain(n, sigma).unwrap();
        assert!((j.frobenius_sq() - 2.0 * n as f64 * sigma * sigma).abs() < 1e-12);
        // Circulant oracle.
        let mut expected: Vec<f64> = (0..n).map(|k| 2.0 * sigma * (2.0 * std::f64::consts::PI * k as f64 / n as f64).cos()).collect();
        expected.sort_by(|a, b| b.total_cmp(a));
        for (a, b) in j.spectrum().unwrap().iter().zip(&expected) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(generate_ring_chain(2, 1.0).is_err());
    }

    #[test]
    fn cached_spectrum_reconstructs() {
        let j = generate_goe(25, 1.0, 3).unwrap();
        let eig = j.eigen().unwrap();
        let rebuilt = eig.reconstruct();
        assert!((rebuilt - j.entries()).norm() / j.entries().norm() < 1e-10);
        let k = InteractionMatrix::from_spectrum(eig.values.clone(), eig.vectors.clone()).unwrap();
        assert!((k.entries() - j.entries()).amax() < 1e-12);
    }

    #[test]
    fn not_symmetric_rejected() {
        let mut m = DMatrix::zeros(3, 3);
        m[(0, 1)] = 1.0;
        assert!(InteractionMatrix::new(m).is_err());
    }
}
