//! Drawing centered Gaussian samples and forming the empirical covariance.

use nalgebra::DMatrix;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{invalid, Error, Result};
use crate::linalg::SymmetricEigen;
use crate::rng;
use crate::spherical::SphericalModel;

/// Eigenvalues below this are treated as a non-PSD covariance.
pub const PSD_TOLERANCE: f64 = -1e-8;

/// `p` samples of dimension `n`, one per row.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    pub data: DMatrix<f64>,
}

impl SampleSet {
    pub fn new(data: DMatrix<f64>) -> Result<Self> {
        if data.nrows() == 0 || data.ncols() == 0 {
            return Err(invalid("sample set must be non-empty"));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(invalid("samples must be finite"));
        }
        Ok(Self { data })
    }

    pub fn p(&self) -> usize {
        self.data.nrows()
    }

    pub fn n(&self) -> usize {
        self.data.ncols()
    }

    /// Sampling ratio `p / n`.
    pub fn alpha(&self) -> f64 {
        self.p() as f64 / self.n() as f64
    }

    pub fn row(&self, k: usize) -> Vec<f64> {
        self.data.row(k).iter().copied().collect()
    }
}

/// Standard normal `p × n` matrix; row `r` comes from substream `r` of `seed`.
fn standard_normal_rows(p: usize, n: usize, seed: u64) -> DMatrix<f64> {
    let mut g = DMatrix::zeros(p, n);
    for r in 0..p {
        let mut stream = rng::substream(seed, r as u64);
        for c in 0..n {
            g[(r, c)] = StandardNormal.sample(&mut stream);
        }
    }
    g
}

/// Draws `p` samples from the spherical model using the eigen square root of its
/// covariance, `C^{1/2} = V diag((μ − j_k)^{-1/2}) Vᵀ`.
pub fn sample_gaussian(model: &SphericalModel, p: usize, seed: u64) -> Result<SampleSet> {
    if p == 0 {
        return Err(invalid("need at least one sample"));
    }
    let eig = model.interaction.eigen()?;
    let mu = model.mu;
    if eig.values.iter().any(|&j| !(mu > j)) {
        return Err(Error::Domain("model multiplier does not exceed the coupling spectrum".into()));
    }
    let root = eig.map_spectrum(|j| (mu - j).sqrt().recip());
    let g = standard_normal_rows(p, model.n(), seed);
    SampleSet::new(g * root)
}

/// Draws `p` samples with an arbitrary covariance. Eigenvalues in
/// `[PSD_TOLERANCE, 0)` are clipped to zero; anything more negative is an error.
pub fn sample_from_covariance(covariance: &DMatrix<f64>, p: usize, seed: u64) -> Result<SampleSet> {
    if p == 0 {
        return Err(invalid("need at least one sample"));
    }
    let eig = SymmetricEigen::new(covariance)?;
    let scale = eig.values.first().copied().unwrap_or(0.0).abs().max(1.0);
    if let Some(&worst) = eig.values.last() {
        if worst < PSD_TOLERANCE * scale {
            return Err(Error::Domain(format!("covariance not positive semidefinite (eigenvalue {worst})")));
        }
    }
    let root = eig.map_spectrum(|c| c.max(0.0).sqrt());
    let g = standard_normal_rows(p, covariance.nrows(), seed);
    SampleSet::new(g * root)
}

/// `C_ij = (1/p) Σ_k x^k_i x^k_j`, without mean subtraction.
pub fn empirical_covariance(samples: &SampleSet) -> DMatrix<f64> {
    let x = &samples.data;
    let mut c = x.transpose() * x / samples.p() as f64;
    let n = c.nrows();
    for j in 0..n {
        for i in (j + 1)..n {
            let v = 0.5 * (c[(i, j)] + c[(j, i)]);
            c[(i, j)] = v;
            c[(j, i)] = v;
        }
    }
    c
}

/// Rescales `c` so that its trace is exactly `n`.
pub fn rescale_trace(c: &DMatrix<f64>, n: usize) -> Result<DMatrix<f64>> {
    let tr = c.trace();
    if !(tr > 0.0) {
        return Err(Error::Domain(format!("trace {tr} must be positive")));
    }
    Ok(c * (n as f64 / tr))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::symmetric_eigenvalues;
    use crate::spherical::{covariance_from_interaction, generate_goe, InteractionMatrix};

    #[test]
    fn identity_covariance_variance() {
        let model = covariance_from_interaction(&InteractionMatrix::zeros(10), 1e-12).unwrap();
        let s = sample_gaussian(&model, 100_000, 1).unwrap();
        let c = empirical_covariance(&s);
        for i in 0..10 {
            assert!((c[(i, i)] - 1.0).abs() < 0.03);
        }
        assert_eq!(s.alpha(), 10_000.0);
    }

    #[test]
    fn deterministic_per_seed() {
        let j = generate_goe(8, 0.5, 3).unwrap();
        let model = covariance_from_interaction(&j, 1e-12).unwrap();
        assert_eq!(sample_gaussian(&model, 20, 5).unwrap(), sample_gaussian(&model, 20, 5).unwrap());
        assert_ne!(sample_gaussian(&model, 20, 5).unwrap(), sample_gaussian(&model, 20, 6).unwrap());
    }

    #[test]
    fn correlated_pair() {
        let c = DMatrix::from_row_slice(2, 2, &[1.0, 0.8, 0.8, 1.0]);
        let c = rescale_trace(&c, 2).unwrap();
        let s = sample_from_covariance(&c, 100_000, 9).unwrap();
        let e = empirical_covariance(&s);
        let rho = e[(0, 1)] / (e[(0, 0)] * e[(1, 1)]).sqrt();
        assert!((rho - 0.8).abs() < 0.02 * 0.8, "{rho}");
    }

    #[test]
    fn non_psd_rejected_and_tiny_negative_clipped() {
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(sample_from_covariance(&bad, 10, 1).is_err());
        let almost = DMatrix::from_row_slice(2, 2, &[1.0, 1.0 + 1e-10, 1.0 + 1e-10, 1.0]);
        assert!(sample_from_covariance(&almost, 10, 1).is_ok());
    }

    #[test]
    fn empirical_covariance_cases() {
        let s = SampleSet::new(DMatrix::from_row_slice(1, 3, &[1.0, -2.0, 0.5])).unwrap();
        let c = empirical_covariance(&s);
        let v = [1.0, -2.0, 0.5];
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(c[(i, j)], v[i] * v[j]);
            }
        }
        let z = SampleSet::new(DMatrix::zeros(4, 3)).unwrap();
        assert_eq!(empirical_covariance(&z), DMatrix::zeros(3, 3));
        let two = SampleSet::new(DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0])).unwrap();
        assert_eq!(empirical_covariance(&two), DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 0.5]));
    }

    #[test]
    fn empirical_covariance_is_psd() {
        let j = generate_goe(15, 0.8, 4).unwrap();
        let model = covariance_from_interaction(&j, 1e-12).unwrap();
        let c = empirical_covariance(&sample_gaussian(&model, 7, 2).unwrap());
        assert!(*symmetric_eigenvalues(&c).unwrap().last().unwrap() >= -1e-10);
        assert_eq!(c.transpose(), c);
    }

    #[test]
    fn rescale_cases() {
        let c = DMatrix::<f64>::identity(3, 3) * 2.0;
        assert!((rescale_trace(&c, 3).unwrap() - DMatrix::identity(3, 3)).amax() < 1e-15);
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 3.0]));
        let r = rescale_trace(&d, 2).unwrap();
        assert_eq!(r[(0, 0)], 0.5);
        assert_eq!(r[(1, 1)], 1.5);
        let once = rescale_trace(&d, 2).unwrap();
        let twice = rescale_trace(&once, 2).unwrap();
        assert!((once - twice).amax() < 1e-15);
        assert!(rescale_trace(&DMatrix::zeros(2, 2), 2).is_err());
    }

    #[test]
    fn empirical_error_shrinks_like_inverse_sqrt_p() {
        let j = generate_goe(20, 0.5, 11).unwrap();
        let model = covariance_from_interaction(&j, 1e-12).unwrap();
        let err = |p: usize, seed: u64| {
            let c = empirical_covariance(&sample_gaussian(&model, p, seed).unwrap());
            (c - &model.covariance).norm() / model.covariance.norm()
        };
        // Average a few seeds at the small size to tame the ratio's own noise.
        let small: f64 = (0..4).map(|s| err(1_000, 100 + s)).sum::<f64>() / 4.0;
        let large = err(100_000, 7);
        let ratio = small / large;
        assert!((5.0..=20.0).contains(&ratio), "{ratio}");
    }
}
