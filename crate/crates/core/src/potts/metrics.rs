//! Likelihoods and Kullback–Leibler divergences of inferred Potts models.

use crate::error::{Error, Result};
use crate::likelihoods::LikelihoodTriple;

use super::mcmc::{mcmc_sample, PottsSampleSet};
use super::partition::{enumerate, exact_log_z};
use super::PottsParams;

/// Mean and standard error of `−E(x) − log Z` over a sample set.
pub fn mean_log_likelihood(params: &PottsParams, samples: &PottsSampleSet, log_z: f64) -> Result<(f64, f64)> {
    samples.check_against(params)?;
    let v: Vec<f64> = samples.iter().map(|x| params.field_sum(x) + params.coupling_sum(x)).collect();
    let m = v.len() as f64;
    let mean = v.iter().sum::<f64>() / m;
    let var = if v.len() > 1 { v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0) } else { 0.0 };
    Ok((mean - log_z, (var / m).sqrt()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PottsLikelihoods {
    /// Per-site values.
    pub triple: LikelihoodTriple,
    /// Per-site standard errors of train, test and generated.
    pub stderr: [f64; 3],
}

/// Train, test and generated likelihoods of `inferred`, each divided by `n`.
/// `gen` should be sampled from `inferred` itself.
pub fn potts_likelihoods(
    inferred: &PottsParams,
    train: &PottsSampleSet,
    test: &PottsSampleSet,
    gen: &PottsSampleSet,
    log_z: f64,
    gamma: f64,
) -> Result<PottsLikelihoods> {
    let n = inferred.n() as f64;
    let (tr, tr_se) = mean_log_likelihood(inferred, train, log_z)?;
    let (te, te_se) = mean_log_likelihood(inferred, test, log_z)?;
    let (ge, ge_se) = mean_log_likelihood(inferred, gen, log_z)?;
    Ok(PottsLikelihoods {
        triple: LikelihoodTriple { l_train: tr / n, l_test: te / n, l_gen: ge / n, gamma, alpha: train.p() as f64 / n },
        stderr: [tr_se / n, te_se / n, ge_se / n],
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KlMethod {
    /// Enumerates the state space.
    Exact,
    /// Averages over samples of the inferred model with both log-partitions supplied.
    MonteCarlo { samples: usize, burn_in: usize, thinning: usize, seed: u64, log_z_inferred: f64, log_z_truth: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KlEstimate {
    pub value: f64,
    /// Zero for exact enumeration.
    pub stderr: f64,
}

/// `KL(inferred ‖ truth) = E_inf[E_tr − E_inf] − log Z_inf + log Z_tr`.
pub fn kl_divergence(inferred: &PottsParams, truth: &PottsParams, method: KlMethod) -> Result<KlEstimate> {
    if inferred.n() != truth.n() || inferred.q() != truth.q() {
        return Err(Error::DimensionMismatch { expected: truth.n(), got: inferred.n() });
    }
    let gap = |x: &[u8]| -(truth.field_sum(x) + truth.coupling_sum(x)) + inferred.field_sum(x) + inferred.coupling_sum(x);
    match method {
        KlMethod::Exact => {
            let log_z_inf = exact_log_z(inferred)?;
            let log_z_tr = exact_log_z(truth)?;
            let mut acc = 0.0;
            enumerate(inferred, |x, s| acc += (s - log_z_inf).exp() * gap(x))?;
            // −E_inf(x) − (−E_tr(x)) averaged under the inferred model.
            let value = acc - log_z_inf + log_z_tr;
            Ok(KlEstimate { value: value.max(0.0), stderr: 0.0 })
        }
        KlMethod::MonteCarlo { samples, burn_in, thinning, seed, log_z_inferred, log_z_truth } => {
            let set = mcmc_sample(inferred, samples, burn_in, thinning, seed)?;
            let v: Vec<f64> = set.iter().map(gap).collect();
            let m = v.len() as f64;
            let mean = v.iter().sum::<f64>() / m;
            let var = if v.len() > 1 { v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0) } else { 0.0 };
            Ok(KlEstimate { value: mean - log_z_inferred + log_z_truth, stderr: (var / m).sqrt() })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potts::generate_er_potts;

    #[test]
    fn kl_zero_and_positive() {
        let a = generate_er_potts(5, 3, 2.0, 1.0, 1.0, 1).unwrap();
        assert!(kl_divergence(&a, &a, KlMethod::Exact).unwrap().value < 1e-12);
        // Gauge changes leave the distribution unchanged.
        assert!(kl_divergence(&a.zero_sum_gauge(), &a, KlMethod::Exact).unwrap().value < 1e-10);
        let b = generate_er_potts(5, 3, 2.0, 1.0, 1.0, 2).unwrap();
        assert!(kl_divergence(&b, &a, KlMethod::Exact).unwrap().value > 0.0);
    }

    #[test]
    fn independent_sites_closed_form() {
        let inf = PottsParams::new(1, 2, vec![0.0, 1.0], vec![], vec![]).unwrap();
        let tr = PottsParams::zeros(1, 2).unwrap();
        let p1 = 1f64.exp() / (1.0 + 1f64.exp());
        let expected = p1 * (2.0 * p1).ln() + (1.0 - p1) * (2.0 * (1.0 - p1)).ln();
        assert!((kl_divergence(&inf, &tr, KlMethod::Exact).unwrap().value - expected).abs() < 1e-12);
    }

    #[test]
    fn monte_carlo_agrees_with_exact() {
        let a = generate_er_potts(6, 3, 2.0, 1.0, 1.0, 3).unwrap();
        let b = generate_er_potts(6, 3, 2.0, 1.0, 1.0, 4).unwrap();
        let exact = kl_divergence(&a, &b, KlMethod::Exact).unwrap().value;
        let mc = kl_divergence(
            &a,
            &b,
            KlMethod::MonteCarlo {
                samples: 20_000,
                burn_in: 200,
                thinning: 5,
                seed: 5,
                log_z_inferred: exact_log_z(&a).unwrap(),
                log_z_truth: exact_log_z(&b).unwrap(),
            },
        )
        .unwrap();
        assert!((mc.value - exact).abs() < 3.0 * mc.stderr + 1e-3, "{} ± {} vs {exact}", mc.value, mc.stderr);
    }

    #[test]
    fn likelihoods_per_site() {
        let a = generate_er_potts(5, 3, 2.0, 1.0, 1.0, 1).unwrap();
        let s = mcmc_sample(&a, 500, 50, 2, 2).unwrap();
        let lz = exact_log_z(&a).unwrap();
        let l = potts_likelihoods(&a, &s, &s, &s, lz, 0.1).unwrap();
        assert_eq!(l.triple.l_train, l.triple.l_test);
        assert!(l.triple.l_train < 0.0 && l.stderr[0] > 0.0);
        assert!((l.triple.alpha - 100.0).abs() < 1e-12);
    }
}
