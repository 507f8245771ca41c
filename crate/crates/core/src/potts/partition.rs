//! Log-partition functions: exact enumeration and annealed importance sampling.

use rand::Rng as _;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::rng;

use super::mcmc::GibbsChain;
use super::PottsParams;

/// Largest state space enumerated exactly.
pub const MAX_ENUMERATION: f64 = 1e7;

/// Effective sample size below which AIS weights are flagged as degenerate.
const MIN_ESS: f64 = 2.0;

fn state_space(params: &PottsParams) -> f64 {
    (params.q() as f64).powi(params.n() as i32)
}

/// Calls `f(x, −E(x))` for every configuration, in odometer order.
pub fn enumerate<F: FnMut(&[u8], f64)>(params: &PottsParams, mut f: F) -> Result<()> {
    let size = state_space(params);
    if size > MAX_ENUMERATION {
        return Err(Error::StateSpaceTooLarge(size));
    }
    let (n, q) = (params.n(), params.q() as u8);
    let mut x = vec![0u8; n];
    loop {
        f(&x, params.field_sum(&x) + params.coupling_sum(&x));
        let mut i = n;
        loop {
            if i == 0 {
                return Ok(());
            }
            i -= 1;
            x[i] += 1;
            if x[i] < q {
                break;
            }
            x[i] = 0;
        }
    }
}

/// Running log-sum-exp accumulator.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LogSumExp {
    max: f64,
    sum: f64,
}

impl LogSumExp {
    pub(crate) fn new() -> Self {
        Self { max: f64::NEG_INFINITY, sum: 0.0 }
    }

    pub(crate) fn push(&mut self, v: f64) {
        if v > self.max {
            self.sum = self.sum * (self.max - v).exp() + 1.0;
            self.max = v;
        } else {
            self.sum += (v - self.max).exp();
        }
    }

    pub(crate) fn value(&self) -> f64 {
        self.max + self.sum.ln()
    }
}

/// `log Σ_x exp(−E(x))` by enumeration; fails when `qⁿ > 10⁷`.
pub fn exact_log_z(params: &PottsParams) -> Result<f64> {
    let mut acc = LogSumExp::new();
    enumerate(params, |_, s| acc.push(s))?;
    Ok(acc.value())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AisResult {
    pub estimate: f64,
    /// Jackknife standard error over chains.
    pub stderr: f64,
    /// Effective number of chains, `(Σw)²/Σw²`.
    pub ess: f64,
    pub degenerate: bool,
}

/// Log-partition of the fields-only model.
fn base_log_z(params: &PottsParams) -> f64 {
    let q = params.q();
    params
        .fields()
        .chunks_exact(q)
        .map(|h| {
            let mut acc = LogSumExp::new();
            h.iter().for_each(|&v| acc.push(v));
            acc.value()
        })
        .sum()
}

fn log_mean_exp(v: &[f64]) -> f64 {
    let mut acc = LogSumExp::new();
    v.iter().for_each(|&x| acc.push(x));
    acc.value() - (v.len() as f64).ln()
}

/// One AIS run: exact draw from the fields-only model, then `sweeps` Gibbs sweeps per
/// temperature on a linear schedule in the coupling strength.
fn ais_chain(params: &PottsParams, temperatures: usize, sweeps: usize, seed: u64) -> f64 {
    let mut r = rng::seeded(seed);
    let q = params.q();
    let x: Vec<u8> = params
        .fields()
        .chunks_exact(q)
        .map(|h| {
            let max = h.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let w: Vec<f64> = h.iter().map(|v| (v - max).exp()).collect();
            let mut u = r.random::<f64>() * w.iter().sum::<f64>();
            for (a, &wa) in w.iter().enumerate() {
                if u < wa {
                    return a as u8;
                }
                u -= wa;
            }
            (q - 1) as u8
        })
        .collect();
    let mut chain = GibbsChain::from_state(params, x, r);
    let steps = temperatures - 1;
    let mut log_w = 0.0;
    for k in 1..=steps {
        let beta = k as f64 / steps as f64;
        log_w += params.coupling_sum(chain.state()) / steps as f64;
        chain.set_beta(beta);
        for _ in 0..sweeps {
            chain.sweep();
        }
    }
    log_w
}

/// Annealed importance sampling estimate of `log Z` with `chains` independent runs.
pub fn ais_log_z(params: &PottsParams, temperatures: usize, chains: usize, sweeps_per_temp: usize, seed: u64) -> Result<AisResult> {
    if temperatures < 2 || chains < 2 || sweeps_per_temp == 0 {
        return Err(invalid("AIS needs at least two temperatures, two chains and one sweep per temperature"));
    }
    let log_w: Vec<f64> = (0..chains).into_par_iter().map(|c| ais_chain(params, temperatures, sweeps_per_temp, rng::derive_seed(seed, c as u64))).collect();
    let base = base_log_z(params);
    let estimate = base + log_mean_exp(&log_w);

    let m = chains as f64;
    let loo: Vec<f64> = (0..chains)
        .map(|k| {
            let rest: Vec<f64> = log_w.iter().enumerate().filter(|&(i, _)| i != k).map(|(_, &v)| v).collect();
            log_mean_exp(&rest)
        })
        .collect();
    let loo_mean = loo.iter().sum::<f64>() / m;
    let stderr = ((m - 1.0) / m * loo.iter().map(|v| (v - loo_mean).powi(2)).sum::<f64>()).sqrt();

    let max = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = log_w.iter().map(|v| (v - max).exp()).collect();
    let ess = w.iter().sum::<f64>().powi(2) / w.iter().map(|v| v * v).sum::<f64>();
    let degenerate = ess < MIN_ESS;
    if degenerate {
        log::warn!("AIS weights degenerate: effective sample size {ess:.2}");
    }
    if !estimate.is_finite() {
        return Err(Error::Degenerate("AIS estimate is not finite".into()));
    }
    Ok(AisResult { estimate, stderr, ess, degenerate })
}
