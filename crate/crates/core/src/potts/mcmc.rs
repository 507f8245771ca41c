//! Random-scan heat-bath (Gibbs) sampling.

use rand::Rng as _;

use crate::error::{invalid, Error, Result};
use crate::rng::{self, Rng};

use super::PottsParams;

pub const DEFAULT_BURN_IN: usize = 1000;
pub const DEFAULT_THINNING: usize = 10;

/// `p` configurations of `n` sites, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PottsSampleSet {
    pub n: usize,
    pub q: usize,
    pub configs: Vec<u8>,
    pub seed: u64,
    pub burn_in: usize,
    pub thinning: usize,
}

impl PottsSampleSet {
    pub fn new(n: usize, q: usize, configs: Vec<u8>) -> Result<Self> {
        if n == 0 || configs.is_empty() || !configs.len().is_multiple_of(n) {
            return Err(invalid("configurations must form a non-empty p × n array"));
        }
        if configs.iter().any(|&s| s as usize >= q) {
            return Err(invalid("state out of range"));
        }
        Ok(Self { n, q, configs, seed: 0, burn_in: 0, thinning: 0 })
    }

    pub fn p(&self) -> usize {
        self.configs.len() / self.n
    }

    pub fn config(&self, k: usize) -> &[u8] {
        &self.configs[k * self.n..(k + 1) * self.n]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[u8]> {
        self.configs.chunks_exact(self.n)
    }

    /// First `p` configurations.
    pub fn truncate(&self, p: usize) -> Result<Self> {
        if p == 0 || p > self.p() {
            return Err(invalid("cannot truncate to that size"));
        }
        let mut out = self.clone();
        out.configs.truncate(p * self.n);
        Ok(out)
    }

    pub(crate) fn check_against(&self, params: &PottsParams) -> Result<()> {
        if self.n != params.n() {
            return Err(Error::DimensionMismatch { expected: params.n(), got: self.n });
        }
        if self.q != params.q() {
            return Err(Error::DimensionMismatch { expected: params.q(), got: self.q });
        }
        Ok(())
    }
}

/// A single Gibbs chain over the model with couplings scaled by `beta`.
#[derive(Debug, Clone)]
pub struct GibbsChain<'a> {
    params: &'a PottsParams,
    beta: f64,
    state: Vec<u8>,
    rng: Rng,
    buf: Vec<f64>,
}

impl<'a> GibbsChain<'a> {
    /// Starts from a uniformly random configuration.
    pub fn new(params: &'a PottsParams, seed: u64) -> Self {
        let mut rng = rng::seeded(seed);
        let q = params.q() as u8;
        let state = (0..params.n()).map(|_| rng.random_range(0..q)).collect();
        Self::from_state(params, state, rng)
    }

    pub fn from_state(params: &'a PottsParams, state: Vec<u8>, rng: Rng) -> Self {
        Self { params, beta: 1.0, state, rng, buf: vec![0.0; params.q()] }
    }

    pub fn state(&self) -> &[u8] {
        &self.state
    }

    pub fn set_beta(&mut self, beta: f64) {
        self.beta = beta;
    }

    /// Heat-bath update of site `i`.
    pub fn update_site(&mut self, i: usize) {
        self.params.local_fields(&self.state, i, self.beta, &mut self.buf);
        let max = self.buf.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut total = 0.0;
        for v in self.buf.iter_mut() {
            *v = (*v - max).exp();
            total += *v;
        }
        let mut u = self.rng.random::<f64>() * total;
        let mut pick = self.buf.len() - 1;
        for (a, &w) in self.buf.iter().enumerate() {
            if u < w {
                pick = a;
                break;
            }
            u -= w;
        }
        self.state[i] = pick as u8;
    }

    /// Update of a uniformly chosen site; this kernel is reversible.
    pub fn step(&mut self) {
        let i = self.rng.random_range(0..self.params.n());
        self.update_site(i);
    }

    /// `n` random-site updates.
    pub fn sweep(&mut self) {
        for _ in 0..self.params.n() {
            self.step();
        }
    }
}

/// Records one configuration every `thinning` sweeps after `burn_in` sweeps.
pub fn mcmc_sample(params: &PottsParams, p: usize, burn_in: usize, thinning: usize, seed: u64) -> Result<PottsSampleSet> {
    if p == 0 || thinning == 0 {
        return Err(invalid("need p ≥ 1 and thinning ≥ 1"));
    }
    let mut chain = GibbsChain::new(params, seed);
    for _ in 0..burn_in {
        chain.sweep();
    }
    let mut configs = Vec::with_capacity(p * params.n());
    for _ in 0..p {
        for _ in 0..thinning {
            chain.sweep();
        }
        configs.extend_from_slice(chain.state());
    }
    log::debug!("lag-1 autocorrelation of the energy trace: {:.3}", energy_autocorrelation(params, &configs));
    Ok(PottsSampleSet { n: params.n(), q: params.q(), configs, seed, burn_in, thinning })
}

/// Lag-1 autocorrelation of the recorded energies.
fn energy_autocorrelation(params: &PottsParams, configs: &[u8]) -> f64 {
    let e: Vec<f64> = configs.chunks_exact(params.n()).map(|x| -(params.field_sum(x) + params.coupling_sum(x))).collect();
    if e.len() < 3 {
        return 0.0;
    }
    let m = e.iter().sum::<f64>() / e.len() as f64;
    let var: f64 = e.iter().map(|v| (v - m).powi(2)).sum();
    if var == 0.0 {
        return 0.0;
    }
    e.windows(2).map(|w| (w[0] - m) * (w[1] - m)).sum::<f64>() / var
}
