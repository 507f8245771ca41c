//! Pairwise Potts models on sparse or dense graphs.
//!
//! Energy of a configuration `x ∈ {0..q−1}ⁿ`:
//! `E(x) = −Σ_{i<j} J_ij(x_i, x_j) − Σ_i h_i(x_i)`.

pub mod mcmc;
pub mod metrics;
pub mod partition;
pub mod plm;

use rand::Rng as _;
use rand_distr::{Distribution, Normal};

use crate::error::{invalid, Error, Result};
use crate::rng;

pub use mcmc::{mcmc_sample, GibbsChain, PottsSampleSet};
pub use metrics::{kl_divergence, potts_likelihoods, KlEstimate, KlMethod};
pub use partition::{ais_log_z, exact_log_z, AisResult};
pub use plm::{default_gamma_h, plm_infer, DEFAULT_PLM_MAX_ITER, DEFAULT_PLM_TOL};

/// Default field and coupling variances of the synthetic models.
pub const DEFAULT_VAR_H: f64 = 5.0;
pub const DEFAULT_VAR_J: f64 = 1.0;

/// One neighbor of a site: `(j, edge index, site is the first endpoint)`.
type Neighbor = (usize, usize, bool);

#[derive(Debug, Clone, PartialEq)]
pub struct PottsParams {
    n: usize,
    q: usize,
    /// `h[i * q + a]`.
    h: Vec<f64>,
    /// Edges `(i, j)` with `i < j`, sorted.
    edges: Vec<(usize, usize)>,
    /// `blocks[e * q * q + a * q + b] = J_ij(a, b)` for edge `e = (i, j)`.
    blocks: Vec<f64>,
    adjacency: Vec<Vec<Neighbor>>,
}

fn build_adjacency(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<Neighbor>> {
    let mut adj = vec![Vec::new(); n];
    for (e, &(i, j)) in edges.iter().enumerate() {
        adj[i].push((j, e, true));
        adj[j].push((i, e, false));
    }
    adj
}

impl PottsParams {
    /// Builds a model; `blocks` holds `q²` row-major entries per edge.
    pub fn new(n: usize, q: usize, h: Vec<f64>, edges: Vec<(usize, usize)>, blocks: Vec<f64>) -> Result<Self> {
        if n == 0 || !(2..=255).contains(&q) {
            return Err(invalid("need n ≥ 1 and 2 ≤ q ≤ 255"));
        }
        if h.len() != n * q {
            return Err(Error::DimensionMismatch { expected: n * q, got: h.len() });
        }
        if blocks.len() != edges.len() * q * q {
            return Err(Error::DimensionMismatch { expected: edges.len() * q * q, got: blocks.len() });
        }
        if h.iter().chain(&blocks).any(|x| !x.is_finite()) {
            return Err(invalid("parameters must be finite"));
        }
        for w in edges.windows(2) {
            if w[0] >= w[1] {
                return Err(invalid("edges must be sorted and unique"));
            }
        }
        if edges.iter().any(|&(i, j)| !(i < j && j < n)) {
            return Err(invalid("edges must satisfy i < j < n"));
        }
        let adjacency = build_adjacency(n, &edges);
        Ok(Self { n, q, h, edges, blocks, adjacency })
    }

    /// All parameters zero, no edges.
    pub fn zeros(n: usize, q: usize) -> Result<Self> {
        Self::new(n, q, vec![0.0; n * q], Vec::new(), Vec::new())
    }

    /// All parameters zero on the complete graph.
    pub fn dense_zeros(n: usize, q: usize) -> Result<Self> {
        let edges: Vec<(usize, usize)> = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect();
        let blocks = vec![0.0; edges.len() * q * q];
        Self::new(n, q, vec![0.0; n * q], edges, blocks)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn fields(&self) -> &[f64] {
        &self.h
    }

    pub fn field(&self, i: usize, a: usize) -> f64 {
        self.h[i * self.q + a]
    }

    pub fn set_field(&mut self, i: usize, a: usize, v: f64) {
        self.h[i * self.q + a] = v;
    }

    /// The `q × q` block of edge `e`, row-major in the states of its first endpoint.
    pub fn block(&self, e: usize) -> &[f64] {
        let qq = self.q * self.q;
        &self.blocks[e * qq..(e + 1) * qq]
    }

    pub fn block_mut(&mut self, e: usize) -> &mut [f64] {
        let qq = self.q * self.q;
        &mut self.blocks[e * qq..(e + 1) * qq]
    }

    pub fn edge_index(&self, i: usize, j: usize) -> Option<usize> {
        let key = if i < j { (i, j) } else { (j, i) };
        self.edges.binary_search(&key).ok()
    }

    /// `J_ij(a, b)`, with `J_ij(a, b) = J_ji(b, a)` and zero off the graph.
    pub fn coupling(&self, i: usize, j: usize, a: usize, b: usize) -> f64 {
        match self.edge_index(i, j) {
            Some(e) if i < j => self.block(e)[a * self.q + b],
            Some(e) => self.block(e)[b * self.q + a],
            None => 0.0,
        }
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    /// `n q + |E| q²`; equals `n q + n(n−1)/2 q²` for a dense model.
    pub fn parameter_count(&self) -> usize {
        self.n * self.q + self.edges.len() * self.q * self.q
    }

    fn check_config(&self, x: &[u8]) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: x.len() });
        }
        if x.iter().any(|&s| s as usize >= self.q) {
            return Err(invalid("state out of range"));
        }
        Ok(())
    }

    pub fn energy(&self, x: &[u8]) -> Result<f64> {
        self.check_config(x)?;
        Ok(-(self.field_sum(x) + self.coupling_sum(x)))
    }

    /// `Σ_i h_i(x_i)`.
    pub(crate) fn field_sum(&self, x: &[u8]) -> f64 {
        x.iter().enumerate().map(|(i, &s)| self.h[i * self.q + s as usize]).sum()
    }

    /// `Σ_{i<j} J_ij(x_i, x_j)`.
    pub(crate) fn coupling_sum(&self, x: &[u8]) -> f64 {
        let qq = self.q * self.q;
        self.edges.iter().enumerate().map(|(e, &(i, j))| self.blocks[e * qq + x[i] as usize * self.q + x[j] as usize]).sum()
    }

    /// `out[a] = h_i(a) + β Σ_j J_ij(a, x_j)`, the negative energy change of setting `x_i = a`
    /// up to a constant.
    pub(crate) fn local_fields(&self, x: &[u8], i: usize, beta: f64, out: &mut [f64]) {
        let q = self.q;
        out.copy_from_slice(&self.h[i * q..(i + 1) * q]);
        for &(j, e, first) in &self.adjacency[i] {
            let blk = &self.blocks[e * q * q..(e + 1) * q * q];
            let xj = x[j] as usize;
            if first {
                for (a, o) in out.iter_mut().enumerate() {
                    *o += beta * blk[a * q + xj];
                }
            } else {
                for (a, o) in out.iter_mut().enumerate() {
                    *o += beta * blk[xj * q + a];
                }
            }
        }
    }

    /// Energy change of setting site `i` to `a`.
    pub fn flip_delta(&self, x: &[u8], i: usize, a: usize) -> Result<f64> {
        self.check_config(x)?;
        let mut l = vec![0.0; self.q];
        self.local_fields(x, i, 1.0, &mut l);
        Ok(-(l[a] - l[x[i] as usize]))
    }

    /// Same model with every coupling multiplied by `beta`.
    pub fn scale_couplings(&self, beta: f64) -> Self {
        let mut out = self.clone();
        out.blocks.iter_mut().for_each(|x| *x *= beta);
        out
    }

    /// Zero-sum gauge: every block has zero row and column means, every field has
    /// zero mean. Energies change only by a global constant.
    pub fn zero_sum_gauge(&self) -> Self {
        let q = self.q;
        let qf = q as f64;
        let mut out = self.clone();
        for (e, &(i, j)) in self.edges.iter().enumerate() {
            let blk = self.block(e);
            let row: Vec<f64> = (0..q).map(|a| (0..q).map(|b| blk[a * q + b]).sum::<f64>() / qf).collect();
            let col: Vec<f64> = (0..q).map(|b| (0..q).map(|a| blk[a * q + b]).sum::<f64>() / qf).collect();
            let all: f64 = row.iter().sum::<f64>() / qf;
            let new = out.block_mut(e);
            for a in 0..q {
                for b in 0..q {
                    new[a * q + b] = blk[a * q + b] - row[a] - col[b] + all;
                }
            }
            for a in 0..q {
                out.h[i * q + a] += row[a] - all;
                out.h[j * q + a] += col[a] - all;
            }
        }
        for i in 0..self.n {
            let mean = out.h[i * q..(i + 1) * q].iter().sum::<f64>() / qf;
            out.h[i * q..(i + 1) * q].iter_mut().for_each(|v| *v -= mean);
        }
        out
    }

    /// `Σ_{i<j} Σ_ab J_ij(a, b)²`.
    pub fn coupling_norm_sq(&self) -> f64 {
        self.blocks.iter().map(|x| x * x).sum()
    }

    pub fn max_abs_coupling(&self) -> f64 {
        self.blocks.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn max_abs_field(&self) -> f64 {
        self.h.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

/// Erdős–Rényi Potts model: each pair is an edge with probability `d/n`; fields and
/// coupling entries are centered Gaussians with standard deviations `sigma_h` and
/// `sigma_j`.
pub fn generate_er_potts(n: usize, q: usize, d: f64, sigma_h: f64, sigma_j: f64, seed: u64) -> Result<PottsParams> {
    if n < 2 || !(0.0..(n as f64)).contains(&d) {
        return Err(invalid("need n ≥ 2 and 0 ≤ d < n"));
    }
    if !(sigma_h >= 0.0 && sigma_j >= 0.0) {
        return Err(invalid("standard deviations must be non-negative"));
    }
    let mut r = rng::seeded(seed);
    let prob = d / n as f64;
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if r.random::<f64>() < prob {
                edges.push((i, j));
            }
        }
    }
    let nh = Normal::new(0.0, sigma_h).map_err(|e| invalid(e.to_string()))?;
    let nj = Normal::new(0.0, sigma_j).map_err(|e| invalid(e.to_string()))?;
    let h: Vec<f64> = (0..n * q).map(|_| nh.sample(&mut r)).collect();
    let blocks: Vec<f64> = (0..edges.len() * q * q).map(|_| nj.sample(&mut r)).collect();
    PottsParams::new(n, q, h, edges, blocks)
}
