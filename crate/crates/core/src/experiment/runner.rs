//! Config-driven experiment runs. Seeds fan out over the rayon pool; every file is
//! written from the calling thread once all seeds are done, in seed order.

use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::gamma::{self, predict_gamma_cross_infinite, ScanContext};
use crate::io::{self, Summary, Table};
use crate::lasso;
use crate::likelihoods::{likelihood_triple, true_likelihood, LikelihoodTriple};
use crate::posterior::{default_proposal_scale, metropolis_posterior, PosteriorTrace};
use crate::potts::{self, ais_log_z, exact_log_z, kl_divergence, mcmc_sample, plm_infer, potts_likelihoods, KlMethod, PottsParams, PottsSampleSet};
use crate::rng::derive_seed;
use crate::sampling::{empirical_covariance, rescale_trace, sample_gaussian, SampleSet};
use crate::spherical::{self, covariance_from_interaction, InteractionMatrix, SphericalModel};

use super::config::{ExperimentConfig, Format, GeneratorConfig, GeneratorKind, PenaltyKind, PottsConfig};
use super::svg::{self, Plot, Series, Style};

/// Salts separating the random streams drawn from one seed.
const SALT_SAMPLES: u64 = 1;
const SALT_TEST: u64 = 2;
const SALT_TRUTH_Z: u64 = 3;
const SALT_CHAIN: u64 = 4;
const SALT_GEN: u64 = 1_000;
const SALT_AIS: u64 = 2_000;
const SALT_KL: u64 = 3_000;

/// Maximum number of per-seed panels in a scan plot.
const MAX_PANELS: usize = 4;

/// Files written by a run, plus seeds that failed and were skipped.
#[derive(Debug, Clone, Default)]
pub struct Artifacts {
    pub files: Vec<PathBuf>,
    pub failed_seeds: Vec<u64>,
}

/// Output sink that stamps the config hash on everything it writes.
pub(crate) struct Writer {
    dir: PathBuf,
    hash: String,
    csv: bool,
    svg: bool,
    pub(crate) artifacts: Artifacts,
}

impl Writer {
    pub(crate) fn new(dir: &Path, hash: String, formats: &[Format]) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_path_buf(), hash, csv: formats.contains(&Format::Csv), svg: formats.contains(&Format::Svg), artifacts: Artifacts::default() })
    }

    fn for_config(cfg: &ExperimentConfig, dir: &Path) -> Result<Self> {
        Self::new(dir, cfg.hash(), &cfg.outputs.formats)
    }

    fn record(&mut self, name: &str) -> PathBuf {
        let path = self.dir.join(name);
        self.artifacts.files.push(path.clone());
        path
    }

    pub(crate) fn table(&mut self, name: &str, table: Table) -> Result<()> {
        if self.csv {
            let mut t = table;
            t.meta.insert(0, ("config_hash".into(), self.hash.clone()));
            let path = self.record(name);
            t.save(path)?;
        }
        Ok(())
    }

    pub(crate) fn summary(&mut self, name: &str, summary: &Summary) -> Result<()> {
        let mut s = Summary::default();
        s.push("config_hash", &self.hash);
        s.entries.extend(summary.entries.iter().cloned());
        let path = self.record(name);
        std::fs::write(path, s.to_text())?;
        Ok(())
    }

    pub(crate) fn text(&mut self, name: &str, body: &str) -> Result<()> {
        let path = self.record(name);
        std::fs::write(path, format!("# config_hash={}\n{body}", self.hash))?;
        Ok(())
    }

    pub(crate) fn grl1(&mut self, name: &str, m: &DMatrix<f64>) -> Result<()> {
        let path = self.record(name);
        io::save_grl1(path, m)
    }

    pub(crate) fn plot(&mut self, name: &str, plots: &[Plot]) -> Result<()> {
        if self.svg {
            let body = svg::render(plots);
            let path = self.record(name);
            std::fs::write(path, format!("<!-- config_hash={} -->\n{body}", self.hash))?;
        }
        Ok(())
    }
}

/// Successful `(seed, value)` pairs and the seeds that failed.
pub(crate) type SeedResults<T> = (Vec<(u64, T)>, Vec<u64>);

/// Runs `f` for every seed in parallel, logging and dropping failures. Errors only when
/// every seed fails.
pub(crate) fn per_seed<T: Send>(seeds: &[u64], f: impl Fn(u64) -> Result<T> + Sync) -> Result<SeedResults<T>> {
    let results: Vec<(u64, Result<T>)> = seeds.par_iter().map(|&s| (s, f(s))).collect();
    let mut ok = Vec::new();
    let mut failed = Vec::new();
    let mut last = None;
    for (s, r) in results {
        match r {
            Ok(v) => ok.push((s, v)),
            Err(e) => {
                log::error!("seed {s} failed: {e}");
                failed.push(s);
                last = Some(e);
            }
        }
    }
    if ok.is_empty() {
        return Err(last.unwrap_or_else(|| invalid("no seeds")));
    }
    Ok((ok, failed))
}

pub(crate) fn truth(g: &GeneratorConfig, seed: u64) -> Result<InteractionMatrix> {
    match g.kind {
        GeneratorKind::Goe => spherical::generate_goe(g.n, g.sigma, seed),
        GeneratorKind::Band => spherical::generate_band(g.n, g.w.unwrap_or(0), g.sigma, seed),
        GeneratorKind::Ring => spherical::generate_ring_chain(g.n, g.sigma),
        GeneratorKind::Potts => Err(Error::Config("a Gaussian run needs a goe, band or ring generator".into())),
    }
}

/// True model, samples and the empirical covariance for one seed.
pub(crate) struct GaussianInstance {
    pub j_tr: InteractionMatrix,
    pub model: SphericalModel,
    pub samples: SampleSet,
    pub c_emp: DMatrix<f64>,
    pub alpha: f64,
}

pub(crate) fn gaussian_instance(g: &GeneratorConfig, p: usize, rescale: bool, seed: u64) -> Result<GaussianInstance> {
    let j_tr = truth(g, seed)?;
    let model = covariance_from_interaction(&j_tr, spherical::DEFAULT_MU_TOL)?;
    let samples = sample_gaussian(&model, p, derive_seed(seed, SALT_SAMPLES))?;
    let c = empirical_covariance(&samples);
    let c_emp = if rescale { rescale_trace(&c, g.n)? } else { c };
    Ok(GaussianInstance { j_tr, model, samples, c_emp, alpha: p as f64 / g.n as f64 })
}

fn instance_for(cfg: &ExperimentConfig, seed: u64) -> Result<GaussianInstance> {
    gaussian_instance(&cfg.generator, cfg.sample_count(), cfg.sampling.rescale_trace, seed)
}

/// Likelihood scan of one seed with its located roots.
#[derive(Debug, Clone)]
pub struct SeedScan {
    pub rows: Vec<LikelihoodTriple>,
    pub table: Table,
    pub gamma_opt: Option<f64>,
    pub gamma_cross: Option<f64>,
    pub gamma_half: Option<f64>,
    pub half_mismatch: Option<f64>,
    pub prediction: f64,
    /// `L_test(γ^opt)` minus the likelihood of the true model on its own distribution.
    pub delta_l: Option<f64>,
}

pub(crate) fn scan_instance(inst: &GaussianInstance, penalty: PenaltyKind, grid: &[f64]) -> Result<SeedScan> {
    let prediction = predict_gamma_cross_infinite(&inst.j_tr).value;
    let l_true = true_likelihood(&inst.model)?;
    let c_tr = &inst.model.covariance;
    match penalty {
        PenaltyKind::L2 => {
            let ctx = ScanContext::new(&inst.c_emp, c_tr, inst.alpha)?.with_truth(&inst.j_tr)?;
            let scan = gamma::run_scan(&ctx, grid)?;
            let delta_l = scan.gamma_opt.map(|g| ctx.likelihoods(g).map(|l| l.l_test - l_true)).transpose()?;
            Ok(SeedScan {
                rows: scan.rows.iter().map(|r| r.likelihoods).collect(),
                table: io::scan_table(&scan.rows, inst.alpha),
                gamma_opt: scan.gamma_opt,
                gamma_cross: scan.gamma_cross,
                gamma_half: scan.gamma_half,
                half_mismatch: scan.half_mismatch,
                prediction,
                delta_l,
            })
        }
        PenaltyKind::L1 => {
            let scan = lasso::run_l1_scan(&inst.c_emp, c_tr, inst.alpha, grid)?;
            let delta_l = match scan.gamma_opt {
                Some(g) => Some(likelihood_triple(&lasso::map_l1(&inst.c_emp, inst.alpha, g)?, &inst.c_emp, c_tr)?.l_test - l_true),
                None => None,
            };
            Ok(SeedScan {
                rows: scan.rows.clone(),
                table: io::l1_scan_table(&scan, inst.alpha),
                gamma_opt: scan.gamma_opt,
                gamma_cross: scan.gamma_cross,
                gamma_half: None,
                half_mismatch: None,
                prediction,
                delta_l,
            })
        }
    }
}

pub(crate) fn likelihood_plot(title: String, rows: &[LikelihoodTriple], scan: Option<&SeedScan>, x_label: &str) -> Plot {
    let mut p = Plot::new(title, x_label, "log-likelihood");
    p.log_x = true;
    let pick = |f: fn(&LikelihoodTriple) -> f64| rows.iter().map(|r| (r.gamma, f(r))).collect::<Vec<_>>();
    p.series.push(Series::new("train", pick(|r| r.l_train), Style::Line));
    p.series.push(Series::new("test", pick(|r| r.l_test), Style::Line));
    p.series.push(Series::new("generated", pick(|r| r.l_gen), Style::Dashed));
    if let Some(s) = scan {
        if let Some(g) = s.gamma_opt {
            p.vlines.push((g, "opt".into()));
        }
        if let Some(g) = s.gamma_cross {
            p.vlines.push((g, "cross".into()));
        }
    }
    p
}

fn push_roots(summary: &mut Summary, prefix: &str, s: &SeedScan) {
    summary.push_f64(format!("{prefix}gamma_opt"), s.gamma_opt);
    summary.push_f64(format!("{prefix}gamma_cross"), s.gamma_cross);
    summary.push_f64(format!("{prefix}gamma_half"), s.gamma_half);
    summary.push_f64(format!("{prefix}half_mismatch"), s.half_mismatch);
    summary.push_f64(format!("{prefix}gamma_cross_prediction"), Some(s.prediction));
    summary.push_f64(format!("{prefix}delta_l"), s.delta_l);
}

fn mean_of(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let v: Vec<f64> = values.flatten().collect();
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

fn require_gaussian(cfg: &ExperimentConfig) -> Result<()> {
    if cfg.generator.kind == GeneratorKind::Potts {
        return Err(Error::Config("this verb needs a goe, band or ring generator".into()));
    }
    Ok(())
}

fn require_potts(cfg: &ExperimentConfig) -> Result<()> {
    if cfg.generator.kind != GeneratorKind::Potts {
        return Err(Error::Config("this verb needs the potts generator".into()));
    }
    Ok(())
}

/// Likelihood scan over the configured grid for every seed.
/// Writes `scan_seed<s>.csv`, `summary.txt` and `scan.svg`.
pub fn run_gaussian_scan(cfg: &ExperimentConfig, out: &Path) -> Result<Artifacts> {
    require_gaussian(cfg)?;
    let grid = cfg.scan.grid()?;
    let (done, failed) = per_seed(&cfg.sampling.seeds, |seed| scan_instance(&instance_for(cfg, seed)?, cfg.scan.penalty, &grid))?;

    let mut w = Writer::for_config(cfg, out)?;
    let mut summary = Summary::default();
    summary.push("n", cfg.generator.n);
    summary.push_f64("alpha", Some(cfg.alpha()));
    summary.push("penalty", format!("{:?}", cfg.scan.penalty).to_lowercase());
    let mut plots = Vec::new();
    for (seed, s) in &done {
        w.table(&format!("scan_seed{seed}.csv"), s.table.clone())?;
        push_roots(&mut summary, &format!("seed.{seed}."), s);
        if plots.len() < MAX_PANELS {
            let x = if cfg.scan.penalty == PenaltyKind::L1 { "gamma1" } else { "gamma" };
            plots.push(likelihood_plot(format!("seed {seed}, alpha {:.3}", cfg.alpha()), &s.rows, Some(s), x));
        }
    }
    summary.push_f64("mean.gamma_opt", mean_of(done.iter().map(|(_, s)| s.gamma_opt)));
    summary.push_f64("mean.gamma_cross", mean_of(done.iter().map(|(_, s)| s.gamma_cross)));
    summary.push_f64("mean.gamma_cross_prediction", mean_of(done.iter().map(|(_, s)| Some(s.prediction))));
    summary.push_f64("mean.delta_l", mean_of(done.iter().map(|(_, s)| s.delta_l)));
    summary.push("failed_seeds", failed.len());
    w.summary("summary.txt", &summary)?;
    w.plot("scan.svg", &plots)?;
    w.artifacts.failed_seeds = failed;
    Ok(w.artifacts)
}

/// Root finding only: `γ^opt`, `γ^cross`, `γ^half` and the prediction per seed, in `gammas.txt`.
pub fn run_find_gammas(cfg: &ExperimentConfig, out: &Path) -> Result<Artifacts> {
    require_gaussian(cfg)?;
    let grid = cfg.scan.grid()?;
    let (done, failed) = per_seed(&cfg.sampling.seeds, |seed| {
        let inst = instance_for(cfg, seed)?;
        match cfg.scan.penalty {
            PenaltyKind::L2 => {
                let ctx = ScanContext::new(&inst.c_emp, &inst.model.covariance, inst.alpha)?;
                let prediction = predict_gamma_cross_infinite(&inst.j_tr).value;
                Ok([gamma::find_gamma_opt(&ctx, &grid)?, gamma::find_gamma_cross(&ctx, &grid)?, gamma::find_gamma_half(&ctx, &grid)?, Some(prediction)])
            }
            PenaltyKind::L1 => {
                let s = scan_instance(&inst, PenaltyKind::L1, &grid)?;
                Ok([s.gamma_opt, s.gamma_cross, None, Some(s.prediction)])
            }
        }
    })?;
    let mut w = Writer::for_config(cfg, out)?;
    let mut summary = Summary::default();
    for (seed, [opt, cross, half, pred]) in &done {
        summary.push_f64(format!("seed.{seed}.gamma_opt"), *opt);
        summary.push_f64(format!("seed.{seed}.gamma_cross"), *cross);
        summary.push_f64(format!("seed.{seed}.gamma_half"), *half);
        summary.push_f64(format!("seed.{seed}.gamma_cross_prediction"), *pred);
    }
    w.summary("gammas.txt", &summary)?;
    w.artifacts.failed_seeds = failed;
    Ok(w.artifacts)
}

fn potts_truth(cfg: &ExperimentConfig, pc: &PottsConfig, seed: u64) -> Result<PottsParams> {
    let g = &cfg.generator;
    let (d, q) = (g.d.unwrap_or(0.0), g.q.unwrap_or(2));
    potts::generate_er_potts(g.n, q, d, pc.sigma_h2.sqrt(), pc.sigma_j2.sqrt(), seed)
}

/// Writes the true model and its samples for every seed without inferring anything.
pub fn run_generate(cfg: &ExperimentConfig, out: &Path) -> Result<Artifacts> {
    let mut w = Writer::for_config(cfg, out)?;
    if cfg.generator.kind == GeneratorKind::Potts {
        let pc = cfg.potts_settings();
        let (done, failed) = per_seed(&cfg.sampling.seeds, |seed| {
            let params = potts_truth(cfg, &pc, seed)?;
            let samples = mcmc_sample(&params, cfg.sample_count(), pc.burn_in, pc.thinning, derive_seed(seed, SALT_SAMPLES))?;
            Ok((params, samples))
        })?;
        for (seed, (params, samples)) in &done {
            w.text(&format!("model_seed{seed}.txt"), &io::potts_params_to_text(params))?;
            w.table(&format!("samples_seed{seed}.csv"), io::potts_samples_table(samples))?;
        }
        w.artifacts.failed_seeds = failed;
    } else {
        let (done, failed) = per_seed(&cfg.sampling.seeds, |seed| instance_for(cfg, seed))?;
        for (seed, inst) in &done {
            w.grl1(&format!("truth_seed{seed}.grl1"), inst.j_tr.entries())?;
            w.grl1(&format!("samples_seed{seed}.grl1"), &inst.samples.data)?;
            w.table(&format!("covariance_seed{seed}.csv"), io::matrix_table(&inst.c_emp))?;
        }
        w.artifacts.failed_seeds = failed;
    }
    Ok(w.artifacts)
}

/// One γ point of a Potts scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PottsScanRow {
    pub gamma: f64,
    pub kl: f64,
    pub kl_stderr: f64,
    /// Per-site likelihoods and their standard errors, when requested.
    pub likelihoods: Option<([f64; 3], [f64; 3])>,
}

fn log_z(params: &PottsParams, pc: &PottsConfig, seed: u64) -> Result<f64> {
    match exact_log_z(params) {
        Err(Error::StateSpaceTooLarge(_)) => Ok(ais_log_z(params, pc.ais_temps, pc.ais_chains, 1, seed)?.estimate),
        other => other,
    }
}

fn potts_seed(cfg: &ExperimentConfig, pc: &PottsConfig, grid: &[f64], seed: u64) -> Result<Vec<PottsScanRow>> {
    let truth = potts_truth(cfg, pc, seed)?;
    let n = truth.n();
    let train = mcmc_sample(&truth, cfg.sample_count(), pc.burn_in, pc.thinning, derive_seed(seed, SALT_SAMPLES))?;
    let exact = (truth.q() as f64).powi(n as i32) <= potts::partition::MAX_ENUMERATION;
    let truth_log_z = if exact { None } else { Some(log_z(&truth, pc, derive_seed(seed, SALT_TRUTH_Z))?) };
    let test: Option<PottsSampleSet> =
        if pc.likelihoods { Some(mcmc_sample(&truth, pc.eval_p, pc.burn_in, pc.thinning, derive_seed(seed, SALT_TEST))?) } else { None };
    grid.par_iter()
        .enumerate()
        .map(|(k, &g)| {
            let k = k as u64;
            let inferred = plm_infer(&train, g, pc.gamma_h_ratio * g / n as f64, potts::DEFAULT_PLM_TOL, potts::DEFAULT_PLM_MAX_ITER)?;
            let inferred_log_z = if pc.likelihoods || !exact { Some(log_z(&inferred, pc, derive_seed(seed, SALT_AIS + k))?) } else { None };
            let method = match (truth_log_z, inferred_log_z) {
                (Some(lz_tr), Some(lz_inf)) => KlMethod::MonteCarlo {
                    samples: pc.kl_samples,
                    burn_in: pc.burn_in,
                    thinning: pc.thinning,
                    seed: derive_seed(seed, SALT_KL + k),
                    log_z_inferred: lz_inf,
                    log_z_truth: lz_tr,
                },
                _ => KlMethod::Exact,
            };
            let kl = kl_divergence(&inferred, &truth, method)?;
            let likelihoods = match (&test, inferred_log_z) {
                (Some(test), Some(lz)) => {
                    let gen = mcmc_sample(&inferred, pc.eval_p, pc.burn_in, pc.thinning, derive_seed(seed, SALT_GEN + k))?;
                    let l = potts_likelihoods(&inferred, &train, test, &gen, lz, g)?;
                    Some(([l.triple.l_train, l.triple.l_test, l.triple.l_gen], l.stderr))
                }
                _ => None,
            };
            Ok(PottsScanRow { gamma: g, kl: kl.value, kl_stderr: kl.stderr, likelihoods })
        })
        .collect()
}

pub fn potts_scan_table(rows: &[PottsScanRow]) -> Table {
    let with_l = rows.first().is_some_and(|r| r.likelihoods.is_some());
    let mut cols = vec!["gamma", "kl", "kl_stderr"];
    if with_l {
        cols.extend(["l_train", "l_test", "l_gen", "l_train_stderr", "l_test_stderr", "l_gen_stderr"]);
    }
    let mut t = Table::new(&cols);
    for r in rows {
        let mut v = vec![r.gamma, r.kl, r.kl_stderr];
        if let Some((l, se)) = r.likelihoods {
            v.extend(l);
            v.extend(se);
        }
        t.push_floats(&v);
    }
    t
}

/// Grid point with the smallest KL.
pub fn kl_argmin(rows: &[PottsScanRow]) -> Option<&PottsScanRow> {
    rows.iter().filter(|r| r.kl.is_finite()).min_by(|a, b| a.kl.total_cmp(&b.kl))
}

/// PLM over the γ grid for every seed, with KL to the truth and optional likelihoods.
/// Writes `potts_scan_seed<s>.csv`, `summary.txt` and `kl.svg`.
pub fn run_potts_scan(cfg: &ExperimentConfig, out: &Path) -> Result<Artifacts> {
    require_potts(cfg)?;
    let pc = cfg.potts_settings();
    let grid = cfg.scan.grid()?;
    let (done, failed) = per_seed(&cfg.sampling.seeds, |seed| potts_seed(cfg, &pc, &grid, seed))?;

    let mut w = Writer::for_config(cfg, out)?;
    let d = cfg.generator.d.unwrap_or(0.0);
    let mut summary = Summary::default();
    summary.push("n", cfg.generator.n);
    summary.push("q", cfg.generator.q.unwrap_or(0));
    summary.push("p", cfg.sample_count());
    summary.push_f64("inverse_d", (d > 0.0).then(|| 1.0 / d));
    let mut kl_plot = Plot::new("KL divergence to the true model", "gamma", "KL");
    kl_plot.log_x = true;
    kl_plot.log_y = true;
    if d > 0.0 {
        kl_plot.vlines.push((1.0 / d, "1/d".into()));
    }
    let mut plots = Vec::new();
    for (seed, rows) in &done {
        w.table(&format!("potts_scan_seed{seed}.csv"), potts_scan_table(rows))?;
        let best = kl_argmin(rows);
        summary.push_f64(format!("seed.{seed}.gamma_kl_min"), best.map(|r| r.gamma));
        summary.push_f64(format!("seed.{seed}.kl_min"), best.map(|r| r.kl));
        kl_plot.series.push(Series::new(format!("seed {seed}"), rows.iter().map(|r| (r.gamma, r.kl)).collect(), Style::Line));
        if plots.is_empty() && rows.iter().all(|r| r.likelihoods.is_some()) {
            let triples: Vec<LikelihoodTriple> = rows
                .iter()
                .filter_map(|r| r.likelihoods.map(|(l, _)| LikelihoodTriple { l_train: l[0], l_test: l[1], l_gen: l[2], gamma: r.gamma, alpha: cfg.alpha() }))
                .collect();
            plots.push(likelihood_plot(format!("likelihoods per site, seed {seed}"), &triples, None, "gamma"));
        }
    }
    summary.push("failed_seeds", failed.len());
    plots.insert(0, kl_plot);
    w.summary("summary.txt", &summary)?;
    w.plot("kl.svg", &plots)?;
    w.artifacts.failed_seeds = failed;
    Ok(w.artifacts)
}

/// File-name tag for an inverse temperature, e.g. `2e4`.
pub fn beta_tag(beta: f64) -> String {
    format!("{beta:e}").replace('.', "p")
}

/// Metropolis chains at every configured `β` for every seed.
/// Writes `trace_seed<s>_beta<β>.csv`, `summary.txt` and `posterior.svg`.
pub fn run_posterior(cfg: &ExperimentConfig, out: &Path) -> Result<Artifacts> {
    require_gaussian(cfg)?;
    let pc = cfg.posterior.as_ref().ok_or_else(|| Error::Config("missing [posterior] section".into()))?;
    let n = cfg.generator.n;
    let scale = pc.proposal_scale.unwrap_or_else(|| default_proposal_scale(n));
    let (done, failed) = per_seed(&cfg.sampling.seeds, |seed| {
        let inst = instance_for(cfg, seed)?;
        pc.betas
            .par_iter()
            .enumerate()
            .map(|(k, &beta)| {
                let chain_seed = derive_seed(seed, SALT_CHAIN + k as u64);
                metropolis_posterior(&inst.c_emp, &inst.model.covariance, inst.alpha, pc.gamma, beta, pc.steps, scale, pc.proposal_sparsity, chain_seed)
            })
            .collect::<Result<Vec<PosteriorTrace>>>()
    })?;

    let mut w = Writer::for_config(cfg, out)?;
    let mut summary = Summary::default();
    summary.push("n", n);
    summary.push_f64("alpha", Some(cfg.alpha()));
    summary.push_f64("gamma", Some(pc.gamma));
    summary.push("steps", pc.steps);
    let panel = |title: &str, y: &str| {
        let mut p = Plot::new(title, "step", y);
        p.log_x = false;
        p
    };
    let mut train = panel("train energy", "E_train");
    let mut dist = panel("distance to MAP", "||J - J*||");
    let mut test = panel("test energy", "E_test");
    for (seed, traces) in &done {
        for t in traces {
            let tag = beta_tag(t.beta);
            w.table(&format!("trace_seed{seed}_beta{tag}.csv"), io::trace_table(t))?;
            let key = format!("seed.{seed}.beta.{tag}.");
            summary.push_f64(format!("{key}beta_over_n"), Some(t.beta / n as f64));
            summary.push_f64(format!("{key}map_train_energy"), Some(t.map_train_energy));
            summary.push_f64(format!("{key}map_test_energy"), Some(t.map_test_energy));
            let tail = pc.steps - pc.steps / 4;
            summary.push_f64(format!("{key}late_train_energy"), t.window_mean(tail, pc.steps, |r| r.train_energy));
            summary.push_f64(format!("{key}late_test_energy"), t.window_mean(tail, pc.steps, |r| r.test_energy));
            summary.push_f64(format!("{key}min_test_energy"), t.records.iter().map(|r| r.test_energy).reduce(f64::min));
            summary.push_f64(format!("{key}proposal_scale"), Some(t.proposal_scale));
            summary.push(format!("{key}failed_proposals"), t.failed_proposals);
            if *seed == done[0].0 {
                let label = format!("beta/n = {}", t.beta / n as f64);
                let pts = |f: fn(&crate::posterior::TraceRecord) -> f64| t.records.iter().map(|r| (r.step as f64, f(r))).collect();
                train.series.push(Series::new(label.clone(), pts(|r| r.train_energy), Style::Line));
                dist.series.push(Series::new(label.clone(), pts(|r| r.distance), Style::Line));
                test.series.push(Series::new(label, pts(|r| r.test_energy), Style::Line));
                if train.hlines.is_empty() {
                    train.hlines.push((t.map_train_energy, "MAP".into()));
                    test.hlines.push((t.map_test_energy, "MAP".into()));
                }
            }
        }
    }
    summary.push("failed_seeds", failed.len());
    w.summary("summary.txt", &summary)?;
    w.plot("posterior.svg", &[train, dist, test])?;
    w.artifacts.failed_seeds = failed;
    Ok(w.artifacts)
}
