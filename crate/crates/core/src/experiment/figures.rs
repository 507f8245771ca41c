//! Desk-scale presets for the figures: each writes CSV data, a summary and an SVG
//! into `<out>/fig<N>/`.

use std::path::{Path, PathBuf};

use nalgebra::DVector;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::gamma::{self, sample_theta, small_alpha_prediction, Regime, ScanContext};
use crate::io::{fmt_f64, Summary, Table};

use super::config::{ExperimentConfig, Format, GeneratorConfig, GeneratorKind, OutputConfig, PenaltyKind, PosteriorConfig, SamplingConfig, ScanConfig};
use super::runner::{gaussian_instance, likelihood_plot, per_seed, run_posterior, scan_instance, Artifacts, SeedScan, Writer};
use super::svg::{Plot, Series, Style};

pub const FIGURES: [u32; 6] = [2, 4, 5, 6, 8, 9];

#[derive(Debug, Clone)]
pub struct FigureOptions {
    /// Overrides the preset seeds.
    pub seeds: Option<Vec<u64>>,
    pub formats: Vec<Format>,
}

impl Default for FigureOptions {
    fn default() -> Self {
        Self { seeds: None, formats: vec![Format::Csv, Format::Svg] }
    }
}

impl FigureOptions {
    fn seeds(&self, default: &[u64]) -> Vec<u64> {
        self.seeds.clone().unwrap_or_else(|| default.to_vec())
    }
}

fn goe(n: usize, sigma: f64) -> GeneratorConfig {
    GeneratorConfig { kind: GeneratorKind::Goe, n, sigma, w: None, d: None, q: None }
}

fn preset_hash(fig: u32, description: &str) -> String {
    let digest = Sha256::digest(format!("figure {fig}\n{description}").as_bytes());
    hex::encode(digest)[..16].to_string()
}

fn nan(x: Option<f64>) -> f64 {
    x.unwrap_or(f64::NAN)
}

fn row(t: &mut Table, label: &str, values: &[f64]) {
    let mut r = vec![label.to_string()];
    r.extend(values.iter().map(|&v| fmt_f64(v)));
    t.rows.push(r);
}

/// Runs the preset for `figure` and returns the written files.
pub fn reproduce_figure(figure: u32, out: &Path, opts: &FigureOptions) -> Result<Artifacts> {
    let dir: PathBuf = out.join(format!("fig{figure}"));
    match figure {
        2 => figure2(&dir, opts),
        4 => figure4(&dir, opts),
        5 => figure5(&dir, opts),
        6 => figure6(&dir, opts),
        8 => figure8(&dir, opts),
        9 => figure9(&dir, opts),
        _ => Err(Error::Config(format!("no preset for figure {figure}; available: {FIGURES:?}"))),
    }
}

/// Likelihoods against `γ` at four sampling ratios.
fn figure2(dir: &Path, opts: &FigureOptions) -> Result<Artifacts> {
    let (n, sigma, alphas) = (100, 0.5, [1.0, 3.0, 10.0, 100.0]);
    let seeds = opts.seeds(&[1]);
    let grid = gamma::default_grid();
    let mut w = Writer::new(dir, preset_hash(2, &format!("n={n} sigma={sigma} alphas={alphas:?} seeds={seeds:?}")), &opts.formats)?;
    let mut summary = Summary::default();
    let mut plots = Vec::new();
    let mut failed = Vec::new();
    for alpha in alphas {
        let p = (alpha * n as f64) as usize;
        let (done, f) = per_seed(&seeds, |s| scan_instance(&gaussian_instance(&goe(n, sigma), p, true, s)?, PenaltyKind::L2, &grid))?;
        failed.extend(f);
        for (seed, s) in &done {
            w.table(&format!("scan_alpha{alpha}_seed{seed}.csv"), s.table.clone())?;
            summary.push_f64(format!("alpha.{alpha}.seed.{seed}.gamma_opt"), s.gamma_opt);
            summary.push_f64(format!("alpha.{alpha}.seed.{seed}.gamma_cross"), s.gamma_cross);
            summary.push_f64(format!("alpha.{alpha}.seed.{seed}.gamma_cross_prediction"), Some(s.prediction));
        }
        let (seed, s) = &done[0];
        plots.push(likelihood_plot(format!("alpha = {alpha}, seed {seed}"), &s.rows, Some(s), "gamma"));
    }
    w.summary("summary.txt", &summary)?;
    w.plot("fig2.svg", &plots)?;
    w.artifacts.failed_seeds = failed;
    Ok(w.artifacts)
}

/// `γ^opt`, `γ^cross` and the likelihood gap against `α` for several `σ`.
fn figure4(dir: &Path, opts: &FigureOptions) -> Result<Artifacts> {
    let (n, sigmas, alphas) = (100, [0.3, 0.5, 1.0], [1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0]);
    let seeds = opts.seeds(&[1, 2, 3]);
    let grid = gamma::default_grid();
    let mut w = Writer::new(dir, preset_hash(4, &format!("n={n} sigmas={sigmas:?} alphas={alphas:?} seeds={seeds:?}")), &opts.formats)?;
    let mut table = Table::new(&["sigma", "alpha", "seed", "gamma_opt", "gamma_cross", "prediction", "delta_l"]);
    let mut gammas = Plot::new("optimal and crossing regularization", "alpha", "gamma");
    gammas.log_x = true;
    gammas.log_y = true;
    let mut gap = Plot::new("likelihood gap at gamma_opt", "alpha", "delta L");
    gap.log_x = true;
    let mut summary = Summary::default();
    let mut failed = Vec::new();
    for sigma in sigmas {
        let mut opt = Vec::new();
        let mut cross = Vec::new();
        let mut pred = Vec::new();
        let mut dl = Vec::new();
        for alpha in alphas {
            let p = (alpha * n as f64) as usize;
            let (done, f) = per_seed(&seeds, |s| scan_instance(&gaussian_instance(&goe(n, sigma), p, true, s)?, PenaltyKind::L2, &grid))?;
            failed.extend(f);
            for (seed, s) in &done {
                row(&mut table, &fmt_f64(sigma), &[alpha, *seed as f64, nan(s.gamma_opt), nan(s.gamma_cross), s.prediction, nan(s.delta_l)]);
            }
            let mean = |f: &dyn Fn(&SeedScan) -> Option<f64>| {
                let v: Vec<f64> = done.iter().filter_map(|(_, s)| f(s)).collect();
                (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
            };
            let (o, c, pr, d) = (mean(&|s| s.gamma_opt), mean(&|s| s.gamma_cross), mean(&|s| Some(s.prediction)), mean(&|s| s.delta_l));
            summary.push_f64(format!("sigma.{sigma}.alpha.{alpha}.gamma_opt"), o);
            summary.push_f64(format!("sigma.{sigma}.alpha.{alpha}.gamma_cross"), c);
            summary.push_f64(format!("sigma.{sigma}.alpha.{alpha}.prediction"), pr);
            opt.push((alpha, nan(o)));
            cross.push((alpha, nan(c)));
            pred.push((alpha, nan(pr)));
            dl.push((alpha, nan(d)));
        }
        gammas.series.push(Series::new(format!("cross, sigma {sigma}"), cross, Style::Line));
        gammas.series.push(Series::new(format!("opt, sigma {sigma}"), opt, Style::Markers));
        gammas.series.push(Series::new(format!("n/sum J^2, sigma {sigma}"), pred, Style::Dashed));
        gap.series.push(Series::new(format!("sigma {sigma}"), dl, Style::Line));
    }
    w.table("fig4.csv", table)?;
    w.summary("summary.txt", &summary)?;
    w.plot("fig4.svg", &[gammas, gap])?;
    w.artifacts.failed_seeds = failed;
    Ok(w.artifacts)
}

/// Band and ring-chain couplings: `γ^cross` against `α` and the infinite-sampling prediction.
fn figure5(dir: &Path, opts: &FigureOptions) -> Result<Artifacts> {
    let (n, sigma, alphas) = (200, 0.5, [2.0, 5.0, 10.0, 20.0, 50.0, 100.0]);
    let seeds = opts.seeds(&[1]);
    let grid = gamma::default_grid();
    let structures = [
        ("band", GeneratorConfig { kind: GeneratorKind::Band, n, sigma, w: Some(10), d: None, q: None }),
        ("ring", GeneratorConfig { kind: GeneratorKind::Ring, n, sigma, w: None, d: None, q: None }),
    ];
    let mut w = Writer::new(dir, preset_hash(5, &format!("n={n} sigma={sigma} w=10 alphas={alphas:?} seeds={seeds:?}")), &opts.formats)?;
    let mut table = Table::new(&["structure", "alpha", "seed", "gamma_opt", "gamma_cross", "prediction"]);
    let mut plot = Plot::new("structured couplings", "alpha", "gamma");
    plot.log_x = true;
    plot.log_y = true;
    let mut summary = Summary::default();
    let mut failed = Vec::new();
    for (name, g) in &structures {
        let mut cross = Vec::new();
        let mut opt = Vec::new();
        let mut pred = Vec::new();
        for alpha in alphas {
            let p = (alpha * n as f64) as usize;
            let (done, f) = per_seed(&seeds, |s| scan_instance(&gaussian_instance(g, p, true, s)?, PenaltyKind::L2, &grid))?;
            failed.extend(f);
            for (seed, s) in &done {
                row(&mut table, name, &[alpha, *seed as f64, nan(s.gamma_opt), nan(s.gamma_cross), s.prediction]);
                summary.push_f64(format!("{name}.alpha.{alpha}.seed.{seed}.gamma_cross"), s.gamma_cross);
                summary.push_f64(format!("{name}.alpha.{alpha}.seed.{seed}.prediction"), Some(s.prediction));
            }
            let (_, s) = &done[0];
            cross.push((alpha, nan(s.gamma_cross)));
            opt.push((alpha, nan(s.gamma_opt)));
            pred.push((alpha, s.prediction));
        }
        plot.series.push(Series::new(format!("{name} cross"), cross, Style::Line));
        plot.series.push(Series::new(format!("{name} opt"), opt, Style::Markers));
        plot.series.push(Series::new(format!("{name} n/sum J^2"), pred, Style::Dashed));
    }
    w.table("fig5.csv", table)?;
    w.summary("summary.txt", &summary)?;
    w.plot("fig5.svg", &[plot])?;
    w.artifacts.failed_seeds = failed;
    Ok(w.artifacts)
}

/// L1 regularization: likelihoods against `γ1`, then `γ1^opt` and `γ1^cross` against `α`.
fn figure6(dir: &Path, opts: &FigureOptions) -> Result<Artifacts> {
    let (n, sigma, alpha_a, alphas) = (50, 0.5, 4.0, [1.0, 2.0, 4.0, 8.0, 16.0]);
    let seeds = opts.seeds(&[1]);
    let grid = gamma::log_grid(1e-3, 1e1, 41)?;
    let mut w = Writer::new(dir, preset_hash(6, &format!("n={n} sigma={sigma} alphas={alphas:?} seeds={seeds:?}")), &opts.formats)?;
    let mut summary = Summary::default();
    let mut failed = Vec::new();
    let mut plots = Vec::new();

    let p = (alpha_a * n as f64) as usize;
    let (done, f) = per_seed(&seeds, |s| scan_instance(&gaussian_instance(&goe(n, sigma), p, true, s)?, PenaltyKind::L1, &grid))?;
    failed.extend(f);
    for (seed, s) in &done {
        w.table(&format!("l1_scan_alpha{alpha_a}_seed{seed}.csv"), s.table.clone())?;
    }
    let (seed, s) = &done[0];
    plots.push(likelihood_plot(format!("L1, alpha = {alpha_a}, seed {seed}"), &s.rows, Some(s), "gamma1"));

    let mut table = Table::new(&["alpha", "seed", "gamma_opt", "gamma_cross"]);
    let mut b = Plot::new("L1 optimal and crossing regularization", "alpha", "gamma1");
    b.log_x = true;
    b.log_y = true;
    let mut opt = Vec::new();
    let mut cross = Vec::new();
    for alpha in alphas {
        let p = (alpha * n as f64) as usize;
        let (done, f) = per_seed(&seeds, |s| scan_instance(&gaussian_instance(&goe(n, sigma), p, true, s)?, PenaltyKind::L1, &grid))?;
        failed.extend(f);
        for (seed, s) in &done {
            table.push_floats(&[alpha, *seed as f64, nan(s.gamma_opt), nan(s.gamma_cross)]);
            summary.push_f64(format!("alpha.{alpha}.seed.{seed}.gamma_opt"), s.gamma_opt);
            summary.push_f64(format!("alpha.{alpha}.seed.{seed}.gamma_cross"), s.gamma_cross);
        }
        opt.push((alpha, nan(done[0].1.gamma_opt)));
        cross.push((alpha, nan(done[0].1.gamma_cross)));
    }
    b.series.push(Series::new("opt", opt, Style::Markers));
    b.series.push(Series::new("cross", cross, Style::Line));
    plots.push(b);
    w.table("fig6.csv", table)?;
    w.summary("summary.txt", &summary)?;
    w.plot("fig6.svg", &plots)?;
    w.artifacts.failed_seeds = failed;
    Ok(w.artifacts)
}

/// Single-sample regime: per-sample `γ^cross` against the overlap `θ` and its prediction.
fn figure8(dir: &Path, opts: &FigureOptions) -> Result<Artifacts> {
    let (n, samples) = (500, 20);
    let regimes = [("disordered", 0.5, Regime::Disordered), ("ferro", 3.0, Regime::Ferro)];
    let seeds = opts.seeds(&[1]);
    let grid = gamma::log_grid(1e-4, 1e3, 71)?;
    let mut w = Writer::new(dir, preset_hash(8, &format!("n={n} samples={samples} regimes=0.5,3 seeds={seeds:?}")), &opts.formats)?;
    let mut table = Table::new(&["regime", "seed", "sample", "theta", "gamma_cross", "gamma_opt", "prediction"]);
    let mut summary = Summary::default();
    let mut plots = Vec::new();
    let mut failed = Vec::new();
    for (name, sigma, regime) in regimes {
        let (done, f) = per_seed(&seeds, |seed| {
            let inst = gaussian_instance(&goe(n, sigma), samples, false, seed)?;
            (0..samples)
                .map(|k| {
                    let x = DVector::from_vec(inst.samples.row(k));
                    let theta = sample_theta(&x, &inst.model.covariance, true)?;
                    let u = &x / x.norm();
                    let c = &u * u.transpose() * n as f64;
                    let ctx = ScanContext::new(&c, &inst.model.covariance, 1.0 / n as f64)?;
                    Ok([
                        theta,
                        nan(gamma::find_gamma_cross(&ctx, &grid)?),
                        nan(gamma::find_gamma_opt(&ctx, &grid)?),
                        nan(small_alpha_prediction(theta, n, regime)?),
                    ])
                })
                .collect::<Result<Vec<[f64; 4]>>>()
        })?;
        failed.extend(f);
        let mut measured = Vec::new();
        let mut predicted = Vec::new();
        let mut rel = Vec::new();
        for (seed, rows) in &done {
            for (k, r) in rows.iter().enumerate() {
                row(&mut table, name, &[*seed as f64, k as f64, r[0], r[1], r[2], r[3]]);
                measured.push((r[0], r[1]));
                predicted.push((r[0], r[3]));
                if r[1].is_finite() && r[3].is_finite() {
                    rel.push(((r[1] - r[3]) / r[3]).abs());
                }
            }
        }
        rel.sort_by(f64::total_cmp);
        summary.push_f64(format!("{name}.median_relative_error"), rel.get(rel.len() / 2).copied());
        predicted.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut p = Plot::new(format!("{name}, sigma = {sigma}"), "theta", "gamma_cross");
        p.log_y = true;
        p.series.push(Series::new("measured", measured, Style::Markers));
        p.series.push(Series::new("prediction", predicted, Style::Line));
        plots.push(p);
    }
    w.table("fig8.csv", table)?;
    w.summary("summary.txt", &summary)?;
    w.plot("fig8.svg", &plots)?;
    w.artifacts.failed_seeds = failed;
    Ok(w.artifacts)
}

/// Posterior sampling at three inverse temperatures.
fn figure9(dir: &Path, opts: &FigureOptions) -> Result<Artifacts> {
    let n = 20;
    let cfg = ExperimentConfig {
        generator: goe(n, 0.5),
        sampling: SamplingConfig { alpha: Some(5.0), p: None, seeds: opts.seeds(&[1]), rescale_trace: true },
        scan: ScanConfig::default(),
        outputs: OutputConfig { directory: None, formats: opts.formats.clone() },
        potts: None,
        posterior: Some(PosteriorConfig {
            gamma: 5.0,
            betas: [100.0, 1000.0, 10_000.0].iter().map(|b| b * n as f64).collect(),
            steps: 40_000,
            proposal_scale: None,
            proposal_sparsity: crate::posterior::DEFAULT_SPARSITY,
        }),
    };
    run_posterior(&cfg, dir)
}
