//! Configuration-driven experiment runs and figure presets.

pub mod config;
pub mod figures;
pub mod runner;
pub mod svg;

pub use config::{ExperimentConfig, Format, GeneratorKind, PenaltyKind};
pub use figures::{reproduce_figure, FigureOptions, FIGURES};
pub use runner::{run_find_gammas, run_gaussian_scan, run_generate, run_posterior, run_potts_scan, Artifacts};
