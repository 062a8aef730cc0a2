use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qtomo_core::Scheme;

#[derive(Parser, Debug)]
#[command(
    name = "qtomo",
    version,
    about = "Qutrit tomography from noisy photon counts"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Measurement-scheme utilities.
    Povm {
        #[command(subcommand)]
        action: PovmAction,
    },
    /// Simulate one noisy measurement run and reconstruct the state.
    Reconstruct(ReconstructArgs),
    /// Sweep the dark-count rate over a state sample and write a CSV summary.
    Sweep(SweepArgs),
    /// Draw an SVG line chart from a sweep CSV.
    Plot(PlotArgs),
}

#[derive(Subcommand, Debug)]
pub enum PovmAction {
    /// Check completeness, positivity, overlaps and informational completeness.
    Validate {
        #[arg(long, value_enum)]
        scheme: SchemeArg,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum SchemeArg {
    Sic,
    Mub,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Sic => Scheme::Sic,
            SchemeArg::Mub => Scheme::Mub,
        }
    }
}

#[derive(Args, Debug)]
pub struct ReconstructArgs {
    #[arg(long, value_enum)]
    pub scheme: SchemeArg,
    /// Mean photon number per measurement setting.
    #[arg(long, default_value_t = 10_000.0)]
    pub photons: f64,
    /// Dark-count rate p in [0, 1].
    #[arg(long, default_value_t = 0.0)]
    pub dark_rate: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub theta: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub delta: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub phi12: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub phi13: f64,
    #[arg(long, env = "QT_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub restarts: Option<usize>,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    /// JSON file with SweepConfig fields; explicit flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum, value_delimiter = ',')]
    pub schemes: Option<Vec<SchemeArg>>,
    #[arg(long, value_delimiter = ',')]
    pub photons: Option<Vec<f64>>,
    #[arg(long)]
    pub p_min: Option<f64>,
    #[arg(long)]
    pub p_max: Option<f64>,
    #[arg(long)]
    pub p_steps: Option<usize>,
    /// State grid as n_theta,n_delta,n_phi12,n_phi13.
    #[arg(long, value_delimiter = ',', num_args = 1)]
    pub grid: Option<Vec<usize>>,
    #[arg(long)]
    pub max_states: Option<usize>,
    #[arg(long, env = "QT_SEED")]
    pub seed: Option<u64>,
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub detail_out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Metric {
    Fidelity,
    Purity,
    Entropy,
}

#[derive(Args, Debug)]
pub struct PlotArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub metric: Metric,
    /// Photon mean to plot; required when the CSV holds several.
    #[arg(long)]
    pub photons: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
}
