use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use walker_core::sim::ControllerKind;

#[derive(Debug, Parser)]
#[command(name = "walker", version, about = "Smart-walker steering: calibrate, simulate, replay and analyze")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a profile from per-direction shoulder-angle means.
    Calibrate(CalibrateArgs),
    /// Run simulated trials and write one CSV log per trial.
    Simulate(SimulateArgs),
    /// Replay keypoint and torque streams through the fuzzy controller.
    Infer(InferArgs),
    /// Compare conventional and fuzzy trial logs.
    Analyze(AnalyzeArgs),
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("source").required(true).args(["means", "trials"])))]
pub struct CalibrateArgs {
    /// Means file with `left`, `straight`, `right` and optional
    /// `torque.left`, `torque.straight`, `torque.right` lines.
    #[arg(long)]
    pub means: Option<PathBuf>,
    /// Trial CSV logs to take per-direction angle means from.
    #[arg(long, num_args = 1..)]
    pub trials: Vec<PathBuf>,
    /// Profile to take the remaining settings from.
    #[arg(long)]
    pub base: Option<PathBuf>,
    /// Where to write the calibrated profile.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ControllerChoice {
    Conventional,
    Fuzzy,
    Both,
}

impl ControllerChoice {
    pub fn kinds(self) -> Vec<ControllerKind> {
        match self {
            ControllerChoice::Conventional => vec![ControllerKind::Conventional],
            ControllerChoice::Fuzzy => vec![ControllerKind::Fuzzy],
            ControllerChoice::Both => ControllerKind::BOTH.to_vec(),
        }
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Scenario file; the built-in 4 m / 90 degree right-turn course if omitted.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ControllerChoice::Both)]
    pub controller: ControllerChoice,
    /// Profile file; reference-user defaults if omitted.
    #[arg(long)]
    pub profile: Option<PathBuf>,
    /// Base seed; trial k uses seed + k.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Trials per controller.
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u32).range(1..))]
    pub trials: u32,
    /// Output directory, created if missing.
    #[arg(long)]
    pub out: PathBuf,
    /// Run trials on the current thread only.
    #[arg(long)]
    pub sequential: bool,
}

#[derive(Debug, Args)]
pub struct InferArgs {
    /// Profile file; reference-user defaults if omitted.
    #[arg(long)]
    pub profile: Option<PathBuf>,
    /// Keypoint JSON-lines file, or `-` for standard input.
    #[arg(long)]
    pub keypoints: PathBuf,
    /// Torque CSV with header `t,fx_N,tauz_Nm`.
    #[arg(long)]
    pub torque: PathBuf,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Directory of `{scenario}_{controller}_{seed}_{k}.csv` logs.
    #[arg(long)]
    pub runs: PathBuf,
    /// Report CSV path; the text table and heading plot data are written
    /// next to it.
    #[arg(long)]
    pub report: PathBuf,
}
