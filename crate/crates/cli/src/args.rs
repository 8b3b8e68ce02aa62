use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::commands;
use crate::config::RunConfig;
use crate::error::CliResult;

#[derive(Debug, Parser)]
#[command(
    name = "broadcd",
    version,
    about = "Pixelwise change detection with a broad learning network"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Generate a synthetic ref/test/mask triple into --out DIR
    Synth,
    /// Train a model on a labelled pair and write it to --out
    Train,
    /// Write the change map of a pair to --out
    Predict,
    /// Score a change map against --mask
    Evaluate,
    /// Train and score a grid of settings, writing CSV to --out or stdout
    Sweep,
}

/// Flags shared by every subcommand. Values are parsed by [`RunConfig::apply`]
/// so the command line and config files accept identical syntax.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// key = value file applied before the command-line flags
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[arg(long = "ref", global = true, value_name = "PNG")]
    pub ref_path: Option<String>,
    #[arg(long, global = true, value_name = "PNG")]
    pub test: Option<String>,
    #[arg(long, global = true, value_name = "PNG")]
    pub mask: Option<String>,
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<String>,
    #[arg(long, global = true, value_name = "JSON")]
    pub model: Option<String>,
    /// Append the evaluation row to this CSV
    #[arg(long, global = true, value_name = "FILE")]
    pub csv: Option<String>,
    /// Precomputed change map to evaluate
    #[arg(long, global = true, value_name = "PNG")]
    pub pred: Option<String>,
    #[arg(long, global = true, value_name = "A:B")]
    pub ir: Option<String>,
    #[arg(long, global = true, value_name = "randover|smote")]
    pub strategy: Option<String>,
    #[arg(long, global = true, value_name = "N")]
    pub minority_target: Option<String>,
    #[arg(long, global = true, value_name = "K")]
    pub smote_k: Option<String>,
    #[arg(long, global = true, value_name = "N")]
    pub layers: Option<String>,
    #[arg(long, global = true, value_name = "R")]
    pub compression: Option<String>,
    #[arg(long, global = true, value_name = "N")]
    pub first_layer_width: Option<String>,
    #[arg(long, global = true, value_name = "E")]
    pub afs_epsilon: Option<String>,
    #[arg(long, global = true, value_name = "K")]
    pub cv_folds: Option<String>,
    #[arg(long, global = true, value_name = "L")]
    pub ridge_lambda: Option<String>,
    #[arg(long, global = true, value_name = "W")]
    pub l1_weight: Option<String>,
    #[arg(long, global = true, value_name = "F")]
    pub train_fraction: Option<String>,
    #[arg(long, global = true, value_name = "S")]
    pub seed: Option<String>,
    /// Evaluate only on the held-out split
    #[arg(long, global = true)]
    pub holdout: bool,
    #[arg(long, global = true, value_name = "A:B,...")]
    pub irs: Option<String>,
    #[arg(long, global = true, value_name = "NAME,...")]
    pub strategies: Option<String>,
    #[arg(long, global = true, value_name = "N,...")]
    pub layer_counts: Option<String>,
    #[arg(long, global = true, value_name = "R,...")]
    pub compressions: Option<String>,
    #[arg(long, global = true, value_name = "PX")]
    pub width: Option<String>,
    #[arg(long, global = true, value_name = "PX")]
    pub height: Option<String>,
    /// Changed rectangle for synth
    #[arg(long, global = true, value_name = "X,Y,W,H")]
    pub rect: Option<String>,
    /// Gaussian noise sigma for synth
    #[arg(long, global = true, value_name = "SIGMA")]
    pub noise: Option<String>,
    /// Intensity shift inside the rectangle for synth
    #[arg(long, global = true, value_name = "D")]
    pub delta: Option<String>,
}

impl Flags {
    fn pairs(&self) -> Vec<(&'static str, &str)> {
        let all = [
            ("ref", &self.ref_path),
            ("test", &self.test),
            ("mask", &self.mask),
            ("out", &self.out),
            ("model", &self.model),
            ("csv", &self.csv),
            ("pred", &self.pred),
            ("ir", &self.ir),
            ("strategy", &self.strategy),
            ("minority-target", &self.minority_target),
            ("smote-k", &self.smote_k),
            ("layers", &self.layers),
            ("compression", &self.compression),
            ("first-layer-width", &self.first_layer_width),
            ("afs-epsilon", &self.afs_epsilon),
            ("cv-folds", &self.cv_folds),
            ("ridge-lambda", &self.ridge_lambda),
            ("l1-weight", &self.l1_weight),
            ("train-fraction", &self.train_fraction),
            ("seed", &self.seed),
            ("irs", &self.irs),
            ("strategies", &self.strategies),
            ("layer-counts", &self.layer_counts),
            ("compressions", &self.compressions),
            ("width", &self.width),
            ("height", &self.height),
            ("rect", &self.rect),
            ("noise", &self.noise),
            ("delta", &self.delta),
        ];
        all.into_iter()
            .filter_map(|(k, v)| v.as_deref().map(|v| (k, v)))
            .collect()
    }

    /// Defaults, then the config file, then explicit flags.
    pub fn to_config(&self) -> CliResult<RunConfig> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            cfg.apply_file(path)?;
        }
        for (key, value) in self.pairs() {
            cfg.apply(key, value)?;
        }
        if self.holdout {
            cfg.holdout = true;
        }
        Ok(cfg)
    }
}

/// Runs a parsed invocation, writing console output to `out`.
pub fn run(cli: &Cli, out: &mut dyn Write) -> CliResult<()> {
    let cfg = cli.flags.to_config()?;
    match cli.command {
        Command::Synth => commands::cmd_synth(&cfg, out).map(drop),
        Command::Train => commands::cmd_train(&cfg, out).map(drop),
        Command::Predict => commands::cmd_predict(&cfg, out).map(drop),
        Command::Evaluate => commands::cmd_evaluate(&cfg, out).map(drop),
        Command::Sweep => commands::cmd_sweep(&cfg, out).map(drop),
    }
}
