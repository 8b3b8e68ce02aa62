//! Run configuration assembled from defaults, an optional `key = value`
//! file, and command-line flags (flags win).

use std::path::{Path, PathBuf};
use std::str::FromStr;

use broadcd_core::broadnet::BroadNetConfig;
use broadcd_core::resample::{ImbalanceRatio, ResampleStrategy, DEFAULT_SMOTE_K};

use crate::error::{CliError, CliResult, Stage};
use crate::synth::SynthSpec;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub ref_path: Option<PathBuf>,
    pub test_path: Option<PathBuf>,
    pub mask_path: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    /// Precomputed change map for `evaluate`.
    pub pred: Option<PathBuf>,
    pub train_fraction: f64,
    pub strategy: ResampleStrategy,
    pub ir: ImbalanceRatio,
    /// Minority size after rebalancing; defaults to the training split's own count.
    pub minority_target: Option<usize>,
    pub smote_k: usize,
    pub net: BroadNetConfig,
    pub seed: u64,
    /// Evaluate only on the held-out split.
    pub holdout: bool,
    pub irs: Vec<ImbalanceRatio>,
    pub strategies: Vec<ResampleStrategy>,
    pub layer_counts: Vec<usize>,
    pub compressions: Vec<f64>,
    pub synth: SynthSpec,
}

impl Default for RunConfig {
    fn default() -> Self {
        let ratio = |a, b| ImbalanceRatio::new(a, b).expect("valid ratio");
        RunConfig {
            ref_path: None,
            test_path: None,
            mask_path: None,
            out: None,
            model: None,
            csv: None,
            pred: None,
            train_fraction: 0.7,
            strategy: ResampleStrategy::smote(),
            ir: ratio(1, 1),
            minority_target: None,
            smote_k: DEFAULT_SMOTE_K,
            net: BroadNetConfig::default(),
            seed: 0,
            holdout: false,
            irs: [(1, 1), (2, 1), (10, 1), (50, 1), (100, 1), (250, 1)]
                .iter()
                .map(|&(a, b)| ratio(a, b))
                .collect(),
            strategies: vec![ResampleStrategy::RandomOver, ResampleStrategy::smote()],
            layer_counts: vec![3, 5],
            compressions: vec![0.9, 0.7],
            synth: SynthSpec::default(),
        }
    }
}

/// Keys accepted in config files, matching the long flag names.
pub const KEYS: &[&str] = &[
    "ref",
    "test",
    "mask",
    "out",
    "model",
    "csv",
    "pred",
    "train-fraction",
    "strategy",
    "ir",
    "minority-target",
    "smote-k",
    "layers",
    "compression",
    "first-layer-width",
    "afs-epsilon",
    "cv-folds",
    "ridge-lambda",
    "l1-weight",
    "seed",
    "holdout",
    "irs",
    "strategies",
    "layer-counts",
    "compressions",
    "width",
    "height",
    "rect",
    "noise",
    "delta",
];

fn parse<T: FromStr>(key: &str, value: &str) -> CliResult<T>
where
    T::Err: std::fmt::Display,
{
    value.trim().parse().map_err(|e| {
        CliError::invalid(
            Stage::Config,
            format!("bad value `{value}` for `{key}`: {e}"),
        )
    })
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> CliResult<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    let items: Vec<T> = value
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse(key, s))
        .collect::<CliResult<_>>()?;
    if items.is_empty() {
        return Err(CliError::invalid(
            Stage::Config,
            format!("`{key}` needs at least one value"),
        ));
    }
    Ok(items)
}

fn parse_bool(key: &str, value: &str) -> CliResult<bool> {
    match value.trim() {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        other => Err(CliError::invalid(
            Stage::Config,
            format!("bad boolean `{other}` for `{key}`"),
        )),
    }
}

impl RunConfig {
    /// Sets one field from its textual form.
    pub fn apply(&mut self, key: &str, value: &str) -> CliResult<()> {
        let path = || Some(PathBuf::from(value.trim()));
        match key {
            "ref" => self.ref_path = path(),
            "test" => self.test_path = path(),
            "mask" => self.mask_path = path(),
            "out" => self.out = path(),
            "model" => self.model = path(),
            "csv" => self.csv = path(),
            "pred" => self.pred = path(),
            "train-fraction" => self.train_fraction = parse(key, value)?,
            "strategy" => self.strategy = parse::<ResampleStrategy>(key, value)?,
            "ir" => self.ir = parse(key, value)?,
            "minority-target" => self.minority_target = Some(parse(key, value)?),
            "smote-k" => self.smote_k = parse(key, value)?,
            "layers" => self.net.max_layers = parse(key, value)?,
            "compression" => self.net.compression = parse(key, value)?,
            "first-layer-width" => self.net.first_layer_width = parse(key, value)?,
            "afs-epsilon" => self.net.afs_epsilon = parse(key, value)?,
            "cv-folds" => self.net.cv_folds = parse(key, value)?,
            "ridge-lambda" => self.net.ridge_lambda = parse(key, value)?,
            "l1-weight" => self.net.autoencoder.l1_weight = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "holdout" => self.holdout = parse_bool(key, value)?,
            "irs" => self.irs = parse_list(key, value)?,
            "strategies" => self.strategies = parse_list(key, value)?,
            "layer-counts" => self.layer_counts = parse_list(key, value)?,
            "compressions" => self.compressions = parse_list(key, value)?,
            "width" => self.synth.width = parse(key, value)?,
            "height" => self.synth.height = parse(key, value)?,
            "rect" => self.synth.rect = parse(key, value)?,
            "noise" => self.synth.noise = parse(key, value)?,
            "delta" => self.synth.delta = parse(key, value)?,
            other => {
                return Err(CliError::invalid(
                    Stage::Config,
                    format!("unknown key `{other}`"),
                ));
            }
        }
        Ok(())
    }

    /// Applies a `key = value` document; `#` starts a comment.
    pub fn apply_file_contents(&mut self, text: &str) -> CliResult<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::invalid(
                    Stage::Config,
                    format!("line {}: expected key = value", lineno + 1),
                )
            })?;
            self.apply(key.trim(), value.trim())?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> CliResult<()> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::invalid(
                Stage::Config,
                format!("cannot read config {}: {e}", path.display()),
            )
        })?;
        self.apply_file_contents(&text)
    }

    /// Strategy with the configured SMOTE neighbor count.
    pub fn resample_strategy(&self, strategy: ResampleStrategy) -> ResampleStrategy {
        strategy.with_smote_k(self.smote_k)
    }

    /// Network settings with the run seed threaded through.
    pub fn net_config(&self, seed: u64) -> BroadNetConfig {
        let mut net = self.net;
        net.seed = seed;
        net.autoencoder.seed = broadcd_core::derive_seed(seed, 0xAE);
        net
    }

    pub fn require<'a>(
        &self,
        path: &'a Option<PathBuf>,
        flag: &str,
        stage: Stage,
    ) -> CliResult<&'a Path> {
        path.as_deref()
            .ok_or_else(|| CliError::invalid(stage, format!("missing required --{flag}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_then_flags() {
        let mut cfg = RunConfig::default();
        cfg.apply_file_contents("ir = 10:1\n# comment\nlayers=3\nstrategy = randover # trailing\n")
            .unwrap();
        assert_eq!(cfg.ir.to_string(), "10:1");
        assert_eq!(cfg.net.max_layers, 3);
        assert_eq!(cfg.strategy, ResampleStrategy::RandomOver);
        cfg.apply("layers", "5").unwrap();
        assert_eq!(cfg.net.max_layers, 5);
    }

    #[test]
    fn unknown_keys_and_bad_values_rejected() {
        let mut cfg = RunConfig::default();
        let err = cfg.apply_file_contents("colour = red").unwrap_err();
        assert_eq!(err.stage, Stage::Config);
        assert!(err.to_string().contains("colour"));
        assert!(cfg.apply("ir", "ten").is_err());
        assert!(cfg.apply_file_contents("no equals sign").is_err());
        assert!(cfg.apply("compressions", "").is_err());
    }

    #[test]
    fn every_key_is_settable() {
        let samples = [
            ("ref", "a.png"),
            ("test", "b.png"),
            ("mask", "m.png"),
            ("out", "o"),
            ("model", "m.json"),
            ("csv", "r.csv"),
            ("pred", "p.png"),
            ("train-fraction", "0.6"),
            ("strategy", "smote"),
            ("ir", "2:1"),
            ("minority-target", "30"),
            ("smote-k", "3"),
            ("layers", "4"),
            ("compression", "0.7"),
            ("first-layer-width", "6"),
            ("afs-epsilon", "0.2"),
            ("cv-folds", "4"),
            ("ridge-lambda", "1e-4"),
            ("l1-weight", "0.01"),
            ("seed", "9"),
            ("holdout", "true"),
            ("irs", "1:1,10:1"),
            ("strategies", "smote"),
            ("layer-counts", "3"),
            ("compressions", "0.9"),
            ("width", "32"),
            ("height", "16"),
            ("rect", "1,2,3,4"),
            ("noise", "2.5"),
            ("delta", "40"),
        ];
        assert_eq!(samples.len(), KEYS.len());
        let mut cfg = RunConfig::default();
        for (k, v) in samples {
            assert!(KEYS.contains(&k));
            cfg.apply(k, v).unwrap();
        }
        assert_eq!(cfg.irs.len(), 2);
        assert_eq!(cfg.synth.rect.width, 3);
        assert!(cfg.holdout);
    }

    #[test]
    fn defaults_cover_full_grid() {
        let cfg = RunConfig::default();
        let cells =
            cfg.irs.len() * cfg.strategies.len() * cfg.layer_counts.len() * cfg.compressions.len();
        assert_eq!(cells, 48);
        assert_eq!(cfg.train_fraction, 0.7);
    }
}
