//! The five subcommands as library functions over a [`RunConfig`].

use std::fs::OpenOptions;
use std::io::Write;
use std::path::Path;

use broadcd_core::broadnet::{self, BroadNetModel};
use broadcd_core::eval::{self, EvaluationReport, SweepCell, SWEEP_HEADER};
use broadcd_core::imagery::{self, LabelGrid, LabeledDataset, PATTERN_DIM};
use broadcd_core::resample::{self, ImbalanceRatio, ResampleStrategy, MINORITY};
use broadcd_core::{derive_seed, Error, Execution};

use crate::config::RunConfig;
use crate::error::{AtStage, CliError, CliResult, Stage};
use crate::synth::SynthPair;

const SPLIT_TAG: u64 = 0x5_0117;
const RESAMPLE_TAG: u64 = 0x5_A3F1;

/// Pixel patterns of one labelled pair, with the image size.
#[derive(Debug, Clone)]
pub struct PreparedPair {
    pub width: usize,
    pub height: usize,
    pub dataset: LabeledDataset,
}

fn out_io(path: &Path, e: std::io::Error) -> CliError {
    CliError::new(
        Stage::Output,
        Error::Io {
            path: path.to_path_buf(),
            source: e,
        },
    )
}

fn say(out: &mut dyn Write, line: std::fmt::Arguments<'_>) -> CliResult<()> {
    writeln!(out, "{line}").map_err(|e| out_io(Path::new("<stdout>"), e))
}

/// Loads ref/test/mask and extracts one labelled pattern per pixel.
pub fn prepare(cfg: &RunConfig) -> CliResult<PreparedPair> {
    let ref_path = cfg.require(&cfg.ref_path, "ref", Stage::Imagery)?;
    let test_path = cfg.require(&cfg.test_path, "test", Stage::Imagery)?;
    let mask_path = cfg.require(&cfg.mask_path, "mask", Stage::Imagery)?;
    let pair = imagery::load_image_pair(ref_path, test_path).at(Stage::Imagery)?;
    let mask = imagery::binarize_mask(mask_path).at(Stage::Imagery)?;
    let diff = imagery::difference_magnitude(&pair);
    let dataset = imagery::extract_patterns(&diff, &mask).at(Stage::Imagery)?;
    Ok(PreparedPair {
        width: pair.width(),
        height: pair.height(),
        dataset,
    })
}

/// Train/held-out split driven by the run seed.
pub fn split(
    cfg: &RunConfig,
    data: &LabeledDataset,
) -> CliResult<(LabeledDataset, LabeledDataset)> {
    imagery::split_dataset(data, cfg.train_fraction, derive_seed(cfg.seed, SPLIT_TAG))
        .at(Stage::Split)
}

/// Rebalances `train` and fits a network; `seed` drives both steps.
pub fn train_model(
    cfg: &RunConfig,
    train: &LabeledDataset,
    strategy: ResampleStrategy,
    ir: ImbalanceRatio,
    max_layers: usize,
    compression: f64,
    seed: u64,
) -> CliResult<BroadNetModel> {
    let target = cfg
        .minority_target
        .unwrap_or_else(|| train.class_count(MINORITY));
    let balanced = resample::rebalance(
        train,
        ir,
        cfg.resample_strategy(strategy),
        target,
        derive_seed(seed, RESAMPLE_TAG),
    )
    .at(Stage::Resample)?;
    let mut net = cfg.net_config(seed);
    net.max_layers = max_layers;
    net.compression = compression;
    broadnet::fit(&net, &balanced).at(Stage::Train)
}

pub fn cmd_synth(cfg: &RunConfig, out: &mut dyn Write) -> CliResult<SynthPair> {
    let dir = cfg.require(&cfg.out, "out", Stage::Synth)?;
    let pair = cfg.synth.generate(cfg.seed).at(Stage::Synth)?;
    pair.save(dir).at(Stage::Output)?;
    say(
        out,
        format_args!("wrote ref.png, test.png, mask.png to {}", dir.display()),
    )?;
    Ok(pair)
}

/// imagery → split → rebalance → fit; writes the model and prints the CV trace.
pub fn cmd_train(cfg: &RunConfig, out: &mut dyn Write) -> CliResult<BroadNetModel> {
    let model_path = cfg.require(&cfg.out, "out", Stage::Output)?;
    let prepared = prepare(cfg)?;
    let (train, _) = split(cfg, &prepared.dataset)?;
    let model = train_model(
        cfg,
        &train,
        cfg.strategy,
        cfg.ir,
        cfg.net.max_layers,
        cfg.net.compression,
        cfg.seed,
    )?;
    broadnet::save_model(&model, model_path).at(Stage::Output)?;
    for (k, (afs, width)) in model.trace().iter().zip(model.layer_widths()).enumerate() {
        say(
            out,
            format_args!("layer {} width {} cv_afs {:.2}", k + 1, width, afs),
        )?;
    }
    say(
        out,
        format_args!("model written to {}", model_path.display()),
    )?;
    Ok(model)
}

/// Per-pixel labels for the configured pair under `model`.
pub fn predict_pair(cfg: &RunConfig, model: &BroadNetModel) -> CliResult<(usize, usize, Vec<u8>)> {
    let ref_path = cfg.require(&cfg.ref_path, "ref", Stage::Imagery)?;
    let test_path = cfg.require(&cfg.test_path, "test", Stage::Imagery)?;
    let pair = imagery::load_image_pair(ref_path, test_path).at(Stage::Imagery)?;
    let diff = imagery::difference_magnitude(&pair);
    let patterns = imagery::neighborhood_patterns(&diff);
    let prediction = model.predict_patterns(&patterns).at(Stage::Predict)?;
    Ok((pair.width(), pair.height(), prediction.labels))
}

fn load_model(cfg: &RunConfig) -> CliResult<BroadNetModel> {
    let path = cfg.require(&cfg.model, "model", Stage::Model)?;
    broadnet::load_model(path).at(Stage::Model)
}

/// Writes the change map of the pair to `--out` and returns its labels.
pub fn cmd_predict(cfg: &RunConfig, out: &mut dyn Write) -> CliResult<Vec<u8>> {
    let png_path = cfg.require(&cfg.out, "out", Stage::Output)?;
    let model = load_model(cfg)?;
    let (w, h, labels) = predict_pair(cfg, &model)?;
    let map = eval::render_change_map(&labels, w, h).at(Stage::Predict)?;
    eval::save_png(&map, png_path).at(Stage::Output)?;
    let changed = labels.iter().filter(|&&l| l == MINORITY).count();
    say(
        out,
        format_args!(
            "{changed} of {} pixels changed; map written to {}",
            labels.len(),
            png_path.display()
        ),
    )?;
    Ok(labels)
}

/// Row-major pixel indices of the held-out split for a mask.
///
/// The split depends only on labels and seed, so it matches the one used in
/// training without needing the images.
pub fn holdout_indices(cfg: &RunConfig, mask: &LabelGrid) -> CliResult<Vec<usize>> {
    let w = mask.width();
    let n = mask.labels().len();
    let coords = (0..n).map(|i| ((i % w) as u32, (i / w) as u32)).collect();
    let placeholder = LabeledDataset::new(
        vec![[0.0; PATTERN_DIM]; n],
        mask.labels().to_vec(),
        Some(coords),
    )
    .at(Stage::Split)?;
    let (_, held_out) = split(cfg, &placeholder)?;
    let coords = held_out.coords().unwrap_or_default();
    Ok(coords
        .iter()
        .map(|&(x, y)| y as usize * w + x as usize)
        .collect())
}

fn append_csv_row(path: &Path, row: &str) -> CliResult<()> {
    let fresh = std::fs::metadata(path)
        .map(|m| m.len() == 0)
        .unwrap_or(true);
    let mut file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| out_io(path, e))?;
    let mut text = String::new();
    if fresh {
        text.push_str(SWEEP_HEADER);
        text.push('\n');
    }
    text.push_str(row);
    text.push('\n');
    file.write_all(text.as_bytes()).map_err(|e| out_io(path, e))
}

/// Scores a change map (`--pred`, or model + pair) against `--mask`.
pub fn cmd_evaluate(cfg: &RunConfig, out: &mut dyn Write) -> CliResult<EvaluationReport> {
    let mask_path = cfg.require(&cfg.mask_path, "mask", Stage::Imagery)?;
    let truth = imagery::binarize_mask(mask_path).at(Stage::Imagery)?;
    let mut cell = SweepCell {
        strategy: cfg.strategy,
        ir: cfg.ir,
        layers: cfg.net.max_layers,
        compression: cfg.net.compression,
    };
    let predicted = match &cfg.pred {
        Some(path) => {
            let map = imagery::binarize_mask(path).at(Stage::Imagery)?;
            if (map.width(), map.height()) != (truth.width(), truth.height()) {
                return Err(CliError::new(
                    Stage::Evaluate,
                    Error::LengthMismatch {
                        left: truth.labels().len(),
                        right: map.labels().len(),
                    },
                ));
            }
            map.labels().to_vec()
        }
        None => {
            let model = load_model(cfg)?;
            cell.layers = model.config().max_layers;
            cell.compression = model.config().compression;
            predict_pair(cfg, &model)?.2
        }
    };
    let (truth_labels, predicted) = if cfg.holdout {
        let idx = holdout_indices(cfg, &truth)?;
        if predicted.len() != truth.labels().len() {
            return Err(CliError::new(
                Stage::Evaluate,
                Error::LengthMismatch {
                    left: truth.labels().len(),
                    right: predicted.len(),
                },
            ));
        }
        (
            idx.iter().map(|&i| truth.labels()[i]).collect(),
            idx.iter().map(|&i| predicted[i]).collect(),
        )
    } else {
        (truth.labels().to_vec(), predicted)
    };
    let report =
        EvaluationReport::from_labels(&truth_labels, &predicted, cell).at(Stage::Evaluate)?;
    say(
        out,
        format_args!(
            "f0 {:.2} f1 {:.2} afs {:.2}",
            report.scores.f0, report.scores.f1, report.scores.afs
        ),
    )?;
    if let Some(csv) = &cfg.csv {
        append_csv_row(csv, &eval::report_row(&report))?;
    }
    Ok(report)
}

/// One sweep grid point with its outcome.
#[derive(Debug)]
pub struct CellOutcome {
    pub cell: SweepCell,
    pub seed: u64,
    pub result: CliResult<(EvaluationReport, BroadNetModel)>,
}

/// 64-bit FNV-1a.
fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| {
        (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3)
    })
}

/// Seed for a grid cell: the base seed offset by a stable hash of the cell's parameters.
pub fn cell_seed(base: u64, cell: &SweepCell) -> u64 {
    let key = format!(
        "{}|{}|{}|{:016x}",
        cell.strategy.name(),
        cell.ir,
        cell.layers,
        cell.compression.to_bits()
    );
    base.wrapping_add(fnv1a(key.as_bytes()))
}

/// Grid cells in IR, strategy, layers, compression order.
pub fn sweep_cells(cfg: &RunConfig) -> Vec<SweepCell> {
    let mut cells = Vec::new();
    for &ir in &cfg.irs {
        for &strategy in &cfg.strategies {
            for &layers in &cfg.layer_counts {
                for &compression in &cfg.compressions {
                    cells.push(SweepCell {
                        strategy,
                        ir,
                        layers,
                        compression,
                    });
                }
            }
        }
    }
    cells
}

pub const SWEEP_CSV_HEADER: &str = "strategy,ir,layers,compression,afs,f0,f1,error";

/// Sweep CSV: scores for successful cells, the error message otherwise.
pub fn sweep_csv(outcomes: &[CellOutcome]) -> CliResult<String> {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| CliError::new(Stage::Output, Error::Format(e.to_string()));
    wtr.write_record(SWEEP_CSV_HEADER.split(','))
        .map_err(csv_err)?;
    for o in outcomes {
        let mut record: Vec<String> = match &o.result {
            Ok((report, _)) => eval::report_row(report)
                .split(',')
                .map(str::to_owned)
                .collect(),
            Err(_) => {
                let mut fields: Vec<String> = eval::cell_fields(&o.cell)
                    .split(',')
                    .map(str::to_owned)
                    .collect();
                fields.extend(["", "", ""].map(String::from));
                fields
            }
        };
        record.push(
            o.result
                .as_ref()
                .err()
                .map(|e| e.to_string())
                .unwrap_or_default(),
        );
        wtr.write_record(&record).map_err(csv_err)?;
    }
    let bytes = wtr
        .into_inner()
        .map_err(|e| csv_err(e.into_error().into()))?;
    String::from_utf8(bytes).map_err(|e| CliError::new(Stage::Output, Error::Format(e.to_string())))
}

/// Trains and scores every grid cell on one shared split.
pub fn cmd_sweep(cfg: &RunConfig, out: &mut dyn Write) -> CliResult<Vec<CellOutcome>> {
    let prepared = prepare(cfg)?;
    let (train, held_out) = split(cfg, &prepared.dataset)?;
    let cells = sweep_cells(cfg);
    let outcomes = Execution::default().map_slice(&cells, |cell| {
        let seed = cell_seed(cfg.seed, cell);
        let result = train_model(
            cfg,
            &train,
            cell.strategy,
            cell.ir,
            cell.layers,
            cell.compression,
            seed,
        )
        .and_then(|model| {
            let pred = model
                .predict_patterns(held_out.patterns())
                .at(Stage::Predict)?;
            let report = EvaluationReport::from_labels(held_out.labels(), &pred.labels, *cell)
                .at(Stage::Evaluate)?;
            Ok((report, model))
        });
        CellOutcome {
            cell: *cell,
            seed,
            result,
        }
    });
    let text = sweep_csv(&outcomes)?;
    match &cfg.out {
        Some(path) => {
            std::fs::write(path, &text).map_err(|e| out_io(path, e))?;
            let failed = outcomes.iter().filter(|o| o.result.is_err()).count();
            say(
                out,
                format_args!(
                    "{} cells ({failed} failed) written to {}",
                    outcomes.len(),
                    path.display()
                ),
            )?;
        }
        None => out
            .write_all(text.as_bytes())
            .map_err(|e| out_io(Path::new("<stdout>"), e))?,
    }
    Ok(outcomes)
}
