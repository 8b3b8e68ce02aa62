//! Confusion counts, per-class F-scores, change maps, and sweep reports.

use std::io::Cursor;
use std::path::Path;

use image::{GrayImage, ImageFormat};

use crate::error::{Error, Result};
use crate::resample::{ImbalanceRatio, ResampleStrategy};

/// Binary confusion counts with class 1 (changed) as positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

impl ConfusionCounts {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }

    /// Counts with the class roles exchanged.
    pub fn swapped(&self) -> ConfusionCounts {
        ConfusionCounts {
            tp: self.tn,
            fp: self.fn_,
            tn: self.tp,
            fn_: self.fp,
        }
    }
}

pub fn confusion(truth: &[u8], predicted: &[u8]) -> Result<ConfusionCounts> {
    if truth.len() != predicted.len() {
        return Err(Error::LengthMismatch {
            left: truth.len(),
            right: predicted.len(),
        });
    }
    let mut c = ConfusionCounts::default();
    for (&t, &p) in truth.iter().zip(predicted) {
        match (t != 0, p != 0) {
            (true, true) => c.tp += 1,
            (false, true) => c.fp += 1,
            (false, false) => c.tn += 1,
            (true, false) => c.fn_ += 1,
        }
    }
    Ok(c)
}

/// F-scores on a 0–100 scale.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FScores {
    pub f0: f64,
    pub f1: f64,
    /// Unweighted mean of `f0` and `f1`.
    pub afs: f64,
}

/// `100 · 2PR / (P + R)` for one class; every 0/0 is taken as 0.
pub fn f_score(tp: usize, fp: usize, fn_: usize) -> f64 {
    let ratio = |num: usize, den: usize| {
        if den == 0 {
            0.0
        } else {
            num as f64 / den as f64
        }
    };
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    if precision + recall == 0.0 {
        0.0
    } else {
        100.0 * 2.0 * precision * recall / (precision + recall)
    }
}

pub fn f_scores(c: &ConfusionCounts) -> FScores {
    let f1 = f_score(c.tp, c.fp, c.fn_);
    let f0 = f_score(c.tn, c.fn_, c.fp);
    FScores {
        f0,
        f1,
        afs: (f0 + f1) / 2.0,
    }
}

/// Experiment settings attached to a report row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepCell {
    pub strategy: ResampleStrategy,
    pub ir: ImbalanceRatio,
    pub layers: usize,
    pub compression: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport {
    pub counts: ConfusionCounts,
    pub scores: FScores,
    pub cell: SweepCell,
}

impl EvaluationReport {
    pub fn from_labels(truth: &[u8], predicted: &[u8], cell: SweepCell) -> Result<Self> {
        let counts = confusion(truth, predicted)?;
        Ok(EvaluationReport {
            counts,
            scores: f_scores(&counts),
            cell,
        })
    }
}

pub const SWEEP_HEADER: &str = "strategy,ir,layers,compression,afs,f0,f1";

/// Leading CSV fields `strategy,ir,layers,compression` for a cell.
pub fn cell_fields(cell: &SweepCell) -> String {
    format!(
        "{},{},{},{:.2}",
        cell.strategy, cell.ir, cell.layers, cell.compression
    )
}

pub fn report_row(r: &EvaluationReport) -> String {
    format!(
        "{},{:.2},{:.2},{:.2}",
        cell_fields(&r.cell),
        r.scores.afs,
        r.scores.f0,
        r.scores.f1
    )
}

/// CSV with header [`SWEEP_HEADER`] and one row per report, in input order.
pub fn sweep_report(rows: &[EvaluationReport]) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&report_row(r));
        out.push('\n');
    }
    out
}

/// White (255) where the label is 1, black elsewhere; labels are row-major.
pub fn render_change_map(labels: &[u8], width: usize, height: usize) -> Result<GrayImage> {
    if labels.len() != width * height {
        return Err(Error::DimensionMismatch(format!(
            "{} labels for a {width}x{height} change map",
            labels.len()
        )));
    }
    let pixels = labels
        .iter()
        .map(|&l| if l != 0 { 255 } else { 0 })
        .collect();
    GrayImage::from_raw(width as u32, height as u32, pixels)
        .ok_or_else(|| Error::DimensionMismatch(format!("{width}x{height} exceeds image limits")))
}

pub fn encode_png(img: &GrayImage) -> Result<Vec<u8>> {
    let mut buf = Cursor::new(Vec::new());
    img.write_to(&mut buf, ImageFormat::Png)
        .map_err(|e| Error::InvalidParameter(format!("png encoding failed: {e}")))?;
    Ok(buf.into_inner())
}

pub fn save_png(img: &GrayImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode_png(img)?;
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}
