//! Image pairs, difference images, and labeled neighborhood patterns.

mod dataset;
mod lab;

use std::path::Path;

use crate::error::{Error, Result};
use crate::exec::Execution;

pub use dataset::{
    extract_patterns, neighborhood_patterns, split_dataset, standardize, LabeledDataset, Pattern,
    Standardization, PATTERN_DIM,
};
pub use lab::{rgb_to_lab, srgb8_to_lab, Lab};

/// Co-registered reference/test RGB8 rasters of equal size.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImagePair {
    width: usize,
    height: usize,
    reference: Vec<u8>,
    test: Vec<u8>,
}

impl ImagePair {
    pub fn new(width: usize, height: usize, reference: Vec<u8>, test: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::DimensionMismatch(format!(
                "image must be at least 1x1, got {width}x{height}"
            )));
        }
        let expected = width * height * 3;
        for (name, raster) in [("reference", &reference), ("test", &test)] {
            if raster.len() != expected {
                return Err(Error::DimensionMismatch(format!(
                    "{name} raster has {} bytes, expected {expected} for {width}x{height} RGB",
                    raster.len()
                )));
            }
        }
        Ok(ImagePair {
            width,
            height,
            reference,
            test,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn reference(&self) -> &[u8] {
        &self.reference
    }

    pub fn test(&self) -> &[u8] {
        &self.test
    }

    /// The same pair with reference and test exchanged.
    pub fn swapped(&self) -> ImagePair {
        ImagePair {
            width: self.width,
            height: self.height,
            reference: self.test.clone(),
            test: self.reference.clone(),
        }
    }
}

/// Non-negative per-pixel change magnitude, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DifferenceImage {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl DifferenceImage {
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 || values.len() != width * height {
            return Err(Error::DimensionMismatch(format!(
                "{} values for a {width}x{height} difference image",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput("difference image"));
        }
        if values.iter().any(|&v| v < 0.0) {
            return Err(Error::InvalidParameter(
                "difference image values must be non-negative".into(),
            ));
        }
        Ok(DifferenceImage {
            width,
            height,
            values,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }
}

/// Binary ground truth, 1 = changed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelGrid {
    width: usize,
    height: usize,
    labels: Vec<u8>,
}

/// Mask intensities strictly above this count as changed.
pub const MASK_THRESHOLD: u8 = 127;

impl LabelGrid {
    pub fn new(width: usize, height: usize, labels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 || labels.len() != width * height {
            return Err(Error::DimensionMismatch(format!(
                "{} labels for a {width}x{height} grid",
                labels.len()
            )));
        }
        if let Some(bad) = labels.iter().find(|&&l| l > 1) {
            return Err(Error::InvalidParameter(format!(
                "label {bad} is not 0 or 1"
            )));
        }
        Ok(LabelGrid {
            width,
            height,
            labels,
        })
    }

    /// Thresholds 8-bit intensities at [`MASK_THRESHOLD`].
    pub fn from_luma(width: usize, height: usize, luma: &[u8]) -> Result<Self> {
        let labels = luma.iter().map(|&v| u8::from(v > MASK_THRESHOLD)).collect();
        LabelGrid::new(width, height, labels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn changed_count(&self) -> usize {
        self.labels.iter().filter(|&&l| l == 1).count()
    }
}

fn decode(path: &Path) -> Result<image::DynamicImage> {
    image::open(path).map_err(|e| Error::Decode {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

pub fn load_image_pair(
    ref_path: impl AsRef<Path>,
    test_path: impl AsRef<Path>,
) -> Result<ImagePair> {
    let reference = decode(ref_path.as_ref())?.to_rgb8();
    let test = decode(test_path.as_ref())?.to_rgb8();
    if reference.dimensions() != test.dimensions() {
        let (rw, rh) = reference.dimensions();
        let (tw, th) = test.dimensions();
        return Err(Error::DimensionMismatch(format!(
            "reference is {rw}x{rh} but test is {tw}x{th}"
        )));
    }
    let (w, h) = reference.dimensions();
    ImagePair::new(
        w as usize,
        h as usize,
        reference.into_raw(),
        test.into_raw(),
    )
}

/// Reads a grayscale or RGB mask; color masks are reduced by luminance first.
pub fn binarize_mask(mask_path: impl AsRef<Path>) -> Result<LabelGrid> {
    let luma = decode(mask_path.as_ref())?.to_luma8();
    let (w, h) = luma.dimensions();
    LabelGrid::from_luma(w as usize, h as usize, luma.as_raw())
}

pub fn difference_magnitude(pair: &ImagePair) -> DifferenceImage {
    difference_magnitude_with(pair, Execution::default())
}

/// Euclidean norm of the per-channel absolute L*a*b* differences.
pub fn difference_magnitude_with(pair: &ImagePair, exec: Execution) -> DifferenceImage {
    let mut values = vec![0.0; pair.width * pair.height];
    let row_len = pair.width;
    exec.for_each_chunk(&mut values, row_len, |y, row| {
        let start = y * row_len * 3;
        let reference = &pair.reference[start..start + row_len * 3];
        let test = &pair.test[start..start + row_len * 3];
        for (x, out) in row.iter_mut().enumerate() {
            let p = 3 * x;
            let a = srgb8_to_lab([reference[p], reference[p + 1], reference[p + 2]]);
            let b = srgb8_to_lab([test[p], test[p + 1], test[p + 2]]);
            *out = lab_distance(a, b);
        }
    });
    DifferenceImage {
        width: pair.width,
        height: pair.height,
        values,
    }
}

pub(crate) fn lab_distance(a: Lab, b: Lab) -> f64 {
    let dl = (a.l - b.l).abs();
    let da = (a.a - b.a).abs();
    let db = (a.b - b.b).abs();
    (dl * dl + da * da + db * db).sqrt()
}
