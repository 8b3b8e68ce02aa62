//! Class rebalancing: random under-sampling of the majority class, and
//! random over-sampling or SMOTE for the minority class.

use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::imagery::{LabeledDataset, Pattern, Standardization, PATTERN_DIM};
use crate::seed::derive_seed;

/// Label of the changed (minority) class.
pub const MINORITY: u8 = 1;
/// Label of the unchanged (majority) class.
pub const MAJORITY: u8 = 0;

/// Default SMOTE neighbor count.
pub const DEFAULT_SMOTE_K: usize = 5;

/// Majority-to-minority sample ratio, kept in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ImbalanceRatio {
    majority: u32,
    minority: u32,
}

impl ImbalanceRatio {
    pub fn new(majority: u32, minority: u32) -> Result<Self> {
        if majority == 0 || minority == 0 {
            return Err(Error::InvalidParameter(format!(
                "imbalance ratio parts must be positive, got {majority}:{minority}"
            )));
        }
        let g = majority.gcd(&minority);
        Ok(ImbalanceRatio {
            majority: majority / g,
            minority: minority / g,
        })
    }

    pub fn majority_parts(&self) -> u32 {
        self.majority
    }

    pub fn minority_parts(&self) -> u32 {
        self.minority
    }

    /// Majority count matching `minority` samples: `⌊minority · A / B⌋`.
    pub fn majority_for(&self, minority: usize) -> usize {
        (minority as u128 * self.majority as u128 / self.minority as u128) as usize
    }
}

impl fmt::Display for ImbalanceRatio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.majority, self.minority)
    }
}

impl FromStr for ImbalanceRatio {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad =
            || Error::InvalidParameter(format!("imbalance ratio `{s}` is not of the form A:B"));
        let (a, b) = s.trim().split_once(':').ok_or_else(bad)?;
        let a = a.trim().parse().map_err(|_| bad())?;
        let b = b.trim().parse().map_err(|_| bad())?;
        ImbalanceRatio::new(a, b)
    }
}

/// How the minority class is grown before the majority is under-sampled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ResampleStrategy {
    /// Random under-sampling + random over-sampling with replacement.
    RandomOver,
    /// Random under-sampling + SMOTE with `k` neighbors.
    Smote { k: usize },
}

impl ResampleStrategy {
    pub fn smote() -> Self {
        ResampleStrategy::Smote { k: DEFAULT_SMOTE_K }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ResampleStrategy::RandomOver => "randover",
            ResampleStrategy::Smote { .. } => "smote",
        }
    }

    pub fn with_smote_k(self, k: usize) -> Self {
        match self {
            ResampleStrategy::Smote { .. } => ResampleStrategy::Smote { k },
            other => other,
        }
    }
}

impl fmt::Display for ResampleStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ResampleStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "randover" => Ok(ResampleStrategy::RandomOver),
            "smote" => Ok(ResampleStrategy::smote()),
            other => Err(Error::InvalidParameter(format!(
                "unknown strategy `{other}` (expected randover or smote)"
            ))),
        }
    }
}

/// Keeps a seeded uniform subset of `target_count` rows of `class`.
///
/// Surviving rows keep their original relative order.
pub fn random_undersample(
    data: &LabeledDataset,
    class: u8,
    target_count: usize,
    seed: u64,
) -> Result<LabeledDataset> {
    let members = data.class_indices(class);
    if target_count > members.len() {
        return Err(Error::TargetExceedsAvailable {
            class,
            target: target_count,
            available: members.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut keep = vec![true; data.len()];
    members.iter().for_each(|&i| keep[i] = false);
    for pick in index::sample(&mut rng, members.len(), target_count) {
        keep[members[pick]] = true;
    }
    let rows: Vec<usize> = (0..data.len()).filter(|&i| keep[i]).collect();
    Ok(data.select(&rows))
}

/// Appends seeded duplicates (with replacement) until `class` has `target_count` rows.
pub fn random_oversample(
    data: &LabeledDataset,
    class: u8,
    target_count: usize,
    seed: u64,
) -> Result<LabeledDataset> {
    let members = data.class_indices(class);
    if members.is_empty() {
        return Err(Error::EmptyClass(class));
    }
    if target_count < members.len() {
        return Err(Error::TargetBelowCurrent {
            class,
            target: target_count,
            current: members.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows: Vec<usize> = (0..data.len()).collect();
    rows.extend((members.len()..target_count).map(|_| members[rng.random_range(0..members.len())]));
    Ok(data.select(&rows))
}

pub fn smote(
    data: &LabeledDataset,
    class: u8,
    target_count: usize,
    k: usize,
    seed: u64,
) -> Result<LabeledDataset> {
    smote_with(data, class, target_count, k, seed, Execution::default())
}

/// SMOTE: appends `x + t·(x' − x)` for seeded random minority `x`, one of its
/// `k` nearest minority neighbors `x'`, and `t ~ U[0, 1]`.
///
/// Neighbor distances are Euclidean after z-scoring every dimension with the
/// statistics of the whole dataset; interpolation happens in the original
/// space. `k` is clamped to `class_size − 1`.
pub fn smote_with(
    data: &LabeledDataset,
    class: u8,
    target_count: usize,
    k: usize,
    seed: u64,
    exec: Execution,
) -> Result<LabeledDataset> {
    if k == 0 {
        return Err(Error::InvalidParameter("SMOTE needs k >= 1".into()));
    }
    let members = data.class_indices(class);
    match members.len() {
        0 => return Err(Error::EmptyClass(class)),
        1 => return Err(Error::SingletonClass(class)),
        _ => {}
    }
    if target_count < members.len() {
        return Err(Error::TargetBelowCurrent {
            class,
            target: target_count,
            current: members.len(),
        });
    }
    let mut out = data.clone();
    let needed = target_count - members.len();
    if needed == 0 {
        return Ok(out);
    }
    let points: Vec<Pattern> = members.iter().map(|&i| data.patterns()[i]).collect();
    let scale = Standardization::fit(data.patterns())?.std;
    let k = k.min(points.len() - 1);
    let neighbors = nearest_neighbors(&points, k, &scale, exec);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let synthetic = (0..needed)
        .map(|_| {
            let i = rng.random_range(0..points.len());
            let j = neighbors[i][rng.random_range(0..k)];
            let t: f64 = rng.random_range(0.0..=1.0);
            let (x, xn) = (&points[i], &points[j]);
            std::array::from_fn(|d| x[d] + t * (xn[d] - x[d]))
        })
        .collect();
    out.extend_synthetic(synthetic, class);
    Ok(out)
}

/// For each point, indices of its `k` nearest other points under the
/// per-dimension `scale`, nearest first. Ties go to the lower index.
pub fn nearest_neighbors(
    points: &[Pattern],
    k: usize,
    scale: &[f64; PATTERN_DIM],
    exec: Execution,
) -> Vec<Vec<usize>> {
    exec.map_range(points.len(), |i| {
        let mut dist: Vec<(f64, usize)> = points
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(j, q)| (scaled_sq_distance(&points[i], q, scale), j))
            .collect();
        let k = k.min(dist.len());
        if k < dist.len() {
            dist.select_nth_unstable_by(k, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            dist.truncate(k);
        }
        dist.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        dist.into_iter().map(|(_, j)| j).collect()
    })
}

pub(crate) fn scaled_sq_distance(a: &Pattern, b: &Pattern, scale: &[f64; PATTERN_DIM]) -> f64 {
    let mut s = 0.0;
    for d in 0..PATTERN_DIM {
        let v = (a[d] - b[d]) / scale[d];
        s += v * v;
    }
    s
}

/// Grows the minority (label 1) to `max(minority_target, current)` with the
/// strategy's over-sampler, then under-samples the majority (label 0) to
/// `⌊m · A / B⌋` for ratio `A:B`.
pub fn rebalance(
    data: &LabeledDataset,
    ir: ImbalanceRatio,
    strategy: ResampleStrategy,
    minority_target: usize,
    seed: u64,
) -> Result<LabeledDataset> {
    if minority_target < 2 {
        return Err(Error::InvalidParameter(format!(
            "minority target must be at least 2, got {minority_target}"
        )));
    }
    let n_min = data.class_count(MINORITY);
    let n_maj = data.class_count(MAJORITY);
    if n_min == 0 {
        return Err(Error::EmptyClass(MINORITY));
    }
    if n_maj == 0 {
        return Err(Error::EmptyClass(MAJORITY));
    }
    let m = minority_target.max(n_min);
    let needed = ir.majority_for(m);
    if needed > n_maj {
        return Err(Error::InsufficientMajority {
            needed,
            available: n_maj,
        });
    }
    let grown = match strategy {
        ResampleStrategy::RandomOver => random_oversample(data, MINORITY, m, derive_seed(seed, 1))?,
        ResampleStrategy::Smote { k } => smote(data, MINORITY, m, k, derive_seed(seed, 1))?,
    };
    random_undersample(&grown, MAJORITY, needed, derive_seed(seed, 2))
}
