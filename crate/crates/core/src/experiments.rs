//! Learning curves over equidistant training chunks.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Dataset, Lexicon};
use crate::error::{Error, Result};
use crate::eval::word_accuracy;
use crate::normalizer::{Backend, NormalizerModel, TrainConfig};

pub const DEFAULT_SIZES: &[usize] = &[100, 250, 500, 1000, 2500, 5000, 10000, 25000, 50000];
pub const DEFAULT_MAX_SPLITS: usize = 10;

/// Chunk start offsets for `n`-pair chunks of a `total`-pair set.
pub fn chunk_starts(total: usize, n: usize, max_splits: usize) -> Result<Vec<usize>> {
    if n == 0 || max_splits == 0 {
        return Err(Error::Config(
            "chunk size and split count must be positive".into(),
        ));
    }
    if n > total {
        return Err(Error::Config(format!(
            "chunk size {n} exceeds the {total} training pairs"
        )));
    }
    let span = total - n;
    let mut k = max_splits.min(span / n.div_ceil(2).max(1) + 1);
    loop {
        if k == 1 {
            return Ok(vec![0]);
        }
        // round half up
        let starts: Vec<usize> = (0..k)
            .map(|i| (2 * i * span + (k - 1)) / (2 * (k - 1)))
            .collect();
        let too_close = starts
            .windows(2)
            .any(|w| 2 * n.saturating_sub(w[1] - w[0]) > n);
        if !too_close {
            return Ok(starts);
        }
        k -= 1;
    }
}

pub fn make_splits(train: &Dataset, n: usize, max_splits: usize) -> Result<Vec<Dataset>> {
    Ok(chunk_starts(train.len(), n, max_splits)?
        .into_iter()
        .map(|s| train.slice(s, n))
        .collect())
}

/// Default ladder sizes that fit, or the whole set when none does.
pub fn default_sizes(total: usize) -> Vec<usize> {
    let sizes: Vec<usize> = DEFAULT_SIZES
        .iter()
        .copied()
        .filter(|&s| s <= total)
        .collect();
    if sizes.is_empty() && total > 0 {
        vec![total]
    } else {
        sizes
    }
}

#[derive(Debug, Clone, Default)]
pub struct CurveConfig {
    pub max_splits: usize,
    pub train: TrainConfig,
    pub lexicon: Option<Lexicon>,
}

impl CurveConfig {
    pub fn new(train: TrainConfig, lexicon: Option<Lexicon>) -> Self {
        CurveConfig {
            max_splits: DEFAULT_MAX_SPLITS,
            train,
            lexicon,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitFailure {
    pub split: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub backend: Backend,
    pub train_size: usize,
    pub splits_used: usize,
    /// Chunk start offsets, one per split.
    pub starts: Vec<usize>,
    /// `None` where training failed.
    pub per_split_accuracies: Vec<Option<f64>>,
    /// Mean over the splits that trained.
    pub mean_accuracy: Option<f64>,
    pub failures: Vec<SplitFailure>,
}

impl CurvePoint {
    pub fn flagged(&self) -> bool {
        !self.failures.is_empty()
    }
}

fn train_and_score(
    chunk: &Dataset,
    dev: &Dataset,
    backend: Backend,
    config: &CurveConfig,
) -> Result<f64> {
    let model = NormalizerModel::train(backend, chunk, config.lexicon.as_ref(), &config.train)?;
    let pred: Vec<String> = model
        .normalize_all(&dev.sources())
        .into_iter()
        .map(|c| c.form)
        .collect();
    word_accuracy(&dev.targets(), &pred)
}

/// One point per usable size. Sizes larger than the training set are
/// skipped with a warning; a split that fails to train is recorded and the
/// run continues.
pub fn learning_curve(
    train: &Dataset,
    dev: &Dataset,
    backend: Backend,
    sizes: &[usize],
    config: &CurveConfig,
) -> Result<Vec<CurvePoint>> {
    if dev.is_empty() {
        return Err(Error::Config("the development set is empty".into()));
    }
    let mut sizes = sizes.to_vec();
    sizes.sort_unstable();
    sizes.dedup();
    let mut points = Vec::new();
    for n in sizes {
        if n == 0 || n > train.len() {
            log::warn!("skipping size {n}: training set has {} pairs", train.len());
            continue;
        }
        let starts = chunk_starts(train.len(), n, config.max_splits)?;
        let results: Vec<Result<f64>> = starts
            .par_iter()
            .map(|&s| train_and_score(&train.slice(s, n), dev, backend, config))
            .collect();
        let mut failures = Vec::new();
        let per_split: Vec<Option<f64>> = results
            .into_iter()
            .enumerate()
            .map(|(i, r)| match r {
                Ok(a) => Some(a),
                Err(e) => {
                    log::warn!("{backend} at n={n}, split {i}: {e}");
                    failures.push(SplitFailure {
                        split: i,
                        message: e.to_string(),
                    });
                    None
                }
            })
            .collect();
        let ok: Vec<f64> = per_split.iter().flatten().copied().collect();
        let mean = (!ok.is_empty()).then(|| ok.iter().sum::<f64>() / ok.len() as f64);
        points.push(CurvePoint {
            backend,
            train_size: n,
            splits_used: starts.len(),
            starts,
            per_split_accuracies: per_split,
            mean_accuracy: mean,
            failures,
        });
    }
    Ok(points)
}

pub const CURVE_CSV_HEADER: &str = "backend,n,split,accuracy";

/// `backend,n,split,accuracy` rows, with a `mean` row closing each size.
/// Failed splits print `NA`.
pub fn curve_csv(points: &[CurvePoint]) -> String {
    let fmt = |a: Option<f64>| a.map_or_else(|| "NA".to_string(), |x| format!("{x:.6}"));
    let mut out = String::from(CURVE_CSV_HEADER);
    out.push('\n');
    for p in points {
        for (i, a) in p.per_split_accuracies.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{},{}\n",
                p.backend,
                p.train_size,
                i,
                fmt(*a)
            ));
        }
        out.push_str(&format!(
            "{},{},mean,{}\n",
            p.backend,
            p.train_size,
            fmt(p.mean_accuracy)
        ));
    }
    out
}
