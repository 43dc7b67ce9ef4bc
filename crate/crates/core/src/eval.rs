//! Prediction-quality metrics (MAE and thresholded precision/recall/F1) and
//! the neighborhood-size / training-sparsity sweeps built on them.
//!
//! Precision and recall classify individual rating predictions against a
//! relevance cutoff — a prediction and its actual are each either "good"
//! (>= cutoff) or not. Metrics whose denominator is empty are reported as
//! undefined (`None`), never as a substituted zero.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{CfError, Result};
use crate::ingest::{split_raw, Dataset, RawRating, SplitSpec};
use crate::matrix::RatingsMatrix;
use crate::predict::{predict_all, FallbackLevel, Prediction};
use crate::similarity::SimilarityMeasure;

/// Ratings at or above `cutoff` count as "good" for classification metrics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelevanceThreshold {
    pub cutoff: f64,
}

impl RelevanceThreshold {
    pub fn new(cutoff: f64) -> Result<Self> {
        if !(cutoff > 1.0 && cutoff <= 5.0) {
            return Err(CfError::InvalidParam(format!(
                "relevance cutoff must lie in (1, 5], got {cutoff}"
            )));
        }
        Ok(RelevanceThreshold { cutoff })
    }

    fn good(&self, rating: f64) -> bool {
        rating >= self.cutoff
    }
}

impl Default for RelevanceThreshold {
    fn default() -> Self {
        RelevanceThreshold { cutoff: 4.0 }
    }
}

/// Full metric set for one evaluated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub mae: f64,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub tn: u64,
    pub n_predictions: usize,
    pub fallback_neighbors: usize,
    pub fallback_user_mean: usize,
    pub fallback_global_mean: usize,
}

/// Mean absolute error over a non-empty prediction list.
pub fn mae(predictions: &[Prediction]) -> Result<f64> {
    if predictions.is_empty() {
        return Err(CfError::InvalidParam(
            "MAE is undefined on an empty prediction list".into(),
        ));
    }
    let sum: f64 = predictions
        .iter()
        .map(|p| (p.predicted - p.actual).abs())
        .sum();
    Ok(sum / predictions.len() as f64)
}

/// Confusion counts (tp, fp, fn, tn) of predicted-good vs actually-good.
pub fn confusion(predictions: &[Prediction], t: &RelevanceThreshold) -> (u64, u64, u64, u64) {
    let (mut tp, mut fp, mut fn_, mut tn) = (0, 0, 0, 0);
    for p in predictions {
        match (t.good(p.predicted), t.good(p.actual)) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => tn += 1,
        }
    }
    (tp, fp, fn_, tn)
}

/// Precision, recall, and F1 from confusion counts. Precision is undefined
/// when nothing was predicted good, recall when nothing was actually good,
/// and F1 when either is undefined or both are zero.
pub fn precision_recall_f1(tp: u64, fp: u64, fn_: u64) -> (Option<f64>, Option<f64>, Option<f64>) {
    let precision = (tp + fp > 0).then(|| tp as f64 / (tp + fp) as f64);
    let recall = (tp + fn_ > 0).then(|| tp as f64 / (tp + fn_) as f64);
    let f1 = match (precision, recall) {
        (Some(p), Some(r)) if p + r > 0.0 => Some(2.0 * p * r / (p + r)),
        _ => None,
    };
    (precision, recall, f1)
}

/// Evaluates a non-empty prediction list into a report.
pub fn evaluate(predictions: &[Prediction], t: &RelevanceThreshold) -> Result<EvalReport> {
    let mae = mae(predictions)?;
    let (tp, fp, fn_, tn) = confusion(predictions, t);
    let (precision, recall, f1) = precision_recall_f1(tp, fp, fn_);
    let count_level = |level: FallbackLevel| {
        predictions
            .iter()
            .filter(|p| p.fallback_level == level)
            .count()
    };
    Ok(EvalReport {
        mae,
        precision,
        recall,
        f1,
        tp,
        fp,
        fn_,
        tn,
        n_predictions: predictions.len(),
        fallback_neighbors: count_level(FallbackLevel::Neighbors),
        fallback_user_mean: count_level(FallbackLevel::UserMean),
        fallback_global_mean: count_level(FallbackLevel::GlobalMean),
    })
}

fn check_ascending<T: PartialOrd + std::fmt::Debug>(values: &[T], what: &str) -> Result<()> {
    if values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CfError::InvalidParam(format!(
            "{what} must be strictly ascending, got {values:?}"
        )));
    }
    Ok(())
}

/// Evaluates the dataset at each neighborhood size in `n_values` (strictly
/// ascending). Each entry is exactly the report a standalone run with that n
/// would produce.
pub fn sweep_top_n(
    dataset: &Dataset,
    measure: &SimilarityMeasure,
    n_values: &[usize],
    t: &RelevanceThreshold,
    workers: usize,
) -> Result<Vec<(usize, EvalReport)>> {
    check_ascending(n_values, "neighborhood sizes")?;
    n_values
        .iter()
        .map(|&n| {
            let preds = predict_all(&dataset.train, &dataset.test, measure, n, workers)?;
            Ok((n, evaluate(&preds, t)?))
        })
        .collect()
}

/// Subsamples the train side down to each keep-fraction (strictly ascending,
/// each in (0, 1]) and evaluates against the one fixed test set.
///
/// Every fraction draws from a fresh stream seeded with the split seed, one
/// draw per train rating, keeping it when the draw is below the fraction —
/// so the kept sets are nested across fractions and fraction 1.0 reproduces
/// the un-subsampled report exactly.
pub fn sweep_sparsity(
    ratings: &[RawRating],
    keep_fractions: &[f64],
    n: usize,
    measure: &SimilarityMeasure,
    t: &RelevanceThreshold,
    spec: &SplitSpec,
    workers: usize,
) -> Result<Vec<(f64, EvalReport)>> {
    check_ascending(keep_fractions, "keep fractions")?;
    if let Some(&bad) = keep_fractions
        .iter()
        .find(|&&f| !(f > 0.0 && f <= 1.0))
    {
        return Err(CfError::InvalidParam(format!(
            "keep fractions must lie in (0, 1], got {bad}"
        )));
    }

    let parts = split_raw(ratings, spec)?;
    keep_fractions
        .iter()
        .map(|&fraction| {
            let kept: Vec<RawRating> = if fraction >= 1.0 {
                parts.train.clone()
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
                parts
                    .train
                    .iter()
                    .filter(|_| rng.random::<f64>() < fraction)
                    .copied()
                    .collect()
            };
            let matrix = RatingsMatrix::build(&kept);
            let preds = predict_all(&matrix, &parts.test, measure, n, workers)?;
            Ok((fraction, evaluate(&preds, t)?))
        })
        .collect()
}
