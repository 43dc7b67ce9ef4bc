//! Pairwise user similarity: Jaccard, normalized Pearson, and Cosine.
//!
//! All three scores land in [0, 1] with higher meaning more similar, so they
//! are interchangeable as prediction weights. Every kernel folds over the
//! merged co-rated sequence with commutative accumulation only, which makes
//! `score(a, b)` bit-identical to `score(b, a)` — both directions evaluate
//! the same floating-point expression.

use std::fmt;
use std::str::FromStr;

use crate::error::{CfError, Result};
use crate::matrix::{item_set_counts, merge_co_rated, ItemId, RatingsMatrix, UserId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MeasureKind {
    Jaccard,
    PearsonNormalized,
    Cosine,
}

impl MeasureKind {
    pub const ALL: [MeasureKind; 3] = [
        MeasureKind::Jaccard,
        MeasureKind::PearsonNormalized,
        MeasureKind::Cosine,
    ];

    /// Stable short name used by the CLI and in report files.
    pub fn name(self) -> &'static str {
        match self {
            MeasureKind::Jaccard => "jaccard",
            MeasureKind::PearsonNormalized => "pcc",
            MeasureKind::Cosine => "cosine",
        }
    }
}

impl fmt::Display for MeasureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MeasureKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "jaccard" => Ok(MeasureKind::Jaccard),
            "pcc" | "pearson" => Ok(MeasureKind::PearsonNormalized),
            "cosine" => Ok(MeasureKind::Cosine),
            other => Err(format!(
                "unknown measure '{other}' (expected jaccard, pcc, or cosine)"
            )),
        }
    }
}

/// A similarity measure plus the minimum co-rated-item count below which a
/// pair's score is undefined (and the pair is omitted from rows). The
/// minimum applies to Pearson and Cosine; Jaccard is total — a disjoint pair
/// scores 0 rather than being dropped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimilarityMeasure {
    pub kind: MeasureKind,
    pub min_overlap: usize,
}

impl SimilarityMeasure {
    pub fn new(kind: MeasureKind, min_overlap: usize) -> Result<Self> {
        if min_overlap == 0 {
            return Err(CfError::InvalidParam("min overlap must be at least 1".into()));
        }
        Ok(SimilarityMeasure { kind, min_overlap })
    }

    /// Default gating: 1 co-rated item (2 for Pearson, which needs variance).
    pub fn of(kind: MeasureKind) -> Self {
        SimilarityMeasure { kind, min_overlap: 1 }
    }

    /// Pearson is undefined on fewer than two points regardless of the
    /// configured minimum.
    pub fn effective_min_overlap(&self) -> usize {
        match self.kind {
            MeasureKind::PearsonNormalized => self.min_overlap.max(2),
            _ => self.min_overlap,
        }
    }

    /// Scores a pair under this measure; `None` when undefined (overlap below
    /// the minimum, or zero variance / zero norm for Pearson / Cosine).
    pub fn score(&self, matrix: &RatingsMatrix, a: UserId, b: UserId) -> Result<Option<f64>> {
        let ra = matrix.user_ratings(a)?;
        let rb = matrix.user_ratings(b)?;
        let (mean_a, mean_b) = if self.kind == MeasureKind::PearsonNormalized {
            (matrix.user_mean(a)?, matrix.user_mean(b)?)
        } else {
            (0.0, 0.0)
        };
        Ok(score_rows(self, ra, rb, mean_a, mean_b))
    }
}

/// Shared slice-level scorer so `similarity_row` can iterate rows without
/// re-resolving map lookups per pair. Means are only read for Pearson.
fn score_rows(
    measure: &SimilarityMeasure,
    ra: &[(ItemId, f64)],
    rb: &[(ItemId, f64)],
    mean_a: f64,
    mean_b: f64,
) -> Option<f64> {
    let min = measure.effective_min_overlap();
    match measure.kind {
        // Jaccard is total: a disjoint pair scores 0, it is never undefined,
        // so min_overlap does not apply to it.
        MeasureKind::Jaccard => {
            let (intersection, union) = item_set_counts(ra, rb);
            Some(jaccard_ratio(intersection, union))
        }
        MeasureKind::PearsonNormalized => pearson_from_rows(ra, rb, mean_a, mean_b, min),
        MeasureKind::Cosine => cosine_from_rows(ra, rb, min),
    }
}

fn jaccard_ratio(intersection: usize, union: usize) -> f64 {
    if union == 0 {
        0.0
    } else {
        intersection as f64 / union as f64
    }
}

fn pearson_from_rows(
    ra: &[(ItemId, f64)],
    rb: &[(ItemId, f64)],
    mean_a: f64,
    mean_b: f64,
    min_overlap: usize,
) -> Option<f64> {
    let mut n = 0usize;
    let mut num = 0.0;
    let mut dev_a = 0.0;
    let mut dev_b = 0.0;
    merge_co_rated(ra, rb, |_, x, y| {
        let da = x - mean_a;
        let db = y - mean_b;
        num += da * db;
        dev_a += da * da;
        dev_b += db * db;
        n += 1;
    });
    if n < min_overlap.max(2) || dev_a == 0.0 || dev_b == 0.0 {
        return None;
    }
    // Clamp before the affine map so rounding can never push the score
    // outside [0, 1].
    let raw = (num / (dev_a.sqrt() * dev_b.sqrt())).clamp(-1.0, 1.0);
    Some((raw + 1.0) / 2.0)
}

fn cosine_from_rows(ra: &[(ItemId, f64)], rb: &[(ItemId, f64)], min_overlap: usize) -> Option<f64> {
    let mut n = 0usize;
    let mut dot = 0.0;
    let mut norm_a = 0.0;
    let mut norm_b = 0.0;
    merge_co_rated(ra, rb, |_, x, y| {
        dot += x * y;
        norm_a += x * x;
        norm_b += y * y;
        n += 1;
    });
    if n < min_overlap.max(1) || norm_a == 0.0 || norm_b == 0.0 {
        return None;
    }
    Some((dot / (norm_a.sqrt() * norm_b.sqrt())).clamp(0.0, 1.0))
}

/// Jaccard over rated-item-id sets: |a ∩ b| / |a ∪ b|, and 0 when both sets
/// are empty. Always defined.
pub fn jaccard(matrix: &RatingsMatrix, a: UserId, b: UserId) -> Result<f64> {
    let (intersection, union) = matrix.user_item_sets(a, b)?;
    Ok(jaccard_ratio(intersection, union))
}

/// Pearson correlation over co-rated items, with each user's mean taken over
/// their full training history, affinely mapped from [-1, 1] to [0, 1].
/// `None` when fewer than two co-rated items or either deviation vector has
/// zero norm.
pub fn pearson_normalized(matrix: &RatingsMatrix, a: UserId, b: UserId) -> Result<Option<f64>> {
    let ra = matrix.user_ratings(a)?;
    let rb = matrix.user_ratings(b)?;
    let mean_a = matrix.user_mean(a)?;
    let mean_b = matrix.user_mean(b)?;
    Ok(pearson_from_rows(ra, rb, mean_a, mean_b, 2))
}

/// Cosine of the two users' co-rated rating vectors. Ratings are positive so
/// the value already lies in [0, 1]. `None` on empty overlap.
pub fn cosine(matrix: &RatingsMatrix, a: UserId, b: UserId) -> Result<Option<f64>> {
    let ra = matrix.user_ratings(a)?;
    let rb = matrix.user_ratings(b)?;
    Ok(cosine_from_rows(ra, rb, 1))
}

/// All defined similarity scores from one target user to every other user,
/// ordered by candidate user id ascending. Candidates whose score is
/// undefined under the measure are omitted.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityRow {
    pub target: UserId,
    pub scores: Vec<(UserId, f64)>,
}

pub fn similarity_row(
    matrix: &RatingsMatrix,
    target: UserId,
    measure: &SimilarityMeasure,
) -> Result<SimilarityRow> {
    let target_row = matrix.user_ratings(target)?;
    let target_mean = if measure.kind == MeasureKind::PearsonNormalized {
        matrix.user_mean(target)?
    } else {
        0.0
    };

    let mut scores = Vec::new();
    for (candidate, row) in matrix.user_rows() {
        if candidate == target {
            continue;
        }
        let candidate_mean = if measure.kind == MeasureKind::PearsonNormalized {
            matrix.user_mean(candidate)?
        } else {
            0.0
        };
        if let Some(s) = score_rows(measure, target_row, row, target_mean, candidate_mean) {
            scores.push((candidate, s));
        }
    }
    Ok(SimilarityRow { target, scores })
}
