//! Top-N neighbor selection and neighborhood rating prediction.
//!
//! `predict_all` is the engine's parallel surface. Work is partitioned per
//! target user (one similarity row + one neighbor list serves all of that
//! user's test records), results are scattered back into input order, and the
//! per-task arithmetic is identical on the sequential and parallel paths — so
//! output is byte-identical for every worker count by construction.

use std::cmp::Reverse;
use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;

use crate::error::{CfError, Result};
use crate::ingest::RawRating;
use crate::matrix::{ItemId, RatingsMatrix, UserId};
use crate::similarity::{similarity_row, SimilarityMeasure, SimilarityRow};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FallbackLevel {
    /// Predicted from the weighted neighbor formula.
    Neighbors,
    /// No usable neighbor rated the item; predicted the user's train mean.
    UserMean,
    /// User absent from train; predicted the global train mean.
    GlobalMean,
}

impl FallbackLevel {
    pub fn name(self) -> &'static str {
        match self {
            FallbackLevel::Neighbors => "neighbors",
            FallbackLevel::UserMean => "user_mean",
            FallbackLevel::GlobalMean => "global_mean",
        }
    }
}

impl fmt::Display for FallbackLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The top-N most similar users to a target, score descending, ties broken by
/// user id ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborList {
    pub target: UserId,
    pub neighbors: Vec<(UserId, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub user: UserId,
    pub item: ItemId,
    pub predicted: f64,
    pub actual: f64,
    pub fallback_level: FallbackLevel,
}

/// Candidate ordering: greater = higher score, ties preferring the smaller
/// user id. Scores come from similarity rows and are never NaN.
#[derive(Debug, Clone, Copy)]
struct Cand {
    score: f64,
    user: UserId,
}

impl PartialEq for Cand {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == std::cmp::Ordering::Equal
    }
}

impl Eq for Cand {}

impl PartialOrd for Cand {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Cand {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.score
            .total_cmp(&other.score)
            .then_with(|| other.user.cmp(&self.user))
    }
}

/// Selects the n best-scoring candidates with a bounded min-heap (the full
/// row is never sorted). Returns fewer than n when the row is short.
pub fn top_n(row: &SimilarityRow, n: usize) -> NeighborList {
    let mut heap: std::collections::BinaryHeap<Reverse<Cand>> =
        std::collections::BinaryHeap::with_capacity(n + 1);
    for &(user, score) in &row.scores {
        heap.push(Reverse(Cand { score, user }));
        if heap.len() > n {
            heap.pop(); // evict the current worst
        }
    }
    let neighbors = heap
        .into_sorted_vec() // ascending by Reverse = best candidate first
        .into_iter()
        .map(|Reverse(c)| (c.user, c.score))
        .collect();
    NeighborList {
        target: row.target,
        neighbors,
    }
}

/// Mean-centered weighted prediction from a neighbor list.
///
/// Neighbors with positive score who rated the item contribute
/// s·(r_v − r̄v); the weighted average of those offsets is added to the
/// target's mean and clamped to the rating scale. Without any such neighbor
/// the prediction falls back to the target's train mean, and for a target
/// with no train history at all, to the global train mean.
pub fn predict_rating(
    matrix: &RatingsMatrix,
    neighbors: &NeighborList,
    item: ItemId,
) -> (f64, FallbackLevel) {
    let mut num = 0.0;
    let mut den = 0.0;
    // Accumulation order is the neighbor-list order (score descending, id
    // ascending), which is deterministic and worker-independent.
    for &(v, s) in &neighbors.neighbors {
        if s <= 0.0 {
            continue;
        }
        let Some(rv) = matrix.rating(v, item) else {
            continue;
        };
        let Ok(mv) = matrix.user_mean(v) else {
            continue;
        };
        num += s * (rv - mv);
        den += s;
    }

    if den > 0.0 {
        if let Ok(mu) = matrix.user_mean(neighbors.target) {
            return ((mu + num / den).clamp(1.0, 5.0), FallbackLevel::Neighbors);
        }
    }
    match matrix.user_mean(neighbors.target) {
        Ok(mu) => (mu.clamp(1.0, 5.0), FallbackLevel::UserMean),
        Err(_) => (
            matrix.global_mean().clamp(1.0, 5.0),
            FallbackLevel::GlobalMean,
        ),
    }
}

/// Predicts every test record. Output order equals test input order and the
/// bytes are identical for any `workers` value; `workers == 1` runs a plain
/// sequential loop (the benchmark baseline), larger counts use a dedicated
/// thread pool of exactly that size.
pub fn predict_all(
    matrix: &RatingsMatrix,
    test: &[RawRating],
    measure: &SimilarityMeasure,
    n: usize,
    workers: usize,
) -> Result<Vec<Prediction>> {
    if workers == 0 {
        return Err(CfError::InvalidParam("workers must be at least 1".into()));
    }
    if n == 0 {
        return Err(CfError::InvalidParam("neighborhood size must be at least 1".into()));
    }

    let mut by_user: BTreeMap<UserId, Vec<usize>> = BTreeMap::new();
    for (idx, r) in test.iter().enumerate() {
        by_user.entry(r.user_id).or_default().push(idx);
    }
    let tasks: Vec<(UserId, Vec<usize>)> = by_user.into_iter().collect();

    let run_task = |task: &(UserId, Vec<usize>)| -> Result<Vec<(usize, Prediction)>> {
        let (user, idxs) = task;
        let neighbors = if matrix.contains_user(*user) {
            top_n(&similarity_row(matrix, *user, measure)?, n)
        } else {
            // A test user the (possibly subsampled) train matrix never saw:
            // the fallback chain bottoms out at the global mean.
            NeighborList {
                target: *user,
                neighbors: Vec::new(),
            }
        };
        Ok(idxs
            .iter()
            .map(|&idx| {
                let rec = &test[idx];
                let (predicted, fallback_level) = predict_rating(matrix, &neighbors, rec.item_id);
                (
                    idx,
                    Prediction {
                        user: rec.user_id,
                        item: rec.item_id,
                        predicted,
                        actual: rec.rating,
                        fallback_level,
                    },
                )
            })
            .collect())
    };

    let per_task: Vec<Vec<(usize, Prediction)>> = if workers == 1 {
        tasks.iter().map(run_task).collect::<Result<_>>()?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| CfError::InvalidParam(format!("cannot build {workers}-thread pool: {e}")))?;
        pool.install(|| tasks.par_iter().map(run_task).collect::<Result<_>>())?
    };

    let mut out: Vec<Option<Prediction>> = vec![None; test.len()];
    for chunk in per_task {
        for (idx, p) in chunk {
            debug_assert!(out[idx].is_none());
            out[idx] = Some(p);
        }
    }
    Ok(out
        .into_iter()
        .map(|p| p.expect("every test index is covered by exactly one task"))
        .collect())
}
