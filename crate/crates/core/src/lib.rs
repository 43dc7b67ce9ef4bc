//! Parallel user-based collaborative filtering.
//!
//! The pipeline: parse or synthesize ratings, split them with a seeded
//! stream, build an immutable sparse matrix, score user similarity (Jaccard,
//! normalized Pearson, or Cosine), predict test ratings from each user's
//! top-N neighbors, and evaluate MAE / precision / recall / F1. A benchmark
//! harness times the similarity+prediction phase across worker counts and
//! checksums outputs to prove the parallel runs compute exactly what the
//! sequential run does.

pub mod bench;
pub mod error;
pub mod eval;
pub mod ingest;
pub mod matrix;
pub mod predict;
pub mod similarity;
pub mod synth;

pub use bench::{digest_predictions, run_bench, speedup_table, BenchRecord, MachineInfo, SpeedupRow};
pub use error::{CfError, Result};
pub use eval::{
    confusion, evaluate, mae, precision_recall_f1, sweep_sparsity, sweep_top_n, EvalReport,
    RelevanceThreshold,
};
pub use ingest::{parse_movielens, split, DataFormat, Dataset, ParsedRatings, RawRating, SplitSpec};
pub use matrix::{ItemId, RatingsMatrix, UserId};
pub use predict::{predict_all, predict_rating, top_n, FallbackLevel, NeighborList, Prediction};
pub use similarity::{
    cosine, jaccard, pearson_normalized, similarity_row, MeasureKind, SimilarityMeasure,
    SimilarityRow,
};
pub use synth::{generate, SynthConfig};
