//! Wall-clock comparison of sequential vs multithreaded prediction, with an
//! output checksum proving every worker count computed the same thing.
//!
//! Only the similarity + prediction phase is timed — parsing and matrix
//! construction happen before any clock starts — so rows are comparable
//! across measures and worker counts. Each cell reports the minimum of its
//! repeats after one untimed warm-up.

use std::hash::Hasher;
use std::time::Instant;

use fnv::FnvHasher;

use crate::error::{CfError, Result};
use crate::ingest::Dataset;
use crate::predict::{predict_all, Prediction};
use crate::similarity::{MeasureKind, SimilarityMeasure};

pub const PHASE_SIMILARITY_PREDICT: &str = "similarity+predict";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchRecord {
    pub measure: MeasureKind,
    pub workers: usize,
    pub phase: &'static str,
    pub wall_ms: f64,
    pub n_test: usize,
    pub output_digest: u64,
}

/// Order-sensitive 64-bit FNV-1a digest over (user, item, predicted-bits) of
/// every prediction. Any change to a value *or* to the output ordering
/// changes the digest.
pub fn digest_predictions(predictions: &[Prediction]) -> u64 {
    let mut h = FnvHasher::default();
    for p in predictions {
        h.write(&p.user.to_le_bytes());
        h.write(&p.item.to_le_bytes());
        h.write(&p.predicted.to_bits().to_le_bytes());
    }
    h.finish()
}

/// Times `predict_all` for every (measure, workers) cell. The first cell of
/// each measure fixes the expected digest; any later cell disagreeing is a
/// correctness failure and aborts the run.
pub fn run_bench(
    dataset: &Dataset,
    measures: &[SimilarityMeasure],
    worker_counts: &[usize],
    n: usize,
    repeats: usize,
) -> Result<Vec<BenchRecord>> {
    if !worker_counts.contains(&1) {
        return Err(CfError::InvalidParam(
            "worker counts must include 1, the sequential baseline".into(),
        ));
    }
    if repeats == 0 {
        return Err(CfError::InvalidParam("repeats must be at least 1".into()));
    }

    let mut records = Vec::with_capacity(measures.len() * worker_counts.len());
    for measure in measures {
        let mut expected_digest: Option<u64> = None;
        for &workers in worker_counts {
            // Warm-up: populates caches and the allocator, output discarded.
            let warmup = predict_all(&dataset.train, &dataset.test, measure, n, workers)?;
            drop(warmup);

            let mut best = f64::INFINITY;
            let mut last = Vec::new();
            for _ in 0..repeats {
                let started = Instant::now();
                last = predict_all(&dataset.train, &dataset.test, measure, n, workers)?;
                best = best.min(started.elapsed().as_secs_f64() * 1e3);
            }

            let digest = digest_predictions(&last);
            match expected_digest {
                None => expected_digest = Some(digest),
                Some(expected) if expected != digest => {
                    return Err(CfError::DigestMismatch {
                        measure: measure.kind.to_string(),
                        workers,
                        got: digest,
                        expected,
                    });
                }
                Some(_) => {}
            }

            records.push(BenchRecord {
                measure: measure.kind,
                workers,
                phase: PHASE_SIMILARITY_PREDICT,
                wall_ms: best,
                n_test: last.len(),
                output_digest: digest,
            });
        }
    }
    Ok(records)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeedupRow {
    pub measure: MeasureKind,
    pub workers: usize,
    pub wall_ms: f64,
    pub speedup: f64,
}

/// Speedup of every cell relative to its measure's workers=1 baseline. The
/// baseline cell itself is exactly 1.0.
pub fn speedup_table(records: &[BenchRecord]) -> Result<Vec<SpeedupRow>> {
    records
        .iter()
        .map(|r| {
            let baseline = records
                .iter()
                .find(|b| b.measure == r.measure && b.workers == 1)
                .ok_or_else(|| {
                    CfError::InvalidParam(format!(
                        "no workers=1 baseline recorded for measure {}",
                        r.measure
                    ))
                })?;
            Ok(SpeedupRow {
                measure: r.measure,
                workers: r.workers,
                wall_ms: r.wall_ms,
                speedup: baseline.wall_ms / r.wall_ms,
            })
        })
        .collect()
}

/// Host facts reported alongside benchmark results, since absolute timings
/// are meaningless without them.
#[derive(Debug, Clone)]
pub struct MachineInfo {
    pub os: &'static str,
    pub arch: &'static str,
    pub logical_cpus: usize,
    /// Physical core count when detectable (Linux /proc/cpuinfo); `None`
    /// elsewhere.
    pub physical_cores: Option<usize>,
}

impl MachineInfo {
    pub fn detect() -> Self {
        MachineInfo {
            os: std::env::consts::OS,
            arch: std::env::consts::ARCH,
            logical_cpus: std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1),
            physical_cores: physical_core_count(),
        }
    }
}

/// Counts distinct (physical id, core id) pairs in /proc/cpuinfo, the usual
/// way to tell real cores from SMT siblings.
fn physical_core_count() -> Option<usize> {
    let info = std::fs::read_to_string("/proc/cpuinfo").ok()?;
    let mut cores = std::collections::HashSet::new();
    let (mut physical_id, mut core_id) = (None::<u32>, None::<u32>);
    for line in info.lines() {
        let mut parts = line.splitn(2, ':');
        let key = parts.next().unwrap_or("").trim();
        let value = parts.next().map(str::trim);
        match key {
            "physical id" => physical_id = value.and_then(|v| v.parse().ok()),
            "core id" => core_id = value.and_then(|v| v.parse().ok()),
            "" => {
                // blank line = end of one processor stanza
                if let (Some(p), Some(c)) = (physical_id, core_id) {
                    cores.insert((p, c));
                }
                physical_id = None;
                core_id = None;
            }
            _ => {}
        }
    }
    if let (Some(p), Some(c)) = (physical_id, core_id) {
        cores.insert((p, c));
    }
    if cores.is_empty() {
        None
    } else {
        Some(cores.len())
    }
}
