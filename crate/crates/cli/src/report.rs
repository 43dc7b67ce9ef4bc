//! Report rendering. The CSV headers and JSON keys here are a public
//! contract (covered by golden-file tests): downstream plotting scripts key
//! on them, so changes are breaking.
//!
//! Floats are rendered with Rust's shortest-round-trip formatting, which is
//! deterministic — reports from identical runs are byte-identical. Undefined
//! metrics serialize as empty CSV fields / JSON nulls, never as 0.

use serde::Serialize;

use parcf::{BenchRecord, EvalReport, MeasureKind, SpeedupRow};

pub const EVAL_CSV_HEADER: &str =
    "measure,n,mae,precision,recall,f1,tp,fp,fn,tn,n_predictions,fallback_user_mean,fallback_global_mean";
pub const SPARSITY_CSV_HEADER: &str =
    "measure,fraction,n,mae,precision,recall,f1,tp,fp,fn,tn,n_predictions,fallback_user_mean,fallback_global_mean";
pub const BENCH_CSV_HEADER: &str = "measure,workers,wall_ms,speedup,n_test,digest";
pub const SPLIT_STATS_CSV_HEADER: &str =
    "n_ratings,n_train,n_test_kept,n_test_dropped,n_users,n_items,duplicate_warnings,global_train_mean";

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

#[derive(Debug, Clone)]
pub struct EvalRow {
    pub measure: MeasureKind,
    pub n: usize,
    pub report: EvalReport,
}

#[derive(Debug, Clone)]
pub struct SparsityRow {
    pub measure: MeasureKind,
    pub fraction: f64,
    pub n: usize,
    pub report: EvalReport,
}

fn report_fields(r: &EvalReport) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{},{}",
        r.mae,
        opt(r.precision),
        opt(r.recall),
        opt(r.f1),
        r.tp,
        r.fp,
        r.fn_,
        r.tn,
        r.n_predictions,
        r.fallback_user_mean,
        r.fallback_global_mean
    )
}

pub fn eval_csv(rows: &[EvalRow]) -> String {
    let mut out = String::from(EVAL_CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&format!(
            "{},{},{}\n",
            row.measure,
            row.n,
            report_fields(&row.report)
        ));
    }
    out
}

pub fn sparsity_csv(rows: &[SparsityRow]) -> String {
    let mut out = String::from(SPARSITY_CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            row.measure,
            row.fraction,
            row.n,
            report_fields(&row.report)
        ));
    }
    out
}

#[derive(Serialize)]
struct EvalReportJson {
    mae: f64,
    precision: Option<f64>,
    recall: Option<f64>,
    f1: Option<f64>,
    tp: u64,
    fp: u64,
    #[serde(rename = "fn")]
    fn_: u64,
    tn: u64,
    n_predictions: usize,
    fallback_neighbors: usize,
    fallback_user_mean: usize,
    fallback_global_mean: usize,
}

impl From<&EvalReport> for EvalReportJson {
    fn from(r: &EvalReport) -> Self {
        EvalReportJson {
            mae: r.mae,
            precision: r.precision,
            recall: r.recall,
            f1: r.f1,
            tp: r.tp,
            fp: r.fp,
            fn_: r.fn_,
            tn: r.tn,
            n_predictions: r.n_predictions,
            fallback_neighbors: r.fallback_neighbors,
            fallback_user_mean: r.fallback_user_mean,
            fallback_global_mean: r.fallback_global_mean,
        }
    }
}

#[derive(Serialize)]
struct EvalRowJson {
    measure: &'static str,
    n: usize,
    #[serde(flatten)]
    report: EvalReportJson,
}

#[derive(Serialize)]
struct SparsityRowJson {
    measure: &'static str,
    fraction: f64,
    n: usize,
    #[serde(flatten)]
    report: EvalReportJson,
}

fn pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serialization cannot fail");
    s.push('\n');
    s
}

pub fn eval_json(rows: &[EvalRow]) -> String {
    let rows: Vec<EvalRowJson> = rows
        .iter()
        .map(|r| EvalRowJson {
            measure: r.measure.name(),
            n: r.n,
            report: (&r.report).into(),
        })
        .collect();
    pretty(&rows)
}

pub fn sparsity_json(rows: &[SparsityRow]) -> String {
    let rows: Vec<SparsityRowJson> = rows
        .iter()
        .map(|r| SparsityRowJson {
            measure: r.measure.name(),
            fraction: r.fraction,
            n: r.n,
            report: (&r.report).into(),
        })
        .collect();
    pretty(&rows)
}

/// Benchmark rows pair each timing record with its speedup-table entry.
pub fn bench_csv(records: &[BenchRecord], speedups: &[SpeedupRow]) -> String {
    let mut out = String::from(BENCH_CSV_HEADER);
    out.push('\n');
    for (rec, s) in records.iter().zip(speedups) {
        out.push_str(&format!(
            "{},{},{},{},{},{:016x}\n",
            rec.measure, rec.workers, rec.wall_ms, s.speedup, rec.n_test, rec.output_digest
        ));
    }
    out
}

#[derive(Serialize)]
struct BenchRowJson {
    measure: &'static str,
    workers: usize,
    phase: &'static str,
    wall_ms: f64,
    speedup: f64,
    n_test: usize,
    digest: String,
}

pub fn bench_json(records: &[BenchRecord], speedups: &[SpeedupRow]) -> String {
    let rows: Vec<BenchRowJson> = records
        .iter()
        .zip(speedups)
        .map(|(rec, s)| BenchRowJson {
            measure: rec.measure.name(),
            workers: rec.workers,
            phase: rec.phase,
            wall_ms: rec.wall_ms,
            speedup: s.speedup,
            n_test: rec.n_test,
            digest: format!("{:016x}", rec.output_digest),
        })
        .collect();
    pretty(&rows)
}

#[derive(Debug, Clone, Serialize)]
pub struct SplitStats {
    pub n_ratings: usize,
    pub n_train: usize,
    pub n_test_kept: usize,
    pub n_test_dropped: usize,
    pub n_users: usize,
    pub n_items: usize,
    pub duplicate_warnings: usize,
    pub global_train_mean: f64,
}

pub fn split_stats_csv(s: &SplitStats) -> String {
    format!(
        "{SPLIT_STATS_CSV_HEADER}\n{},{},{},{},{},{},{},{}\n",
        s.n_ratings,
        s.n_train,
        s.n_test_kept,
        s.n_test_dropped,
        s.n_users,
        s.n_items,
        s.duplicate_warnings,
        s.global_train_mean
    )
}

pub fn split_stats_json(s: &SplitStats) -> String {
    pretty(s)
}
