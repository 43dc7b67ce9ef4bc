//! Command-line front end: argument parsing, command dispatch, and report
//! writing. All numeric work lives in the `parcf` library crate; this crate
//! only wires flags to library calls and renders the results.

pub mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::thread;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};

use parcf::{
    generate, parse_movielens, split, sweep_sparsity, sweep_top_n, CfError, DataFormat,
    MachineInfo, MeasureKind, RawRating, RelevanceThreshold, SimilarityMeasure, SplitSpec,
    SynthConfig,
};

use report::{EvalRow, SparsityRow, SplitStats};

#[derive(Debug, Parser)]
#[command(
    name = "parcf",
    version,
    about = "User-based collaborative filtering: evaluate accuracy, benchmark parallel speedup, generate synthetic ratings"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Predict held-out ratings and report MAE / precision / recall / F1
    Eval(EvalArgs),
    /// Time sequential vs multithreaded prediction and verify identical output
    Bench(BenchArgs),
    /// Generate a clustered synthetic ratings file
    Synth(SynthArgs),
    /// Show how a ratings file splits into train and test
    SplitStats(SplitStatsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SourceFormat {
    /// MovieLens `user::item::rating::timestamp` lines
    Dat,
    /// `userId,movieId,rating,timestamp` with a header row
    Csv,
    /// In-memory generator; uses the synthetic flags below
    Synthetic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Ratings file to load (ignored with --format synthetic)
    #[arg(long, default_value = "ratings.dat")]
    pub data: PathBuf,

    /// Input source
    #[arg(long, value_enum, default_value_t = SourceFormat::Dat)]
    pub format: SourceFormat,

    /// Seed for synthetic generation and the train/test split
    #[arg(long, default_value_t = 42)]
    pub seed: u64,

    /// Fraction of ratings routed to the training side, in (0, 1)
    #[arg(long, default_value_t = 0.9)]
    pub train_fraction: f64,

    /// Synthetic: number of users
    #[arg(long, default_value_t = 1000)]
    pub users: u32,

    /// Synthetic: number of items
    #[arg(long, default_value_t = 200)]
    pub items: u32,

    /// Synthetic: number of planted taste clusters
    #[arg(long, default_value_t = 8)]
    pub clusters: u32,

    /// Synthetic: probability that a (user, item) cell is rated
    #[arg(long, default_value_t = 0.2)]
    pub density: f64,

    /// Synthetic: half-width of the uniform noise on each rating
    #[arg(long, default_value_t = 0.75)]
    pub noise: f64,
}

fn parse_measure(s: &str) -> std::result::Result<MeasureKind, String> {
    s.parse()
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub data: DataArgs,

    /// Similarity measures to run (jaccard, pcc, cosine; comma-separated)
    #[arg(long, value_delimiter = ',', default_value = "pcc", value_parser = parse_measure)]
    pub measure: Vec<MeasureKind>,

    /// Neighborhood sizes to sweep, ascending (comma-separated)
    #[arg(long, value_delimiter = ',', default_value = "10,20,30,40")]
    pub top_n: Vec<usize>,

    /// Minimum co-rated items for a similarity score to be defined
    #[arg(long, default_value_t = 1)]
    pub min_overlap: usize,

    /// Ratings at or above this count as relevant for precision/recall
    #[arg(long, default_value_t = 4.0)]
    pub cutoff: f64,

    /// Worker threads (default: all logical CPUs)
    #[arg(long)]
    pub workers: Option<usize>,

    /// Sweep training-data keep fractions (ascending, in (0, 1]) instead of
    /// neighborhood sizes; requires a single --top-n value
    #[arg(long, value_delimiter = ',')]
    pub sparsity: Option<Vec<f64>>,

    /// Report file
    #[arg(long, default_value = "eval_report.csv")]
    pub output: PathBuf,

    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub output_format: OutputFormat,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub data: DataArgs,

    /// Similarity measures to benchmark (comma-separated)
    #[arg(long, value_delimiter = ',', default_value = "jaccard,pcc,cosine", value_parser = parse_measure)]
    pub measure: Vec<MeasureKind>,

    /// Neighborhood size used for every cell
    #[arg(long, default_value_t = 20)]
    pub top_n: usize,

    /// Minimum co-rated items for a similarity score to be defined
    #[arg(long, default_value_t = 1)]
    pub min_overlap: usize,

    /// Worker counts to time; must include the sequential baseline 1
    #[arg(long, value_delimiter = ',', default_value = "1,2,4,8")]
    pub workers: Vec<usize>,

    /// Timed repetitions per cell (after one untimed warm-up); minimum wins
    #[arg(long, default_value_t = 3)]
    pub repeats: usize,

    /// Report file
    #[arg(long, default_value = "bench_report.csv")]
    pub output: PathBuf,

    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub output_format: OutputFormat,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Number of users
    #[arg(long, default_value_t = 1000)]
    pub users: u32,

    /// Number of items
    #[arg(long, default_value_t = 200)]
    pub items: u32,

    /// Number of planted taste clusters
    #[arg(long, default_value_t = 8)]
    pub clusters: u32,

    /// Probability that a (user, item) cell is rated
    #[arg(long, default_value_t = 0.2)]
    pub density: f64,

    /// Half-width of the uniform noise on each rating
    #[arg(long, default_value_t = 0.75)]
    pub noise: f64,

    /// Generator seed
    #[arg(long, default_value_t = 42)]
    pub seed: u64,

    /// Output file, written as `user::item::rating::timestamp` lines
    #[arg(long, default_value = "synth.dat")]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct SplitStatsArgs {
    #[command(flatten)]
    pub data: DataArgs,

    /// Report file (default: stdout)
    #[arg(long)]
    pub output: Option<PathBuf>,

    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub output_format: OutputFormat,
}

pub fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Eval(args) => cmd_eval(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Synth(args) => cmd_synth(args),
        Command::SplitStats(args) => cmd_split_stats(args),
    }
}

/// Usage and I/O failures exit 1; a benchmark digest mismatch — the parallel
/// path disagreeing with the sequential one — is a correctness failure and
/// exits 2.
pub fn exit_code_for(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if let Some(CfError::DigestMismatch { .. }) = cause.downcast_ref::<CfError>() {
            return 2;
        }
    }
    1
}

/// Loads ratings from the configured source. Returns the ratings plus the
/// number of duplicate (user, item) pairs collapsed during parsing.
fn load_ratings(d: &DataArgs) -> anyhow::Result<(Vec<RawRating>, usize)> {
    let format = match d.format {
        SourceFormat::Dat => DataFormat::Dat,
        SourceFormat::Csv => DataFormat::Csv,
        SourceFormat::Synthetic => {
            let cfg = SynthConfig {
                n_users: d.users,
                n_items: d.items,
                n_clusters: d.clusters,
                density: d.density,
                noise: d.noise,
                seed: d.seed,
            };
            return Ok((generate(&cfg)?, 0));
        }
    };
    let parsed = parse_movielens(&d.data, format)
        .with_context(|| format!("failed to load ratings from {}", d.data.display()))?;
    if parsed.duplicates > 0 {
        eprintln!(
            "warning: {} duplicate (user, item) pairs in {}; kept the last occurrence of each",
            parsed.duplicates,
            d.data.display()
        );
    }
    Ok((parsed.ratings, parsed.duplicates))
}

fn resolve_workers(requested: Option<usize>) -> usize {
    requested.unwrap_or_else(|| thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
}

fn split_spec(d: &DataArgs) -> SplitSpec {
    SplitSpec {
        train_fraction: d.train_fraction,
        seed: d.seed,
    }
}

fn measures_for(kinds: &[MeasureKind], min_overlap: usize) -> parcf::Result<Vec<SimilarityMeasure>> {
    kinds
        .iter()
        .map(|&kind| SimilarityMeasure::new(kind, min_overlap))
        .collect()
}

fn write_report(path: &Path, content: &str) -> anyhow::Result<()> {
    fs::write(path, content).with_context(|| format!("failed to write {}", path.display()))
}

fn cmd_eval(args: EvalArgs) -> anyhow::Result<()> {
    let (ratings, _) = load_ratings(&args.data)?;
    let workers = resolve_workers(args.workers);
    let threshold = RelevanceThreshold::new(args.cutoff)?;
    let spec = split_spec(&args.data);
    let measures = measures_for(&args.measure, args.min_overlap)?;

    let (rendered, n_rows) = if let Some(fractions) = &args.sparsity {
        anyhow::ensure!(
            args.top_n.len() == 1,
            "--sparsity sweeps keep fractions at one neighborhood size; pass exactly one --top-n value"
        );
        let n = args.top_n[0];
        let mut rows: Vec<SparsityRow> = Vec::new();
        for m in &measures {
            for (fraction, report) in
                sweep_sparsity(&ratings, fractions, n, m, &threshold, &spec, workers)?
            {
                rows.push(SparsityRow {
                    measure: m.kind,
                    fraction,
                    n,
                    report,
                });
            }
        }
        let rendered = match args.output_format {
            OutputFormat::Csv => report::sparsity_csv(&rows),
            OutputFormat::Json => report::sparsity_json(&rows),
        };
        (rendered, rows.len())
    } else {
        let dataset = split(&ratings, &spec)?;
        let mut rows: Vec<EvalRow> = Vec::new();
        for m in &measures {
            for (n, report) in sweep_top_n(&dataset, m, &args.top_n, &threshold, workers)? {
                rows.push(EvalRow {
                    measure: m.kind,
                    n,
                    report,
                });
            }
        }
        let rendered = match args.output_format {
            OutputFormat::Csv => report::eval_csv(&rows),
            OutputFormat::Json => report::eval_json(&rows),
        };
        (rendered, rows.len())
    };

    write_report(&args.output, &rendered)?;
    println!("wrote {} rows to {}", n_rows, args.output.display());
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> anyhow::Result<()> {
    let (ratings, _) = load_ratings(&args.data)?;
    let spec = split_spec(&args.data);
    let dataset = split(&ratings, &spec)?;
    let measures = measures_for(&args.measure, args.min_overlap)?;

    let info = MachineInfo::detect();
    let cores = match info.physical_cores {
        Some(n) => n.to_string(),
        None => "unknown".to_string(),
    };
    println!(
        "machine: {}/{}, {} logical cpus, {} physical cores",
        info.os, info.arch, info.logical_cpus, cores
    );
    println!(
        "dataset: {} train ratings, {} test ratings, {} users",
        dataset.train.n_ratings(),
        dataset.test.len(),
        dataset.train.n_users()
    );

    let records = parcf::run_bench(&dataset, &measures, &args.workers, args.top_n, args.repeats)?;
    let speedups = parcf::speedup_table(&records)?;

    println!("{:<9} {:>7} {:>12} {:>8}", "measure", "workers", "wall_ms", "speedup");
    for (rec, s) in records.iter().zip(&speedups) {
        println!(
            "{:<9} {:>7} {:>12.3} {:>8.2}",
            rec.measure.name(),
            rec.workers,
            rec.wall_ms,
            s.speedup
        );
    }

    let rendered = match args.output_format {
        OutputFormat::Csv => report::bench_csv(&records, &speedups),
        OutputFormat::Json => report::bench_json(&records, &speedups),
    };
    write_report(&args.output, &rendered)?;
    println!("wrote {} rows to {}", records.len(), args.output.display());
    Ok(())
}

/// Renders one rating as a MovieLens `.dat` line. Synthetic ratings are whole
/// numbers, so they are written without a fractional part.
fn dat_line(r: &RawRating) -> String {
    format!(
        "{}::{}::{}::{}\n",
        r.user_id, r.item_id, r.rating as i64, r.timestamp
    )
}

fn cmd_synth(args: SynthArgs) -> anyhow::Result<()> {
    let cfg = SynthConfig {
        n_users: args.users,
        n_items: args.items,
        n_clusters: args.clusters,
        density: args.density,
        noise: args.noise,
        seed: args.seed,
    };
    let ratings = generate(&cfg)?;
    let mut out = String::with_capacity(ratings.len() * 16);
    for r in &ratings {
        out.push_str(&dat_line(r));
    }
    write_report(&args.output, &out)?;
    println!("wrote {} ratings to {}", ratings.len(), args.output.display());
    Ok(())
}

fn cmd_split_stats(args: SplitStatsArgs) -> anyhow::Result<()> {
    let (ratings, duplicates) = load_ratings(&args.data)?;
    let spec = split_spec(&args.data);
    let dataset = split(&ratings, &spec)?;

    let stats = SplitStats {
        n_ratings: ratings.len(),
        n_train: dataset.train.n_ratings(),
        n_test_kept: dataset.test.len(),
        n_test_dropped: dataset.n_dropped_test,
        n_users: dataset.n_users,
        n_items: dataset.n_items,
        duplicate_warnings: duplicates,
        global_train_mean: dataset.train.global_mean(),
    };
    let rendered = match args.output_format {
        OutputFormat::Csv => report::split_stats_csv(&stats),
        OutputFormat::Json => report::split_stats_json(&stats),
    };
    match &args.output {
        Some(path) => write_report(path, &rendered)?,
        None => print!("{rendered}"),
    }
    Ok(())
}
