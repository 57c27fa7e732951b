//! Experiment orchestration: run kernels against the oracle over sampled
//! pairs, tally ulp-error distributions, and emit CSV/text reports.

use std::fmt::Write as _;
use std::fs;
use std::hint::black_box;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use thiserror::Error;

use crate::fp::{ulp_distance, BinaryFloat, FormatTag};
use crate::kernels::{dispatch, AlgorithmId};
use crate::oracle::oracle_hypot;
use crate::sampling::{SamplerKind, SamplerSpec};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("algorithm set must not be empty")]
    EmptyAlgorithms,
    #[error("the clib kernel is only defined for binary64")]
    ClibNeedsBinary64,
    #[error("exponent gap {0} does not fit the {1} exponent range")]
    GapOutOfRange(u32, FormatTag),
    #[error("benchmark needs at least 3 repetitions, got {0}")]
    TooFewRepetitions(usize),
    #[error("nothing to report")]
    NoTables,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One experiment cell: a sampler, the kernels to run, and how to run them.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub sampler: SamplerSpec,
    pub algorithms: Vec<AlgorithmId>,
    pub format: FormatTag,
    pub shards: usize,
}

impl ExperimentSpec {
    fn validate(&self) -> Result<(), ExperimentError> {
        if self.algorithms.is_empty() {
            return Err(ExperimentError::EmptyAlgorithms);
        }
        if self.format != FormatTag::Binary64
            && self.algorithms.iter().any(|a| a.requires_binary64())
        {
            return Err(ExperimentError::ClibNeedsBinary64);
        }
        if let SamplerKind::ExponentGap { gap_n } = self.sampler.kind {
            let max = match self.format {
                FormatTag::Binary32 => f32::MAX_FINITE_EXP,
                FormatTag::Binary64 => f64::MAX_FINITE_EXP,
            };
            if i64::from(gap_n) >= max {
                return Err(ExperimentError::GapOutOfRange(gap_n, self.format));
            }
        }
        Ok(())
    }
}

/// Counts of |ulp| = 0, 1, 2, >=3 deviations from the oracle.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct UlpBuckets {
    pub ulp0: u64,
    pub ulp1: u64,
    pub ulp2: u64,
    pub ulp3plus: u64,
}

impl UlpBuckets {
    fn record(&mut self, distance: i128) {
        match distance.unsigned_abs() {
            0 => self.ulp0 += 1,
            1 => self.ulp1 += 1,
            2 => self.ulp2 += 1,
            _ => self.ulp3plus += 1,
        }
    }

    fn merge(&mut self, other: &UlpBuckets) {
        self.ulp0 += other.ulp0;
        self.ulp1 += other.ulp1;
        self.ulp2 += other.ulp2;
        self.ulp3plus += other.ulp3plus;
    }

    pub fn total(&self) -> u64 {
        self.ulp0 + self.ulp1 + self.ulp2 + self.ulp3plus
    }

    /// Everything that is not the correctly rounded value.
    pub fn incorrect(&self) -> u64 {
        self.total() - self.ulp0
    }
}

/// Tally of one cell: per-algorithm bucket counts plus the spec echo needed
/// to reproduce the run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResultTable {
    /// Exponent gap for uniform cells; None for the normal-pair sampler.
    pub gap_n: Option<u32>,
    pub seed: u64,
    pub samples: u64,
    pub rows: Vec<(AlgorithmId, UlpBuckets)>,
}

impl ResultTable {
    pub fn buckets(&self, id: AlgorithmId) -> Option<&UlpBuckets> {
        self.rows.iter().find(|(a, _)| *a == id).map(|(_, b)| b)
    }

    pub fn pct(&self, count: u64) -> f64 {
        100.0 * count as f64 / self.samples as f64
    }

    pub fn pct_incorrect(&self, id: AlgorithmId) -> f64 {
        self.pct(self.buckets(id).map_or(0, |b| b.incorrect()))
    }

    pub fn pct_ulp1(&self, id: AlgorithmId) -> f64 {
        self.pct(self.buckets(id).map_or(0, |b| b.ulp1))
    }

    pub fn pct_ulp2(&self, id: AlgorithmId) -> f64 {
        self.pct(self.buckets(id).map_or(0, |b| b.ulp2))
    }
}

fn run_shard<T: BinaryFloat>(shard: &SamplerSpec, algorithms: &[AlgorithmId]) -> Vec<UlpBuckets> {
    let mut tallies = vec![UlpBuckets::default(); algorithms.len()];
    for (a, b) in shard.generate::<T>() {
        let reference = oracle_hypot(a, b).expect("samplers yield finite pairs");
        for (tally, &id) in tallies.iter_mut().zip(algorithms) {
            let h = dispatch(id, a, b);
            if h == reference {
                tally.record(0);
            } else {
                match ulp_distance(h, reference) {
                    Ok(d) => tally.record(d),
                    // non-finite kernel result against a finite reference
                    Err(_) => tally.record(i128::MAX),
                }
            }
        }
    }
    tallies
}

fn run_format<T: BinaryFloat>(spec: &ExperimentSpec) -> Vec<UlpBuckets> {
    let shards = spec.sampler.split(spec.shards.max(1));
    let parts: Vec<Vec<UlpBuckets>> = shards
        .par_iter()
        .map(|shard| run_shard::<T>(shard, &spec.algorithms))
        .collect();
    let mut merged = vec![UlpBuckets::default(); spec.algorithms.len()];
    for part in &parts {
        for (m, p) in merged.iter_mut().zip(part) {
            m.merge(p);
        }
    }
    merged
}

/// Run one cell: every sampled pair goes through every requested kernel and
/// is compared against the shared oracle value. Deterministic in the spec,
/// including the shard count.
pub fn run_cell(spec: &ExperimentSpec) -> Result<ResultTable, ExperimentError> {
    spec.validate()?;
    let tallies = match spec.format {
        FormatTag::Binary64 => run_format::<f64>(spec),
        FormatTag::Binary32 => run_format::<f32>(spec),
    };
    let table = ResultTable {
        gap_n: match spec.sampler.kind {
            SamplerKind::ExponentGap { gap_n } => Some(gap_n),
            SamplerKind::NormalPair => None,
        },
        seed: spec.sampler.seed,
        samples: spec.sampler.count,
        rows: spec.algorithms.iter().copied().zip(tallies).collect(),
    };
    for (_, buckets) in &table.rows {
        debug_assert_eq!(buckets.total(), table.samples);
    }
    Ok(table)
}

/// All six kernels over standard-normal binary64 pairs.
pub fn run_table1(seed: u64, count: u64, shards: usize) -> Result<ResultTable, ExperimentError> {
    run_cell(&ExperimentSpec {
        sampler: SamplerSpec::normal(seed, count),
        algorithms: AlgorithmId::ALL.to_vec(),
        format: FormatTag::Binary64,
        shards,
    })
}

/// All six kernels over exponent-gap cells, one table per requested gap.
pub fn run_table2(
    seed: u64,
    count: u64,
    n_values: &[u32],
    shards: usize,
) -> Result<Vec<ResultTable>, ExperimentError> {
    n_values
        .iter()
        .map(|&n| {
            run_cell(&ExperimentSpec {
                sampler: SamplerSpec::exponent_gap(n, seed, count),
                algorithms: AlgorithmId::ALL.to_vec(),
                format: FormatTag::Binary64,
                shards,
            })
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct BenchRow {
    pub algorithm: AlgorithmId,
    pub median_ns: f64,
    pub min_ns: f64,
    pub max_ns: f64,
}

#[derive(Debug, Clone)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    pub batch: u64,
    pub repetitions: usize,
}

impl BenchReport {
    pub fn median_ns(&self, id: AlgorithmId) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.algorithm == id)
            .map(|r| r.median_ns)
    }
}

impl std::fmt::Display for BenchReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(
            f,
            "batch {} pairs, {} repetitions, median ns/call",
            self.batch, self.repetitions
        )?;
        for row in &self.rows {
            writeln!(
                f,
                "{:<18} {:>9.2} ns  (min {:.2}, max {:.2})",
                row.algorithm, row.median_ns, row.min_ns, row.max_ns
            )?;
        }
        Ok(())
    }
}

fn bench_format<T: BinaryFloat>(spec: &ExperimentSpec, repetitions: usize) -> Vec<BenchRow> {
    let pairs: Vec<(T, T)> = spec.sampler.generate::<T>().collect();
    let mut rows = Vec::with_capacity(spec.algorithms.len());
    for &id in &spec.algorithms {
        // warm-up pass, also keeps the optimizer honest via the sink
        let mut sink = T::zero();
        for &(a, b) in &pairs {
            sink = sink + dispatch(id, black_box(a), black_box(b));
        }
        black_box(sink);
        let mut times_ns = Vec::with_capacity(repetitions);
        for _ in 0..repetitions {
            let mut sink = T::zero();
            let t0 = Instant::now();
            for &(a, b) in &pairs {
                sink = sink + dispatch(id, black_box(a), black_box(b));
            }
            let elapsed = t0.elapsed();
            black_box(sink);
            times_ns.push(elapsed.as_nanos() as f64 / pairs.len() as f64);
        }
        times_ns.sort_by(|a, b| a.partial_cmp(b).unwrap());
        rows.push(BenchRow {
            algorithm: id,
            median_ns: times_ns[times_ns.len() / 2],
            min_ns: times_ns[0],
            max_ns: *times_ns.last().unwrap(),
        });
    }
    rows
}

/// Median per-call latency per kernel over identical input batches.
/// Ranking information only; no accuracy assertions.
pub fn bench(spec: &ExperimentSpec, repetitions: usize) -> Result<BenchReport, ExperimentError> {
    spec.validate()?;
    if repetitions < 3 {
        return Err(ExperimentError::TooFewRepetitions(repetitions));
    }
    let rows = match spec.format {
        FormatTag::Binary64 => bench_format::<f64>(spec, repetitions),
        FormatTag::Binary32 => bench_format::<f32>(spec, repetitions),
    };
    Ok(BenchReport {
        rows,
        batch: spec.sampler.count,
        repetitions,
    })
}

const CSV_HEADER: &str = "n_gap,algorithm,samples,ulp0,ulp1,ulp2,ulp3plus,pct_incorrect";

fn gap_field(table: &ResultTable) -> String {
    table.gap_n.map(|n| n.to_string()).unwrap_or_default()
}

/// Render the bucket CSV (one row per table and algorithm).
pub fn render_csv(tables: &[ResultTable]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for table in tables {
        for (id, buckets) in &table.rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{:.7}",
                gap_field(table),
                id,
                table.samples,
                buckets.ulp0,
                buckets.ulp1,
                buckets.ulp2,
                buckets.ulp3plus,
                table.pct(buckets.incorrect()),
            )
            .unwrap();
        }
    }
    out
}

/// Render the plot-ready long-format CSV: gap versus percent incorrectly
/// rounded, one series per algorithm.
pub fn render_curve_csv(tables: &[ResultTable]) -> String {
    let mut out = String::from("n_gap,algorithm,pct_incorrect\n");
    for table in tables {
        for (id, buckets) in &table.rows {
            writeln!(
                out,
                "{},{},{:.7}",
                gap_field(table),
                id,
                table.pct(buckets.incorrect()),
            )
            .unwrap();
        }
    }
    out
}

/// Render the human-readable summary.
pub fn render_summary(tables: &[ResultTable]) -> String {
    let mut out = String::new();
    for table in tables {
        match table.gap_n {
            Some(n) => writeln!(
                out,
                "exponent gap {n}: {} pairs, seed {}",
                table.samples, table.seed
            )
            .unwrap(),
            None => writeln!(
                out,
                "standard normal pairs: {} samples, seed {}",
                table.samples, table.seed
            )
            .unwrap(),
        }
        writeln!(
            out,
            "  {:<18} {:>10} {:>10} {:>8} {:>8} {:>12} {:>12}",
            "algorithm", "ulp0", "ulp1", "ulp2", "ulp3+", "one-ulp %", "incorrect %"
        )
        .unwrap();
        for (id, buckets) in &table.rows {
            writeln!(
                out,
                "  {:<18} {:>10} {:>10} {:>8} {:>8} {:>12.7} {:>12.7}",
                id.tag(),
                buckets.ulp0,
                buckets.ulp1,
                buckets.ulp2,
                buckets.ulp3plus,
                table.pct(buckets.ulp1),
                table.pct(buckets.incorrect()),
            )
            .unwrap();
        }
        out.push('\n');
    }
    out
}

/// Write the CSV, plot-ready CSV, and text summary for a batch of tables.
/// Validates everything before the first file is created, so a failed call
/// leaves no partial output behind.
pub fn emit_report(
    tables: &[ResultTable],
    dir: &Path,
    stem: &str,
) -> Result<Vec<PathBuf>, ExperimentError> {
    if tables.is_empty() || tables.iter().any(|t| t.rows.is_empty()) {
        return Err(ExperimentError::NoTables);
    }
    let csv = render_csv(tables);
    let curve = render_curve_csv(tables);
    let summary = render_summary(tables);
    fs::create_dir_all(dir)?;
    let paths = [
        (dir.join(format!("{stem}.csv")), csv),
        (dir.join(format!("{stem}_curve.csv")), curve),
        (dir.join(format!("{stem}_summary.txt")), summary),
    ];
    let mut written = Vec::new();
    for (path, contents) in paths {
        fs::write(&path, contents)?;
        written.push(path);
    }
    Ok(written)
}
