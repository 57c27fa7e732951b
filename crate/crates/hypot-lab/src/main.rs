//! Command-line front door: single evaluations, experiment tables,
//! verification sweeps, and benchmarks.

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Parser, Subcommand};

use hypot_lab::experiments::{self, ExperimentError, ExperimentSpec};
use hypot_lab::fp::FormatTag;
use hypot_lab::hexfloat::{format_hex, parse_float};
use hypot_lab::kernels::{dispatch, AlgorithmId};
use hypot_lab::oracle::oracle_hypot;
use hypot_lab::sampling::SamplerSpec;
use hypot_lab::verify;
use hypot_lab::{ulp_distance, BinaryFloat};

/// Fixed default seed so fresh checkouts reproduce the committed reference
/// CSVs byte for byte.
const DEFAULT_SEED: u64 = 0xB0C4E5;

/// Environment variable overriding the default shard count.
const SHARDS_ENV: &str = "HYPOT_LAB_SHARDS";

#[derive(Parser)]
#[command(
    name = "hypot-lab",
    version,
    about = "Measure sqrt(a^2+b^2) kernels against an exact correctly-rounded oracle"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one pair and compare each kernel with the oracle
    Single {
        /// First operand: decimal or hex-float literal (e.g. 0x1.8p-3)
        a: String,
        /// Second operand
        b: String,
        /// Kernel name or `all`
        #[arg(long, default_value = "all")]
        algo: String,
        /// binary32 or binary64
        #[arg(long, default_value = "binary64")]
        format: String,
    },
    /// Ulp-error distribution of all kernels over standard-normal pairs
    Table1 {
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
        /// Output directory for the CSV and summary files
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Parallelism degree (default: $HYPOT_LAB_SHARDS or machine cores)
        #[arg(long)]
        shards: Option<usize>,
    },
    /// Percent of incorrectly rounded results across exponent gaps
    Table2 {
        /// Comma-separated gap list, e.g. 0,5,27; default 0..=29
        #[arg(long = "n-list", value_delimiter = ',')]
        n_list: Option<Vec<u32>>,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Sample pairs per gap value
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        shards: Option<usize>,
    },
    /// Run the seeded property sweep; nonzero exit on any violation
    Verify {
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Median per-call latency per kernel over an identical batch
    Bench {
        #[arg(long, default_value_t = 200_000)]
        samples: u64,
        #[arg(long, default_value_t = 5)]
        reps: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
}

enum CliError {
    /// Bad flags or literals: exit 2 before any computation starts.
    Usage(String),
    /// Property violation or runtime failure: exit 1.
    Failure(String),
}

impl From<ExperimentError> for CliError {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::Io(_) => CliError::Failure(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Single { a, b, algo, format } => {
            let tag = FormatTag::from_str(&format).map_err(|e| CliError::Usage(e.to_string()))?;
            let algos = resolve_algos(&algo, tag)?;
            match tag {
                FormatTag::Binary64 => single::<f64>(&a, &b, &algos),
                FormatTag::Binary32 => single::<f32>(&a, &b, &algos),
            }
        }
        Command::Table1 { seed, samples, out, shards } => {
            let shards = resolve_shards(shards)?;
            let table = experiments::run_table1(seed, samples, shards)?;
            let tables = vec![table];
            print!("{}", experiments::render_summary(&tables));
            let files = experiments::emit_report(&tables, &out, "table1")?;
            report_files(&files);
            Ok(())
        }
        Command::Table2 { n_list, seed, samples, out, shards } => {
            let shards = resolve_shards(shards)?;
            let gaps = n_list.unwrap_or_else(|| (0..=29).collect());
            if gaps.is_empty() {
                return Err(CliError::Usage("gap list must not be empty".into()));
            }
            let tables = experiments::run_table2(seed, samples, &gaps, shards)?;
            print!("{}", experiments::render_summary(&tables));
            let files = experiments::emit_report(&tables, &out, "table2")?;
            report_files(&files);
            Ok(())
        }
        Command::Verify { samples, seed } => {
            let mut failed = false;
            for report in verify::run_all(samples, seed) {
                match report.outcome {
                    Ok(()) => println!("ok   {}", report.name),
                    Err(v) => {
                        failed = true;
                        println!("FAIL {}: {}", report.name, v.detail);
                    }
                }
            }
            if failed {
                Err(CliError::Failure("property sweep failed".into()))
            } else {
                Ok(())
            }
        }
        Command::Bench { samples, reps, seed } => {
            let spec = ExperimentSpec {
                sampler: SamplerSpec::normal(seed, samples),
                algorithms: AlgorithmId::ALL.to_vec(),
                format: FormatTag::Binary64,
                shards: 1,
            };
            let report = experiments::bench(&spec, reps)?;
            print!("{report}");
            Ok(())
        }
    }
}

fn resolve_algos(algo: &str, tag: FormatTag) -> Result<Vec<AlgorithmId>, CliError> {
    if algo == "all" {
        // clib only exists for binary64; `all` means all that apply
        Ok(AlgorithmId::ALL
            .into_iter()
            .filter(|a| tag == FormatTag::Binary64 || !a.requires_binary64())
            .collect())
    } else {
        let id = AlgorithmId::from_str(algo)
            .map_err(|_| CliError::Usage(format!("unknown algorithm `{algo}`")))?;
        if id.requires_binary64() && tag != FormatTag::Binary64 {
            return Err(CliError::Usage(
                "the clib kernel is only defined for binary64".into(),
            ));
        }
        Ok(vec![id])
    }
}

fn resolve_shards(flag: Option<usize>) -> Result<usize, CliError> {
    if let Some(s) = flag {
        if s == 0 {
            return Err(CliError::Usage("shard count must be at least 1".into()));
        }
        return Ok(s);
    }
    if let Ok(env) = std::env::var(SHARDS_ENV) {
        return env
            .parse::<usize>()
            .ok()
            .filter(|&s| s >= 1)
            .ok_or_else(|| CliError::Usage(format!("invalid {SHARDS_ENV} value `{env}`")));
    }
    Ok(std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn single<T: BinaryFloat>(a: &str, b: &str, algos: &[AlgorithmId]) -> Result<(), CliError> {
    let x: T = parse_float(a).map_err(|e| CliError::Usage(e.to_string()))?;
    let y: T = parse_float(b).map_err(|e| CliError::Usage(e.to_string()))?;
    let reference = oracle_hypot(x, y).ok();
    match reference {
        Some(r) => println!("oracle: {} ({})", r, format_hex(r)),
        None => println!("oracle: n/a (non-finite input)"),
    }
    for &id in algos {
        let h = dispatch(id, x, y);
        let ulp = reference
            .and_then(|r| ulp_distance(h, r).ok())
            .map(|d| format!("{d:+}"))
            .unwrap_or_else(|| "n/a".to_string());
        println!(
            "{:<18} result {} ({})  ulp {}",
            id.tag(),
            h,
            format_hex(h),
            ulp
        );
    }
    Ok(())
}

fn report_files(files: &[PathBuf]) {
    for f in files {
        println!("wrote {}", f.display());
    }
}
