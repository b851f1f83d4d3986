//! `sumfunc` — build exact arithmetic-function tables, run the named
//! experiments over them, and verify cached tables against the oracle.
//!
//! Exit codes: 0 all declared expectations held; 1 an expectation failed;
//! 2 usage error; 3 I/O or integrity failure.

use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand};
use sumfunc::config::{parse_config_text, ExperimentConfig};
use sumfunc::{cache_load, cache_store, run_experiment};
use sumfunc_core::{build_table, verify_table, CoreError, FunctionKind, DEFAULT_SEGMENT_SIZE};

#[derive(Parser)]
#[command(
    name = "sumfunc",
    version,
    about = "Exact tables of arithmetic functions and experiments on their partial sums"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sieve a table and store it in the cache directory.
    Build {
        /// Function kind (moebius, liouville, squarefree, prime, divisor-count,
        /// von-mangoldt, prime-log, constant:<c>).
        #[arg(long)]
        kind: String,
        /// Table covers 1..=limit.
        #[arg(long)]
        limit: u64,
        /// Sieve segment size.
        #[arg(long)]
        segment: Option<u64>,
        /// Cache directory to write into.
        #[arg(long)]
        cache: PathBuf,
    },
    /// Run a named experiment from a config file.
    Run {
        /// Experiment id (independence, density, distribution, charfun,
        /// taylor, clt, alternating, mertens-gap).
        #[arg(long)]
        experiment: String,
        /// Flat key = value config file.
        #[arg(long)]
        config: PathBuf,
        /// Output directory (overrides the config's `out`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a table against the factorization oracle.
    Verify {
        #[arg(long)]
        kind: String,
        #[arg(long)]
        limit: u64,
        /// Exhaustive check bound; values above it are spot-checked.
        #[arg(long)]
        up_to: u64,
        /// Load the table from this cache instead of sieving it fresh.
        #[arg(long)]
        cache: Option<PathBuf>,
        /// Seeded random spot checks above the exhaustive bound.
        #[arg(long, default_value_t = 10_000)]
        samples: u64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
}

fn exit_code_for(err: &CoreError) -> i32 {
    match err {
        CoreError::InvalidArgument(_)
        | CoreError::OutOfRange { .. }
        | CoreError::InsufficientData(_)
        | CoreError::NotInCatalog(_) => 2,
        CoreError::ResourceLimit { .. }
        | CoreError::Overflow(_)
        | CoreError::Integrity { .. }
        | CoreError::Io(_) => 3,
    }
}

/// Cap the global thread pool. The environment variable wins over the
/// config so reruns can pin parallelism without touching the file.
fn configure_threads(config_threads: Option<usize>) -> Result<(), CoreError> {
    let from_env = match std::env::var("SUMFUNC_THREADS") {
        Ok(v) => Some(v.parse::<usize>().map_err(|_| {
            CoreError::invalid(format!("SUMFUNC_THREADS=`{v}` is not an integer"))
        })?),
        Err(_) => None,
    };
    let threads = from_env.or(config_threads);
    if let Some(t) = threads {
        if t == 0 {
            return Err(CoreError::invalid("thread budget must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CoreError::invalid(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool, CoreError> {
    match cli.command {
        Command::Build {
            kind,
            limit,
            segment,
            cache,
        } => {
            configure_threads(None)?;
            let kind: FunctionKind = kind.parse()?;
            let start = Instant::now();
            let table = build_table(kind, limit, segment.unwrap_or(DEFAULT_SEGMENT_SIZE))?;
            let path = cache_store(&cache, &table)?;
            println!(
                "built kind={} limit={limit} in {:.2}s -> {}",
                kind.slug(),
                start.elapsed().as_secs_f64(),
                path.display()
            );
            Ok(true)
        }
        Command::Run {
            experiment,
            config,
            out,
        } => {
            let text = std::fs::read_to_string(&config)?;
            let map = parse_config_text(&text)?;
            let cfg = ExperimentConfig::resolve(&experiment, map, out)?;
            configure_threads(cfg.threads)?;
            run_experiment(&cfg)
        }
        Command::Verify {
            kind,
            limit,
            up_to,
            cache,
            samples,
            seed,
        } => {
            configure_threads(None)?;
            let kind: FunctionKind = kind.parse()?;
            // A cached table is loaded loudly — a corrupt file is an error
            // here, never silently rebuilt.
            let table = match &cache {
                Some(dir) => match cache_load(dir, kind, limit)? {
                    Some(table) => {
                        println!("loaded cached table for kind={} limit={limit}", kind.slug());
                        table
                    }
                    None => {
                        return Err(CoreError::Io(std::io::Error::new(
                            std::io::ErrorKind::NotFound,
                            format!(
                                "no cached table for kind={} limit={limit} under {}",
                                kind.slug(),
                                dir.display()
                            ),
                        )))
                    }
                },
                None => build_table(kind, limit, DEFAULT_SEGMENT_SIZE)?,
            };
            let report = verify_table(&table, up_to, samples, seed)?;
            println!(
                "verify: kind={} limit={} exhaustive={} sampled={} mismatches={}",
                kind.slug(),
                limit,
                report.checked_exhaustive,
                report.checked_sampled,
                report.mismatches.len()
            );
            for m in report.mismatches.iter().take(10) {
                println!("  mismatch at k={}: expected {} got {}", m.k, m.expected, m.got);
            }
            Ok(report.pass())
        }
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    let code = match run(cli) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(err) => {
            eprintln!("error: {err}");
            exit_code_for(&err)
        }
    };
    std::process::exit(code);
}
