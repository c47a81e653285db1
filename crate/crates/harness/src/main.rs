use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use stria_core::diag::DiagnosticsRecord;
use stria_harness::config::load_config;
use stria_harness::converge::converge;
use stria_harness::run::{self, RunError};
use stria_harness::validate::{run_suite, Mutation};

/// Simulations and diagnostics for 2D inhomogeneous incompressible Euler
/// flows with striated regularity.
#[derive(Parser)]
#[command(name = "stria", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a configured scenario, writing diagnostics and snapshots.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Continue from a snapshot directory.
        #[arg(long)]
        resume: Option<PathBuf>,
    },
    /// Run the invariant suite.
    Validate {
        /// Inject a known defect: none, baroclinic-sign or ladder-partition.
        #[arg(long, default_value = "none")]
        mutate: Mutation,
    },
    /// Temporal and spatial convergence study of a configured scenario.
    Converge {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 3)]
        levels: usize,
    },
    /// Recompute the diagnostics of a stored snapshot.
    Diagnose {
        #[arg(long)]
        snapshot: PathBuf,
        /// Take the Lebesgue exponents and margin from this config.
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

/// Sizes the global thread pool from `STRIA_THREADS`.
fn init_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("STRIA_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| format!("STRIA_THREADS = {v:?} must be a positive integer"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn fail(e: &RunError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(e.exit_code() as u8)
}

fn print_record(rec: &DiagnosticsRecord) {
    let header = DiagnosticsRecord::csv_header();
    let row = rec.csv_row();
    for (name, value) in header.split(',').zip(row.split(',')) {
        println!("{name:>22}  {value}");
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Err(e) = init_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    match cli.command {
        Command::Run { config, out, resume } => {
            let cfg = match load_config(&config) {
                Ok(c) => c,
                Err(e) => return fail(&e.into()),
            };
            match run::run(&cfg, &out, resume.as_deref()) {
                Ok(s) => {
                    println!(
                        "completed {} steps to t = {:.6}; lifespan bound {}; results in {}",
                        s.steps,
                        s.t_final,
                        s.lifespan_bound.map_or("n/a".into(), |t| format!("{t:.4e}")),
                        out.display()
                    );
                    ExitCode::SUCCESS
                }
                Err(e) => fail(&e),
            }
        }
        Command::Validate { mutate } => {
            let report = run_suite(mutate);
            println!("{report}");
            if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Command::Converge { config, levels } => {
            let cfg = match load_config(&config) {
                Ok(c) => c,
                Err(e) => return fail(&e.into()),
            };
            match converge(&cfg, levels) {
                Ok(report) => {
                    println!("{report}");
                    if report.passed() {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(1)
                    }
                }
                Err(e) => fail(&e),
            }
        }
        Command::Diagnose { snapshot, config } => {
            let cfg = match config.as_deref().map(load_config).transpose() {
                Ok(c) => c,
                Err(e) => return fail(&e.into()),
            };
            match run::diagnose(&snapshot, cfg.as_ref()) {
                Ok(rec) => {
                    print_record(&rec);
                    ExitCode::SUCCESS
                }
                Err(e) => fail(&e),
            }
        }
    }
}
