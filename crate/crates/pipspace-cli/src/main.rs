//! Batch front end: parse an experiment config, run one command (or all
//! of them), write a deterministic report file, and exit nonzero when
//! any axiom or law check fails.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use commands::{CliError, Report};

#[derive(Debug, Parser)]
#[command(
    name = "pipspace",
    about = "Exact lattices of weighted sequence spaces, operator calculus, and Čech cohomology of operator (co)sheaves"
)]
struct Args {
    /// Experiment configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// One of: close-lattice, classify-op, category-check, sheaf-check,
    /// cosheaf-check, cohomology, glue, report-all.
    #[arg(long)]
    command: String,
    /// Output directory for report files.
    #[arg(long, default_value = "reports")]
    out: PathBuf,
    /// Maximum cochain degree (overrides the config's params.p_max).
    #[arg(long)]
    pmax: Option<usize>,
    /// Grade cap for operator-generated categories (overrides params.n_max).
    #[arg(long)]
    nmax: Option<u32>,
    /// Tolerance for numeric tail sums, as a rational like 1/1000000.
    #[arg(long)]
    tol: Option<String>,
    /// Seed for sampled property checks.
    #[arg(long)]
    seed: Option<u64>,
}

fn run(args: &Args) -> Result<Report, CliError> {
    let raw = config::load(&args.config)?;
    let overrides = config::RawParams {
        p_max: args.pmax,
        n_max: args.nmax,
        tol: args.tol.clone(),
        seed: args.seed,
    };
    let exp = config::resolve(&raw, &overrides)?;
    match args.command.as_str() {
        "close-lattice" => commands::close_lattice(&exp),
        "classify-op" => commands::classify_op(&exp),
        "category-check" => commands::category_check(&exp),
        "sheaf-check" => commands::sheaf_check(&exp),
        "cosheaf-check" => commands::cosheaf_check(&exp),
        "cohomology" => commands::cohomology(&exp),
        "glue" => commands::glue(&exp),
        "report-all" => commands::report_all(&exp),
        other => Err(CliError::Config(config::ConfigError::Parse {
            path: args.config.display().to_string(),
            message: format!(
                "unknown command '{other}' (expected close-lattice, classify-op, category-check, sheaf-check, cosheaf-check, cohomology, glue, or report-all)"
            ),
        })),
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(report) => {
            if let Err(e) = std::fs::create_dir_all(&args.out) {
                eprintln!("error: cannot create {}: {e}", args.out.display());
                return ExitCode::from(2);
            }
            let path = args.out.join(format!("{}.report.txt", report.title));
            if let Err(e) = std::fs::write(&path, report.render()) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(2);
            }
            println!("{}", report.render());
            println!("report written to {}", path.display());
            if report.violations > 0 {
                eprintln!("{} violation(s) detected", report.violations);
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
