//! `dcim` — design-space exploration and netlist generation for digital
//! compute-in-memory macros.
//!
//! Exit codes: 0 success, 2 rejected input, 3 infeasible exploration
//! envelope, 4 internal invariant failure. Every failure writes one
//! machine-readable JSON object to stderr.

use std::panic::{self, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use dcim_cli::commands::{run_command, Command};
use dcim_cli::config::{RawConfig, RunConfig};
use dcim_cli::error::CliError;

#[derive(Parser)]
#[command(
    name = "dcim",
    version,
    about = "Design-space exploration and netlist generation for digital \
             compute-in-memory macros",
    after_help = "Configuration is flat `key = value` text (see the README for \
                  the key table); flags override file keys. All artifacts go \
                  under the configured output directory."
)]
struct Cli {
    #[command(subcommand)]
    command: CommandArg,
}

#[derive(Subcommand)]
enum CommandArg {
    /// Cost breakdown for one explicit design point (point.N/H/L/k)
    Estimate(CommonArgs),
    /// Multi-objective search; exports the frontier as CSV and JSON
    Explore(CommonArgs),
    /// Exhaustive enumeration of the bounded design space
    Enumerate(CommonArgs),
    /// Search versus exhaustive frontier: hypervolume ratio report
    Compare(CommonArgs),
    /// Randomized functional simulation check for one design point
    Simulate(CommonArgs),
    /// Structural Verilog for the selected (filtered) frontier entries
    Generate(CommonArgs),
}

impl CommandArg {
    fn split(&self) -> (Command, &CommonArgs) {
        match self {
            CommandArg::Estimate(a) => (Command::Estimate, a),
            CommandArg::Explore(a) => (Command::Explore, a),
            CommandArg::Enumerate(a) => (Command::Enumerate, a),
            CommandArg::Compare(a) => (Command::Compare, a),
            CommandArg::Simulate(a) => (Command::Simulate, a),
            CommandArg::Generate(a) => (Command::Generate, a),
        }
    }
}

#[derive(Args)]
struct CommonArgs {
    /// Run configuration file (flat `key = value` lines)
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Override one configuration key, e.g. --set ga.population=60
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,

    /// Search seed (overrides `ga.seed`)
    #[arg(long)]
    seed: Option<u64>,

    /// Cost-evaluation worker threads (overrides `jobs`)
    #[arg(long)]
    jobs: Option<usize>,

    /// Output directory for all artifacts (overrides `output_dir`)
    #[arg(long, value_name = "DIR")]
    output_dir: Option<PathBuf>,

    /// Cell-library override file (overrides `tech.path`; default from
    /// the DCIM_TECH environment variable)
    #[arg(long, value_name = "FILE")]
    tech: Option<PathBuf>,

    /// Objective predicate such as "area<=12000" (repeatable; overrides
    /// `filter`)
    #[arg(long, value_name = "PREDICATE")]
    filter: Vec<String>,

    /// Design tag to keep (repeatable; overrides `select`)
    #[arg(long, value_name = "TAG")]
    select: Vec<String>,

    /// Write per-objective tab-separated scatter files next to the frontier
    #[arg(long)]
    emit_plot_data: bool,

    /// Exhaustive-enumeration size cap (overrides `grid_cap`)
    #[arg(long, value_name = "COUNT")]
    grid_cap: Option<u64>,
}

fn resolve_config(args: &CommonArgs) -> Result<RunConfig, CliError> {
    let mut raw = RawConfig::new();
    if let Some(path) = &args.config {
        raw.load_file(path)?;
    }
    raw.apply_set_pairs(&args.set)?;
    if let Some(seed) = args.seed {
        raw.set("ga.seed", &seed.to_string())?;
    }
    if let Some(jobs) = args.jobs {
        raw.set("jobs", &jobs.to_string())?;
    }
    if let Some(dir) = &args.output_dir {
        raw.set("output_dir", &dir.display().to_string())?;
    }
    if let Some(tech) = &args.tech {
        raw.set("tech.path", &tech.display().to_string())?;
    }
    if !args.filter.is_empty() {
        raw.set("filter", &args.filter.join(","))?;
    }
    if !args.select.is_empty() {
        raw.set("select", &args.select.join(","))?;
    }
    if args.emit_plot_data {
        raw.set("emit_plot_data", "true")?;
    }
    if let Some(cap) = args.grid_cap {
        raw.set("grid_cap", &cap.to_string())?;
    }
    raw.resolve()
}

fn run() -> Result<(), CliError> {
    let cli = Cli::parse();
    let (command, args) = cli.command.split();
    let cfg = resolve_config(args)?;
    run_command(&cfg, command)
}

fn fail(err: &CliError) -> ExitCode {
    eprintln!("{}", err.to_json());
    ExitCode::from(err.exit_code() as u8)
}

fn main() -> ExitCode {
    // A panic signals a broken internal invariant; report it in the same
    // machine-readable form as ordinary errors (exit code 4). The default
    // hook's backtrace chatter is suppressed so stderr stays parseable.
    panic::set_hook(Box::new(|_| {}));
    match panic::catch_unwind(AssertUnwindSafe(run)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(err)) => fail(&err),
        Err(payload) => {
            let detail = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".to_string());
            fail(&CliError::internal(format!("internal invariant failed: {detail}")))
        }
    }
}
