//! Command-line entry point: drive the pipeline from a JSON config.
//!
//! Exit codes: 0 = success, 2 = some countries failed, 1 = the run could
//! not start (bad usage, unreadable/invalid config, or data error).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hdicast::config::{self, PipelineConfig};
use hdicast::pipeline::{run_evaluate, run_forecast, run_pipeline, run_rank, RunSummary};

#[derive(Parser)]
#[command(
    name = "hdicast",
    version,
    about = "Rank predictors, fit boosted trees, and forecast HDI paths from a country panel"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the config file and report every violated invariant.
    Validate(StageArgs),
    /// Write the per-country predictor rankings.
    Rank(StageArgs),
    /// Tune, evaluate, and serialize per-country models (reuses existing
    /// ranking files in the output directory).
    Evaluate(StageArgs),
    /// Forecast HDI paths and draw the chart (reuses existing model or
    /// ranking files in the output directory).
    Forecast(StageArgs),
    /// Run every stage from scratch and write the manifest.
    RunAll(StageArgs),
}

#[derive(Args)]
struct StageArgs {
    /// Pipeline JSON config.
    #[arg(long)]
    config: PathBuf,
    /// Worker threads for per-country and per-grid-point parallelism
    /// (default: one per CPU core).
    #[arg(long)]
    workers: Option<usize>,
}

impl Command {
    fn args(&self) -> &StageArgs {
        match self {
            Command::Validate(a)
            | Command::Rank(a)
            | Command::Evaluate(a)
            | Command::Forecast(a)
            | Command::RunAll(a) => a,
        }
    }
}

fn main() -> ExitCode {
    // Usage errors exit 1, keeping 2 reserved for partial pipeline failures;
    // --help/--version still exit 0.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let failed = e.use_stderr();
            let _ = e.print();
            return ExitCode::from(u8::from(failed));
        }
    };
    ExitCode::from(run(&cli))
}

fn run(cli: &Cli) -> u8 {
    let args = cli.command.args();
    if let Some(workers) = args.workers {
        if workers == 0 {
            eprintln!("error: --workers must be at least 1");
            return 1;
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
        {
            eprintln!("error: cannot configure {workers} workers: {e}");
            return 1;
        }
    }
    let (config, base_dir) = match config::load(&args.config) {
        Ok(loaded) => loaded,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };

    let result = match cli.command {
        Command::Validate(_) => return validate(&config),
        Command::Rank(_) => run_rank(&config, &base_dir),
        Command::Evaluate(_) => run_evaluate(&config, &base_dir),
        Command::Forecast(_) => run_forecast(&config, &base_dir),
        Command::RunAll(_) => run_pipeline(&config, &base_dir),
    };
    match result {
        Ok(summary) => report(&summary),
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn validate(config: &PipelineConfig) -> u8 {
    match config.validate() {
        Ok(()) => {
            println!("config OK");
            0
        }
        Err(violations) => {
            for v in &violations {
                eprintln!("violation: {v}");
            }
            1
        }
    }
}

fn report(summary: &RunSummary) -> u8 {
    for path in &summary.outputs {
        println!("wrote {}", path.display());
    }
    if summary.failures.is_empty() {
        0
    } else {
        for failure in &summary.failures {
            eprintln!("error: {failure}");
        }
        2
    }
}
