use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qsdyn_cli::{emit_report, run_paths, CliError, Pipeline, RunOptions, EXIT_CONFIG, EXIT_INTERNAL, EXIT_MISMATCH, EXIT_PASS};

#[derive(Parser)]
#[command(name = "qsdyn", version, about = "Run S-arithmetic dynamics scenarios and report on them")]
struct Cli {
    /// Master seed; overrides the seed in every config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Multiplies Monte-Carlo sample counts.
    #[arg(long, global = true, default_value_t = 1.0)]
    samples_scale: f64,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Configs {
    /// Scenario files, run in order.
    #[arg(required = true)]
    configs: Vec<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Stability of translator families against a window.
    Stability(Configs),
    /// (C, alpha)-goodness of polynomial candidates.
    Goodfn(Configs),
    /// Focusing classification and the nondivergence dichotomy.
    Linearise(Configs),
    /// Translated-window equidistribution and escape experiments.
    Simulate(Configs),
    /// Summarise the artifacts in the output directory.
    Report,
}

fn run(cli: Cli) -> Result<i32, CliError> {
    if !(cli.samples_scale > 0.0 && cli.samples_scale.is_finite()) {
        let err = qsdyn_cli::ConfigError { line: None, field: "--samples-scale".into(), message: "must be positive".into() };
        return Err(CliError::Config { path: "command line".into(), err });
    }
    let opts = RunOptions { seed: cli.seed, out_dir: cli.out_dir, samples_scale: cli.samples_scale };
    let (pipeline, configs) = match cli.cmd {
        Cmd::Report => {
            let r = emit_report(&opts.out_dir)?;
            print!("{}", r.summary);
            return Ok(if r.all_pass { EXIT_PASS } else { EXIT_MISMATCH });
        }
        Cmd::Stability(c) => (Pipeline::Stability, c.configs),
        Cmd::Goodfn(c) => (Pipeline::Goodfn, c.configs),
        Cmd::Linearise(c) => (Pipeline::Linearise, c.configs),
        Cmd::Simulate(c) => (Pipeline::Simulate, c.configs),
    };
    let results = run_paths(&configs, Some(pipeline), &opts)?;
    for r in &results {
        println!("{}", r.summary);
    }
    Ok(if results.iter().all(|r| r.matched()) { EXIT_PASS } else { EXIT_MISMATCH })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_INTERNAL as u8);
        }
    }
    let code = match run(cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    debug_assert!([EXIT_PASS, EXIT_MISMATCH, EXIT_CONFIG, EXIT_INTERNAL].contains(&code));
    ExitCode::from(code as u8)
}
