use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sma_truss_cli::config::{Config, PRESET_NAMES};
use sma_truss_cli::report::verify_bounds;
use sma_truss_cli::{run_to_dir, CliError, EXIT_OUTSIDE_BOX};

/// Simulate and control the shape-memory-alloy two-bar truss.
#[derive(Parser)]
#[command(name = "sma-truss", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a preset or config file and write timeseries.csv, poincare.csv,
    /// metrics.txt
    Run(RunArgs),
    /// Check the exponential-convergence box against a finished run
    VerifyBounds {
        /// Directory holding timeseries.csv and metrics.txt
        dir: PathBuf,
    },
    /// Run every preset concurrently, each into `<out>/<preset>/`
    Batch(BatchArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Preset: uncontrolled | fl | fuzzy-fl (omit when using --config)
    preset: Option<String>,
    /// TOML config file used instead of a preset
    #[arg(long, value_name = "PATH", conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Override a config value, e.g. dynamics.gamma=0.025 (repeatable)
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output directory
    #[arg(long, value_name = "DIR", default_value = "out")]
    out: PathBuf,
    /// Print the fully resolved config as TOML and exit without running
    #[arg(long)]
    dump_config: bool,
}

#[derive(Args)]
struct BatchArgs {
    /// Override applied to every preset (repeatable)
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output directory; presets land in subdirectories
    #[arg(long, value_name = "DIR", default_value = "out")]
    out: PathBuf,
}

fn load_config(preset: Option<&str>, file: Option<&PathBuf>, sets: &[String]) -> Result<Config, CliError> {
    let mut cfg = match (preset, file) {
        (_, Some(path)) => Config::from_toml(&std::fs::read_to_string(path)?)?,
        (Some(name), None) => Config::preset(name)?,
        (None, None) => {
            return Err(CliError::config(format!(
                "give a preset ({}) or --config <path>",
                PRESET_NAMES.join(", ")
            )))
        }
    };
    for spec in sets {
        cfg.apply_set(spec)?;
    }
    Ok(cfg)
}

fn cmd_run(args: &RunArgs) -> Result<(), CliError> {
    let cfg = load_config(args.preset.as_deref(), args.config.as_ref(), &args.set)?;
    let resolved = cfg.resolved()?;
    if args.dump_config {
        print!("{}", resolved.to_toml());
        return Ok(());
    }
    let sc = resolved.to_scenario()?;
    let result = run_to_dir(&args.out, &sc)?;
    let m = &result.metrics;
    println!("wrote {}", args.out.display());
    println!(
        "snap_through_count={} snap_through_count_total={} poincare_distinct={}",
        m.snap_through_count, m.snap_through_total, m.poincare_distinct
    );
    if let Some(rms) = m.rms_error {
        println!("rms_error={rms:e}");
    }
    if let Some(inside) = m.inside_box {
        println!("inside_box={inside}");
    }
    Ok(())
}

fn cmd_batch(args: &BatchArgs) -> Result<(), CliError> {
    let runs: Vec<(&str, Result<Config, CliError>)> = PRESET_NAMES
        .iter()
        .map(|name| (*name, load_config(Some(name), None, &args.set)))
        .collect();
    let mut failures: Vec<CliError> = Vec::new();
    std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for (name, cfg) in runs {
            let out = args.out.join(name);
            handles.push((
                name,
                scope.spawn(move || -> Result<(), CliError> {
                    let sc = cfg?.to_scenario()?;
                    run_to_dir(&out, &sc)?;
                    Ok(())
                }),
            ));
        }
        for (name, handle) in handles {
            match handle.join() {
                Ok(Ok(())) => println!("{name}: ok"),
                Ok(Err(e)) => {
                    eprintln!("{name}: {e}");
                    failures.push(e);
                }
                Err(_) => {
                    eprintln!("{name}: worker panicked");
                    failures.push(CliError::config("worker panicked".into()));
                }
            }
        }
    });
    match failures.into_iter().max_by_key(CliError::exit_code) {
        None => Ok(()),
        Some(e) => Err(e),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome: Result<i32, CliError> = match &cli.command {
        Command::Run(args) => cmd_run(args).map(|_| 0),
        Command::VerifyBounds { dir } => verify_bounds(dir).map(|report| {
            println!("{report}");
            if report.inside {
                0
            } else {
                EXIT_OUTSIDE_BOX
            }
        }),
        Command::Batch(args) => cmd_batch(args).map(|_| 0),
    };
    match outcome {
        Ok(0) => ExitCode::SUCCESS,
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
