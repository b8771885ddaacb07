use std::path::PathBuf;
use std::process::ExitCode;

use almost_thermal_cli::config::{Experiment, ExperimentConfig};
use almost_thermal_cli::error::CliError;
use almost_thermal_cli::run::{execute, output_dir, OUT_DIR_ENV};
use clap::Parser;

/// Run one experiment of the almost-thermal collisional model.
#[derive(Debug, Parser)]
#[command(name = "almost-thermal", version, after_help = format!(
    "Experiments: dynamics, work_dist, heat_dist, second_laws, long_term, scaling\n\
     Output directory defaults to ${OUT_DIR_ENV}.\n\
     Exit codes: 0 ok, 2 config error, 3 numeric-convergence error."
))]
struct Args {
    experiment: String,
    /// JSON config file; missing keys take the experiment defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv, or json to add a bundle with all tables.
    #[arg(long)]
    format: Option<String>,
    /// Override any config key, e.g. `--param sigma=0.05 --param p0=[0.5,0.9]`.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    params: Vec<String>,
    /// Disable the thread pool.
    #[arg(long)]
    sequential: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("almost-thermal: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(args: Args) -> Result<(), CliError> {
    let experiment: Experiment = args.experiment.parse()?;
    let mut overrides = Vec::new();
    for p in &args.params {
        let (k, v) = p
            .split_once('=')
            .ok_or_else(|| CliError::config("param", format!("expected KEY=VALUE, got `{p}`")))?;
        overrides.push((k.trim().to_owned(), v.trim().to_owned()));
    }
    if let Some(seed) = args.seed {
        overrides.push(("seed".into(), seed.to_string()));
    }
    if let Some(format) = &args.format {
        let f: almost_thermal_cli::OutputFormat = format.parse()?;
        overrides.push(("format".into(), serde_json::to_string(&f)?));
    }
    if args.sequential {
        overrides.push(("sequential".into(), "true".into()));
    }
    let cfg = match &args.config {
        Some(path) => ExperimentConfig::from_file(experiment, path, &overrides)?,
        None => ExperimentConfig::resolve(experiment, None, &overrides)?,
    };
    let dir = output_dir(args.out, &cfg);
    let manifest = execute(&cfg, &dir)?;
    for out in &manifest.outputs {
        println!("{}  {}", out.sha256, dir.join(&out.file).display());
    }
    Ok(())
}
