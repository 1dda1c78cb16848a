use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use nlkg::cli_io::{parse_config, parse_config_str, run_experiment, write_outputs, Experiment};

/// Experiments for the 1D cubic Klein-Gordon equation.
#[derive(Parser)]
#[command(name = "nlkg", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decay of weighted propagator norms.
    LocalDecay(Opts),
    /// sup of t^{1/2}|u| inside the light cone.
    InteriorDecay(Opts),
    /// Weighted decay and energy outside the light cone.
    ExteriorDecay(Opts),
    /// Growth of the hyperboloidal energy.
    EnergyGrowth(Opts),
    /// Weighted norms of the variable-coefficient part u₁.
    WeightedU1(Opts),
    /// Amplitude, limit profile and logarithmic phase correction.
    ModifiedScattering(Opts),
    /// Splitting order and hyperbolic residual under refinement.
    Convergence(Opts),
}

#[derive(Args)]
struct Opts {
    /// Config file (TOML key-value text); defaults apply to missing keys.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output root; falls back to NLKG_OUT_DIR, then the config, then ./runs.
    #[arg(long, value_name = "PATH", env = "NLKG_OUT_DIR")]
    out_dir: Option<PathBuf>,
    /// Set one config value, e.g. --override grid.n=4096 (repeatable).
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Print the effective config and exit.
    #[arg(long)]
    print_config: bool,
}

fn main() -> ExitCode {
    match real_main() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn real_main() -> anyhow::Result<bool> {
    let cli = Cli::parse();
    let (experiment, opts) = match cli.command {
        Command::LocalDecay(o) => (Experiment::LocalDecay, o),
        Command::InteriorDecay(o) => (Experiment::InteriorDecay, o),
        Command::ExteriorDecay(o) => (Experiment::ExteriorDecay, o),
        Command::EnergyGrowth(o) => (Experiment::EnergyGrowth, o),
        Command::WeightedU1(o) => (Experiment::WeightedU1, o),
        Command::ModifiedScattering(o) => (Experiment::ModifiedScattering, o),
        Command::Convergence(o) => (Experiment::Convergence, o),
    };
    let cfg = match &opts.config {
        Some(p) => parse_config(p, Some(experiment), &opts.overrides)
            .with_context(|| format!("reading config {}", p.display()))?,
        None => parse_config_str("", Some(experiment), &opts.overrides)?,
    };
    if opts.print_config {
        print!("{}", cfg.to_toml()?);
        return Ok(true);
    }
    let out_dir =
        opts.out_dir.or_else(|| cfg.output_dir.as_ref().map(PathBuf::from)).unwrap_or_else(|| PathBuf::from("runs"));
    let output = run_experiment(&cfg).with_context(|| format!("running {experiment}"))?;
    let dir =
        write_outputs(&out_dir, &output).with_context(|| format!("writing outputs under {}", out_dir.display()))?;
    print!("{}", output.report.summary());
    println!("outputs: {}", dir.display());
    Ok(output.report.passed)
}
