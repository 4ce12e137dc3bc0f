//! Experiment runner: parses a config, executes a named experiment, and
//! writes its CSV artifacts, plot stub and run manifest under the output
//! directory. Nothing is written until the whole experiment has succeeded.

mod experiments;
mod manifest;

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Parser;

use experiments::{run_experiment, ExperimentSpec, EXPERIMENTS};
use inac::analytic::BerFormulaMode;

#[derive(Parser, Debug)]
#[command(
    name = "inac-sim",
    about = "Link-level experiments for the superimposed navigation-and-communication signal",
    after_help = "Registered experiments: fig2_mo_ber, fig3_mo_rates, fig4_mo_beta, fig5_uo_ber,\n\
                  fig6_uo_beta, fig7_baselines, fig8_mo_vs_uo, fig9_ranging, oracle_suite"
)]
struct Cli {
    /// Experiment name from the registry.
    #[arg(long)]
    experiment: String,

    /// TOML config replacing the experiment's built-in base config.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Monte Carlo frames per grid point (experiment default when omitted).
    #[arg(long)]
    trials: Option<u64>,

    /// Base seed; falls back to INAC_SIM_SEED, then 1.
    #[arg(long)]
    seed: Option<u64>,

    /// Worker threads (0 = all available).
    #[arg(long, default_value_t = 0)]
    workers: usize,

    /// Closed-form convention for analytic overlays.
    #[arg(long, default_value = "derived_correct")]
    mode: String,

    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,

    /// Also dump one decoded frame's per-symbol statistics as trace.csv.
    #[arg(long, default_value_t = false)]
    trace: bool,
}

fn seed_from_env() -> Option<u64> {
    std::env::var("INAC_SIM_SEED").ok()?.parse().ok()
}

fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run() -> Result<()> {
    let cli = Cli::parse();
    if !EXPERIMENTS.contains(&cli.experiment.as_str()) {
        bail!(inac::Error::UnknownExperiment(cli.experiment.clone()));
    }
    let config = match &cli.config {
        Some(path) => Some(inac::config::from_toml_file(path)?),
        None => None,
    };
    let spec = ExperimentSpec {
        name: cli.experiment.clone(),
        config,
        trials: cli.trials,
        seed: cli.seed.or_else(seed_from_env).unwrap_or(1),
        workers: cli.workers,
        mode: BerFormulaMode::parse(&cli.mode)?,
        dump_trace: cli.trace,
    };
    let (artifacts, manifest) = run_experiment(&spec)?;

    // all compute done; now touch the filesystem
    std::fs::create_dir_all(&cli.out)
        .with_context(|| format!("create {}", cli.out.display()))?;
    for (name, contents) in &artifacts.files {
        let path = cli.out.join(name);
        std::fs::write(&path, contents).with_context(|| format!("write {}", path.display()))?;
        println!("wrote {}", path.display());
    }
    let mpath = cli.out.join("manifest.toml");
    std::fs::write(&mpath, manifest.render())?;
    println!("wrote {}", mpath.display());
    Ok(())
}
