use std::path::PathBuf;
use std::process::ExitCode;

use chemorepel_cli::config::{self, Overrides};
use chemorepel_cli::{check, output, scenario, sweep, Result};
use clap::{Args, Parser, Subcommand};

/// Repulsive chemotaxis with logistic growth and lethality: simulations,
/// threshold reports and sweeps.
#[derive(Parser)]
#[command(name = "chemorepel", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Built-in scenario: extinction, persistence, taxis-free, pattern.
    #[arg(long)]
    scenario: Option<String>,
    /// JSON configuration file, merged over the scenario preset.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a config entry, e.g. `--set r=2` or `--set grid.n_x=256`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides {
            scenario: self.scenario.clone(),
            config: self.config.clone(),
            set: self.set.clone(),
            seed: self.seed,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and print its summary.
    Simulate(Common),
    /// Print the threshold analysis for a parameter set.
    Thresholds(Common),
    /// Sweep one parameter; writes sweep.csv to --out or prints it.
    Sweep(Common),
    /// Re-evaluate the Lyapunov functional on a run's snapshots.
    LyapunovCheck {
        /// Directory written by `simulate --out` with snapshot_every > 0.
        #[arg(long)]
        run: PathBuf,
    },
}

fn print_json<T: serde::Serialize>(v: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(c) => {
            let cfg = config::run_config(config::resolve_value(&c.overrides())?)?;
            let summary = scenario::run_scenario(&cfg, c.out.as_deref())?;
            print_json(&summary)
        }
        Command::Thresholds(c) => {
            let p = config::params(&config::resolve_value(&c.overrides())?)?;
            let rep = chemorepel::thresholds::report(&p)?;
            if let Some(dir) = &c.out {
                output::ensure_dir(dir)?;
                output::write_json(&dir.join("thresholds.json"), &rep)?;
            }
            print_json(&rep)
        }
        Command::Sweep(c) => {
            let cfg = config::run_config(config::resolve_value(&c.overrides())?)?;
            let csv = sweep::run_sweep(&cfg, sweep::threads_from_env())?;
            match &c.out {
                Some(dir) => {
                    output::ensure_dir(dir)?;
                    output::write_text(&dir.join("sweep.csv"), &csv)
                }
                None => {
                    print!("{csv}");
                    Ok(())
                }
            }
        }
        Command::LyapunovCheck { run } => {
            let rep = check::lyapunov_check(&run)?;
            output::write_json(&run.join("lyapunov_check.json"), &rep)?;
            print_json(&rep)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
