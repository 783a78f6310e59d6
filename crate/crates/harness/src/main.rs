use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fracburgers::run::InitialDatum;
use fracburgers_harness::commands;
use fracburgers_harness::{ExperimentConfig, HarnessError, HarnessResult};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "fracburgers", version, about = "Shock layers and inviscid-limit rates for the fractal Burgers equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Relax the shock layer and write its samples.
    Profile(Common),
    /// Run one viscosity.
    Solve(Common),
    /// Run every viscosity of the config and fit the rates.
    Sweep(Common),
    /// Run the invariant suite.
    Check(Common),
    /// Refit the rates of a finished sweep.
    Rate(Common),
}

#[derive(Args)]
struct Common {
    /// Experiment config (TOML); built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output root, overriding the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps.
    #[arg(long)]
    workers: Option<usize>,
    /// Viscosity; repeat to give a sweep list.
    #[arg(long)]
    epsilon: Vec<f64>,
    /// Seed for perturbations and random checks.
    #[arg(long)]
    seed: Option<u64>,
}

impl Common {
    fn config(&self) -> HarnessResult<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(out) = &self.out {
            cfg.output.dir = out.clone();
        }
        if let Some(w) = self.workers {
            cfg.output.workers = w;
        }
        if !self.epsilon.is_empty() {
            cfg.run.epsilons = self.epsilon.clone();
        }
        if let Some(seed) = self.seed {
            cfg.check.seed = seed;
            match &mut cfg.run.initial {
                InitialDatum::StepPlusPerturbation(p) | InitialDatum::LayerPlusPerturbation(p) => p.seed = seed,
                InitialDatum::Layer | InitialDatum::Step => {}
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn print<T: Serialize>(value: &T) -> HarnessResult<()> {
    let text = serde_json::to_string_pretty(value)?;
    // a closed stdout is not an error of the run
    let _ = writeln!(std::io::stdout().lock(), "{text}");
    Ok(())
}

fn execute(command: Command) -> HarnessResult<()> {
    match command {
        Command::Profile(c) => {
            let cfg = c.config()?;
            print(&commands::cmd_profile(&cfg, &cfg.output.dir)?)
        }
        Command::Solve(c) => {
            let cfg = c.config()?;
            let eps = cfg.run.epsilons[0];
            print(&commands::cmd_solve(&cfg, eps, &cfg.output.dir)?)
        }
        Command::Sweep(c) => {
            let cfg = c.config()?;
            print(&commands::cmd_sweep(&cfg, &cfg.output.dir)?)
        }
        Command::Check(c) => {
            let cfg = c.config()?;
            let report = commands::cmd_check(&cfg, &cfg.output.dir)?;
            let mut stdout = std::io::stdout().lock();
            for e in &report.entries {
                let mark = if e.passed { "ok  " } else { "FAIL" };
                let _ = writeln!(
                    stdout,
                    "{mark} {:<28} measured {:e} threshold {:e}  {}",
                    e.name, e.measured, e.threshold, e.detail
                );
            }
            if report.passed {
                Ok(())
            } else {
                let names: Vec<&str> = report.entries.iter().filter(|e| !e.passed).map(|e| e.name.as_str()).collect();
                Err(HarnessError::Invariant(format!("failed checks: {}", names.join(", "))))
            }
        }
        Command::Rate(c) => {
            let cfg = c.config()?;
            print(&commands::cmd_rate(&cfg, &cfg.output.dir)?)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fracburgers: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
