//! `quiltlab` — run the experiment suite from the command line.

use clap::{Parser, Subcommand};
use quiltlab_cli::config::{RunConfig, Tier};
use quiltlab_cli::manifest::RunManifest;
use quiltlab_cli::registry::{self, REGISTRY};
use quiltlab_cli::{resolve_default, run_experiment, runner};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "quiltlab", version, about = "Brownian ensemble experiment suite")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single experiment and write its CSV and manifest.
    Run {
        /// Experiment name (see `quiltlab list`).
        experiment: String,
        /// Flat key=value config file; unknown keys are rejected.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Master seed (overrides the config file).
        #[arg(long)]
        seed: Option<u64>,
        /// Number of Monte Carlo draws (overrides the config file).
        #[arg(long)]
        draws: Option<i64>,
        /// Worker thread count (outputs do not depend on it).
        #[arg(long)]
        workers: Option<usize>,
        /// Output directory (default: $QUILTLAB_OUT, then `out`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the experiment registry with tier defaults.
    List,
    /// Run every registered experiment at the given tier.
    VerifyAll {
        /// Parameter tier: `fast` smoke sizes or `full` acceptance sizes.
        #[arg(long, value_parser = parse_tier, default_value = "fast")]
        tier: Tier,
        /// Master seed shared by all experiments.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker thread count (outputs do not depend on it).
        #[arg(long)]
        workers: Option<usize>,
        /// Output directory (default: $QUILTLAB_OUT, then `out`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_tier(s: &str) -> Result<Tier, String> {
    match s {
        "fast" => Ok(Tier::Fast),
        "full" => Ok(Tier::Full),
        other => Err(format!("tier must be `fast` or `full`, got `{other}`")),
    }
}

fn main() -> ExitCode {
    match dispatch() {
        Ok(all_hard_pass) => {
            if all_hard_pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn dispatch() -> quiltlab_core::Result<bool> {
    match Cli::parse().command {
        Command::Run { experiment, config, seed, draws, workers, out } => {
            let exp = registry::find(&experiment)?;
            let text = match &config {
                Some(path) => Some(std::fs::read_to_string(path)?),
                None => None,
            };
            let cfg = RunConfig::resolve(
                &experiment,
                exp.schema,
                Tier::Full,
                text.as_deref(),
                seed,
                draws,
                workers,
                out,
            )?;
            let mut manifest = RunManifest::new(cfg.seed);
            let report = run_experiment(&cfg, &mut manifest)?;
            manifest.seal();
            runner::write_manifest(&cfg.out_dir, &manifest)?;
            print_verdicts(&experiment, &report);
            Ok(report.hard_pass())
        }
        Command::List => {
            for e in REGISTRY {
                println!("{:<22} {}", e.name, e.summary);
                for p in e.schema {
                    println!(
                        "    {:<12} full={:<10} fast={:<10} {}",
                        p.name,
                        p.full.to_string(),
                        p.fast.to_string(),
                        p.help
                    );
                }
            }
            Ok(true)
        }
        Command::VerifyAll { tier, seed, workers, out } => {
            let mut all = true;
            let mut manifest = RunManifest::new(seed.unwrap_or(1));
            let mut out_dir = None;
            for e in REGISTRY {
                let cfg = resolve_default(e.name, tier, seed, workers, out.clone())?;
                let report = run_experiment(&cfg, &mut manifest)?;
                print_verdicts(e.name, &report);
                all &= report.hard_pass();
                out_dir = Some(cfg.out_dir);
            }
            manifest.seal();
            if let Some(dir) = out_dir {
                runner::write_manifest(&dir, &manifest)?;
            }
            Ok(all)
        }
    }
}

fn print_verdicts(experiment: &str, report: &quiltlab_cli::manifest::ExperimentReport) {
    for c in &report.criteria {
        let kind = if c.hard { "hard" } else { "monitor" };
        let verdict = if c.pass { "pass" } else { "FAIL" };
        println!("{experiment}: [{kind}] {} — {verdict} ({})", c.name, c.detail);
    }
}
