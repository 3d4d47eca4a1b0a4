//! `dwp`: run, check and list solver scenarios.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dwp_core::io::{execute, load_config, RunConfig};
use dwp_core::scenarios::{generate, Preset};
use dwp_core::Error;

#[derive(Parser)]
#[command(
    name = "dwp",
    version,
    about = "Delta-wave projection solver for pressureless and self-gravitating fluids"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its outputs.
    Run {
        /// TOML config file; a bare preset name also works via --preset.
        #[arg(long, conflicts_with = "preset")]
        config: Option<PathBuf>,
        /// Run a preset with its defaults.
        #[arg(long)]
        preset: Option<String>,
        /// Output directory (overrides the config and DWP_OUT_DIR).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        steps: Option<u64>,
    },
    /// Validate a config and its initial state without running.
    Check {
        #[arg(long)]
        config: PathBuf,
        /// Print the fully resolved config.
        #[arg(long)]
        echo: bool,
    },
    /// Preset utilities.
    Preset {
        #[command(subcommand)]
        command: PresetCommand,
    },
}

#[derive(Subcommand)]
enum PresetCommand {
    /// List preset names.
    List,
    /// Print the resolved default config of a preset.
    Show { name: String },
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let line = serde_json::json!({ "error": e.kind(), "message": e.to_string() });
            eprintln!("{line}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Run {
            config,
            preset,
            out,
            seed,
            steps,
        } => {
            let mut cfg = match (config, preset) {
                (Some(path), _) => load_config(&path)?,
                (None, Some(name)) => RunConfig::from_preset(Preset::from_name(&name)?),
                (None, None) => {
                    return Err(Error::Config {
                        key: "config".into(),
                        message: "pass --config FILE or --preset NAME".into(),
                    })
                }
            };
            if let Some(out) = out {
                cfg.output.out_dir = out;
            }
            if let Some(seed) = seed {
                cfg.scenario.seed = seed;
            }
            if let Some(steps) = steps {
                cfg.scenario.steps = steps;
            }
            cfg.scenario.validate()?;
            let summary = execute(&cfg)?;
            println!(
                "{}",
                serde_json::json!({
                    "out_dir": cfg.output.out_dir,
                    "steps": summary.steps_completed,
                    "t": summary.t,
                    "a": summary.a,
                })
            );
            Ok(())
        }
        Command::Check { config, echo } => {
            let cfg = load_config(&config)?;
            let scenario = generate(&cfg.scenario)?;
            if echo {
                print!("{}", cfg.to_toml()?);
            } else {
                println!(
                    "{}",
                    serde_json::json!({
                        "ok": true,
                        "preset": cfg.scenario.preset.name(),
                        "cells": scenario.run.grid.len(),
                        "steps": cfg.scenario.steps,
                    })
                );
            }
            Ok(())
        }
        Command::Preset { command } => match command {
            PresetCommand::List => {
                for p in Preset::ALL {
                    println!("{:<24} {}", p.name(), p.description());
                }
                Ok(())
            }
            PresetCommand::Show { name } => {
                print!(
                    "{}",
                    RunConfig::from_preset(Preset::from_name(&name)?).to_toml()?
                );
                Ok(())
            }
        },
    }
}
