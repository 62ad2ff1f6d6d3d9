use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use euler3b::experiment::{
    cmd_actions, cmd_budget, cmd_collision, cmd_normalform, cmd_portrait, cmd_simulate, ExperimentConfig,
};

#[derive(Parser)]
#[command(name = "euler3b", version, about = "Euler-integral experiments for the planar three-body problem")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML configuration file; overrides --scenario.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Built-in scenario used when no config is given.
    #[arg(long, global = true, default_value = euler3b::experiment::BUNDLED_SCENARIO)]
    scenario: String,
    /// Output directory; overrides the config's output_dir.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for randomized checks; overrides the config's seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    Simulate,
    Portrait,
    Actions,
    Normalform,
    Collision,
    Budget,
}

fn run(cli: &Cli) -> euler3b::Result<String> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::scenario(&cli.scenario)?,
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    let out = cli.out.clone().unwrap_or_else(|| cfg.output_dir.clone());
    match cli.command {
        Command::Simulate => cmd_simulate(&cfg, &out),
        Command::Portrait => cmd_portrait(&cfg, &out),
        Command::Actions => cmd_actions(&cfg, &out),
        Command::Normalform => cmd_normalform(&cfg, &out),
        Command::Collision => cmd_collision(&cfg, &out),
        Command::Budget => cmd_budget(&cfg, &out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
