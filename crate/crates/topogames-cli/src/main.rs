//! `topogames`: batch runner for codes, strategies and games.

mod commands;
mod config;
mod output;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use config::Params;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "topogames", version, about = "Nonlocal games on topological stabilizer codes")]
struct Cli {
    /// TOML file with parameter defaults; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for the JSON and CSV outputs.
    #[arg(long, global = true, env = "TOPOGAMES_OUT_DIR", default_value = "topogames-out")]
    out_dir: PathBuf,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Do not echo the JSON record to stdout.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Top,
}

#[derive(Subcommand, Debug)]
enum Top {
    /// Stabilizer code summaries.
    #[command(subcommand)]
    Code(CodeCmd),
    /// Cell complex summaries.
    #[command(subcommand)]
    Complex(ComplexCmd),
    /// Composite operator sets.
    #[command(subcommand)]
    Strategy(StrategyCmd),
    /// Game evaluation.
    #[command(subcommand)]
    Game(GameCmd),
    /// Parameter sweeps on dense states.
    #[command(subcommand)]
    Sweep(SweepCmd),
}

#[derive(Subcommand, Debug)]
enum CodeCmd {
    /// Sites, generator counts, ranks and ground-space dimension.
    Info(Params),
}

#[derive(Subcommand, Debug)]
enum ComplexCmd {
    /// Cell counts and (co)homology of `--complex` or of a code's lattice.
    Info(Params),
}

#[derive(Subcommand, Debug)]
enum StrategyCmd {
    /// Commutation pattern, Y hermiticity and constraints on the resource.
    Validate(Params),
}

#[derive(Subcommand, Debug)]
enum GameCmd {
    /// The parity game, classically or with a composite operator set.
    Parity(Params),
    /// The game attached to a cellulation.
    Cellulation(Params),
    /// The qudit magic-square game.
    MagicSquare(Params),
}

#[derive(Subcommand, Debug)]
enum SweepCmd {
    /// Parity-game value under a uniform single-site field.
    Deformation(Params),
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.workers {
        rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global().context("starting worker pool")?;
    }
    let (name, flags) = match &cli.command {
        Top::Code(CodeCmd::Info(p)) => ("code info", p),
        Top::Complex(ComplexCmd::Info(p)) => ("complex info", p),
        Top::Strategy(StrategyCmd::Validate(p)) => ("strategy validate", p),
        Top::Game(GameCmd::Parity(p)) => ("game parity", p),
        Top::Game(GameCmd::Cellulation(p)) => ("game cellulation", p),
        Top::Game(GameCmd::MagicSquare(p)) => ("game magic-square", p),
        Top::Sweep(SweepCmd::Deformation(p)) => ("sweep deformation", p),
    };
    let params = match &cli.config {
        Some(path) => Params::load(path)?.overlaid(flags),
        None => flags.clone(),
    };
    params.check_files()?;
    let mut extra = None;
    let (result, table) = match name {
        "code info" => commands::code_info(&params),
        "complex info" => commands::complex_info(&params).map(|(out, text)| {
            extra = Some(text);
            out
        }),
        "strategy validate" => commands::strategy_validate(&params),
        "game parity" => commands::game_parity(&params),
        "game cellulation" => commands::game_cellulation(&params),
        "game magic-square" => commands::game_magic_square(&params),
        _ => commands::sweep_deformation(&params),
    }
    .with_context(|| name.to_string())?;
    let hash = params.hash(name);
    let text = output::emit(&cli.out_dir, name, &hash, params.seed(), serde_json::to_value(&params)?, result, &table)?;
    if let Some(cells) = extra {
        let path = cli.out_dir.join("complex-info.txt");
        std::fs::write(&path, cells).with_context(|| format!("writing {}", path.display()))?;
    }
    if !cli.quiet {
        print!("{text}");
    }
    Ok(())
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg.lines().find(|l| !l.trim().is_empty()).unwrap_or("invalid arguments");
            eprintln!("error: {}", one_line(first.trim_start_matches("error:")));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let chain: Vec<String> = e.chain().map(|c| one_line(&c.to_string())).collect();
            eprintln!("error: {}", chain.join(": "));
            ExitCode::FAILURE
        }
    }
}
