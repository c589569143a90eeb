//! Batch front-end: configuration, experiment orchestration and artifacts.

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod plot;
pub mod selftest;

use config::Config;
use error::CliError;
use output::OutDir;
use plot::{plot_file, PlotSpec};

#[derive(Debug, Parser)]
#[command(name = "airy", version, about = "Airy L8 Strichartz experiments")]
pub struct Cli {
    /// TOML configuration; built-in defaults when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Exit with status 3 when a resolution flag is raised.
    #[arg(long, global = true)]
    pub strict: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Extremiser search from the Gaussian or `solver.init`.
    Solve,
    /// Strichartz ratio of one field with window diagnostics.
    Ratio,
    /// Bilinear frequency-separation exponent.
    Bilinear,
    /// Boost decay exponent.
    Boost,
    /// 8-linear form cross-oracle and weighted-form checks.
    Multilinear,
    /// Decay certificate and tail-norm sweep.
    Decay,
    /// Bubble decoupling and additivity.
    Profile,
    /// Fast invariant suite.
    Selftest,
    /// SVG plot of two CSV columns.
    Plot {
        input: PathBuf,
        #[arg(long)]
        x: Option<String>,
        #[arg(long)]
        y: Option<String>,
        #[arg(long)]
        linear_x: bool,
        #[arg(long)]
        linear_y: bool,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Ratio => "ratio",
            Command::Bilinear => "bilinear",
            Command::Boost => "boost",
            Command::Multilinear => "multilinear",
            Command::Decay => "decay",
            Command::Profile => "profile",
            Command::Selftest => "selftest",
            Command::Plot { .. } => "plot",
        }
    }
}

fn plot(input: &std::path::Path, spec: PlotSpec, out: &mut OutDir) -> Result<(), CliError> {
    let (svg, slope) = plot_file(input, &spec)?;
    let stem = input.file_stem().and_then(|s| s.to_str()).unwrap_or("plot");
    out.write(&format!("{stem}.svg"), svg.as_bytes())?;
    if let Some(s) = slope {
        println!("fitted slope {s:.6}");
    }
    Ok(())
}

fn dispatch(cli: &Cli, cfg: &Config, out: &mut OutDir) -> Result<(), CliError> {
    match &cli.command {
        Command::Solve => commands::solve(cfg, out),
        Command::Ratio => commands::ratio(cfg, out),
        Command::Bilinear => commands::bilinear(cfg, out),
        Command::Boost => commands::boost(cfg, out),
        Command::Multilinear => commands::multilinear(cfg, out),
        Command::Decay => commands::decay(cfg, out),
        Command::Profile => commands::profile(cfg, out),
        Command::Selftest => selftest::run(cfg, out),
        Command::Plot { input, x, y, linear_x, linear_y } => {
            let title = input.file_stem().and_then(|s| s.to_str()).unwrap_or("plot").to_string();
            let spec = PlotSpec { x: x.clone(), y: y.clone(), log_x: !linear_x, log_y: !linear_y, title };
            plot(input, spec, out)
        }
    }
}

/// Runs a parsed command line and returns the process exit status.
pub fn run(cli: &Cli) -> u8 {
    let mut cfg = match Config::load(cli.config.as_deref()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    let strict = cli.strict || cfg.strict;
    let mut out = match OutDir::create(&cli.out) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let result = dispatch(cli, &cfg, &mut out);
    if let Err(e) = &result {
        out.flags.note(format!("error: {e}"));
    }
    if let Err(e) = out.finish(cli.command.name(), &cfg, strict) {
        eprintln!("error: {e}");
        return e.exit_code();
    }
    for f in &out.flags.resolution {
        eprintln!("resolution flag: {f}");
    }
    for n in &out.flags.notes {
        eprintln!("note: {n}");
    }
    match result {
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
        Ok(()) if strict && !out.flags.resolution.is_empty() => 3,
        Ok(()) => 0,
    }
}
