use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use wavelab_cli::commands::{self, Report};
use wavelab_cli::config::ScenarioConfig;
use wavelab_cli::output::emit_plot_script;
use wavelab_cli::OUT_DIR_ENV;
use wavelab_core::Exec;

/// Characteristic solver for the perturbed wave equation on [0,1].
#[derive(Parser)]
#[command(name = "wavelab", version, about)]
struct Cli {
    /// Run ensembles and sweeps on one thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario file with `section.key = value` lines.
    #[arg(long)]
    config: PathBuf,
    /// Output directory. Falls back to `output.dir`, then $WAVELAB_OUT_DIR, then `.`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve once and write norms.csv (and snapshots if requested).
    Solve(Common),
    /// Measure extinction times and write extinction.csv.
    Extinction(Common),
    /// Fit decay rates over run.epsilons and write decay.csv.
    DecaySweep(Common),
    /// Discrete C2 norms and refinement ratios over run.n_list.
    Smoothing(Common),
    /// Compare the stepper with the Picard reference over run.n_list.
    Verify(Common),
    /// Convergence of solutions from mollified data over run.l_list.
    MollifyStudy(Common),
    /// Write a gnuplot script for columns of an existing CSV.
    Plot {
        #[arg(long)]
        csv: PathBuf,
        /// Comma-separated column names.
        #[arg(long, value_delimiter = ',', required = true)]
        columns: Vec<String>,
    },
}

fn out_dir(flag: Option<&Path>, cfg: &ScenarioConfig) -> PathBuf {
    flag.map(Path::to_path_buf)
        .or_else(|| cfg.output_dir.clone())
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

type Runner = fn(&ScenarioConfig, &Path, Exec) -> anyhow::Result<Report>;

fn run(cli: Cli) -> anyhow::Result<Report> {
    let exec = if cli.sequential { Exec::Sequential } else { Exec::Parallel };
    let (common, runner): (Common, Runner) = match cli.command {
        Command::Plot { csv, columns } => {
            let cols: Vec<&str> = columns.iter().map(String::as_str).collect();
            let path = emit_plot_script(&csv, &cols)?;
            return Ok(Report { files: vec![path], warnings: Vec::new() });
        }
        Command::Solve(c) => (c, |cfg, out, _| commands::solve(cfg, out)),
        Command::Extinction(c) => (c, |cfg, out, _| commands::extinction(cfg, out)),
        Command::DecaySweep(c) => (c, commands::decay_sweep),
        Command::Smoothing(c) => (c, commands::smoothing),
        Command::Verify(c) => (c, commands::verify),
        Command::MollifyStudy(c) => (c, commands::mollify_study),
    };
    let cfg = ScenarioConfig::load(&common.config)
        .with_context(|| format!("invalid config {}", common.config.display()))?;
    let out = out_dir(common.out.as_deref(), &cfg);
    std::fs::create_dir_all(&out).with_context(|| format!("cannot create {}", out.display()))?;
    runner(&cfg, &out, exec)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(rep) => {
            for w in &rep.warnings {
                eprintln!("warning: {w}");
            }
            for f in &rep.files {
                println!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
