//! `nodal-lab`: runs experiments and summarizes run directories.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails or a run
//! errors, 2 for invalid configurations.

mod config;
mod plot;
mod record;
mod report;
mod run;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{Command, ConfigFile, ExperimentConfig, Flags};

#[derive(Parser)]
#[command(name = "nodal-lab", version, about = "Numerical experiments on zero sets of eigenfunction sums")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args, Clone, Default)]
struct RunArgs {
    /// TOML configuration; its values win over flags.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Run directory (default `runs/<command>-<hash>`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long)]
    threads: Option<usize>,
    /// Seed for randomized cases.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Density radius scaling on the torus or the sphere.
    Density(RunArgs),
    /// Doubling ratio of a polynomial.
    Doubling(RunArgs),
    /// Properties of the radial weight.
    Weight(RunArgs),
    /// Threshold radius of the polynomial weight.
    Theorem3(RunArgs),
    /// Doubling for general elliptic operators.
    Theorem4(RunArgs),
    /// Doubling with an inverse-square potential.
    Schrodinger(RunArgs),
    /// Zero density and positivity of gap polynomials.
    Gap(RunArgs),
    /// Integration by parts against the weight.
    Ibp(RunArgs),
    /// Summarize every run below a directory.
    Report {
        dir: PathBuf,
    },
}

const EXIT_FAIL: u8 = 1;
const EXIT_INVALID: u8 = 2;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match cli.command {
        Cmd::Report { dir } => return report(&dir),
        Cmd::Density(a) => (Command::Density, a),
        Cmd::Doubling(a) => (Command::Doubling, a),
        Cmd::Weight(a) => (Command::Weight, a),
        Cmd::Theorem3(a) => (Command::Theorem3, a),
        Cmd::Theorem4(a) => (Command::Theorem4, a),
        Cmd::Schrodinger(a) => (Command::Schrodinger, a),
        Cmd::Gap(a) => (Command::Gap, a),
        Cmd::Ibp(a) => (Command::Ibp, a),
    };
    run(command, args)
}

fn invalid(errors: &[String]) -> ExitCode {
    eprintln!("invalid configuration:");
    for e in errors {
        eprintln!("  - {e}");
    }
    ExitCode::from(EXIT_INVALID)
}

fn run(command: Command, args: RunArgs) -> ExitCode {
    let file = match &args.config {
        Some(path) => match std::fs::read_to_string(path) {
            Ok(text) => match ConfigFile::parse(&text) {
                Ok(f) => f,
                Err(e) => return invalid(&[format!("{}: {e}", path.display())]),
            },
            Err(e) => return invalid(&[format!("{}: {e}", path.display())]),
        },
        None => ConfigFile::default(),
    };
    let flags = Flags { out: args.out, threads: args.threads, seed: args.seed };
    let (cfg, warnings) = match ExperimentConfig::resolve(command, file, flags) {
        Ok(v) => v,
        Err(errors) => return invalid(&errors),
    };
    for w in warnings.iter().chain(&run::unused_params(&cfg)) {
        eprintln!("warning: {w}");
    }
    if let Some(n) = cfg.threads {
        // read by the worker pool on first use
        std::env::set_var("RAYON_NUM_THREADS", n.to_string());
    }
    let dir = cfg.out.clone().unwrap_or_else(|| record::default_dir(&cfg));
    if let Err(e) = record::claim_dir(&dir, &cfg) {
        return invalid(&[e]);
    }
    let result = run::execute(&cfg).map_err(|e| e.to_string());
    let record = match record::persist(&dir, &cfg, result) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: writing {}: {e}", dir.display());
            return ExitCode::from(EXIT_FAIL);
        }
    };
    for c in &record.checks {
        println!("{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    if let Some(e) = &record.error {
        eprintln!("error: {e}");
    }
    println!("run {} written to {}", &record.config_hash[..12], dir.display());
    if record.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_FAIL)
    }
}

fn report(dir: &Path) -> ExitCode {
    if !dir.is_dir() {
        eprintln!("error: {} is not a directory", dir.display());
        return ExitCode::from(EXIT_INVALID);
    }
    let summary = match report::summarize(dir) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: reading {}: {e}", dir.display());
            return ExitCode::from(EXIT_FAIL);
        }
    };
    if let Err(e) = report::write(dir, &summary) {
        eprintln!("error: writing summary: {e}");
        return ExitCode::from(EXIT_FAIL);
    }
    if summary.runs == 0 && summary.problems.is_empty() {
        eprintln!("warning: no runs found in {}", dir.display());
    }
    for p in &summary.problems {
        eprintln!("problem: {}: {}", p.path, p.reason);
    }
    print!("{}", summary.to_markdown());
    if summary.pass() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_FAIL)
    }
}
