use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use subgeo::{commands, ChainSpec, Suite};

/// Explicit sub-geometric convergence constants for finite Markov chains.
#[derive(Debug, Parser)]
#[command(name = "subgeo", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Tabulate r(n), δ_n, H(1+n) and H⁻¹(ε_b n).
    Rates {
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[arg(long, default_value_t = 0.5)]
        eps_b: f64,
        /// Number of rows.
        #[arg(long, default_value_t = 64)]
        n: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Certify drift and minorisation for a chain file.
    Certify {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute the constant ledger.
    Constants {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a verification suite; exits 0 iff every check passes.
    Verify {
        #[arg(long)]
        spec: PathBuf,
        /// drift, lemmas, theorem, corollary or all.
        #[arg(long, default_value = "all")]
        suite: Suite,
        /// Horizon of the marginal check.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate the coupled chain from the file's start pair.
    Simulate {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        replicates: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn load(path: &Path) -> Result<ChainSpec> {
    ChainSpec::load(path).with_context(|| format!("loading {}", path.display()))
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Rates {
            alpha,
            beta,
            eps_b,
            n,
            out,
        } => {
            commands::rates(output(out.as_deref())?, alpha, beta, eps_b, n)?;
            Ok(true)
        }
        Command::Certify { spec, out } => {
            let spec = load(&spec)?;
            let tol = spec.tolerances(None);
            commands::certify(output(out.as_deref())?, &spec, &tol)
        }
        Command::Constants { spec, tol, out } => {
            let spec = load(&spec)?;
            commands::constants(output(out.as_deref())?, &spec, &spec.tolerances(tol))?;
            Ok(true)
        }
        Command::Verify {
            spec,
            suite,
            n,
            tol,
            out,
        } => {
            let mut spec = load(&spec)?;
            if n.is_some() {
                spec.file.run.marginal_steps = n;
            }
            let tol = spec.tolerances(tol);
            commands::verify(output(out.as_deref())?, &spec, suite, &tol)
        }
        Command::Simulate {
            spec,
            replicates,
            seed,
            tol,
            out,
        } => {
            let spec = load(&spec)?;
            let replicates = replicates.or(spec.file.run.replicates).unwrap_or(10_000);
            let seed = seed.or(spec.file.run.seed).unwrap_or(0);
            let tol = spec.tolerances(tol);
            commands::simulate(output(out.as_deref())?, &spec, replicates, seed, &tol)?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
