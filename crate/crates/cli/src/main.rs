mod commands;
mod input;
mod json;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{CertifyArgs, CriterionArg, Outcome, SimulateArgs, Status};

/// Seed used when neither `--seed` nor the environment sets one.
const DEFAULT_SEED: u64 = 20_240_601;
const SEED_ENV: &str = "CONSENSUS_KIT_SEED";

/// Certify and simulate consensus of linearly coupled multi-agent systems.
///
/// Reports go to stdout as canonical JSON. Exit status: 0 succeeded or
/// certified, 2 not certified or gain design failed, 1 invalid input or
/// internal error.
#[derive(Parser)]
#[command(name = "consensus-kit", version)]
struct Cli {
    /// Seed for random initial states (overrides $CONSENSUS_KIT_SEED).
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Spectra of a coupling matrix and of its reduced form.
    Spectrum {
        /// JSON matrix or edge list ("m=<agents>" then "i,j,w" lines).
        file: PathBuf,
    },
    /// Check one consensus criterion on a system file.
    Certify {
        system: PathBuf,
        #[arg(long, value_enum)]
        criterion: CriterionArg,
        /// Witness matrix P (JSON).
        #[arg(long)]
        p: Option<PathBuf>,
        /// Search for P instead of reading it (identity for t3).
        #[arg(long)]
        auto_p: bool,
        /// Coupling strength, overriding the system file.
        #[arg(long)]
        c: Option<f64>,
        #[arg(long, default_value_t = 1e-6)]
        epsilon: f64,
        /// Required Hurwitz margin for t1 and c1.
        #[arg(long, default_value_t = 0.0)]
        margin: f64,
    },
    /// Integrate the coupled system and summarize consensus.
    Simulate {
        system: PathBuf,
        /// Initial states as a JSON matrix, one row per agent; drawn from
        /// the seed when absent.
        #[arg(long)]
        x0: Option<PathBuf>,
        #[arg(long)]
        c: Option<f64>,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        #[arg(long, default_value_t = 10.0)]
        t_end: f64,
        /// Record every n-th step.
        #[arg(long, default_value_t = 10)]
        stride: usize,
        /// Disagreement threshold for consensus.
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        /// Trajectory CSV output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Design F = P^-1 C^T for observer coupling and certify it.
    DesignObserver {
        a: PathBuf,
        c: PathBuf,
        /// Coupling matrix or edge list.
        l: PathBuf,
        #[arg(long, default_value_t = 1e-3)]
        epsilon: f64,
    },
}

fn resolve_seed(flag: Option<u64>) -> anyhow::Result<u64> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| anyhow::anyhow!("{SEED_ENV}={v:?} is not an unsigned integer")),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

fn run(cli: Cli) -> anyhow::Result<Outcome> {
    let seed = resolve_seed(cli.seed)?;
    match cli.command {
        Command::Spectrum { file } => commands::spectrum(&file, seed),
        Command::Certify {
            system,
            criterion,
            p,
            auto_p,
            c,
            epsilon,
            margin,
        } => commands::certify(
            &CertifyArgs {
                system,
                criterion,
                p,
                auto_p,
                c,
                epsilon,
                margin,
            },
            seed,
        ),
        Command::Simulate {
            system,
            x0,
            c,
            dt,
            t_end,
            stride,
            tol,
            out,
        } => commands::simulate(
            &SimulateArgs {
                system,
                x0,
                c,
                dt,
                t_end,
                stride,
                tol,
                out,
            },
            seed,
        ),
        Command::DesignObserver { a, c, l, epsilon } => {
            commands::design_observer(&a, &c, &l, epsilon, seed)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(outcome) => {
            let text = json::to_canonical(&outcome.report);
            if std::io::stdout().write_all(text.as_bytes()).is_err() {
                return ExitCode::from(1);
            }
            match outcome.status {
                Status::Succeeded => ExitCode::SUCCESS,
                Status::Rejected => ExitCode::from(2),
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
