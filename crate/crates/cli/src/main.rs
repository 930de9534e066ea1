mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use commands::{KernelArgs, Outcome};
use config::{ExperimentConfig, LambdaArg};

#[derive(Parser)]
#[command(name = "fermicov", version, about = "Discrete-time fermionic covariance experiments")]
struct Cli {
    /// TOML experiment config; flags take precedence over its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// CSV destination; the JSON summary goes next to it with a .json extension.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: logical cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate the resolvent kernel g on one period.
    Kernel {
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        n: Option<usize>,
        /// A real number or "singular".
        #[arg(long, value_parser = parse_lambda)]
        lambda: Option<LambdaArg>,
        #[arg(long)]
        eta: Option<f64>,
        /// Use the finite-eta formula even at the singular value.
        #[arg(long)]
        force_finite_eta: bool,
    },
    /// Covariance determinant and its bound for one instance.
    CovarianceDet {
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, value_delimiter = ',')]
        eta: Vec<f64>,
    },
    /// Fock-space monomials against the Wick determinant.
    WickVerify {
        #[arg(long)]
        count: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        order_max: Option<usize>,
        #[arg(long)]
        modes: Option<usize>,
    },
    /// Modular representation against the covariance determinant.
    ModularVerify {
        #[arg(long)]
        count: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_delimiter = ',')]
        eta: Vec<f64>,
    },
    /// Seeded determinant-bound suite.
    BoundCheck {
        #[arg(long)]
        count: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Interpolation matrix of a weighted tree.
    BkMatrix {
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        t: Option<f64>,
    },
    /// Sharpness witnesses at tolerance epsilon.
    Sharpness {
        #[arg(long, value_delimiter = ',')]
        epsilon: Vec<f64>,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long, value_delimiter = ',')]
        orders: Vec<usize>,
    },
    /// Bracket for the universal determinant constant.
    Universal {
        #[arg(long, value_delimiter = ',')]
        epsilon: Vec<f64>,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long, value_delimiter = ',')]
        orders: Vec<usize>,
        #[arg(long)]
        count: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Finite-n decay parameter snapshots.
    Decay {
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long, value_delimiter = ',')]
        n: Vec<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn parse_lambda(s: &str) -> Result<LambdaArg, String> {
    LambdaArg::parse(s).map_err(|e| e.to_string())
}

fn or_file<T: Clone>(flag: Vec<T>, file: &Option<Vec<T>>, default: Vec<T>) -> Vec<T> {
    if !flag.is_empty() {
        flag
    } else {
        file.clone().unwrap_or(default)
    }
}

fn dispatch(command: Command, cfg: &ExperimentConfig) -> Result<Outcome> {
    let seed = |s: Option<u64>| s.or(cfg.seed).unwrap_or(0);
    let count = |c: Option<u64>, d: u64| c.or(cfg.count).unwrap_or(d);
    let beta_of = |b: Option<f64>| b.or(cfg.torus.as_ref().and_then(|t| t.beta)).unwrap_or(1.0);
    match command {
        Command::Kernel { beta, n, lambda, eta, force_finite_eta } => commands::kernel(
            cfg,
            KernelArgs { beta, n, lambda, eta, force_finite_eta },
        ),
        Command::CovarianceDet { seed: s, beta, n, eta } => {
            commands::covariance_det_cmd(cfg, seed(s), beta, n, &or_file(eta, &cfg.eta, vec![]))
        }
        Command::WickVerify { count: c, seed: s, order_max, modes } => {
            commands::wick_verify(cfg, count(c, 10), seed(s), order_max, modes)
        }
        Command::ModularVerify { count: c, seed: s, eta } => {
            commands::modular_verify(cfg, count(c, 50), seed(s), &or_file(eta, &cfg.eta, vec![]))
        }
        Command::BoundCheck { count: c, seed: s } => commands::bound_check(cfg, count(c, 1000), seed(s)),
        Command::BkMatrix { m, seed: s, t } => commands::bk(cfg, m, seed(s), t),
        Command::Sharpness { epsilon, beta, orders } => commands::sharpness(
            &or_file(epsilon, &cfg.epsilon, vec![0.1]),
            beta_of(beta),
            &or_file(orders, &cfg.orders, vec![1, 2, 4, 8]),
        ),
        Command::Universal { epsilon, beta, orders, count: c, seed: s } => commands::universal(
            cfg,
            &or_file(epsilon, &cfg.epsilon, vec![0.1, 0.01]),
            beta_of(beta),
            &or_file(orders, &cfg.orders, vec![1, 2, 4, 8]),
            count(c, 1000),
            seed(s),
        ),
        Command::Decay { beta, n, seed: s } => {
            commands::decay(cfg, beta, &or_file(n, &cfg.ns, vec![4, 8, 16, 32]), seed(s))
        }
    }
}

fn emit(outcome: &Outcome, out: Option<PathBuf>) -> Result<()> {
    let json = serde_json::to_string_pretty(&outcome.summary)?;
    match out {
        Some(path) => {
            output::write_atomic(&path, &outcome.csv)?;
            output::write_atomic(&path.with_extension("json"), &(json + "\n"))?;
            eprintln!("wrote {}", path.display());
        }
        None => {
            print!("{}", outcome.csv);
            eprintln!("{json}");
        }
    }
    if let Some(note) = &outcome.note {
        eprintln!("{note}");
    }
    Ok(())
}

fn run(cli: Cli) -> Result<Outcome> {
    let cfg = config::load(cli.config.as_deref())?;
    let jobs = cli.jobs.or(cfg.jobs).unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .context("cannot start the worker pool")?;
    let outcome = pool.install(|| dispatch(cli.command, &cfg))?;
    emit(&outcome, cli.out.or(cfg.out.clone()))?;
    Ok(outcome)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(outcome) if outcome.passed() => ExitCode::SUCCESS,
        Ok(outcome) => {
            let seeds: Vec<String> = outcome.summary.failures.iter().map(|s| s.to_string()).collect();
            eprintln!("verification failed; failing seeds: {}", seeds.join(" "));
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
