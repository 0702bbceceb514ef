//! `hurwitz`: command-line front end for the genus-0 double Hurwitz engine.

mod report;

use std::num::NonZeroUsize;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use hurwitz_core::chambers::enumerate_chambers_bounded;
use hurwitz_core::closed_forms::forest_identity;
use hurwitz_core::engine::DEFAULT_CHAMBER_BOUND;
use hurwitz_core::trees::{enumerate_essential_star, enumerate_geometric_bounded};
use hurwitz_core::{Engine, Error, HurwitzPair, Method, Oracle, Partition, SweepConfig};

use report::Report;

#[derive(Parser, Debug)]
#[command(name = "hurwitz", version, about = "Exact genus-0 double Hurwitz numbers")]
struct Cli {
    /// Output format.
    #[arg(long, short, value_enum, global = true, default_value_t = Format::Text)]
    output: Format,

    /// Permutation budget for the brute-force factorization counter.
    #[arg(long, global = true, env = "HURWITZ_BUDGET", value_parser = clap::value_parser!(u64).range(1..))]
    dfs_budget: Option<u64>,

    /// Largest m + n for which chambers and trees are enumerated.
    #[arg(long, global = true, default_value_t = NonZeroUsize::new(DEFAULT_CHAMBER_BOUND).unwrap())]
    max_vars: NonZeroUsize,

    /// Worker threads for `verify` (defaults to the number of cores).
    #[arg(long, short = 'j', global = true)]
    workers: Option<NonZeroUsize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute one double Hurwitz number.
    Compute {
        #[arg(long)]
        mu: Partition,
        #[arg(long)]
        nu: Partition,
        #[arg(long, default_value_t = Method::Auto)]
        method: Method,
        /// Also report the chamber polynomial.
        #[arg(long)]
        polynomial: bool,
    },
    /// Print the polynomial of the chamber containing (mu; nu).
    Poly {
        #[arg(long)]
        mu: Partition,
        #[arg(long)]
        nu: Partition,
    },
    /// List the chambers for m parts over n parts.
    Chambers {
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        m: u64,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
    },
    /// List the geometric trees, or the essential stars, for (mu; nu).
    Trees {
        #[arg(long)]
        mu: Partition,
        #[arg(long)]
        nu: Partition,
        #[arg(long)]
        essential: bool,
    },
    /// Cross-check every method on every pair up to a degree.
    Verify {
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        d_max: u32,
        /// Comma-separated methods; defaults to all independent ones.
        #[arg(long, value_delimiter = ',')]
        methods: Vec<Method>,
    },
    /// Check the forest-counting identity for the totally negative chamber.
    Identity37 {
        #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
        m: u64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(w) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(w.get()).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(report) => {
            let ok = report.ok;
            match report.render(cli.output) {
                Ok(s) => print!("{s}"),
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(1);
                }
            }
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

/// Malformed input exits 2; anything else the engine refuses exits 1.
fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::InvalidPartition(_)
        | Error::DegreeMismatch { .. }
        | Error::InvalidArgument(_)
        | Error::MalformedSignature(_) => 2,
        _ => 1,
    }
}

fn engine(cli: &Cli) -> Engine {
    let oracle = cli
        .dfs_budget
        .map_or_else(Oracle::new, |b| Oracle::with_budget(b as u128));
    Engine::with_oracle(oracle).with_chamber_bound(cli.max_vars.get())
}

fn run(cli: &Cli) -> hurwitz_core::Result<Report> {
    let bound = cli.max_vars.get();
    match &cli.command {
        Command::Compute {
            mu,
            nu,
            method,
            polynomial,
        } => {
            let pair = HurwitzPair::new(mu.clone(), nu.clone())?;
            let ev = engine(cli).evaluate(&pair, *method, *polynomial)?;
            Ok(Report::evaluation(&ev))
        }
        Command::Poly { mu, nu } => {
            let pair = HurwitzPair::new(mu.clone(), nu.clone())?;
            let cp = engine(cli).polynomial_for_pair(&pair)?;
            Ok(Report::polynomial(&pair, &cp))
        }
        Command::Chambers { m, n } => {
            let chambers = enumerate_chambers_bounded(*m as usize, *n as usize, bound)?;
            Ok(Report::chambers(*m as usize, *n as usize, &chambers))
        }
        Command::Trees { mu, nu, essential } => {
            let pair = HurwitzPair::new(mu.clone(), nu.clone())?;
            if *essential {
                Ok(Report::stars(&pair, &enumerate_essential_star(&pair)))
            } else {
                Ok(Report::trees(&pair, &enumerate_geometric_bounded(&pair, bound)?))
            }
        }
        Command::Verify { d_max, methods } => {
            let mut config = SweepConfig::all_methods(*d_max);
            if !methods.is_empty() {
                let mut ms = methods.clone();
                ms.sort();
                ms.dedup();
                config.methods = ms;
            }
            Ok(Report::sweep(&engine(cli).verify_sweep(&config)))
        }
        Command::Identity37 { m } => {
            let (lhs, rhs) = forest_identity(*m as usize)?;
            Ok(Report::identity(*m as usize, &lhs, &rhs))
        }
    }
}
