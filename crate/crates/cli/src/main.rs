use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{ArgGroup, Parser, Subcommand};

use makeev_cli::commands::{self, CertifySource, Output, SolveArgs};
use makeev_core::certify::SearchPolicy;

/// Certify hyperplane equipartition bounds and check concrete arrangements.
#[derive(Parser)]
#[command(name = "makeev", version)]
struct Cli {
    /// Emit machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full-monomial test on a spec file or a named preset.
    #[command(group(ArgGroup::new("source").required(true).args(["spec", "theorem"])))]
    Certify {
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Preset id: thm3.1, thm3.2, thm4.1, thm4.2, prop4.3, prop5.4a, prop5.4b, prop6.1a, prop6.1b.
        #[arg(long)]
        theorem: Option<String>,
        #[arg(long, requires = "theorem")]
        k: Option<usize>,
        #[arg(long, requires = "theorem")]
        q: Option<u32>,
        #[arg(long, requires = "theorem")]
        t: Option<u64>,
        /// Ambient dimension for the transversal presets.
        #[arg(long, requires = "theorem")]
        d: Option<usize>,
    },
    /// Smallest certified dimension for `m` masses and `l` of `k` hyperplanes.
    Search {
        #[arg(long)]
        m: u64,
        #[arg(long)]
        l: usize,
        #[arg(long)]
        k: usize,
        /// paper, bisection-pad or ortho-then-pad.
        #[arg(long, default_value = "paper", value_parser = parse_policy)]
        policy: SearchPolicy,
        #[arg(long, default_value_t = 32)]
        dmax: usize,
    },
    /// Lower and best known upper bound.
    Bounds {
        #[arg(long)]
        m: u64,
        #[arg(long)]
        l: u32,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        ortho: bool,
    },
    /// Recompute every bound family with live certificates.
    Table,
    /// Check an arrangement against masses.
    Verify {
        #[arg(long)]
        arrangement: PathBuf,
        #[arg(long)]
        masses: PathBuf,
        #[arg(long)]
        l: usize,
        #[arg(long)]
        ortho: bool,
        /// Relative tolerance on Fourier coefficients and normal dot products.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Search for an arrangement numerically.
    Solve {
        #[arg(long)]
        masses: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        l: usize,
        #[arg(long)]
        ortho: bool,
        #[arg(long, default_value_t = 20)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the arrangement here instead of printing it.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 0.01)]
        tol: f64,
        /// Annealing stages.
        #[arg(long, default_value_t = 5)]
        stages: usize,
        /// Temperature factor between stages.
        #[arg(long, default_value_t = 0.2)]
        factor: f64,
    },
}

fn parse_policy(s: &str) -> Result<SearchPolicy, String> {
    SearchPolicy::parse(s).map_err(|e| e.to_string())
}

fn run(cli: Cli) -> Result<Output> {
    let json = cli.json;
    match cli.command {
        Command::Certify {
            spec,
            theorem,
            k,
            q,
            t,
            d,
        } => {
            let source = match (spec, theorem) {
                (Some(path), None) => CertifySource::Spec(path),
                (None, Some(id)) => CertifySource::Theorem { id, k, q, t, d },
                _ => unreachable!("clap enforces exactly one source"),
            };
            commands::certify(&commands::engine_from_env()?, source, json)
        }
        Command::Search {
            m,
            l,
            k,
            policy,
            dmax,
        } => commands::search(&commands::engine_from_env()?, m, l, k, policy, dmax, json),
        Command::Bounds { m, l, k, ortho } => commands::bounds(m, l, k, ortho, json),
        Command::Table => commands::table(&commands::engine_from_env()?, json),
        Command::Verify {
            arrangement,
            masses,
            l,
            ortho,
            tol,
        } => commands::verify(&arrangement, &masses, l, ortho, tol, json),
        Command::Solve {
            masses,
            k,
            l,
            ortho,
            restarts,
            seed,
            out,
            tol,
            stages,
            factor,
        } => commands::solve(
            SolveArgs {
                masses,
                k,
                l,
                orthogonal: ortho,
                restarts,
                seed,
                out,
                tol,
                stages,
                factor,
            },
            json,
        ),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            let _ = stdout.write_all(out.text.as_bytes());
            ExitCode::from(out.code)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            let resource = e
                .chain()
                .any(|c| matches!(c.downcast_ref(), Some(makeev_core::Error::CellLimit { .. })));
            ExitCode::from(if resource {
                commands::EXIT_RESOURCE
            } else {
                commands::EXIT_USAGE
            })
        }
    }
}
