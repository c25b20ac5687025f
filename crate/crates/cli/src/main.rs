//! `rhostar`: independence tests and dependence diagnostics based on ρ*.

mod commands;
mod error;
mod input;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rhostar::analyze::{CurveSign, DemoKind};
use rhostar::dist::Family;
use rhostar::infer::Statistic;

#[derive(Parser)]
#[command(name = "rhostar", version, about = "Dependence analysis with the rho* coefficient")]
pub struct Cli {
    /// Worker threads (default: RHOSTAR_THREADS, else available parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Write the JSON report (or demo CSV) here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Perm,
    Asymp,
}

#[derive(Args)]
pub struct SampleArgs {
    /// CSV of x,y pairs, `bundled:mental-health` or `demo:<kind>[:n]`.
    pub input: String,
    /// Read the CSV as a count matrix.
    #[arg(long)]
    pub table: bool,
    /// Replace both margins by K⁻¹ of their mid-rank grades.
    #[arg(long)]
    pub grade: Option<Family>,
    /// Largest x-component index reported.
    #[arg(long)]
    pub max_k: Option<usize>,
    /// Largest y-component index reported.
    #[arg(long)]
    pub max_l: Option<usize>,
    /// Level for flagging component tests.
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args)]
pub struct TestArgs {
    /// Permutation replicates.
    #[arg(long, short = 'B', default_value_t = 9999)]
    pub replicates: u64,
    /// Monte Carlo draws from the asymptotic null.
    #[arg(long, default_value_t = 100_000)]
    pub draws: usize,
    #[arg(long, default_value = "rho_star_v")]
    pub statistic: Statistic,
    /// Eigenvalues per margin kept in the asymptotic mixture.
    #[arg(long, default_value_t = 100)]
    pub mixture_terms: usize,
}

#[derive(Subcommand)]
pub enum Command {
    /// Test independence of a paired sample.
    Test {
        #[command(flatten)]
        sample: SampleArgs,
        #[arg(long, value_enum, default_value = "perm")]
        method: MethodArg,
        #[command(flatten)]
        test: TestArgs,
    },
    /// Component correlations ρ̂_kl with weighted Bonferroni tests.
    Components {
        #[command(flatten)]
        sample: SampleArgs,
    },
    /// Per-observation or per-cell association weights, with SVG and CSV output.
    Weights {
        #[command(flatten)]
        sample: SampleArgs,
        /// Component of the x margin (with --l).
        #[arg(long, requires = "l")]
        k: Option<usize>,
        /// Component of the y margin (with --k).
        #[arg(long, requires = "k")]
        l: Option<usize>,
        #[arg(long)]
        plot: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Eigenvalues of the kernel of a discretized distribution.
    Eigen {
        #[arg(long)]
        dist: Family,
        /// Number of discretization points.
        #[arg(long)]
        t: usize,
        /// Number of eigenfunctions to include.
        #[arg(long, default_value_t = 0)]
        functions: usize,
    },
    /// K-sample statistic from a CSV of (group score, observation).
    Ksample {
        input: String,
        #[arg(long)]
        grade: Option<Family>,
        /// Permutation replicates; a test runs when --seed is given.
        #[arg(long, short = 'B', default_value_t = 9999)]
        replicates: u64,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Analyze a contingency table of counts.
    Table {
        #[command(flatten)]
        sample: SampleArgs,
        /// Also test independence with this method.
        #[arg(long, value_enum)]
        method: Option<MethodArg>,
        #[command(flatten)]
        test: TestArgs,
    },
    /// Support curves of perfect component association on the unit square.
    Frechet {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        l: usize,
        /// `+` or `-`.
        #[arg(long, allow_hyphen_values = true, default_value = "+")]
        sign: CurveSign,
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// Write demo data as CSV.
    Demo {
        kind: DemoKind,
        #[arg(long, default_value_t = 200)]
        n: usize,
        #[arg(long)]
        seed: u64,
    },
}

fn thread_count(flag: Option<usize>) -> Result<Option<usize>, error::CliError> {
    if let Some(t) = flag {
        return Ok(Some(t));
    }
    match std::env::var("RHOSTAR_THREADS") {
        Ok(v) => v.trim().parse().map(Some).map_err(|_| error::CliError::input(format!("bad RHOSTAR_THREADS '{v}'"))),
        Err(_) => Ok(None),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = thread_count(cli.threads).and_then(|threads| {
        let mut pool = rayon::ThreadPoolBuilder::new();
        if let Some(t) = threads {
            if t == 0 {
                return Err(error::CliError::input("thread count must be positive"));
            }
            pool = pool.num_threads(t);
        }
        let pool = pool.build().map_err(|e| error::CliError::input(e.to_string()))?;
        pool.install(|| commands::run(&cli.command, cli.out.as_deref()))
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("rhostar: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
