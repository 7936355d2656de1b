//! `coda`: batch front end for compositional density estimation, kernel
//! regression and exponential families.

mod commands;
mod ingest;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::ingest::Renormalize;

#[derive(Parser, Debug)]
#[command(name = "coda", version, about = "Compositional data analysis on the sphere quotient")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Read, check and echo a composition file.
    Validate {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Write the sign-flip orbit of every composition with multiplicities.
    Spread {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Spread-out kernel density estimate, at the data or on a ternary grid.
    Kde {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        smoothing: SmoothingArgs,
        /// Evaluate on a barycentric lattice with this many subdivisions (3 parts only).
        #[arg(long, value_name = "R")]
        grid: Option<usize>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Goodness-of-fit test of the data against a null density.
    Gof {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        smoothing: SmoothingArgs,
        /// `uniform` or a parameter file of an exponential-family model.
        #[arg(long, default_value = "uniform")]
        null: String,
        /// Number of simulated null datasets.
        #[arg(long, default_value_t = 199)]
        n_sim: usize,
        /// Monte Carlo samples for the null's log-partition, if the file lacks it.
        #[arg(long, default_value_t = 100_000)]
        n_mc: usize,
        /// Size of the fixed null sample behind the cross term of a non-uniform null.
        #[arg(long, default_value_t = coda_core::density::DEFAULT_REFERENCE_SIZE)]
        reference_size: usize,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Minimal-norm kernel interpolation of the last column.
    Interp {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        fit: FitArgs,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Kernel ridge regression of the last column.
    Ridge {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        fit: FitArgs,
        /// Ridge penalty, positive.
        #[arg(long)]
        mu: f64,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Evaluate an exponential-family density at data rows or on a ternary grid.
    ExpfamEval {
        #[command(flatten)]
        model: ModelArgs,
        /// Compositions to evaluate at.
        #[arg(long, conflicts_with = "grid")]
        input: Option<PathBuf>,
        #[command(flatten)]
        renorm: RenormArgs,
        /// Evaluate on a barycentric lattice with this many subdivisions (3 parts only).
        #[arg(long, value_name = "R", required_unless_present = "input")]
        grid: Option<usize>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Draw compositions from an exponential-family model.
    ExpfamSample {
        #[command(flatten)]
        model: ModelArgs,
        /// Number of draws.
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Maximum-likelihood fit of an exponential-family model.
    ExpfamFit {
        #[command(flatten)]
        data: DataArgs,
        /// Polynomial degree of the model.
        #[arg(long)]
        m: usize,
        /// Monte Carlo samples for the log-partition and its derivatives.
        #[arg(long, default_value_t = 100_000)]
        n_mc: usize,
        #[arg(long, default_value_t = 100)]
        max_iter: usize,
        /// Stop when the gradient norm falls below this.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Density values on a barycentric lattice of the 3-part simplex.
    Grid {
        /// Subdivisions per edge.
        #[arg(long, value_name = "R")]
        resolution: usize,
        /// Exponential-family parameter file.
        #[arg(long, conflicts_with = "input", required_unless_present = "input")]
        theta: Option<PathBuf>,
        /// Monte Carlo samples for the log-partition, if the file lacks it.
        #[arg(long, default_value_t = 100_000)]
        n_mc: usize,
        /// Compositions for a kernel density estimate.
        #[arg(long)]
        input: Option<PathBuf>,
        #[command(flatten)]
        renorm: RenormArgs,
        #[command(flatten)]
        smoothing: SmoothingArgs,
        #[command(flatten)]
        common: CommonArgs,
    },
}

#[derive(Args, Debug)]
struct CommonArgs {
    /// Output file.
    #[arg(long)]
    output: PathBuf,
    /// Master seed for every random stream.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads (defaults to all cores); results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args, Debug)]
struct RenormArgs {
    /// Rescale rows whose parts sum to within 1e-2 of 1.
    #[arg(long, conflicts_with = "renormalize_counts")]
    renormalize: bool,
    /// Divide every row by its sum (counts or percentages).
    #[arg(long)]
    renormalize_counts: bool,
}

impl RenormArgs {
    fn mode(&self) -> Renormalize {
        match (self.renormalize, self.renormalize_counts) {
            (true, _) => Renormalize::Near,
            (_, true) => Renormalize::Counts,
            _ => Renormalize::Off,
        }
    }
}

#[derive(Args, Debug)]
struct DataArgs {
    /// Comma-separated compositions, one row per observation.
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    renorm: RenormArgs,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum KernelName {
    Exponential,
    Compact,
    Indicator,
}

#[derive(Args, Debug)]
struct SmoothingArgs {
    /// Bandwidth; defaults to n^(-1/(d+4)).
    #[arg(long)]
    h: Option<f64>,
    /// Kernel profile.
    #[arg(long, value_enum, default_value = "exponential")]
    kernel: KernelName,
}

#[derive(Args, Debug)]
struct FitArgs {
    /// Kernel degree; defaults to the smallest degree with a non-singular Gram matrix.
    #[arg(long)]
    m: Option<usize>,
    /// Largest degree tried by the default search.
    #[arg(long, default_value_t = 12)]
    m_max: usize,
    /// Also write residuals and diagnostics as key=value lines here.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ModelArgs {
    /// Exponential-family parameter file.
    #[arg(long)]
    theta: PathBuf,
    /// Monte Carlo samples for the log-partition, if the file lacks it.
    #[arg(long, default_value_t = 100_000)]
    n_mc: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
