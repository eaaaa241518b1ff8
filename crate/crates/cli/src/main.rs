use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;

/// Simulate, estimate and inspect multivariate locally stationary wavelet
/// spectra.
///
/// Spectra are stored as bundle directories (meta.json + data.csv). Channel
/// and level indices on the command line are 1-based, level 1 being the
/// finest. Set MVLSW_THREADS to limit the worker thread count.
#[derive(Debug, Parser)]
#[command(name = "mvlsw", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Draw a series from a spectrum bundle and write it as CSV.
    Simulate(SimulateArgs),
    /// Estimate the wavelet spectrum of a CSV series.
    Estimate(EstimateArgs),
    /// Local coherence or partial coherence of a spectrum estimate.
    Coherence(CoherenceArgs),
    /// Approximate Gaussian point-wise confidence intervals.
    Ci(CiArgs),
    /// Bootstrap point-wise intervals and median.
    Bootstrap(BootstrapArgs),
    /// Plot a slice of a bundle as SVG with a CSV sidecar.
    Plot(PlotArgs),
    /// Write a built-in test spectrum.
    Fixture(FixtureArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Dist {
    Gauss,
    Uniform,
    T,
}

#[derive(Debug, Args)]
struct InnovationArgs {
    /// Innovation distribution.
    #[arg(long, value_enum, default_value = "gauss")]
    dist: Dist,
    /// Degrees of freedom for Student-t innovations (must exceed 4).
    #[arg(long, default_value_t = 5.0)]
    df: f64,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long)]
    spectrum: PathBuf,
    #[arg(long)]
    seed: u64,
    #[command(flatten)]
    innovation: InnovationArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct EstimateArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value = "daubexphase")]
    family: String,
    /// Vanishing moments of the wavelet (1 is Haar).
    #[arg(long, default_value_t = 1)]
    number: usize,
    /// daniell or modified-daniell.
    #[arg(long, default_value = "daniell")]
    kernel: String,
    /// Kernel half-width: an integer, `auto` for floor(sqrt(T)), or a
    /// comma-separated list with one value per level.
    #[arg(long, default_value = "auto")]
    param: String,
    #[arg(long)]
    bias_correct: bool,
    /// Minimum eigenvalue enforced on every spectral matrix.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Length policy for non-dyadic input: truncate-head, truncate-tail,
    /// zero-pad, reflect-pad, periodic-pad or error.
    #[arg(long, default_value = "truncate-head")]
    pad: String,
    /// Columns to use, by header name or 1-based number.
    #[arg(long, value_delimiter = ',')]
    columns: Option<Vec<String>>,
    /// Replace each column by its log-returns before windowing.
    #[arg(long)]
    log_returns: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct CoherenceArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    partial: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct CiArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long)]
    out_lower: PathBuf,
    #[arg(long)]
    out_upper: PathBuf,
    /// Also write the asymptotic variance.
    #[arg(long)]
    out_variance: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BootstrapArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value_t = 100)]
    reps: usize,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long)]
    seed: u64,
    #[command(flatten)]
    innovation: InnovationArgs,
    #[arg(long)]
    out_lower: PathBuf,
    #[arg(long)]
    out_median: PathBuf,
    #[arg(long)]
    out_upper: PathBuf,
}

#[derive(Debug, Args)]
struct PlotArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4))]
    style: u8,
    /// `p,q,j` for style 1, `j` for style 2, `p,q` for styles 3 and 4.
    #[arg(long, allow_hyphen_values = true)]
    info: String,
    /// Lower and upper bound bundles drawn as envelopes.
    #[arg(long, num_args = 2, value_names = ["LOWER", "UPPER"])]
    interval: Option<Vec<PathBuf>>,
    /// Leave out the diagonal panels in style 2.
    #[arg(long)]
    no_diag: bool,
    #[arg(long, num_args = 2, value_names = ["MIN", "MAX"], allow_negative_numbers = true)]
    ylim: Option<Vec<f64>>,
    #[arg(long, default_value_t = 1.5)]
    lwd: f64,
    /// Output path; `.svg` and `.csv` files are written next to each other.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct FixtureArgs {
    /// The trivariate spectrum with linearly varying power at level 2.
    #[arg(long, required = true)]
    eq3: bool,
    #[arg(long, default_value_t = 1024)]
    length: usize,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    if let Err(msg) = commands::configure_threads() {
        eprintln!("mvlsw: usage-error: {msg}");
        return ExitCode::from(2);
    }
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(commands::Failure::Usage(msg)) => {
            eprintln!("mvlsw: usage-error: {msg}");
            ExitCode::from(2)
        }
        Err(commands::Failure::Domain(e)) => {
            eprintln!("mvlsw: {}: {}", e.code(), e.to_string().replace('\n', " "));
            ExitCode::from(1)
        }
    }
}
