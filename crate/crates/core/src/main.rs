use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cylcov::cli::{
    render_coverage_csv, render_pdf_csv, run_cache, run_coverage, write_output, HistogramRequest, MethodSelection,
    OutputFormat, RunOptions, ScenarioFile, DEFAULT_PAIRS, DEFAULT_PDF_POINTS,
};
use cylcov::model::CylinderGeometry;
use cylcov::par::with_threads;
use cylcov::simulation::DEFAULT_SEED;
use cylcov::tabulated::DEFAULT_GRID_SIZE;

/// Coverage probability of finite 3D networks in a cylinder.
#[derive(Parser)]
#[command(name = "cylcov", version)]
struct Cli {
    /// Worker threads (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate the inter-node distance density.
    Pdf(PdfArgs),
    /// Coverage probability over a scenario sweep.
    Coverage(CoverageArgs),
    /// Build and save a distance CDF table.
    Cache(CacheArgs),
}

#[derive(Args)]
struct GeometryArgs {
    #[arg(long)]
    radius: f64,
    #[arg(long)]
    height: f64,
}

#[derive(Args)]
struct PdfArgs {
    #[command(flatten)]
    geometry: GeometryArgs,
    #[arg(long, default_value_t = DEFAULT_PDF_POINTS)]
    points: usize,
    /// Add simulated pair-distance histogram columns.
    #[arg(long)]
    with_histogram: bool,
    #[arg(long, default_value_t = DEFAULT_PAIRS)]
    pairs: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
    /// Output file (stdout if omitted).
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct CoverageArgs {
    #[arg(long)]
    scenario: PathBuf,
    /// Reuse a table written by `cylcov cache`.
    #[arg(long)]
    cdf_cache: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    grid_size: Option<usize>,
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
    /// Override the threshold, in dB.
    #[arg(long, allow_negative_numbers = true)]
    beta_db: Option<f64>,
    #[arg(long, value_enum)]
    method: Option<MethodSelection>,
    /// Write NA in the wall_time_s column so reruns are byte-identical.
    #[arg(long)]
    omit_timing: bool,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct CacheArgs {
    #[command(flatten)]
    geometry: GeometryArgs,
    #[arg(long, default_value_t = DEFAULT_GRID_SIZE)]
    grid_size: usize,
    #[arg(long, short)]
    output: PathBuf,
}

fn run(cli: Cli) -> cylcov::Result<()> {
    match cli.command {
        Command::Pdf(a) => {
            let geom = CylinderGeometry::new(a.geometry.radius, a.geometry.height)?;
            let hist = a.with_histogram.then_some(HistogramRequest {
                pairs: a.pairs,
                seed: a.seed,
            });
            let csv = render_pdf_csv(&geom, a.points, hist)?;
            write_output(a.output.as_deref(), &csv)
        }
        Command::Coverage(a) => {
            let mut file = ScenarioFile::load(&a.scenario)?;
            if let Some(seed) = a.seed {
                file.simulation.seed = seed;
            }
            if let Some(trials) = a.trials {
                file.simulation.trials = trials;
            }
            if let Some(n) = a.grid_size {
                file.output.grid_size = n;
            }
            if let Some(f) = a.format {
                file.output.format = f;
            }
            if let Some(m) = a.method {
                file.method = m;
            }
            if let Some(db) = a.beta_db {
                file.scenario.beta = None;
                file.scenario.beta_db = Some(db);
            }
            if let Some(p) = a.output {
                file.output.path = Some(p);
            }
            let opts = RunOptions {
                cdf_cache: a.cdf_cache,
                omit_timing: a.omit_timing,
            };
            let rows = run_coverage(&file, &opts)?;
            write_output(file.output.path.as_deref(), &render_coverage_csv(&file, &rows))
        }
        Command::Cache(a) => {
            let geom = CylinderGeometry::new(a.geometry.radius, a.geometry.height)?;
            let table = run_cache(&geom, a.grid_size, &a.output)?;
            eprintln!("wrote {} knots to {}", table.grid_size(), a.output.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match with_threads(cli.threads, || run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
