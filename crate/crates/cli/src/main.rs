use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use iqls::{AnnealConfig, SolverKind};
use iqls_cli::commands::{self, Bounds, FitOptions, SplineOptions};
use iqls_cli::data::{self, parse_range};
use iqls_cli::manifest::RunManifest;
use iqls_cli::{CliError, Result};

/// Least-squares fitting by iterated QUBO refinement.
#[derive(Debug, Parser)]
#[command(name = "iqls", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic linear dataset.
    GenData(GenData),
    /// Fit a linear model to a dataset CSV.
    FitLinear(FitLinear),
    /// Fit a piecewise-linear spline to a benchmark function.
    FitSpline(FitSpline),
    /// Run the same fit for several bit depths.
    SweepBits(SweepBits),
    /// Write the first-iteration QUBO of a fit as JSON.
    ExportQubo(ExportQubo),
}

#[derive(Debug, Args)]
struct GenData {
    #[arg(short = 'd', long, default_value_t = 2)]
    features: usize,
    #[arg(short = 'n', long, default_value_t = 100)]
    samples: usize,
    /// Feature range, `lo:hi`.
    #[arg(long, default_value = "-5:5", value_parser = parse_range, allow_hyphen_values = true)]
    domain: (f64, f64),
    /// Standard deviation of additive Gaussian noise.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long, env = "IQLS_DEFAULT_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct Fit {
    #[arg(short = 'm', long = "bits", default_value_t = 2)]
    bits: u32,
    #[arg(short = 'k', long, default_value_t = 10)]
    iterations: usize,
    /// Initial box for every weight, `lo:hi` [default: -10:10].
    #[arg(long, value_parser = parse_range, allow_hyphen_values = true, conflicts_with = "bounds_file")]
    bounds: Option<(f64, f64)>,
    /// CSV with header `lower,upper` and one row per weight.
    #[arg(long)]
    bounds_file: Option<PathBuf>,
    #[arg(long, default_value_t = SolverKind::Auto)]
    solver: SolverKind,
    #[command(flatten)]
    anneal: Anneal,
    /// Stop early once the MSE changes by less than this.
    #[arg(long, default_value_t = 0.0)]
    loss_tolerance: f64,
}

#[derive(Debug, Args)]
struct Anneal {
    /// Anneal seed of the first iteration; iteration k uses seed + k - 1.
    #[arg(long, env = "IQLS_DEFAULT_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = AnnealConfig::default().num_restarts)]
    restarts: usize,
    #[arg(long, default_value_t = AnnealConfig::default().sweeps_per_restart)]
    sweeps: usize,
    #[arg(long, default_value_t = AnnealConfig::default().beta_initial)]
    beta_initial: f64,
    #[arg(long, default_value_t = AnnealConfig::default().beta_final)]
    beta_final: f64,
}

#[derive(Debug, Args)]
struct FitLinear {
    #[arg(long)]
    data: PathBuf,
    #[command(flatten)]
    fit: Fit,
    /// Output prefix; writes `<out>.trace.csv` and `<out>.trace.json`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct FitSpline {
    #[arg(long, default_value = "sin")]
    target: String,
    /// Number of interior knots.
    #[arg(long, default_value_t = 20)]
    knots: usize,
    #[arg(short = 'n', long, default_value_t = 200)]
    samples: usize,
    #[arg(long, default_value_t = 400)]
    grid_points: usize,
    #[command(flatten)]
    fit: Fit,
    /// Output prefix; writes `<out>.trace.csv`, `<out>.trace.json`, `<out>.curves.csv`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct SweepBits {
    #[arg(long)]
    data: PathBuf,
    /// Bit depths to compare, comma separated.
    #[arg(
        short = 'm',
        long = "bits",
        value_delimiter = ',',
        default_value = "1,2,3,6"
    )]
    bits: Vec<u32>,
    #[arg(short = 'k', long, default_value_t = 10)]
    iterations: usize,
    #[arg(long, value_parser = parse_range, allow_hyphen_values = true, conflicts_with = "bounds_file")]
    bounds: Option<(f64, f64)>,
    #[arg(long)]
    bounds_file: Option<PathBuf>,
    #[arg(long, default_value_t = SolverKind::Auto)]
    solver: SolverKind,
    #[command(flatten)]
    anneal: Anneal,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ExportQubo {
    #[arg(long)]
    data: PathBuf,
    #[arg(short = 'm', long = "bits", default_value_t = 2)]
    bits: u32,
    #[arg(long, value_parser = parse_range, allow_hyphen_values = true, conflicts_with = "bounds_file")]
    bounds: Option<(f64, f64)>,
    #[arg(long)]
    bounds_file: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

impl Anneal {
    fn config(&self) -> AnnealConfig {
        AnnealConfig {
            seed: self.seed,
            num_restarts: self.restarts,
            sweeps_per_restart: self.sweeps,
            beta_initial: self.beta_initial,
            beta_final: self.beta_final,
        }
    }

    fn record(&self, m: &mut RunManifest) {
        m.flag("restarts", self.restarts)
            .flag("sweeps", self.sweeps)
            .flag("beta_initial", self.beta_initial)
            .flag("beta_final", self.beta_final);
    }
}

fn bounds(range: Option<(f64, f64)>, file: Option<&Path>, m: &mut RunManifest) -> Result<Bounds> {
    Ok(match (range, file) {
        (_, Some(path)) => {
            m.flag("bounds_file", path);
            Bounds::PerWeight(data::read_bounds(path)?)
        }
        (Some((lo, hi)), None) => {
            m.flag("bounds", format!("{lo}:{hi}"));
            Bounds::Uniform(lo, hi)
        }
        (None, None) => {
            let b = commands::DEFAULT_BOUND;
            m.flag("bounds", format!("{}:{b}", -b));
            m.note(format!(
                "initial box defaulted to [-{b}, {b}] for every weight"
            ));
            Bounds::default()
        }
    })
}

impl Fit {
    fn options(&self, m: &mut RunManifest) -> Result<FitOptions> {
        m.flag("bits", self.bits)
            .flag("iterations", self.iterations)
            .flag("solver", self.solver.to_string())
            .flag("loss_tolerance", self.loss_tolerance);
        self.anneal.record(m);
        Ok(FitOptions {
            bits_per_weight: self.bits,
            iterations: self.iterations,
            bounds: bounds(self.bounds, self.bounds_file.as_deref(), m)?,
            solver: self.solver,
            anneal: self.anneal.config(),
            loss_tolerance: self.loss_tolerance,
        })
    }
}

fn common_notes(m: &mut RunManifest) {
    m.note("model has no intercept column; add a constant feature to fit one");
    m.note("annealing schedule is geometric in beta, applied to energies scaled by the largest |coefficient|");
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn write(path: &Path, text: &str, m: &mut RunManifest) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io {
            path: dir.to_path_buf(),
            source: e,
        })?;
    }
    std::fs::write(path, text).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    m.artifacts.push(path.display().to_string());
    Ok(())
}

fn finish(out: &Path, mut m: RunManifest) -> Result<()> {
    m.finish();
    let path = with_suffix(out, ".manifest.json");
    let text = m.to_json();
    write(&path, &text, &mut m)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::GenData(a) => {
            let mut m = RunManifest::new("gen-data", a.seed);
            m.flag("features", a.features)
                .flag("samples", a.samples)
                .flag("domain", format!("{}:{}", a.domain.0, a.domain.1))
                .flag("noise", a.noise);
            m.note(format!(
                "true weights drawn uniformly from [-{r}, {r}]",
                r = data::TRUE_WEIGHT_RANGE
            ));
            let s = data::synthetic_linear(a.features, a.samples, a.domain, a.noise, a.seed)?;
            m.result("true_weights", &s.true_weights);
            write(&a.out, &data::dataset_to_csv(&s.dataset), &mut m)?;
            finish(&a.out, m)
        }
        Command::FitLinear(a) => {
            let mut m = RunManifest::new("fit-linear", a.fit.anneal.seed);
            m.flag("data", &a.data);
            common_notes(&mut m);
            let opts = a.fit.options(&mut m)?;
            let ds = data::read_dataset(&a.data)?;
            let fit = commands::fit_linear(&ds, &opts)?;
            m.result("final_weights", &fit.trace.final_weights)
                .result("final_mse", fit.trace.records.last().map(|r| r.mse))
                .result("reference_weights", &fit.trace.reference_weights)
                .result("stop_reason", fit.trace.stop_reason);
            write(&with_suffix(&a.out, ".trace.csv"), &fit.trace_csv, &mut m)?;
            write(&with_suffix(&a.out, ".trace.json"), &fit.trace_json, &mut m)?;
            finish(&a.out, m)
        }
        Command::FitSpline(a) => {
            let mut m = RunManifest::new("fit-spline", a.fit.anneal.seed);
            m.flag("target", &a.target)
                .flag("knots", a.knots)
                .flag("samples", a.samples)
                .flag("grid_points", a.grid_points);
            common_notes(&mut m);
            m.note(format!(
                "benchmark targets: {}; knots uniform inside the target domain",
                commands::target_names().join(", ")
            ));
            let opts = SplineOptions {
                target: a.target,
                knots: a.knots,
                samples: a.samples,
                grid_points: a.grid_points,
                fit: a.fit.options(&mut m)?,
            };
            let fit = commands::fit_spline(&opts)?;
            m.result("final_mse", fit.final_mse)
                .result("final_grid_mse", fit.final_grid_mse)
                .result("classical_mse", fit.classical_mse);
            write(&with_suffix(&a.out, ".trace.csv"), &fit.trace_csv, &mut m)?;
            write(&with_suffix(&a.out, ".trace.json"), &fit.trace_json, &mut m)?;
            write(&with_suffix(&a.out, ".curves.csv"), &fit.curves_csv, &mut m)?;
            finish(&a.out, m)
        }
        Command::SweepBits(a) => {
            let mut m = RunManifest::new("sweep-bits", a.anneal.seed);
            m.flag("data", &a.data)
                .flag("bits", &a.bits)
                .flag("iterations", a.iterations)
                .flag("solver", a.solver.to_string());
            a.anneal.record(&mut m);
            common_notes(&mut m);
            let opts = FitOptions {
                bits_per_weight: 1,
                iterations: a.iterations,
                bounds: bounds(a.bounds, a.bounds_file.as_deref(), &mut m)?,
                solver: a.solver,
                anneal: a.anneal.config(),
                loss_tolerance: 0.0,
            };
            let ds = data::read_dataset(&a.data)?;
            let sweep = commands::sweep_bits(&ds, &a.bits, &opts)?;
            write(&a.out, &sweep.csv, &mut m)?;
            finish(&a.out, m)
        }
        Command::ExportQubo(a) => {
            let mut m = RunManifest::new("export-qubo", 0);
            m.flag("data", &a.data).flag("bits", a.bits);
            let opts = FitOptions {
                bits_per_weight: a.bits,
                bounds: bounds(a.bounds, a.bounds_file.as_deref(), &mut m)?,
                ..FitOptions::default()
            };
            let ds = data::read_dataset(&a.data)?;
            write(&a.out, &commands::qubo_document(&ds, &opts)?, &mut m)?;
            finish(&a.out, m)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
