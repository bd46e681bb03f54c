//! The subcommands, as pure functions from inputs to artifact text.

use std::fmt::Write as _;

use iqls::{
    benchmark_functions, build_qubo, classical_ls, export_qubo, gram, mse, run_iqls, sse,
    AnnealConfig, BenchmarkFunction, BitEncoding, Dataset, IqlsConfig, IqlsTrace, SearchBox,
    SolverKind, SplineBasis,
};
use rayon::prelude::*;

use crate::Result;

/// Default initial box half-width when none is given.
pub const DEFAULT_BOUND: f64 = 10.0;

#[derive(Debug, Clone, PartialEq)]
pub enum Bounds {
    /// The same `[lo, hi]` for every weight.
    Uniform(f64, f64),
    PerWeight(SearchBox),
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds::Uniform(-DEFAULT_BOUND, DEFAULT_BOUND)
    }
}

impl Bounds {
    pub fn search_box(&self, dim: usize) -> Result<SearchBox> {
        match self {
            Bounds::Uniform(lo, hi) => Ok(SearchBox::uniform(dim, *lo, *hi)?),
            Bounds::PerWeight(b) if b.dim() == dim => Ok(b.clone()),
            Bounds::PerWeight(b) => Err(crate::CliError::Args(format!(
                "bounds file has {} rows but the model has {dim} weights",
                b.dim()
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitOptions {
    pub bits_per_weight: u32,
    pub iterations: usize,
    pub bounds: Bounds,
    pub solver: SolverKind,
    pub anneal: AnnealConfig,
    pub loss_tolerance: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            bits_per_weight: 2,
            iterations: 10,
            bounds: Bounds::default(),
            solver: SolverKind::Auto,
            anneal: AnnealConfig::default(),
            loss_tolerance: 0.0,
        }
    }
}

impl FitOptions {
    pub fn config(&self, dim: usize) -> Result<IqlsConfig> {
        let cfg = IqlsConfig::new(
            self.bounds.search_box(dim)?,
            self.bits_per_weight,
            self.iterations,
        )
        .with_solver(self.solver)
        .with_anneal(self.anneal.clone())
        .with_loss_tolerance(self.loss_tolerance);
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Per-iteration CSV: `iteration,mse,sse,lower_1,upper_1,w_1,...`.
///
/// Row 0 is the starting point (box midpoint, initial box); row `k` holds the
/// iterate of step `k` and the box it produced for step `k + 1`.
pub fn trace_csv(trace: &IqlsTrace, ds: &Dataset) -> Result<String> {
    let d = trace.config.initial_box.dim();
    let mut out = String::from("iteration,mse,sse");
    for i in 1..=d {
        write!(out, ",lower_{i},upper_{i},w_{i}").unwrap();
    }
    out.push('\n');
    let w0 = &trace.initial_weights;
    let rows = std::iter::once((0, mse(ds, w0)?, sse(ds, w0)?, &trace.config.initial_box, w0))
        .chain(
            trace
                .records
                .iter()
                .map(|r| (r.iteration, r.mse, r.sse, &r.box_after, &r.weights)),
        );
    for (k, m, s, b, w) in rows {
        write!(out, "{k},{m},{s}").unwrap();
        for ((lo, hi), wi) in b.lower().iter().zip(b.upper()).zip(w) {
            write!(out, ",{lo},{hi},{wi}").unwrap();
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn trace_json(trace: &IqlsTrace) -> String {
    let mut s = serde_json::to_string_pretty(trace).expect("trace serializes");
    s.push('\n');
    s
}

#[derive(Debug, Clone)]
pub struct LinearFit {
    pub trace: IqlsTrace,
    pub trace_csv: String,
    pub trace_json: String,
}

pub fn fit_linear(ds: &Dataset, opts: &FitOptions) -> Result<LinearFit> {
    let trace = run_iqls(ds, &opts.config(ds.num_features())?)?;
    Ok(LinearFit {
        trace_csv: trace_csv(&trace, ds)?,
        trace_json: trace_json(&trace),
        trace,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplineOptions {
    pub target: String,
    pub knots: usize,
    pub samples: usize,
    /// Points of the dense grid the fitted curves are tabulated on.
    pub grid_points: usize,
    pub fit: FitOptions,
}

impl Default for SplineOptions {
    fn default() -> Self {
        Self {
            target: "sin".into(),
            knots: 20,
            samples: 200,
            grid_points: 400,
            fit: FitOptions {
                bits_per_weight: 1,
                ..FitOptions::default()
            },
        }
    }
}

#[derive(Debug, Clone)]
pub struct SplineFit {
    pub target: BenchmarkFunction,
    pub basis: SplineBasis,
    pub trace: IqlsTrace,
    pub trace_csv: String,
    pub trace_json: String,
    /// `x,truth,classical,fit_1,...,fit_K` on the dense grid.
    pub curves_csv: String,
    /// Final MSE against the target on the training samples.
    pub final_mse: f64,
    /// Same on the dense grid.
    pub final_grid_mse: f64,
    /// MSE of the exact least-squares spline, if the normal equations solve.
    pub classical_mse: Option<f64>,
}

pub fn fit_spline(opts: &SplineOptions) -> Result<SplineFit> {
    let target = BenchmarkFunction::by_name(&opts.target)?;
    if opts.samples < 2 || opts.grid_points < 2 {
        return Err(crate::CliError::Args(
            "need at least 2 samples and 2 grid points".into(),
        ));
    }
    let (x_min, x_max) = target.domain;
    let basis = SplineBasis::uniform_knots(x_min, x_max, opts.knots)?;
    let (xs, ys) = target.sample(opts.samples);
    let ds = basis.dataset(&xs, ys)?;
    let trace = run_iqls(&ds, &opts.fit.config(basis.dim())?)?;
    let classical = classical_ls(&ds).ok();

    let grid = iqls::splines::linspace(x_min, x_max, opts.grid_points);
    let mut curves = String::from("x,truth,classical");
    for r in &trace.records {
        write!(curves, ",fit_{}", r.iteration).unwrap();
    }
    curves.push('\n');
    let mut grid_sq = 0.0;
    for &x in &grid {
        let truth = target.eval(x);
        write!(curves, "{x},{truth},").unwrap();
        if let Some(c) = &classical {
            write!(curves, "{}", basis.evaluate(c, x)).unwrap();
        }
        for r in &trace.records {
            write!(curves, ",{}", basis.evaluate(&r.weights, x)).unwrap();
        }
        curves.push('\n');
        grid_sq += (basis.evaluate(&trace.final_weights, x) - truth).powi(2);
    }

    Ok(SplineFit {
        trace_csv: trace_csv(&trace, &ds)?,
        trace_json: trace_json(&trace),
        curves_csv: curves,
        final_mse: mse(&ds, &trace.final_weights)?,
        final_grid_mse: grid_sq / grid.len() as f64,
        classical_mse: classical.as_deref().map(|c| mse(&ds, c)).transpose()?,
        target,
        basis,
        trace,
    })
}

/// Names accepted by `--target`.
pub fn target_names() -> Vec<&'static str> {
    benchmark_functions().iter().map(|b| b.name).collect()
}

#[derive(Debug, Clone)]
pub struct Sweep {
    pub traces: Vec<(u32, IqlsTrace)>,
    /// Long format: `m,iteration,mse`.
    pub csv: String,
}

/// One full run per bit depth; runs are independent and execute in parallel.
pub fn sweep_bits(ds: &Dataset, bits: &[u32], opts: &FitOptions) -> Result<Sweep> {
    if bits.is_empty() {
        return Err(crate::CliError::Args("empty list of bit depths".into()));
    }
    let traces = bits
        .par_iter()
        .map(|&m| {
            let o = FitOptions {
                bits_per_weight: m,
                ..opts.clone()
            };
            Ok((m, run_iqls(ds, &o.config(ds.num_features())?)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut csv = String::from("m,iteration,mse\n");
    for (m, t) in &traces {
        for r in &t.records {
            writeln!(csv, "{m},{},{}", r.iteration, r.mse).unwrap();
        }
    }
    Ok(Sweep { traces, csv })
}

/// The first-iteration QUBO document for `ds` under `opts`.
pub fn qubo_document(ds: &Dataset, opts: &FitOptions) -> Result<String> {
    let cfg = opts.config(ds.num_features())?;
    let enc = BitEncoding::new(cfg.initial_box, cfg.bits_per_weight)?;
    Ok(export_qubo(&build_qubo(&gram(ds), &enc)?))
}
