//! Least-squares regression solved as a sequence of QUBO problems.
//!
//! Each regression weight is encoded with a fixed number of bits over a
//! per-weight search interval. The sum of squared errors over that grid is
//! an exact quadratic form in the bits, which any binary-quadratic solver can
//! minimize. After each solve the interval is re-centred on the selected
//! weight and shrunk by a constant factor, so the variable count stays fixed
//! while precision improves geometrically with the iteration count.
//!
//! ```
//! use iqls::{run_iqls, Dataset, IqlsConfig, SearchBox, SolverKind};
//!
//! // y = 2x, sampled at five points.
//! let xs = [-2.0, -1.0, 0.0, 1.0, 2.0];
//! let ds = Dataset::from_rows(
//!     &xs.iter().map(|&x| vec![x]).collect::<Vec<_>>(),
//!     xs.iter().map(|&x| 2.0 * x).collect(),
//! )
//! .unwrap();
//!
//! let cfg = IqlsConfig::new(SearchBox::uniform(1, -5.0, 5.0).unwrap(), 2, 12)
//!     .with_solver(SolverKind::Exhaustive);
//! let trace = run_iqls(&ds, &cfg).unwrap();
//! assert!((trace.final_weights[0] - 2.0).abs() < 1e-4);
//! ```
//!
//! Module map:
//! - [`linalg`]: datasets, residual metrics, Gram precomputation, and a
//!   classical normal-equations baseline.
//! - [`encoding`]: bit layout, decoding, and interval shrinkage.
//! - [`qubo`]: the SSE-to-QUBO reduction, energies, and a JSON exchange format.
//! - [`solvers`]: exhaustive and simulated-annealing minimizers.
//! - [`driver`]: the iterative zoom-in loop and its trace.
//! - [`splines`]: linear truncated-power spline features and test functions.

// NaN must fail these range checks, so `!(a < b)` is intentional.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod driver;
pub mod encoding;
mod error;
pub mod linalg;
pub mod qubo;
pub mod solvers;
pub mod splines;

pub use driver::{convergence_bound, run_iqls, IqlsConfig, IqlsTrace, IterationRecord, StopReason};
pub use encoding::{shrink_factor, BitEncoding, SearchBox};
pub use error::{Error, Result};
pub use linalg::{classical_ls, gram, mse, sse, Dataset, GramCache, Matrix};
pub use qubo::{build_qubo, export_qubo, import_qubo, Qubo};
pub use solvers::{
    solve, solve_anneal, solve_exhaustive, tie_tolerance, AnnealConfig, SolveResult, SolverKind,
};
pub use splines::{benchmark_functions, BenchmarkFunction, SplineBasis};
