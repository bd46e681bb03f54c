//! The iterative zoom-in loop.
//!
//! Each iteration encodes the current box with `m` bits per weight, builds
//! the exact SSE QUBO, solves it, decodes the selected weights and shrinks
//! the box around them. The variable count `d·m` never changes; the box
//! width after iteration `k` is `Δ⁽⁰⁾ / shrink_factor(m)^k`.
//!
//! The loop does not backtrack. With `m = 1`, or with strongly correlated
//! features, the selected grid point can sit far enough from the
//! least-squares solution that the next box excludes it. Such iterations are
//! flagged in [`IterationRecord::optimum_excluded`] when a reference solution
//! is available, and the run carries on.

use serde::{Deserialize, Serialize};

use crate::encoding::{shrink_factor, BitEncoding, SearchBox};
use crate::error::{Error, Result};
use crate::linalg::{classical_ls, gram, sse, Dataset};
use crate::qubo::build_qubo;
use crate::solvers::{solve, AnnealConfig, SolverKind};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IqlsConfig {
    pub bits_per_weight: u32,
    pub max_iterations: usize,
    pub initial_box: SearchBox,
    pub solver: SolverKind,
    /// Iteration `k` (1-based) anneals with seed `anneal.seed + k − 1`.
    pub anneal: AnnealConfig,
    /// Stop once `|MSE_k − MSE_{k−1}|` drops below this; 0 disables.
    pub loss_tolerance: f64,
}

impl IqlsConfig {
    pub fn new(initial_box: SearchBox, bits_per_weight: u32, max_iterations: usize) -> Self {
        Self {
            bits_per_weight,
            max_iterations,
            initial_box,
            solver: SolverKind::Auto,
            anneal: AnnealConfig::default(),
            loss_tolerance: 0.0,
        }
    }

    pub fn with_solver(mut self, solver: SolverKind) -> Self {
        self.solver = solver;
        self
    }

    pub fn with_anneal(mut self, anneal: AnnealConfig) -> Self {
        self.anneal = anneal;
        self
    }

    pub fn with_loss_tolerance(mut self, tol: f64) -> Self {
        self.loss_tolerance = tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        shrink_factor(self.bits_per_weight)?;
        if self.max_iterations == 0 {
            return Err(Error::invalid("max_iterations must be at least 1"));
        }
        if !(self.loss_tolerance >= 0.0) {
            return Err(Error::invalid(format!(
                "loss_tolerance must be non-negative, got {}",
                self.loss_tolerance
            )));
        }
        if matches!(self.solver, SolverKind::Anneal | SolverKind::Auto) {
            self.anneal.validate()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    /// 1-based.
    pub iteration: usize,
    pub box_before: SearchBox,
    pub box_after: SearchBox,
    pub bits: Vec<u8>,
    pub weights: Vec<f64>,
    /// Computed from the samples, not from the QUBO.
    pub sse: f64,
    pub mse: f64,
    /// QUBO energy reported by the solver.
    pub energy: f64,
    pub qubo_offset: f64,
    pub num_vars: usize,
    pub solver_name: String,
    /// `box_after` no longer contains the reference least-squares solution.
    /// Always false when no reference could be computed.
    pub optimum_excluded: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    MaxIterations,
    LossTolerance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IqlsTrace {
    pub config: IqlsConfig,
    /// Midpoint of the initial box. Recorded only; the loop never uses it.
    pub initial_weights: Vec<f64>,
    /// Normal-equations solution, when the Gram matrix is well conditioned.
    pub reference_weights: Option<Vec<f64>>,
    pub records: Vec<IterationRecord>,
    pub final_weights: Vec<f64>,
    pub stop_reason: StopReason,
}

impl IqlsTrace {
    pub fn mse_history(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.mse).collect()
    }

    /// The trace as if the run had stopped after iteration `k`.
    pub fn truncated(&self, k: usize) -> Option<IqlsTrace> {
        if k == 0 || k > self.records.len() {
            return None;
        }
        let records = self.records[..k].to_vec();
        Some(IqlsTrace {
            final_weights: records[k - 1].weights.clone(),
            records,
            stop_reason: StopReason::MaxIterations,
            ..self.clone()
        })
    }

    /// Largest relative deviation of recorded box widths from
    /// `Δ⁽⁰⁾ / shrink_factor(m)^k`.
    pub fn width_law_deviation(&self) -> f64 {
        let factor = shrink_factor(self.config.bits_per_weight).expect("validated config");
        let initial = self.config.initial_box.width();
        let mut worst: f64 = 0.0;
        for rec in &self.records {
            let k = rec.iteration as i32;
            for (i, w0) in initial.iter().enumerate() {
                for (b, e) in [(&rec.box_before, k - 1), (&rec.box_after, k)] {
                    let expected = w0 / factor.powi(e);
                    worst = worst.max((b.width()[i] - expected).abs() / expected);
                }
            }
        }
        worst
    }
}

/// Guaranteed box width after `iterations` shrink steps.
pub fn convergence_bound(bits_per_weight: u32, iterations: u32, initial_width: f64) -> Result<f64> {
    let factor = shrink_factor(bits_per_weight)?;
    Ok(initial_width / factor.powi(iterations as i32))
}

/// True when `w` lies outside `b` by more than rounding noise. A tie at an
/// exact grid midpoint puts the optimum on the new boundary.
fn excludes(b: &SearchBox, w: &[f64]) -> bool {
    w.iter().enumerate().any(|(i, &v)| {
        let (lo, hi) = (b.lower()[i], b.upper()[i]);
        let slack = 1e-9 * b.width()[i] + 4.0 * f64::EPSILON * lo.abs().max(hi.abs());
        v < lo - slack || v > hi + slack
    })
}

/// Runs the zoom-in loop on `ds`.
pub fn run_iqls(ds: &Dataset, cfg: &IqlsConfig) -> Result<IqlsTrace> {
    cfg.validate()?;
    let d = ds.num_features();
    if cfg.initial_box.dim() != d {
        return Err(Error::invalid(format!(
            "initial box has {} dimensions, dataset has {d} features",
            cfg.initial_box.dim()
        )));
    }
    let gc = gram(ds);
    let reference = classical_ls(ds).ok();
    let n_samples = ds.num_samples() as f64;

    let mut records: Vec<IterationRecord> = Vec::with_capacity(cfg.max_iterations);
    let mut current = cfg.initial_box.clone();
    let mut stop_reason = StopReason::MaxIterations;

    for k in 1..=cfg.max_iterations {
        let at = |e: Error| Error::Iteration {
            iteration: k,
            source: Box::new(e),
        };
        let enc = BitEncoding::new(current, cfg.bits_per_weight).map_err(at)?;
        let qubo = build_qubo(&gc, &enc).map_err(at)?;
        let anneal = AnnealConfig {
            seed: cfg.anneal.seed.wrapping_add(k as u64 - 1),
            ..cfg.anneal.clone()
        };
        let solved = solve(&qubo, cfg.solver, &anneal).map_err(at)?;
        let weights = enc.decode(&solved.bits).map_err(at)?;
        let sse = sse(ds, &weights).map_err(at)?;
        let box_after = enc.shrink(&weights).map_err(at)?;
        let optimum_excluded = reference.as_ref().is_some_and(|w| excludes(&box_after, w));

        let mse = sse / n_samples;
        let converged = cfg.loss_tolerance > 0.0
            && records
                .last()
                .is_some_and(|prev| (mse - prev.mse).abs() < cfg.loss_tolerance);

        records.push(IterationRecord {
            iteration: k,
            box_before: enc.search_box().clone(),
            box_after: box_after.clone(),
            bits: solved.bits,
            weights,
            sse,
            mse,
            energy: solved.energy,
            qubo_offset: qubo.offset(),
            num_vars: qubo.num_vars(),
            solver_name: solved.solver_name,
            optimum_excluded,
        });
        current = box_after;

        if converged {
            stop_reason = StopReason::LossTolerance;
            break;
        }
    }

    Ok(IqlsTrace {
        config: cfg.clone(),
        initial_weights: cfg.initial_box.midpoint(),
        reference_weights: reference,
        final_weights: records
            .last()
            .expect("at least one iteration")
            .weights
            .clone(),
        records,
        stop_reason,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(slope: f64, n: usize) -> Dataset {
        let xs: Vec<f64> = (0..n)
            .map(|i| -5.0 + 10.0 * i as f64 / (n - 1) as f64)
            .collect();
        Dataset::from_rows(
            &xs.iter().map(|&x| vec![x]).collect::<Vec<_>>(),
            xs.iter().map(|&x| slope * x).collect(),
        )
        .unwrap()
    }

    fn exhaustive(lo: f64, hi: f64, d: usize, m: u32, k: usize) -> IqlsConfig {
        IqlsConfig::new(SearchBox::uniform(d, lo, hi).unwrap(), m, k)
            .with_solver(SolverKind::Exhaustive)
    }

    #[test]
    fn recovers_a_noiseless_slope() {
        let trace = run_iqls(&line(2.0, 20), &exhaustive(-5.0, 5.0, 1, 2, 10)).unwrap();
        assert_eq!(trace.records.len(), 10);
        assert!((trace.final_weights[0] - 2.0).abs() <= 10.0 / 3f64.powi(10));
        assert!(trace.records.last().unwrap().mse <= 1e-6);
        assert_eq!(trace.stop_reason, StopReason::MaxIterations);
    }

    #[test]
    fn zero_target_stays_near_zero() {
        let ds = Dataset::from_rows(
            &[vec![1.0, 0.5], vec![-2.0, 1.0], vec![0.3, 3.0]],
            vec![0.0; 3],
        )
        .unwrap();
        for m in 1..=3 {
            let cfg = exhaustive(-4.0, 4.0, 2, m, 6);
            let trace = run_iqls(&ds, &cfg).unwrap();
            let last = trace.records.last().unwrap();
            let step = last.box_before.width()[0] / ((1u64 << m) - 1) as f64;
            assert!(trace.final_weights.iter().all(|w| w.abs() <= step), "m={m}");
            assert!(last.mse <= trace.records[0].mse);
        }
    }

    #[test]
    fn single_iteration_lands_on_the_initial_grid() {
        let trace = run_iqls(&line(1.3, 15), &exhaustive(-5.0, 5.0, 1, 3, 1)).unwrap();
        let grid: Vec<f64> = (0..8).map(|c| -5.0 + (10.0 / 7.0) * c as f64).collect();
        assert!(grid.contains(&trace.final_weights[0]));
        // Nearest grid point to 1.3 is code 4, i.e. 5/7.
        assert_eq!(trace.final_weights[0], grid[4]);
    }

    #[test]
    fn records_are_consistent() {
        let ds = Dataset::from_rows(
            &[
                vec![1.0, 2.0],
                vec![0.5, -1.0],
                vec![3.0, 0.25],
                vec![-1.0, -1.5],
            ],
            vec![1.0, -0.4, 2.2, 0.3],
        )
        .unwrap();
        for m in 1..=3 {
            let trace = run_iqls(&ds, &exhaustive(-3.0, 3.0, 2, m, 8)).unwrap();
            assert!(trace.width_law_deviation() <= 1e-12);
            for rec in &trace.records {
                let enc = BitEncoding::new(rec.box_before.clone(), m).unwrap();
                assert_eq!(enc.decode(&rec.bits).unwrap(), rec.weights);
                assert!((rec.sse - rec.energy).abs() <= 1e-9 * (1.0 + rec.sse));
                assert_eq!(rec.mse, rec.sse / 4.0);
                assert_eq!(rec.num_vars, 2 * m as usize);
                // Exhaustive choice is the grid minimizer.
                for c in 0u64..1 << (2 * m) {
                    let codes = [c >> m, c & ((1 << m) - 1)];
                    let w = enc.weights_from_codes(&codes);
                    let other = sse(&ds, &w).unwrap();
                    assert!(rec.sse <= other + 1e-9 * (1.0 + other));
                }
            }
        }
    }

    #[test]
    fn truncation_matches_a_shorter_run() {
        let ds = line(-0.7, 12);
        let full = run_iqls(&ds, &exhaustive(-5.0, 5.0, 1, 2, 8)).unwrap();
        for k in 1..=8 {
            let short = run_iqls(&ds, &exhaustive(-5.0, 5.0, 1, 2, k)).unwrap();
            let cut = full.truncated(k).unwrap();
            assert_eq!(cut.final_weights, short.final_weights);
            assert_eq!(cut.records, short.records);
        }
        assert!(full.truncated(0).is_none() && full.truncated(9).is_none());
    }

    #[test]
    fn mse_increase_is_recorded_not_fatal() {
        // The first iteration hits w* = 2 exactly; m = 1 then forces a step away.
        let xs: Vec<f64> = (1..=10).map(f64::from).collect();
        let ds = Dataset::from_rows(
            &xs.iter().map(|&x| vec![x]).collect::<Vec<_>>(),
            xs.iter().map(|&x| 2.0 * x).collect(),
        )
        .unwrap();
        let trace = run_iqls(&ds, &exhaustive(0.0, 2.0, 1, 1, 6)).unwrap();
        let mse = trace.mse_history();
        assert_eq!(mse.len(), 6);
        assert_eq!(mse[0], 0.0);
        assert!(mse[1] > mse[0]);
        assert!(trace.records[1].optimum_excluded);
    }

    #[test]
    fn loss_tolerance_stops_early() {
        let cfg = exhaustive(-5.0, 5.0, 1, 2, 50).with_loss_tolerance(1e-6);
        let trace = run_iqls(&line(2.0, 20), &cfg).unwrap();
        assert_eq!(trace.stop_reason, StopReason::LossTolerance);
        assert!(trace.records.len() < 50);
    }

    #[test]
    fn solver_errors_carry_the_iteration() {
        let ds = Dataset::from_rows(&[vec![1.0; 5]], vec![1.0]).unwrap();
        let err = run_iqls(&ds, &exhaustive(-1.0, 1.0, 5, 5, 3)).unwrap_err();
        assert!(matches!(err, Error::Iteration { iteration: 1, .. }));
        assert!(matches!(
            err.root(),
            Error::BudgetExceeded { num_vars: 25, .. }
        ));
    }

    #[test]
    fn config_validation() {
        let ds = line(1.0, 5);
        assert!(run_iqls(&ds, &exhaustive(-1.0, 1.0, 1, 0, 3)).is_err());
        assert!(run_iqls(&ds, &exhaustive(-1.0, 1.0, 1, 2, 0)).is_err());
        assert!(run_iqls(&ds, &exhaustive(-1.0, 1.0, 2, 2, 3)).is_err());
        assert!(run_iqls(
            &ds,
            &exhaustive(-1.0, 1.0, 1, 2, 3).with_loss_tolerance(-1.0)
        )
        .is_err());
    }

    #[test]
    fn convergence_bounds() {
        assert_eq!(convergence_bound(1, 10, 10.0).unwrap(), 10.0 / 1024.0);
        assert_eq!(convergence_bound(6, 9, 10.0).unwrap(), 10.0 / 63f64.powi(9));
        assert_eq!(convergence_bound(2, 0, 10.0).unwrap(), 10.0);
        assert!(convergence_bound(0, 1, 1.0).is_err());
    }
}
