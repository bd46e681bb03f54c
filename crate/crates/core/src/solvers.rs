//! Binary-quadratic minimizers.
//!
//! [`solve_exhaustive`] enumerates every assignment and is the ground truth
//! for small problems. [`solve_anneal`] is a classical stand-in for an
//! annealing device: independent restarts of single-bit-flip Metropolis
//! sweeps under a geometric inverse-temperature schedule.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qubo::Qubo;

/// Hard ceiling for [`solve_exhaustive`].
pub const EXHAUSTIVE_LIMIT: usize = 24;
/// [`SolverKind::Auto`] enumerates up to this many variables.
pub const AUTO_EXHAUSTIVE_MAX: usize = 20;
/// Inner block enumerated by Gray code between exact re-evaluations.
const GRAY_BLOCK_BITS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    #[default]
    Auto,
    Exhaustive,
    Anneal,
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolverKind::Auto => "auto",
            SolverKind::Exhaustive => "exhaustive",
            SolverKind::Anneal => "anneal",
        })
    }
}

impl FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(SolverKind::Auto),
            "exhaustive" => Ok(SolverKind::Exhaustive),
            "anneal" => Ok(SolverKind::Anneal),
            other => Err(Error::invalid(format!(
                "unknown solver `{other}` (expected auto, exhaustive or anneal)"
            ))),
        }
    }
}

/// Simulated-annealing parameters.
///
/// Inverse temperatures apply to energy differences divided by the QUBO's
/// largest absolute coefficient, so one schedule serves problems of any
/// scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnealConfig {
    pub seed: u64,
    pub num_restarts: usize,
    pub sweeps_per_restart: usize,
    pub beta_initial: f64,
    pub beta_final: f64,
}

impl Default for AnnealConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            num_restarts: 32,
            sweeps_per_restart: 200,
            beta_initial: 0.1,
            beta_final: 10.0,
        }
    }
}

impl AnnealConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_restarts == 0 || self.sweeps_per_restart == 0 {
            return Err(Error::invalid("restarts and sweeps must be positive"));
        }
        if !(self.beta_initial > 0.0
            && self.beta_final > self.beta_initial
            && self.beta_final.is_finite())
        {
            return Err(Error::invalid(format!(
                "need 0 < beta_initial < beta_final, got {} and {}",
                self.beta_initial, self.beta_final
            )));
        }
        Ok(())
    }

    fn beta(&self, sweep: usize) -> f64 {
        if self.sweeps_per_restart == 1 {
            return self.beta_final;
        }
        let t = sweep as f64 / (self.sweeps_per_restart - 1) as f64;
        self.beta_initial * (self.beta_final / self.beta_initial).powf(t)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub bits: Vec<u8>,
    pub energy: f64,
    pub solver_name: String,
    pub metadata: BTreeMap<String, String>,
}

/// Dispatches to a backend. `Auto` enumerates up to [`AUTO_EXHAUSTIVE_MAX`]
/// variables and anneals beyond.
pub fn solve(q: &Qubo, kind: SolverKind, cfg: &AnnealConfig) -> Result<SolveResult> {
    match kind {
        SolverKind::Exhaustive => solve_exhaustive(q),
        SolverKind::Anneal => solve_anneal(q, cfg),
        SolverKind::Auto if q.num_vars() <= AUTO_EXHAUSTIVE_MAX => solve_exhaustive(q),
        SolverKind::Auto => solve_anneal(q, cfg),
    }
}

/// Energies closer than this are ties: `1e-12` times the total coefficient
/// mass `|α| + Σ|γ| + Σ|Γ|`, which bounds the rounding noise of any energy
/// sum. A fixed absolute tolerance would swallow real differences once the
/// search box has shrunk and all coefficients are tiny.
pub fn tie_tolerance(q: &Qubo) -> f64 {
    let mass = q.offset().abs()
        + q.linear().iter().map(|c| c.abs()).sum::<f64>()
        + q.quadratic().values().map(|c| c.abs()).sum::<f64>();
    1e-12 * mass
}

/// `a` beats `b` if clearly lower, or tied and lexicographically smaller.
fn better(a: &(f64, Vec<u8>), b: &(f64, Vec<u8>), tol: f64) -> bool {
    a.0 < b.0 - tol || ((a.0 - b.0).abs() <= tol && a.1 < b.1)
}

/// Global minimizer by enumeration. Ties within [`tie_tolerance`] go to the
/// lexicographically smallest bit vector.
pub fn solve_exhaustive(q: &Qubo) -> Result<SolveResult> {
    let n = q.num_vars();
    if n > EXHAUSTIVE_LIMIT {
        return Err(Error::BudgetExceeded {
            num_vars: n,
            limit: EXHAUSTIVE_LIMIT,
        });
    }
    let mut coupling = vec![0.0; n * n];
    for (&(r, s), &c) in q.quadratic() {
        coupling[r * n + s] = c;
        coupling[s * n + r] = c;
    }
    let inner = n.min(GRAY_BLOCK_BITS);
    let outer = n - inner;
    let tol = tie_tolerance(q);

    let best = (0u64..1 << outer)
        .into_par_iter()
        .map(|prefix| best_in_block(q, &coupling, prefix, outer, inner, tol))
        .collect::<Vec<_>>()
        .into_iter()
        .reduce(|acc, cand| if better(&cand, &acc, tol) { cand } else { acc })
        .expect("at least one block");

    let mut metadata = BTreeMap::new();
    metadata.insert("assignments".to_string(), (1u64 << n).to_string());
    Ok(SolveResult {
        bits: best.1,
        energy: best.0,
        solver_name: "exhaustive".to_string(),
        metadata,
    })
}

/// Enumerates the low `inner` variables by Gray code under a fixed prefix
/// for the first `outer` variables.
fn best_in_block(
    q: &Qubo,
    coupling: &[f64],
    prefix: u64,
    outer: usize,
    inner: usize,
    tol: f64,
) -> (f64, Vec<u8>) {
    let n = outer + inner;
    let mut bits = vec![0u8; n];
    for (p, b) in bits.iter_mut().take(outer).enumerate() {
        *b = ((prefix >> (outer - 1 - p)) & 1) as u8;
    }
    let linear = q.linear();
    let mut field: Vec<f64> = (0..n)
        .map(|v| {
            (0..n)
                .filter(|&u| bits[u] == 1)
                .map(|u| coupling[v * n + u])
                .sum()
        })
        .collect();
    let mut energy = q.energy_unchecked(&bits);
    let mut best = (energy, bits.clone());

    for t in 1u64..1 << inner {
        let v = n - 1 - t.trailing_zeros() as usize;
        let sign = if bits[v] == 0 { 1.0 } else { -1.0 };
        energy += sign * (linear[v] + field[v]);
        bits[v] ^= 1;
        let row = &coupling[v * n..(v + 1) * n];
        for (f, c) in field.iter_mut().zip(row) {
            *f += sign * c;
        }
        if energy < best.0 + 2.0 * tol {
            let exact = (q.energy_unchecked(&bits), bits.clone());
            if better(&exact, &best, tol) {
                best = exact;
            }
        }
    }
    best
}

/// Best assignment over independent Metropolis restarts.
///
/// Restart `k` draws from the ChaCha8 stream `k` of `cfg.seed`, so results
/// are identical for identical inputs regardless of thread scheduling. The
/// reported energy is recomputed from the reported bits; ties between
/// restarts go to the lowest restart index.
pub fn solve_anneal(q: &Qubo, cfg: &AnnealConfig) -> Result<SolveResult> {
    cfg.validate()?;
    let adjacency = q.adjacency();
    let scale = match q.max_abs_coefficient() {
        s if s > 0.0 => s,
        _ => 1.0,
    };

    let runs: Vec<(f64, Vec<u8>)> = (0..cfg.num_restarts)
        .into_par_iter()
        .map(|k| {
            let bits = anneal_restart(q, &adjacency, scale, cfg, k as u64);
            (q.energy_unchecked(&bits), bits)
        })
        .collect();
    let (energy, bits) = runs
        .into_iter()
        .reduce(|acc, cand| if cand.0 < acc.0 { cand } else { acc })
        .expect("at least one restart");

    let mut metadata = BTreeMap::new();
    metadata.insert("seed".to_string(), cfg.seed.to_string());
    metadata.insert("restarts".to_string(), cfg.num_restarts.to_string());
    metadata.insert("sweeps".to_string(), cfg.sweeps_per_restart.to_string());
    metadata.insert("beta_initial".to_string(), cfg.beta_initial.to_string());
    metadata.insert("beta_final".to_string(), cfg.beta_final.to_string());
    metadata.insert("energy_scale".to_string(), scale.to_string());
    Ok(SolveResult {
        bits,
        energy,
        solver_name: "anneal".to_string(),
        metadata,
    })
}

fn anneal_restart(
    q: &Qubo,
    adjacency: &[Vec<(usize, f64)>],
    scale: f64,
    cfg: &AnnealConfig,
    restart: u64,
) -> Vec<u8> {
    let n = q.num_vars();
    let linear = q.linear();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(restart);

    let mut bits: Vec<u8> = (0..n).map(|_| rng.random_range(0..=1u8)).collect();
    // field[v] = Σ_u Γ_vu b_u
    let mut field = vec![0.0; n];
    for (v, nbrs) in adjacency.iter().enumerate() {
        field[v] = nbrs
            .iter()
            .filter(|(u, _)| bits[*u] == 1)
            .map(|(_, c)| c)
            .sum();
    }
    let mut energy = q.energy_unchecked(&bits);
    let mut best_energy = energy;
    let mut best_bits = bits.clone();

    for sweep in 0..cfg.sweeps_per_restart {
        let beta = cfg.beta(sweep) / scale;
        for v in 0..n {
            let sign = if bits[v] == 0 { 1.0 } else { -1.0 };
            let delta = sign * (linear[v] + field[v]);
            if delta <= 0.0 || rng.random::<f64>() < (-beta * delta).exp() {
                bits[v] ^= 1;
                energy += delta;
                for &(u, c) in &adjacency[v] {
                    field[u] += sign * c;
                }
                if energy < best_energy {
                    best_energy = energy;
                    best_bits.copy_from_slice(&bits);
                }
            }
        }
    }
    best_bits
}
