//! Dataset and bounds files, and the synthetic linear-data generator.
//!
//! Dataset CSV: header `x1,...,xd,y`, one sample per row. Reals are written
//! with Rust's shortest round-trip formatting, so files reload bit-exactly.

use std::path::Path;

use iqls::{Dataset, Matrix, SearchBox};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::{CliError, Result};

/// True weights of synthetic data are drawn uniformly from `[-R, R]`.
pub const TRUE_WEIGHT_RANGE: f64 = 5.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Synthetic {
    pub dataset: Dataset,
    pub true_weights: Vec<f64>,
}

/// Noisy linear data: weights, then features row by row, then noise, all
/// from one ChaCha8 stream seeded with `seed`.
pub fn synthetic_linear(
    features: usize,
    samples: usize,
    domain: (f64, f64),
    noise_sigma: f64,
    seed: u64,
) -> Result<Synthetic> {
    if features == 0 || samples == 0 {
        return Err(CliError::Args(
            "need at least one feature and one sample".into(),
        ));
    }
    if !(domain.0 < domain.1) {
        return Err(CliError::Args(format!(
            "empty domain {}:{}",
            domain.0, domain.1
        )));
    }
    if !(noise_sigma >= 0.0 && noise_sigma.is_finite()) {
        return Err(CliError::Args(format!(
            "noise must be a finite non-negative std, got {noise_sigma}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let true_weights: Vec<f64> = (0..features)
        .map(|_| rng.random_range(-TRUE_WEIGHT_RANGE..TRUE_WEIGHT_RANGE))
        .collect();
    let x: Vec<f64> = (0..features * samples)
        .map(|_| rng.random_range(domain.0..domain.1))
        .collect();
    let x = Matrix::new(samples, features, x)?;
    let mut y = x.mul_vec(&true_weights);
    if noise_sigma > 0.0 {
        let normal = Normal::new(0.0, noise_sigma).expect("validated sigma");
        for v in &mut y {
            *v += normal.sample(&mut rng);
        }
    }
    Ok(Synthetic {
        dataset: Dataset::new(x, y)?,
        true_weights,
    })
}

pub fn dataset_to_csv(ds: &Dataset) -> String {
    let d = ds.num_features();
    let mut out = String::new();
    let header: Vec<String> = (1..=d)
        .map(|i| format!("x{i}"))
        .chain(["y".to_string()])
        .collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for (row, y) in ds.x().row_iter().zip(ds.y()) {
        for v in row {
            out.push_str(&v.to_string());
            out.push(',');
        }
        out.push_str(&y.to_string());
        out.push('\n');
    }
    out
}

pub fn dataset_from_csv(text: &str, origin: &Path) -> Result<Dataset> {
    let bad = |reason: String| CliError::Data {
        path: origin.to_path_buf(),
        reason,
    };
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| bad(e.to_string()))?.clone();
    let cols = header.len();
    let expected: Vec<String> = (1..cols)
        .map(|i| format!("x{i}"))
        .chain(["y".to_string()])
        .collect();
    if cols < 2 || header.iter().ne(expected.iter().map(String::as_str)) {
        return Err(bad(format!(
            "header must be x1,...,xd,y; found `{}`",
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut x = Vec::new();
    let mut y = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| bad(e.to_string()))?;
        let values = record
            .iter()
            .map(|f| f.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| bad(format!("row {}: {e}", line + 1)))?;
        x.extend_from_slice(&values[..cols - 1]);
        y.push(values[cols - 1]);
    }
    let n = y.len();
    Dataset::new(Matrix::new(n, cols - 1, x)?, y).map_err(|e| bad(e.to_string()))
}

pub fn read_dataset(path: &Path) -> Result<Dataset> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    dataset_from_csv(&text, path)
}

/// Parses `lo:hi`.
pub fn parse_range(s: &str) -> std::result::Result<(f64, f64), String> {
    let (lo, hi) = s
        .split_once(':')
        .ok_or_else(|| format!("expected lo:hi, got `{s}`"))?;
    let lo: f64 = lo
        .trim()
        .parse()
        .map_err(|e| format!("bad lower bound `{lo}`: {e}"))?;
    let hi: f64 = hi
        .trim()
        .parse()
        .map_err(|e| format!("bad upper bound `{hi}`: {e}"))?;
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(format!("need finite lo < hi, got {lo}:{hi}"));
    }
    Ok((lo, hi))
}

/// Per-weight bounds file: header `lower,upper`, one row per weight.
pub fn read_bounds(path: &Path) -> Result<SearchBox> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let bad = |reason: String| CliError::Data {
        path: path.to_path_buf(),
        reason,
    };
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| bad(e.to_string()))?.clone();
    if header.iter().ne(["lower", "upper"]) {
        return Err(bad("header must be `lower,upper`".into()));
    }
    let mut lower = Vec::new();
    let mut upper = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| bad(e.to_string()))?;
        let parse = |i: usize| record[i].parse::<f64>().map_err(|e| bad(e.to_string()));
        lower.push(parse(0)?);
        upper.push(parse(1)?);
    }
    SearchBox::new(lower, upper).map_err(|e| bad(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_is_exact() {
        let s = synthetic_linear(3, 25, (-5.0, 5.0), 0.3, 11).unwrap();
        let text = dataset_to_csv(&s.dataset);
        assert!(text.starts_with("x1,x2,x3,y\n"));
        assert_eq!(
            dataset_from_csv(&text, Path::new("mem")).unwrap(),
            s.dataset
        );
    }

    #[test]
    fn generator_is_deterministic_and_in_domain() {
        let a = synthetic_linear(2, 100, (-5.0, 5.0), 0.0, 0).unwrap();
        let b = synthetic_linear(2, 100, (-5.0, 5.0), 0.0, 0).unwrap();
        assert_eq!(dataset_to_csv(&a.dataset), dataset_to_csv(&b.dataset));
        assert_eq!(a.dataset.num_samples(), 100);
        assert!(a
            .dataset
            .x()
            .as_slice()
            .iter()
            .all(|v| (-5.0..5.0).contains(v)));
        let c = synthetic_linear(2, 100, (-5.0, 5.0), 0.0, 1).unwrap();
        assert_ne!(a.true_weights, c.true_weights);
    }

    #[test]
    fn noiseless_data_recovers_true_weights() {
        for seed in 0..5 {
            let s = synthetic_linear(4, 60, (-5.0, 5.0), 0.0, seed).unwrap();
            let w = iqls::classical_ls(&s.dataset).unwrap();
            for (a, b) in w.iter().zip(&s.true_weights) {
                assert!((a - b).abs() <= 1e-8);
            }
        }
    }

    #[test]
    fn rejects_bad_files() {
        let p = Path::new("mem");
        assert!(dataset_from_csv("a,b\n1,2\n", p).is_err());
        assert!(dataset_from_csv("x1,y\n1,zz\n", p).is_err());
        assert!(dataset_from_csv("x1,y\n", p).is_err());
        assert!(dataset_from_csv("x1,x2,y\n1,2\n", p).is_err());
    }

    #[test]
    fn ranges() {
        assert_eq!(parse_range("-10:10").unwrap(), (-10.0, 10.0));
        assert_eq!(parse_range("0:3").unwrap(), (0.0, 3.0));
        assert!(parse_range("3:0").is_err());
        assert!(parse_range("3").is_err());
        assert!(parse_range("a:1").is_err());
    }
}
