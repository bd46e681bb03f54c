//! Degree-1 truncated-power splines and the benchmark curves fitted with them.
//!
//! The basis `[1, x, (x − t_1)₊, …, (x − t_T)₊]` spans exactly the continuous
//! piecewise-linear functions with breakpoints at the knots, so a non-linear
//! 1-D fit becomes an ordinary linear least-squares problem in `T + 2`
//! weights.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Dataset, Matrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplineBasis {
    knots: Vec<f64>,
    domain: (f64, f64),
}

impl SplineBasis {
    /// Knots must be strictly increasing and strictly inside `domain`.
    pub fn new(knots: Vec<f64>, domain: (f64, f64)) -> Result<Self> {
        let (lo, hi) = domain;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::invalid(format!("invalid domain [{lo}, {hi}]")));
        }
        if knots.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::invalid("knots must be strictly increasing"));
        }
        if knots.iter().any(|&t| !(lo < t && t < hi)) {
            return Err(Error::invalid(format!(
                "knots must lie strictly inside ({lo}, {hi})"
            )));
        }
        Ok(Self { knots, domain })
    }

    /// `T` knots at `x_min + j(x_max − x_min)/(T + 1)`, `j = 1..=T`.
    pub fn uniform_knots(x_min: f64, x_max: f64, count: usize) -> Result<Self> {
        if count == 0 {
            return Err(Error::invalid("need at least one knot"));
        }
        if !(x_min.is_finite() && x_max.is_finite() && x_min < x_max) {
            return Err(Error::invalid(format!("invalid domain [{x_min}, {x_max}]")));
        }
        let span = x_max - x_min;
        let knots = (1..=count)
            .map(|j| x_min + j as f64 * span / (count + 1) as f64)
            .collect();
        Self::new(knots, (x_min, x_max))
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    /// `T + 2`
    pub fn dim(&self) -> usize {
        self.knots.len() + 2
    }

    pub fn features(&self, x: f64) -> Vec<f64> {
        let mut row = Vec::with_capacity(self.dim());
        row.push(1.0);
        row.push(x);
        row.extend(self.knots.iter().map(|t| (x - t).max(0.0)));
        row
    }

    pub fn design_matrix(&self, xs: &[f64]) -> Result<Matrix> {
        if xs.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("sample location is not finite"));
        }
        let data = xs.iter().flat_map(|&x| self.features(x)).collect();
        Matrix::new(xs.len(), self.dim(), data)
    }

    pub fn dataset(&self, xs: &[f64], ys: Vec<f64>) -> Result<Dataset> {
        Dataset::new(self.design_matrix(xs)?, ys)
    }

    /// Value of the spline with the given coefficients at `x`.
    pub fn evaluate(&self, coefficients: &[f64], x: f64) -> f64 {
        debug_assert_eq!(coefficients.len(), self.dim());
        self.features(x)
            .iter()
            .zip(coefficients)
            .map(|(f, c)| f * c)
            .sum()
    }
}

/// A named scalar test function with its sampling domain.
#[derive(Debug, Clone, Copy)]
pub struct BenchmarkFunction {
    pub name: &'static str,
    pub domain: (f64, f64),
    f: fn(f64) -> f64,
}

impl BenchmarkFunction {
    pub fn eval(&self, x: f64) -> f64 {
        (self.f)(x)
    }

    /// `n` equally spaced points covering the domain, endpoints included.
    pub fn sample(&self, n: usize) -> (Vec<f64>, Vec<f64>) {
        let xs = linspace(self.domain.0, self.domain.1, n);
        let ys = xs.iter().map(|&x| self.eval(x)).collect();
        (xs, ys)
    }

    pub fn by_name(name: &str) -> Result<Self> {
        benchmark_functions()
            .into_iter()
            .find(|b| b.name == name)
            .ok_or_else(|| {
                let names: Vec<_> = benchmark_functions().iter().map(|b| b.name).collect();
                Error::invalid(format!(
                    "unknown target `{name}` (expected one of {})",
                    names.join(", ")
                ))
            })
    }
}

pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| {
                if i == n - 1 {
                    hi
                } else {
                    lo + (hi - lo) * i as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

fn relu(x: f64) -> f64 {
    x.max(0.0)
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn gauss(x: f64) -> f64 {
    (-x * x).exp()
}

pub fn benchmark_functions() -> Vec<BenchmarkFunction> {
    vec![
        BenchmarkFunction {
            name: "sin",
            domain: (0.0, std::f64::consts::TAU),
            f: f64::sin,
        },
        BenchmarkFunction {
            name: "tanh",
            domain: (-3.0, 3.0),
            f: f64::tanh,
        },
        BenchmarkFunction {
            name: "logistic",
            domain: (-6.0, 6.0),
            f: logistic,
        },
        BenchmarkFunction {
            name: "relu",
            domain: (-1.0, 1.0),
            f: relu,
        },
        BenchmarkFunction {
            name: "gauss",
            domain: (-3.0, 3.0),
            f: gauss,
        },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{classical_ls, sse};
    use proptest::prelude::*;

    #[test]
    fn uniform_knot_examples() {
        assert_eq!(
            SplineBasis::uniform_knots(0.0, 1.0, 1).unwrap().knots(),
            &[0.5]
        );
        assert_eq!(
            SplineBasis::uniform_knots(0.0, 3.0, 2).unwrap().knots(),
            &[1.0, 2.0]
        );
        let b = SplineBasis::uniform_knots(0.0, 1.0, 20).unwrap();
        assert_eq!(b.dim(), 22);
        for (j, t) in b.knots().iter().enumerate() {
            assert!((t - (j + 1) as f64 / 21.0).abs() < 1e-15);
        }
        assert!(SplineBasis::uniform_knots(0.0, 1.0, 0).is_err());
        assert!(SplineBasis::uniform_knots(1.0, 1.0, 3).is_err());
    }

    #[test]
    fn basis_validation() {
        assert!(SplineBasis::new(vec![0.5, 0.5], (0.0, 1.0)).is_err());
        assert!(SplineBasis::new(vec![0.0], (0.0, 1.0)).is_err());
        assert!(SplineBasis::new(vec![0.7, 0.2], (0.0, 1.0)).is_err());
    }

    #[test]
    fn design_rows() {
        let b = SplineBasis::new(vec![0.5], (0.0, 2.0)).unwrap();
        assert_eq!(b.features(1.0), vec![1.0, 1.0, 0.5]);
        assert_eq!(b.features(0.25), vec![1.0, 0.25, 0.0]);
        let b = SplineBasis::new(vec![1.0, 2.0], (0.0, 3.0)).unwrap();
        assert_eq!(b.features(1.0), vec![1.0, 1.0, 0.0, 0.0]);
        assert!(b.design_matrix(&[f64::NAN]).is_err());
    }

    #[test]
    fn benchmark_values() {
        let get = |n| BenchmarkFunction::by_name(n).unwrap();
        assert_eq!(get("sin").eval(0.0), 0.0);
        assert_eq!(get("logistic").eval(0.0), 0.5);
        assert_eq!(get("relu").eval(-0.5), 0.0);
        assert_eq!(get("gauss").eval(0.0), 1.0);
        assert_eq!(get("tanh").eval(0.0), 0.0);
        assert_eq!(benchmark_functions().len(), 5);
        assert!(BenchmarkFunction::by_name("cos").is_err());
        let (xs, ys) = get("relu").sample(5);
        assert_eq!(xs, vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        assert_eq!(ys, vec![0.0, 0.0, 0.0, 0.5, 1.0]);
    }

    #[test]
    fn design_matrix_layout() {
        let b = SplineBasis::uniform_knots(-1.0, 1.0, 6).unwrap();
        let x = b.design_matrix(&linspace(-1.0, 1.0, 40)).unwrap();
        for row in x.row_iter() {
            assert_eq!(row[0], 1.0);
            assert!(row[2..].iter().all(|&h| h >= 0.0));
        }
    }

    proptest! {
        #[test]
        fn affine_functions_are_fitted_exactly(a in -5.0f64..5.0, slope in -5.0f64..5.0, knots in 1usize..=20) {
            let b = SplineBasis::uniform_knots(-2.0, 3.0, knots).unwrap();
            let xs = linspace(-2.0, 3.0, 4 * (knots + 2));
            let ys: Vec<f64> = xs.iter().map(|x| a + slope * x).collect();
            let ds = b.dataset(&xs, ys).unwrap();
            let w = classical_ls(&ds).unwrap();
            prop_assert!(sse(&ds, &w).unwrap() <= 1e-10);
        }

        #[test]
        fn fitted_curves_are_continuous(coeffs in proptest::collection::vec(-10.0f64..10.0, 22)) {
            let b = SplineBasis::uniform_knots(0.0, 1.0, 20).unwrap();
            for &t in b.knots() {
                let left = b.evaluate(&coeffs, t - 1e-9);
                let right = b.evaluate(&coeffs, t + 1e-9);
                prop_assert!((left - right).abs() <= 1e-6 * (1.0 + left.abs()));
            }
        }
    }
}
