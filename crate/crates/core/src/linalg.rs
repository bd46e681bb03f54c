//! Dense regression data, residual metrics and the normal-equations baseline.
//!
//! The QUBO builder never touches sample rows directly. It works from a
//! [`GramCache`] holding `XᵀX`, `Xᵀy` and `yᵀy`, which determine the sum of
//! squared errors of any weight vector:
//!
//! ```text
//! SSE(w) = yᵀy − 2 wᵀ(Xᵀy) + wᵀ(XᵀX)w
//! ```
//!
//! Models have no implicit intercept. Append a constant-one column to `X` if
//! one is wanted.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row-major dense matrix of `f64`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::invalid(format!(
                "matrix data has {} entries, expected {rows}×{cols}",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().position(|r| r.len() != cols) {
            return Err(Error::invalid(format!(
                "row {bad} has {} columns, expected {cols}",
                rows[bad].len()
            )));
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data: rows.concat(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_iter(&self) -> impl Iterator<Item = &[f64]> {
        // chunks_exact panics on a zero chunk size
        self.data.chunks_exact(self.cols.max(1)).take(self.rows)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.cols + j] = value;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// `A v` for a vector of length `cols`.
    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.cols);
        self.row_iter().map(|row| dot(row, v)).collect()
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Feature matrix `X` (N × d) with its target vector `y` (length N).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    x: Matrix,
    y: Vec<f64>,
}

impl Dataset {
    pub fn new(x: Matrix, y: Vec<f64>) -> Result<Self> {
        if x.rows() == 0 || x.cols() == 0 {
            return Err(Error::invalid(format!(
                "dataset must have at least one row and one column, got {}×{}",
                x.rows(),
                x.cols()
            )));
        }
        if y.len() != x.rows() {
            return Err(Error::invalid(format!(
                "target length {} does not match {} feature rows",
                y.len(),
                x.rows()
            )));
        }
        if x.as_slice().iter().chain(&y).any(|v| !v.is_finite()) {
            return Err(Error::invalid("dataset contains a non-finite value"));
        }
        Ok(Self { x, y })
    }

    pub fn from_rows(rows: &[Vec<f64>], y: Vec<f64>) -> Result<Self> {
        Self::new(Matrix::from_rows(rows)?, y)
    }

    pub fn x(&self) -> &Matrix {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    /// N
    pub fn num_samples(&self) -> usize {
        self.x.rows()
    }

    /// d
    pub fn num_features(&self) -> usize {
        self.x.cols()
    }

    fn check_weights(&self, w: &[f64]) -> Result<()> {
        if w.len() != self.num_features() {
            return Err(Error::invalid(format!(
                "weight vector has length {}, dataset has {} features",
                w.len(),
                self.num_features()
            )));
        }
        if w.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("weight vector contains a non-finite value"));
        }
        Ok(())
    }

    /// Residuals `y − Xw`.
    pub fn residuals(&self, w: &[f64]) -> Result<Vec<f64>> {
        self.check_weights(w)?;
        Ok(self
            .x
            .row_iter()
            .zip(&self.y)
            .map(|(row, &target)| target - dot(row, w))
            .collect())
    }
}

/// Sum of squared residuals `Σ (y_n − wᵀx_n)²`.
pub fn sse(ds: &Dataset, w: &[f64]) -> Result<f64> {
    Ok(ds.residuals(w)?.iter().map(|r| r * r).sum())
}

/// [`sse`] divided by the sample count.
pub fn mse(ds: &Dataset, w: &[f64]) -> Result<f64> {
    Ok(sse(ds, w)? / ds.num_samples() as f64)
}

/// Sufficient statistics of a dataset for quadratic losses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GramCache {
    /// `XᵀX`, d × d, symmetric.
    pub g: Matrix,
    /// `Xᵀy`
    pub h: Vec<f64>,
    /// `yᵀy`
    pub yy: f64,
}

impl GramCache {
    pub fn dim(&self) -> usize {
        self.h.len()
    }

    /// `yᵀy − 2 wᵀh + wᵀGw`.
    pub fn sse(&self, w: &[f64]) -> f64 {
        let gw = self.g.mul_vec(w);
        self.yy - 2.0 * dot(w, &self.h) + dot(w, &gw)
    }
}

pub fn gram(ds: &Dataset) -> GramCache {
    let d = ds.num_features();
    let mut g = Matrix::zeros(d, d);
    let mut h = vec![0.0; d];
    let mut yy = 0.0;
    for (row, &target) in ds.x().row_iter().zip(ds.y()) {
        for i in 0..d {
            h[i] += row[i] * target;
            for j in i..d {
                g.data[i * d + j] += row[i] * row[j];
            }
        }
        yy += target * target;
    }
    for i in 0..d {
        for j in 0..i {
            g.data[i * d + j] = g.data[j * d + i];
        }
    }
    GramCache { g, h, yy }
}

/// Relative pivot floor for the Cholesky factorization in [`classical_ls`].
pub const PIVOT_TOLERANCE: f64 = 1e-10;

/// Lower-triangular Cholesky factor of a symmetric positive-definite matrix.
struct Cholesky {
    n: usize,
    l: Vec<f64>,
}

impl Cholesky {
    fn factor(a: &Matrix) -> Result<Self> {
        let n = a.rows();
        let largest = (0..n).map(|i| a.get(i, i)).fold(0.0_f64, f64::max);
        let threshold = PIVOT_TOLERANCE * largest;
        let mut l = vec![0.0_f64; n * n];
        for j in 0..n {
            let pivot = a.get(j, j) - (0..j).map(|k| l[j * n + k].powi(2)).sum::<f64>();
            if !(pivot > threshold) {
                return Err(Error::RankDeficient {
                    index: j,
                    pivot,
                    threshold,
                });
            }
            let diag = pivot.sqrt();
            l[j * n + j] = diag;
            for i in j + 1..n {
                let s = a.get(i, j) - (0..j).map(|k| l[i * n + k] * l[j * n + k]).sum::<f64>();
                l[i * n + j] = s / diag;
            }
        }
        Ok(Self { n, l })
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut z = b.to_vec();
        for i in 0..n {
            let s: f64 = (0..i).map(|k| self.l[i * n + k] * z[k]).sum();
            z[i] = (z[i] - s) / self.l[i * n + i];
        }
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|k| self.l[k * n + i] * z[k]).sum();
            z[i] = (z[i] - s) / self.l[i * n + i];
        }
        z
    }
}

/// Least-squares minimizer via Cholesky on the normal equations, followed by
/// one step of iterative refinement against the raw residuals.
pub fn classical_ls(ds: &Dataset) -> Result<Vec<f64>> {
    let gc = gram(ds);
    let chol = Cholesky::factor(&gc.g)?;
    let mut w = chol.solve(&gc.h);

    let r = ds.residuals(&w)?;
    let d = ds.num_features();
    let mut correction_rhs = vec![0.0; d];
    for (row, ri) in ds.x().row_iter().zip(&r) {
        for (c, xi) in correction_rhs.iter_mut().zip(row) {
            *c += xi * ri;
        }
    }
    for (wi, dw) in w.iter_mut().zip(chol.solve(&correction_rhs)) {
        *wi += dw;
    }
    Ok(w)
}
