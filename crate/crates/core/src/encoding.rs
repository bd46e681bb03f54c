//! Fixed-width binary encoding of real weights over a search box.
//!
//! With `m` bits per weight, weight `i` ranges over the `2^m` equally spaced
//! values `ℓ_i + δ_i·c` for `c ∈ [0, 2^m − 1]`, where the step is
//! `δ_i = (u_i − ℓ_i) / (2^m − 1)`, so both endpoints are on the grid.
//!
//! Variables are laid out weight-major, most significant bit first: variable
//! `r = i·m + p` carries weight `2^(m−1−p)` in the code of weight `i`.
//!
//! After a solve the box is re-centred on the selected weight with half-width
//! `δ_i / (2 f(m))`, where `f(1) = 2` and `f(m) = 1` otherwise. The width thus
//! contracts by [`shrink_factor`]`(m) = f(m)(2^m − 1)` per iteration. The step
//! used is the one of the encoding that produced the selection; using the
//! step of the *next* encoding instead would break the contraction law.
//!
//! A [`SearchBox`] carries its widths explicitly. Widths produced by
//! [`BitEncoding::shrink`] are exact quotients of the previous step rather
//! than the difference of two rounded bounds, which matters once the width
//! drops below the spacing of floats near the weights themselves.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported bits-per-weight; a code must fit a `u64` with headroom.
pub const MAX_BITS_PER_WEIGHT: u32 = 32;

/// Per-weight interval `[lower_i, upper_i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchBox {
    lower: Vec<f64>,
    upper: Vec<f64>,
    width: Vec<f64>,
}

impl SearchBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::invalid(format!(
                "lower has {} entries but upper has {}",
                lower.len(),
                upper.len()
            )));
        }
        if lower.is_empty() {
            return Err(Error::invalid(
                "search box must have at least one dimension",
            ));
        }
        for (i, (&l, &u)) in lower.iter().zip(&upper).enumerate() {
            if !l.is_finite() || !u.is_finite() {
                return Err(Error::invalid(format!("bound {i} is not finite")));
            }
            if !(u > l) {
                return Err(Error::invalid(format!(
                    "bound {i} has non-positive width: [{l}, {u}]"
                )));
            }
        }
        let width = lower.iter().zip(&upper).map(|(l, u)| u - l).collect();
        Ok(Self {
            lower,
            upper,
            width,
        })
    }

    /// Same interval `[lo, hi]` for each of `d` weights.
    pub fn uniform(d: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo; d], vec![hi; d])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    /// Δ_i. Exact for shrunk boxes; see the module docs.
    pub fn width(&self) -> &[f64] {
        &self.width
    }

    pub fn midpoint(&self) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.width)
            .map(|(l, w)| l + 0.5 * w)
            .collect()
    }

    pub fn contains(&self, w: &[f64]) -> bool {
        w.len() == self.dim()
            && w.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (l, u))| l <= v && v <= u)
    }
}

/// `f(m)·(2^m − 1)` with `f(1) = 2`, `f(m ≥ 2) = 1`.
pub fn shrink_factor(m: u32) -> Result<f64> {
    check_bits(m)?;
    Ok(f_of(m) * levels_minus_one(m))
}

fn f_of(m: u32) -> f64 {
    if m == 1 {
        2.0
    } else {
        1.0
    }
}

fn levels_minus_one(m: u32) -> f64 {
    ((1u64 << m) - 1) as f64
}

fn check_bits(m: u32) -> Result<()> {
    if m == 0 || m > MAX_BITS_PER_WEIGHT {
        return Err(Error::invalid(format!(
            "bits per weight must be in 1..={MAX_BITS_PER_WEIGHT}, got {m}"
        )));
    }
    Ok(())
}

/// A search box discretized with `m` bits per weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BitEncoding {
    search_box: SearchBox,
    bits_per_weight: u32,
    step: Vec<f64>,
}

impl BitEncoding {
    pub fn new(search_box: SearchBox, bits_per_weight: u32) -> Result<Self> {
        check_bits(bits_per_weight)?;
        let denom = levels_minus_one(bits_per_weight);
        let step = search_box.width.iter().map(|w| w / denom).collect();
        Ok(Self {
            search_box,
            bits_per_weight,
            step,
        })
    }

    pub fn search_box(&self) -> &SearchBox {
        &self.search_box
    }

    pub fn bits_per_weight(&self) -> u32 {
        self.bits_per_weight
    }

    /// δ_i
    pub fn step(&self) -> &[f64] {
        &self.step
    }

    pub fn dim(&self) -> usize {
        self.search_box.dim()
    }

    /// d·m
    pub fn num_vars(&self) -> usize {
        self.dim() * self.bits_per_weight as usize
    }

    /// Variable index of bit `p` (0 = most significant) of weight `i`.
    pub fn var_index(&self, i: usize, p: usize) -> usize {
        i * self.bits_per_weight as usize + p
    }

    /// The weight index a variable belongs to.
    pub fn weight_of(&self, r: usize) -> usize {
        r / self.bits_per_weight as usize
    }

    /// Amount by which setting variable `r` moves its weight: `δ_i·2^(m−1−p)`.
    pub fn var_scale(&self, r: usize) -> f64 {
        let m = self.bits_per_weight as usize;
        let (i, p) = (r / m, r % m);
        self.step[i] * (1u64 << (m - 1 - p)) as f64
    }

    fn check_bits_vec(&self, bits: &[u8]) -> Result<()> {
        if bits.len() != self.num_vars() {
            return Err(Error::invalid(format!(
                "bit vector has length {}, encoding has {} variables",
                bits.len(),
                self.num_vars()
            )));
        }
        if let Some(r) = bits.iter().position(|&b| b > 1) {
            return Err(Error::invalid(format!(
                "bit {r} has non-binary value {}",
                bits[r]
            )));
        }
        Ok(())
    }

    /// Integer grid code of each weight.
    pub fn codes(&self, bits: &[u8]) -> Result<Vec<u64>> {
        self.check_bits_vec(bits)?;
        Ok(bits
            .chunks_exact(self.bits_per_weight as usize)
            .map(|chunk| chunk.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64))
            .collect())
    }

    /// Inverse of [`codes`](Self::codes).
    pub fn bits_from_codes(&self, codes: &[u64]) -> Result<Vec<u8>> {
        let m = self.bits_per_weight as usize;
        if codes.len() != self.dim() {
            return Err(Error::invalid(format!(
                "expected {} codes, got {}",
                self.dim(),
                codes.len()
            )));
        }
        let mut bits = Vec::with_capacity(self.num_vars());
        for &c in codes {
            if c >> m != 0 {
                return Err(Error::invalid(format!("code {c} does not fit in {m} bits")));
            }
            bits.extend((0..m).map(|p| ((c >> (m - 1 - p)) & 1) as u8));
        }
        Ok(bits)
    }

    /// `w_i = ℓ_i + δ_i · Σ_p 2^(m−1−p) b_{i,p}`.
    pub fn decode(&self, bits: &[u8]) -> Result<Vec<f64>> {
        let codes = self.codes(bits)?;
        Ok(self.weights_from_codes(&codes))
    }

    pub(crate) fn weights_from_codes(&self, codes: &[u64]) -> Vec<f64> {
        codes
            .iter()
            .zip(self.search_box.lower.iter().zip(&self.step))
            .map(|(&c, (l, s))| l + s * c as f64)
            .collect()
    }

    /// Box of width `δ_i / f(m)` centred on `selected`.
    ///
    /// `selected` is normally a decoded grid point of this encoding; the
    /// result is not clamped to the current box.
    pub fn shrink(&self, selected: &[f64]) -> Result<SearchBox> {
        if selected.len() != self.dim() {
            return Err(Error::invalid(format!(
                "selected weight vector has length {}, encoding has {} weights",
                selected.len(),
                self.dim()
            )));
        }
        if selected.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid(
                "selected weight vector contains a non-finite value",
            ));
        }
        let f = f_of(self.bits_per_weight);
        let width: Vec<f64> = self.step.iter().map(|s| s / f).collect();
        let (lower, upper) = selected
            .iter()
            .zip(&width)
            .map(|(w, wd)| (w - 0.5 * wd, w + 0.5 * wd))
            .unzip();
        Ok(SearchBox {
            lower,
            upper,
            width,
        })
    }
}
