//! Reduction of the discretized sum of squared errors to a QUBO.
//!
//! Writing the weights as `w = ℓ + v` with `v_i = Σ_p a_{i,p} b_{i,p}` and
//! `a_{i,p} = δ_i·2^(m−1−p)`, the Gram form of the SSE expands to
//!
//! ```text
//! SSE(b) = SSE(ℓ) + 2 vᵀ(Gℓ − h) + vᵀGv
//! ```
//!
//! Every term is at most quadratic in the bits. Because `b² = b`, the
//! diagonal of `vᵀGv` folds into the linear coefficients:
//!
//! ```text
//! offset  = SSE(ℓ)
//! γ_r     = a_r² G_ii + 2 a_r (Gℓ − h)_i               r = (i, p)
//! Γ_{r,s} = 2 a_r a_s G_ij                  r < s,     s = (j, q)
//! ```
//!
//! Construction costs O((dm)²) given the [`GramCache`], independent of the
//! sample count.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::encoding::BitEncoding;
use crate::error::{Error, Result};
use crate::linalg::GramCache;

/// `offset + Σ_r linear_r b_r + Σ_{r<s} quadratic_{r,s} b_r b_s` over binary `b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Qubo {
    num_vars: usize,
    offset: f64,
    linear: Vec<f64>,
    quadratic: BTreeMap<(usize, usize), f64>,
}

impl Qubo {
    /// Builds a QUBO from explicit coefficients. Quadratic keys must satisfy
    /// `r < s < linear.len()` and appear once.
    pub fn new(
        offset: f64,
        linear: Vec<f64>,
        quadratic: impl IntoIterator<Item = ((usize, usize), f64)>,
    ) -> Result<Self> {
        let num_vars = linear.len();
        let mut map = BTreeMap::new();
        for ((r, s), c) in quadratic {
            if r >= s {
                return Err(Error::invalid(format!(
                    "quadratic key ({r}, {s}) is not r < s"
                )));
            }
            if s >= num_vars {
                return Err(Error::invalid(format!(
                    "quadratic key ({r}, {s}) out of range for {num_vars} variables"
                )));
            }
            if map.insert((r, s), c).is_some() {
                return Err(Error::invalid(format!(
                    "duplicate quadratic key ({r}, {s})"
                )));
            }
        }
        Ok(Self {
            num_vars,
            offset,
            linear,
            quadratic: map,
        })
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    /// α
    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// γ
    pub fn linear(&self) -> &[f64] {
        &self.linear
    }

    /// Γ, keyed by `(r, s)` with `r < s`.
    pub fn quadratic(&self) -> &BTreeMap<(usize, usize), f64> {
        &self.quadratic
    }

    /// Largest absolute linear or quadratic coefficient.
    pub fn max_abs_coefficient(&self) -> f64 {
        self.linear
            .iter()
            .chain(self.quadratic.values())
            .fold(0.0, |acc: f64, c| acc.max(c.abs()))
    }

    pub fn energy(&self, bits: &[u8]) -> Result<f64> {
        if bits.len() != self.num_vars {
            return Err(Error::invalid(format!(
                "bit vector has length {}, QUBO has {} variables",
                bits.len(),
                self.num_vars
            )));
        }
        if let Some(r) = bits.iter().position(|&b| b > 1) {
            return Err(Error::invalid(format!(
                "bit {r} has non-binary value {}",
                bits[r]
            )));
        }
        Ok(self.energy_unchecked(bits))
    }

    pub(crate) fn energy_unchecked(&self, bits: &[u8]) -> f64 {
        let mut e = self.offset;
        for (r, &c) in self.linear.iter().enumerate() {
            if bits[r] == 1 {
                e += c;
            }
        }
        for (&(r, s), &c) in &self.quadratic {
            if bits[r] == 1 && bits[s] == 1 {
                e += c;
            }
        }
        e
    }

    /// Symmetric adjacency lists of the quadratic terms.
    pub(crate) fn adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.num_vars];
        for (&(r, s), &c) in &self.quadratic {
            adj[r].push((s, c));
            adj[s].push((r, c));
        }
        adj
    }
}

/// Exact QUBO whose energy equals the SSE of the decoded weights.
pub fn build_qubo(gc: &GramCache, enc: &BitEncoding) -> Result<Qubo> {
    let d = gc.dim();
    if enc.dim() != d {
        return Err(Error::invalid(format!(
            "encoding has {} weights but the Gram matrix is {d}×{d}",
            enc.dim()
        )));
    }
    let lower = enc.search_box().lower();
    let g = &gc.g;
    let gl = g.mul_vec(lower);
    let tilt: Vec<f64> = gl.iter().zip(&gc.h).map(|(a, b)| a - b).collect();

    let n = enc.num_vars();
    let scale: Vec<f64> = (0..n).map(|r| enc.var_scale(r)).collect();
    let owner: Vec<usize> = (0..n).map(|r| enc.weight_of(r)).collect();

    let linear = (0..n)
        .map(|r| {
            let (a, i) = (scale[r], owner[r]);
            a * (a * g.get(i, i) + 2.0 * tilt[i])
        })
        .collect();

    let mut quadratic = BTreeMap::new();
    for r in 0..n {
        for s in r + 1..n {
            let c = 2.0 * scale[r] * scale[s] * g.get(owner[r], owner[s]);
            quadratic.insert((r, s), c);
        }
    }

    Ok(Qubo {
        num_vars: n,
        offset: gc.sse(lower),
        linear,
        quadratic,
    })
}

/// Format tag written into every exported document.
pub const DOCUMENT_FORMAT: &str = "iqls-qubo";
pub const DOCUMENT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct QuboDocument {
    format: String,
    version: u32,
    num_vars: usize,
    offset: f64,
    linear: Vec<(usize, f64)>,
    quadratic: Vec<(usize, usize, f64)>,
}

/// Serializes to a versioned JSON document with sparse coefficient lists.
///
/// Zero linear coefficients are omitted; every stored quadratic entry is
/// written, so import reproduces the same key set.
pub fn export_qubo(q: &Qubo) -> String {
    let doc = QuboDocument {
        format: DOCUMENT_FORMAT.to_string(),
        version: DOCUMENT_VERSION,
        num_vars: q.num_vars,
        offset: q.offset,
        linear: q
            .linear
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0.0)
            .map(|(r, &c)| (r, c))
            .collect(),
        quadratic: q.quadratic.iter().map(|(&(r, s), &c)| (r, s, c)).collect(),
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("QUBO document serializes");
    text.push('\n');
    text
}

pub fn import_qubo(text: &str) -> Result<Qubo> {
    let doc: QuboDocument =
        serde_json::from_str(text).map_err(|e| Error::parse("document", e.to_string()))?;
    if doc.format != DOCUMENT_FORMAT {
        return Err(Error::parse(
            "format",
            format!("expected \"{DOCUMENT_FORMAT}\", got \"{}\"", doc.format),
        ));
    }
    if doc.version != DOCUMENT_VERSION {
        return Err(Error::parse(
            "version",
            format!("unknown version {}", doc.version),
        ));
    }
    let n = doc.num_vars;
    if n == 0 {
        return Err(Error::parse("num_vars", "must be positive"));
    }
    if !doc.offset.is_finite() {
        return Err(Error::parse("offset", "not finite"));
    }

    let mut linear = vec![0.0; n];
    let mut seen = vec![false; n];
    for (k, &(r, c)) in doc.linear.iter().enumerate() {
        let field = format!("linear[{k}]");
        if r >= n {
            return Err(Error::parse(
                field,
                format!("index out of range: {r} >= num_vars {n}"),
            ));
        }
        if std::mem::replace(&mut seen[r], true) {
            return Err(Error::parse(field, format!("duplicate key {r}")));
        }
        if !c.is_finite() {
            return Err(Error::parse(field, "coefficient not finite"));
        }
        linear[r] = c;
    }

    let mut quadratic = BTreeMap::new();
    for (k, &(r, s, c)) in doc.quadratic.iter().enumerate() {
        let field = format!("quadratic[{k}]");
        if r >= s {
            return Err(Error::parse(
                field,
                format!("unordered pair ({r}, {s}); need i < j"),
            ));
        }
        if s >= n {
            return Err(Error::parse(
                field,
                format!("index out of range: {s} >= num_vars {n}"),
            ));
        }
        if !c.is_finite() {
            return Err(Error::parse(field, "coefficient not finite"));
        }
        if quadratic.insert((r, s), c).is_some() {
            return Err(Error::parse(field, format!("duplicate key ({r}, {s})")));
        }
    }

    Ok(Qubo {
        num_vars: n,
        offset: doc.offset,
        linear,
        quadratic,
    })
}
