//! The column-sum power functional
//!
//! ```text
//! U_p(A) = Σ_v (Σ_n |a_{nv}|)^{p_v}
//! ```
//!
//! and its row-subset counterpart `L_p(A) = max_N Σ_v |Σ_{n∈N} a_{nv}|^{p_v}`,
//! with the sandwich `U_p/(4C²) <= L_p <= U_p`, `C = max(1, 2^{H-1})`,
//! `H = sup_v p_v`.
//!
//! `L_p` is found by exhaustive enumeration. Subsets are visited in Gray
//! code order inside fixed chunks, so each step adds or removes one row;
//! every chunk starts from freshly computed column sums and the winning
//! subset is re-evaluated from scratch at the end.

use serde::{Deserialize, Serialize};

use crate::par;
use crate::summability::abs_pow;
use crate::{Error, Result};

/// Largest number of rows accepted by [`lower`].
pub const ENUMERATION_CAP: usize = 20;
/// Subsets per Gray-code chunk.
const CHUNK: u64 = 1024;
/// Relative slack for rounding in [`sandwich`].
pub const SANDWICH_SLACK: f64 = 1e-12;

/// Exponents `p_v` together with `H` and `C`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exponents {
    pub values: Vec<f64>,
    pub h: f64,
    pub c: f64,
}

impl Exponents {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::InvalidParameter(format!("exponent {v} must be positive and finite")));
        }
        let h = values.iter().copied().fold(0.0, f64::max);
        let c = 1.0f64.max((h - 1.0).exp2());
        Ok(Self { values, h, c })
    }

    /// `p_v = value` for `v < cols`.
    pub fn constant(value: f64, cols: usize) -> Result<Self> {
        Self::new(vec![value; cols])
    }
}

/// A finite row-major block of a matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixBlock {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl MatrixBlock {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        let b = Self { rows, cols, data };
        b.validate()?;
        Ok(b)
    }

    pub fn identity(size: usize) -> Self {
        let mut data = vec![0.0; size * size];
        for i in 0..size {
            data[i * size + i] = 1.0;
        }
        Self { rows: size, cols: size, data }
    }

    pub fn validate(&self) -> Result<()> {
        if self.data.len() != self.rows * self.cols {
            return Err(Error::InvalidParameter(format!(
                "block declares {}x{} but carries {} entries",
                self.rows,
                self.cols,
                self.data.len()
            )));
        }
        if self.data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("block entries must be finite".into()));
        }
        Ok(())
    }

    pub fn get(&self, n: usize, v: usize) -> f64 {
        self.data[n * self.cols + v]
    }

    pub fn row(&self, n: usize) -> &[f64] {
        &self.data[n * self.cols..(n + 1) * self.cols]
    }

    pub fn is_nonnegative(&self) -> bool {
        self.data.iter().all(|v| *v >= 0.0)
    }
}

fn check_shape(block: &MatrixBlock, exps: &Exponents) -> Result<()> {
    block.validate()?;
    if exps.values.len() < block.cols {
        return Err(Error::InvalidParameter(format!(
            "{} exponents given for {} columns",
            exps.values.len(),
            block.cols
        )));
    }
    Ok(())
}

/// `Σ_v (Σ_n |a_{nv}|)^{p_v}`, with plain in-order sums.
pub fn upper(block: &MatrixBlock, exps: &Exponents) -> Result<f64> {
    check_shape(block, exps)?;
    let mut total = 0.0;
    for v in 0..block.cols {
        let mut col = 0.0;
        for n in 0..block.rows {
            col += block.get(n, v).abs();
        }
        total += abs_pow(col, exps.values[v]);
    }
    Ok(total)
}

/// `Σ_v |Σ_{n∈N} a_{nv}|^{p_v}` for the rows in `mask`, summed from scratch in
/// row order.
pub fn subset_value(block: &MatrixBlock, exps: &Exponents, mask: u64) -> f64 {
    let mut total = 0.0;
    for v in 0..block.cols {
        let mut col = 0.0;
        for n in 0..block.rows {
            if mask >> n & 1 == 1 {
                col += block.get(n, v);
            }
        }
        total += abs_pow(col, exps.values[v]);
    }
    total
}

fn objective(sums: &[f64], exps: &[f64]) -> f64 {
    sums.iter().zip(exps).map(|(s, p)| abs_pow(*s, *p)).sum()
}

/// Best subset in Gray-code positions `[start, end)`.
fn scan_chunk(block: &MatrixBlock, exps: &Exponents, start: u64, end: u64) -> (f64, u64) {
    let gray = |i: u64| i ^ (i >> 1);
    let mut mask = gray(start);
    let mut sums = vec![0.0; block.cols];
    for n in 0..block.rows {
        if mask >> n & 1 == 1 {
            for (s, a) in sums.iter_mut().zip(block.row(n)) {
                *s += a;
            }
        }
    }
    let p = &exps.values[..block.cols];
    let mut best = (objective(&sums, p), mask);
    for i in start + 1..end {
        let bit = i.trailing_zeros() as usize;
        let adding = mask >> bit & 1 == 0;
        mask ^= 1 << bit;
        for (s, a) in sums.iter_mut().zip(block.row(bit)) {
            if adding {
                *s += a;
            } else {
                *s -= a;
            }
        }
        let val = objective(&sums, p);
        if val > best.0 {
            best = (val, mask);
        }
    }
    best
}

/// Result of [`lower_with_witness`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LowerValue {
    pub value: f64,
    /// Rows of the maximising subset as a bit mask.
    pub subset: u64,
}

/// `L_p` over the block's rows by exhaustive enumeration.
pub fn lower(block: &MatrixBlock, exps: &Exponents) -> Result<f64> {
    lower_with_witness(block, exps).map(|l| l.value)
}

pub fn lower_with_witness(block: &MatrixBlock, exps: &Exponents) -> Result<LowerValue> {
    check_shape(block, exps)?;
    if block.rows > ENUMERATION_CAP {
        return Err(Error::EnumerationCap { rows: block.rows, cap: ENUMERATION_CAP });
    }
    let total = 1u64 << block.rows;
    let chunks = total.div_ceil(CHUNK);
    let bests = par::map_range(0..chunks as usize, |c| {
        let start = c as u64 * CHUNK;
        scan_chunk(block, exps, start, (start + CHUNK).min(total))
    });
    // first strict maximum in chunk order, so the result does not depend on scheduling
    let (_, mask) = bests.iter().copied().fold((f64::NEG_INFINITY, 0), |b, c| if c.0 > b.0 { c } else { b });
    let full = total - 1;
    let (a, b) = (subset_value(block, exps, mask), subset_value(block, exps, full));
    Ok(if b >= a { LowerValue { value: b, subset: full } } else { LowerValue { value: a, subset: mask } })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SandwichReport {
    pub upper: f64,
    pub lower: f64,
    /// `U_p/(4C²)`.
    pub lower_bound: f64,
    pub h: f64,
    pub c: f64,
    pub subset: u64,
    pub holds: bool,
}

pub fn sandwich(block: &MatrixBlock, exps: &Exponents) -> Result<SandwichReport> {
    let u = upper(block, exps)?;
    let l = lower_with_witness(block, exps)?;
    let lower_bound = u / (4.0 * exps.c * exps.c);
    let slack = SANDWICH_SLACK * u;
    let holds = lower_bound <= l.value + slack && l.value <= u + slack;
    Ok(SandwichReport { upper: u, lower: l.value, lower_bound, h: exps.h, c: exps.c, subset: l.subset, holds })
}
