//! Slow, literal reference implementations.
//!
//! Nothing here touches the caches, kernels, accumulators or enumeration
//! order of the fast paths: weights and terms come from the closed-form
//! family definitions, every cell is a fresh loop, and all sums are plain
//! left-to-right additions. Each call declares an [`OracleBudget`].

use crate::matrixclass::InfMatrix;
use crate::seqcore::{SeriesView, WeightSeq};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleBudget {
    pub max_cells: u64,
    pub max_subsets: u64,
    pub max_terms: u64,
}

impl Default for OracleBudget {
    fn default() -> Self {
        Self { max_cells: 4_000_000, max_subsets: 1 << 20, max_terms: 1_000_000 }
    }
}

impl OracleBudget {
    fn cells(&self, n: u64) -> Result<()> {
        if n > self.max_cells {
            return Err(Error::OracleBudget(format!("{n} cells requested, budget {}", self.max_cells)));
        }
        Ok(())
    }

    fn terms(&self, n: u64) -> Result<()> {
        if n > self.max_terms {
            return Err(Error::OracleBudget(format!("{n} terms requested, budget {}", self.max_terms)));
        }
        Ok(())
    }
}

fn power(x: f64, k: f64) -> f64 {
    x.abs().powf(k)
}

fn weight(p: &WeightSeq, v: usize) -> Result<f64> {
    p.kind().weight_at(v)
}

/// `P_i = p_0 + … + p_i`, recomputed by a fresh loop.
fn cumulative(p: &WeightSeq, i: usize) -> Result<f64> {
    let mut s = 0.0;
    for v in 0..=i {
        s += weight(p, v)?;
    }
    Ok(s)
}

/// Literal `F_{m,n}(a) = p_m/(P_m P_{m-1}) Σ_{v=1}^{m} P_{v-1} a_{n+v}`, `F_{0,n} = a_n`.
pub fn naive_f(a: &SeriesView, p: &WeightSeq, m: usize, n: usize, budget: &OracleBudget) -> Result<f64> {
    let mm = m as u64;
    budget.terms(mm * (mm + 1) / 2 + 2 * mm + 2)?;
    let term = |v: usize| a.kind().term_at(v);
    if m == 0 {
        return Ok(term(n));
    }
    let mut inner = 0.0;
    for v in 1..=m {
        inner += cumulative(p, v - 1)? * term(n + v);
    }
    Ok(weight(p, m)? / (cumulative(p, m)? * cumulative(p, m - 1)?) * inner)
}

/// Literal `T_{m,n}(s) = (1/P_m) Σ_{v=0}^{m} p_v s_{n+v}` with `s` summed afresh.
pub fn naive_t(a: &SeriesView, p: &WeightSeq, m: usize, n: usize, budget: &OracleBudget) -> Result<f64> {
    budget.terms(((m + 1) * (n + m + 2)) as u64)?;
    let mut acc = 0.0;
    for v in 0..=m {
        let mut s = 0.0;
        for i in 0..=n + v {
            s += a.kind().term_at(i);
        }
        acc += weight(p, v)? * s;
    }
    Ok(acc / cumulative(p, m)?)
}

/// Literal `b(m,n,j)`.
pub fn naive_b(a: &InfMatrix, p: &WeightSeq, m: usize, n: usize, j: usize, budget: &OracleBudget) -> Result<f64> {
    let mm = m as u64;
    budget.terms(mm * (mm + 1) / 2 + 2 * mm + 2)?;
    if m == 0 {
        return Ok(a.entry(n, j));
    }
    let mut inner = 0.0;
    for v in 1..=m {
        inner += cumulative(p, v - 1)? * a.entry(n + v, j);
    }
    Ok(weight(p, m)? / (cumulative(p, m)? * cumulative(p, m - 1)?) * inner)
}

/// Prefix of `P` computed once for the table oracles below; still a plain
/// left-to-right sum.
fn cumulative_prefix(p: &WeightSeq, len: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut w = Vec::with_capacity(len);
    let mut cum = Vec::with_capacity(len);
    let mut s = 0.0;
    for v in 0..len {
        let x = weight(p, v)?;
        s += x;
        w.push(x);
        cum.push(s);
    }
    Ok((w, cum))
}

fn cell(w: &[f64], cum: &[f64], m: usize, entry: impl Fn(usize) -> f64) -> f64 {
    if m == 0 {
        return entry(0);
    }
    let mut inner = 0.0;
    for v in 1..=m {
        inner += cum[v - 1] * entry(v);
    }
    w[m] / (cum[m] * cum[m - 1]) * inner
}

fn u_power(u: &WeightSeq, m: usize, k: f64) -> Result<f64> {
    Ok(weight(u, m)?.powf(k - 1.0))
}

/// Per-shift `Σ_{m=0}^{m_max} u_m^{k-1}|F_{m,n}|^k` for `n <= n_max`, by a
/// triple loop.
pub fn naive_norm_totals(
    a: &SeriesView,
    p: &WeightSeq,
    u: &WeightSeq,
    k: f64,
    m_max: usize,
    n_max: usize,
    budget: &OracleBudget,
) -> Result<Vec<f64>> {
    budget.cells((m_max as u64 + 1) * (n_max as u64 + 1) * (m_max as u64 + 1))?;
    let (w, cum) = cumulative_prefix(p, m_max + 1)?;
    let mut out = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let mut total = 0.0;
        for m in 0..=m_max {
            let f = cell(&w, &cum, m, |v| a.kind().term_at(n + v));
            total += u_power(u, m, k)? * power(f, k);
        }
        out.push(total);
    }
    Ok(out)
}

/// `sup_n (Σ_m u_m^{k-1}|F_{m,n}|^k)^{1/k}`.
pub fn naive_norm(
    a: &SeriesView,
    p: &WeightSeq,
    u: &WeightSeq,
    k: f64,
    m_max: usize,
    n_max: usize,
    budget: &OracleBudget,
) -> Result<f64> {
    let totals = naive_norm_totals(a, p, u, k, m_max, n_max, budget)?;
    let mut sup = 0.0f64;
    for t in totals {
        if t > sup {
            sup = t;
        }
    }
    Ok(sup.powf(1.0 / k))
}

/// `Σ_{m=0}^{m_max} u_m^{k-1}|b(m,n,j)|^k`.
#[allow(clippy::too_many_arguments)]
pub fn naive_column_total(
    a: &InfMatrix,
    p: &WeightSeq,
    u: &WeightSeq,
    k: f64,
    m_max: usize,
    n: usize,
    j: usize,
    budget: &OracleBudget,
) -> Result<f64> {
    budget.cells((m_max as u64 + 1) * (m_max as u64 + 1))?;
    let (w, cum) = cumulative_prefix(p, m_max + 1)?;
    let mut total = 0.0;
    for m in 0..=m_max {
        total += u_power(u, m, k)? * power(cell(&w, &cum, m, |v| a.entry(n + v, j)), k);
    }
    Ok(total)
}

/// `Σ_{m=0}^{m_max} u_m^{k-1} (Σ_{j<j_end} |b(m,n,j)|)^k` and
/// `Σ_{m=0}^{m_max} u_m^{k-1} |Σ_{j<j_end} b(m,n,j)|^k`.
#[allow(clippy::too_many_arguments)]
pub fn naive_row_totals(
    a: &InfMatrix,
    p: &WeightSeq,
    u: &WeightSeq,
    k: f64,
    m_max: usize,
    n: usize,
    j_end: usize,
    budget: &OracleBudget,
) -> Result<(f64, f64)> {
    budget.cells((m_max as u64 + 1) * (m_max as u64 + 1) * j_end as u64)?;
    let (w, cum) = cumulative_prefix(p, m_max + 1)?;
    let (mut abs_total, mut signed_total) = (0.0, 0.0);
    for m in 0..=m_max {
        let (mut abs_row, mut row) = (0.0, 0.0);
        for j in 0..j_end {
            let b = cell(&w, &cum, m, |v| a.entry(n + v, j));
            abs_row += b.abs();
            row += b;
        }
        let up = u_power(u, m, k)?;
        abs_total += up * power(abs_row, k);
        signed_total += up * power(row, k);
    }
    Ok((abs_total, signed_total))
}

/// `max` over all row subsets `N` of `Σ_v |Σ_{n∈N} a_{nv}|^{p_v}`, each subset
/// summed from scratch.
pub fn enumerate_l(
    rows: usize,
    cols: usize,
    data: &[f64],
    exponents: &[f64],
    budget: &OracleBudget,
) -> Result<f64> {
    if rows >= 64 || (1u64 << rows) > budget.max_subsets {
        return Err(Error::OracleBudget(format!("{rows} rows exceed the subset budget {}", budget.max_subsets)));
    }
    let mut best = 0.0f64;
    for mask in 0..1u64 << rows {
        let mut value = 0.0;
        for v in 0..cols {
            let mut s = 0.0;
            for n in 0..rows {
                if mask & (1 << n) != 0 {
                    s += data[n * cols + v];
                }
            }
            value += power(s, exponents[v]);
        }
        if value > best {
            best = value;
        }
    }
    Ok(best)
}

/// `Σ_v (Σ_n |a_{nv}|)^{p_v}`.
pub fn naive_u(rows: usize, cols: usize, data: &[f64], exponents: &[f64]) -> f64 {
    let mut total = 0.0;
    for v in 0..cols {
        let mut s = 0.0;
        for n in 0..rows {
            s += data[n * cols + v].abs();
        }
        total += power(s, exponents[v]);
    }
    total
}

/// `Σ_{v=0}^{len-1} a_{nv} x_v`.
pub fn naive_dot(a: &InfMatrix, x: &[f64], n: usize) -> f64 {
    let mut s = 0.0;
    for (v, xv) in x.iter().enumerate() {
        s += a.entry(n, v) * xv;
    }
    s
}
