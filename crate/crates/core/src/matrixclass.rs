//! Infinite matrices, the coefficients `b(m,n,j)` and the class checks for
//! `(ℓ₁, |f(N̄_p)|_k)` and `(c, |f(N̄_p)|_k)`.
//!
//! `b(m,n,j)` is the difference kernel applied down column `j` of `A`, so
//! every check below reuses [`Kernel`] and the verdict engine of
//! [`crate::verdict`]. For a column `j`, the per-column tail evidence is
//! literally the membership evidence of the series `A(e^j)`; the row-sum
//! condition is the membership evidence of `A(e)`.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::compensated::Neumaier;
use crate::par;
use crate::seqcore::{SeriesView, TruncWindow, WeightSeq};
use crate::summability::{abs_pow, tail_evidence, MethodParams};
use crate::transform::{kernel_cell, kernel_column, kernel_column_segment, Kernel, PsiKernel, WeightedKernel};
use crate::verdict::{self, Verdict, SCALES};
use crate::{Error, Result};

/// Cell budget for the `(m, n, j)` loops of the class checks.
pub const MATRIX_CELL_BUDGET: u128 = 400_000_000;

/// Diagonal entries `d_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum DiagonalSpec {
    /// `d_j = first · ratio^j`.
    Geometric { first: f64, ratio: f64 },
    /// Listed entries, zero past the end.
    Explicit { values: Vec<f64> },
}

impl DiagonalSpec {
    fn at(&self, j: usize) -> f64 {
        match self {
            DiagonalSpec::Geometric { first, ratio } => first * ratio.powi(j.min(i32::MAX as usize) as i32),
            DiagonalSpec::Explicit { values } => values.get(j).copied().unwrap_or(0.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "structure", rename_all = "snake_case", deny_unknown_fields)]
pub enum MatrixKind {
    Zero,
    Identity,
    Diagonal { diag: DiagonalSpec },
    /// `a_{nj} = 1/(n+1)` for `j <= n`.
    CesaroC1,
    /// `a_{nj} = value · decay^{|n-j|}` for `|n-j| <= width`.
    Banded { width: usize, value: f64, decay: f64 },
    /// Row-major `rows × cols` block; entries outside are 0.
    Dense { rows: usize, cols: usize, data: Vec<f64> },
    /// `a_{nj} = value` everywhere.
    Constant { value: f64 },
    /// `a_{nj} = intercept + slope · n` everywhere.
    RowLinear { slope: f64, intercept: f64 },
}

/// An infinite matrix `A = (a_{nj})` with deterministic entry access.
#[derive(Debug, Clone, PartialEq)]
pub struct InfMatrix {
    kind: MatrixKind,
}

fn finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("matrix parameter {name} must be finite")))
    }
}

impl InfMatrix {
    pub fn new(kind: MatrixKind) -> Result<Self> {
        match &kind {
            MatrixKind::Diagonal { diag: DiagonalSpec::Geometric { first, ratio } } => {
                finite("first", *first)?;
                finite("ratio", *ratio)?;
            }
            MatrixKind::Diagonal { diag: DiagonalSpec::Explicit { values } } => {
                values.iter().try_for_each(|v| finite("diag", *v))?;
            }
            MatrixKind::Banded { value, decay, .. } => {
                finite("value", *value)?;
                finite("decay", *decay)?;
            }
            MatrixKind::Dense { rows, cols, data } => {
                if data.len() != rows * cols {
                    return Err(Error::InvalidParameter(format!(
                        "dense matrix declares {rows}x{cols} but carries {} entries",
                        data.len()
                    )));
                }
                data.iter().try_for_each(|v| finite("data", *v))?;
            }
            MatrixKind::Constant { value } => finite("value", *value)?,
            MatrixKind::RowLinear { slope, intercept } => {
                finite("slope", *slope)?;
                finite("intercept", *intercept)?;
            }
            MatrixKind::Zero | MatrixKind::Identity | MatrixKind::CesaroC1 => {}
        }
        Ok(Self { kind })
    }

    pub fn dense(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        Self::new(MatrixKind::Dense { rows, cols, data })
    }

    pub fn kind(&self) -> &MatrixKind {
        &self.kind
    }

    /// `a_{nj}`.
    pub fn entry(&self, n: usize, j: usize) -> f64 {
        match &self.kind {
            MatrixKind::Zero => 0.0,
            MatrixKind::Identity => {
                if n == j {
                    1.0
                } else {
                    0.0
                }
            }
            MatrixKind::Diagonal { diag } => {
                if n == j {
                    diag.at(j)
                } else {
                    0.0
                }
            }
            MatrixKind::CesaroC1 => {
                if j <= n {
                    1.0 / (n as f64 + 1.0)
                } else {
                    0.0
                }
            }
            MatrixKind::Banded { width, value, decay } => {
                let d = n.abs_diff(j);
                if d <= *width {
                    value * decay.powi(d as i32)
                } else {
                    0.0
                }
            }
            MatrixKind::Dense { rows, cols, data } => {
                if n < *rows && j < *cols {
                    data[n * cols + j]
                } else {
                    0.0
                }
            }
            MatrixKind::Constant { value } => *value,
            MatrixKind::RowLinear { slope, intercept } => intercept + slope * n as f64,
        }
    }

    /// Columns that may hold non-zero entries in row `n`; `None` when the
    /// row is not finitely supported.
    pub fn row_support(&self, n: usize) -> Option<Range<usize>> {
        match &self.kind {
            MatrixKind::Zero => Some(0..0),
            MatrixKind::Identity | MatrixKind::Diagonal { .. } => Some(n..n + 1),
            MatrixKind::CesaroC1 => Some(0..n + 1),
            MatrixKind::Banded { width, .. } => Some(n.saturating_sub(*width)..n + width + 1),
            MatrixKind::Dense { rows, cols, .. } => Some(if n < *rows { 0..*cols } else { 0..0 }),
            MatrixKind::Constant { .. } | MatrixKind::RowLinear { .. } => None,
        }
    }

    /// End of the column range touched by rows `0..=max_row`, or `None` when
    /// some row has infinite support.
    pub fn column_extent(&self, max_row: usize) -> Option<usize> {
        match &self.kind {
            MatrixKind::Zero => Some(0),
            MatrixKind::Identity | MatrixKind::Diagonal { .. } | MatrixKind::CesaroC1 => Some(max_row + 1),
            MatrixKind::Banded { width, .. } => Some(max_row + width + 1),
            MatrixKind::Dense { rows, cols, .. } => Some(if *rows > 0 { *cols } else { 0 }),
            MatrixKind::Constant { .. } | MatrixKind::RowLinear { .. } => None,
        }
    }

    /// `a_{0j}, …, a_{len-1,j}`.
    pub fn column(&self, j: usize, len: usize) -> Vec<f64> {
        (0..len).map(|n| self.entry(n, j)).collect()
    }

    /// Rows below `len` that may hold non-zero entries in column `j`.
    pub fn column_support(&self, j: usize, len: usize) -> Range<usize> {
        let r = match &self.kind {
            MatrixKind::Zero => 0..0,
            MatrixKind::Identity | MatrixKind::Diagonal { .. } => j..j + 1,
            MatrixKind::CesaroC1 => j..len,
            MatrixKind::Banded { width, .. } => j.saturating_sub(*width)..j + width + 1,
            MatrixKind::Dense { rows, cols, .. } => {
                if j < *cols {
                    0..*rows
                } else {
                    0..0
                }
            }
            MatrixKind::Constant { .. } | MatrixKind::RowLinear { .. } => 0..len,
        };
        r.start.min(len)..r.end.min(len)
    }
}

/// `A_n(x) = Σ_{v=0}^{j_max} a_{nv} x_v`. Exact when `x` or row `n` is
/// supported within `0..=j_max`; otherwise the truncation must be waived
/// explicitly.
pub fn apply_matrix(a: &InfMatrix, x: &SeriesView, n: usize, j_max: usize, waiver: bool) -> Result<f64> {
    let x_inside = x.support_len().is_some_and(|len| len <= j_max + 1);
    let row_inside = a.row_support(n).is_some_and(|r| r.is_empty() || r.end <= j_max + 1);
    if !(x_inside || row_inside || waiver) {
        return Err(Error::NotFinitelySupported { j_max });
    }
    let cols = match a.row_support(n) {
        Some(r) => r.start..r.end.min(j_max + 1),
        None => 0..j_max + 1,
    };
    Ok(cols.map(|v| a.entry(n, v) * x.term(v)).collect::<Neumaier>().value())
}

/// Column bound used for row `n`: the exact row support when it is finite,
/// `j_max` otherwise.
fn row_bound(a: &InfMatrix, n: usize, j_max: usize) -> Option<usize> {
    match a.row_support(n) {
        Some(r) if r.is_empty() => None,
        Some(r) => Some(r.end - 1),
        None => Some(j_max),
    }
}

/// `A_0(x), …, A_{len-1}(x)`, exact on finitely supported rows and
/// truncated at `j_max` elsewhere.
pub fn image_terms(a: &InfMatrix, x: &SeriesView, len: usize, j_max: usize, waiver: bool) -> Result<Vec<f64>> {
    (0..len)
        .map(|n| match row_bound(a, n, j_max) {
            None => Ok(0.0),
            Some(b) => apply_matrix(a, x, n, b, waiver),
        })
        .collect()
}

/// `A(x)` as a series, see [`image_terms`].
pub fn image_series(a: &InfMatrix, x: &SeriesView, len: usize, j_max: usize, waiver: bool) -> Result<SeriesView> {
    SeriesView::explicit(image_terms(a, x, len, j_max, waiver)?)
}

/// Row sums `Σ_j a_{nj}` for `n < len` (the image of `e = (1, 1, …)`),
/// truncated at `j_max` only on rows without finite support.
pub fn row_sums(a: &InfMatrix, len: usize, j_max: usize) -> Vec<f64> {
    (0..len)
        .map(|n| match row_bound(a, n, j_max) {
            None => 0.0,
            Some(b) => {
                let start = a.row_support(n).map_or(0, |r| r.start);
                (start..=b).map(|v| a.entry(n, v)).collect::<Neumaier>().value()
            }
        })
        .collect()
}

/// `b(m,n,j)`.
pub fn b_coeff(a: &InfMatrix, p: &WeightSeq, m: usize, n: usize, j: usize) -> Result<f64> {
    let kernel = WeightedKernel::new(p, m)?;
    Ok(kernel_cell(&kernel, &a.column(j, n + m + 1), m, n))
}

/// `b(m,n,j)` under unit weights, `(1/(m(m+1))) Σ v a_{n+v,j}`.
pub fn b_coeff_psi(a: &InfMatrix, m: usize, n: usize, j: usize) -> f64 {
    kernel_cell(&PsiKernel, &a.column(j, n + m + 1), m, n)
}

/// `b(m,n,j)` over `m <= m_max`, `n <= n_max`, `j <= j_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct BTable {
    values: Vec<f64>,
    window: TruncWindow,
    p: WeightSeq,
}

impl BTable {
    pub fn get(&self, m: usize, n: usize, j: usize) -> Option<f64> {
        let w = &self.window;
        (m <= w.m_max && n <= w.n_max && j <= w.j_max)
            .then(|| self.values[(j * (w.n_max + 1) + n) * (w.m_max + 1) + m])
    }

    pub fn window(&self) -> &TruncWindow {
        &self.window
    }

    pub fn weights(&self) -> &WeightSeq {
        &self.p
    }
}

fn check_budget(cells: u128) -> Result<()> {
    if cells > MATRIX_CELL_BUDGET {
        Err(Error::CellBudgetExceeded { cells, budget: MATRIX_CELL_BUDGET })
    } else {
        Ok(())
    }
}

fn cells3(m: usize, n: usize, j: usize) -> u128 {
    (m as u128 + 1) * (n as u128 + 1) * (j as u128 + 1)
}

pub fn fill_btable(a: &InfMatrix, p: &WeightSeq, window: &TruncWindow) -> Result<BTable> {
    window.validate()?;
    let (m_max, n_max, j_max) = (window.m_max, window.n_max, window.j_max);
    check_budget(cells3(m_max, n_max, j_max))?;
    let kernel = WeightedKernel::new(p, m_max)?;
    let rows = m_max + n_max + 1;
    let per_j = par::map_range(0..j_max + 1, |j| {
        let col = a.column(j, rows);
        let mut out = Vec::with_capacity((n_max + 1) * (m_max + 1));
        for n in 0..=n_max {
            out.extend(kernel_column(&kernel, &col, n, m_max));
        }
        out
    });
    Ok(BTable { values: per_j.concat(), window: *window, p: p.clone() })
}

/// Which characterising condition a report covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionId {
    /// `Σ_m u^{k-1}|b(m,n,j)|^k` has uniformly small tails in `n`, per column.
    ColumnTails,
    /// `sup_{n,j} Σ_m u^{k-1}|b(m,n,j)|^k < ∞`.
    ColumnSup,
    /// `sup_n Σ_m u^{k-1}(Σ_j |b(m,n,j)|)^k < ∞`.
    RowAbsSup,
    /// `Σ_m u^{k-1}|Σ_j b(m,n,j)|^k` has uniformly small tails in `n`.
    RowSumTails,
}

/// Per-column summary inside a [`ConditionId::ColumnTails`] report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnVerdict {
    pub j: usize,
    pub verdict: Verdict,
    pub scale_sups: [f64; 3],
    pub growth: [f64; 2],
    pub pass_cut: Option<usize>,
    pub decay_ratios: Vec<f64>,
    pub witness_n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub n: usize,
    pub j: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub id: ConditionId,
    pub verdict: Verdict,
    /// Sup of the sampled totals on the base, doubled and quadrupled windows.
    pub scale_sups: [f64; 3],
    pub growth: [f64; 2],
    /// Cut grid and uniform tails on it (tail conditions only).
    pub grid: Vec<usize>,
    pub sup_tails: Vec<f64>,
    pub witness: Witness,
    /// Share of the last tenth of the columns in the truncated inner
    /// `j`-sums; 0 when the rows are finitely supported.
    pub j_tail_fraction: f64,
    /// Base-window totals `Σ_{m<=m_max}`: indexed `[j][n]` for column
    /// conditions and `[0][n]` for row conditions.
    pub totals: Vec<Vec<f64>>,
    pub columns: Vec<ColumnVerdict>,
}

/// Verdicts of a class characterisation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassReport {
    pub verdict: Verdict,
    pub conditions: Vec<ConditionReport>,
}

struct Setup<'a, K> {
    kernel: &'a K,
    u_pow: &'a [f64],
    k: f64,
    window: TruncWindow,
}

/// Column summaries for `j < j_count`, `n <= 4·n_max`, rows up to `4·m_max`.
fn column_summaries<K: Kernel>(a: &InfMatrix, s: &Setup<K>, j_count: usize) -> Result<Vec<Vec<verdict::ColumnSummary>>> {
    let big = s.window.scaled(SCALES[2]);
    check_budget(cells3(big.m_max, big.n_max, j_count.saturating_sub(1)))?;
    let grid = verdict::cut_grid(s.window.m_max);
    let rows = big.m_max + big.n_max + 1;
    Ok(par::map_range(0..j_count, |j| {
        let col = a.column(j, rows);
        (0..=big.n_max)
            .map(|n| {
                let t = kernel_column(s.kernel, &col, n, big.m_max).zip(s.u_pow).map(|(b, w)| w * abs_pow(b, s.k));
                verdict::summarize_column(t, &grid, s.window.m_max)
            })
            .collect()
    }))
}

fn column_tails_report(cols: &[Vec<verdict::ColumnSummary>], window: &TruncWindow) -> ConditionReport {
    let grid = verdict::cut_grid(window.m_max);
    let evidence: Vec<_> = cols[..=window.j_max]
        .iter()
        .map(|c| verdict::assess(c, &grid, window.n_max, window.abs_tol))
        .collect();
    let mut verdict = Verdict::PassAtScale;
    let mut scale_sups = [0.0f64; 3];
    let mut sup_tails = vec![0.0f64; grid.len()];
    let mut witness = Witness { n: 0, j: Some(0) };
    let mut best = f64::NEG_INFINITY;
    let mut columns = Vec::with_capacity(evidence.len());
    for (j, e) in evidence.iter().enumerate() {
        verdict = verdict.and(e.verdict);
        for (acc, v) in scale_sups.iter_mut().zip(e.scale_sups) {
            *acc = if acc.is_nan() || v.is_nan() { f64::NAN } else { acc.max(v) };
        }
        for (acc, v) in sup_tails.iter_mut().zip(&e.sup_tails) {
            *acc = acc.max(*v);
        }
        if e.scale_sups[0] > best {
            best = e.scale_sups[0];
            witness = Witness { n: e.witness_n, j: Some(j) };
        }
        columns.push(ColumnVerdict {
            j,
            verdict: e.verdict,
            scale_sups: e.scale_sups,
            growth: e.growth,
            pass_cut: e.pass_cut,
            decay_ratios: e.decay_ratios.clone(),
            witness_n: e.witness_n,
        });
    }
    ConditionReport {
        id: ConditionId::ColumnTails,
        verdict,
        scale_sups,
        growth: verdict::growth(&scale_sups),
        grid,
        sup_tails,
        witness,
        j_tail_fraction: 0.0,
        totals: evidence.into_iter().map(|e| e.totals).collect(),
        columns,
    }
}

fn column_sup_report(cols: &[Vec<verdict::ColumnSummary>], window: &TruncWindow) -> ConditionReport {
    let mut scale_sups = [0.0f64; 3];
    let mut witness = Witness { n: 0, j: Some(0) };
    let mut best = f64::NEG_INFINITY;
    for (slot, s) in SCALES.iter().enumerate() {
        for col in &cols[..=(s * window.j_max).min(cols.len() - 1)] {
            for summary in &col[..=s * window.n_max] {
                let t = summary.totals[slot];
                scale_sups[slot] = if scale_sups[slot].is_nan() || t.is_nan() { f64::NAN } else { scale_sups[slot].max(t) };
            }
        }
    }
    let totals: Vec<Vec<f64>> =
        cols[..=window.j_max].iter().map(|c| c[..=window.n_max].iter().map(|s| s.totals[0]).collect()).collect();
    for (j, row) in totals.iter().enumerate() {
        for (n, t) in row.iter().enumerate() {
            if *t > best {
                best = *t;
                witness = Witness { n, j: Some(j) };
            }
        }
    }
    ConditionReport {
        id: ConditionId::ColumnSup,
        verdict: verdict::sup_verdict(&scale_sups),
        scale_sups,
        growth: verdict::growth(&scale_sups),
        grid: Vec::new(),
        sup_tails: Vec::new(),
        witness,
        j_tail_fraction: 0.0,
        totals,
        columns: Vec::new(),
    }
}

/// Columns of the last tenth of `0..=j_max`.
fn tail_columns(j_max: usize) -> Range<usize> {
    let width = ((j_max + 1) / 10).max(1);
    j_max + 1 - width..j_max + 1
}

fn root(v: f64, k: f64) -> f64 {
    if k == 1.0 {
        v
    } else {
        v.powf(1.0 / k)
    }
}

fn fraction(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else if den == 0.0 {
        f64::INFINITY
    } else {
        num / den
    }
}

fn row_abs_sup_impl<K: Kernel>(a: &InfMatrix, s: &Setup<K>) -> Result<ConditionReport> {
    let w = s.window;
    let big = w.scaled(SCALES[2]);
    let rows = big.m_max + big.n_max + 1;
    let extent = a.column_extent(rows - 1);
    let col_end: [usize; 3] = match extent {
        Some(e) => [e; 3],
        None => SCALES.map(|f| f * w.j_max + 1),
    };
    let tail = if extent.is_some() { 0..0 } else { tail_columns(w.j_max) };

    // stored non-zero segment of each column; rows past it leave the inner sum fixed
    let columns: Vec<(Vec<f64>, Option<(usize, usize)>)> = par::map_range(0..col_end[2], |j| {
        let support = a.column_support(j, rows);
        let seg: Vec<f64> = support.clone().map(|n| a.entry(n, j)).collect();
        match (seg.iter().position(|v| *v != 0.0), seg.iter().rposition(|v| *v != 0.0)) {
            (Some(f), Some(l)) => (seg[f..=l].to_vec(), Some((support.start + f, support.start + l))),
            _ => (Vec::new(), None),
        }
    });
    let active = |n: usize, nz: Option<(usize, usize)>| {
        nz.filter(|&(first, last)| last >= n && first <= n + big.m_max)
            .map(|(first, last)| (first.saturating_sub(n), (last - n).min(big.m_max)))
    };
    let cells: u128 = (0..=big.n_max)
        .map(|n| {
            let streamed: u128 = columns.iter().filter_map(|(_, nz)| active(n, *nz)).map(|(lo, hi)| (hi - lo + 1) as u128).sum();
            streamed + 3 * (big.m_max as u128 + 1)
        })
        .sum();
    check_budget(cells)?;

    // Per n: Σ_j |b(m,n,j)| is streamed over each column's active rows; past
    // them b(m,n,j) = row_coeff(m)·S_j, so |S_j| is collected in `settled`
    // at the first row where it applies.
    let per_n = par::map_range(0..big.n_max + 1, |n| {
        let mut acc = vec![Neumaier::new(); big.m_max + 1];
        let mut settled = vec![Neumaier::new(); big.m_max + 1];
        let mut tail_acc = vec![Neumaier::new(); w.m_max + 1];
        let mut tail_settled = vec![Neumaier::new(); w.m_max + 1];
        let snapshot = |acc: &[Neumaier], settled: &[Neumaier], upto: usize| {
            let mut running = Neumaier::new();
            (0..=upto)
                .map(|m| {
                    running.add(settled[m].value());
                    if m == 0 {
                        acc[0].value()
                    } else {
                        acc[m].value() + s.kernel.row_coeff(m).abs() * running.value()
                    }
                })
                .collect::<Vec<f64>>()
        };
        let mut snaps: [Vec<f64>; 3] = Default::default();
        let mut slot = 0;
        for (j, (col, nz)) in columns.iter().enumerate() {
            if let Some((lo, hi)) = active(n, *nz) {
                let in_tail = tail.contains(&j);
                let first = nz.expect("active columns have a segment").0;
                let mut it = kernel_column_segment(s.kernel, col, first, n, lo, hi);
                for m in lo..=hi {
                    let v = it.next().expect("row within column").abs();
                    acc[m].add(v);
                    if in_tail && m <= w.m_max {
                        tail_acc[m].add(v);
                    }
                }
                if hi < big.m_max {
                    let inner = it.inner_sum().abs();
                    settled[hi + 1].add(inner);
                    if in_tail && hi < w.m_max {
                        tail_settled[hi + 1].add(inner);
                    }
                }
            }
            while slot < 3 && j + 1 == col_end[slot] {
                snaps[slot] = snapshot(&acc, &settled, SCALES[slot] * w.m_max);
                slot += 1;
            }
        }
        while slot < 3 {
            snaps[slot] = snapshot(&acc, &settled, SCALES[slot] * w.m_max);
            slot += 1;
        }
        let weigh = |row: &[f64]| row.iter().zip(s.u_pow).map(|(r, u)| u * abs_pow(*r, s.k)).collect::<Neumaier>().value();
        let totals = [weigh(&snaps[0]), weigh(&snaps[1]), weigh(&snaps[2])];
        let tails = snapshot(&tail_acc, &tail_settled, w.m_max);
        (totals, weigh(&tails))
    });

    let mut scale_sups = [0.0f64; 3];
    for (slot, f) in SCALES.iter().enumerate() {
        for (totals, _) in &per_n[..=f * w.n_max] {
            let t = totals[slot];
            scale_sups[slot] = if scale_sups[slot].is_nan() || !t.is_finite() { f64::NAN } else { scale_sups[slot].max(t) };
        }
    }
    let base: Vec<f64> = per_n[..=w.n_max].iter().map(|(t, _)| t[0]).collect();
    let tail_sup = per_n[..=w.n_max].iter().map(|(_, t)| *t).fold(0.0, f64::max);
    let (witness_n, base_sup) =
        base.iter().copied().enumerate().fold((0, f64::NEG_INFINITY), |b, (n, t)| if t > b.1 { (n, t) } else { b });
    let j_tail_fraction = fraction(root(tail_sup, s.k), root(base_sup.max(0.0), s.k));
    let mut verdict = verdict::sup_verdict(&scale_sups);
    if verdict != Verdict::Fail && j_tail_fraction >= w.rel_tol {
        verdict = Verdict::Inconclusive;
    }
    Ok(ConditionReport {
        id: ConditionId::RowAbsSup,
        verdict,
        scale_sups,
        growth: verdict::growth(&scale_sups),
        grid: Vec::new(),
        sup_tails: Vec::new(),
        witness: Witness { n: witness_n, j: None },
        j_tail_fraction,
        totals: vec![base],
        columns: Vec::new(),
    })
}

fn row_sum_tails_impl<K: Kernel>(a: &InfMatrix, s: &Setup<K>) -> Result<ConditionReport> {
    let w = s.window;
    let big = w.scaled(SCALES[2]);
    let rows = big.m_max + big.n_max + 1;
    check_budget(cells3(big.m_max, big.n_max, 0))?;
    let sums = row_sums(a, rows, w.j_max);
    let e = tail_evidence(s.kernel, &sums, s.u_pow, s.k, &w);

    let j_tail_fraction = if a.column_extent(rows - 1).is_some() {
        0.0
    } else {
        let tail = tail_columns(w.j_max);
        let tail_sums: Vec<f64> =
            (0..rows).map(|n| tail.clone().map(|j| a.entry(n, j)).collect::<Neumaier>().value()).collect();
        let sup = |terms: &[f64]| {
            (0..=w.n_max)
                .map(|n| {
                    kernel_column(s.kernel, terms, n, w.m_max)
                        .zip(s.u_pow)
                        .map(|(f, u)| u * abs_pow(f, s.k))
                        .collect::<Neumaier>()
                        .value()
                })
                .fold(0.0, f64::max)
        };
        fraction(root(sup(&tail_sums), s.k), root(sup(&sums), s.k))
    };
    let mut verdict = e.verdict;
    if verdict != Verdict::Fail && j_tail_fraction >= w.rel_tol {
        verdict = Verdict::Inconclusive;
    }
    Ok(ConditionReport {
        id: ConditionId::RowSumTails,
        verdict,
        scale_sups: e.scale_sups,
        growth: e.growth,
        grid: e.grid,
        sup_tails: e.sup_tails,
        witness: Witness { n: e.witness_n, j: None },
        j_tail_fraction,
        totals: vec![e.totals],
        columns: Vec::new(),
    })
}

/// Owned kernel plus `u` powers for a method, or the `ψ` path.
enum Prepared {
    Weighted(WeightedKernel, Vec<f64>, f64),
    Psi(Vec<f64>, f64),
}

impl Prepared {
    fn weighted(mp: &MethodParams, window: &TruncWindow) -> Result<Self> {
        window.validate()?;
        let m = window.scaled(SCALES[2]).m_max;
        Ok(Prepared::Weighted(WeightedKernel::new(&mp.p, m)?, mp.u_powers(m + 1)?, mp.k))
    }

    fn psi(k: f64, window: &TruncWindow) -> Result<Self> {
        window.validate()?;
        MethodParams::unit(k)?;
        Ok(Prepared::Psi(vec![1.0; window.scaled(SCALES[2]).m_max + 1], k))
    }

    fn run<T>(&self, window: &TruncWindow, f: impl FnOnce(&dyn Dispatch) -> T) -> T {
        match self {
            Prepared::Weighted(kernel, u, k) => f(&Setup { kernel, u_pow: u, k: *k, window: *window }),
            Prepared::Psi(u, k) => f(&Setup { kernel: &PsiKernel, u_pow: u, k: *k, window: *window }),
        }
    }
}

/// Object-safe face of [`Setup`] so callers need not be generic.
trait Dispatch {
    fn columns(&self, a: &InfMatrix, j_count: usize) -> Result<Vec<Vec<verdict::ColumnSummary>>>;
    fn row_abs_sup(&self, a: &InfMatrix) -> Result<ConditionReport>;
    fn row_sum_tails(&self, a: &InfMatrix) -> Result<ConditionReport>;
    fn window(&self) -> &TruncWindow;
}

impl<K: Kernel> Dispatch for Setup<'_, K> {
    fn columns(&self, a: &InfMatrix, j_count: usize) -> Result<Vec<Vec<verdict::ColumnSummary>>> {
        column_summaries(a, self, j_count)
    }

    fn row_abs_sup(&self, a: &InfMatrix) -> Result<ConditionReport> {
        row_abs_sup_impl(a, self)
    }

    fn row_sum_tails(&self, a: &InfMatrix) -> Result<ConditionReport> {
        row_sum_tails_impl(a, self)
    }

    fn window(&self) -> &TruncWindow {
        &self.window
    }
}

fn l1_with(d: &dyn Dispatch, a: &InfMatrix) -> Result<ClassReport> {
    let w = *d.window();
    let cols = d.columns(a, SCALES[2] * w.j_max + 1)?;
    let conditions = vec![column_tails_report(&cols, &w), column_sup_report(&cols, &w)];
    Ok(ClassReport { verdict: conditions.iter().fold(Verdict::PassAtScale, |v, c| v.and(c.verdict)), conditions })
}

fn c_with(d: &dyn Dispatch, a: &InfMatrix) -> Result<ClassReport> {
    let w = *d.window();
    let tails = column_tails_report(&d.columns(a, w.j_max + 1)?, &w);
    let conditions = vec![d.row_abs_sup(a)?, d.row_sum_tails(a)?, tails];
    Ok(ClassReport { verdict: conditions.iter().fold(Verdict::PassAtScale, |v, c| v.and(c.verdict)), conditions })
}

/// Per-column tail condition; also the third condition of the `c` class.
pub fn check_column_tails(a: &InfMatrix, mp: &MethodParams, window: &TruncWindow) -> Result<ConditionReport> {
    Prepared::weighted(mp, window)?.run(window, |d| Ok(column_tails_report(&d.columns(a, window.j_max + 1)?, window)))
}

/// Sup over `(n, j)` of the column sums, with `m`, `n` and `j` enlarged together.
pub fn check_column_sup(a: &InfMatrix, mp: &MethodParams, window: &TruncWindow) -> Result<ConditionReport> {
    Prepared::weighted(mp, window)?
        .run(window, |d| Ok(column_sup_report(&d.columns(a, SCALES[2] * window.j_max + 1)?, window)))
}

pub fn check_row_abs_sup(a: &InfMatrix, mp: &MethodParams, window: &TruncWindow) -> Result<ConditionReport> {
    Prepared::weighted(mp, window)?.run(window, |d| d.row_abs_sup(a))
}

pub fn check_row_sum_tails(a: &InfMatrix, mp: &MethodParams, window: &TruncWindow) -> Result<ConditionReport> {
    Prepared::weighted(mp, window)?.run(window, |d| d.row_sum_tails(a))
}

/// `A ∈ (ℓ₁, |f(N̄_p)|_k)` at scale: column tails and column sup.
pub fn classify_l1(a: &InfMatrix, mp: &MethodParams, window: &TruncWindow) -> Result<ClassReport> {
    Prepared::weighted(mp, window)?.run(window, |d| l1_with(d, a))
}

/// `A ∈ (c, |f(N̄_p)|_k)` at scale: row abs sup, row-sum tails, column tails.
pub fn classify_c(a: &InfMatrix, mp: &MethodParams, window: &TruncWindow) -> Result<ClassReport> {
    Prepared::weighted(mp, window)?.run(window, |d| c_with(d, a))
}

/// [`classify_l1`] for `p = u = 1`, driven by the `ψ` kernel.
pub fn classify_l1_psi(a: &InfMatrix, k: f64, window: &TruncWindow) -> Result<ClassReport> {
    Prepared::psi(k, window)?.run(window, |d| l1_with(d, a))
}

/// [`classify_c`] for `p = u = 1`, driven by the `ψ` kernel.
pub fn classify_c_psi(a: &InfMatrix, k: f64, window: &TruncWindow) -> Result<ClassReport> {
    Prepared::psi(k, window)?.run(window, |d| c_with(d, a))
}

/// Both sides of `Σ_j b(m,n,j) x_j = F_{m,n}(A(x))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterchangeSample {
    pub lhs: f64,
    pub rhs: f64,
    /// Same expression with every entry replaced by its absolute value; the
    /// natural scale for rounding error.
    pub scale: f64,
}

impl InterchangeSample {
    pub fn rel_error(&self) -> f64 {
        let d = (self.lhs - self.rhs).abs();
        if d == 0.0 {
            0.0
        } else {
            d / self.scale
        }
    }
}

/// Evaluates both sides of the interchange identity for a finitely
/// supported `x` (given by its leading terms).
pub fn interchange(a: &InfMatrix, p: &WeightSeq, x: &[f64], m: usize, n: usize) -> Result<InterchangeSample> {
    let kernel = WeightedKernel::new(p, m)?;
    let rows = n + m + 1;
    let mut lhs = Neumaier::new();
    let mut scale = Neumaier::new();
    for (j, &xj) in x.iter().enumerate() {
        let col = a.column(j, rows);
        lhs.add(kernel_cell(&kernel, &col, m, n) * xj);
        let abs_col: Vec<f64> = col.iter().map(|v| v.abs()).collect();
        scale.add(kernel_cell(&kernel, &abs_col, m, n).abs() * xj.abs());
    }
    let image: Vec<f64> = (0..rows)
        .map(|r| x.iter().enumerate().map(|(j, xj)| a.entry(r, j) * xj).collect::<Neumaier>().value())
        .collect();
    let rhs = kernel_cell(&kernel, &image, m, n);
    Ok(InterchangeSample { lhs: lhs.value(), rhs, scale: scale.value() })
}

/// Both sides of the Minkowski tail bound
/// `(Σ_{m=l}^{m_max} u^{k-1}|F_{m,n}(A(x))|^k)^{1/k} <= Σ_j |x_j| R(l,n,j)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinkowskiSample {
    pub lhs: f64,
    pub rhs: f64,
}

pub fn minkowski_tail(
    a: &InfMatrix,
    mp: &MethodParams,
    x: &[f64],
    l: usize,
    n: usize,
    m_max: usize,
) -> Result<MinkowskiSample> {
    let kernel = WeightedKernel::new(&mp.p, m_max)?;
    let u_pow = mp.u_powers(m_max + 1)?;
    let rows = n + m_max + 1;
    let tail_sum = |terms: &[f64]| {
        kernel_column(&kernel, terms, n, m_max)
            .zip(&u_pow)
            .enumerate()
            .skip(l)
            .map(|(_, (f, u))| u * abs_pow(f, mp.k))
            .collect::<Neumaier>()
            .value()
    };
    let mut rhs = Neumaier::new();
    for (j, xj) in x.iter().enumerate() {
        rhs.add(xj.abs() * root(tail_sum(&a.column(j, rows)), mp.k));
    }
    let image: Vec<f64> = (0..rows)
        .map(|r| x.iter().enumerate().map(|(j, xj)| a.entry(r, j) * xj).collect::<Neumaier>().value())
        .collect();
    Ok(MinkowskiSample { lhs: root(tail_sum(&image), mp.k), rhs: rhs.value() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seqcore::SeriesKind;

    fn unit(k: f64) -> MethodParams {
        MethodParams::unit(k).unwrap()
    }

    fn m(kind: MatrixKind) -> InfMatrix {
        InfMatrix::new(kind).unwrap()
    }

    fn half_diag() -> InfMatrix {
        m(MatrixKind::Diagonal { diag: DiagonalSpec::Geometric { first: 1.0, ratio: 0.5 } })
    }

    #[test]
    fn apply_examples() {
        let x = SeriesView::explicit(vec![3.0, -1.0, 2.0]).unwrap();
        for n in 0..3 {
            assert_eq!(apply_matrix(&m(MatrixKind::Identity), &x, n, 5, false).unwrap(), x.term(n));
        }
        let e0 = SeriesView::new(SeriesKind::UnitBasis { index: 0 }).unwrap();
        for n in 0..10 {
            let v = apply_matrix(&m(MatrixKind::CesaroC1), &e0, n, 0, false).unwrap();
            assert_eq!(v, 1.0 / (n as f64 + 1.0));
        }
        let ones = SeriesView::new(SeriesKind::Power { decay: 0.0 }).unwrap();
        let c = m(MatrixKind::Constant { value: 1.0 });
        assert!(matches!(apply_matrix(&c, &ones, 0, 4, false), Err(Error::NotFinitelySupported { .. })));
        assert_eq!(apply_matrix(&c, &ones, 0, 4, true).unwrap(), 5.0);
        // finitely supported rows need no waiver
        assert_eq!(apply_matrix(&m(MatrixKind::CesaroC1), &ones, 3, 3, false).unwrap(), 1.0);
    }

    #[test]
    fn dense_shape_is_checked() {
        assert!(InfMatrix::dense(2, 2, vec![1.0; 3]).is_err());
        let d = InfMatrix::dense(2, 3, (0..6).map(f64::from).collect()).unwrap();
        assert_eq!(d.entry(1, 2), 5.0);
        assert_eq!(d.entry(2, 0), 0.0);
        assert_eq!(d.entry(0, 3), 0.0);
    }

    #[test]
    fn b_examples() {
        let id = m(MatrixKind::Identity);
        assert!((b_coeff(&id, &WeightSeq::unit(), 3, 0, 2).unwrap() - 1.0 / 6.0).abs() < 1e-16);
        for mm in 1..8 {
            for n in 0..6 {
                for j in 0..12 {
                    let d = j as i64 - n as i64;
                    let expect = if d >= 1 && d <= mm as i64 { d as f64 / (mm * (mm + 1)) as f64 } else { 0.0 };
                    assert!((b_coeff_psi(&id, mm, n, j) - expect).abs() < 1e-16);
                }
            }
        }
        let c = m(MatrixKind::CesaroC1);
        assert_eq!(b_coeff(&c, &WeightSeq::unit(), 0, 4, 2).unwrap(), c.entry(4, 2));
    }

    #[test]
    fn btable_matches_cells() {
        let a = m(MatrixKind::Banded { width: 2, value: 1.5, decay: -0.5 });
        let p = WeightSeq::new(crate::WeightKind::Arithmetic { first: 1.0, step: 2.0 }).unwrap();
        let w = TruncWindow::new(12, 6, 8);
        let t = fill_btable(&a, &p, &w).unwrap();
        for mm in 0..=12 {
            for n in 0..=6 {
                for j in 0..=8 {
                    assert_eq!(t.get(mm, n, j).unwrap().to_bits(), b_coeff(&a, &p, mm, n, j).unwrap().to_bits());
                }
            }
        }
        assert_eq!(t.get(0, 3, 4), Some(a.entry(3, 4)));
        assert_eq!(t.get(13, 0, 0), None);
    }

    #[test]
    fn zero_matrix_passes_everything() {
        let z = m(MatrixKind::Zero);
        let w = TruncWindow::new(64, 4, 4);
        let l1 = classify_l1(&z, &unit(1.0), &w).unwrap();
        assert_eq!(l1.verdict, Verdict::PassAtScale);
        let c = classify_c(&z, &unit(1.0), &w).unwrap();
        assert_eq!(c.verdict, Verdict::PassAtScale);
        for r in l1.conditions.iter().chain(&c.conditions) {
            assert!(r.scale_sups.iter().all(|s| *s == 0.0));
        }
    }

    #[test]
    fn identity_examples() {
        let id = m(MatrixKind::Identity);
        let w = TruncWindow::new(8192, 4, 4);
        let r = check_column_tails(&id, &unit(1.0), &w).unwrap();
        assert_eq!(r.verdict, Verdict::PassAtScale);
        // n = 0 column j: Σ_{m=j}^{M} j/(m(m+1)) = 1 - j/(M+1)
        for j in 1..=4 {
            let expect = 1.0 - j as f64 / 8193.0;
            assert!((r.totals[j][0] - expect).abs() < 1e-12);
        }
        let w2 = TruncWindow::new(256, 8, 8);
        let sup = check_column_sup(&id, &unit(2.0), &w2).unwrap();
        assert_eq!(sup.verdict, Verdict::PassAtScale);
        assert_eq!(sup.scale_sups, [1.0; 3]);
        assert_eq!(classify_l1(&id, &unit(2.0), &TruncWindow::new(1024, 8, 8)).unwrap().verdict, Verdict::PassAtScale);
        // Σ_j |b(m,n,j)| = 1/2 for every m >= 1
        let abs = check_row_abs_sup(&id, &unit(1.0), &TruncWindow::new(64, 4, 4)).unwrap();
        assert_eq!(abs.verdict, Verdict::Fail);
        assert!((abs.totals[0][0] - (1.0 + 64.0 * 0.5)).abs() < 1e-12);
    }

    #[test]
    fn row_linear_fails_column_sup() {
        let a = m(MatrixKind::RowLinear { slope: 1.0, intercept: 1.0 });
        let w = TruncWindow::new(64, 8, 4);
        let r = check_column_sup(&a, &unit(1.0), &w).unwrap();
        assert_eq!(r.verdict, Verdict::Fail);
        assert_eq!(classify_l1(&a, &unit(1.0), &w).unwrap().verdict, Verdict::Fail);
    }

    #[test]
    fn half_diagonal_class_c() {
        let d = half_diag();
        let w = TruncWindow::new(2048, 8, 8);
        let abs = check_row_abs_sup(&d, &unit(1.0), &w).unwrap();
        assert_eq!(abs.verdict, Verdict::PassAtScale);
        assert_eq!(abs.j_tail_fraction, 0.0);
        assert_eq!(check_row_sum_tails(&d, &unit(1.0), &w).unwrap().verdict, Verdict::PassAtScale);
        assert_eq!(classify_c(&d, &unit(1.0), &w).unwrap().verdict, Verdict::PassAtScale);
    }

    #[test]
    fn constant_fails_class_c() {
        let a = m(MatrixKind::Constant { value: 1.0 });
        let w = TruncWindow::new(64, 4, 8);
        let r = check_row_abs_sup(&a, &unit(1.0), &w).unwrap();
        assert_eq!(r.verdict, Verdict::Fail);
        assert!(r.j_tail_fraction > 0.0);
        assert_eq!(classify_c(&a, &unit(1.0), &w).unwrap().verdict, Verdict::Fail);
    }

    #[test]
    fn psi_path_is_bitwise_identical() {
        let w = TruncWindow::new(128, 4, 6);
        for a in [m(MatrixKind::CesaroC1), half_diag(), m(MatrixKind::Banded { width: 1, value: 1.0, decay: 0.3 })] {
            for k in [1.0, 2.0, 2.5] {
                assert_eq!(classify_l1(&a, &unit(k), &w).unwrap(), classify_l1_psi(&a, k, &w).unwrap());
                assert_eq!(classify_c(&a, &unit(k), &w).unwrap(), classify_c_psi(&a, k, &w).unwrap());
            }
        }
    }

    #[test]
    fn column_tails_match_membership_of_columns() {
        let a = m(MatrixKind::Banded { width: 2, value: 1.0, decay: 0.5 });
        let mp = unit(2.0);
        let w = TruncWindow::new(256, 4, 5);
        let r = check_column_tails(&a, &mp, &w).unwrap();
        for j in 0..=w.j_max {
            let col = SeriesView::explicit(a.column(j, 4 * (w.m_max + w.n_max) + 1)).unwrap();
            let ev = crate::summability::membership(&col, &mp, &w).unwrap();
            assert_eq!(ev.verdict(), r.columns[j].verdict);
            assert_eq!(ev.tails.totals, r.totals[j]);
        }
    }

    #[test]
    fn interchange_and_minkowski() {
        let a = InfMatrix::dense(6, 4, (0..24).map(|i| ((i * 7 % 11) as f64 - 5.0) / 3.0).collect()).unwrap();
        let p = WeightSeq::new(crate::WeightKind::Geometric { first: 1.0, ratio: 1.1 }).unwrap();
        let x = [0.5, -2.0, 0.0, 1.25];
        for mm in 0..5 {
            for n in 0..4 {
                let s = interchange(&a, &p, &x, mm, n).unwrap();
                assert!(s.rel_error() <= 1e-12, "{s:?}");
            }
        }
        let mp = MethodParams::new(p, WeightSeq::unit(), 1.5).unwrap();
        for l in 0..4 {
            let s = minkowski_tail(&a, &mp, &x, l, 1, 10).unwrap();
            assert!(s.lhs <= s.rhs * (1.0 + 1e-12));
        }
    }
}
