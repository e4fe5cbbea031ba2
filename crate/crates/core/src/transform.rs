//! Weighted means `T_{m,n}` and their first differences `F_{m,n}`.
//!
//! For `m >= 1`,
//!
//! ```text
//! F_{m,n}(a) = T_{m,n}(s) - T_{m-1,n}(s) = p_m / (P_m P_{m-1}) · Σ_{v=1}^{m} P_{v-1} a_{n+v}
//! ```
//!
//! and `F_{0,n} = a_n`. Both the general weighted kernel and the unit-weight
//! kernel `ψ_{m,n}` are expressed through [`Kernel`], so a column of either
//! is produced by the same incremental accumulator: row `m` adds exactly one
//! lagged term to a compensated running sum. A cell evaluated on its own
//! performs the same additions in the same order and therefore returns the
//! same bits as the streamed column.

use std::io::{self, Write};

use crate::compensated::Neumaier;
use crate::par;
use crate::seqcore::{SeriesView, TruncWindow, WeightSeq, WeightTable};
use crate::{Error, Result};

/// Cell budget for [`fill_table`].
pub const DEFAULT_CELL_BUDGET: u128 = 50_000_000;

/// Coefficients of a difference kernel: row `m >= 1` is
/// `row_coeff(m) · Σ_{v=1}^{m} lag_weight(v) · a_{n+v}`.
pub trait Kernel: Sync {
    fn row_coeff(&self, m: usize) -> f64;
    fn lag_weight(&self, v: usize) -> f64;
}

/// The kernel of `F_{m,n}` for a prepared weight prefix.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedKernel {
    table: WeightTable,
}

impl WeightedKernel {
    /// Prepares weights for rows `0..=m_max`.
    pub fn new(p: &WeightSeq, m_max: usize) -> Result<Self> {
        Ok(Self { table: p.table(m_max + 1)? })
    }

    pub fn weights(&self) -> &WeightTable {
        &self.table
    }

    pub fn m_max(&self) -> usize {
        self.table.len() - 1
    }
}

impl Kernel for WeightedKernel {
    #[inline]
    fn row_coeff(&self, m: usize) -> f64 {
        self.table.p[m] / (self.table.cum[m] * self.table.cum[m - 1])
    }

    #[inline]
    fn lag_weight(&self, v: usize) -> f64 {
        self.table.cum[v - 1]
    }
}

/// The unit-weight kernel `ψ_{m,n} = 1/(m(m+1)) Σ v a_{n+v}`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PsiKernel;

impl Kernel for PsiKernel {
    #[inline]
    fn row_coeff(&self, m: usize) -> f64 {
        1.0 / ((m as f64 + 1.0) * m as f64)
    }

    #[inline]
    fn lag_weight(&self, v: usize) -> f64 {
        v as f64
    }
}

/// Streams `F_{0,n}, F_{1,n}, …, F_{m_max,n}` for one shift `n`.
#[derive(Debug, Clone)]
pub struct KernelColumn<'a, K> {
    kernel: &'a K,
    terms: &'a [f64],
    /// `terms[i]` holds `a_{offset+i}`.
    offset: usize,
    n: usize,
    m: usize,
    m_max: usize,
    acc: Neumaier,
}

/// Column iterator; `terms` must hold at least `n + m_max + 1` entries.
pub fn kernel_column<'a, K: Kernel>(kernel: &'a K, terms: &'a [f64], n: usize, m_max: usize) -> KernelColumn<'a, K> {
    assert!(terms.len() > n + m_max, "term buffer too short for column");
    KernelColumn { kernel, terms, offset: 0, n, m: 0, m_max, acc: Neumaier::new() }
}

/// Column iterator starting at row `m_start`, for terms with
/// `a_{n+v} = 0` when `1 <= v < m_start`; yields `F_{m,n}` for
/// `m_start <= m <= m_max` with the same bits as [`kernel_column`].
pub fn kernel_column_from<'a, K: Kernel>(
    kernel: &'a K,
    terms: &'a [f64],
    n: usize,
    m_start: usize,
    m_max: usize,
) -> KernelColumn<'a, K> {
    assert!(terms.len() > n + m_max, "term buffer too short for column");
    KernelColumn { kernel, terms, offset: 0, n, m: m_start, m_max, acc: Neumaier::new() }
}

/// [`kernel_column_from`] over a stored segment: `segment[i]` holds
/// `a_{offset+i}`, every term before `offset` is zero and
/// `offset <= n + m_start`.
pub fn kernel_column_segment<'a, K: Kernel>(
    kernel: &'a K,
    segment: &'a [f64],
    offset: usize,
    n: usize,
    m_start: usize,
    m_max: usize,
) -> KernelColumn<'a, K> {
    assert!(offset <= n + m_start && segment.len() + offset > n + m_max, "segment does not cover the rows");
    KernelColumn { kernel, terms: segment, offset, n, m: m_start, m_max, acc: Neumaier::new() }
}

impl<K: Kernel> KernelColumn<'_, K> {
    /// `Σ_{v=1}^{m} lag_weight(v) a_{n+v}` for the last row produced.
    pub fn inner_sum(&self) -> f64 {
        self.acc.value()
    }
}

impl<K: Kernel> Iterator for KernelColumn<'_, K> {
    type Item = f64;

    #[inline]
    fn next(&mut self) -> Option<f64> {
        if self.m > self.m_max {
            return None;
        }
        let m = self.m;
        self.m += 1;
        if m == 0 {
            return Some(self.terms[self.n - self.offset]);
        }
        self.acc.add(self.kernel.lag_weight(m) * self.terms[self.n + m - self.offset]);
        Some(self.kernel.row_coeff(m) * self.acc.value())
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.m_max + 1).saturating_sub(self.m);
        (left, Some(left))
    }
}

impl<K: Kernel> ExactSizeIterator for KernelColumn<'_, K> {}

/// One cell, evaluated with a fresh accumulator.
pub fn kernel_cell<K: Kernel>(kernel: &K, terms: &[f64], m: usize, n: usize) -> f64 {
    if m == 0 {
        return terms[n];
    }
    let mut acc = Neumaier::new();
    for v in 1..=m {
        acc.add(kernel.lag_weight(v) * terms[n + v]);
    }
    kernel.row_coeff(m) * acc.value()
}

/// `T_{m,n}(s) = (1/P_m) Σ_{v=0}^{m} p_v s_{n+v}` for `m >= 0`, and
/// `T_{-1,n}(s) = s_{n-1}`.
pub fn weighted_mean(a: &SeriesView, w: &WeightSeq, m: i64, n: usize) -> Result<f64> {
    if m < -1 {
        return Err(Error::InvalidParameter(format!("row index {m} < -1")));
    }
    if m == -1 {
        return a.partial_sum(n as i64 - 1);
    }
    let m = m as usize;
    let table = w.table(m + 1)?;
    let sums = a.partial_sums(n + m + 1);
    let mut acc = Neumaier::new();
    for v in 0..=m {
        acc.add(table.p[v] * sums[n + v]);
    }
    Ok(acc.value() / table.cum[m])
}

/// `F_{m,n}(a)` for weights `w`.
pub fn f_kernel(a: &SeriesView, w: &WeightSeq, m: usize, n: usize) -> Result<f64> {
    let kernel = WeightedKernel::new(w, m)?;
    let terms = a.terms(n + m + 1);
    Ok(kernel_cell(&kernel, &terms, m, n))
}

/// `ψ_{m,n}(a)`.
pub fn psi_kernel(a: &SeriesView, m: usize, n: usize) -> f64 {
    let terms = a.terms(n + m + 1);
    kernel_cell(&PsiKernel, &terms, m, n)
}

/// `F_{m,n}(a)` over `0 <= m <= m_max`, `0 <= n <= n_max`, stored row-major
/// in `m`. Values are raw kernel values; no `u` factor is applied.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformTable {
    values: Vec<f64>,
    window: TruncWindow,
    kernel: WeightedKernel,
}

impl TransformTable {
    pub fn window(&self) -> &TruncWindow {
        &self.window
    }

    pub fn m_max(&self) -> usize {
        self.window.m_max
    }

    pub fn n_max(&self) -> usize {
        self.window.n_max
    }

    pub fn weights(&self) -> &WeightTable {
        self.kernel.weights()
    }

    pub fn get(&self, m: usize, n: usize) -> Option<f64> {
        (m <= self.window.m_max && n <= self.window.n_max).then(|| self.values[m * (self.window.n_max + 1) + n])
    }

    /// Row `m`, i.e. `F_{m,0..=n_max}`.
    pub fn row(&self, m: usize) -> &[f64] {
        let w = self.window.n_max + 1;
        &self.values[m * w..(m + 1) * w]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// CSV with a header of `n` indices and one row per `m`; values carry 17
    /// significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        write!(out, "m")?;
        for n in 0..=self.window.n_max {
            write!(out, ",{n}")?;
        }
        writeln!(out)?;
        for m in 0..=self.window.m_max {
            write!(out, "{m}")?;
            for v in self.row(m) {
                write!(out, ",{v:.16e}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

pub fn fill_table(a: &SeriesView, p: &WeightSeq, window: &TruncWindow) -> Result<TransformTable> {
    fill_table_with_budget(a, p, window, DEFAULT_CELL_BUDGET)
}

pub fn fill_table_with_budget(a: &SeriesView, p: &WeightSeq, window: &TruncWindow, budget: u128) -> Result<TransformTable> {
    window.validate()?;
    let cells = window.cells();
    if cells > budget {
        return Err(Error::CellBudgetExceeded { cells, budget });
    }
    let (m_max, n_max) = (window.m_max, window.n_max);
    let kernel = WeightedKernel::new(p, m_max)?;
    let terms = a.terms(m_max + n_max + 1);
    let columns = par::map_range(0..n_max + 1, |n| kernel_column(&kernel, &terms, n, m_max).collect::<Vec<_>>());
    let mut values = vec![0.0; (m_max + 1) * (n_max + 1)];
    for (n, col) in columns.iter().enumerate() {
        for (m, v) in col.iter().enumerate() {
            values[m * (n_max + 1) + n] = *v;
        }
    }
    Ok(TransformTable { values, window: *window, kernel })
}

/// Recovers `a_{m+n} = (P_m/p_m) F_{m,n} - (P_{m-2}/p_{m-1}) F_{m-1,n}`.
pub fn recover_term(table: &TransformTable, m: usize, n: usize) -> Result<f64> {
    recover_term_scaled(table, m, n, 1.0)
}

/// [`recover_term`] with the second coefficient multiplied by `scale`.
/// Used to check that the verification suite notices a wrong coefficient.
#[doc(hidden)]
pub fn recover_term_scaled(table: &TransformTable, m: usize, n: usize, scale: f64) -> Result<f64> {
    let (first, second) = recovery_parts(table, m, n)?;
    Ok(first - scale * second)
}

/// `(P_m/p_m)|F_{m,n}| + (P_{m-2}/p_{m-1})|F_{m-1,n}|`, an upper bound for
/// `|a_{m+n}|` and the natural scale for the rounding error of
/// [`recover_term`].
pub fn recovery_bound(table: &TransformTable, m: usize, n: usize) -> Result<f64> {
    let (first, second) = recovery_parts(table, m, n)?;
    Ok(first.abs() + second.abs())
}

fn recovery_parts(table: &TransformTable, m: usize, n: usize) -> Result<(f64, f64)> {
    if m == 0 {
        return Err(Error::InvalidParameter("term recovery needs m >= 1".into()));
    }
    let f_m = table.get(m, n).ok_or(Error::OutOfWindow { m, n })?;
    let f_prev = table.get(m - 1, n).ok_or(Error::OutOfWindow { m: m - 1, n })?;
    let w = table.weights();
    let first = w.cum[m] / w.p[m] * f_m;
    // P_{-1} = 0 removes the second term at m = 1.
    let second = if m == 1 { 0.0 } else { w.cum[m - 2] / w.p[m - 1] * f_prev };
    Ok((first, second))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seqcore::{SeriesKind, WeightKind};

    fn arith() -> WeightSeq {
        WeightSeq::new(WeightKind::Arithmetic { first: 1.0, step: 1.0 }).unwrap()
    }

    #[test]
    fn weighted_mean_examples() {
        let c = SeriesView::explicit(vec![2.5]).unwrap();
        for m in -1..6 {
            for n in 1..5 {
                assert!((weighted_mean(&c, &arith(), m, n).unwrap() - 2.5).abs() < 1e-15);
            }
        }
        let e0 = SeriesView::new(SeriesKind::UnitBasis { index: 0 }).unwrap();
        assert_eq!(weighted_mean(&e0, &arith(), 1, 0).unwrap(), 1.0);
        assert_eq!(weighted_mean(&e0, &arith(), -1, 0).unwrap(), 0.0);

        // unit weights give the plain sliding mean of partial sums
        let g = SeriesView::new(SeriesKind::Geometric { ratio: 0.5 }).unwrap();
        let s = g.partial_sums(10);
        let expect = (s[2] + s[3] + s[4] + s[5]) / 4.0;
        assert!((weighted_mean(&g, &WeightSeq::unit(), 3, 2).unwrap() - expect).abs() < 1e-15);
    }

    #[test]
    fn f_kernel_examples() {
        let e1 = SeriesView::new(SeriesKind::UnitBasis { index: 1 }).unwrap();
        let g = SeriesView::new(SeriesKind::Geometric { ratio: 0.3 }).unwrap();
        assert_eq!(f_kernel(&g, &arith(), 0, 4).unwrap(), g.term(4));
        assert!((f_kernel(&e1, &WeightSeq::unit(), 2, 0).unwrap() - 1.0 / 6.0).abs() < 1e-16);
        assert!((f_kernel(&e1, &arith(), 1, 0).unwrap() - 2.0 / 3.0).abs() < 1e-16);
    }

    #[test]
    fn psi_examples() {
        let e1 = SeriesView::new(SeriesKind::UnitBasis { index: 1 }).unwrap();
        assert!((psi_kernel(&e1, 3, 0) - 1.0 / 12.0).abs() < 1e-17);
        assert_eq!(psi_kernel(&e1, 1, 1), 0.0);
    }

    #[test]
    fn psi_is_bitwise_unit_f() {
        let a = SeriesView::new(SeriesKind::Power { decay: 0.7 }).unwrap();
        let unit = WeightSeq::unit();
        for m in 0..40 {
            for n in 0..40 {
                assert_eq!(psi_kernel(&a, m, n).to_bits(), f_kernel(&a, &unit, m, n).unwrap().to_bits());
            }
        }
    }

    #[test]
    fn table_matches_cells_exactly() {
        let a = SeriesView::new(SeriesKind::BoundedPartialSums {
            generator: crate::PartialSumGenerator::Sine { frequency: 1.3 },
        })
        .unwrap();
        let w = TruncWindow::new(30, 20, 1);
        let t = fill_table(&a, &arith(), &w).unwrap();
        for m in 0..=30 {
            for n in 0..=20 {
                assert_eq!(t.get(m, n).unwrap().to_bits(), f_kernel(&a, &arith(), m, n).unwrap().to_bits());
            }
        }
        assert_eq!(t.row(0), &a.terms(21)[..]);
    }

    #[test]
    fn zero_series_table() {
        let t = fill_table(&SeriesView::zero(), &arith(), &TruncWindow::new(10, 10, 1)).unwrap();
        assert!(t.values().iter().all(|v| *v == 0.0));
        for m in 1..=10 {
            assert_eq!(recover_term(&t, m, 3).unwrap(), 0.0);
        }
    }

    #[test]
    fn budget_and_window_errors() {
        let a = SeriesView::zero();
        let w = TruncWindow::new(100, 100, 1);
        assert!(matches!(
            fill_table_with_budget(&a, &WeightSeq::unit(), &w, 1000),
            Err(Error::CellBudgetExceeded { .. })
        ));
        let t = fill_table(&a, &WeightSeq::unit(), &TruncWindow::new(5, 5, 1)).unwrap();
        assert!(matches!(recover_term(&t, 6, 0), Err(Error::OutOfWindow { .. })));
        assert!(recover_term(&t, 0, 0).is_err());
    }

    #[test]
    fn recovery_at_first_row_uses_single_term() {
        let a = SeriesView::new(SeriesKind::Geometric { ratio: -0.6 }).unwrap();
        let t = fill_table(&a, &arith(), &TruncWindow::new(4, 4, 1)).unwrap();
        let w = t.weights();
        for n in 0..=4 {
            let expect = w.cum[1] / w.p[1] * t.get(1, n).unwrap();
            assert_eq!(recover_term(&t, 1, n).unwrap(), expect);
            assert!((expect - a.term(n + 1)).abs() < 1e-15);
        }
    }

    #[test]
    fn csv_layout() {
        let a = SeriesView::new(SeriesKind::UnitBasis { index: 1 }).unwrap();
        let t = fill_table(&a, &WeightSeq::unit(), &TruncWindow::new(2, 1, 1)).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "m,0,1");
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[1], "0,0.0000000000000000e0,1.0000000000000000e0");
        let parsed: f64 = lines[3].split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(parsed, t.get(2, 0).unwrap());
    }
}
