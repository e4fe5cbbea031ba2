//! The invariant suite behind `verify-all`.

use absum_core::colsum;
use absum_core::matrixclass::{self, InfMatrix};
use absum_core::oracle::{self, OracleBudget};
use absum_core::summability::{self, MethodParams, SeriesTrend};
use absum_core::transform;
use absum_core::{
    make_bounded_partial_sum_series, SeriesKind, SeriesView, TruncWindow, Verdict, WeightKind, WeightSeq,
};
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ExperimentConfig, Scale, SHIPPED_CONFIGS};
use crate::error::CliError;
use crate::families;
use crate::run;

/// Tolerances of the individual checks.
pub const IDENTITY_REL: f64 = 1e-11;
pub const ORACLE_REL: f64 = 1e-10;
pub const HOMOGENEITY_REL: f64 = 1e-12;
pub const TRIANGLE_SLACK: f64 = 1e-10;
pub const INTERCHANGE_REL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    /// Multiplier on the second recovery coefficient; anything but 1 is a
    /// deliberate defect the recovery suite must catch.
    pub recovery_scale: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { recovery_scale: 1.0 }
    }
}

/// Sizes of every suite at one scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Plan {
    pub difference: (usize, usize),
    pub recovery: (usize, usize),
    pub specialization: TruncWindow,
    pub bs_window: TruncWindow,
    pub series_probe: usize,
    pub inclusion: TruncWindow,
    pub sandwich_cases: usize,
    pub sandwich_rows: usize,
    pub interchange_cases: usize,
    pub oracle_cases: usize,
    pub norm_cases: usize,
    pub classifier: TruncWindow,
}

impl Plan {
    pub fn for_scale(scale: Scale) -> Self {
        let small = Plan {
            difference: (200, 200),
            recovery: (40, 40),
            specialization: TruncWindow::new(256, 8, 4),
            bs_window: TruncWindow::new(100_000, 8, 1),
            series_probe: 100_000,
            inclusion: TruncWindow::new(200, 200, 1),
            sandwich_cases: 500,
            sandwich_rows: 15,
            interchange_cases: 500,
            oracle_cases: 2000,
            norm_cases: 500,
            classifier: TruncWindow::new(2048, 8, 6),
        };
        match scale {
            Scale::Small => small,
            Scale::Standard => Plan {
                difference: (400, 400),
                recovery: (80, 80),
                bs_window: TruncWindow::new(100_000, 16, 1),
                series_probe: 1_000_000,
                sandwich_cases: 2000,
                interchange_cases: 2000,
                oracle_cases: 5000,
                norm_cases: 2000,
                classifier: TruncWindow::new(4096, 16, 8),
                ..small
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteResult {
    pub name: &'static str,
    pub cases: usize,
    pub failures: usize,
    /// Largest error divided by the allowed error; at most 1 on success.
    pub worst: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub scale: Scale,
    pub passed: bool,
    pub cases: usize,
    pub failures: usize,
    pub plan: Plan,
    pub suites: Vec<SuiteResult>,
    /// Wall-clock seconds per suite; kept out of the evidence block.
    #[serde(skip)]
    pub suite_seconds: Vec<(&'static str, f64)>,
}

#[derive(Debug, Clone, Default)]
struct Tally {
    cases: usize,
    failures: usize,
    worst: f64,
    first_failure: Option<String>,
}

impl Tally {
    fn add(&mut self, ratio: f64, what: impl FnOnce() -> String) {
        self.cases += 1;
        let ratio = if ratio.is_nan() { f64::INFINITY } else { ratio };
        self.worst = self.worst.max(ratio);
        if ratio > 1.0 {
            self.failures += 1;
            if self.first_failure.is_none() {
                self.first_failure = Some(format!("{} (error ratio {ratio:.3e})", what()));
            }
        }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.add(if ok { 0.0 } else { f64::INFINITY }, what);
    }

    fn merge(mut self, other: Tally) -> Tally {
        self.cases += other.cases;
        self.failures += other.failures;
        self.worst = self.worst.max(other.worst);
        if self.first_failure.is_none() {
            self.first_failure = other.first_failure;
        }
        self
    }

    fn finish(self, name: &'static str) -> SuiteResult {
        SuiteResult {
            name,
            cases: self.cases,
            failures: self.failures,
            worst: self.worst,
            passed: self.failures == 0 && self.cases > 0,
            first_failure: self.first_failure,
        }
    }
}

/// `|fast - slow| / (rel · max(|slow|, scale))`, 0 on exact agreement.
fn ratio(fast: f64, slow: f64, scale: f64, rel: f64) -> f64 {
    let d = (fast - slow).abs();
    if d == 0.0 {
        0.0
    } else {
        d / (rel * slow.abs().max(scale))
    }
}

/// Evaluates independent cases in parallel and merges them in input order.
fn gather<T: Sync>(items: &[T], f: impl Fn(&T) -> Result<Tally, CliError> + Sync + Send) -> Result<Tally, CliError> {
    let parts: Vec<Result<Tally, CliError>> = items.par_iter().map(f).collect();
    let mut total = Tally::default();
    for p in parts {
        total = total.merge(p?);
    }
    Ok(total)
}

fn shipped_pairs() -> Vec<(&'static str, SeriesKind, &'static str, WeightKind)> {
    let mut out = Vec::new();
    for (sn, s) in families::series_families() {
        for (wn, w) in families::weight_families() {
            out.push((sn, s.clone(), wn, w));
        }
    }
    out
}

/// `F_{m,n} = T_{m,n} - T_{m-1,n}` over every shipped series and weight family.
pub fn difference_identity(m_max: usize, n_max: usize) -> Result<SuiteResult, CliError> {
    let window = TruncWindow::new(m_max, n_max, 1);
    let tally = gather(&shipped_pairs(), |(sn, s, wn, w)| {
        let a = SeriesView::new(s.clone())?;
        let p = WeightSeq::new(w.clone())?;
        let table = transform::fill_table(&a, &p, &window)?;
        let mut t = Tally::default();
        for n in 0..=n_max {
            let mut prev = transform::weighted_mean(&a, &p, -1, n)?;
            for m in 0..=m_max {
                let cur = transform::weighted_mean(&a, &p, m as i64, n)?;
                let f = table.get(m, n).expect("inside window");
                let scale = cur.abs() + prev.abs();
                t.add(ratio(f, cur - prev, scale, IDENTITY_REL), || format!("{sn}/{wn} m={m} n={n}"));
                prev = cur;
            }
        }
        Ok(t)
    })?;
    Ok(tally.finish("difference_identity"))
}

/// Recovery of `a_{m+n}` from two consecutive rows of the table.
pub fn recovery(m_max: usize, n_max: usize, opts: VerifyOptions) -> Result<SuiteResult, CliError> {
    let window = TruncWindow::new(m_max, n_max, 1);
    let tally = gather(&shipped_pairs(), |(sn, s, wn, w)| {
        let a = SeriesView::new(s.clone())?;
        let p = WeightSeq::new(w.clone())?;
        let table = transform::fill_table(&a, &p, &window)?;
        let mut t = Tally::default();
        for m in 1..=m_max {
            for n in 0..=n_max {
                let r = transform::recover_term_scaled(&table, m, n, opts.recovery_scale)?;
                let scale = transform::recovery_bound(&table, m, n)?;
                t.add(ratio(r, a.term(m + n), scale, IDENTITY_REL), || format!("{sn}/{wn} m={m} n={n}"));
            }
        }
        Ok(t)
    })?;
    Ok(tally.finish("recovery"))
}

/// Unit weights against the `ψ` path: kernels, norms, membership and
/// classifier reports must agree bit for bit, on the shipped families and
/// on every shipped config with unit weights.
pub fn psi_specialization(window: &TruncWindow, seed: u64) -> Result<SuiteResult, CliError> {
    let unit = WeightSeq::unit();
    let mut tally = gather(&families::series_families(), |(name, s)| {
        let a = SeriesView::new(s.clone())?;
        let mut t = Tally::default();
        let table = transform::fill_table(&a, &unit, window)?;
        let mut same = true;
        for m in 0..=window.m_max {
            for n in 0..=window.n_max {
                same &= table.get(m, n).map(f64::to_bits) == Some(transform::psi_kernel(&a, m, n).to_bits());
            }
        }
        t.check(same, || format!("{name}: F table differs from psi"));
        for k in [1.0, 1.5, 2.0, 3.0] {
            let mp = MethodParams::unit(k)?;
            let norm = summability::truncated_norm(&a, &mp, window)?;
            let psi = summability::lhat_norm(&a, k, window)?;
            t.check(norm.to_bits() == psi.to_bits(), || format!("{name} k={k}: norm {norm} vs {psi}"));
            let member = summability::membership(&a, &mp, window)?;
            let psi = summability::lhat_membership(&a, k, window)?;
            t.check(member == psi, || format!("{name} k={k}: membership evidence differs"));
        }
        Ok(t)
    })?;
    let class_window = TruncWindow::new(window.m_max.min(128), window.n_max.min(4), window.j_max.min(4));
    let zoo = families::matrix_zoo(seed);
    tally = tally.merge(gather(&zoo, |z| {
        let (name, a) = (z.name, &z.matrix);
        let mut t = Tally::default();
        for k in [1.0, 2.0] {
            let mp = MethodParams::unit(k)?;
            let l1 = matrixclass::classify_l1(a, &mp, &class_window)?;
            t.check(l1 == matrixclass::classify_l1_psi(a, k, &class_window)?, || format!("{name} k={k}: l1 reports differ"));
            let c = matrixclass::classify_c(a, &mp, &class_window)?;
            t.check(c == matrixclass::classify_c_psi(a, k, &class_window)?, || format!("{name} k={k}: c reports differ"));
        }
        Ok(t)
    })?);
    tally = tally.merge(gather(SHIPPED_CONFIGS, |(file, text)| {
        let mut t = Tally::default();
        let cfg = ExperimentConfig::from_json(text)?;
        if let Some(same) = run::specialization_check(&cfg)? {
            t.check(same, || format!("shipped config {file}"));
        }
        Ok(t)
    })?);
    Ok(tally.finish("psi_specialization"))
}

/// Bounded-partial-sum members are in `ℓ̂_k` for `k > 1`; at `k = 1` the
/// series condition diverges.
pub fn bounded_partial_sums(window: &TruncWindow, probe: usize) -> Result<SuiteResult, CliError> {
    let mut cases = Vec::new();
    for (g, gen) in families::bs_generators() {
        for k in [1.5, 2.0, 3.0] {
            cases.push((g, gen.clone(), k));
        }
    }
    let mut tally = gather(&cases, |(g, gen, k)| {
        let a = make_bounded_partial_sum_series(gen.clone())?;
        let ev = summability::membership(&a, &MethodParams::unit(*k)?, window)?;
        let mut t = Tally::default();
        let tail = ev.tails.pass_cut.and_then(|cut| ev.tails.grid.iter().position(|&c| c == cut)).map(|i| ev.tails.sup_tails[i]);
        t.check(ev.verdict() == Verdict::PassAtScale && tail.is_some_and(|v| v < window.abs_tol), || {
            format!("{g} k={k}: {} tail {tail:?}", ev.verdict().as_str())
        });
        Ok(t)
    })?;
    for k in [1.0, 1.5, 2.0, 3.0] {
        let r = summability::check_series_condition(&MethodParams::unit(k)?, probe)?;
        let want = if k == 1.0 { SeriesTrend::Divergent } else { SeriesTrend::Convergent };
        tally.check(r.trend == want, || format!("series condition k={k}: {:?}", r.trend));
    }
    Ok(tally.finish("bounded_partial_sums"))
}

/// The bound `Σ u^{k-1}|F|^k <= (4 M_bs)^k Σ u^{k-1}(p/P)^k` at every shift.
pub fn inclusion_bound(window: &TruncWindow) -> Result<SuiteResult, CliError> {
    let mut cases = Vec::new();
    for (g, gen) in families::bs_generators() {
        for (wn, w) in families::weight_families() {
            for k in [1.5, 2.0, 3.0] {
                cases.push((g, gen.clone(), wn, w.clone(), k));
            }
        }
    }
    let tally = gather(&cases, |(g, gen, wn, w, k)| {
        let a = make_bounded_partial_sum_series(gen.clone())?;
        let mp = MethodParams::new(WeightSeq::new(w.clone())?, WeightSeq::unit(), *k)?;
        let r = summability::inclusion_bound_check(&a, &mp, window)?;
        let mut t = Tally::default();
        t.add(r.max_ratio / (1.0 + summability::INCLUSION_SLACK), || format!("{g}/{wn} k={k} n={}", r.witness_n));
        Ok(t)
    })?;
    Ok(tally.finish("inclusion_bound"))
}

/// `U/(4C²) <= L <= U` on random blocks, with `L` also checked against the
/// literal enumeration.
pub fn sandwich(seed: u64, cases: usize, max_rows: usize) -> Result<SuiteResult, CliError> {
    let mut r = families::rng(seed, 0x300);
    let blocks: Vec<_> = (0..cases).map(|_| families::random_block(&mut r, max_rows, 8)).collect();
    let budget = OracleBudget::default();
    let tally = gather(&blocks, |(block, exps)| {
        let s = colsum::sandwich(block, exps)?;
        let slow = oracle::enumerate_l(block.rows, block.cols, &block.data, &exps.values, &budget)?;
        let mut t = Tally::default();
        t.check(s.holds, || format!("{}x{} block: U={} L={} bound={}", block.rows, block.cols, s.upper, s.lower, s.lower_bound));
        t.add(ratio(s.lower, slow, 0.0, 1e-12), || format!("{}x{} block: L={} enumeration={slow}", block.rows, block.cols, s.lower));
        Ok(t)
    })?;
    Ok(tally.finish("sandwich"))
}

/// `Σ_j b(m,n,j) x_j = F_{m,n}(A(x))` for finitely supported `x`.
pub fn interchange(seed: u64, cases: usize) -> Result<SuiteResult, CliError> {
    let mut r = families::rng(seed, 0x400);
    let inst: Vec<_> = (0..cases)
        .map(|_| {
            let a = families::random_matrix(&mut r);
            let p = families::random_weights(&mut r);
            let len = r.gen_range(1..10);
            let x: Vec<f64> = (0..len).map(|_| r.gen_range(-3.0..3.0)).collect();
            (a, p, x, r.gen_range(0..12usize), r.gen_range(0..8usize))
        })
        .collect();
    let tally = gather(&inst, |(a, p, x, m, n)| {
        let s = matrixclass::interchange(&InfMatrix::new(a.clone())?, &WeightSeq::new(p.clone())?, x, *m, *n)?;
        let mut t = Tally::default();
        t.add(s.rel_error() / INTERCHANGE_REL, || format!("{a:?} m={m} n={n}: {} vs {}", s.lhs, s.rhs));
        Ok(t)
    })?;
    Ok(tally.finish("interchange"))
}

fn abs_series(a: &SeriesView, len: usize) -> Result<SeriesView, CliError> {
    Ok(SeriesView::explicit(a.terms(len).into_iter().map(f64::abs).collect())?)
}

/// Fast paths against the literal oracles, `cases` random instances each.
pub fn oracle_equivalence(seed: u64, cases: usize) -> Result<Vec<SuiteResult>, CliError> {
    let budget = OracleBudget::default();
    let mut r = families::rng(seed, 0x500);
    let inst: Vec<_> = (0..cases)
        .map(|_| {
            (
                families::random_series(&mut r),
                families::random_weights(&mut r),
                families::random_weights(&mut r),
                r.gen_range(1.0..3.0),
                r.gen_range(1..16usize),
                r.gen_range(1..8usize),
            )
        })
        .collect();

    let table = gather(&inst, |(s, p, _, _, m_max, n_max)| {
        let a = SeriesView::new(s.clone())?;
        let p = WeightSeq::new(p.clone())?;
        let table = transform::fill_table(&a, &p, &TruncWindow::new(*m_max, *n_max, 1))?;
        let abs_a = abs_series(&a, m_max + n_max + 1)?;
        let mut worst = 0.0f64;
        let mut at = (0, 0);
        for m in 0..=*m_max {
            for n in 0..=*n_max {
                let slow = oracle::naive_f(&a, &p, m, n, &budget)?;
                let scale = oracle::naive_f(&abs_a, &p, m, n, &budget)?;
                let e = ratio(table.get(m, n).expect("inside window"), slow, scale, ORACLE_REL);
                if !(e <= worst) {
                    worst = e;
                    at = (m, n);
                }
            }
        }
        let mut t = Tally::default();
        t.add(worst, || format!("{s:?} m={} n={}", at.0, at.1));
        Ok(t)
    })?;

    let norm = gather(&inst, |(s, p, u, k, m_max, n_max)| {
        let a = SeriesView::new(s.clone())?;
        let (p, u) = (WeightSeq::new(p.clone())?, WeightSeq::new(u.clone())?);
        let mp = MethodParams::new(p.clone(), u.clone(), *k)?;
        let window = TruncWindow::new(2 * m_max, *n_max, 1);
        let fast = summability::truncated_norm(&a, &mp, &window)?;
        let slow = oracle::naive_norm(&a, &p, &u, *k, window.m_max, window.n_max, &budget)?;
        let abs_a = abs_series(&a, window.m_max + window.n_max + 1)?;
        let scale = oracle::naive_norm(&abs_a, &p, &u, *k, window.m_max, window.n_max, &budget)?;
        let mut t = Tally::default();
        t.add(ratio(fast, slow, scale, ORACLE_REL), || format!("{s:?} k={k}: {fast} vs {slow}"));
        Ok(t)
    })?;

    let mut r = families::rng(seed, 0x501);
    let minst: Vec<_> = (0..cases)
        .map(|_| {
            (
                families::random_matrix(&mut r),
                families::random_weights(&mut r),
                families::random_weights(&mut r),
                r.gen_range(1.0..3.0),
                (r.gen_range(0..20usize), r.gen_range(0..20usize), r.gen_range(0..12usize)),
            )
        })
        .collect();

    let b = gather(&minst, |(kind, p, _, _, (m, n, j))| {
        let a = InfMatrix::new(kind.clone())?;
        let p = WeightSeq::new(p.clone())?;
        let fast = matrixclass::b_coeff(&a, &p, *m, *n, *j)?;
        let slow = oracle::naive_b(&a, &p, *m, *n, *j, &budget)?;
        let abs_col: Vec<f64> = a.column(*j, n + m + 1).into_iter().map(f64::abs).collect();
        let scale = oracle::naive_b(&InfMatrix::dense(n + m + 1, 1, abs_col)?, &p, *m, *n, 0, &budget)?;
        let mut t = Tally::default();
        t.add(ratio(fast, slow, scale, ORACLE_REL), || format!("{kind:?} m={m} n={n} j={j}: {fast} vs {slow}"));
        Ok(t)
    })?;

    let checks = gather(&minst, |(kind, p, u, k, _)| {
        let a = InfMatrix::new(kind.clone())?;
        let (p, u) = (WeightSeq::new(p.clone())?, WeightSeq::new(u.clone())?);
        let mp = MethodParams::new(p.clone(), u.clone(), *k)?;
        let w = TruncWindow::new(8, 2, 3);
        let tails = matrixclass::check_column_tails(&a, &mp, &w)?;
        let sup = matrixclass::check_column_sup(&a, &mp, &w)?;
        let abs = matrixclass::check_row_abs_sup(&a, &mp, &w)?;
        let sum = matrixclass::check_row_sum_tails(&a, &mp, &w)?;
        let rows = 4 * (w.m_max + w.n_max) + 1;
        let j_end = a.column_extent(rows - 1).unwrap_or(w.j_max + 1);
        let mut worst = 0.0f64;
        for n in 0..=w.n_max {
            for j in 0..=w.j_max {
                let slow = oracle::naive_column_total(&a, &p, &u, *k, w.m_max, n, j, &budget)?;
                worst = worst.max(ratio(tails.totals[j][n], slow, 0.0, ORACLE_REL));
                worst = worst.max(ratio(sup.totals[j][n], slow, 0.0, ORACLE_REL));
            }
            let (slow_abs, slow_sum) = oracle::naive_row_totals(&a, &p, &u, *k, w.m_max, n, j_end, &budget)?;
            worst = worst.max(ratio(abs.totals[0][n], slow_abs, 0.0, ORACLE_REL));
            worst = worst.max(ratio(sum.totals[0][n], slow_sum, slow_abs, ORACLE_REL));
        }
        let mut t = Tally::default();
        t.add(worst, || format!("{kind:?} k={k}"));
        Ok(t)
    })?;

    Ok(vec![
        table.finish("oracle_fill_table"),
        norm.finish("oracle_truncated_norm"),
        b.finish("oracle_b_coeff"),
        checks.finish("oracle_condition_checks"),
    ])
}

/// Homogeneity and the triangle inequality of the truncated norm.
pub fn norm_axioms(seed: u64, cases: usize) -> Result<SuiteResult, CliError> {
    let mut r = families::rng(seed, 0x600);
    let inst: Vec<_> = (0..cases)
        .map(|_| {
            (
                families::random_series(&mut r),
                families::random_series(&mut r),
                r.gen_range(-5.0..5.0),
                families::random_weights(&mut r),
                families::random_weights(&mut r),
                r.gen_range(1.0..3.0),
            )
        })
        .collect();
    let w = TruncWindow::new(40, 8, 1);
    let len = w.m_max + w.n_max + 1;
    let tally = gather(&inst, |(sa, sb, lambda, p, u, k)| {
        let (a, b) = (SeriesView::new(sa.clone())?, SeriesView::new(sb.clone())?);
        let mp = MethodParams::new(WeightSeq::new(p.clone())?, WeightSeq::new(u.clone())?, *k)?;
        let na = summability::truncated_norm(&a, &mp, &w)?;
        let nb = summability::truncated_norm(&b, &mp, &w)?;
        let ns = summability::truncated_norm(&SeriesView::linear_combination(*lambda, &a, 0.0, &b, len)?, &mp, &w)?;
        let nsum = summability::truncated_norm(&SeriesView::linear_combination(1.0, &a, 1.0, &b, len)?, &mp, &w)?;
        let mut t = Tally::default();
        t.add(ratio(ns, lambda.abs() * na, 0.0, HOMOGENEITY_REL), || format!("{sa:?} lambda={lambda}: {ns} vs {}", lambda.abs() * na));
        let excess = nsum - (na + nb);
        t.add(excess.max(0.0) / (TRIANGLE_SLACK * (na + nb).max(1.0)), || format!("{sa:?} + {sb:?}: {nsum} > {na} + {nb}"));
        Ok(t)
    })?;
    Ok(tally.finish("norm_axioms"))
}

/// Matrices classified PASS_AT_SCALE must map the test sequences into the
/// space: `A(e^j)` for the `ℓ₁` class, `A(e)` and `A(e^j)` for the `c` class.
pub fn classifier_consistency(seed: u64, window: &TruncWindow) -> Result<SuiteResult, CliError> {
    let zoo = families::matrix_zoo(seed);
    let mut cases = Vec::new();
    for z in &zoo {
        for k in [1.0, 2.0] {
            cases.push((z, k));
        }
    }
    let parts: Vec<Result<(Tally, bool, bool), CliError>> = cases
        .par_iter()
        .map(|(z, k)| {
            let (name, a) = (z.name, &z.matrix);
            let window = &TruncWindow { m_max: (window.m_max / z.m_shrink).max(1), ..*window };
            let rows = 4 * (window.m_max + window.n_max) + 1;
            let mp = MethodParams::unit(*k)?;
            let mut t = Tally::default();
            let l1 = matrixclass::classify_l1(a, &mp, window)?.verdict == Verdict::PassAtScale;
            let c = matrixclass::classify_c(a, &mp, window)?.verdict == Verdict::PassAtScale;
            let member = |x: &SeriesView, waiver: bool| -> Result<Verdict, CliError> {
                let image = matrixclass::image_series(a, x, rows, window.j_max, waiver)?;
                Ok(summability::membership(&image, &mp, window)?.verdict())
            };
            if l1 || c {
                for j in 0..=window.j_max {
                    let v = member(&SeriesView::new(SeriesKind::UnitBasis { index: j })?, false)?;
                    t.check(v == Verdict::PassAtScale, || format!("{name} k={k}: A(e^{j}) is {}", v.as_str()));
                }
            }
            if c {
                let v = member(&SeriesView::new(SeriesKind::Power { decay: 0.0 })?, true)?;
                t.check(v == Verdict::PassAtScale, || format!("{name} k={k}: A(e) is {}", v.as_str()));
            }
            Ok((t, l1, c))
        })
        .collect();
    let (mut tally, mut any_l1, mut any_c) = (Tally::default(), false, false);
    for p in parts {
        let (t, l1, c) = p?;
        tally = tally.merge(t);
        any_l1 |= l1;
        any_c |= c;
    }
    tally.check(any_l1 && any_c, || "no zoo member classified PASS_AT_SCALE; the check would be vacuous".into());
    Ok(tally.finish("classifier_consistency"))
}

/// Runs every suite in a fixed order.
pub fn verify_all(seed: u64, scale: Scale, opts: VerifyOptions) -> Result<VerifyReport, CliError> {
    let plan = Plan::for_scale(scale);
    let mut suites = Vec::new();
    let mut suite_seconds = Vec::new();
    let mut timed = |f: &dyn Fn() -> Result<Vec<SuiteResult>, CliError>| -> Result<(), CliError> {
        let start = Instant::now();
        let done = f()?;
        let secs = start.elapsed().as_secs_f64() / done.len() as f64;
        for s in done {
            suite_seconds.push((s.name, secs));
            suites.push(s);
        }
        Ok(())
    };
    timed(&|| Ok(vec![difference_identity(plan.difference.0, plan.difference.1)?]))?;
    timed(&|| Ok(vec![recovery(plan.recovery.0, plan.recovery.1, opts)?]))?;
    timed(&|| Ok(vec![psi_specialization(&plan.specialization, seed)?]))?;
    timed(&|| Ok(vec![bounded_partial_sums(&plan.bs_window, plan.series_probe)?]))?;
    timed(&|| Ok(vec![inclusion_bound(&plan.inclusion)?]))?;
    timed(&|| Ok(vec![sandwich(seed, plan.sandwich_cases, plan.sandwich_rows)?]))?;
    timed(&|| Ok(vec![interchange(seed, plan.interchange_cases)?]))?;
    timed(&|| oracle_equivalence(seed, plan.oracle_cases))?;
    timed(&|| Ok(vec![norm_axioms(seed, plan.norm_cases)?]))?;
    timed(&|| Ok(vec![classifier_consistency(seed, &plan.classifier)?]))?;
    Ok(VerifyReport {
        seed,
        scale,
        passed: suites.iter().all(|s| s.passed),
        cases: suites.iter().map(|s| s.cases).sum(),
        failures: suites.iter().map(|s| s.failures).sum(),
        plan,
        suites,
        suite_seconds,
    })
}
