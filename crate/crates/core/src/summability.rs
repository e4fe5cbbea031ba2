//! Truncated `|f(N̄_p^u)|_k` norms, membership evidence, the inclusion
//! hypotheses and the almost-convergence tester.

use serde::{Deserialize, Serialize};

use crate::compensated::Neumaier;
use crate::par;
use crate::seqcore::{SeriesView, TruncWindow, WeightSeq};
use crate::transform::{self, kernel_column, Kernel, PsiKernel, WeightedKernel};
use crate::verdict::{self, TailEvidence, Verdict, SCALES};
use crate::{Error, Result};

/// The method `|f(N̄_p), u_m|_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodParams {
    pub p: WeightSeq,
    pub u: WeightSeq,
    pub k: f64,
}

impl MethodParams {
    pub fn new(p: WeightSeq, u: WeightSeq, k: f64) -> Result<Self> {
        if !(k.is_finite() && k >= 1.0) {
            return Err(Error::InvalidParameter(format!("summability index k = {k} must be >= 1")));
        }
        Ok(Self { p, u, k })
    }

    /// `p = u = 1`, the space `ℓ̂_k`.
    pub fn unit(k: f64) -> Result<Self> {
        Self::new(WeightSeq::unit(), WeightSeq::unit(), k)
    }

    /// `u_m^{k-1}` for `m < len`.
    pub fn u_powers(&self, len: usize) -> Result<Vec<f64>> {
        unit_or_powers(&self.u, self.k, len)
    }
}

fn unit_or_powers(u: &WeightSeq, k: f64, len: usize) -> Result<Vec<f64>> {
    if k == 1.0 || u.is_unit() {
        return Ok(vec![1.0; len]);
    }
    Ok(u.weights(len)?.into_iter().map(|x| x.powf(k - 1.0)).collect())
}

/// `|x|^k`.
#[inline]
pub fn abs_pow(x: f64, k: f64) -> f64 {
    if k == 1.0 {
        x.abs()
    } else if k == 2.0 {
        x * x
    } else {
        x.abs().powf(k)
    }
}

/// Per-shift `Σ_{m=0}^{m_max} u_m^{k-1} |K_{m,n}|^k` for `n <= n_max`.
fn kernel_totals<K: Kernel>(kernel: &K, terms: &[f64], u_pow: &[f64], k: f64, m_max: usize, n_max: usize) -> Vec<f64> {
    par::map_range(0..n_max + 1, |n| {
        kernel_column(kernel, terms, n, m_max).zip(u_pow).map(|(f, w)| w * abs_pow(f, k)).collect::<Neumaier>().value()
    })
}

fn norm_from_totals(totals: &[f64], k: f64) -> Result<f64> {
    let mut sup: f64 = 0.0;
    for (n, t) in totals.iter().enumerate() {
        if !t.is_finite() {
            return Err(Error::NormOverflow { n });
        }
        sup = sup.max(*t);
    }
    Ok(if k == 1.0 { sup } else { sup.powf(1.0 / k) })
}

/// `sup_{n <= n_max} (Σ_{m=0}^{m_max} u_m^{k-1} |F_{m,n}(a)|^k)^{1/k}`.
pub fn truncated_norm(a: &SeriesView, mp: &MethodParams, window: &TruncWindow) -> Result<f64> {
    window.validate()?;
    let (m_max, n_max) = (window.m_max, window.n_max);
    let kernel = WeightedKernel::new(&mp.p, m_max)?;
    let u_pow = mp.u_powers(m_max + 1)?;
    let terms = a.terms(m_max + n_max + 1);
    norm_from_totals(&kernel_totals(&kernel, &terms, &u_pow, mp.k, m_max, n_max), mp.k)
}

/// The truncated `ℓ̂_k` norm, computed from `ψ_{m,n}`.
pub fn lhat_norm(a: &SeriesView, k: f64, window: &TruncWindow) -> Result<f64> {
    window.validate()?;
    MethodParams::unit(k)?;
    let (m_max, n_max) = (window.m_max, window.n_max);
    let terms = a.terms(m_max + n_max + 1);
    let ones = vec![1.0; m_max + 1];
    norm_from_totals(&kernel_totals(&PsiKernel, &terms, &ones, k, m_max, n_max), k)
}

/// Membership evidence for one series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MembershipEvidence {
    pub window: TruncWindow,
    pub k: f64,
    #[serde(flatten)]
    pub tails: TailEvidence,
}

impl MembershipEvidence {
    pub fn verdict(&self) -> Verdict {
        self.tails.verdict
    }
}

/// Tail evidence for `t_n(m) = u_m^{k-1}|K_{m,n}|^k` over the window and its
/// enlargements. `terms` and `u_pow` must cover the four-fold window.
pub(crate) fn tail_evidence<K: Kernel>(kernel: &K, terms: &[f64], u_pow: &[f64], k: f64, window: &TruncWindow) -> TailEvidence {
    let big = window.scaled(SCALES[2]);
    let grid = verdict::cut_grid(window.m_max);
    let columns = par::map_range(0..big.n_max + 1, |n| {
        let col = kernel_column(kernel, terms, n, big.m_max).zip(u_pow).map(|(f, w)| w * abs_pow(f, k));
        verdict::summarize_column(col, &grid, window.m_max)
    });
    verdict::assess(&columns, &grid, window.n_max, window.abs_tol)
}

/// Tail evidence for `Σ_m u_m^{k-1}|F_{m,n}(a)|^k` uniformly over the
/// shift window. Divergence is judged on the window enlarged two and four
/// times in both `m` and `n`.
pub fn membership(a: &SeriesView, mp: &MethodParams, window: &TruncWindow) -> Result<MembershipEvidence> {
    window.validate()?;
    let big = window.scaled(SCALES[2]);
    let kernel = WeightedKernel::new(&mp.p, big.m_max)?;
    let u_pow = mp.u_powers(big.m_max + 1)?;
    let terms = a.terms(big.m_max + big.n_max + 1);
    Ok(MembershipEvidence { window: *window, k: mp.k, tails: tail_evidence(&kernel, &terms, &u_pow, mp.k, window) })
}

/// [`membership`] for `ℓ̂_k`, driven by `ψ_{m,n}`.
pub fn lhat_membership(a: &SeriesView, k: f64, window: &TruncWindow) -> Result<MembershipEvidence> {
    window.validate()?;
    MethodParams::unit(k)?;
    let big = window.scaled(SCALES[2]);
    let terms = a.terms(big.m_max + big.n_max + 1);
    let ones = vec![1.0; big.m_max + 1];
    Ok(MembershipEvidence { window: *window, k, tails: tail_evidence(&PsiKernel, &terms, &ones, k, window) })
}

/// Outcome of the `(1/u_m) ∈ ℓ_∞` probe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UBoundReport {
    pub probe: usize,
    pub bounded: bool,
    /// `max_{m <= probe} 1/u_m`.
    pub sampled_sup: f64,
    pub sup_before_last_decade: f64,
    pub sup_last_decade: f64,
}

/// Probes `sup_m 1/u_m` over `[0, probe]`. The sup counts as stable when
/// the last decade `[probe/10, probe]` does not exceed the earlier maximum
/// by more than [`verdict::STABLE_GROWTH`].
pub fn check_u_bounded(mp: &MethodParams, probe: usize) -> Result<UBoundReport> {
    if probe < 1 {
        return Err(Error::InvalidParameter("probe must be >= 1".into()));
    }
    let u = mp.u.weights(probe + 1)?;
    let split = (probe / 10).max(1);
    let inv_max = |s: &[f64]| s.iter().map(|x| 1.0 / x).fold(0.0, f64::max);
    let before = inv_max(&u[..split]);
    let last = inv_max(&u[split..]);
    Ok(UBoundReport {
        probe,
        bounded: last <= before * verdict::STABLE_GROWTH,
        sampled_sup: before.max(last),
        sup_before_last_decade: before,
        sup_last_decade: last,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SeriesTrend {
    Convergent,
    Divergent,
    Inconclusive,
}

/// Partial sums of `Σ u_m^{k-1} (p_m/P_m)^k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesConditionReport {
    pub probe: usize,
    pub partial_sum: f64,
    /// Sums over `[probe/100, probe/10)` and `[probe/10, probe]`.
    pub decade_increments: [f64; 2],
    pub increment_ratio: f64,
    /// `(m, p_m/P_m)` at `m = probe/100, probe/10, probe`.
    pub weight_ratios: Vec<(usize, f64)>,
    pub trend: SeriesTrend,
}

/// Increment ratio at or below which the series counts as convergent.
pub const CONVERGENT_DECADE_RATIO: f64 = 0.5;
/// Increment ratio at or above which the series counts as divergent.
pub const DIVERGENT_DECADE_RATIO: f64 = 0.9;

pub fn check_series_condition(mp: &MethodParams, probe: usize) -> Result<SeriesConditionReport> {
    if probe < 1 {
        return Err(Error::InvalidParameter("probe must be >= 1".into()));
    }
    let w = mp.p.table(probe + 1)?;
    let u_pow = mp.u_powers(probe + 1)?;
    let (c1, c2) = (probe / 100, probe / 10);
    let mut total = Neumaier::new();
    let mut prev = Neumaier::new();
    let mut last = Neumaier::new();
    for m in 0..=probe {
        let t = u_pow[m] * abs_pow(w.p[m] / w.cum[m], mp.k);
        total.add(t);
        if m >= c2 {
            last.add(t);
        } else if m >= c1 {
            prev.add(t);
        }
    }
    let (prev, last) = (prev.value(), last.value());
    let ratio = if last == 0.0 { 0.0 } else if prev == 0.0 { f64::INFINITY } else { last / prev };
    let trend = if ratio <= CONVERGENT_DECADE_RATIO {
        SeriesTrend::Convergent
    } else if ratio >= DIVERGENT_DECADE_RATIO {
        SeriesTrend::Divergent
    } else {
        SeriesTrend::Inconclusive
    };
    Ok(SeriesConditionReport {
        probe,
        partial_sum: total.value(),
        decade_increments: [prev, last],
        increment_ratio: ratio,
        weight_ratios: [c1, c2, probe].iter().map(|&m| (m, w.p[m] / w.cum[m])).collect(),
        trend,
    })
}

/// Sliding means `(1/(m+1)) Σ_{v=0}^{m} x_{n+v}` at `m = m_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlmostConvergenceReport {
    pub m: usize,
    pub means: Vec<f64>,
    /// Median of the means over the shift window.
    pub gamma: f64,
    /// `sup_n |mean_n - gamma|`.
    pub deviation: f64,
}

/// Treats the terms of `x` as a sequence and estimates its almost limit.
pub fn almost_convergence(x: &SeriesView, window: &TruncWindow) -> Result<AlmostConvergenceReport> {
    window.validate()?;
    let (m, n_max) = (window.m_max, window.n_max);
    let xs = x.terms(m + n_max + 1);
    if let Some(i) = xs.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(format!("sequence is not finite at index {i}")));
    }
    let means: Vec<f64> = (0..=n_max)
        .map(|n| xs[n..=n + m].iter().copied().collect::<Neumaier>().value() / (m as f64 + 1.0))
        .collect();
    let mut sorted = means.clone();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    let gamma = if sorted.len() % 2 == 1 { sorted[mid] } else { 0.5 * (sorted[mid - 1] + sorted[mid]) };
    let deviation = means.iter().map(|v| (v - gamma).abs()).fold(0.0, f64::max);
    Ok(AlmostConvergenceReport { m, means, gamma, deviation })
}

/// Comparison of `Σ u^{k-1}|F_{m,n}|^k` with `(4 M_bs)^k Σ u^{k-1}(p_m/P_m)^k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InclusionReport {
    pub m_bs: f64,
    pub rhs: f64,
    pub lhs: Vec<f64>,
    pub max_ratio: f64,
    pub witness_n: usize,
    pub holds: bool,
}

/// Relative slack allowed for rounding when comparing the two sides.
pub const INCLUSION_SLACK: f64 = 1e-12;

pub fn inclusion_bound_check(a: &SeriesView, mp: &MethodParams, window: &TruncWindow) -> Result<InclusionReport> {
    window.validate()?;
    if mp.k <= 1.0 {
        return Err(Error::InvalidParameter("the bs inclusion bound needs k > 1".into()));
    }
    let m_bs = a.partial_sum_bound().ok_or(Error::NotBoundedSeries)?;
    let (m_max, n_max) = (window.m_max, window.n_max);
    let kernel = WeightedKernel::new(&mp.p, m_max)?;
    let u_pow = mp.u_powers(m_max + 1)?;
    let w = kernel.weights();
    let series: f64 = (0..=m_max).map(|m| u_pow[m] * abs_pow(w.p[m] / w.cum[m], mp.k)).collect::<Neumaier>().value();
    let rhs = abs_pow(4.0 * m_bs, mp.k) * series;
    let terms = a.terms(m_max + n_max + 1);
    let lhs = kernel_totals(&kernel, &terms, &u_pow, mp.k, m_max, n_max);
    let ratios: Vec<f64> = lhs
        .iter()
        .map(|&l| if l == 0.0 { 0.0 } else if rhs == 0.0 { f64::INFINITY } else { l / rhs })
        .collect();
    let (witness_n, max_ratio) =
        ratios.iter().copied().enumerate().fold((0, 0.0), |best, (n, r)| if r > best.1 { (n, r) } else { best });
    Ok(InclusionReport { m_bs, rhs, lhs, max_ratio, witness_n, holds: max_ratio <= 1.0 + INCLUSION_SLACK })
}

/// Cell-wise check of `|a_{m+n}| <= (P_m/p_m)|F_{m,n}| + (P_{m-2}/p_{m-1})|F_{m-1,n}|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionReport {
    pub cells: usize,
    pub violations: usize,
    /// Largest `|a_{m+n}|` over the window.
    pub sup_term: f64,
    /// Largest bound over the window.
    pub sup_bound: f64,
}

pub fn reconstruction_bound_check(a: &SeriesView, p: &WeightSeq, window: &TruncWindow) -> Result<ReconstructionReport> {
    let table = transform::fill_table(a, p, window)?;
    let terms = a.terms(window.m_max + window.n_max + 1);
    let mut report = ReconstructionReport { cells: 0, violations: 0, sup_term: 0.0, sup_bound: 0.0 };
    for m in 1..=window.m_max {
        for n in 0..=window.n_max {
            let bound = transform::recovery_bound(&table, m, n)?;
            let t = terms[m + n].abs();
            report.cells += 1;
            if t > bound * (1.0 + 1e-12) {
                report.violations += 1;
            }
            report.sup_term = report.sup_term.max(t);
            report.sup_bound = report.sup_bound.max(bound);
        }
    }
    Ok(report)
}
