//! Turning truncated sums into verdicts.
//!
//! "Uniformly in n" is realised as the supremum over a finite shift window.
//! A family of non-negative term sequences `t_n(m)` (one per shift `n`) is
//! summarised by
//!
//! - tails `Σ_{m=M}^{m_max} t_n(m)` on the cut grid `M ∈ {0, 1, 2, 4, …, m_max}`,
//! - the supremum over `n` of each complete dyadic block `[2^i, 2^{i+1})`,
//! - the supremum over `n` of the totals on the base window and on the
//!   windows enlarged twice and four times in both `m` and `n`.
//!
//! A family FAILs when the totals grow by at least [`DIVERGENCE_GROWTH`] on
//! both enlargements (or overflow). It PASSes at scale when the last dyadic
//! blocks shrink geometrically (ratio at most [`DECAY_RATIO`]) and the
//! uniform tail drops below `abs_tol` at some cut. Anything else is
//! INCONCLUSIVE.

use serde::{Deserialize, Serialize};

use crate::compensated::Neumaier;

/// Per-doubling growth of the sampled totals that counts as divergence.
pub const DIVERGENCE_GROWTH: f64 = 1.5;
/// Largest ratio between successive dyadic blocks that counts as decay.
pub const DECAY_RATIO: f64 = 0.9;
/// Largest per-doubling growth of a supremum that counts as stable.
pub const STABLE_GROWTH: f64 = 1.05;
/// Number of trailing dyadic ratios inspected.
pub const DECAY_WINDOW: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    PassAtScale,
    Inconclusive,
    Fail,
}

impl Verdict {
    /// Conjunction: FAIL dominates INCONCLUSIVE, which dominates PASS.
    pub fn and(self, other: Verdict) -> Verdict {
        self.max(other)
    }

    fn rank(self) -> u8 {
        match self {
            Verdict::PassAtScale => 0,
            Verdict::Inconclusive => 1,
            Verdict::Fail => 2,
        }
    }

    fn max(self, other: Verdict) -> Verdict {
        if other.rank() > self.rank() {
            other
        } else {
            self
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::PassAtScale => "PASS_AT_SCALE",
            Verdict::Inconclusive => "INCONCLUSIVE",
            Verdict::Fail => "FAIL",
        }
    }

    pub fn is_pass(self) -> bool {
        self == Verdict::PassAtScale
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Scale factors of the window enlargements.
pub const SCALES: [usize; 3] = [1, 2, 4];

/// Cut points `0, 1, 2, 4, …, 2^L <= m_max` followed by `m_max`.
pub fn cut_grid(m_max: usize) -> Vec<usize> {
    let mut grid = vec![0];
    let mut c = 1;
    while c <= m_max {
        grid.push(c);
        c *= 2;
    }
    if *grid.last().unwrap() != m_max {
        grid.push(m_max);
    }
    grid
}

/// Summary of one shift's term sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnSummary {
    /// Block sums between consecutive grid cuts; the last block is
    /// `[grid.last(), m_max]`.
    pub blocks: Vec<f64>,
    /// Running totals up to `m_max`, `2·m_max`, `4·m_max`.
    pub totals: [f64; 3],
}

/// Consumes up to `4·m_max + 1` non-negative terms.
pub fn summarize_column<I: IntoIterator<Item = f64>>(terms: I, grid: &[usize], m_max: usize) -> ColumnSummary {
    let mut blocks = vec![Neumaier::new(); grid.len()];
    let mut running = Neumaier::new();
    let mut totals = [0.0; 3];
    let mut block = 0;
    let mut last_m = None;
    for (m, t) in terms.into_iter().enumerate() {
        running.add(t);
        if m <= m_max {
            while block + 1 < grid.len() && m >= grid[block + 1] {
                block += 1;
            }
            blocks[block].add(t);
        }
        for (slot, s) in SCALES.iter().enumerate() {
            if m == s * m_max {
                totals[slot] = running.value();
            }
        }
        last_m = Some(m);
    }
    // shorter columns only contribute to the scales they reach
    if let Some(last) = last_m {
        for (slot, s) in SCALES.iter().enumerate() {
            if last < s * m_max {
                totals[slot] = f64::NAN;
            }
        }
    }
    ColumnSummary { blocks: blocks.iter().map(Neumaier::value).collect(), totals }
}

/// Evidence for one family of shift-indexed term sequences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailEvidence {
    pub grid: Vec<usize>,
    /// Per `n <= n_max`: `Σ_{m=0}^{m_max} t_n(m)` (equal to `tails[n][0]`).
    pub totals: Vec<f64>,
    /// Per `n <= n_max`, per grid cut: `Σ_{m=M}^{m_max} t_n(m)`.
    pub tails: Vec<Vec<f64>>,
    /// Per grid cut: `sup_n` of the tails.
    pub sup_tails: Vec<f64>,
    /// `sup_n` of the complete dyadic blocks `[2^i, 2^{i+1})`.
    pub dyadic_sups: Vec<f64>,
    /// Ratios between the trailing dyadic blocks.
    pub decay_ratios: Vec<f64>,
    /// `sup_n` totals on the base, doubled and quadrupled windows.
    pub scale_sups: [f64; 3],
    /// `scale_sups[1]/scale_sups[0]`, `scale_sups[2]/scale_sups[1]`.
    pub growth: [f64; 2],
    /// First grid cut whose uniform tail is below `abs_tol`.
    pub pass_cut: Option<usize>,
    /// Geometric extrapolation of the uniform tail beyond the last complete
    /// dyadic block, when the blocks decay.
    pub extrapolated_tail: Option<f64>,
    /// Shift attaining the largest base-window total.
    pub witness_n: usize,
    pub verdict: Verdict,
}

fn ratio(num: f64, den: f64) -> f64 {
    if num == 0.0 && den == 0.0 {
        0.0
    } else if den == 0.0 {
        f64::INFINITY
    } else {
        num / den
    }
}

fn growth_ratio(num: f64, den: f64) -> f64 {
    if num == 0.0 && den == 0.0 {
        1.0
    } else {
        ratio(num, den)
    }
}

/// Growth of a supremum across the enlargements.
pub fn growth(scale_sups: &[f64; 3]) -> [f64; 2] {
    [growth_ratio(scale_sups[1], scale_sups[0]), growth_ratio(scale_sups[2], scale_sups[1])]
}

/// True when both enlargements grow the totals by [`DIVERGENCE_GROWTH`] or
/// more, or when anything overflowed.
pub fn diverging(scale_sups: &[f64; 3]) -> bool {
    if scale_sups.iter().any(|s| !s.is_finite()) {
        return true;
    }
    let g = growth(scale_sups);
    g[0] >= DIVERGENCE_GROWTH && g[1] >= DIVERGENCE_GROWTH
}

/// Verdict for a supremum that must stay bounded: FAIL on divergence,
/// PASS when both enlargements change it by at most [`STABLE_GROWTH`].
pub fn sup_verdict(scale_sups: &[f64; 3]) -> Verdict {
    if diverging(scale_sups) {
        return Verdict::Fail;
    }
    let g = growth(scale_sups);
    if g[0] <= STABLE_GROWTH && g[1] <= STABLE_GROWTH {
        Verdict::PassAtScale
    } else {
        Verdict::Inconclusive
    }
}

/// Aggregates column summaries for shifts `0..columns.len()`; columns with
/// `n <= n_max` form the base window.
pub fn assess(columns: &[ColumnSummary], grid: &[usize], n_max: usize, abs_tol: f64) -> TailEvidence {
    let base = &columns[..=n_max.min(columns.len() - 1)];

    let tails: Vec<Vec<f64>> = base
        .iter()
        .map(|c| {
            let mut suffix = vec![0.0; c.blocks.len()];
            let mut acc = 0.0;
            for i in (0..c.blocks.len()).rev() {
                acc += c.blocks[i];
                suffix[i] = acc;
            }
            suffix
        })
        .collect();
    let totals: Vec<f64> = tails.iter().map(|t| t[0]).collect();

    let sup_tails: Vec<f64> = (0..grid.len()).map(|i| tails.iter().map(|t| t[i]).fold(0.0, f64::max)).collect();

    // complete dyadic blocks sit between grid cuts 2^i and 2^{i+1}
    let dyadic_sups: Vec<f64> = (1..grid.len())
        .filter(|&i| i + 1 < grid.len() && grid[i + 1] == 2 * grid[i])
        .map(|i| base.iter().map(|c| c.blocks[i]).fold(0.0, f64::max))
        .collect();
    let all_ratios: Vec<f64> = dyadic_sups.windows(2).map(|w| ratio(w[1], w[0])).collect();
    let decay_ratios = all_ratios[all_ratios.len().saturating_sub(DECAY_WINDOW)..].to_vec();
    let nothing_after_first = dyadic_sups.iter().all(|d| *d == 0.0) && sup_tails.get(1).is_none_or(|t| *t == 0.0);
    let decaying = nothing_after_first || (decay_ratios.len() >= 2 && decay_ratios.iter().all(|r| *r <= DECAY_RATIO));

    let mut scale_sups = [0.0f64; 3];
    for (slot, s) in SCALES.iter().enumerate() {
        let upto = (s * n_max).min(columns.len() - 1);
        scale_sups[slot] = columns[..=upto].iter().map(|c| c.totals[slot]).fold(0.0, |acc, x| {
            if x.is_nan() || acc.is_nan() {
                f64::NAN
            } else {
                acc.max(x)
            }
        });
    }
    let growth = growth(&scale_sups);

    let pass_cut = sup_tails.iter().position(|t| *t < abs_tol).map(|i| grid[i]);
    let extrapolated_tail = match (dyadic_sups.last(), decay_ratios.last()) {
        (Some(&d), Some(&r)) if r < 1.0 => Some(d * r / (1.0 - r)),
        _ => None,
    };
    let witness_n = totals
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (n, &t)| if t > best.1 { (n, t) } else { best })
        .0;

    let verdict = if diverging(&scale_sups) || totals.iter().any(|t| !t.is_finite()) {
        Verdict::Fail
    } else if decaying && pass_cut.is_some() {
        Verdict::PassAtScale
    } else {
        Verdict::Inconclusive
    };

    TailEvidence {
        grid: grid.to_vec(),
        totals,
        tails,
        sup_tails,
        dyadic_sups,
        decay_ratios,
        scale_sups,
        growth,
        pass_cut,
        extrapolated_tail,
        witness_n,
        verdict,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn evidence(term: impl Fn(usize, usize) -> f64, m_max: usize, n_max: usize) -> TailEvidence {
        let grid = cut_grid(m_max);
        let cols: Vec<_> =
            (0..=4 * n_max).map(|n| summarize_column((0..=4 * m_max).map(|m| term(m, n)), &grid, m_max)).collect();
        assess(&cols, &grid, n_max, 1e-6)
    }

    #[test]
    fn grid_shape() {
        assert_eq!(cut_grid(1), vec![0, 1]);
        assert_eq!(cut_grid(8), vec![0, 1, 2, 4, 8]);
        assert_eq!(cut_grid(10), vec![0, 1, 2, 4, 8, 10]);
    }

    #[test]
    fn verdict_order() {
        assert_eq!(Verdict::PassAtScale.and(Verdict::Inconclusive), Verdict::Inconclusive);
        assert_eq!(Verdict::Inconclusive.and(Verdict::Fail), Verdict::Fail);
        assert_eq!(Verdict::PassAtScale.and(Verdict::PassAtScale), Verdict::PassAtScale);
        assert_eq!(Verdict::PassAtScale.to_string(), "PASS_AT_SCALE");
    }

    #[test]
    fn convergent_family_passes() {
        let e = evidence(|m, _| if m == 0 { 1.0 } else { 1.0 / (m * m) as f64 }, 1024, 4);
        assert_eq!(e.verdict, Verdict::PassAtScale);
        assert!(e.decay_ratios.iter().all(|r| (r - 0.5).abs() < 0.01));
        for t in &e.tails {
            assert!(t.windows(2).all(|w| w[1] <= w[0]));
        }
        assert_eq!(e.totals[0], e.tails[0][0]);
    }

    #[test]
    fn linear_growth_fails() {
        let e = evidence(|_, _| 0.5, 256, 4);
        assert_eq!(e.verdict, Verdict::Fail);
        assert!(e.growth.iter().all(|g| (g - 2.0).abs() < 0.01));
    }

    #[test]
    fn harmonic_is_inconclusive() {
        let e = evidence(|m, _| 1.0 / (m + 1) as f64, 4096, 2);
        assert_eq!(e.verdict, Verdict::Inconclusive);
    }

    #[test]
    fn zero_family_passes() {
        let e = evidence(|_, _| 0.0, 64, 4);
        assert_eq!(e.verdict, Verdict::PassAtScale);
        assert!(e.totals.iter().all(|t| *t == 0.0));
    }

    #[test]
    fn growth_in_n_fails() {
        let e = evidence(|m, n| if m == 0 { (n + 1) as f64 } else { 0.0 }, 64, 8);
        assert_eq!(e.verdict, Verdict::Fail);
        assert_eq!(e.witness_n, 8);
    }

    #[test]
    fn sup_verdicts() {
        assert_eq!(sup_verdict(&[1.0, 1.0, 1.0]), Verdict::PassAtScale);
        assert_eq!(sup_verdict(&[1.0, 2.0, 4.0]), Verdict::Fail);
        assert_eq!(sup_verdict(&[1.0, 1.2, 1.3]), Verdict::Inconclusive);
        assert_eq!(sup_verdict(&[0.0, 0.0, 0.0]), Verdict::PassAtScale);
        assert_eq!(sup_verdict(&[1.0, f64::INFINITY, 1.0]), Verdict::Fail);
    }
}
