//! Weight sequences, series generators and the truncation window.
//!
//! Both [`WeightSeq`] and [`SeriesView`] are immutable descriptions with an
//! internal, append-only cache. Readers only ever observe completed
//! prefixes: extension happens under a write lock and appends whole
//! entries, and the compensated accumulator state is stored alongside the
//! prefix so a later extension continues the exact same summation.

use std::sync::RwLock;

use serde::{Deserialize, Serialize};

use crate::compensated::Neumaier;
use crate::{Error, Result};

/// Closed-form positive weight families. The same type describes both the
/// weights `p` and the factor sequence `u`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightKind {
    /// `p_n = 1`.
    Unit,
    /// `p_n = first + step·n`.
    Arithmetic { first: f64, step: f64 },
    /// `p_n = first·ratio^n`.
    Geometric { first: f64, ratio: f64 },
    /// `p_n = scale·(n+1)^exponent`.
    Power { scale: f64, exponent: f64 },
    /// `p_n = base + amplitude·sin(n)`.
    Oscillating { base: f64, amplitude: f64 },
    /// Finite list; indices past the end are an error.
    Explicit { values: Vec<f64> },
}

impl WeightKind {
    fn validate(&self) -> Result<()> {
        let finite = |name: &str, x: f64| {
            if x.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} must be finite")))
            }
        };
        match *self {
            WeightKind::Unit => Ok(()),
            WeightKind::Arithmetic { first, step } => {
                finite("first", first)?;
                finite("step", step)?;
                if first <= 0.0 || step < 0.0 {
                    return Err(Error::InvalidParameter(
                        "arithmetic weights need first > 0 and step >= 0".into(),
                    ));
                }
                Ok(())
            }
            WeightKind::Geometric { first, ratio } => {
                finite("first", first)?;
                finite("ratio", ratio)?;
                if first <= 0.0 || ratio <= 0.0 {
                    return Err(Error::InvalidParameter(
                        "geometric weights need first > 0 and ratio > 0".into(),
                    ));
                }
                Ok(())
            }
            WeightKind::Power { scale, exponent } => {
                finite("scale", scale)?;
                finite("exponent", exponent)?;
                if scale <= 0.0 {
                    return Err(Error::InvalidParameter("power weights need scale > 0".into()));
                }
                Ok(())
            }
            WeightKind::Oscillating { base, amplitude } => {
                finite("base", base)?;
                finite("amplitude", amplitude)?;
                if base <= amplitude.abs() {
                    return Err(Error::InvalidParameter(
                        "oscillating weights need base > |amplitude|".into(),
                    ));
                }
                Ok(())
            }
            WeightKind::Explicit { ref values } => {
                if values.is_empty() {
                    return Err(Error::InvalidParameter("explicit weight list is empty".into()));
                }
                Ok(())
            }
        }
    }

    /// Closed-form weight at `n`, validated to be finite and positive.
    pub fn weight_at(&self, n: usize) -> Result<f64> {
        let x = n as f64;
        let value = match *self {
            WeightKind::Unit => 1.0,
            WeightKind::Arithmetic { first, step } => first + step * x,
            WeightKind::Geometric { first, ratio } => first * pow_index(ratio, n),
            WeightKind::Power { scale, exponent } => scale * (x + 1.0).powf(exponent),
            WeightKind::Oscillating { base, amplitude } => base + amplitude * x.sin(),
            WeightKind::Explicit { ref values } => *values
                .get(n)
                .ok_or(Error::WeightIndexOutOfRange { index: n, len: values.len() })?,
        };
        if value.is_infinite() {
            return Err(Error::WeightOverflow { index: n });
        }
        if !(value > 0.0) {
            return Err(Error::NonPositiveWeight { index: n, value });
        }
        Ok(value)
    }
}

fn pow_index(base: f64, n: usize) -> f64 {
    match i32::try_from(n) {
        Ok(e) => base.powi(e),
        Err(_) => base.powf(n as f64),
    }
}

#[derive(Debug, Clone, Default)]
struct WeightCache {
    p: Vec<f64>,
    cum: Vec<f64>,
    acc: Neumaier,
    /// First index at which `P_n` failed to grow (or overflowed).
    stalled: Option<(usize, bool)>,
}

/// A positive weight sequence `p` with cached cumulative sums
/// `P_n = p_0 + … + p_n`, `P_{-1} = 0`.
#[derive(Debug)]
pub struct WeightSeq {
    kind: WeightKind,
    cache: RwLock<WeightCache>,
}

impl Clone for WeightSeq {
    fn clone(&self) -> Self {
        let cache = self.cache.read().expect("weight cache poisoned").clone();
        Self { kind: self.kind.clone(), cache: RwLock::new(cache) }
    }
}

impl PartialEq for WeightSeq {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

/// Owned copy of a cached weight prefix.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightTable {
    pub p: Vec<f64>,
    pub cum: Vec<f64>,
}

impl WeightTable {
    /// `P_{n}` with `P_{-1} = 0`.
    #[inline]
    pub fn cum_signed(&self, n: i64) -> f64 {
        if n < 0 {
            0.0
        } else {
            self.cum[n as usize]
        }
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }
}

impl WeightSeq {
    pub fn new(kind: WeightKind) -> Result<Self> {
        kind.validate()?;
        Ok(Self { kind, cache: RwLock::new(WeightCache::default()) })
    }

    pub fn unit() -> Self {
        Self::new(WeightKind::Unit).expect("unit weights are valid")
    }

    pub fn kind(&self) -> &WeightKind {
        &self.kind
    }

    pub fn is_unit(&self) -> bool {
        matches!(self.kind, WeightKind::Unit)
    }

    /// Extends the cache so that index `n` is available.
    pub fn ensure(&self, n: usize) -> Result<()> {
        if self.cache.read().expect("weight cache poisoned").p.len() > n {
            return Ok(());
        }
        let mut cache = self.cache.write().expect("weight cache poisoned");
        let start = cache.p.len();
        if start > n {
            return Ok(());
        }
        cache.p.reserve(n + 1 - start);
        cache.cum.reserve(n + 1 - start);
        for i in start..=n {
            let w = self.kind.weight_at(i)?;
            let prev = cache.acc.value();
            cache.acc.add(w);
            let total = cache.acc.value();
            if cache.stalled.is_none() {
                if total.is_infinite() {
                    cache.stalled = Some((i, true));
                } else if i > 0 && total <= prev {
                    cache.stalled = Some((i, false));
                }
            }
            cache.p.push(w);
            cache.cum.push(total);
        }
        Ok(())
    }

    pub fn weight(&self, n: usize) -> Result<f64> {
        self.ensure(n)?;
        Ok(self.cache.read().expect("weight cache poisoned").p[n])
    }

    /// `P_n` for `n >= -1`.
    pub fn cumulative(&self, n: i64) -> Result<f64> {
        if n < -1 {
            return Err(Error::InvalidParameter(format!("cumulative index {n} < -1")));
        }
        if n == -1 {
            return Ok(0.0);
        }
        let n = n as usize;
        self.ensure(n)?;
        let cache = self.cache.read().expect("weight cache poisoned");
        check_stall(cache.stalled, n)?;
        Ok(cache.cum[n])
    }

    /// Weights only (no cumulative sums), e.g. for the factor sequence `u`.
    pub fn weights(&self, len: usize) -> Result<Vec<f64>> {
        if len == 0 {
            return Ok(Vec::new());
        }
        self.ensure(len - 1)?;
        Ok(self.cache.read().expect("weight cache poisoned").p[..len].to_vec())
    }

    /// Owned prefix of weights and cumulative sums covering indices `0..len`.
    pub fn table(&self, len: usize) -> Result<WeightTable> {
        if len == 0 {
            return Ok(WeightTable { p: Vec::new(), cum: Vec::new() });
        }
        self.ensure(len - 1)?;
        let cache = self.cache.read().expect("weight cache poisoned");
        check_stall(cache.stalled, len - 1)?;
        Ok(WeightTable { p: cache.p[..len].to_vec(), cum: cache.cum[..len].to_vec() })
    }
}

fn check_stall(stalled: Option<(usize, bool)>, upto: usize) -> Result<()> {
    match stalled {
        Some((index, true)) if index <= upto => Err(Error::WeightOverflow { index }),
        Some((index, false)) if index <= upto => Err(Error::InvalidParameter(format!(
            "cumulative weights stop increasing at index {index}"
        ))),
        _ => Ok(()),
    }
}

/// Generators `s_v` for series with bounded partial sums; the series terms
/// are `a_v = s_v - s_{v-1}` with `s_{-1} = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PartialSumGenerator {
    /// `s_v = (-1)^v`.
    AlternatingSign,
    /// `s_v = sin(frequency·(v+1))`.
    Sine { frequency: f64 },
    /// `s_v = (v+1)^exponent`; bounded only for `exponent <= 0`.
    Power { exponent: f64 },
    /// `s_v = slope·v`; bounded only for `slope == 0`.
    Linear { slope: f64 },
}

impl PartialSumGenerator {
    /// `sup_v |s_v|`, or an error when the generator is unbounded.
    pub fn bound(&self) -> Result<f64> {
        match *self {
            PartialSumGenerator::AlternatingSign => Ok(1.0),
            PartialSumGenerator::Sine { frequency } => {
                if !frequency.is_finite() {
                    return Err(Error::InvalidParameter("sine frequency must be finite".into()));
                }
                Ok(1.0)
            }
            PartialSumGenerator::Power { exponent } => {
                if exponent.is_finite() && exponent <= 0.0 {
                    Ok(1.0)
                } else {
                    Err(Error::UnboundedGenerator(format!("(v+1)^{exponent}")))
                }
            }
            PartialSumGenerator::Linear { slope } => {
                if slope == 0.0 {
                    Ok(0.0)
                } else {
                    Err(Error::UnboundedGenerator(format!("{slope}·v")))
                }
            }
        }
    }

    /// `s_v` with `s_{-1} = 0`.
    pub fn value(&self, v: i64) -> f64 {
        if v < 0 {
            return 0.0;
        }
        let x = v as f64;
        match *self {
            PartialSumGenerator::AlternatingSign => {
                if v % 2 == 0 {
                    1.0
                } else {
                    -1.0
                }
            }
            PartialSumGenerator::Sine { frequency } => (frequency * (x + 1.0)).sin(),
            PartialSumGenerator::Power { exponent } => (x + 1.0).powf(exponent),
            PartialSumGenerator::Linear { slope } => slope * x,
        }
    }
}

/// Series families. Every family is a closed-form term generator except
/// `Explicit`, which is zero past the end of its list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum SeriesKind {
    /// `a_v = 1` at `v = index`, else 0.
    UnitBasis { index: usize },
    /// `a_v = ratio^v`.
    Geometric { ratio: f64 },
    /// `a_v = (v+1)^(-decay)`.
    Power { decay: f64 },
    /// `a_v = (-1)^v`.
    Alternating,
    /// Terms are differences of a bounded generator.
    BoundedPartialSums { generator: PartialSumGenerator },
    Explicit { terms: Vec<f64> },
}

impl SeriesKind {
    /// Closed-form term `a_v`.
    pub fn term_at(&self, v: usize) -> f64 {
        match *self {
            SeriesKind::UnitBasis { index } => {
                if v == index {
                    1.0
                } else {
                    0.0
                }
            }
            SeriesKind::Geometric { ratio } => pow_index(ratio, v),
            SeriesKind::Power { decay } => (v as f64 + 1.0).powf(-decay),
            SeriesKind::Alternating => {
                if v % 2 == 0 {
                    1.0
                } else {
                    -1.0
                }
            }
            SeriesKind::BoundedPartialSums { ref generator } => {
                generator.value(v as i64) - generator.value(v as i64 - 1)
            }
            SeriesKind::Explicit { ref terms } => terms.get(v).copied().unwrap_or(0.0),
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            SeriesKind::Geometric { ratio } if !ratio.is_finite() => {
                Err(Error::InvalidParameter("geometric ratio must be finite".into()))
            }
            SeriesKind::Power { decay } if !decay.is_finite() => {
                Err(Error::InvalidParameter("power decay must be finite".into()))
            }
            SeriesKind::BoundedPartialSums { ref generator } => generator.bound().map(|_| ()),
            SeriesKind::Explicit { ref terms } if terms.iter().any(|t| !t.is_finite()) => {
                Err(Error::InvalidParameter("explicit terms must be finite".into()))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Default)]
struct SeriesCache {
    terms: Vec<f64>,
    /// `partial[n] = s_n`.
    partial: Vec<f64>,
    acc: Neumaier,
}

/// A term sequence `a_v` with cached partial sums `s_n = a_0 + … + a_n`
/// and the convention `s_{-1} = 0`.
#[derive(Debug)]
pub struct SeriesView {
    kind: SeriesKind,
    cache: RwLock<SeriesCache>,
}

impl Clone for SeriesView {
    fn clone(&self) -> Self {
        let cache = self.cache.read().expect("series cache poisoned").clone();
        Self { kind: self.kind.clone(), cache: RwLock::new(cache) }
    }
}

impl PartialEq for SeriesView {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl SeriesView {
    pub fn new(kind: SeriesKind) -> Result<Self> {
        kind.validate()?;
        Ok(Self { kind, cache: RwLock::new(SeriesCache::default()) })
    }

    pub fn explicit(terms: Vec<f64>) -> Result<Self> {
        Self::new(SeriesKind::Explicit { terms })
    }

    pub fn zero() -> Self {
        Self::explicit(Vec::new()).expect("empty series is valid")
    }

    /// `alpha·a + beta·b` materialised over the first `len` terms.
    pub fn linear_combination(alpha: f64, a: &SeriesView, beta: f64, b: &SeriesView, len: usize) -> Result<Self> {
        let ta = a.terms(len);
        let tb = b.terms(len);
        let terms = ta.iter().zip(&tb).map(|(x, y)| alpha * x + beta * y).collect();
        Self::explicit(terms)
    }

    pub fn kind(&self) -> &SeriesKind {
        &self.kind
    }

    fn ensure(&self, len: usize) {
        if self.cache.read().expect("series cache poisoned").terms.len() >= len {
            return;
        }
        let mut cache = self.cache.write().expect("series cache poisoned");
        let start = cache.terms.len();
        if start >= len {
            return;
        }
        cache.terms.reserve(len - start);
        cache.partial.reserve(len - start);
        for v in start..len {
            let a = self.kind.term_at(v);
            cache.acc.add(a);
            let s = cache.acc.value();
            cache.terms.push(a);
            cache.partial.push(s);
        }
    }

    pub fn term(&self, v: usize) -> f64 {
        self.ensure(v + 1);
        self.cache.read().expect("series cache poisoned").terms[v]
    }

    /// The first `len` terms.
    pub fn terms(&self, len: usize) -> Vec<f64> {
        self.ensure(len);
        self.cache.read().expect("series cache poisoned").terms[..len].to_vec()
    }

    /// `s_n` for `n >= -1`.
    pub fn partial_sum(&self, n: i64) -> Result<f64> {
        if n < -1 {
            return Err(Error::InvalidParameter(format!("partial-sum index {n} < -1")));
        }
        if n == -1 {
            return Ok(0.0);
        }
        let n = n as usize;
        self.ensure(n + 1);
        Ok(self.cache.read().expect("series cache poisoned").partial[n])
    }

    /// `s_0, …, s_{len-1}`.
    pub fn partial_sums(&self, len: usize) -> Vec<f64> {
        self.ensure(len);
        self.cache.read().expect("series cache poisoned").partial[..len].to_vec()
    }

    /// Length of the leading block outside of which every term is zero, when
    /// the family declares one.
    pub fn support_len(&self) -> Option<usize> {
        match self.kind {
            SeriesKind::UnitBasis { index } => Some(index + 1),
            SeriesKind::Explicit { ref terms } => {
                Some(terms.iter().rposition(|t| *t != 0.0).map_or(0, |i| i + 1))
            }
            SeriesKind::Geometric { ratio } if ratio == 0.0 => Some(1),
            _ => None,
        }
    }

    /// A known bound on `sup_v |s_v|`, if the series is in `bs` by
    /// construction.
    pub fn partial_sum_bound(&self) -> Option<f64> {
        match self.kind {
            SeriesKind::UnitBasis { .. } | SeriesKind::Alternating => Some(1.0),
            SeriesKind::Geometric { ratio } if ratio.abs() < 1.0 => Some(1.0 / (1.0 - ratio.abs())),
            SeriesKind::BoundedPartialSums { ref generator } => generator.bound().ok(),
            SeriesKind::Explicit { ref terms } => {
                let mut acc = Neumaier::new();
                let mut bound: f64 = 0.0;
                for &t in terms {
                    acc.add(t);
                    bound = bound.max(acc.value().abs());
                }
                Some(bound)
            }
            _ => None,
        }
    }
}

/// Builds a member of `bs` from a bounded generator `s`.
pub fn make_bounded_partial_sum_series(generator: PartialSumGenerator) -> Result<SeriesView> {
    generator.bound()?;
    SeriesView::new(SeriesKind::BoundedPartialSums { generator })
}

/// Desk-scale truncation box: rows `0..=m_max`, shifts `0..=n_max`, columns
/// `0..=j_max`, plus the absolute and relative tolerances used by verdicts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncWindow {
    pub m_max: usize,
    pub n_max: usize,
    #[serde(default = "default_j_max")]
    pub j_max: usize,
    #[serde(default = "default_abs_tol")]
    pub abs_tol: f64,
    #[serde(default = "default_rel_tol")]
    pub rel_tol: f64,
}

fn default_j_max() -> usize {
    32
}
fn default_abs_tol() -> f64 {
    1e-6
}
fn default_rel_tol() -> f64 {
    1e-9
}

impl Default for TruncWindow {
    fn default() -> Self {
        Self { m_max: 256, n_max: 32, j_max: default_j_max(), abs_tol: default_abs_tol(), rel_tol: default_rel_tol() }
    }
}

impl TruncWindow {
    pub fn new(m_max: usize, n_max: usize, j_max: usize) -> Self {
        Self { m_max, n_max, j_max, ..Self::default() }
    }

    pub fn with_tolerances(mut self, abs_tol: f64, rel_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self.rel_tol = rel_tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.m_max < 1 || self.n_max < 1 || self.j_max < 1 {
            return Err(Error::InvalidWindow("all bounds must be >= 1".into()));
        }
        if !(self.abs_tol > 0.0 && self.abs_tol.is_finite() && self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return Err(Error::InvalidWindow("tolerances must be positive and finite".into()));
        }
        Ok(())
    }

    /// The window with every bound multiplied by `factor`.
    pub fn scaled(&self, factor: usize) -> Self {
        Self { m_max: self.m_max * factor, n_max: self.n_max * factor, j_max: self.j_max * factor, ..*self }
    }

    /// Number of `(m, n)` cells.
    pub fn cells(&self) -> u128 {
        (self.m_max as u128 + 1) * (self.n_max as u128 + 1)
    }
}
