//! Neumaier compensated summation.

/// Running sum with a separate error term.
///
/// Adding values in the same order always yields the same bits, so a sum
/// that is resumed from a saved state agrees exactly with one computed in a
/// single pass.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    pub const fn new() -> Self {
        Self { sum: 0.0, comp: 0.0 }
    }

    #[inline]
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl Extend<f64> for Neumaier {
    fn extend<I: IntoIterator<Item = f64>>(&mut self, iter: I) {
        for v in iter {
            self.add(v);
        }
    }
}

impl FromIterator<f64> for Neumaier {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = Neumaier::new();
        acc.extend(iter);
        acc
    }
}

/// Compensated sum of an iterator.
pub fn sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<Neumaier>().value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_cancelled_small_terms() {
        let v = [1.0, 1e100, 1.0, -1e100];
        assert_eq!(sum(v), 2.0);
        assert_eq!(v.iter().sum::<f64>(), 0.0);
    }

    #[test]
    fn resumed_state_matches_single_pass() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i as f64) * 0.37).sin() / (i as f64 + 1.0)).collect();
        let whole = sum(xs.iter().copied());
        let mut acc = Neumaier::new();
        acc.extend(xs[..400].iter().copied());
        let saved = acc;
        let mut resumed = saved;
        resumed.extend(xs[400..].iter().copied());
        assert_eq!(whole.to_bits(), resumed.value().to_bits());
    }
}
