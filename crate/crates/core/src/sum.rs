//! Compensated (Neumaier) summation.

use std::iter::Sum;

/// Running sum with a Neumaier correction term.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        let v = self.sum + self.compensation;
        // infinities poison the compensation with NaN
        if v.is_nan() && !self.sum.is_nan() {
            self.sum
        } else {
            v
        }
    }
}

impl Extend<f64> for CompensatedSum {
    fn extend<I: IntoIterator<Item = f64>>(&mut self, iter: I) {
        for v in iter {
            self.add(v);
        }
    }
}

impl Sum<f64> for CompensatedSum {
    fn sum<I: Iterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        acc.extend(iter);
        acc
    }
}

/// Compensated sum of an iterator of values.
pub fn compensated<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut acc = CompensatedSum::new();
    acc.extend(values);
    acc.value()
}

/// Iterated sum of `(key, value)` pairs sorted by key: values sharing all
/// but the last key component are summed first, then those sums are grouped
/// by the next shorter key prefix, and so on outwards.
pub fn nested_sorted<K: Ord>(entries: &[(Vec<K>, f64)]) -> f64 {
    nested_level(entries, 0)
}

fn nested_level<K: Ord>(entries: &[(Vec<K>, f64)], level: usize) -> f64 {
    let Some(first) = entries.first() else {
        return 0.0;
    };
    debug_assert!(entries.windows(2).all(|w| w[0].0 <= w[1].0));
    if level + 1 >= first.0.len() {
        return compensated(entries.iter().map(|e| e.1));
    }
    let mut sum = CompensatedSum::new();
    let mut rest = entries;
    while let Some(head) = rest.first() {
        let split = rest.iter().position(|e| e.0[level] != head.0[level]).unwrap_or(rest.len());
        sum.add(nested_level(&rest[..split], level + 1));
        rest = &rest[split..];
    }
    sum.value()
}
