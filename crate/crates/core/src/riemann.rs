//! Greedy Riemann rearrangement of a conditionally convergable subseries
//! towards a finite target or towards plus/minus infinity.

use crate::partition::Sign;
use crate::series::SeriesSource;
use crate::sum::CompensatedSum;

/// Supplies unused indices of one sign, each sign in increasing order.
pub trait SignedIndices {
    fn next_signed(&mut self, sign: Sign) -> Option<u64>;
}

/// All naturals up to `limit`, filtered by the sign of the term.
pub struct NaturalSigns<'a> {
    source: &'a SeriesSource,
    cursor: [u64; 2],
    limit: u64,
}

impl<'a> NaturalSigns<'a> {
    pub fn new(source: &'a SeriesSource, limit: u64) -> Self {
        Self {
            source,
            cursor: [1, 1],
            limit,
        }
    }
}

impl SignedIndices for NaturalSigns<'_> {
    fn next_signed(&mut self, sign: Sign) -> Option<u64> {
        let c = &mut self.cursor[sign as usize];
        while *c <= self.limit {
            let m = *c;
            *c += 1;
            if Sign::of(self.source.term(m)) == sign {
                return Some(m);
            }
        }
        None
    }
}

/// Outcome statistics of one greedy run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceReport {
    /// Running sum when the budget ran out.
    pub achieved: f64,
    /// Finite target: `|a|` of the term that caused the last crossing
    /// (infinite when no crossing happened). Infinite target: the last
    /// threshold cleared.
    pub error_bound: f64,
    pub crossings: usize,
    pub used: usize,
}

/// The greedy loop needed a term of one sign and none was left.
#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("phase starvation: no {needed:?} term available after {used} terms")]
pub struct PhaseStarvation {
    pub needed: Sign,
    pub used: usize,
}

/// A finite greedy rearrangement.
#[derive(Debug, Clone, PartialEq)]
pub struct Rearrangement {
    /// Original indices in emitted order.
    pub ordering: Vec<u64>,
    /// `a_m` for each emitted index.
    pub values: Vec<f64>,
    pub report: ConvergenceReport,
    /// Set when the run stopped before the budget was used up.
    pub starvation: Option<PhaseStarvation>,
}

impl Rearrangement {
    pub fn into_result(self) -> Result<Self, PhaseStarvation> {
        match self.starvation {
            Some(s) => Err(s),
            None => Ok(self),
        }
    }
}

struct Emitter<'s> {
    source: &'s SeriesSource,
    ordering: Vec<u64>,
    values: Vec<f64>,
    sum: CompensatedSum,
}

impl<'s> Emitter<'s> {
    fn new(source: &'s SeriesSource, budget: usize) -> Self {
        Self {
            source,
            ordering: Vec::with_capacity(budget),
            values: Vec::with_capacity(budget),
            sum: CompensatedSum::new(),
        }
    }

    fn push<S: SignedIndices + ?Sized>(&mut self, indices: &mut S, sign: Sign) -> Result<f64, PhaseStarvation> {
        let m = indices.next_signed(sign).ok_or(PhaseStarvation {
            needed: sign,
            used: self.ordering.len(),
        })?;
        let a = self.source.term(m);
        debug_assert_eq!(Sign::of(a), sign);
        self.ordering.push(m);
        self.values.push(a);
        self.sum.add(a);
        Ok(a)
    }

    fn finish(self, error_bound: f64, crossings: usize, starvation: Option<PhaseStarvation>) -> Rearrangement {
        let report = ConvergenceReport {
            achieved: self.sum.value(),
            error_bound,
            crossings,
            used: self.ordering.len(),
        };
        Rearrangement {
            ordering: self.ordering,
            values: self.values,
            report,
            starvation,
        }
    }
}

/// Rearrange towards a finite `target`, consuming exactly `budget` terms
/// unless a sign runs out.
///
/// While the running sum is `<= target` the next positive term is appended,
/// otherwise the next negative one; the phase only switches on a strict
/// crossing.
pub fn greedy_to_value<S: SignedIndices + ?Sized>(
    indices: &mut S,
    source: &SeriesSource,
    target: f64,
    budget: usize,
) -> Rearrangement {
    assert!(target.is_finite(), "use greedy_to_infinity for infinite targets");
    let mut out = Emitter::new(source, budget);
    let mut phase = if target >= 0.0 { Sign::Positive } else { Sign::Negative };
    let mut crossings = 0;
    let mut error_bound = f64::INFINITY;
    while out.ordering.len() < budget {
        let a = match out.push(indices, phase) {
            Ok(a) => a,
            Err(s) => return out.finish(error_bound, crossings, Some(s)),
        };
        let sum = out.sum.value();
        let crossed = match phase {
            Sign::Positive => sum > target,
            Sign::Negative => sum < target,
        };
        if crossed {
            debug_assert!((sum - target).abs() <= a.abs());
            phase = phase.flip();
            crossings += 1;
            error_bound = a.abs();
        }
    }
    out.finish(error_bound, crossings, None)
}

/// Rearrange so that the partial sums diverge to `+inf` (`Sign::Positive`)
/// or `-inf` (`Sign::Negative`).
///
/// Same-sign terms are appended until the sum strictly clears the next
/// threshold `±1, ±2, ...`; then exactly one opposite-sign term is appended.
pub fn greedy_to_infinity<S: SignedIndices + ?Sized>(
    indices: &mut S,
    source: &SeriesSource,
    direction: Sign,
    budget: usize,
) -> Rearrangement {
    let mut out = Emitter::new(source, budget);
    let unit = match direction {
        Sign::Positive => 1.0,
        Sign::Negative => -1.0,
    };
    let mut level = 1usize;
    let mut cleared = 0.0;
    let mut crossings = 0;
    while out.ordering.len() < budget {
        let threshold = unit * level as f64;
        let sum = out.sum.value();
        let beyond = match direction {
            Sign::Positive => sum > threshold,
            Sign::Negative => sum < threshold,
        };
        let sign = if beyond { direction.flip() } else { direction };
        if let Err(s) = out.push(indices, sign) {
            return out.finish(cleared, crossings, Some(s));
        }
        if beyond {
            cleared = threshold;
            crossings += 1;
            level += 1;
        }
    }
    out.finish(cleared, crossings, None)
}

/// Dispatch on a finite or infinite target.
pub fn greedy_to_extended<S: SignedIndices + ?Sized>(
    indices: &mut S,
    source: &SeriesSource,
    target: f64,
    budget: usize,
) -> Rearrangement {
    if target == f64::INFINITY {
        greedy_to_infinity(indices, source, Sign::Positive, budget)
    } else if target == f64::NEG_INFINITY {
        greedy_to_infinity(indices, source, Sign::Negative, budget)
    } else {
        greedy_to_value(indices, source, target, budget)
    }
}
