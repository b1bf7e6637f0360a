//! Input series, built-in examples and the finite-horizon convergability witness.

use std::fmt;
use std::sync::Arc;

use crate::par::{self, Execution};
use crate::sum::CompensatedSum;

type TermFn = dyn Fn(u64) -> f64 + Send + Sync;

/// A real series `a_1, a_2, ...` given by its term function.
///
/// Terms are indexed from 1. The term function must be deterministic.
#[derive(Clone)]
pub struct SeriesSource {
    name: String,
    term: Arc<TermFn>,
}

impl SeriesSource {
    pub fn new<F>(name: impl Into<String>, term: F) -> Self
    where
        F: Fn(u64) -> f64 + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            term: Arc::new(term),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// The term `a_m`. Panics on `m == 0`.
    #[inline]
    pub fn term(&self, m: u64) -> f64 {
        assert!(m >= 1, "series terms are indexed from 1");
        (self.term)(m)
    }

    /// A finite list of terms followed by zeros.
    pub fn from_terms(name: impl Into<String>, terms: Vec<f64>) -> Self {
        Self::new(name, move |m| terms.get((m - 1) as usize).copied().unwrap_or(0.0))
    }

    /// Look up a built-in source by name.
    pub fn builtin(name: &str) -> Option<Self> {
        match name {
            "alternating_harmonic" => Some(alternating_harmonic()),
            "alternating_sqrt" => Some(alternating_sqrt()),
            _ => None,
        }
    }
}

impl fmt::Debug for SeriesSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SeriesSource").field("name", &self.name).finish()
    }
}

#[inline]
fn alternating_sign(m: u64) -> f64 {
    if m % 2 == 1 {
        1.0
    } else {
        -1.0
    }
}

/// `a_m = (-1)^(m+1) / m`.
pub fn alternating_harmonic() -> SeriesSource {
    SeriesSource::new("alternating_harmonic", |m| alternating_sign(m) / m as f64)
}

/// `a_m = (-1)^(m+1) / sqrt(m)`.
///
/// Its sign-parts diverge like `sqrt(M)` rather than `log(M)`, which leaves
/// enough mass for many index sets at desk-scale horizons.
pub fn alternating_sqrt() -> SeriesSource {
    SeriesSource::new("alternating_sqrt", |m| alternating_sign(m) / (m as f64).sqrt())
}

/// `a_m = 1 / m^p`. Absolutely convergent for `p > 1`, never conditionally convergable.
pub fn p_series(p: f64) -> SeriesSource {
    SeriesSource::new(format!("p_series({p})"), move |m| (m as f64).powf(-p))
}

/// Finite-horizon evidence that a series is conditionally convergable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergabilityWitness {
    pub horizon: u64,
    pub pos_sum: f64,
    pub neg_sum: f64,
    pub max_tail_term: f64,
}

/// One of the three witness conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WitnessCondition {
    /// Positive part reached `bound`.
    PositiveSum,
    /// Negative part reached `-bound`.
    NegativeSum,
    /// Terms in the last decile are at most `1/bound` in magnitude.
    TailDecay,
}

impl fmt::Display for WitnessCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            WitnessCondition::PositiveSum => "pos_sum condition",
            WitnessCondition::NegativeSum => "neg_sum condition",
            WitnessCondition::TailDecay => "tail decay condition",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("series is not witnessed as conditionally convergable: {failed:?} (horizon {})", witness.horizon)]
pub struct WitnessFailure {
    pub failed: Vec<WitnessCondition>,
    pub witness: ConvergabilityWitness,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum WitnessError {
    #[error("horizon must be at least 1")]
    EmptyHorizon,
    #[error("bound must be positive and finite, got {0}")]
    BadBound(f64),
    #[error(transparent)]
    Failed(#[from] WitnessFailure),
}

const WITNESS_CHUNK: u64 = 1 << 16;

/// Scan `a_1..a_horizon` and check the three-condition proxy for conditional
/// convergability: `pos_sum >= bound`, `neg_sum <= -bound` and
/// `max |a_m| <= 1/bound` over the last decile of the horizon.
pub fn witness_convergability(
    source: &SeriesSource,
    horizon: u64,
    bound: f64,
) -> Result<ConvergabilityWitness, WitnessError> {
    witness_convergability_with(source, horizon, bound, Execution::default())
}

pub fn witness_convergability_with(
    source: &SeriesSource,
    horizon: u64,
    bound: f64,
    exec: Execution,
) -> Result<ConvergabilityWitness, WitnessError> {
    if horizon == 0 {
        return Err(WitnessError::EmptyHorizon);
    }
    if !(bound > 0.0 && bound.is_finite()) {
        return Err(WitnessError::BadBound(bound));
    }
    // last decile: at least one term
    let tail_len = horizon.div_ceil(10);
    let tail_start = horizon - tail_len + 1;

    let chunks = horizon.div_ceil(WITNESS_CHUNK) as usize;
    let partials = par::map_range(exec, chunks, |c| {
        let lo = c as u64 * WITNESS_CHUNK + 1;
        let hi = (lo + WITNESS_CHUNK - 1).min(horizon);
        let mut pos = CompensatedSum::new();
        let mut neg = CompensatedSum::new();
        let mut tail_max = 0.0f64;
        for m in lo..=hi {
            let a = source.term(m);
            if a >= 0.0 {
                pos.add(a);
            } else {
                neg.add(a);
            }
            if m >= tail_start {
                tail_max = tail_max.max(a.abs());
            }
        }
        (pos.value(), neg.value(), tail_max)
    });
    let mut pos = CompensatedSum::new();
    let mut neg = CompensatedSum::new();
    let mut max_tail_term = 0.0f64;
    for (p, n, t) in partials {
        pos.add(p);
        neg.add(n);
        max_tail_term = max_tail_term.max(t);
    }
    let witness = ConvergabilityWitness {
        horizon,
        pos_sum: pos.value(),
        neg_sum: neg.value(),
        max_tail_term,
    };

    let mut failed = Vec::new();
    if !(witness.pos_sum >= bound) {
        failed.push(WitnessCondition::PositiveSum);
    }
    if !(witness.neg_sum <= -bound) {
        failed.push(WitnessCondition::NegativeSum);
    }
    if !(witness.max_tail_term <= 1.0 / bound) {
        failed.push(WitnessCondition::TailDecay);
    }
    if failed.is_empty() {
        Ok(witness)
    } else {
        Err(WitnessFailure { failed, witness }.into())
    }
}
