use std::collections::btree_map::Entry;
use std::collections::BTreeMap;

use super::perm::Permutation;

/// A prefix-sum target sequence `s_1, s_2, ...` with `s_0 = 0`.
#[derive(Debug, Clone, PartialEq)]
pub enum TargetSequence {
    /// `s_k = c` for every `k >= 1`.
    Constant(f64),
    /// `s_k = k * slope`.
    Linear(f64),
    /// Explicit `s_1, s_2, ...`; undefined past the end.
    List(Vec<f64>),
}

impl TargetSequence {
    /// The sequence used for a one-shot (corollary-level) target: constant
    /// for finite values, `±k` for `±inf`.
    pub fn for_limit(value: f64) -> Self {
        if value == f64::INFINITY {
            TargetSequence::Linear(1.0)
        } else if value == f64::NEG_INFINITY {
            TargetSequence::Linear(-1.0)
        } else {
            TargetSequence::Constant(value)
        }
    }

    /// `s_k`, or `None` when an explicit list is too short.
    pub fn get(&self, k: usize) -> Option<f64> {
        if k == 0 {
            return Some(0.0);
        }
        match self {
            TargetSequence::Constant(c) => Some(*c),
            TargetSequence::Linear(slope) => Some(k as f64 * slope),
            TargetSequence::List(values) => values.get(k - 1).copied(),
        }
    }

    /// `s_k - s_{k-1}`.
    pub fn increment(&self, k: usize) -> Option<f64> {
        assert!(k >= 1);
        Some(self.get(k)? - self.get(k - 1)?)
    }

    fn defined_to(&self, depth: usize) -> bool {
        match self {
            TargetSequence::List(values) => values.len() >= depth && values.iter().all(|v| v.is_finite()),
            TargetSequence::Constant(c) | TargetSequence::Linear(c) => c.is_finite(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TargetError {
    #[error("no target sequence for permutation {0}")]
    Missing(Permutation),
    #[error("permutation {perm} has {got} entries, expected {n}")]
    WrongDimension { perm: Permutation, n: usize, got: usize },
    #[error("target sequence for {0} is not finite through the requested depth")]
    Undefined(Permutation),
}

/// Target sequences for every `σ ∈ Sym(n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PermTargets {
    n: usize,
    table: BTreeMap<Permutation, TargetSequence>,
}

impl PermTargets {
    /// Fill every permutation from `entries`, falling back to `default`.
    pub fn new(
        n: usize,
        entries: impl IntoIterator<Item = (Permutation, TargetSequence)>,
        default: Option<TargetSequence>,
    ) -> Result<Self, TargetError> {
        let mut table = BTreeMap::new();
        for (perm, seq) in entries {
            if perm.n() != n {
                return Err(TargetError::WrongDimension { n, got: perm.n(), perm });
            }
            table.insert(perm, seq);
        }
        for perm in Permutation::all(n) {
            if let Entry::Vacant(slot) = table.entry(perm.clone()) {
                match &default {
                    Some(seq) => {
                        slot.insert(seq.clone());
                    }
                    None => return Err(TargetError::Missing(perm)),
                }
            }
        }
        Ok(Self { n, table })
    }

    /// One extended-real limit per permutation.
    pub fn from_limits(n: usize, limits: impl IntoIterator<Item = (Permutation, f64)>) -> Result<Self, TargetError> {
        Self::new(
            n,
            limits.into_iter().map(|(p, v)| (p, TargetSequence::for_limit(v))),
            None,
        )
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, perm: &Permutation) -> &TargetSequence {
        &self.table[perm]
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Permutation, &TargetSequence)> {
        self.table.iter()
    }

    /// Every sequence is finite through `s_depth`.
    pub fn check_depth(&self, depth: usize) -> Result<(), TargetError> {
        for (perm, seq) in &self.table {
            if !seq.defined_to(depth) {
                return Err(TargetError::Undefined(perm.clone()));
            }
        }
        Ok(())
    }
}
