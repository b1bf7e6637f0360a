//! Numerical checks of iterated prefix sums on a built assignment.

use crate::builder::closure::{self, Piece};
use crate::builder::{
    audit_injectivity, audit_region, claim_series_value, Assignment, BuildError, PermTargets, Permutation, Region,
    RegionAudit,
};
use crate::par::{self, Execution};

/// Allowed floating-point drift per summed term.
pub const FLOAT_SLACK_PER_TERM: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum VerifyError {
    #[error("prefix depth {k} exceeds the built depth {depth}")]
    DepthExceeded { k: usize, depth: usize },
    #[error("permutation of dimension {got} used on an assignment of dimension {n}")]
    Dimension { n: usize, got: usize },
}

/// A truncated iterated sum with its aggregated error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrefixSum {
    pub value: f64,
    pub bound: f64,
    pub terms: usize,
}

/// `Σ_{j_1 ≤ k} Σ_{j_2} ... Σ_{j_n} b(j_σ(1), ..., j_σ(n))` over the
/// materialized entries, summed innermost first in increasing index order.
pub fn iterated_prefix_sum(assignment: &Assignment, sigma: &Permutation, k: usize) -> Result<PrefixSum, VerifyError> {
    if sigma.n() != assignment.n {
        return Err(VerifyError::Dimension {
            n: assignment.n,
            got: sigma.n(),
        });
    }
    if k > assignment.depth() {
        return Err(VerifyError::DepthExceeded {
            k,
            depth: assignment.depth(),
        });
    }
    if k == 0 {
        return Ok(PrefixSum {
            value: 0.0,
            bound: 0.0,
            terms: 0,
        });
    }
    let order = sigma.summation_order();
    let region = Region::full(assignment.n).restrict(order[0], 1, k as u32);
    Ok(sum_region(assignment, &order, &region, usize::MAX).0)
}

fn sum_region<'a>(assignment: &'a Assignment, order: &[usize], region: &Region, slab_limit: usize) -> (PrefixSum, Vec<Piece<'a>>) {
    let mut found = Vec::new();
    closure::pieces(&assignment.root, order, region, slab_limit, &mut found);
    let sum = PrefixSum {
        value: closure::nested_sum(&found, order),
        bound: closure::total_bound(&found),
        terms: found.iter().map(|p| p.len()).sum(),
    };
    (sum, found)
}

/// One `(σ, k)` comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct PrefixCheck {
    pub sigma: Permutation,
    pub k: usize,
    pub measured: f64,
    pub target: f64,
    pub bound: f64,
    pub terms: usize,
    pub pass: bool,
}

impl PrefixCheck {
    /// Whether the deviation is covered by the aggregated bound.
    pub fn within_bound(&self) -> bool {
        (self.measured - self.target).abs() <= self.bound + FLOAT_SLACK_PER_TERM * self.terms as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub tolerance: f64,
    pub checks: Vec<PrefixCheck>,
    /// Source indices used more than once.
    pub duplicates: Vec<u64>,
    pub region: RegionAudit,
}

impl VerificationReport {
    pub fn bijective(&self) -> bool {
        self.duplicates.is_empty()
    }

    pub fn passed(&self) -> bool {
        self.bijective() && self.region.passed() && self.checks.iter().all(|c| c.pass)
    }

    pub fn max_bound(&self) -> f64 {
        self.checks.iter().map(|c| c.bound).fold(0.0, f64::max)
    }
}

/// Check every `σ ∈ Sym(n)` and every `k ≤ depth`, plus the bijectivity and
/// region audits. A check passes when the deviation is covered by the
/// aggregated bound and the bound itself is at most `tolerance`.
pub fn verify_theorem(assignment: &Assignment, targets: &PermTargets, tolerance: f64) -> VerificationReport {
    verify_theorem_with(assignment, targets, tolerance, Execution::default())
}

pub fn verify_theorem_with(
    assignment: &Assignment,
    targets: &PermTargets,
    tolerance: f64,
    exec: Execution,
) -> VerificationReport {
    let jobs: Vec<(Permutation, usize)> = Permutation::all(assignment.n)
        .into_iter()
        .flat_map(|p| (1..=assignment.depth()).map(move |k| (p.clone(), k)))
        .collect();
    let checks = par::map(exec, &jobs, |(sigma, k)| {
        let sum = iterated_prefix_sum(assignment, sigma, *k).expect("k within depth");
        let target = targets.get(sigma).get(*k).unwrap_or(f64::NAN);
        let mut check = PrefixCheck {
            sigma: sigma.clone(),
            k: *k,
            measured: sum.value,
            target,
            bound: sum.bound,
            terms: sum.terms,
            pass: false,
        };
        check.pass = check.within_bound() && check.bound <= tolerance;
        check
    });
    VerificationReport {
        tolerance,
        checks,
        duplicates: audit_injectivity(assignment),
        region: audit_region(assignment),
    }
}

/// Truncated re-summation of the `l`-th part of the placed mass on
/// `{j_μ = d + 1}` next to its bookkeeping value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClaimCrosscheck {
    pub numeric: f64,
    pub bookkeeping: f64,
    pub bound: f64,
    pub agree: bool,
}

pub fn resum_claim_crosscheck(
    assignment: &Assignment,
    sigma: &Permutation,
    mu: usize,
    d: usize,
    l: usize,
) -> Result<ClaimCrosscheck, BuildError> {
    let bookkeeping = claim_series_value(assignment, sigma, mu, d, l)?;
    let region = crate::builder::claim_region(assignment.n, sigma, mu, d, l)?;
    let limit = d * assignment.n + mu - 1;
    let (sum, _) = sum_region(assignment, &sigma.summation_order(), &region, limit);
    let slack = FLOAT_SLACK_PER_TERM * sum.terms as f64;
    Ok(ClaimCrosscheck {
        numeric: sum.value,
        bookkeeping,
        bound: sum.bound,
        agree: (sum.value - bookkeeping).abs() <= sum.bound + slack,
    })
}
