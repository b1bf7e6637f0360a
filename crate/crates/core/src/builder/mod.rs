//! Truncated n-dimensional rearrangements with prescribed iterated sums.
//!
//! Multi-indices are split into slabs: slab `(d, μ)` holds every `j` whose
//! smallest coordinate is `d + 1` and whose first minimal coordinate is `μ`.
//! Slabs are filled in `d`-major order. For every order `σ` that sums over
//! coordinate `μ` outermost, the slab must contribute the residual
//! `s_{d+1} - s_d - (mass already placed on {j_μ = d + 1})`. A slab of
//! dimension one is a single greedy line; larger slabs are filled by a
//! recursive build of dimension `n - 1` over the slab's index set whose
//! targets are the residuals.
//!
//! Infinite objects are represented by their truncations. Sums over regions
//! that cut through built slabs are evaluated by [`closure`], which reports an
//! exact bookkeeping value next to the truncated numeric value.

mod audit;
pub mod closure;
mod perm;
mod targets;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use audit::{audit_injectivity, audit_region, audit_slab_sources, audit_telescoping, RegionAudit};
pub use closure::{Piece, PieceKind, Region};
pub use perm::{Permutation, PermutationError};
pub use targets::{PermTargets, TargetError, TargetSequence};

use crate::partition::{IndexPartition, IndexStream};
use crate::riemann::{greedy_to_value, ConvergenceReport, PhaseStarvation};
use crate::sum::CompensatedSum;

/// Coordinate value standing for "no upper limit".
pub const UNBOUNDED: u32 = u32::MAX;

/// Depth of recursive sub-builds when none is configured.
pub const DEFAULT_SUB_DEPTH: usize = 2;

/// How much of the infinite construction is materialized.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncationBudget {
    /// Completed levels: slabs `d = 0..depth` are built.
    pub depth: usize,
    /// Terms per greedy line.
    pub slab_budget: usize,
    /// Levels of recursive sub-builds, keyed by sub-build dimension.
    #[serde(default)]
    pub sub_depths: BTreeMap<usize, usize>,
}

impl TruncationBudget {
    pub fn new(depth: usize, slab_budget: usize) -> Self {
        Self {
            depth,
            slab_budget,
            sub_depths: BTreeMap::new(),
        }
    }

    pub fn with_sub_depth(mut self, dimension: usize, depth: usize) -> Self {
        self.sub_depths.insert(dimension, depth);
        self
    }

    pub fn sub_depth(&self, dimension: usize) -> usize {
        self.sub_depths.get(&dimension).copied().unwrap_or(DEFAULT_SUB_DEPTH)
    }

    fn validate(&self) -> Result<(), BuildError> {
        if self.depth == 0 {
            return Err(BuildError::Budget("depth must be positive".into()));
        }
        if self.slab_budget == 0 {
            return Err(BuildError::Budget("slab_budget must be positive".into()));
        }
        if let Some((dim, _)) = self.sub_depths.iter().find(|(_, &d)| d == 0) {
            return Err(BuildError::Budget(format!("sub depth for dimension {dim} must be positive")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BuildError {
    #[error("slab {}: {source}", format_path(.path))]
    Starvation { path: Vec<(usize, usize)>, source: PhaseStarvation },
    #[error(transparent)]
    Targets(#[from] TargetError),
    #[error("invalid budget: {0}")]
    Budget(String),
    #[error("dimension {0} is not supported, need n >= 2")]
    Dimension(usize),
    #[error("stage ({d}, {mu}) requested but the next stage is ({next_d}, {next_mu})")]
    StageOrder { d: usize, mu: usize, next_d: usize, next_mu: usize },
    #[error("stage ({d}, {mu}) needs {needed} earlier slabs, only {built} are built")]
    MissingStage { d: usize, mu: usize, needed: usize, built: usize },
    #[error("invalid argument: {0}")]
    Argument(String),
}

fn format_path(path: &[(usize, usize)]) -> String {
    let parts: Vec<String> = path.iter().map(|(d, mu)| format!("({d}, {mu})")).collect();
    parts.join(" / ")
}

/// Target bookkeeping of one order at one slab.
#[derive(Debug, Clone, PartialEq)]
pub struct StageTarget {
    /// Summation order, outermost first, as 0-based coordinate positions.
    pub order: Vec<usize>,
    /// `s_{d+1} - s_d`.
    pub increment: f64,
    /// Bookkeeping value of the mass already placed on the slab's hyperplane.
    pub correction: f64,
    /// What the slab itself must contribute.
    pub residual: f64,
}

impl StageTarget {
    pub fn permutation(&self) -> Permutation {
        Permutation::from_summation_order(&self.order).expect("orders are permutations")
    }
}

/// One greedy rearrangement laid out along a coordinate axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Line {
    pub axis: usize,
    /// Multi-index of the first entry.
    pub origin: Vec<u32>,
    pub target: f64,
    pub ordering: Vec<u64>,
    pub values: Vec<f64>,
    pub report: ConvergenceReport,
}

impl Line {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn start(&self) -> u32 {
        self.origin[self.axis]
    }

    /// Multi-index of entry `i`.
    pub fn index_of(&self, i: usize) -> Vec<u32> {
        let mut j = self.origin.clone();
        j[self.axis] += i as u32;
        j
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Line(Line),
    Build(BuildNode),
}

/// A slab and its content.
#[derive(Debug, Clone, PartialEq)]
pub struct Slab {
    pub d: usize,
    /// 1-based rank of the pinned coordinate among the node's free ones.
    pub mu: usize,
    /// Pinned coordinate position (0-based).
    pub position: usize,
    /// Number `t` of the index set `I_t` of the owning node's partition.
    pub set: usize,
    /// Smallest multi-index of the slab; the pinned coordinate holds its value.
    pub origin: Vec<u32>,
    pub stages: Vec<StageTarget>,
    pub content: Node,
}

impl Slab {
    pub fn pinned_value(&self) -> u32 {
        self.origin[self.position]
    }

    /// Greedy lines of the slab, in build order.
    pub fn lines(&self) -> Vec<&Line> {
        let mut out = Vec::new();
        collect_lines(&self.content, &mut out);
        out
    }

    pub fn stage(&self, order: &[usize]) -> Option<&StageTarget> {
        self.stages.iter().find(|s| s.order == order)
    }
}

fn collect_lines<'a>(node: &'a Node, out: &mut Vec<&'a Line>) {
    match node {
        Node::Line(line) => out.push(line),
        Node::Build(build) => {
            for slab in &build.slabs {
                collect_lines(&slab.content, out);
            }
        }
    }
}

/// A build over the free coordinates `positions`, each ranging over
/// `origin[p], origin[p] + 1, ...`.
#[derive(Debug, Clone, PartialEq)]
pub struct BuildNode {
    /// Free coordinate positions, increasing.
    pub positions: Vec<usize>,
    pub origin: Vec<u32>,
    /// Completed levels.
    pub depth: usize,
    pub slabs: Vec<Slab>,
}

impl BuildNode {
    fn new(positions: Vec<usize>, origin: Vec<u32>) -> Self {
        Self {
            positions,
            origin,
            depth: 0,
            slabs: Vec::new(),
        }
    }

    pub fn dimension(&self) -> usize {
        self.positions.len()
    }

    /// `(d, μ)` of the slab built next.
    pub fn next_stage(&self) -> (usize, usize) {
        let m = self.dimension();
        (self.slabs.len() / m, self.slabs.len() % m + 1)
    }
}

/// A multi-index together with the term it carries.
#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub index: Vec<u32>,
    pub m: u64,
    pub value: f64,
    /// Top-level slab, 0-based level.
    pub slab_d: usize,
    /// Top-level slab, 1-based coordinate.
    pub slab_mu: usize,
}

/// The truncated rearrangement `b(j_1, ..., j_n) = a_m`.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub n: usize,
    pub root: BuildNode,
    pub budget: TruncationBudget,
}

impl Assignment {
    /// No slabs yet.
    pub fn empty(n: usize, budget: TruncationBudget) -> Self {
        Self {
            n,
            root: BuildNode::new((0..n).collect(), vec![1; n]),
            budget,
        }
    }

    /// A finite 2-D table `b(j_1, j_2) = rows[j_1 - 1][j_2 - 1]` laid out as
    /// exact rows and columns, with synthetic source indices.
    pub fn from_matrix(rows: &[Vec<f64>]) -> Self {
        let k = rows.len();
        assert!(k > 0 && rows.iter().all(|r| r.len() == k), "matrix must be square");
        let mut next_m = 1u64;
        let mut line = |axis: usize, origin: Vec<u32>, values: Vec<f64>| {
            let ordering: Vec<u64> = (next_m..next_m + values.len() as u64).collect();
            next_m += values.len() as u64;
            let target = crate::sum::compensated(values.iter().copied());
            Line {
                axis,
                origin,
                target,
                report: ConvergenceReport {
                    achieved: target,
                    error_bound: 0.0,
                    crossings: 0,
                    used: values.len(),
                },
                ordering,
                values,
            }
        };
        let mut root = BuildNode::new(vec![0, 1], vec![1, 1]);
        for d in 0..k {
            let row = line(1, vec![d as u32 + 1, d as u32 + 1], rows[d][d..].to_vec());
            let col = line(0, vec![d as u32 + 2, d as u32 + 1], rows[d + 1..].iter().map(|r| r[d]).collect());
            for (mu, content) in [(1, row), (2, col)] {
                root.slabs.push(Slab {
                    d,
                    mu,
                    position: mu - 1,
                    set: 2 * d + mu,
                    origin: content.origin.clone(),
                    stages: Vec::new(),
                    content: Node::Line(content),
                });
            }
            root.depth += 1;
        }
        Self {
            n: 2,
            root,
            budget: TruncationBudget::new(k, k),
        }
    }

    /// Completed levels.
    pub fn depth(&self) -> usize {
        self.root.depth
    }

    pub fn slabs(&self) -> &[Slab] {
        &self.root.slabs
    }

    pub fn slab(&self, d: usize, mu: usize) -> Option<&Slab> {
        self.root.slabs.get(d * self.n + mu - 1)
    }

    pub fn slab_mut(&mut self, d: usize, mu: usize) -> Option<&mut Slab> {
        self.root.slabs.get_mut(d * self.n + mu - 1)
    }

    pub fn entry_count(&self) -> usize {
        self.root.slabs.iter().flat_map(|s| s.lines()).map(|l| l.len()).sum()
    }

    /// Every assigned entry, in build order.
    pub fn entries(&self) -> Vec<Entry> {
        let mut out = Vec::with_capacity(self.entry_count());
        for slab in &self.root.slabs {
            for line in slab.lines() {
                for (i, (&m, &value)) in line.ordering.iter().zip(&line.values).enumerate() {
                    out.push(Entry {
                        index: line.index_of(i),
                        m,
                        value,
                        slab_d: slab.d,
                        slab_mu: slab.mu,
                    });
                }
            }
        }
        out
    }
}

/// Targets keyed by summation order.
type OrderTargets = BTreeMap<Vec<usize>, TargetSequence>;

fn order_targets(targets: &PermTargets) -> OrderTargets {
    targets.iter().map(|(p, s)| (p.summation_order(), s.clone())).collect()
}

/// The lower limit `δ(σ, ν)` of variable `j_ν` on the slab where `j_1`
/// is pinned at coordinate `μ` to `d + 1`.
pub fn delta(sigma: &Permutation, nu: usize, mu: usize, d: usize) -> Result<usize, BuildError> {
    let n = sigma.n();
    if mu == 0 || mu > n || sigma.apply(mu) != 1 {
        return Err(BuildError::Argument(format!("σ({mu}) must be 1 for σ = {sigma}")));
    }
    if nu == 0 || nu > n {
        return Err(BuildError::Argument(format!("ν = {nu} out of range")));
    }
    if nu == 1 {
        return Err(BuildError::Argument("ν = σ(μ) has no lower limit".into()));
    }
    let position = sigma.inverse().apply(nu);
    Ok(if position < mu { d + 2 } else { d + 1 })
}

/// Region of the `l`-th part of the hyperplane `{j_μ = d + 1}` minus the
/// slab `(d, μ)`, for an order `σ` with `σ(μ) = 1`.
pub fn claim_region(n: usize, sigma: &Permutation, mu: usize, d: usize, l: usize) -> Result<Region, BuildError> {
    if l < 2 || l > n {
        return Err(BuildError::Argument(format!("l = {l} must lie in 2..={n}")));
    }
    let inverse = sigma.inverse();
    let mut region = Region::full(n).pin(mu - 1, d as u32 + 1);
    for i in l..=n {
        let position = inverse.apply(i) - 1;
        let limit = delta(sigma, i, mu, d)? as u32;
        region = if i == l {
            region.restrict(position, 1, limit - 1)
        } else {
            region.restrict(position, limit, UNBOUNDED)
        };
    }
    Ok(region)
}

/// Bookkeeping value of the `l`-th part of the already-placed mass on
/// `{j_μ = d + 1}` in order `σ`, using only the slabs built before `(d, μ)`.
pub fn claim_series_value(
    assignment: &Assignment,
    sigma: &Permutation,
    mu: usize,
    d: usize,
    l: usize,
) -> Result<f64, BuildError> {
    let n = assignment.n;
    if sigma.n() != n {
        return Err(BuildError::Argument(format!("σ has dimension {}, expected {n}", sigma.n())));
    }
    let region = claim_region(n, sigma, mu, d, l)?;
    let needed = d * n + mu - 1;
    let built = assignment.root.slabs.len();
    if built < needed {
        return Err(BuildError::MissingStage { d, mu, needed, built });
    }
    Ok(closure::ideal(&assignment.root, &sigma.summation_order(), &region, needed))
}

/// Fill the slab `(d, μ)`, which must be the next one in stage order.
pub fn fill_slab(
    assignment: &mut Assignment,
    d: usize,
    mu: usize,
    partition: &mut IndexPartition<'_>,
    targets: &PermTargets,
    budget: &TruncationBudget,
) -> Result<(), BuildError> {
    if targets.n() != assignment.n {
        return Err(BuildError::Argument(format!(
            "targets have dimension {}, assignment has {}",
            targets.n(),
            assignment.n
        )));
    }
    let (next_d, next_mu) = assignment.root.next_stage();
    if (d, mu) != (next_d, next_mu) {
        return Err(BuildError::StageOrder { d, mu, next_d, next_mu });
    }
    targets.check_depth(d + 1)?;
    fill_next(&mut assignment.root, partition, &order_targets(targets), budget)
}

/// Build levels `0..budget.depth` in stage order.
pub fn build_nd(
    partition: &mut IndexPartition<'_>,
    targets: &PermTargets,
    budget: &TruncationBudget,
) -> Result<Assignment, BuildError> {
    let n = targets.n();
    if n < 2 {
        return Err(BuildError::Dimension(n));
    }
    budget.validate()?;
    targets.check_depth(budget.depth)?;
    let table = order_targets(targets);
    let mut assignment = Assignment::empty(n, budget.clone());
    for _ in 0..budget.depth * n {
        fill_next(&mut assignment.root, partition, &table, budget)?;
    }
    Ok(assignment)
}

/// Build with a single extended-real limit per order: constant sequences for
/// finite values and `s_k = ±k` for infinite ones.
pub fn build_corollary(
    partition: &mut IndexPartition<'_>,
    n: usize,
    limits: impl IntoIterator<Item = (Permutation, f64)>,
    budget: &TruncationBudget,
) -> Result<Assignment, BuildError> {
    let targets = PermTargets::from_limits(n, limits)?;
    build_nd(partition, &targets, budget)
}

/// The explicit two-dimensional procedure: row `j` takes `I_{2j-1}`, column
/// `k` takes `I_{2k}`, and each line targets the target increment minus the
/// entries already placed on it.
pub fn build_2d(
    partition: &mut IndexPartition<'_>,
    targets: &PermTargets,
    budget: &TruncationBudget,
) -> Result<Assignment, BuildError> {
    if targets.n() != 2 {
        return Err(BuildError::Dimension(targets.n()));
    }
    budget.validate()?;
    targets.check_depth(budget.depth)?;
    let id = Permutation::identity(2);
    let swap = Permutation::new(vec![2, 1]).expect("valid");
    let rows_target = targets.get(&id);
    let cols_target = targets.get(&swap);
    let mut assignment = Assignment::empty(2, budget.clone());
    // entry lookups: b(j, k) with j, k 1-based
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut cols: Vec<Vec<f64>> = Vec::new();
    for d in 0..budget.depth {
        let j = d + 1;
        // row j: b(j, k) for k < j sits in column k at offset j - k - 1
        let mut placed = CompensatedSum::new();
        for (k, col) in cols.iter().enumerate() {
            if let Some(&b) = col.get(j - (k + 1) - 1) {
                placed.add(b);
            }
        }
        let increment = rows_target.increment(j).expect("checked depth");
        let correction = placed.value();
        let row = greedy_line(partition, 2 * j - 1, 1, vec![j as u32, j as u32], increment - correction, budget)
            .map_err(|source| BuildError::Starvation { path: vec![(d, 1)], source })?;
        rows.push(row.values.clone());
        push_line_slab(&mut assignment.root, d, 1, 0, 2 * j - 1, vec![0, 1], increment, correction, row);

        // column j: b(i, j) for i <= j sits in row i at offset j - i
        let mut placed = CompensatedSum::new();
        for (i, row) in rows.iter().enumerate() {
            if let Some(&b) = row.get(j - (i + 1)) {
                placed.add(b);
            }
        }
        let increment = cols_target.increment(j).expect("checked depth");
        let correction = placed.value();
        let col = greedy_line(partition, 2 * j, 0, vec![j as u32 + 1, j as u32], increment - correction, budget)
            .map_err(|source| BuildError::Starvation { path: vec![(d, 2)], source })?;
        cols.push(col.values.clone());
        push_line_slab(&mut assignment.root, d, 2, 1, 2 * j, vec![1, 0], increment, correction, col);
        assignment.root.depth += 1;
    }
    Ok(assignment)
}

#[allow(clippy::too_many_arguments)]
fn push_line_slab(
    node: &mut BuildNode,
    d: usize,
    mu: usize,
    position: usize,
    set: usize,
    order: Vec<usize>,
    increment: f64,
    correction: f64,
    line: Line,
) {
    node.slabs.push(Slab {
        d,
        mu,
        position,
        set,
        origin: line.origin.clone(),
        stages: vec![StageTarget {
            order,
            increment,
            correction,
            residual: line.target,
        }],
        content: Node::Line(line),
    });
}

fn greedy_line(
    partition: &mut IndexPartition<'_>,
    set: usize,
    axis: usize,
    origin: Vec<u32>,
    target: f64,
    budget: &TruncationBudget,
) -> Result<Line, PhaseStarvation> {
    let source = partition.source().clone();
    let mut cursor = partition.signed_cursor(set);
    let run = greedy_to_value(&mut cursor, &source, target, budget.slab_budget).into_result()?;
    Ok(Line {
        axis,
        origin,
        target,
        ordering: run.ordering,
        values: run.values,
        report: run.report,
    })
}

/// Fill the next slab of `node`.
fn fill_next(
    node: &mut BuildNode,
    partition: &mut IndexPartition<'_>,
    targets: &OrderTargets,
    budget: &TruncationBudget,
) -> Result<(), BuildError> {
    let m = node.dimension();
    let (d, mu) = node.next_stage();
    let position = node.positions[mu - 1];
    let value = node.origin[position] + d as u32;
    let mut origin = node.origin.clone();
    for (i, &p) in node.positions.iter().enumerate() {
        origin[p] += match (i + 1).cmp(&mu) {
            std::cmp::Ordering::Less => d as u32 + 1,
            std::cmp::Ordering::Equal => d as u32,
            std::cmp::Ordering::Greater => d as u32,
        };
    }
    debug_assert_eq!(origin[position], value);

    let orders: Vec<(&Vec<usize>, &TargetSequence)> = targets.iter().filter(|(o, _)| o[0] == position).collect();
    let region = Region::unrestricted(origin.len()).pin(position, value);
    let built = node.slabs.len();
    let mut stages = Vec::with_capacity(orders.len());
    for (order, seq) in orders {
        let increment = seq.increment(d + 1).ok_or_else(|| {
            BuildError::Targets(TargetError::Undefined(
                Permutation::from_summation_order(order).expect("orders are permutations"),
            ))
        })?;
        let correction = closure::ideal(node, order, &region, built);
        stages.push(StageTarget {
            order: order.clone(),
            increment,
            correction,
            residual: increment - correction,
        });
    }

    let set = m * d + mu;
    let rest: Vec<usize> = node.positions.iter().copied().filter(|&p| p != position).collect();
    let content = if m == 2 {
        let residual = stages[0].residual;
        let line = greedy_line(partition, set, rest[0], origin.clone(), residual, budget)
            .map_err(|source| BuildError::Starvation { path: vec![(d, mu)], source })?;
        Node::Line(line)
    } else {
        let sub_targets: OrderTargets = stages
            .iter()
            .map(|s| (s.order[1..].to_vec(), TargetSequence::Constant(s.residual)))
            .collect();
        let mut sub = BuildNode::new(rest, origin.clone());
        let (source, threshold) = (partition.source().clone(), partition.threshold());
        let stream: Box<dyn IndexStream + '_> = Box::new(partition.set_stream(set));
        let mut sub_partition = IndexPartition::new(source, stream, threshold);
        let levels = budget.sub_depth(m - 1);
        for _ in 0..levels * (m - 1) {
            fill_next(&mut sub, &mut sub_partition, &sub_targets, budget).map_err(|e| match e {
                BuildError::Starvation { mut path, source } => {
                    path.insert(0, (d, mu));
                    BuildError::Starvation { path, source }
                }
                other => other,
            })?;
        }
        Node::Build(sub)
    };
    node.slabs.push(Slab {
        d,
        mu,
        position,
        set,
        origin,
        stages,
        content,
    });
    if node.slabs.len().is_multiple_of(m) {
        node.depth += 1;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::split_conditionally_convergable;
    use crate::series::alternating_sqrt;

    fn constant_targets(n: usize, values: &[f64]) -> PermTargets {
        PermTargets::new(
            n,
            Permutation::all(n).into_iter().zip(values.iter().map(|&v| TargetSequence::Constant(v))),
            None,
        )
        .unwrap()
    }

    #[test]
    fn delta_examples() {
        let sigma: Permutation = "2 1 3".parse().unwrap();
        assert_eq!(delta(&sigma, 2, 2, 0).unwrap(), 2);
        assert_eq!(delta(&sigma, 3, 2, 0).unwrap(), 1);
        assert!(delta(&sigma, 1, 2, 0).is_err());
        assert!(delta(&sigma, 2, 1, 0).is_err());
        let id = Permutation::identity(4);
        for nu in 2..=4 {
            assert_eq!(delta(&id, nu, 1, 3).unwrap(), 4);
        }
    }

    #[test]
    fn first_row_starts_with_first_greedy_index() {
        let source = alternating_sqrt();
        let mut partition = split_conditionally_convergable(&source);
        let a = build_2d(&mut partition, &constant_targets(2, &[1.0, -1.0]), &TruncationBudget::new(2, 500)).unwrap();
        let first = &a.entries()[0];
        assert_eq!(first.index, vec![1, 1]);
        assert_eq!(first.m, partition.members(1).unwrap().positive[0]);
    }

    #[test]
    fn constant_targets_telescope_in_2d() {
        let source = alternating_sqrt();
        let mut partition = split_conditionally_convergable(&source);
        let a = build_2d(&mut partition, &constant_targets(2, &[1.0, -1.0]), &TruncationBudget::new(3, 500)).unwrap();
        let row1 = &a.slab(0, 1).unwrap().stages[0];
        assert_eq!((row1.increment, row1.correction, row1.residual), (1.0, 0.0, 1.0));
        let col1 = &a.slab(0, 2).unwrap().stages[0];
        let b11 = a.entries()[0].value;
        assert_eq!(col1.residual, -1.0 - b11);
        for d in 1..3 {
            for mu in 1..=2 {
                let s = &a.slab(d, mu).unwrap().stages[0];
                assert_eq!(s.increment, 0.0);
                assert_eq!(s.residual, -s.correction);
            }
        }
    }

    #[test]
    fn nd_matches_2d_entry_for_entry() {
        let source = alternating_sqrt();
        let targets = PermTargets::new(
            2,
            [
                (Permutation::identity(2), TargetSequence::List(vec![0.5, 2.0, -1.0])),
                ("2 1".parse().unwrap(), TargetSequence::Linear(-0.75)),
            ],
            None,
        )
        .unwrap();
        let budget = TruncationBudget::new(3, 700);
        let a = build_2d(&mut split_conditionally_convergable(&source), &targets, &budget).unwrap();
        let b = build_nd(&mut split_conditionally_convergable(&source), &targets, &budget).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn stage_order_is_enforced() {
        let source = alternating_sqrt();
        let mut partition = split_conditionally_convergable(&source);
        let targets = constant_targets(2, &[1.0, 1.0]);
        let budget = TruncationBudget::new(1, 100);
        let mut a = Assignment::empty(2, budget.clone());
        let err = fill_slab(&mut a, 0, 2, &mut partition, &targets, &budget).unwrap_err();
        assert!(matches!(err, BuildError::StageOrder { next_d: 0, next_mu: 1, .. }));
        fill_slab(&mut a, 0, 1, &mut partition, &targets, &budget).unwrap();
        fill_slab(&mut a, 0, 2, &mut partition, &targets, &budget).unwrap();
        assert_eq!(a.depth(), 1);
    }

    #[test]
    fn first_slab_residuals_are_first_targets() {
        let source = alternating_sqrt();
        let mut partition = split_conditionally_convergable(&source);
        let targets = constant_targets(3, &[1.0, 2.0, 3.0, -1.0, -2.0, -3.0]);
        let budget = TruncationBudget::new(1, 300).with_sub_depth(2, 1);
        let mut a = Assignment::empty(3, budget.clone());
        fill_slab(&mut a, 0, 1, &mut partition, &targets, &budget).unwrap();
        let slab = a.slab(0, 1).unwrap();
        assert_eq!(slab.stages.len(), 2);
        for stage in &slab.stages {
            assert_eq!(stage.correction, 0.0);
            assert_eq!(stage.residual, targets.get(&stage.permutation()).get(1).unwrap());
        }
        assert!(matches!(slab.content, Node::Build(ref b) if b.positions == vec![1, 2]));
    }

    #[test]
    fn three_dimensional_depth_one_uses_six_sets() {
        let source = alternating_sqrt();
        let mut partition = split_conditionally_convergable(&source);
        let targets = constant_targets(3, &[1.0, 2.0, 3.0, -1.0, -2.0, -3.0]);
        let budget = TruncationBudget::new(1, 200).with_sub_depth(2, 1);
        let a = build_nd(&mut partition, &targets, &budget).unwrap();
        assert_eq!(a.slabs().len(), 3);
        let budget = TruncationBudget::new(2, 200).with_sub_depth(2, 1);
        let a = build_nd(&mut split_conditionally_convergable(&source), &targets, &budget).unwrap();
        let sets: Vec<usize> = a.slabs().iter().map(|s| s.set).collect();
        assert_eq!(sets, vec![1, 2, 3, 4, 5, 6]);
    }

    #[test]
    fn claim_needs_earlier_stages() {
        let a = Assignment::empty(2, TruncationBudget::new(1, 1));
        let swap: Permutation = "2 1".parse().unwrap();
        let err = claim_series_value(&a, &swap, 2, 0, 2).unwrap_err();
        assert!(matches!(err, BuildError::MissingStage { needed: 1, built: 0, .. }));
        assert_eq!(claim_series_value(&a, &Permutation::identity(2), 1, 0, 2).unwrap(), 0.0);
    }

    #[test]
    fn claim_for_swap_is_first_entry() {
        let source = alternating_sqrt();
        let mut partition = split_conditionally_convergable(&source);
        let a = build_2d(&mut partition, &constant_targets(2, &[1.0, -1.0]), &TruncationBudget::new(2, 400)).unwrap();
        let swap: Permutation = "2 1".parse().unwrap();
        let b11 = a.entries()[0].value;
        let v = claim_series_value(&a, &swap, 2, 0, 2).unwrap();
        assert_eq!(v, b11);
        assert_eq!(v, claim_series_value(&a, &swap, 2, 0, 2).unwrap());
    }

    #[test]
    fn claim_parts_add_up_to_correction() {
        let source = alternating_sqrt();
        let mut partition = split_conditionally_convergable(&source);
        let targets = constant_targets(3, &[1.0, 2.0, 3.0, -1.0, -2.0, -3.0]);
        let budget = TruncationBudget::new(2, 300).with_sub_depth(2, 2);
        let a = build_nd(&mut partition, &targets, &budget).unwrap();
        for slab in a.slabs() {
            for stage in &slab.stages {
                let sigma = stage.permutation();
                let parts: f64 = (2..=3).map(|l| claim_series_value(&a, &sigma, slab.mu, slab.d, l).unwrap()).sum();
                assert!((parts - stage.correction).abs() < 1e-12, "{parts} vs {}", stage.correction);
            }
        }
    }

    #[test]
    fn rejects_bad_budgets_and_dimensions() {
        let source = alternating_sqrt();
        let mut partition = split_conditionally_convergable(&source);
        let targets = constant_targets(2, &[1.0, 1.0]);
        assert!(matches!(
            build_nd(&mut partition, &targets, &TruncationBudget::new(0, 10)),
            Err(BuildError::Budget(_))
        ));
        let one = PermTargets::new(1, [], Some(TargetSequence::Constant(1.0))).unwrap();
        assert_eq!(build_nd(&mut partition, &one, &TruncationBudget::new(1, 10)), Err(BuildError::Dimension(1)));
        let short = PermTargets::new(2, [], Some(TargetSequence::List(vec![1.0]))).unwrap();
        assert!(matches!(
            build_nd(&mut partition, &short, &TruncationBudget::new(2, 10)),
            Err(BuildError::Targets(_))
        ));
    }

    #[test]
    fn starvation_names_the_slab() {
        let source = crate::series::SeriesSource::from_terms("short", vec![1.0, -1.0, 0.5, -0.5]);
        let stream = Box::new(crate::partition::NaturalStream::new(4));
        let mut partition = IndexPartition::new(source, stream, 1.0);
        let err = build_nd(&mut partition, &constant_targets(2, &[0.3, 0.3]), &TruncationBudget::new(1, 50)).unwrap_err();
        assert!(matches!(err, BuildError::Starvation { ref path, .. } if path == &vec![(0, 1)]));
    }
}
