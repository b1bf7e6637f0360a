//! Structural checks on a built assignment.

use std::collections::{HashMap, HashSet};

use super::{Assignment, BuildNode, Node, PermTargets, Slab};
use crate::partition::IndexPartition;
use crate::sum::CompensatedSum;

/// Outcome of [`audit_region`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RegionAudit {
    pub entries: usize,
    /// Entries lying outside the slab that holds them, at any nesting level.
    pub outside: usize,
    /// Multi-indices assigned more than once.
    pub overlaps: usize,
}

impl RegionAudit {
    pub fn passed(&self) -> bool {
        self.outside == 0 && self.overlaps == 0
    }
}

/// Source indices that occur more than once.
pub fn audit_injectivity(assignment: &Assignment) -> Vec<u64> {
    let mut seen = HashSet::with_capacity(assignment.entry_count());
    let mut duplicates = Vec::new();
    for slab in assignment.slabs() {
        for line in slab.lines() {
            for &m in &line.ordering {
                if !seen.insert(m) {
                    duplicates.push(m);
                }
            }
        }
    }
    duplicates
}

/// `(d, μ)` of the slab of `node` that contains `index`.
fn slab_of(node: &BuildNode, index: &[u32]) -> Option<(usize, usize)> {
    let mut best: Option<(u32, usize)> = None;
    for (i, &p) in node.positions.iter().enumerate() {
        let rel = index[p].checked_sub(node.origin[p])?;
        if best.is_none_or(|(v, _)| rel < v) {
            best = Some((rel, i + 1));
        }
    }
    best.map(|(v, mu)| (v as usize, mu))
}

fn walk<'a>(node: &'a BuildNode, stack: &mut Vec<(&'a BuildNode, &'a Slab)>, audit: &mut RegionAudit, seen: &mut HashSet<Vec<u32>>) {
    for slab in &node.slabs {
        stack.push((node, slab));
        match &slab.content {
            Node::Line(line) => {
                for i in 0..line.len() {
                    let index = line.index_of(i);
                    audit.entries += 1;
                    let inside = stack.iter().all(|(owner, s)| {
                        index[s.position] == s.pinned_value() && slab_of(owner, &index) == Some((s.d, s.mu))
                    });
                    if !inside {
                        audit.outside += 1;
                    }
                    if !seen.insert(index) {
                        audit.overlaps += 1;
                    }
                }
            }
            Node::Build(sub) => walk(sub, stack, audit, seen),
        }
        stack.pop();
    }
}

/// Every entry lies in the slab recorded for it (the slab with the right
/// minimum and first minimal coordinate, at every nesting level) and no
/// multi-index is assigned twice.
pub fn audit_region(assignment: &Assignment) -> RegionAudit {
    let mut audit = RegionAudit::default();
    let mut seen = HashSet::with_capacity(assignment.entry_count());
    walk(&assignment.root, &mut Vec::new(), &mut audit, &mut seen);
    audit
}

/// Entries of top-level slab `(d, μ)` whose source index is not in
/// `I_{n d + μ}`. Returns the offending `(slab set, m)` pairs.
pub fn audit_slab_sources(assignment: &Assignment, partition: &mut IndexPartition<'_>) -> Vec<(usize, u64)> {
    let mut bad = Vec::new();
    for slab in assignment.slabs() {
        let expected = assignment.n * slab.d + slab.mu;
        debug_assert_eq!(slab.set, expected);
        for line in slab.lines() {
            for &m in &line.ordering {
                if partition.membership(m) != Some(expected) {
                    bad.push((expected, m));
                }
            }
        }
    }
    bad
}

/// Largest deviation between `s_K` and the sum of the recorded increments
/// for levels `1..=K`, over every order and `K <= depth`.
pub fn audit_telescoping(assignment: &Assignment, targets: &PermTargets) -> f64 {
    let mut recorded: HashMap<&[usize], Vec<f64>> = HashMap::new();
    for slab in assignment.slabs() {
        for stage in &slab.stages {
            recorded.entry(stage.order.as_slice()).or_default().push(stage.increment);
        }
    }
    let mut worst: f64 = 0.0;
    for (perm, seq) in targets.iter() {
        let order = perm.summation_order();
        let increments = recorded.get(order.as_slice()).map(|v| v.as_slice()).unwrap_or(&[]);
        let mut sum = CompensatedSum::new();
        for k in 1..=assignment.depth() {
            let Some(&inc) = increments.get(k - 1) else {
                return f64::INFINITY;
            };
            sum.add(inc);
            let expected = seq.get(k).unwrap_or(f64::NAN);
            worst = worst.max((sum.value() - expected).abs());
        }
    }
    worst
}
