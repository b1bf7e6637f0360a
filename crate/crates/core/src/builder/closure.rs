//! Iterated sums of a built node over box regions.
//!
//! Every greedy line stands for an infinite rearranged series whose exact sum
//! is the line's target. A region cuts each line into a [`Piece`]: the whole
//! line, a tail, or a finite segment. A piece has an exact bookkeeping value
//! (`ideal`), the sum of its materialized entries (`numeric`), and a bound on
//! their difference.
//!
//! Completed sub-builds are only materialized for their first `depth` values
//! of the outermost summation coordinate, so the region is capped there when
//! descending into one.

use super::{BuildNode, Line, Node, UNBOUNDED};
use crate::sum::{compensated, CompensatedSum};

/// An axis-aligned box of multi-indices, inclusive on both ends.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Region {
    pub lo: Vec<u32>,
    pub hi: Vec<u32>,
}

impl Region {
    /// All of `ℕ^n`.
    pub fn full(n: usize) -> Self {
        Self {
            lo: vec![1; n],
            hi: vec![UNBOUNDED; n],
        }
    }

    /// No restriction at all, including coordinate 0.
    pub fn unrestricted(n: usize) -> Self {
        Self {
            lo: vec![0; n],
            hi: vec![UNBOUNDED; n],
        }
    }

    pub fn pin(self, position: usize, value: u32) -> Self {
        self.restrict(position, value, value)
    }

    /// Intersect coordinate `position` with `lo..=hi`.
    pub fn restrict(mut self, position: usize, lo: u32, hi: u32) -> Self {
        self.lo[position] = self.lo[position].max(lo);
        self.hi[position] = self.hi[position].min(hi);
        self
    }

    pub fn is_empty(&self) -> bool {
        self.lo.iter().zip(&self.hi).any(|(lo, hi)| lo > hi)
    }

    pub fn contains(&self, index: &[u32]) -> bool {
        index.iter().zip(self.lo.iter().zip(&self.hi)).all(|(j, (lo, hi))| lo <= j && j <= hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PieceKind {
    /// The whole line.
    Full,
    /// Everything from some offset on.
    Tail,
    /// A finite run of entries.
    Segment,
}

/// The part of one line inside a region.
#[derive(Debug, Clone, Copy)]
pub struct Piece<'a> {
    pub line: &'a Line,
    pub kind: PieceKind,
    /// First entry offset.
    pub first: usize,
    /// One past the last materialized entry offset.
    pub end: usize,
    /// The region asks for entries the truncation does not have.
    pub missing: bool,
}

impl Piece<'_> {
    pub fn ideal(&self) -> f64 {
        match self.kind {
            PieceKind::Full => self.line.target,
            PieceKind::Tail => self.line.target - compensated(self.line.values[..self.first.min(self.line.len())].iter().copied()),
            PieceKind::Segment => self.numeric(),
        }
    }

    pub fn numeric(&self) -> f64 {
        compensated(self.entries().map(|(_, v)| v))
    }

    pub fn bound(&self) -> f64 {
        if self.missing {
            return f64::INFINITY;
        }
        match self.kind {
            PieceKind::Full | PieceKind::Tail => self.line.report.error_bound,
            PieceKind::Segment => 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.end.saturating_sub(self.first)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `(offset, value)` of the materialized entries.
    pub fn entries(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        let first = self.first.min(self.end);
        (first..self.end).map(move |i| (i, self.line.values[i]))
    }
}

fn line_piece<'a>(line: &'a Line, region: &Region) -> Option<Piece<'a>> {
    let start = line.start();
    let lo = region.lo[line.axis].max(start);
    let hi = region.hi[line.axis];
    if lo > hi {
        return None;
    }
    let first = (lo - start) as usize;
    let len = line.len();
    if hi == UNBOUNDED {
        let kind = if first == 0 { PieceKind::Full } else { PieceKind::Tail };
        Some(Piece {
            line,
            kind,
            first,
            end: len,
            missing: first > len,
        })
    } else {
        let last = (hi - start) as usize;
        Some(Piece {
            line,
            kind: PieceKind::Segment,
            first,
            end: (last + 1).min(len),
            missing: last >= len,
        })
    }
}

/// Collect the pieces of the first `slab_limit` slabs of `node` inside
/// `region`, in build order. `order` lists the node's free positions from
/// outermost to innermost summation.
pub fn pieces<'a>(node: &'a BuildNode, order: &[usize], region: &Region, slab_limit: usize, out: &mut Vec<Piece<'a>>) {
    collect(node, order, region, slab_limit, false, out);
}

fn collect<'a>(node: &'a BuildNode, order: &[usize], region: &Region, slab_limit: usize, capped: bool, out: &mut Vec<Piece<'a>>) {
    debug_assert_eq!(order.len(), node.dimension());
    let mut region = region.clone();
    if capped && node.depth > 0 {
        let outer = order[0];
        region = region.restrict(outer, 0, node.origin[outer] + node.depth as u32 - 1);
    }
    if region.is_empty() {
        return;
    }
    for slab in &node.slabs[..slab_limit.min(node.slabs.len())] {
        let value = slab.pinned_value();
        if value < region.lo[slab.position] || value > region.hi[slab.position] {
            continue;
        }
        let mut inner = region.clone();
        for &p in &node.positions {
            if p != slab.position {
                inner = inner.restrict(p, slab.origin[p], UNBOUNDED);
            }
        }
        if inner.is_empty() {
            continue;
        }
        match &slab.content {
            Node::Line(line) => out.extend(line_piece(line, &inner)),
            Node::Build(sub) => {
                let sub_order: Vec<usize> = order.iter().copied().filter(|&p| p != slab.position).collect();
                collect(sub, &sub_order, &inner, sub.slabs.len(), true, out);
            }
        }
    }
}

/// Bookkeeping value of the iterated sum over `region`.
pub fn ideal(node: &BuildNode, order: &[usize], region: &Region, slab_limit: usize) -> f64 {
    let mut found = Vec::new();
    pieces(node, order, region, slab_limit, &mut found);
    let mut sum = CompensatedSum::new();
    for piece in &found {
        sum.add(piece.ideal());
    }
    sum.value()
}

/// Truncated iterated sum over the given pieces: entries are grouped by
/// coordinates in `order` and summed innermost first in increasing index.
pub fn nested_sum(found: &[Piece<'_>], order: &[usize]) -> f64 {
    let mut entries: Vec<(Vec<u32>, f64)> = Vec::with_capacity(found.iter().map(|p| p.len()).sum());
    for piece in found {
        for (i, value) in piece.entries() {
            let index = piece.line.index_of(i);
            entries.push((order.iter().map(|&p| index[p]).collect(), value));
        }
    }
    entries.sort_by(|a, b| a.0.cmp(&b.0));
    crate::sum::nested_sorted(&entries)
}

/// Sum of the piece bounds.
pub fn total_bound(found: &[Piece<'_>]) -> f64 {
    found.iter().map(|p| p.bound()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builder::Assignment;

    fn toy() -> Assignment {
        Assignment::from_matrix(&[vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0], vec![7.0, 8.0, 9.0]])
    }

    #[test]
    fn pieces_of_a_row_prefix() {
        let a = toy();
        // j_1 <= 2 in order (j_1, j_2): rows 1, 2 whole, column 1 entry (2,1)
        let region = Region::full(2).restrict(0, 1, 2);
        let mut found = Vec::new();
        pieces(&a.root, &[0, 1], &region, usize::MAX, &mut found);
        let kinds: Vec<PieceKind> = found.iter().map(|p| p.kind).collect();
        assert_eq!(kinds, vec![PieceKind::Full, PieceKind::Segment, PieceKind::Full]);
        assert_eq!(ideal(&a.root, &[0, 1], &region, usize::MAX), 21.0);
        assert_eq!(nested_sum(&found, &[0, 1]), 21.0);
        assert_eq!(total_bound(&found), 0.0);
    }

    #[test]
    fn tails_subtract_the_head() {
        let a = toy();
        let region = Region::full(2).pin(0, 1).restrict(1, 2, UNBOUNDED);
        assert_eq!(ideal(&a.root, &[0, 1], &region, usize::MAX), 5.0);
        let mut found = Vec::new();
        pieces(&a.root, &[0, 1], &region, usize::MAX, &mut found);
        assert_eq!(found[0].kind, PieceKind::Tail);
        assert_eq!(found[0].numeric(), 5.0);
    }

    #[test]
    fn segments_past_the_truncation_are_flagged() {
        let a = toy();
        let region = Region::full(2).pin(0, 1).restrict(1, 1, 10);
        let mut found = Vec::new();
        pieces(&a.root, &[0, 1], &region, usize::MAX, &mut found);
        assert!(found[0].missing);
        assert_eq!(found[0].bound(), f64::INFINITY);
    }

    #[test]
    fn slab_limit_hides_later_slabs() {
        let a = toy();
        let region = Region::full(2).pin(1, 2);
        // column 2 before anything of level 1 is built: only b(1, 2)
        assert_eq!(ideal(&a.root, &[1, 0], &region, 2), 2.0);
        assert_eq!(ideal(&a.root, &[1, 0], &region, 4), 2.0 + 5.0 + 8.0);
    }
}
