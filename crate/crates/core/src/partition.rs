//! Lazy decomposition of an index stream into infinitely many disjoint sets,
//! each carrying a conditionally convergable subseries.
//!
//! Indices are consumed in increasing order. Non-negative terms feed one
//! triangular sweep and negative terms another; `I_t` is the union of the
//! `t`-th set of each sweep. Round `r` of a sweep visits sets `1..=r` in
//! order. A visit keeps taking the next index of its sign stream until the
//! set's mass has grown by at least the visit threshold. The first visit of
//! set `r` therefore starts at the smallest index not yet assigned.

use crate::series::SeriesSource;

/// Default mass a single visit must add to its set.
pub const DEFAULT_VISIT_THRESHOLD: f64 = 1.0;

/// Default cap on how many naturals a partition may scan.
pub const DEFAULT_SCAN_LIMIT: u64 = 200_000_000;

/// An increasing stream of original (1-based) series indices.
pub trait IndexStream {
    fn next_index(&mut self) -> Option<u64>;
}

/// `1, 2, 3, ...` up to an inclusive limit.
#[derive(Debug, Clone)]
pub struct NaturalStream {
    next: u64,
    limit: u64,
}

impl NaturalStream {
    pub fn new(limit: u64) -> Self {
        Self { next: 1, limit }
    }
}

impl IndexStream for NaturalStream {
    fn next_index(&mut self) -> Option<u64> {
        if self.next > self.limit {
            return None;
        }
        self.next += 1;
        Some(self.next - 1)
    }
}

/// Adapter for any increasing iterator of indices.
pub struct IterStream<I>(pub I);

impl<I: Iterator<Item = u64>> IndexStream for IterStream<I> {
    fn next_index(&mut self) -> Option<u64> {
        self.0.next()
    }
}

/// One visit of a sweep: consecutive members of one set, within one round.
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub set: usize,
    pub round: usize,
    pub first: u64,
    pub last: u64,
    pub mass: f64,
}

/// Triangular-sweep state for one non-negative stream.
#[derive(Debug, Clone)]
pub struct SweepSchedule {
    threshold: f64,
    round: usize,
    slot: usize,
    gained: f64,
    open: Option<Block>,
    blocks: Vec<Block>,
}

impl SweepSchedule {
    pub fn new(threshold: f64) -> Self {
        assert!(threshold > 0.0, "visit threshold must be positive");
        Self {
            threshold,
            round: 1,
            slot: 1,
            gained: 0.0,
            open: None,
            blocks: Vec::new(),
        }
    }

    /// Assign the next index of the stream (with weight `beta >= 0`) and
    /// return its 1-based set number.
    pub fn assign(&mut self, index: u64, beta: f64) -> usize {
        debug_assert!(beta >= 0.0);
        let set = self.slot;
        let block = self.open.get_or_insert(Block {
            set,
            round: self.round,
            first: index,
            last: index,
            mass: 0.0,
        });
        block.last = index;
        block.mass += beta;
        self.gained += beta;
        if self.gained >= self.threshold {
            self.blocks.push(self.open.take().expect("open block"));
            self.gained = 0.0;
            if self.slot == self.round {
                self.round += 1;
                self.slot = 1;
            } else {
                self.slot += 1;
            }
        }
        set
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// Completed visits, in order.
    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }
}

/// Split a stream of non-negative weights `(index, beta)` into sets.
///
/// Yields `(index, set)` in stream order. With `sum beta = infinity` every
/// set receives infinite mass and every index is assigned.
pub fn split_divergent<I>(terms: I, threshold: f64) -> DivergentSplit<I::IntoIter>
where
    I: IntoIterator<Item = (u64, f64)>,
{
    DivergentSplit {
        inner: terms.into_iter(),
        schedule: SweepSchedule::new(threshold),
    }
}

pub struct DivergentSplit<I> {
    inner: I,
    schedule: SweepSchedule,
}

impl<I> DivergentSplit<I> {
    pub fn schedule(&self) -> &SweepSchedule {
        &self.schedule
    }
}

impl<I: Iterator<Item = (u64, f64)>> Iterator for DivergentSplit<I> {
    type Item = (u64, usize);

    fn next(&mut self) -> Option<Self::Item> {
        let (index, beta) = self.inner.next()?;
        Some((index, self.schedule.assign(index, beta)))
    }
}

/// Members of one `I_t`, split by sign of the term.
#[derive(Debug, Clone, Default)]
pub struct SetMembers {
    pub positive: Vec<u64>,
    pub negative: Vec<u64>,
}

impl SetMembers {
    pub fn len(&self) -> usize {
        self.positive.len() + self.negative.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Which part of a set a term belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    /// `a_m >= 0`
    Positive,
    /// `a_m < 0`
    Negative,
}

impl Sign {
    pub fn of(value: f64) -> Self {
        if value >= 0.0 {
            Sign::Positive
        } else {
            Sign::Negative
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Sign::Positive => Sign::Negative,
            Sign::Negative => Sign::Positive,
        }
    }
}

/// Lazily built, memoized partition `I_1, I_2, ...` of an index stream.
pub struct IndexPartition<'s> {
    source: SeriesSource,
    stream: Box<dyn IndexStream + 's>,
    positive: SweepSchedule,
    negative: SweepSchedule,
    sets: Vec<SetMembers>,
    order: Vec<u64>,
    order_set: Vec<u32>,
    exhausted: bool,
}

impl<'s> IndexPartition<'s> {
    pub fn new(source: SeriesSource, stream: Box<dyn IndexStream + 's>, threshold: f64) -> Self {
        Self {
            source,
            stream,
            positive: SweepSchedule::new(threshold),
            negative: SweepSchedule::new(threshold),
            sets: Vec::new(),
            order: Vec::new(),
            order_set: Vec::new(),
            exhausted: false,
        }
    }

    pub fn source(&self) -> &SeriesSource {
        &self.source
    }

    /// Per-visit mass increment of both sweeps.
    pub fn threshold(&self) -> f64 {
        self.positive.threshold()
    }

    /// Number of stream elements assigned so far.
    pub fn scanned(&self) -> usize {
        self.order.len()
    }

    /// Largest index assigned so far.
    pub fn frontier(&self) -> u64 {
        self.order.last().copied().unwrap_or(0)
    }

    pub fn is_exhausted(&self) -> bool {
        self.exhausted
    }

    /// Number of sets with at least one member so far.
    pub fn set_count(&self) -> usize {
        self.sets.len()
    }

    pub fn blocks(&self, sign: Sign) -> &[Block] {
        match sign {
            Sign::Positive => self.positive.blocks(),
            Sign::Negative => self.negative.blocks(),
        }
    }

    /// Members of `I_t` generated so far (1-based `t`).
    pub fn members(&self, t: usize) -> Option<&SetMembers> {
        self.sets.get(t.checked_sub(1)?)
    }

    /// Assign one more element of the stream. Returns false when exhausted.
    pub fn advance(&mut self) -> bool {
        if self.exhausted {
            return false;
        }
        let Some(m) = self.stream.next_index() else {
            self.exhausted = true;
            return false;
        };
        debug_assert!(self.order.last().is_none_or(|&last| last < m));
        let a = self.source.term(m);
        let (t, sign) = match Sign::of(a) {
            Sign::Positive => (self.positive.assign(m, a), Sign::Positive),
            Sign::Negative => (self.negative.assign(m, -a), Sign::Negative),
        };
        if self.sets.len() < t {
            self.sets.resize_with(t, SetMembers::default);
        }
        let set = &mut self.sets[t - 1];
        match sign {
            Sign::Positive => set.positive.push(m),
            Sign::Negative => set.negative.push(m),
        }
        self.order.push(m);
        self.order_set.push(t as u32);
        true
    }

    /// Assign every stream element up to and including index `horizon`.
    pub fn advance_to(&mut self, horizon: u64) {
        while self.frontier() < horizon && self.advance() {}
    }

    /// The set containing index `m`, if `m` belongs to the stream.
    pub fn membership(&mut self, m: u64) -> Option<usize> {
        self.advance_to(m);
        let pos = self.order.binary_search(&m).ok()?;
        Some(self.order_set[pos] as usize)
    }

    /// The `i`-th (0-based) member of `I_t` of the given sign.
    pub fn signed_member(&mut self, t: usize, sign: Sign, i: usize) -> Option<u64> {
        assert!(t >= 1, "sets are numbered from 1");
        loop {
            if let Some(set) = self.sets.get(t - 1) {
                let list = match sign {
                    Sign::Positive => &set.positive,
                    Sign::Negative => &set.negative,
                };
                if let Some(&m) = list.get(i) {
                    return Some(m);
                }
            }
            if !self.advance() {
                return None;
            }
        }
    }

    /// The `i`-th (0-based) smallest element of `I_t`.
    pub fn enumerate(&mut self, t: usize, i: usize) -> Option<u64> {
        let mut stream = self.set_stream(t);
        let mut last = None;
        for _ in 0..=i {
            last = Some(stream.next_index()?);
        }
        last
    }

    /// Running `(sum over P_t of a_m, sum over N_t of a_m)` over members generated so far.
    pub fn set_sums(&self, t: usize) -> (f64, f64) {
        let Some(set) = self.members(t) else {
            return (0.0, 0.0);
        };
        let pos = crate::sum::compensated(set.positive.iter().map(|&m| self.source.term(m)));
        let neg = crate::sum::compensated(set.negative.iter().map(|&m| self.source.term(m)));
        (pos, neg)
    }

    /// Increasing stream over `I_t`.
    pub fn set_stream(&mut self, t: usize) -> SetStream<'_, 's> {
        assert!(t >= 1, "sets are numbered from 1");
        SetStream {
            partition: self,
            t,
            pos: 0,
            neg: 0,
        }
    }

    /// Sign-separated cursors over `I_t`, for greedy rearrangement.
    pub fn signed_cursor(&mut self, t: usize) -> SetSignedCursor<'_, 's> {
        assert!(t >= 1, "sets are numbered from 1");
        SetSignedCursor {
            partition: self,
            t,
            pos: 0,
            neg: 0,
        }
    }
}

/// Merged increasing walk over `P_t` and `N_t`.
pub struct SetStream<'p, 's> {
    partition: &'p mut IndexPartition<'s>,
    t: usize,
    pos: usize,
    neg: usize,
}

impl IndexStream for SetStream<'_, '_> {
    fn next_index(&mut self) -> Option<u64> {
        loop {
            let (p, n) = match self.partition.sets.get(self.t - 1) {
                Some(set) => (set.positive.get(self.pos).copied(), set.negative.get(self.neg).copied()),
                None => (None, None),
            };
            // anything assigned later is larger than both heads
            match (p, n) {
                (Some(p), Some(n)) if p < n => {
                    self.pos += 1;
                    return Some(p);
                }
                (Some(_), Some(n)) => {
                    self.neg += 1;
                    return Some(n);
                }
                (Some(p), None) => {
                    self.pos += 1;
                    return Some(p);
                }
                (None, Some(n)) => {
                    self.neg += 1;
                    return Some(n);
                }
                (None, None) => {
                    if !self.partition.advance() {
                        return None;
                    }
                }
            }
        }
    }
}

/// Separate increasing cursors over `P_t` and `N_t`.
pub struct SetSignedCursor<'p, 's> {
    partition: &'p mut IndexPartition<'s>,
    t: usize,
    pos: usize,
    neg: usize,
}

impl crate::riemann::SignedIndices for SetSignedCursor<'_, '_> {
    fn next_signed(&mut self, sign: Sign) -> Option<u64> {
        let i = match sign {
            Sign::Positive => &mut self.pos,
            Sign::Negative => &mut self.neg,
        };
        let m = self.partition.signed_member(self.t, sign, *i)?;
        *i += 1;
        Some(m)
    }
}

/// Partition the naturals for a witnessed conditionally convergable source,
/// with the default visit threshold and scan limit.
pub fn split_conditionally_convergable(source: &SeriesSource) -> IndexPartition<'static> {
    IndexPartition::new(
        source.clone(),
        Box::new(NaturalStream::new(DEFAULT_SCAN_LIMIT)),
        DEFAULT_VISIT_THRESHOLD,
    )
}
