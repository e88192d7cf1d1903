//! Finite unions of disjoint closed intervals.

use std::cmp::Ordering;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Closed interval `[lo, hi]`, `lo ≤ hi`.
#[derive(Debug, Clone, PartialEq)]
pub struct Interval<T> {
    pub lo: T,
    pub hi: T,
}

impl<T: Real> Interval<T> {
    pub fn new(lo: T, hi: T) -> Result<Self> {
        if lo > hi {
            return Err(Error::invariant(
                "interval",
                format!("lower end {} exceeds upper end {}", lo.to_decimal(), hi.to_decimal()),
            ));
        }
        Ok(Interval { lo, hi })
    }

    pub fn length(&self) -> T {
        self.hi.clone() - self.lo.clone()
    }

    pub fn contains(&self, x: &T) -> bool {
        self.lo <= *x && *x <= self.hi
    }

    pub fn intersects(&self, other: &Self) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }
}

/// Two neighbours closer than [`MERGE_ULPS`] (or overlapping) were fused.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MergeEvent {
    /// Position of the surviving interval in the merged set.
    pub index: usize,
    /// `true` when the inputs genuinely overlapped or touched.
    pub overlapping: bool,
}

/// Gaps narrower than this many ulps of the left neighbour's upper end are closed.
pub const MERGE_ULPS: usize = 4;

/// Sorted, pairwise disjoint, non-adjacent closed intervals with cached total length.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalSet<T> {
    intervals: Vec<Interval<T>>,
    measure: T,
    merges: Vec<MergeEvent>,
}

impl<T: Real> Default for IntervalSet<T> {
    fn default() -> Self {
        Self::empty()
    }
}

impl<T: Real> IntervalSet<T> {
    pub fn empty() -> Self {
        IntervalSet {
            intervals: Vec::new(),
            measure: T::zero(),
            merges: Vec::new(),
        }
    }

    /// Sorts and merges; every fusion is recorded as a [`MergeEvent`].
    pub fn from_intervals(mut items: Vec<Interval<T>>) -> Self {
        items.sort_by(|a, b| a.lo.partial_cmp(&b.lo).unwrap_or(Ordering::Equal));
        let mut intervals: Vec<Interval<T>> = Vec::with_capacity(items.len());
        let mut merges = Vec::new();
        for next in items {
            if let Some(cur) = intervals.last_mut() {
                let overlapping = next.lo <= cur.hi;
                let near = !T::EXACT && {
                    let mut reach = cur.hi.clone();
                    for _ in 0..MERGE_ULPS {
                        reach = reach.next_up();
                    }
                    next.lo < reach
                };
                if overlapping || near {
                    if next.hi > cur.hi {
                        cur.hi = next.hi;
                    }
                    let index = intervals.len() - 1;
                    merges.push(MergeEvent { index, overlapping });
                    continue;
                }
            }
            intervals.push(next);
        }
        let measure = intervals
            .iter()
            .fold(T::zero(), |acc, iv| acc + iv.length());
        IntervalSet {
            intervals,
            measure,
            merges,
        }
    }

    /// Builds from `(lo, hi)` pairs, rejecting reversed pairs.
    pub fn from_pairs(pairs: Vec<(T, T)>) -> Result<Self> {
        let items = pairs
            .into_iter()
            .map(|(lo, hi)| Interval::new(lo, hi))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_intervals(items))
    }

    pub fn intervals(&self) -> &[Interval<T>] {
        &self.intervals
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn measure(&self) -> &T {
        &self.measure
    }

    pub fn merge_events(&self) -> &[MergeEvent] {
        &self.merges
    }

    fn locate(&self, x: &T) -> Option<usize> {
        let pos = self.intervals.partition_point(|iv| iv.lo <= *x);
        pos.checked_sub(1)
    }

    pub fn contains(&self, x: &T) -> bool {
        self.locate(x)
            .is_some_and(|i| self.intervals[i].contains(x))
    }

    /// Distance from `x` to the nearest endpoint of any interval.
    pub fn boundary_distance(&self, x: &T) -> Option<T> {
        let pos = self.intervals.partition_point(|iv| iv.lo <= *x);
        let mut best: Option<T> = None;
        for i in [pos.checked_sub(1), Some(pos)].into_iter().flatten() {
            if let Some(iv) = self.intervals.get(i) {
                for end in [&iv.lo, &iv.hi] {
                    let d = (x.clone() - end.clone()).abs();
                    best = Some(match best {
                        Some(b) => T::min_of(b, d),
                        None => d,
                    });
                }
            }
        }
        best
    }

    /// Two-pointer sweep over both sorted lists.
    pub fn intersects(&self, other: &Self) -> bool {
        let (mut i, mut j) = (0, 0);
        while i < self.intervals.len() && j < other.intervals.len() {
            let a = &self.intervals[i];
            let b = &other.intervals[j];
            if a.intersects(b) {
                return true;
            }
            if a.hi < b.hi {
                i += 1;
            } else {
                j += 1;
            }
        }
        false
    }

    /// `max |endpoint|`, the radius of the smallest origin-centred interval containing the set.
    pub fn radius(&self) -> Option<T> {
        let first = self.intervals.first()?;
        let last = self.intervals.last()?;
        Some(T::max_of(first.lo.abs(), last.hi.abs()))
    }
}
