//! Finite unions of closed real intervals.

use serde::{Deserialize, Serialize};

/// Sorted, pairwise-disjoint closed intervals whose gaps all exceed
/// `merge_eps`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct UnionOfIntervals {
    intervals: Vec<(f64, f64)>,
    merge_eps: f64,
}

impl UnionOfIntervals {
    pub fn empty(merge_eps: f64) -> Self {
        UnionOfIntervals {
            intervals: Vec::new(),
            merge_eps,
        }
    }

    /// Normalise arbitrary intervals: sort, drop inverted pairs, merge
    /// overlaps and gaps no wider than `merge_eps`.
    pub fn from_intervals<I>(raw: I, merge_eps: f64) -> Self
    where
        I: IntoIterator<Item = (f64, f64)>,
    {
        let mut v: Vec<(f64, f64)> = raw.into_iter().filter(|(a, b)| b >= a).collect();
        v.sort_by(|x, y| x.0.total_cmp(&y.0));
        Self::from_sorted(v, merge_eps)
    }

    /// Same as [`from_intervals`](Self::from_intervals) for input already
    /// sorted by left endpoint.
    pub fn from_sorted(sorted: Vec<(f64, f64)>, merge_eps: f64) -> Self {
        let mut out: Vec<(f64, f64)> = Vec::with_capacity(sorted.len());
        for (a, b) in sorted {
            match out.last_mut() {
                Some(last) if a - last.1 <= merge_eps => last.1 = last.1.max(b),
                _ => out.push((a, b)),
            }
        }
        UnionOfIntervals {
            intervals: out,
            merge_eps,
        }
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn merge_eps(&self) -> f64 {
        self.merge_eps
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// Total Lebesgue measure.
    pub fn length(&self) -> f64 {
        self.intervals.iter().map(|(a, b)| b - a).sum()
    }

    pub fn hull(&self) -> Option<(f64, f64)> {
        Some((self.intervals.first()?.0, self.intervals.last()?.1))
    }

    pub fn contains(&self, x: f64) -> bool {
        let i = self.intervals.partition_point(|&(a, _)| a <= x);
        i > 0 && x <= self.intervals[i - 1].1
    }

    pub fn union(&self, other: &Self) -> Self {
        Self::from_intervals(
            self.intervals.iter().chain(other.intervals.iter()).copied(),
            self.merge_eps.max(other.merge_eps),
        )
    }

    pub fn intersection(&self, other: &Self) -> Self {
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::new();
        while i < self.intervals.len() && j < other.intervals.len() {
            let (a0, a1) = self.intervals[i];
            let (b0, b1) = other.intervals[j];
            let lo = a0.max(b0);
            let hi = a1.min(b1);
            if lo <= hi {
                out.push((lo, hi));
            }
            if a1 < b1 {
                i += 1;
            } else {
                j += 1;
            }
        }
        Self::from_sorted(out, self.merge_eps.max(other.merge_eps))
    }
}
