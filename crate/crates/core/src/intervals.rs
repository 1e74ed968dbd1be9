//! Finite unions of closed intervals.

use alloc::vec::Vec;

/// Sorted, pairwise disjoint closed intervals `[lo, hi]`.
///
/// Differences are stored as closures of the set difference, so the measure
/// is exact while endpoints may be shared with the subtrahend.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct IntervalUnion {
    intervals: Vec<(f64, f64)>,
}

impl IntervalUnion {
    pub fn empty() -> Self {
        Self { intervals: Vec::new() }
    }

    pub fn interval(lo: f64, hi: f64) -> Self {
        Self::new(alloc::vec![(lo, hi)])
    }

    /// Normalizes arbitrary pairs: drops reversed or NaN pairs, sorts, and
    /// merges overlapping or touching intervals.
    pub fn new(mut pairs: Vec<(f64, f64)>) -> Self {
        pairs.retain(|&(lo, hi)| lo <= hi);
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut out: Vec<(f64, f64)> = Vec::with_capacity(pairs.len());
        for (lo, hi) in pairs {
            match out.last_mut() {
                Some(last) if lo <= last.1 => {
                    if hi > last.1 {
                        last.1 = hi;
                    }
                }
                _ => out.push((lo, hi)),
            }
        }
        Self { intervals: out }
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn measure(&self) -> f64 {
        self.intervals.iter().fold(0.0, |acc, (lo, hi)| acc + (hi - lo))
    }

    pub fn contains(&self, x: f64) -> bool {
        let i = self.intervals.partition_point(|iv| iv.1 < x);
        i < self.intervals.len() && self.intervals[i].0 <= x
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut v = self.intervals.clone();
        v.extend_from_slice(&other.intervals);
        Self::new(v)
    }

    pub fn intersect(&self, other: &Self) -> Self {
        let (a, b) = (&self.intervals, &other.intervals);
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::new();
        while i < a.len() && j < b.len() {
            let lo = a[i].0.max(b[j].0);
            let hi = a[i].1.min(b[j].1);
            if lo <= hi {
                out.push((lo, hi));
            }
            if a[i].1 < b[j].1 {
                i += 1;
            } else {
                j += 1;
            }
        }
        Self::new(out)
    }

    /// Closure of `self \ other`; zero-length remnants are dropped.
    pub fn subtract(&self, other: &Self) -> Self {
        let mut out = Vec::new();
        for &(lo, hi) in &self.intervals {
            let mut cur = lo;
            for &(olo, ohi) in &other.intervals {
                if ohi <= cur {
                    continue;
                }
                if olo >= hi {
                    break;
                }
                if olo > cur {
                    out.push((cur, olo));
                }
                cur = cur.max(ohi);
                if cur >= hi {
                    break;
                }
            }
            if cur < hi {
                out.push((cur, hi));
            }
        }
        Self::new(out)
    }

    /// Sub-intervals of `[lo, hi]` outside `self`.
    pub fn complement_within(&self, lo: f64, hi: f64) -> Self {
        Self::interval(lo, hi).subtract(self)
    }
}
