//! Integer-valued piecewise-constant functions on the real line.

use serde::{Deserialize, Serialize};

use crate::intervals::UnionOfIntervals;

/// `values[i]` holds on `[breakpoints[i], breakpoints[i+1])`; the function
/// vanishes outside `[breakpoints[0], breakpoints[last]]`. Adjacent pieces
/// always carry different values.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct StepFunction {
    breakpoints: Vec<f64>,
    values: Vec<u32>,
}

impl StepFunction {
    pub fn zero() -> Self {
        StepFunction::default()
    }

    pub fn constant(a: f64, b: f64, value: u32) -> Self {
        if value == 0 || b <= a {
            return Self::zero();
        }
        StepFunction {
            breakpoints: vec![a, b],
            values: vec![value],
        }
    }

    /// Sum of indicator functions of the closed intervals `[a, b]`.
    ///
    /// Endpoints within `merge_eps` of the first endpoint of their cluster
    /// are treated as one breakpoint, so exactly abutting intervals at
    /// tiling directions produce no spurious sliver pieces.
    pub fn from_intervals<I>(intervals: I, merge_eps: f64) -> Self
    where
        I: IntoIterator<Item = (f64, f64)>,
    {
        let mut events: Vec<(f64, i64)> = Vec::new();
        for (a, b) in intervals {
            if b > a {
                events.push((a, 1));
                events.push((b, -1));
            }
        }
        events.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut raw_bp = Vec::with_capacity(events.len());
        let mut raw_val = Vec::with_capacity(events.len());
        let mut level: i64 = 0;
        let mut i = 0;
        while i < events.len() {
            let rep = events[i].0;
            while i < events.len() && events[i].0 - rep <= merge_eps {
                level += events[i].1;
                i += 1;
            }
            debug_assert!(level >= 0);
            raw_bp.push(rep);
            raw_val.push(level.max(0) as u32);
        }
        Self::from_raw(raw_bp, raw_val)
    }

    /// `raw_val[i]` is the value to the right of `raw_bp[i]`; the final
    /// value must be zero.
    fn from_raw(raw_bp: Vec<f64>, raw_val: Vec<u32>) -> Self {
        let mut breakpoints = Vec::with_capacity(raw_bp.len());
        let mut after: Vec<u32> = Vec::with_capacity(raw_bp.len());
        let mut current = 0u32;
        for (x, v) in raw_bp.into_iter().zip(raw_val) {
            if v != current {
                breakpoints.push(x);
                after.push(v);
                current = v;
            }
        }
        debug_assert_eq!(current, 0);
        after.pop();
        StepFunction {
            breakpoints,
            values: after,
        }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    pub fn pieces(&self) -> impl Iterator<Item = (f64, f64, u32)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(i, &v)| (self.breakpoints[i], self.breakpoints[i + 1], v))
    }

    pub fn is_zero(&self) -> bool {
        self.values.is_empty()
    }

    pub fn hull(&self) -> Option<(f64, f64)> {
        Some((*self.breakpoints.first()?, *self.breakpoints.last()?))
    }

    pub fn eval(&self, x: f64) -> u32 {
        let i = self.breakpoints.partition_point(|&b| b <= x);
        if i == 0 || i > self.values.len() {
            0
        } else {
            self.values[i - 1]
        }
    }

    pub fn max_value(&self) -> u32 {
        self.values.iter().copied().max().unwrap_or(0)
    }

    pub fn integral(&self) -> f64 {
        self.pieces().map(|(a, b, v)| (b - a) * v as f64).sum()
    }

    pub fn l2_squared(&self) -> f64 {
        self.pieces().map(|(a, b, v)| (b - a) * (v as f64) * (v as f64)).sum()
    }

    fn level_where(&self, keep: impl Fn(u32) -> bool, merge_eps: f64) -> UnionOfIntervals {
        UnionOfIntervals::from_sorted(
            self.pieces().filter(|p| keep(p.2)).map(|(a, b, _)| (a, b)).collect(),
            merge_eps,
        )
    }

    /// `{f ≥ 1}`.
    pub fn support(&self, merge_eps: f64) -> UnionOfIntervals {
        self.level_where(|v| v >= 1, merge_eps)
    }

    /// `{f ≥ level}`.
    pub fn level_set_ge(&self, level: f64, merge_eps: f64) -> UnionOfIntervals {
        self.level_where(|v| v as f64 >= level, merge_eps)
    }

    /// `{f > level}`.
    pub fn level_set_gt(&self, level: f64, merge_eps: f64) -> UnionOfIntervals {
        self.level_where(|v| v as f64 > level, merge_eps)
    }

    /// Pointwise maximum on the merged breakpoint grid.
    pub fn pointwise_max(fs: &[&StepFunction], merge_eps: f64) -> StepFunction {
        let mut grid: Vec<f64> = fs.iter().flat_map(|f| f.breakpoints.iter().copied()).collect();
        grid.sort_by(f64::total_cmp);
        let mut merged: Vec<f64> = Vec::with_capacity(grid.len());
        for x in grid {
            match merged.last() {
                Some(&rep) if x - rep <= merge_eps => {}
                _ => merged.push(x),
            }
        }
        let mut cursors = vec![0usize; fs.len()];
        let mut raw_val = Vec::with_capacity(merged.len());
        for w in merged.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            let mut best = 0;
            for (f, cur) in fs.iter().zip(cursors.iter_mut()) {
                while *cur < f.breakpoints.len() && f.breakpoints[*cur] <= mid {
                    *cur += 1;
                }
                let v = if *cur == 0 || *cur > f.values.len() {
                    0
                } else {
                    f.values[*cur - 1]
                };
                best = best.max(v);
            }
            raw_val.push(best);
        }
        if !merged.is_empty() {
            raw_val.push(0);
        }
        Self::from_raw(merged, raw_val)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single_interval() {
        let f = StepFunction::from_intervals([(-1.0, 1.0)], 0.0);
        assert_eq!(f.breakpoints(), &[-1.0, 1.0]);
        assert_eq!(f.values(), &[1]);
        assert_eq!(f.integral(), 2.0);
        assert_eq!(f.support(0.0).length(), 2.0);
        assert_eq!(f.eval(0.0), 1);
        assert_eq!(f.eval(1.5), 0);
    }

    #[test]
    fn abutting_intervals_collapse() {
        let f = StepFunction::from_intervals([(0.0, 1.0), (1.0 + 1e-17, 2.0)], 1e-12);
        assert_eq!(f.values(), &[1]);
        assert_eq!(f.breakpoints(), &[0.0, 2.0]);
    }

    #[test]
    fn overlap_and_gap() {
        let f = StepFunction::from_intervals([(0.0, 2.0), (1.0, 3.0), (5.0, 6.0)], 0.0);
        assert_eq!(f.breakpoints(), &[0.0, 1.0, 2.0, 3.0, 5.0, 6.0]);
        assert_eq!(f.values(), &[1, 2, 1, 0, 1]);
        assert_eq!(f.max_value(), 2);
        assert_eq!(f.integral(), 5.0);
        assert_eq!(f.l2_squared(), 1.0 + 4.0 + 1.0 + 1.0);
        assert_eq!(f.support(0.0).intervals(), &[(0.0, 3.0), (5.0, 6.0)]);
        assert_eq!(f.level_set_ge(2.0, 0.0).intervals(), &[(1.0, 2.0)]);
        assert!(f.level_set_gt(2.0, 0.0).is_empty());
    }

    #[test]
    fn zero_function() {
        let f = StepFunction::zero();
        assert!(f.is_zero());
        assert_eq!(f.support(0.0).length(), 0.0);
        assert!(f.support(0.0).is_empty());
        assert_eq!(StepFunction::constant(1.0, 0.0, 3), f);
    }

    #[test]
    fn constant_level_sets() {
        let f = StepFunction::constant(-1.0, 1.0, 1);
        assert!(f.level_set_ge(2.0, 0.0).is_empty());
        assert_eq!(f.level_set_ge(1.0, 0.0), f.support(0.0));
    }

    #[test]
    fn pointwise_max_simple() {
        let a = StepFunction::from_intervals([(0.0, 2.0), (1.0, 2.0)], 0.0);
        let b = StepFunction::from_intervals([(1.5, 4.0)], 0.0);
        let m = StepFunction::pointwise_max(&[&a, &b], 0.0);
        assert_eq!(m.breakpoints(), &[0.0, 1.0, 2.0, 4.0]);
        assert_eq!(m.values(), &[1, 2, 1]);
    }

    proptest! {
        #[test]
        fn sweep_matches_brute_count(raw in prop::collection::vec((-10.0f64..10.0, 0.01f64..3.0), 1..30), probe in -12.0f64..12.0) {
            let ivs: Vec<(f64, f64)> = raw.iter().map(|&(a, w)| (a, a + w)).collect();
            let f = StepFunction::from_intervals(ivs.iter().copied(), 0.0);
            let near = ivs.iter().any(|&(a, b)| (probe - a).abs() < 1e-9 || (probe - b).abs() < 1e-9);
            if !near {
                let brute = ivs.iter().filter(|&&(a, b)| a <= probe && probe < b).count() as u32;
                prop_assert_eq!(f.eval(probe), brute);
            }
            let mass: f64 = ivs.iter().map(|(a, b)| b - a).sum();
            prop_assert!((f.integral() - mass).abs() < 1e-9 * mass.max(1.0));
            for w in f.values().windows(2) {
                prop_assert_ne!(w[0], w[1]);
            }
        }

        #[test]
        fn max_dominates(raw_a in prop::collection::vec((-5.0f64..5.0, 0.1f64..2.0), 1..10),
                         raw_b in prop::collection::vec((-5.0f64..5.0, 0.1f64..2.0), 1..10),
                         probe in -6.0f64..6.0) {
            let a = StepFunction::from_intervals(raw_a.iter().map(|&(x, w)| (x, x + w)), 0.0);
            let b = StepFunction::from_intervals(raw_b.iter().map(|&(x, w)| (x, x + w)), 0.0);
            let m = StepFunction::pointwise_max(&[&a, &b], 0.0);
            let on_bp = a.breakpoints().iter().chain(b.breakpoints()).any(|&x| (x - probe).abs() < 1e-9);
            if !on_bp {
                prop_assert_eq!(m.eval(probe), a.eval(probe).max(b.eval(probe)));
            }
        }
    }
}
