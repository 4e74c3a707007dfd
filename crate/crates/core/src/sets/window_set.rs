use std::fmt;
use std::str::FromStr;

use super::stream::{self, IntervalIter};
use super::{Interval, IntervalSource, Window};
use crate::error::SetError;

/// A finite subset of a window, stored as sorted, disjoint, non-adjacent
/// half-open intervals. The representation is canonical: two equal sets have
/// identical interval lists.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WindowSet {
    window: Window,
    intervals: Vec<Interval>,
}

impl WindowSet {
    /// Validating constructor.
    pub fn new(window: Window, intervals: Vec<Interval>) -> Result<Self, SetError> {
        for pair in intervals.windows(2) {
            if pair[0].hi >= pair[1].lo {
                return Err(SetError::InvalidParameter(format!(
                    "intervals {} and {} are not sorted, disjoint and non-adjacent",
                    pair[0], pair[1]
                )));
            }
        }
        for iv in &intervals {
            if iv.lo >= iv.hi {
                return Err(SetError::EmptyInterval { lo: iv.lo, hi: iv.hi });
            }
            if iv.lo < window.lo || iv.hi > window.hi {
                return Err(SetError::InvalidParameter(format!("interval {iv} lies outside window {window}")));
            }
        }
        Ok(Self { window, intervals })
    }

    /// Collects a canonical stream that already lies inside `window`.
    pub fn from_stream(window: Window, iter: impl Iterator<Item = Interval>) -> Self {
        let intervals: Vec<Interval> = iter.collect();
        debug_assert!(intervals.windows(2).all(|p| p[0].hi < p[1].lo));
        debug_assert!(intervals.iter().all(|iv| iv.lo >= window.lo && iv.hi <= window.hi));
        Self { window, intervals }
    }

    pub fn empty(window: Window) -> Self {
        Self { window, intervals: Vec::new() }
    }

    pub fn full(window: Window) -> Self {
        Self { window, intervals: vec![window.as_interval()] }
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn count(&self) -> u64 {
        self.intervals.iter().map(Interval::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn contains(&self, n: i64) -> bool {
        let idx = self.intervals.partition_point(|iv| iv.hi <= n);
        self.intervals.get(idx).is_some_and(|iv| iv.lo <= n)
    }

    pub fn iter(&self) -> impl Iterator<Item = Interval> + '_ {
        self.intervals.iter().copied()
    }

    fn same_window(&self, other: &Self) -> Result<(), SetError> {
        if self.window == other.window {
            Ok(())
        } else {
            Err(SetError::WindowMismatch { left: self.window, right: other.window })
        }
    }

    pub fn union(&self, other: &Self) -> Result<Self, SetError> {
        self.same_window(other)?;
        let it = stream::union(Box::new(self.iter()), Box::new(other.iter()));
        Ok(Self::from_stream(self.window, it))
    }

    pub fn intersect(&self, other: &Self) -> Result<Self, SetError> {
        self.same_window(other)?;
        let it = stream::intersect(Box::new(self.iter()), Box::new(other.iter()));
        Ok(Self::from_stream(self.window, it))
    }

    /// Complement relative to the ambient window.
    pub fn complement(&self) -> Self {
        Self::from_stream(self.window, stream::complement(Box::new(self.iter()), self.window))
    }

    /// `{n ∈ w : n + h ∈ self}`. The ambient window must cover `w + h`.
    pub fn shift(&self, h: i64, w: Window) -> Result<Self, SetError> {
        let source = w.offset(h, h)?;
        let it = self.stream(source)?;
        Ok(Self::from_stream(w, stream::shift(it, h)))
    }

    /// Number of elements strictly below `x` (clamped to the window).
    pub fn count_below(&self, x: i64, prefix: &[u64]) -> u64 {
        let idx = self.intervals.partition_point(|iv| iv.hi <= x);
        let partial = match self.intervals.get(idx) {
            Some(iv) if iv.lo < x => (x - iv.lo) as u64,
            _ => 0,
        };
        prefix[idx] + partial
    }

    /// `prefix[i]` = total length of the first `i` intervals.
    pub fn prefix_counts(&self) -> Vec<u64> {
        let mut out = Vec::with_capacity(self.intervals.len() + 1);
        let mut acc = 0u64;
        out.push(0);
        for iv in &self.intervals {
            acc += iv.len();
            out.push(acc);
        }
        out
    }
}

impl IntervalSource for WindowSet {
    fn stream(&self, w: Window) -> Result<IntervalIter<'_>, SetError> {
        if !self.window.covers(&w) {
            return Err(SetError::InsufficientWindow { needed: w, available: self.window });
        }
        let start = self.intervals.partition_point(|iv| iv.hi <= w.lo);
        Ok(stream::clip(self.intervals[start..].iter().copied(), w))
    }
}

impl fmt::Display for WindowSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "window={} intervals=", self.window)?;
        for iv in &self.intervals {
            write!(f, "{iv}")?;
        }
        Ok(())
    }
}

/// Parses a list of `[a,b)` groups, e.g. `[1,2)[4,8)`.
pub fn parse_interval_list(text: &str) -> Result<Vec<Interval>, SetError> {
    let bad = |msg: &str| SetError::InvalidParameter(format!("{msg} in interval list {text:?}"));
    let mut out = Vec::new();
    let mut rest = text.trim();
    while !rest.is_empty() {
        let body = rest.strip_prefix('[').ok_or_else(|| bad("expected '['"))?;
        let close = body.find(')').ok_or_else(|| bad("expected ')'"))?;
        let (lo, hi) = body[..close].split_once(',').ok_or_else(|| bad("expected ','"))?;
        let lo: i64 = lo.trim().parse().map_err(|_| bad("bad lower endpoint"))?;
        let hi: i64 = hi.trim().parse().map_err(|_| bad("bad upper endpoint"))?;
        out.push(Interval::new(lo, hi)?);
        rest = body[close + 1..].trim_start();
    }
    Ok(out)
}

impl FromStr for WindowSet {
    type Err = SetError;

    fn from_str(s: &str) -> Result<Self, SetError> {
        let bad = || SetError::InvalidParameter(format!("malformed window set {s:?}"));
        let rest = s.trim().strip_prefix("window=").ok_or_else(bad)?;
        let (window_text, rest) = rest.split_once(' ').ok_or_else(bad)?;
        let list = rest.trim_start().strip_prefix("intervals=").ok_or_else(bad)?;
        let w = parse_interval_list(window_text)?;
        let [w] = w.as_slice() else { return Err(bad()) };
        let window = Window::new(w.lo, w.hi)?;
        Self::new(window, parse_interval_list(list)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(lo: i64, hi: i64) -> Window {
        Window::new(lo, hi).unwrap()
    }

    fn ws(window: Window, ivs: &[(i64, i64)]) -> WindowSet {
        WindowSet::new(window, ivs.iter().map(|&(a, b)| Interval::new(a, b).unwrap()).collect()).unwrap()
    }

    #[test]
    fn union_intersect_example() {
        let x = ws(w(0, 8), &[(0, 4)]);
        let y = ws(w(0, 8), &[(2, 6)]);
        assert_eq!(x.union(&y).unwrap(), ws(w(0, 8), &[(0, 6)]));
        assert_eq!(x.intersect(&y).unwrap(), ws(w(0, 8), &[(2, 4)]));
    }

    #[test]
    fn window_mismatch_is_error() {
        let x = ws(w(0, 8), &[(0, 4)]);
        let y = ws(w(0, 9), &[(2, 6)]);
        assert!(matches!(x.union(&y), Err(SetError::WindowMismatch { .. })));
        assert!(x.intersect(&y).is_err());
    }

    #[test]
    fn shift_example_and_identity() {
        let x = ws(w(0, 16), &[(4, 8)]);
        assert_eq!(x.shift(2, w(0, 8)).unwrap(), ws(w(0, 8), &[(2, 6)]));
        assert_eq!(x.shift(0, w(0, 8)).unwrap(), ws(w(0, 8), &[(4, 8)]));
    }

    #[test]
    fn shift_needs_wide_enough_source() {
        let x = ws(w(0, 16), &[(4, 8)]);
        assert!(matches!(x.shift(10, w(0, 8)), Err(SetError::InsufficientWindow { .. })));
        assert!(x.shift(-1, w(0, 8)).is_err());
    }

    #[test]
    fn rejects_non_canonical() {
        assert!(WindowSet::new(w(0, 10), vec![Interval { lo: 0, hi: 2 }, Interval { lo: 2, hi: 4 }]).is_err());
        assert!(WindowSet::new(w(0, 10), vec![Interval { lo: 8, hi: 12 }]).is_err());
    }

    #[test]
    fn serialization() {
        let x = ws(w(0, 128), &[(1, 2), (4, 8), (16, 32), (64, 128)]);
        let text = x.to_string();
        assert_eq!(text, "window=[0,128) intervals=[1,2)[4,8)[16,32)[64,128)");
        assert_eq!(text.parse::<WindowSet>().unwrap(), x);
        assert_eq!("window=[0,5) intervals=".parse::<WindowSet>().unwrap(), WindowSet::empty(w(0, 5)));
        assert!("window=[0,5) intervals=[1,2)[2,3)".parse::<WindowSet>().is_err());
    }

    #[test]
    fn counting_helpers() {
        let x = ws(w(0, 20), &[(2, 5), (10, 12)]);
        let prefix = x.prefix_counts();
        assert_eq!(x.count_below(0, &prefix), 0);
        assert_eq!(x.count_below(4, &prefix), 2);
        assert_eq!(x.count_below(11, &prefix), 4);
        assert_eq!(x.count_below(20, &prefix), 5);
        assert!(x.contains(11) && !x.contains(12) && !x.contains(5));
    }
}
