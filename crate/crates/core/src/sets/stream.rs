//! Streaming set algebra on sorted interval sequences.
//!
//! Every stream here yields intervals in canonical form: sorted by `lo`,
//! pairwise disjoint and non-adjacent (`prev.hi < next.lo`). All combinators
//! preserve that form, so whole expression trees evaluate in one pass with
//! memory proportional to the tree depth.

use std::iter::Peekable;

use super::{Interval, Window};

pub type IntervalIter<'a> = Box<dyn Iterator<Item = Interval> + 'a>;

/// Merges overlapping or adjacent intervals of a stream sorted by `lo`.
pub struct Coalesce<I: Iterator<Item = Interval>> {
    inner: I,
    pending: Option<Interval>,
}

impl<I: Iterator<Item = Interval>> Coalesce<I> {
    pub fn new(inner: I) -> Self {
        Self { inner, pending: None }
    }
}

impl<I: Iterator<Item = Interval>> Iterator for Coalesce<I> {
    type Item = Interval;

    fn next(&mut self) -> Option<Interval> {
        let mut current = match self.pending.take() {
            Some(iv) => iv,
            None => self.inner.next()?,
        };
        for next in self.inner.by_ref() {
            if next.lo <= current.hi {
                current.hi = current.hi.max(next.hi);
            } else {
                self.pending = Some(next);
                return Some(current);
            }
        }
        Some(current)
    }
}

/// Restricts a sorted stream to `w`, stopping as soon as it passes `w.hi`.
pub fn clip<'a>(iter: impl Iterator<Item = Interval> + 'a, w: Window) -> IntervalIter<'a> {
    Box::new(
        iter.take_while(move |iv| iv.lo < w.hi).filter_map(move |iv| {
            let lo = iv.lo.max(w.lo);
            let hi = iv.hi.min(w.hi);
            (lo < hi).then_some(Interval { lo, hi })
        }),
    )
}

/// `{n : n + h ∈ S}` for the stream `S`.
pub fn shift<'a>(iter: impl Iterator<Item = Interval> + 'a, h: i64) -> IntervalIter<'a> {
    Box::new(iter.map(move |iv| Interval { lo: iv.lo - h, hi: iv.hi - h }))
}

/// `⋃_{h ∈ [p, q]} (S − h)`: each `[a, b)` becomes `[a − q, b − p)`.
pub fn dilate<'a>(iter: impl Iterator<Item = Interval> + 'a, p: i64, q: i64) -> IntervalIter<'a> {
    debug_assert!(p <= q);
    Box::new(Coalesce::new(iter.map(move |iv| Interval { lo: iv.lo - q, hi: iv.hi - p })))
}

pub struct Union<'a> {
    a: Peekable<IntervalIter<'a>>,
    b: Peekable<IntervalIter<'a>>,
}

impl Iterator for Union<'_> {
    type Item = Interval;

    fn next(&mut self) -> Option<Interval> {
        let take_a = match (self.a.peek(), self.b.peek()) {
            (Some(x), Some(y)) => x.lo <= y.lo,
            (Some(_), None) => true,
            (None, Some(_)) => false,
            (None, None) => return None,
        };
        if take_a {
            self.a.next()
        } else {
            self.b.next()
        }
    }
}

pub fn union<'a>(a: IntervalIter<'a>, b: IntervalIter<'a>) -> IntervalIter<'a> {
    Box::new(Coalesce::new(Union { a: a.peekable(), b: b.peekable() }))
}

pub struct Intersect<'a> {
    a: Peekable<IntervalIter<'a>>,
    b: Peekable<IntervalIter<'a>>,
}

impl Iterator for Intersect<'_> {
    type Item = Interval;

    fn next(&mut self) -> Option<Interval> {
        loop {
            let x = *self.a.peek()?;
            let y = *self.b.peek()?;
            let lo = x.lo.max(y.lo);
            let hi = x.hi.min(y.hi);
            if x.hi <= y.hi {
                self.a.next();
            } else {
                self.b.next();
            }
            if lo < hi {
                return Some(Interval { lo, hi });
            }
        }
    }
}

pub fn intersect<'a>(a: IntervalIter<'a>, b: IntervalIter<'a>) -> IntervalIter<'a> {
    Box::new(Intersect { a: a.peekable(), b: b.peekable() })
}

/// Complement relative to `w`; the input must already lie inside `w`.
pub struct Complement<'a> {
    inner: IntervalIter<'a>,
    cursor: i64,
    end: i64,
    done: bool,
}

impl Iterator for Complement<'_> {
    type Item = Interval;

    fn next(&mut self) -> Option<Interval> {
        if self.done {
            return None;
        }
        for iv in self.inner.by_ref() {
            let gap = Interval { lo: self.cursor, hi: iv.lo };
            self.cursor = iv.hi;
            if gap.lo < gap.hi {
                return Some(gap);
            }
        }
        self.done = true;
        (self.cursor < self.end).then_some(Interval { lo: self.cursor, hi: self.end })
    }
}

pub fn complement<'a>(inner: IntervalIter<'a>, w: Window) -> IntervalIter<'a> {
    Box::new(Complement { inner, cursor: w.lo, end: w.hi, done: false })
}

/// Balanced n-ary fold, so that deep unions do not become long chains.
pub fn fold_balanced<'a>(
    mut parts: Vec<IntervalIter<'a>>,
    op: fn(IntervalIter<'a>, IntervalIter<'a>) -> IntervalIter<'a>,
) -> Option<IntervalIter<'a>> {
    while parts.len() > 1 {
        let mut next = Vec::with_capacity(parts.len().div_ceil(2));
        let mut it = parts.into_iter();
        while let Some(a) = it.next() {
            match it.next() {
                Some(b) => next.push(op(a, b)),
                None => next.push(a),
            }
        }
        parts = next;
    }
    parts.pop()
}

pub fn total_len(iter: impl Iterator<Item = Interval>) -> u64 {
    iter.map(|iv| iv.len()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(lo: i64, hi: i64) -> Interval {
        Interval { lo, hi }
    }

    fn boxed(v: Vec<Interval>) -> IntervalIter<'static> {
        Box::new(v.into_iter())
    }

    #[test]
    fn coalesce_merges_adjacent() {
        let out: Vec<_> = Coalesce::new(vec![iv(0, 2), iv(2, 3), iv(5, 6), iv(5, 9)].into_iter()).collect();
        assert_eq!(out, vec![iv(0, 3), iv(5, 9)]);
    }

    #[test]
    fn union_and_intersect_small() {
        let u: Vec<_> = union(boxed(vec![iv(0, 4)]), boxed(vec![iv(2, 6)])).collect();
        assert_eq!(u, vec![iv(0, 6)]);
        let i: Vec<_> = intersect(boxed(vec![iv(0, 4)]), boxed(vec![iv(2, 6)])).collect();
        assert_eq!(i, vec![iv(2, 4)]);
    }

    #[test]
    fn complement_edges() {
        let w = Window { lo: 0, hi: 10 };
        let c: Vec<_> = complement(boxed(vec![iv(0, 2), iv(5, 10)]), w).collect();
        assert_eq!(c, vec![iv(2, 5)]);
        let full: Vec<_> = complement(boxed(vec![]), w).collect();
        assert_eq!(full, vec![iv(0, 10)]);
    }

    #[test]
    fn dilation_equals_union_of_shifts() {
        let base = vec![iv(3, 4), iv(10, 12), iv(20, 21)];
        let d: Vec<_> = dilate(base.clone().into_iter(), 1, 3).collect();
        let parts = (1..=3).map(|h| shift(base.clone().into_iter(), h)).collect();
        let u: Vec<_> = fold_balanced(parts, union).unwrap().collect();
        assert_eq!(d, u);
    }
}
