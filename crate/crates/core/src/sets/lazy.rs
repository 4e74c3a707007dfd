use std::fmt;

use num_rational::Ratio;

use super::stream::{self, Coalesce, IntervalIter};
use super::{Interval, IntervalSource, Window};
use crate::dd::DoubleDouble;
use crate::error::SetError;
use crate::real::Real;

/// Fractional parts closer than this to an arc endpoint are reported as a
/// precision failure.
pub const GUARD_BAND: f64 = 1e-20;

/// Circle-rotation return set `{n ≥ 0 : frac(x0 + n·alpha) ∈ [arc_lo, arc_hi)}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Rotation {
    pub alpha: Real,
    pub arc_lo: Real,
    pub arc_hi: Real,
    pub x0: Real,
}

impl Rotation {
    pub fn new(alpha: Real, arc_lo: Real, arc_hi: Real, x0: Real) -> Result<Self, SetError> {
        let zero = DoubleDouble::ZERO;
        let one = DoubleDouble::ONE;
        let (a, u, v, x) = (alpha.value(), arc_lo.value(), arc_hi.value(), x0.value());
        if !(a > zero && a < one) {
            return Err(SetError::InvalidParameter(format!("rotation angle {alpha} must lie in (0,1)")));
        }
        if !(u >= zero && u < v && v <= one) {
            return Err(SetError::InvalidParameter(format!("arc [{arc_lo},{arc_hi}) must satisfy 0 <= u < v <= 1")));
        }
        if !(x >= zero && x < one) {
            return Err(SetError::InvalidParameter(format!("starting point {x0} must lie in [0,1)")));
        }
        Ok(Self { alpha, arc_lo, arc_hi, x0 })
    }

    fn full_arc(&self) -> bool {
        self.arc_lo.value() == DoubleDouble::ZERO && self.arc_hi.value() == DoubleDouble::ONE
    }

    /// Membership of `n`, or a precision failure inside the guard band.
    pub fn member(&self, n: i64) -> Result<bool, SetError> {
        if n < 0 {
            return Ok(false);
        }
        if self.full_arc() {
            return Ok(true);
        }
        let (u, v) = (self.arc_lo.value(), self.arc_hi.value());
        if n == 0 {
            let x = self.x0.value();
            return Ok(u <= x && x < v);
        }
        let t = self.x0.value() + self.alpha.value().mul_f64(n as f64);
        let f = t.fract();
        let guard = GUARD_BAND.max(t.abs().to_f64() * 2f64.powi(-100));
        let circle_dist = |endpoint: DoubleDouble| {
            let d = (f - endpoint).abs().to_f64();
            d.min(1.0 - d)
        };
        if circle_dist(u) < guard || circle_dist(v) < guard {
            return Err(SetError::Precision { n, frac: f.to_f64() });
        }
        Ok(u <= f && f < v)
    }

    fn runs(&self, w: Window) -> Result<Vec<Interval>, SetError> {
        let start = w.lo.max(0);
        if start >= w.hi {
            return Ok(Vec::new());
        }
        if self.full_arc() {
            return Ok(vec![Interval { lo: start, hi: w.hi }]);
        }
        let mut out = Vec::new();
        let mut run_start: Option<i64> = None;
        for n in start..w.hi {
            match (self.member(n)?, run_start) {
                (true, None) => run_start = Some(n),
                (false, Some(s)) => {
                    out.push(Interval { lo: s, hi: n });
                    run_start = None;
                }
                _ => {}
            }
        }
        if let Some(s) = run_start {
            out.push(Interval { lo: s, hi: w.hi });
        }
        Ok(out)
    }
}

/// Intersection of a dyadic block family `A` of density `b` with the Beatty
/// set `{⌊nβ⌋ : n ≥ 1}`, `β = b/a`.
///
/// Block `n ≥ 0` is `[⌈e_n (1 − 3b/4)⌉, e_n)` with `e_n = 2^{2n+1}`; at the
/// window end `e_N` the blocks occupy `(3b/4) Σ_{m≤N} e_m ≈ b·e_N` points.
/// For `b = 2/3` this is exactly Hindman's family `[4^n, 2·4^n)`.
#[derive(Clone, Debug, PartialEq)]
pub struct AbSet {
    pub a: Ratio<i64>,
    pub b: Ratio<i64>,
}

impl AbSet {
    pub fn new(a: Ratio<i64>, b: Ratio<i64>) -> Result<Self, SetError> {
        let zero = Ratio::from_integer(0);
        let one = Ratio::from_integer(1);
        if !(a > zero && a <= b && b < one) {
            return Err(SetError::InvalidParameter(format!("need 0 < a <= b < 1, got a={a} b={b}")));
        }
        Ok(Self { a, b })
    }

    pub fn beta(&self) -> Ratio<i64> {
        self.b / self.a
    }

    /// Non-empty blocks of `A` in increasing order.
    pub fn blocks(&self) -> impl Iterator<Item = Interval> {
        let p = *self.b.numer() as i128;
        let q = *self.b.denom() as i128;
        (0..32u32).filter_map(move |n| {
            let end: i128 = 1 << (2 * n + 1);
            let num = end.checked_mul(4 * q - 3 * p)?;
            let den = 4 * q;
            let start = num.div_euclid(den) + i128::from(num.rem_euclid(den) != 0);
            (start < end).then_some(Interval { lo: start as i64, hi: end.min(i64::MAX as i128) as i64 })
        })
    }

    pub fn in_blocks(&self, n: i64) -> bool {
        self.blocks().take_while(|iv| iv.lo <= n).any(|iv| iv.contains(n))
    }

    /// Whether `m = ⌊kβ⌋` for some `k ≥ 1`.
    pub fn in_beatty(&self, m: i64) -> bool {
        let beta = self.beta();
        let (p, q) = (*beta.numer() as i128, *beta.denom() as i128);
        let m = m as i128;
        // smallest k with k·p ≥ m·q
        let k = (m * q).div_euclid(p) + i128::from((m * q).rem_euclid(p) != 0);
        k >= 1 && (k * p).div_euclid(q) == m
    }

    fn beatty_in(&self, w: Interval) -> impl Iterator<Item = Interval> {
        let beta = self.beta();
        let (p, q) = (*beta.numer() as i128, *beta.denom() as i128);
        let first_k = ((w.lo as i128 * q).div_euclid(p)).max(1);
        let hi = w.hi as i128;
        let lo = w.lo as i128;
        (first_k..)
            .map(move |k| (k * p).div_euclid(q))
            .take_while(move |&m| m < hi)
            .filter(move |&m| m >= lo)
            .map(|m| Interval { lo: m as i64, hi: m as i64 + 1 })
    }
}

/// A rule emitting the intervals of an infinite structured subset of ℤ in
/// increasing order.
#[derive(Clone, Debug, PartialEq)]
pub enum LazySet {
    /// `⋃_{n≥0} [4^n, 2·4^n)`.
    HindmanBlocks,
    BeattyRotation(Rotation),
    /// `{n ∈ ℤ : n mod modulus ∈ residues}`.
    Periodic { modulus: u64, residues: Vec<u64> },
    Ab(AbSet),
    ExplicitIntervals(Vec<Interval>),
}

impl LazySet {
    pub fn periodic(modulus: u64, residues: impl IntoIterator<Item = u64>) -> Result<Self, SetError> {
        if modulus == 0 || modulus > (1 << 40) {
            return Err(SetError::InvalidParameter(format!("modulus {modulus} out of range")));
        }
        let mut residues: Vec<u64> = residues.into_iter().collect();
        residues.sort_unstable();
        residues.dedup();
        if residues.last().is_some_and(|&r| r >= modulus) {
            return Err(SetError::InvalidParameter(format!("residues must be below the modulus {modulus}")));
        }
        Ok(Self::Periodic { modulus, residues })
    }

    pub fn explicit(mut intervals: Vec<Interval>) -> Self {
        intervals.sort();
        Self::ExplicitIntervals(Coalesce::new(intervals.into_iter()).collect())
    }

    pub fn evens() -> Self {
        Self::Periodic { modulus: 2, residues: vec![0] }
    }

    pub fn integers() -> Self {
        Self::Periodic { modulus: 1, residues: vec![0] }
    }

    pub fn empty() -> Self {
        Self::ExplicitIntervals(Vec::new())
    }

    /// Kinds whose membership is decided by exact integer arithmetic.
    pub fn is_exact(&self) -> bool {
        !matches!(self, Self::BeattyRotation(_))
    }

    pub fn contains(&self, n: i64) -> Result<bool, SetError> {
        Ok(match self {
            Self::HindmanBlocks => {
                if n < 1 {
                    false
                } else {
                    let k = (63 - n.leading_zeros()) / 2;
                    (n as i128) < (2i128 << (2 * k))
                }
            }
            Self::BeattyRotation(rot) => rot.member(n)?,
            Self::Periodic { modulus, residues } => {
                let r = (n as i128).rem_euclid(*modulus as i128) as u64;
                residues.binary_search(&r).is_ok()
            }
            Self::Ab(ab) => ab.in_blocks(n) && ab.in_beatty(n),
            Self::ExplicitIntervals(ivs) => {
                let idx = ivs.partition_point(|iv| iv.hi <= n);
                ivs.get(idx).is_some_and(|iv| iv.lo <= n)
            }
        })
    }

    fn raw_stream(&self, w: Window) -> Result<IntervalIter<'_>, SetError> {
        Ok(match self {
            Self::HindmanBlocks => Box::new(
                (0..32u32)
                    .map(|n| Interval { lo: 1i64 << (2 * n), hi: (2i128 << (2 * n)).min(i64::MAX as i128) as i64 })
                    .skip_while(move |iv| iv.hi <= w.lo),
            ),
            Self::BeattyRotation(rot) => Box::new(rot.runs(w)?.into_iter()),
            Self::Periodic { modulus, residues } => periodic_stream(*modulus, residues, w),
            Self::Ab(ab) => {
                let ab = ab.clone();
                Box::new(
                    ab.blocks()
                        .skip_while(move |iv| iv.hi <= w.lo)
                        .take_while(move |iv| iv.lo < w.hi)
                        .flat_map(move |block| {
                            let clipped = Interval { lo: block.lo.max(w.lo), hi: block.hi.min(w.hi) };
                            ab.beatty_in(clipped)
                        }),
                )
            }
            Self::ExplicitIntervals(ivs) => {
                let start = ivs.partition_point(|iv| iv.hi <= w.lo);
                Box::new(ivs[start..].iter().copied())
            }
        })
    }
}

fn periodic_stream(modulus: u64, residues: &[u64], w: Window) -> IntervalIter<'_> {
    if residues.is_empty() {
        return Box::new(std::iter::empty());
    }
    let m = modulus as i128;
    // maximal runs of consecutive residues inside one period
    let mut runs: Vec<(i128, i128)> = Vec::new();
    for &r in residues {
        match runs.last_mut() {
            Some(last) if last.1 == r as i128 => last.1 += 1,
            _ => runs.push((r as i128, r as i128 + 1)),
        }
    }
    let first_period = (w.lo as i128).div_euclid(m);
    let last_period = (w.hi as i128 - 1).div_euclid(m);
    Box::new((first_period..=last_period).flat_map(move |k| {
        let base = k * m;
        let lo = w.lo as i128;
        let hi = w.hi as i128;
        runs.clone().into_iter().filter_map(move |(a, b)| {
            let s = (base + a).max(lo);
            let e = (base + b).min(hi);
            (s < e).then_some(Interval { lo: s as i64, hi: e as i64 })
        })
    }))
}

impl IntervalSource for LazySet {
    fn stream(&self, w: Window) -> Result<IntervalIter<'_>, SetError> {
        let raw = self.raw_stream(w)?;
        Ok(Box::new(Coalesce::new(stream::clip(raw, w))))
    }
}

impl fmt::Display for LazySet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::HindmanBlocks => write!(f, "hindman"),
            Self::BeattyRotation(r) => {
                write!(f, "rot alpha={} u={} v={} x0={}", r.alpha, r.arc_lo, r.arc_hi, r.x0)
            }
            Self::Periodic { modulus, residues } => {
                let list: Vec<String> = residues.iter().map(u64::to_string).collect();
                write!(f, "periodic m={modulus} r={}", list.join(","))
            }
            Self::Ab(ab) => write!(f, "ab a={} b={}", ab.a, ab.b),
            Self::ExplicitIntervals(ivs) => {
                write!(f, "intervals ")?;
                for iv in ivs {
                    write!(f, "{iv}")?;
                }
                Ok(())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sets::WindowSet;

    fn w(lo: i64, hi: i64) -> Window {
        Window::new(lo, hi).unwrap()
    }

    fn restrict(set: &LazySet, win: Window) -> WindowSet {
        WindowSet::from_stream(win, set.stream(win).unwrap())
    }

    #[test]
    fn hindman_blocks_below_128() {
        let s = restrict(&LazySet::HindmanBlocks, w(0, 128));
        assert_eq!(s.to_string(), "window=[0,128) intervals=[1,2)[4,8)[16,32)[64,128)");
        assert_eq!(s.count(), 85);
    }

    #[test]
    fn hindman_membership() {
        let e = LazySet::HindmanBlocks;
        assert!(e.contains(5).unwrap());
        assert!(!e.contains(9).unwrap());
        assert!(e.contains(1).unwrap() && !e.contains(0).unwrap() && !e.contains(-4).unwrap());
        assert!(e.contains((1 << 60) + 5).unwrap());
        assert!(!e.contains((1 << 61) + 5).unwrap());
    }

    #[test]
    fn periodic_examples() {
        let evens = restrict(&LazySet::evens(), w(0, 10));
        assert_eq!(evens.count(), 5);
        assert!(evens.iter().all(|iv| iv.len() == 1 && iv.lo % 2 == 0));
        let full = restrict(&LazySet::integers(), w(5, 5 + 1000));
        assert_eq!(full.count(), 1000);
        assert_eq!(full.intervals().len(), 1);
        // residues adjacent across the period boundary merge into one run
        let wrap = LazySet::periodic(4, [3, 0]).unwrap();
        let s = restrict(&wrap, w(-1, 9));
        assert_eq!(s.to_string(), "window=[-1,9) intervals=[-1,1)[3,5)[7,9)");
    }

    #[test]
    fn ab_set_degenerates_to_hindman() {
        let ab = LazySet::Ab(AbSet::new(Ratio::new(2, 3), Ratio::new(2, 3)).unwrap());
        let win = w(-5, 1 << 12);
        assert_eq!(restrict(&ab, win), restrict(&LazySet::HindmanBlocks, win));
    }

    #[test]
    fn ab_set_rejects_bad_parameters() {
        assert!(AbSet::new(Ratio::new(2, 3), Ratio::new(1, 3)).is_err());
        assert!(AbSet::new(Ratio::new(0, 1), Ratio::new(1, 3)).is_err());
        assert!(AbSet::new(Ratio::new(1, 3), Ratio::new(1, 1)).is_err());
    }

    #[test]
    fn rotation_full_arc_and_origin() {
        let rot = |u: &str, v: &str, x0: &str| {
            Rotation::new(Real::parse("golden").unwrap(), Real::parse(u).unwrap(), Real::parse(v).unwrap(), Real::parse(x0).unwrap())
                .unwrap()
        };
        let full = LazySet::BeattyRotation(rot("0", "1", "0.3"));
        assert_eq!(restrict(&full, w(-10, 100)).count(), 100);
        let half = rot("0", "0.5", "0");
        assert!(half.member(0).unwrap());
        assert!(!rot("0.1", "0.5", "0").member(0).unwrap());
        assert!(rot("0.1", "0.5", "0.1").member(0).unwrap());
    }

    #[test]
    fn rotation_guard_band_reports_precision_failure() {
        // alpha = 1/4 puts n = 2 exactly on the endpoint 1/2
        let r = Rotation::new(Real::parse("0.25").unwrap(), Real::parse("0").unwrap(), Real::parse("0.5").unwrap(), Real::parse("0").unwrap())
            .unwrap();
        assert!(matches!(r.member(2), Err(SetError::Precision { n: 2, .. })));
        assert!(LazySet::BeattyRotation(r).stream(w(0, 10)).is_err());
    }

    #[test]
    fn rotation_parameter_validation() {
        let p = |s: &str| Real::parse(s).unwrap();
        assert!(Rotation::new(p("0"), p("0"), p("0.5"), p("0")).is_err());
        assert!(Rotation::new(p("golden"), p("0.5"), p("0.5"), p("0")).is_err());
        assert!(Rotation::new(p("golden"), p("0"), p("0.5"), p("1")).is_err());
    }
}
