//! Named sets, returned as [`LazySet`] values.

use num_rational::Ratio;

use crate::error::SetError;
use crate::real::Real;
use crate::sets::{AbSet, LazySet, Rotation};

/// `E = ⋃_n [4^n, 2·4^n)`: upper density 2/3 along `[0, 2^{2N+1})`, while every
/// shift `E − h` differs from `E` on a set of density zero along those windows.
pub fn hindman_set() -> LazySet {
    LazySet::HindmanBlocks
}

/// A set of upper density `a` whose union of the shifts `E − 1, …, E − N`
/// has upper density `b` for large `N`.
pub fn ab_set(a: Ratio<i64>, b: Ratio<i64>) -> Result<LazySet, SetError> {
    AbSet::new(a, b).map(LazySet::Ab)
}

/// `{n ≥ 0 : frac(x0 + n·alpha) ∈ [u, v)}`.
pub fn rotation_return_set(alpha: Real, x0: Real, u: Real, v: Real) -> Result<LazySet, SetError> {
    Rotation::new(alpha, u, v, x0).map(LazySet::BeattyRotation)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sets::{count_on, FolnerFamily, IntervalSource, ShiftExpr, Window};

    fn r(s: &str) -> Real {
        Real::parse(s).unwrap()
    }

    #[test]
    fn hindman_first_blocks() {
        let set = hindman_set();
        let got: Vec<_> = set.stream(Window::new(0, 32).unwrap()).unwrap().map(|i| (i.lo, i.hi)).collect();
        assert_eq!(got, vec![(1, 2), (4, 8), (16, 32)]);
    }

    #[test]
    fn hindman_dyadic_density_closed_form() {
        let e = ShiftExpr::atom(0);
        for n in 0..=20u32 {
            let w = FolnerFamily::DyadicEven.window(n).unwrap();
            let count = count_on(&e, &hindman_set(), w).unwrap();
            // 3·count = 4^{N+1} − 1
            assert_eq!(3 * count as u128, 4u128.pow(n + 1) - 1, "N={n}");
        }
    }

    #[test]
    fn ab_degenerate_is_hindman() {
        let ab = ab_set(Ratio::new(2, 3), Ratio::new(2, 3)).unwrap();
        let w = Window::new(-5, 1 << 20).unwrap();
        let a: Vec<_> = ab.stream(w).unwrap().collect();
        let h: Vec<_> = hindman_set().stream(w).unwrap().collect();
        assert_eq!(a, h);
    }

    #[test]
    fn ab_rejects_bad_pairs() {
        assert!(ab_set(Ratio::new(1, 2), Ratio::new(1, 3)).is_err());
        assert!(ab_set(Ratio::new(0, 1), Ratio::new(1, 3)).is_err());
        assert!(ab_set(Ratio::new(1, 2), Ratio::new(1, 1)).is_err());
    }

    #[test]
    fn rotation_golden_half() {
        let set = rotation_return_set(r("golden"), r("0"), r("0"), r("1/2")).unwrap();
        let w = Window::new(0, 1_000_000).unwrap();
        let count = count_on(&ShiftExpr::atom(0), &set, w).unwrap();
        // direct summation oracle in f64, far from the endpoints for n < 10^6
        let g = (5f64.sqrt() - 1.0) / 2.0;
        let direct = (0..1_000_000u64).filter(|&n| (n as f64 * g).fract() < 0.5).count() as u64;
        assert_eq!(count, direct);
        assert!((count as f64 / 1e6 - 0.5).abs() < 1e-3);
    }

    #[test]
    fn rotation_full_arc_and_origin() {
        let full = rotation_return_set(r("0.41421356237309504880168872420969807857"), r("0.3"), r("0"), r("1")).unwrap();
        let w = Window::new(-10, 100).unwrap();
        assert_eq!(count_on(&ShiftExpr::atom(0), &full, w).unwrap(), 100);
        let inside = rotation_return_set(r("golden"), r("0.3"), r("0.25"), r("0.5")).unwrap();
        assert!(inside.contains(0).unwrap());
        let outside = rotation_return_set(r("golden"), r("0.6"), r("0.25"), r("0.5")).unwrap();
        assert!(!outside.contains(0).unwrap());
    }
}
