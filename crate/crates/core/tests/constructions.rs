use std::collections::BTreeSet;

use ergolab::constructions::{ab_set, hindman_set, rotation_return_set};
use ergolab::real::Real;
use ergolab::sets::{count_on, upper_density_along, FolnerFamily, IntervalSource, ShiftExpr, Window, WindowSet};
use num_rational::Ratio;
use proptest::prelude::*;

fn members(set: &ergolab::sets::LazySet, w: Window) -> Vec<i64> {
    WindowSet::from_stream(w, set.stream(w).unwrap()).iter().flat_map(|iv| iv.lo..iv.hi).collect()
}

#[test]
fn hindman_complement_boundary() {
    let e = hindman_set();
    for h in 1..=100i64 {
        let expr = ShiftExpr::intersect(ShiftExpr::not_atom(0), ShiftExpr::atom(h));
        for n in 0..=16u32 {
            let w = FolnerFamily::DyadicEven.window(n).unwrap();
            let c = count_on(&expr, &e, w).unwrap();
            assert!(c <= h as u64 * (n as u64 + 1), "h={h} N={n}: {c}");
        }
    }
}

#[test]
fn ab_set_matches_two_condition_oracle() {
    for (a, b) in [((1, 3), (2, 3)), ((1, 2), (3, 4)), ((1, 5), (1, 4)), ((3, 7), (5, 7))] {
        let (a, b) = (Ratio::new(a.0, a.1), Ratio::new(b.0, b.1));
        let set = ab_set(a, b).unwrap();
        let w = Window::new(0, 100_000).unwrap();
        let beta = b / a;
        let beatty: BTreeSet<i64> = (1..)
            .map(|k: i64| (Ratio::from_integer(k) * beta).floor().to_integer())
            .take_while(|&m| m < w.hi)
            .collect();
        let three_quarter_b = Ratio::new(3, 4) * b;
        let in_block = |n: i64| {
            (0..20u32).any(|m| {
                let e = 1i64 << (2 * m + 1);
                let start = (Ratio::from_integer(e) * (Ratio::from_integer(1) - three_quarter_b)).ceil().to_integer();
                start <= n && n < e
            })
        };
        let expected: Vec<i64> = (w.lo..w.hi).filter(|&n| in_block(n) && beatty.contains(&n)).collect();
        assert_eq!(members(&set, w), expected, "a={a} b={b}");
        assert!(members(&set, w).iter().all(|&n| in_block(n)));
    }
}

#[test]
fn ab_set_densities_approach_a_and_b() {
    for (a, b) in [((1, 3), (2, 3)), ((1, 4), (1, 2)), ((2, 5), (3, 5))] {
        let (a, b) = (Ratio::new(a.0, a.1), Ratio::new(b.0, b.1));
        let set = ab_set(a, b).unwrap();
        let last = |e: &ShiftExpr| upper_density_along(e, &set, &FolnerFamily::DyadicEven, 10).unwrap().terms.last().unwrap().value;
        let plain = last(&ShiftExpr::atom(0));
        let a_f = *a.numer() as f64 / *a.denom() as f64;
        let b_f = *b.numer() as f64 / *b.denom() as f64;
        assert!((plain.to_f64() - a_f).abs() < 0.01, "d(E) = {plain} for a={a}");
        let k = (b / a).ceil().to_integer() + 1;
        let union = ShiftExpr::union_of_shifts(1..=k).unwrap();
        let covered = last(&union);
        assert!((covered.to_f64() - b_f).abs() < 0.01, "union density {covered} for b={b}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn rotation_gaps_take_at_most_three_values(
        alpha in 0.001f64..0.999, u in 0.0f64..0.9, len in 0.01f64..0.5, x0 in 0.0f64..1.0
    ) {
        let v = (u + len).min(1.0);
        let set = rotation_return_set(Real::from_f64(alpha), Real::from_f64(x0), Real::from_f64(u), Real::from_f64(v)).unwrap();
        let m = members(&set, Window::new(0, 20_000).unwrap());
        let gaps: BTreeSet<i64> = m.windows(2).map(|p| p[1] - p[0]).collect();
        prop_assert!(gaps.len() <= 3, "gaps {:?}", gaps);
    }

    #[test]
    fn rotation_matches_direct_f64_orbit(alpha in 0.01f64..0.99, u in 0.0f64..0.5, len in 0.05f64..0.5) {
        // endpoints far from orbit points in f64 terms are decided identically
        let set = rotation_return_set(Real::from_f64(alpha), Real::from_f64(0.0), Real::from_f64(u), Real::from_f64(u + len)).unwrap();
        for n in 0..5000i64 {
            let f = (n as f64 * alpha).fract();
            if (f - u).abs() > 1e-9 && (f - u - len).abs() > 1e-9 {
                prop_assert_eq!(set.contains(n).unwrap(), u <= f && f < u + len, "n={}", n);
            }
        }
    }
}
