use std::f64::consts::PI;

use ergolab::constructions::{hindman_set, rotation_return_set};
use ergolab::experiments::{
    complement_witness_search, covering_curve, hindman_counterexample, sweeping_classifier, ScanParams, SweepVerdict,
};
use ergolab::real::Real;
use ergolab::sequences::IntSequence;
use ergolab::sets::{LazySet, Window};
use ergolab::weyl::{correlation_vs_product, spectral_identity_check, weyl_average, weyl_sum, TrigPoly};
use num_complex::Complex64;
use num_rational::Ratio;
use proptest::prelude::*;

fn r(s: &str) -> Real {
    Real::parse(s).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn weyl_sums_are_bounded_and_symmetric(ks in prop::collection::vec(-1_000_000_000i64..1_000_000_000, 1..2000), p in 1i128..1000, q in 2i128..1001) {
        prop_assume!(p < q);
        let x = Real::from_ratio(Ratio::new(p, q));
        let y = Real::from_ratio(Ratio::new(q - p, q));
        let s = weyl_average(&ks, &x).norm();
        prop_assert!(s <= 1.0 + 1e-12);
        prop_assert!((s - weyl_average(&ks, &y).norm()).abs() < 1e-9);
        prop_assert_eq!(weyl_average(&ks, &r("0")), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn identity_sums_match_closed_form(n in 1u64..5000, x in 0.001f64..0.999) {
        let got = weyl_sum(&IntSequence::identity(), n, &Real::from_f64(x)).unwrap();
        let closed = ((PI * n as f64 * x).sin() / (n as f64 * (PI * x).sin())).abs();
        prop_assert!((got - closed).abs() < 1e-9, "N={} x={}: {} vs {}", n, x, got, closed);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(30))]

    #[test]
    fn spectral_gap_is_float_noise(
        coeffs in (0usize..=8).prop_flat_map(|d| prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 2 * d + 1)),
        alpha in 0.0f64..1.0,
        n in 1u64..=10_000,
        which in 0usize..3,
    ) {
        let c: Vec<Complex64> = coeffs.iter().map(|&(a, b)| Complex64::new(a, b)).collect();
        let f = TrigPoly::new(c).unwrap();
        let seq = [IntSequence::identity(), IntSequence::floor_log(), IntSequence::poly_plus_log()][which].clone();
        let check = spectral_identity_check(&seq, &Real::from_f64(alpha), &f, n, 64).unwrap();
        prop_assert!(check.gap <= 1e-9, "gap {:e}", check.gap);
    }
}

#[test]
fn spectral_single_frequency_closed_form() {
    let alpha = r("golden");
    let check = spectral_identity_check(&IntSequence::identity(), &alpha, &TrigPoly::monomial(1), 100, 16).unwrap();
    let s = weyl_sum(&IntSequence::identity(), 100, &alpha).unwrap();
    assert!((check.lhs - s * s).abs() < 1e-12 && (check.rhs - s * s).abs() < 1e-12);
    let flat = spectral_identity_check(&IntSequence::identity(), &alpha, &TrigPoly::constant(Complex64::new(2.0, 0.0)), 100, 16).unwrap();
    assert!(flat.lhs.abs() < 1e-24 && flat.rhs == 0.0);
}

#[test]
fn correlation_of_the_full_circle_is_one() {
    let all = rotation_return_set(r("golden"), r("0"), r("0"), r("1")).unwrap();
    let rep = correlation_vs_product(&IntSequence::identity(), &all, true, 100, Window::new(0, 10_000).unwrap()).unwrap();
    assert_eq!(rep.numer, rep.denom);
    assert_eq!(rep.product, 1.0);
}

#[test]
fn correlation_matches_direct_count() {
    let set = rotation_return_set(r("golden"), r("0.1"), r("0.2"), r("0.7")).unwrap();
    let w = Window::new(0, 5000).unwrap();
    let seq = IntSequence::poly_plus_log();
    let rep = correlation_vs_product(&seq, &set, true, 30, w).unwrap();
    let ks = seq.values_up_to(30).unwrap();
    let direct: u128 = ks
        .iter()
        .map(|&k| (w.lo..w.hi).filter(|&m| set.contains(m).unwrap() && set.contains(m + k).unwrap()).count() as u128)
        .sum();
    assert_eq!(rep.numer, direct);
    assert_eq!(rep.denom, 30 * 5000);
}

#[test]
fn counterexample_rows_stay_within_bound() {
    let t = hindman_counterexample(12, &[0, 1, 10, 100]).unwrap();
    assert!(t.all_within());
    let first = &t.rows[2];
    assert_eq!((first.k, first.n, first.value.numer, first.value.denom), (0, 3, 85, 128));
}

#[test]
fn periodic_covering_matches_residue_count() {
    for (m, residues) in [(5u64, vec![0u64]), (6, vec![1, 2]), (7, vec![0, 3, 5]), (4, vec![])] {
        let set = LazySet::periodic(m, residues.clone()).unwrap();
        let ks: Vec<u64> = (1..=m + 1).collect();
        let rep = covering_curve(&set, &IntSequence::identity(), &ks, ScanParams::new(m * 60, m * 600, None)).unwrap();
        assert!(rep.is_monotone());
        for row in &rep.rows {
            // residues c with c + n ∈ R for some 1 ≤ n ≤ K
            let covered = (0..m).filter(|c| (1..=row.k).any(|n| residues.contains(&((c + n) % m)))).count() as u64;
            assert_eq!(row.density.numer * m, covered * row.density.denom, "m={m} K={}", row.k);
        }
        if !residues.is_empty() {
            assert_eq!(rep.rows[m as usize - 1].density.numer, rep.rows[m as usize - 1].density.denom);
        }
    }
}

#[test]
fn hindman_covering_reaches_one() {
    let rep = covering_curve(&hindman_set(), &IntSequence::identity(), &[1, 16, 64, 128], ScanParams::new(1024, 65536, None)).unwrap();
    assert!(rep.is_monotone());
    assert!(rep.final_density().to_f64() >= 0.99);
}

#[test]
fn golden_set_has_a_complement_witness() {
    let set = rotation_return_set(r("golden"), r("0"), r("0"), r("1/2")).unwrap();
    let w = complement_witness_search(&set, 10, ScanParams::new(10_000, 1_000_000, None)).unwrap().unwrap();
    assert!(w.density.to_f64() >= 0.1);
    assert!(complement_witness_search(&LazySet::integers(), 5, ScanParams::new(100, 1000, None)).unwrap().is_none());
}

#[test]
fn parity_blocks_sweeping() {
    let evens_seq = IntSequence::explicit((1..=64).map(|i| 2 * i).collect()).unwrap();
    let c = sweeping_classifier(&evens_seq, &[("evens".into(), LazySet::evens())], &[1, 8, 32, 64], ScanParams::new(256, 8192, None))
        .unwrap();
    assert_eq!(c.verdict, SweepVerdict::Obstructed(vec!["evens".into()]));
    let sets = vec![
        ("hindman".to_string(), hindman_set()),
        ("golden".to_string(), rotation_return_set(r("golden"), r("0"), r("0"), r("1/2")).unwrap()),
    ];
    let c = sweeping_classifier(&IntSequence::identity(), &sets, &[1, 8, 32, 64], ScanParams::new(1024, 65536, None)).unwrap();
    assert_eq!(c.verdict, SweepVerdict::SweepingEvidence);
}
