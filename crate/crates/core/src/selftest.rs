//! Seeded randomized self-checks of every library invariant, with a report
//! that depends only on the seed.

use std::fmt::Write as _;

use num_complex::Complex64;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::constructions::{ab_set, hindman_set, rotation_return_set};
use crate::correspondence::{averaged_correlation, MAX_CYLINDER_SHIFTS, cylinder_frequency, expr_via_cylinders, CylinderSpec, EmpiricalMeasure};
use crate::experiments::{covering_curve, hindman_counterexample, ScanParams};
use crate::real::Real;
use crate::sequences::IntSequence;
use crate::sets::{
    count_on, eval_expr, DensityValue, FolnerFamily, Interval, IntervalSource, LazySet, ShiftExpr, Window, WindowSet,
};
use crate::weyl::{spectral_identity_check, weyl_average, TrigPoly};

/// Outcome of one named check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckResult {
    pub name: &'static str,
    pub trials: usize,
    pub failure: Option<String>,
}

#[derive(Clone, Debug)]
pub struct SelftestReport {
    pub seed: u64,
    pub results: Vec<CheckResult>,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.results.iter().all(|r| r.failure.is_none())
    }

    pub fn render(&self) -> String {
        let mut out = format!("selftest seed={}\n", self.seed);
        for r in &self.results {
            match &r.failure {
                None => writeln!(out, "PASS {:<28} trials={}", r.name, r.trials),
                Some(why) => writeln!(out, "FAIL {:<28} trials={} {why}", r.name, r.trials),
            }
            .expect("writing to a String");
        }
        let failed = self.results.iter().filter(|r| r.failure.is_some()).count();
        writeln!(out, "summary passed={} failed={failed}", self.results.len() - failed).expect("writing to a String");
        out
    }
}

type Check = fn(&mut ChaCha8Rng) -> Result<usize, String>;

const CHECKS: &[(&str, Check)] = &[
    ("canonical-algebra", canonical_algebra),
    ("inclusion-exclusion", inclusion_exclusion),
    ("shift-consistency", shift_consistency),
    ("de-morgan", de_morgan),
    ("expr-vs-membership", expr_vs_membership),
    ("dual-evaluation", dual_evaluation),
    ("word-total", word_total),
    ("cylinder-shift-invariance", cylinder_shift_invariance),
    ("density-order", density_order),
    ("folner-defect", folner_defect),
    ("hindman-density", hindman_density),
    ("hindman-boundary", hindman_boundary),
    ("three-distance", three_distance),
    ("abset-membership", abset_membership),
    ("sequence-shape", sequence_shape),
    ("weyl-bounds", weyl_bounds),
    ("spectral-identity", spectral_identity),
    ("covering-monotone", covering_monotone),
    ("counterexample-bound", counterexample_bound),
    ("averaged-correlation", averaged_correlation_floor),
];

/// Runs every check with its own stream `ChaCha8(seed, stream = index)`, so
/// the report is independent of scheduling.
pub fn run(seed: u64) -> SelftestReport {
    let results = CHECKS
        .par_iter()
        .enumerate()
        .map(|(i, (name, check))| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let t0 = std::time::Instant::now();
            let out = check(&mut rng);
            if std::env::var_os("ERGOLAB_SELFTEST_TRACE").is_some() {
                eprintln!("{name} {:?}", t0.elapsed());
            }
            match out {
                Ok(trials) => CheckResult { name, trials, failure: None },
                Err(why) => CheckResult { name, trials: 0, failure: Some(why) },
            }
        })
        .collect();
    SelftestReport { seed, results }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn random_window(rng: &mut ChaCha8Rng, max_len: i64) -> Window {
    let lo = rng.gen_range(-200..200);
    Window::new(lo, lo + rng.gen_range(1..=max_len)).expect("small window")
}

fn random_intervals(rng: &mut ChaCha8Rng, lo: i64, hi: i64) -> Vec<Interval> {
    let k = rng.gen_range(0..12);
    (0..k)
        .map(|_| {
            let a = rng.gen_range(lo..hi);
            Interval { lo: a, hi: a + rng.gen_range(1..40) }
        })
        .collect()
}

/// One of the built-in set kinds with random parameters.
pub fn random_set(rng: &mut ChaCha8Rng) -> LazySet {
    match rng.gen_range(0..6) {
        0 => LazySet::HindmanBlocks,
        1 => {
            let m = rng.gen_range(1..13u64);
            let residues: Vec<u64> = (0..m).filter(|_| rng.gen_bool(0.4)).collect();
            LazySet::periodic(m, residues).expect("valid residues")
        }
        2 => LazySet::explicit(random_intervals(rng, -400, 400)),
        3 => {
            let (a, b) = [(1, 3, 2, 3), (1, 2, 3, 4), (2, 5, 1, 2)][rng.gen_range(0..3)]
                .pipe(|(an, ad, bn, bd)| (Ratio::new(an, ad), Ratio::new(bn, bd)));
            ab_set(a, b).expect("valid pair")
        }
        _ => {
            let alpha = Real::from_f64(rng.gen_range(0.05..0.95));
            let u = rng.gen_range(0.0..0.5);
            let v = u + rng.gen_range(0.1..0.5);
            let x0 = Real::from_f64(rng.gen_range(0.0..1.0));
            rotation_return_set(alpha, x0, Real::from_f64(u), Real::from_f64(v)).expect("valid rotation")
        }
    }
}

trait Pipe: Sized {
    fn pipe<T>(self, f: impl FnOnce(Self) -> T) -> T {
        f(self)
    }
}

impl<T> Pipe for T {}

pub fn random_expr(rng: &mut ChaCha8Rng, depth: usize, max_shift: i64) -> ShiftExpr {
    if depth == 0 || rng.gen_bool(0.3) {
        let h = rng.gen_range(-max_shift..=max_shift);
        return if rng.gen_bool(0.5) { ShiftExpr::atom(h) } else { ShiftExpr::not_atom(h) };
    }
    let a = random_expr(rng, depth - 1, max_shift);
    let b = random_expr(rng, depth - 1, max_shift);
    if rng.gen_bool(0.5) {
        ShiftExpr::union(a, b)
    } else {
        ShiftExpr::intersect(a, b)
    }
}

/// A random expression with at most `MAX_CYLINDER_SHIFTS` distinct shifts,
/// resampling until one fits.
pub fn cylinder_expr(rng: &mut ChaCha8Rng) -> ShiftExpr {
    loop {
        let e = random_expr(rng, 6, 16);
        if e.shifts().len() <= MAX_CYLINDER_SHIFTS {
            return e;
        }
    }
}

/// Membership bits of `set` on `w`, by pointwise `contains`.
fn bits(set: &LazySet, w: Window) -> Result<Vec<bool>, String> {
    (w.lo..w.hi).map(|n| set.contains(n).map_err(err)).collect()
}

fn canonical_algebra(rng: &mut ChaCha8Rng) -> Result<usize, String> {
    let trials = 300;
    for _ in 0..trials {
        let w = random_window(rng, 300);
        let a = LazySet::explicit(random_intervals(rng, w.lo - 20, w.hi));
        let b = LazySet::explicit(random_intervals(rng, w.lo - 20, w.hi));
        let wa = WindowSet::from_stream(w, a.stream(w).map_err(err)?);
        let wb = WindowSet::from_stream(w, b.stream(w).map_err(err)?);
        let (ba, bb) = (bits(&a, w)?, bits(&b, w)?);
        let union = wa.union(&wb).map_err(err)?;
        let inter = wa.intersect(&wb).map_err(err)?;
        let comp = wa.complement();
        for (i, n) in (w.lo..w.hi).enumerate() {
            ensure(union.contains(n) == (ba[i] || bb[i]), || format!("union differs at {n}"))?;
            ensure(inter.contains(n) == (ba[i] && bb[i]), || format!("intersection differs at {n}"))?;
            ensure(comp.contains(n) == !ba[i], || format!("complement differs at {n}"))?;
        }
        for set in [&union, &inter, &comp] {
            ensure(WindowSet::new(w, set.intervals().to_vec()).is_ok(), || "result is not canonical".into())?;
        }
    }
    Ok(trials)
}

fn inclusion_exclusion(rng: &mut ChaCha8Rng) -> Result<usize, String> {
    let trials = 300;
    for _ in 0..trials {
        let w = random_window(rng, 500);
        let a = WindowSet::from_stream(w, random_set(rng).stream(w).map_err(err)?);
        let b = WindowSet::from_stream(w, random_set(rng).stream(w).map_err(err)?);
        let lhs = a.union(&b).map_err(err)?.count() + a.intersect(&b).map_err(err)?.count();
        ensure(lhs == a.count() + b.count(), || format!("|A∪B|+|A∩B| != |A|+|B| on {w}"))?;
    }
    Ok(trials)
}

fn shift_consistency(rng: &mut ChaCha8Rng) -> Result<usize, String> {
    let trials = 300;
    for _ in 0..trials {
        let set = random_set(rng);
        let w = random_window(rng, 400);
        let h = rng.gen_range(-50..=50);
        let shifted = count_on(&ShiftExpr::atom(h), &set, w).map_err(err)?;
        let moved = count_on(&ShiftExpr::atom(0), &set, w.offset(h, h).map_err(err)?).map_err(err)?;
        ensure(shifted == moved, || format!("|(E-{h}) ∩ {w}| = {shifted} but |E ∩ (w+{h})| = {moved}"))?;
    }
    Ok(trials)
}

fn de_morgan(rng: &mut ChaCha8Rng) -> Result<usize, String> {
    let trials = 500;
    for _ in 0..trials {
        let set = random_set(rng);
        let expr = random_expr(rng, 6, 16);
        let w = random_window(rng, 400);
        let direct = count_on(&expr, &set, w).map_err(err)?;
        let negated = count_on(&expr.negate(), &set, w).map_err(err)?;
        ensure(direct + negated == w.len(), || format!("{expr} and its negation do not partition {w}"))?;
    }
    Ok(trials)
}

fn expr_vs_membership(rng: &mut ChaCha8Rng) -> Result<usize, String> {
    let trials = 200;
    for _ in 0..trials {
        let set = random_set(rng);
        let expr = random_expr(rng, 5, 16);
        let w = random_window(rng, 256);
        let evaluated = eval_expr(&expr, &set, w).map_err(err)?;
        let padded = w.pad(16, 16).map_err(err)?;
        let b = bits(&set, padded)?;
        for n in w.lo..w.hi {
            let member = |h: i64| b[(n + h - padded.lo) as usize];
            ensure(evaluated.contains(n) == expr.eval_bool(&member), || format!("{expr} differs from pointwise truth at {n}"))?;
        }
    }
    Ok(trials)
}

fn dual_evaluation(rng: &mut ChaCha8Rng) -> Result<usize, String> {
    let trials = 300;
    for _ in 0..trials {
        let set = random_set(rng);
        let expr = cylinder_expr(rng);
        let w = random_window(rng, 2000);
        let direct = DensityValue::of(&eval_expr(&expr, &set, w).map_err(err)?);
        let via = expr_via_cylinders(&set, &expr, w).map_err(err)?;
        ensure(direct.numer == via.numer && direct.denom == via.denom, || format!("{expr}: {direct} vs {via}"))?;
    }
    Ok(trials)
}

fn random_shifts(rng: &mut ChaCha8Rng, k: usize) -> Vec<i64> {
    let mut shifts: Vec<i64> = Vec::new();
    while shifts.len() < k {
        let h = rng.gen_range(-20..=20);
        if !shifts.contains(&h) {
            shifts.push(h);
        }
    }
    shifts.sort_unstable();
    shifts
}

fn word_total(rng: &mut ChaCha8Rng) -> Result<usize, String> {
    let trials = 20;
    for _ in 0..trials {
        let set = random_set(rng);
        let w = random_window(rng, 600);
        let k = rng.gen_range(0..=8);
        let shifts = random_shifts(rng, k);
        let total = EmpiricalMeasure::new(set, w).word_total(&shifts).map_err(err)?;
        ensure(total == BigRational::one(), || format!("word frequencies over {shifts:?} sum to {total}"))?;
    }
    Ok(trials)
}

fn cylinder_shift_invariance(rng: &mut ChaCha8Rng) -> Result<usize, String> {
    let trials = 200;
    for _ in 0..trials {
        let set = random_set(rng);
        let w = random_window(rng, 800);
        let k = rng.gen_range(1..=4);
        let shifts = random_shifts(rng, k);
        let spec = CylinderSpec::from_bits(shifts.clone(), rng.gen_range(0..1u64 << k)).map_err(err)?;
        let s = rng.gen_range(-30..=30);
        let a = cylinder_frequency(&set, &spec, w).map_err(err)?;
        let b = cylinder_frequency(&set, &spec.translated(s), w).map_err(err)?;
        let spread = (shifts[k - 1] - shifts[0]) as u64;
        let diff = a.numer.abs_diff(b.numer);
        ensure(diff <= s.unsigned_abs() + spread, || format!("{spec} moved by {s}: counts {} and {}", a.numer, b.numer))?;
    }
    Ok(trials)
}

fn density_order(rng: &mut ChaCha8Rng) -> Result<usize, String> {
    let trials = 2000;
    for _ in 0..trials {
        let d1 = rng.gen_range(1..1000u64);
        let d2 = rng.gen_range(1..1000u64);
        let a = DensityValue::new(rng.gen_range(0..=d1), d1).map_err(err)?;
        let b = DensityValue::new(rng.gen_range(0..=d2), d2).map_err(err)?;
        ensure(a.cmp(&b) == a.to_big().cmp(&b.to_big()), || format!("{a} vs {b} ordered inconsistently"))?;
    }
    Ok(trials)
}

fn folner_defect(rng: &mut ChaCha8Rng) -> Result<usize, String> {
    let trials = 500;
    for _ in 0..trials {
        let n = rng.gen_range(1..10_000u32);
        let g = rng.gen_range(-20_000..20_000i64);
        let got = FolnerFamily::InitialSegments.defect(n, g).map_err(err)?;
        let expect = Ratio::new(2 * g.unsigned_abs().min(n as u64) as u128, n as u128);
        ensure(got == expect, || format!("defect at N={n}, g={g}: {got} != {expect}"))?;
    }
    Ok(trials)
}

fn hindman_density(_: &mut ChaCha8Rng) -> Result<usize, String> {
    let e = ShiftExpr::atom(0);
    for n in 1..=24u32 {
        let w = FolnerFamily::DyadicEven.window(n).map_err(err)?;
        let c = count_on(&e, &hindman_set(), w).map_err(err)?;
        ensure(3 * c as u128 == 4u128.pow(n + 1) - 1, || format!("count {c} at N={n}"))?;
    }
    Ok(24)
}

fn hindman_boundary(rng: &mut ChaCha8Rng) -> Result<usize, String> {
    let trials = 200;
    for _ in 0..trials {
        let h = rng.gen_range(1..=100i64);
        let n = rng.gen_range(1..=20u32);
        let expr = ShiftExpr::intersect(ShiftExpr::not_atom(0), ShiftExpr::atom(h));
        let w = FolnerFamily::DyadicEven.window(n).map_err(err)?;
        let c = count_on(&expr, &hindman_set(), w).map_err(err)?;
        ensure(c <= h as u64 * (n as u64 + 1), || format!("h={h} N={n}: count {c}"))?;
    }
    Ok(trials)
}

fn three_distance(rng: &mut ChaCha8Rng) -> Result<usize, String> {
    let trials = 30;
    for _ in 0..trials {
        let alpha = Real::from_f64(rng.gen_range(0.01..0.99));
        let u = rng.gen_range(0.0..0.7);
        let v = u + rng.gen_range(0.05..0.3);
        let set = rotation_return_set(alpha, Real::from_f64(rng.gen_range(0.0..1.0)), Real::from_f64(u), Real::from_f64(v))
            .map_err(err)?;
        let w = Window::new(0, 20_000).map_err(err)?;
        let members: Vec<i64> = (w.lo..w.hi).filter(|&n| set.contains(n).unwrap_or(false)).collect();
        let mut gaps: Vec<i64> = members.windows(2).map(|p| p[1] - p[0]).collect();
        gaps.sort_unstable();
        gaps.dedup();
        ensure(gaps.len() <= 3, || format!("{} distinct gaps: {gaps:?}", gaps.len()))?;
    }
    Ok(trials)
}

fn abset_membership(rng: &mut ChaCha8Rng) -> Result<usize, String> {
    let pairs = [(1, 3, 2, 3), (1, 2, 3, 4), (1, 4, 1, 2), (2, 3, 2, 3)];
    for &(an, ad, bn, bd) in &pairs {
        let (a, b) = (Ratio::new(an, ad), Ratio::new(bn, bd));
        let set = ab_set(a, b).map_err(err)?;
        let beta = b / a;
        let lo = rng.gen_range(0..50_000i64);
        let w = Window::new(lo, lo + 20_000).map_err(err)?;
        let ws = WindowSet::from_stream(w, set.stream(w).map_err(err)?);
        for n in w.lo..w.hi {
            // in a block [⌈e(1 − 3b/4)⌉, e) with e = 2^{2m+1}, and n = ⌊kβ⌋ for some k ≥ 1
            let in_block = (0..31u32).any(|m| {
                let e = 1i128 << (2 * m + 1);
                let start = Ratio::new(e, 1) * (Ratio::from_integer(1) - Ratio::new(3 * bn as i128, 4 * bd as i128));
                (n as i128) >= start.ceil().to_integer() && (n as i128) < e
            });
            // some integer k >= 1 lies in [n/β, (n+1)/β)
            let k = (Ratio::from_integer(n) / beta).ceil().max(Ratio::from_integer(1));
            let in_beatty = k < Ratio::from_integer(n + 1) / beta;
            ensure(ws.contains(n) == (in_block && in_beatty), || format!("ab({a},{b}) differs at {n}"))?;
            if !in_block {
                ensure(!ws.contains(n), || format!("ab({a},{b}) leaves its blocks at {n}"))?;
            }
        }
    }
    Ok(pairs.len())
}

fn sequence_shape(rng: &mut ChaCha8Rng) -> Result<usize, String> {
    let c = Real::from_f64(rng.gen_range(1.05..2.5));
    let b = Real::from_f64(rng.gen_range(0.1..3.0));
    let pow = IntSequence::floor_power(b, c).map_err(err)?;
    for seq in [pow, IntSequence::poly_plus_log()] {
        let v = seq.values_up_to(20_000).map_err(err)?;
        ensure(v.windows(2).all(|p| p[0] <= p[1]), || format!("{seq} is not non-decreasing"))?;
    }
    let n = rng.gen_range(2..200_000u64);
    let logs = IntSequence::floor_log().values_up_to(n).map_err(err)?;
    let top = (n as f64).ln().floor() as i64;
    let mut image = logs.clone();
    image.dedup();
    ensure(image == (0..=top).collect::<Vec<_>>(), || format!("image of floor-log on [1,{n}] is not 0..={top}"))?;
    Ok(3)
}

fn weyl_bounds(rng: &mut ChaCha8Rng) -> Result<usize, String> {
    let trials = 50;
    for _ in 0..trials {
        let ks: Vec<i64> = (0..rng.gen_range(1..3000)).map(|_| rng.gen_range(-1_000_000..1_000_000)).collect();
        let x = rng.gen_range(0.001..0.999);
        let s = weyl_average(&ks, &Real::from_f64(x)).norm();
        let t = weyl_average(&ks, &Real::from_f64(1.0 - x)).norm();
        ensure(s <= 1.0 + 1e-12, || format!("|S| = {s} exceeds 1"))?;
        ensure((s - t).abs() < 1e-9, || format!("|S(x)| = {s} but |S(1-x)| = {t}"))?;
        ensure(weyl_average(&ks, &Real::parse("0").expect("zero")).norm() == 1.0, || "S(0) != 1".into())?;
    }
    Ok(trials)
}

fn spectral_identity(rng: &mut ChaCha8Rng) -> Result<usize, String> {
    let trials = 20;
    let seqs = [IntSequence::identity(), IntSequence::floor_log(), IntSequence::poly_plus_log()];
    for _ in 0..trials {
        let deg = rng.gen_range(0..=8usize);
        let coeffs = (0..2 * deg + 1).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let f = TrigPoly::new(coeffs).map_err(err)?;
        let alpha = Real::from_f64(rng.gen_range(0.0..1.0));
        let seq = &seqs[rng.gen_range(0..seqs.len())];
        let n = rng.gen_range(1..=2000);
        let check = spectral_identity_check(seq, &alpha, &f, n, 64).map_err(err)?;
        ensure(check.gap <= 1e-9, || format!("gap {:e} for degree {deg}, N={n}", check.gap))?;
    }
    Ok(trials)
}

fn covering_monotone(rng: &mut ChaCha8Rng) -> Result<usize, String> {
    let trials = 8;
    for _ in 0..trials {
        let set = random_set(rng);
        let rep = covering_curve(&set, &IntSequence::identity(), &[1, 2, 5, 9, 17], ScanParams::new(64, 2048, None))
            .map_err(err)?;
        ensure(rep.is_monotone(), || format!("covering curve of {set} decreases"))?;
    }
    Ok(trials)
}

fn counterexample_bound(rng: &mut ChaCha8Rng) -> Result<usize, String> {
    let ks: Vec<u64> = (0..3).map(|_| rng.gen_range(0..200)).collect();
    let t = hindman_counterexample(12, &ks).map_err(err)?;
    ensure(t.all_within(), || format!("a row for K in {ks:?} leaves the boundary bound"))?;
    Ok(t.rows.len())
}

fn averaged_correlation_floor(_: &mut ChaCha8Rng) -> Result<usize, String> {
    let golden = rotation_return_set(
        Real::parse("golden").expect("named constant"),
        Real::parse("0").expect("zero"),
        Real::parse("0").expect("zero"),
        Real::parse("1/2").expect("half"),
    )
    .map_err(err)?;
    let cases = [
        (hindman_set(), FolnerFamily::DyadicEven, 8u32),
        (LazySet::evens(), FolnerFamily::InitialSegments, 100_000),
        (golden, FolnerFamily::InitialSegments, 100_000),
    ];
    for (set, fam, k) in &cases {
        let a = averaged_correlation(set, fam, *k, 300).map_err(err)?;
        ensure(a.min_margin() >= BigRational::zero(), || format!("{set}: partial average drops below the floor"))?;
    }
    Ok(cases.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_is_seed_deterministic() {
        let a = run(7);
        assert!(a.passed(), "{}", a.render());
        assert_eq!(a.render(), run(7).render());
    }
}
