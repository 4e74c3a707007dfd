//! Weyl sums `S_N(x) = (1/N) Σ_{n≤N} e^{2πi k_n x}`, decay scans, the spectral
//! identity for rotations, and correlation averages along a sequence.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use num_complex::Complex64;
use num_rational::Ratio;
use rayon::prelude::*;
use serde::Serialize;

use crate::dd::DoubleDouble;
use crate::error::Error;
use crate::real::Real;
use crate::sequences::IntSequence;
use crate::sets::{stream, BitWindow, IntervalSource, LazySet, Window, WindowSet};

/// Neumaier's variant of Kahan summation.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

#[derive(Clone, Copy, Debug, Default)]
struct ComplexSum {
    re: CompensatedSum,
    im: CompensatedSum,
}

impl ComplexSum {
    fn add_phase(&mut self, theta: f64) {
        let (s, c) = (TAU * theta).sin_cos();
        self.re.add(c);
        self.im.add(s);
    }

    fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

/// `frac(k·x)`, exact when `x` is a rational with a small denominator.
pub fn phase(k: i128, x: &Real) -> f64 {
    if let Some(r) = x.exact() {
        let q = *r.denom();
        if q < 1 << 40 {
            let p = r.numer().rem_euclid(q);
            let residue = (k.rem_euclid(q) * p).rem_euclid(q);
            return residue as f64 / q as f64;
        }
    }
    (DoubleDouble::from_i128(k) * x.value()).fract().to_f64()
}

/// Complex Weyl average over the given values.
pub fn weyl_average(ks: &[i64], x: &Real) -> Complex64 {
    let mut acc = ComplexSum::default();
    for &k in ks {
        acc.add_phase(phase(k as i128, x));
    }
    acc.value() / ks.len() as f64
}

pub fn weyl_sum_complex(seq: &IntSequence, n: u64, x: &Real) -> Result<Complex64, Error> {
    let ks = seq.values_up_to(n)?;
    Ok(weyl_average(&ks, x))
}

/// `|S_N(x)|`.
pub fn weyl_sum(seq: &IntSequence, n: u64, x: &Real) -> Result<f64, Error> {
    Ok(weyl_sum_complex(seq, n, x)?.norm().min(1.0))
}

/// Points `i/20` in (0,1) except those with denominator at most 4.
pub fn default_grid() -> Vec<Real> {
    (1..20)
        .map(|i| Ratio::new(i as i128, 20))
        .filter(|r| *r.denom() > 4)
        .map(Real::from_ratio)
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING-KEBAB-CASE")]
pub enum DecayVerdict {
    Decaying,
    NotDecaying,
}

/// Improvement factor required between the first and last checkpoint.
pub const DECAY_FACTOR: f64 = 3.0;

#[derive(Clone, Debug, Serialize)]
pub struct XVerdict {
    pub x: String,
    pub ratio: f64,
    pub verdict: DecayVerdict,
}

#[derive(Clone, Debug, Serialize)]
pub struct WeylReport {
    pub seq: String,
    pub checkpoints: Vec<u64>,
    pub x_grid: Vec<String>,
    /// `magnitudes[i][j] = |S_{checkpoints[j]}(x_grid[i])|`.
    pub magnitudes: Vec<Vec<f64>>,
    pub verdicts: Vec<XVerdict>,
}

impl WeylReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,N,magnitude\n");
        for (x, row) in self.x_grid.iter().zip(&self.magnitudes) {
            for (n, m) in self.checkpoints.iter().zip(row) {
                out.push_str(&format!("{x},{n},{m:.12e}\n"));
            }
        }
        out
    }

    /// Largest magnitude over the grid at checkpoint index `j`.
    pub fn max_at(&self, j: usize) -> f64 {
        self.magnitudes.iter().map(|row| row[j]).fold(0.0, f64::max)
    }

    pub fn verdict_at(&self, x: &str) -> Option<&XVerdict> {
        self.verdicts.iter().find(|v| v.x == x)
    }
}

/// `|S_N(x)|` for every `x` in the grid and every checkpoint `N`, one pass per `x`.
pub fn ergodicity_scan(seq: &IntSequence, checkpoints: &[u64], grid: &[Real]) -> Result<WeylReport, Error> {
    if checkpoints.is_empty() || checkpoints[0] == 0 || checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Invalid("checkpoints must be positive and strictly increasing".into()));
    }
    if grid.is_empty() {
        return Err(Error::Invalid("x grid is empty".into()));
    }
    let n_max = *checkpoints.last().expect("non-empty");
    let ks = seq.values_up_to(n_max)?;
    let magnitudes: Vec<Vec<f64>> = grid
        .par_iter()
        .map(|x| {
            let mut acc = ComplexSum::default();
            let mut row = Vec::with_capacity(checkpoints.len());
            let mut next = 0;
            for (i, &k) in ks.iter().enumerate() {
                acc.add_phase(phase(k as i128, x));
                if (i + 1) as u64 == checkpoints[next] {
                    row.push((acc.value().norm() / checkpoints[next] as f64).min(1.0));
                    next += 1;
                }
            }
            row
        })
        .collect();
    let verdicts = grid
        .iter()
        .zip(&magnitudes)
        .map(|(x, row)| {
            let ratio = row[row.len() - 1] / row[0].max(1e-12);
            let verdict = if ratio * DECAY_FACTOR <= 1.0 { DecayVerdict::Decaying } else { DecayVerdict::NotDecaying };
            XVerdict { x: x.label().to_string(), ratio, verdict }
        })
        .collect();
    Ok(WeylReport {
        seq: seq.to_string(),
        checkpoints: checkpoints.to_vec(),
        x_grid: grid.iter().map(|x| x.label().to_string()).collect(),
        magnitudes,
        verdicts,
    })
}

/// `f(x) = Σ_{|j|≤J} c_j e^{2πijx}`.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigPoly {
    coeffs: Vec<Complex64>,
}

impl TrigPoly {
    /// Coefficients for `j = −J, …, J`; the length must be odd.
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self, Error> {
        if coeffs.len() % 2 == 0 {
            return Err(Error::Invalid("trig polynomial needs 2J+1 coefficients".into()));
        }
        Ok(Self { coeffs })
    }

    /// `e_j(x) = e^{2πijx}`.
    pub fn monomial(j: i64) -> Self {
        let deg = j.unsigned_abs() as usize;
        let mut coeffs = vec![Complex64::new(0.0, 0.0); 2 * deg + 1];
        coeffs[(deg as i64 + j) as usize] = Complex64::new(1.0, 0.0);
        Self { coeffs }
    }

    pub fn constant(c: Complex64) -> Self {
        Self { coeffs: vec![c] }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() / 2
    }

    pub fn coeff(&self, j: i64) -> Complex64 {
        let idx = j + self.degree() as i64;
        usize::try_from(idx).ok().and_then(|i| self.coeffs.get(i)).copied().unwrap_or_default()
    }

    /// `‖f‖² = Σ |c_j|²`.
    pub fn norm_sq(&self) -> f64 {
        let mut acc = CompensatedSum::default();
        for c in &self.coeffs {
            acc.add(c.norm_sqr());
        }
        acc.value()
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        let deg = self.degree() as i64;
        let mut acc = ComplexSum::default();
        for (i, c) in self.coeffs.iter().enumerate() {
            let j = i as i64 - deg;
            let theta = (j as f64 * x).rem_euclid(1.0);
            let (s, co) = (TAU * theta).sin_cos();
            acc.add(c * Complex64::new(co, s));
        }
        acc.value()
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct SpectralCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
}

/// Both sides of `‖(1/N) Σ f∘R^{k_n} − ∫f‖² = ∫ |S_N|² dν_f` for the rotation
/// `R x = x + alpha`, where `ν_f = Σ |c_j|² δ_{jα}`.
///
/// The left side samples the averaged function on `grid_size` points, which
/// integrates the degree-`2J` trigonometric polynomial `|A − ∫f|²` exactly.
/// The right side uses Weyl sums at the frequencies `j·alpha`.
pub fn spectral_identity_check(
    seq: &IntSequence,
    alpha: &Real,
    f: &TrigPoly,
    n: u64,
    grid_size: usize,
) -> Result<SpectralCheck, Error> {
    if !grid_size.is_power_of_two() || grid_size <= 4 * f.degree() {
        return Err(Error::Invalid(format!(
            "grid size {grid_size} must be a power of two exceeding 4·degree = {}",
            4 * f.degree()
        )));
    }
    let ks = seq.values_up_to(n)?;
    let mean = f.coeff(0);
    let offsets: Vec<f64> = ks.iter().map(|&k| phase(k as i128, alpha)).collect();
    let samples: Vec<f64> = (0..grid_size)
        .into_par_iter()
        .map(|m| {
            let x = m as f64 / grid_size as f64;
            let mut avg = ComplexSum::default();
            for y in &offsets {
                avg.add(f.eval(x + y));
            }
            (avg.value() / ks.len() as f64 - mean).norm_sqr()
        })
        .collect();
    let mut lhs = CompensatedSum::default();
    for s in samples {
        lhs.add(s);
    }
    let lhs = lhs.value() / grid_size as f64;

    let deg = f.degree() as i64;
    let terms: Vec<f64> = (-deg..=deg)
        .into_par_iter()
        .filter(|&j| j != 0)
        .map(|j| {
            let c = f.coeff(j).norm_sqr();
            if c == 0.0 {
                return 0.0;
            }
            let mut acc = ComplexSum::default();
            for &k in &ks {
                acc.add_phase(phase(j as i128 * k as i128, alpha));
            }
            c * (acc.value() / ks.len() as f64).norm_sqr()
        })
        .collect();
    let mut rhs = CompensatedSum::default();
    for t in terms {
        rhs.add(t);
    }
    let rhs = rhs.value();
    Ok(SpectralCheck { lhs, rhs, gap: (lhs - rhs).abs() })
}

#[derive(Clone, Debug, Serialize)]
pub struct CorrelationReport {
    /// `Σ_n |E ∩ (E − k_n) ∩ W|`.
    pub numer: u128,
    /// `N_avg · |W|`.
    pub denom: u128,
    pub average: f64,
    pub density: f64,
    pub product: f64,
    pub deviation: f64,
}

/// `(1/N_avg) Σ_{n ≤ N_avg} dens_W(E ∩ (E − k_n))` against `dens_W(E)²`.
/// With `shifts_from_seq = false` the shifts are `k_n = n`.
pub fn correlation_vs_product(
    seq: &IntSequence,
    set: &LazySet,
    shifts_from_seq: bool,
    n_avg: u64,
    window: Window,
) -> Result<CorrelationReport, Error> {
    let ks = if shifts_from_seq { seq.values_up_to(n_avg)? } else { IntSequence::identity().values_up_to(n_avg)? };
    let kmin = ks.iter().copied().min().unwrap_or(0).min(0);
    let kmax = ks.iter().copied().max().unwrap_or(0).max(0);
    let padded = window.offset(kmin, kmax)?;
    let base = WindowSet::from_stream(padded, set.stream(padded)?);
    let mut multiplicity: BTreeMap<i64, u128> = BTreeMap::new();
    for &k in &ks {
        *multiplicity.entry(k).or_default() += 1;
    }
    let distinct: Vec<(i64, u128)> = multiplicity.into_iter().collect();
    let counts: Vec<u128> = match BitWindow::new(&base) {
        Some(bits) => distinct.par_iter().map(|&(k, mult)| mult * bits.overlap_count(window, k) as u128).collect(),
        None => distinct
            .par_iter()
            .map(|&(k, mult)| {
                let here = stream::clip(base.iter(), window);
                let shifted = stream::clip(stream::shift(base.iter(), k), window);
                mult * stream::total_len(stream::intersect(here, shifted)) as u128
            })
            .collect(),
    };
    let numer: u128 = counts.iter().sum();
    let denom = n_avg as u128 * window.len() as u128;
    let density = stream::total_len(stream::clip(base.iter(), window)) as f64 / window.len() as f64;
    let average = numer as f64 / denom as f64;
    let product = density * density;
    Ok(CorrelationReport { numer, denom, average, density, product, deviation: (average - product).abs() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(s: &str) -> Real {
        Real::parse(s).unwrap()
    }

    #[test]
    fn trivial_sums() {
        let id = IntSequence::identity();
        assert!(weyl_sum(&id, 2, &r("1/2")).unwrap() < 1e-15);
        assert_eq!(weyl_sum(&IntSequence::floor_log(), 1000, &r("0")).unwrap(), 1.0);
    }

    #[test]
    fn default_grid_excludes_small_denominators() {
        let g: Vec<String> = default_grid().iter().map(|x| x.label().to_string()).collect();
        assert_eq!(g.len(), 16);
        assert!(!g.contains(&"1/2".to_string()) && !g.contains(&"1/4".to_string()) && !g.contains(&"3/4".to_string()));
        assert!(g.contains(&"1/20".to_string()));
    }

    #[test]
    fn exact_phase_for_rationals() {
        assert_eq!(phase(7, &r("1/2")), 0.5);
        assert_eq!(phase(-3, &r("1/4")), 0.25);
        assert!((phase(3, &r("golden")) - (3.0 * 0.618_033_988_749_895f64).fract()).abs() < 1e-14);
    }

    #[test]
    fn monomial_spectral_check_matches_closed_form() {
        let id = IntSequence::identity();
        let golden = r("golden");
        let check = spectral_identity_check(&id, &golden, &TrigPoly::monomial(1), 100, 8).unwrap();
        let s = weyl_sum(&id, 100, &golden).unwrap();
        assert!((check.rhs - s * s).abs() < 1e-13);
        assert!(check.gap <= 1e-12);
    }

    #[test]
    fn constant_poly_has_no_spectral_mass() {
        let check =
            spectral_identity_check(&IntSequence::floor_log(), &r("golden"), &TrigPoly::constant(Complex64::new(2.0, -1.0)), 500, 4)
                .unwrap();
        assert!(check.lhs < 1e-25 && check.rhs == 0.0);
    }

    #[test]
    fn grid_size_is_validated() {
        let f = TrigPoly::monomial(3);
        let id = IntSequence::identity();
        assert!(spectral_identity_check(&id, &r("golden"), &f, 10, 8).is_err());
        assert!(spectral_identity_check(&id, &r("golden"), &f, 10, 24).is_err());
        assert!(spectral_identity_check(&id, &r("golden"), &f, 10, 16).is_ok());
    }

    #[test]
    fn compensated_sum_beats_naive() {
        let mut acc = CompensatedSum::default();
        acc.add(1.0);
        for _ in 0..10 {
            acc.add(1e-16);
        }
        acc.add(-1.0);
        assert!((acc.value() - 1e-15).abs() < 1e-30);
    }
}
