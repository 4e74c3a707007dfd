//! Empirical cylinder frequencies of the orbit of `1_E`, and the two-way
//! evaluation of shift-expression densities.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::SetError;
use crate::sets::{
    count_on, decimal12, stream, BitWindow, DensityValue, FolnerFamily, IntervalSource, LazySet, ShiftExpr, Window,
    WindowSet,
};

/// Largest number of distinct shifts handled by the word enumeration.
pub const MAX_CYLINDER_SHIFTS: usize = 20;

/// The cylinder `{n : 1_E(n + h_i) = w_i for all i}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CylinderSpec {
    shifts: Vec<i64>,
    word: Vec<bool>,
}

impl CylinderSpec {
    pub fn new(shifts: Vec<i64>, word: Vec<bool>) -> Result<Self, SetError> {
        if shifts.len() != word.len() {
            return Err(SetError::InvalidParameter(format!("{} shifts but a word of length {}", shifts.len(), word.len())));
        }
        if shifts.windows(2).any(|p| p[0] >= p[1]) {
            return Err(SetError::InvalidParameter("cylinder shifts must be strictly increasing".into()));
        }
        Ok(Self { shifts, word })
    }

    /// Builds the spec from a bit pattern: bit `i` of `bits` is `w_i`.
    pub fn from_bits(shifts: Vec<i64>, bits: u64) -> Result<Self, SetError> {
        let word = (0..shifts.len()).map(|i| bits >> i & 1 == 1).collect();
        Self::new(shifts, word)
    }

    pub fn shifts(&self) -> &[i64] {
        &self.shifts
    }

    pub fn word(&self) -> &[bool] {
        &self.word
    }

    /// The same word read at `h_i + s`.
    pub fn translated(&self, s: i64) -> Self {
        Self { shifts: self.shifts.iter().map(|h| h + s).collect(), word: self.word.clone() }
    }

    fn as_expr(&self) -> Option<ShiftExpr> {
        let atoms = self.shifts.iter().zip(&self.word).map(|(&h, &bit)| if bit { ShiftExpr::atom(h) } else { ShiftExpr::not_atom(h) });
        ShiftExpr::intersect_all(atoms)
    }
}

impl fmt::Display for CylinderSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.shifts.iter().zip(&self.word).map(|(h, &b)| format!("{h}:{}", u8::from(b))).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

/// Exact frequency of the cylinder on `w`, by interval algebra.
pub fn cylinder_frequency(set: &LazySet, spec: &CylinderSpec, w: Window) -> Result<DensityValue, SetError> {
    match spec.as_expr() {
        None => Ok(DensityValue { numer: w.len(), denom: w.len() }),
        Some(expr) => Ok(DensityValue { numer: count_on(&expr, set, w)?, denom: w.len() }),
    }
}

/// Number of `n ∈ w` carrying each word over `shifts` (bit `i` set when
/// `n + shifts[i] ∈ E`), by one sweep over the interval breakpoints.
pub fn word_histogram(set: &LazySet, shifts: &[i64], w: Window) -> Result<BTreeMap<u64, u64>, SetError> {
    if shifts.len() > MAX_CYLINDER_SHIFTS {
        return Err(SetError::TooManyShifts(shifts.len()));
    }
    let mut histogram = BTreeMap::new();
    if shifts.is_empty() {
        histogram.insert(0, w.len());
        return Ok(histogram);
    }
    let lo = shifts.iter().copied().min().unwrap_or(0);
    let hi = shifts.iter().copied().max().unwrap_or(0);
    let padded = w.offset(lo, hi)?;
    let base = WindowSet::from_stream(padded, set.stream(padded)?);
    // (position, bit, entering)
    let mut events: Vec<(i64, usize, bool)> = Vec::new();
    for (bit, &h) in shifts.iter().enumerate() {
        for iv in stream::clip(stream::shift(base.iter(), h), w) {
            events.push((iv.lo, bit, true));
            events.push((iv.hi, bit, false));
        }
    }
    events.sort_unstable();
    let mut word = 0u64;
    let mut pos = w.lo;
    for (at, bit, entering) in events {
        if at > pos {
            *histogram.entry(word).or_insert(0) += (at - pos) as u64;
            pos = at;
        }
        if entering {
            word |= 1 << bit;
        } else {
            word &= !(1 << bit);
        }
    }
    if w.hi > pos {
        *histogram.entry(word).or_insert(0) += (w.hi - pos) as u64;
    }
    Ok(histogram)
}

/// Density of `expr(E)` on `w` as the total frequency of the cylinders whose
/// words satisfy the boolean tree. Words absent from the histogram have
/// frequency zero.
pub fn expr_via_cylinders(set: &LazySet, expr: &ShiftExpr, w: Window) -> Result<DensityValue, SetError> {
    let shifts = expr.shifts();
    if shifts.len() > MAX_CYLINDER_SHIFTS {
        return Err(SetError::TooManyShifts(shifts.len()));
    }
    let histogram = word_histogram(set, &shifts, w)?;
    let mut total = 0u64;
    for (&word, &count) in &histogram {
        let member = |h: i64| {
            let bit = shifts.binary_search(&h).expect("shift taken from the expression");
            word >> bit & 1 == 1
        };
        if expr.eval_bool(&member) {
            total += count;
        }
    }
    Ok(DensityValue { numer: total, denom: w.len() })
}

/// Cylinder frequencies of one set on one window, cached by spec.
#[derive(Clone, Debug)]
pub struct EmpiricalMeasure {
    window: Window,
    source: LazySet,
    memo: HashMap<CylinderSpec, DensityValue>,
}

impl EmpiricalMeasure {
    pub fn new(source: LazySet, window: Window) -> Self {
        Self { window, source, memo: HashMap::new() }
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn frequency(&mut self, spec: &CylinderSpec) -> Result<DensityValue, SetError> {
        if let Some(v) = self.memo.get(spec) {
            return Ok(*v);
        }
        let v = cylinder_frequency(&self.source, spec, self.window)?;
        self.memo.insert(spec.clone(), v);
        Ok(v)
    }

    /// `Σ_w freq(shifts, w)` over all `2^k` words.
    pub fn word_total(&mut self, shifts: &[i64]) -> Result<BigRational, SetError> {
        if shifts.len() > MAX_CYLINDER_SHIFTS {
            return Err(SetError::TooManyShifts(shifts.len()));
        }
        let mut total = BigRational::zero();
        for bits in 0..1u64 << shifts.len() {
            total += self.frequency(&CylinderSpec::from_bits(shifts.to_vec(), bits)?)?.to_big();
        }
        Ok(total)
    }

    pub fn cached(&self) -> usize {
        self.memo.len()
    }

    /// Read-only view that can be shared across threads.
    pub fn freeze(self) -> FrozenMeasure {
        FrozenMeasure { window: self.window, memo: self.memo }
    }
}

#[derive(Clone, Debug)]
pub struct FrozenMeasure {
    window: Window,
    memo: HashMap<CylinderSpec, DensityValue>,
}

impl FrozenMeasure {
    pub fn window(&self) -> Window {
        self.window
    }

    pub fn get(&self, spec: &CylinderSpec) -> Option<DensityValue> {
        self.memo.get(spec).copied()
    }
}

/// Default gap above which a row is flagged.
pub const MONOTONE_GAP_EPS: f64 = 0.05;

#[derive(Clone, Debug, Serialize)]
pub struct TableRow {
    pub expr_id: usize,
    pub n: u32,
    pub value: DensityValue,
    pub decimal: String,
    pub monotone_gap: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CorrespondenceTable {
    pub exprs: Vec<String>,
    pub rows: Vec<TableRow>,
    pub final_running_max: Vec<DensityValue>,
}

impl CorrespondenceTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("exprId,N,numer,denom,decimal\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{},{},{}\n", r.expr_id, r.n, r.value.numer, r.value.denom, r.decimal));
        }
        out
    }

    pub fn final_value(&self, expr_id: usize) -> Option<DensityValue> {
        self.rows.iter().filter(|r| r.expr_id == expr_id).last().map(|r| r.value)
    }
}

/// Window densities of each expression along the family for `N = 1..=n_max`.
/// A row is flagged when the final running maximum exceeds its value by more
/// than `eps`.
pub fn correspondence_table(
    set: &LazySet,
    exprs: &[ShiftExpr],
    family: &FolnerFamily,
    n_max: u32,
    eps: f64,
) -> Result<CorrespondenceTable, SetError> {
    let per_expr: Vec<Vec<(u32, DensityValue)>> = exprs
        .par_iter()
        .map(|expr| {
            (1..=n_max)
                .map(|n| {
                    let w = family.window(n)?;
                    Ok((n, DensityValue { numer: count_on(expr, set, w)?, denom: w.len() }))
                })
                .collect::<Result<Vec<_>, SetError>>()
        })
        .collect::<Result<Vec<_>, SetError>>()?;
    let mut rows = Vec::new();
    let mut final_running_max = Vec::new();
    for (id, values) in per_expr.iter().enumerate() {
        let max = values.iter().map(|(_, v)| *v).max().unwrap_or_else(DensityValue::zero);
        final_running_max.push(max);
        for &(n, value) in values {
            rows.push(TableRow {
                expr_id: id,
                n,
                value,
                decimal: value.decimal(),
                monotone_gap: max.to_f64() - value.to_f64() > eps,
            });
        }
    }
    Ok(CorrespondenceTable { exprs: exprs.iter().map(ToString::to_string).collect(), rows, final_running_max })
}

/// Partial averages `(1/h) Σ_{0 ≤ g < h} dens_W(E ∩ (E − g))` for `h = 1..=H`
/// on a fixed window, with the reference `dens_W(E)²`.
#[derive(Clone, Debug)]
pub struct AveragedCorrelation {
    pub window: Window,
    pub partial: Vec<BigRational>,
    pub reference: BigRational,
    /// `(H + max shift) / |W|`.
    pub boundary: BigRational,
}

impl AveragedCorrelation {
    pub fn last(&self) -> &BigRational {
        self.partial.last().expect("H >= 1")
    }

    /// `min_h (partial_h − reference + boundary)`; non-negative when the finite
    /// inequality holds at every prefix.
    pub fn min_margin(&self) -> BigRational {
        let floor = &self.reference - &self.boundary;
        self.partial.iter().map(|p| p - &floor).min().expect("H >= 1")
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("h,average\n");
        for (i, p) in self.partial.iter().enumerate() {
            out.push_str(&format!("{},{}\n", i + 1, decimal12(p)));
        }
        out
    }
}

pub fn averaged_correlation(set: &LazySet, family: &FolnerFamily, k: u32, h_max: u64) -> Result<AveragedCorrelation, SetError> {
    if h_max == 0 {
        return Err(SetError::InvalidParameter("H must be at least 1".into()));
    }
    let window = family.window(k)?;
    let max_shift = h_max as i64 - 1;
    let padded = window.offset(0, max_shift)?;
    let base = WindowSet::from_stream(padded, set.stream(padded)?);
    let counts: Vec<u64> = match BitWindow::new(&base) {
        Some(bits) => (0..=max_shift).into_par_iter().map(|g| bits.overlap_count(window, g)).collect(),
        None => (0..=max_shift)
            .into_par_iter()
            .map(|g| {
                let here = stream::clip(base.iter(), window);
                let shifted = stream::clip(stream::shift(base.iter(), g), window);
                stream::total_len(stream::intersect(here, shifted))
            })
            .collect(),
    };
    let len = BigInt::from(window.len());
    let mut partial = Vec::with_capacity(counts.len());
    let mut running = BigInt::zero();
    for (i, c) in counts.iter().enumerate() {
        running += *c;
        partial.push(BigRational::new(running.clone(), &len * BigInt::from(i + 1)));
    }
    let own = BigInt::from(stream::total_len(stream::clip(base.iter(), window)));
    let reference = BigRational::new(&own * &own, &len * &len);
    let boundary = BigRational::new(BigInt::from(h_max as i64 + max_shift), len);
    Ok(AveragedCorrelation { window, partial, reference, boundary })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::{One, ToPrimitive};

    fn spec(shifts: &[i64], word: &[u8]) -> CylinderSpec {
        CylinderSpec::new(shifts.to_vec(), word.iter().map(|&b| b == 1).collect()).unwrap()
    }

    #[test]
    fn cylinder_examples() {
        let w = Window::new(0, 1000).unwrap();
        let evens = LazySet::evens();
        assert_eq!(cylinder_frequency(&evens, &spec(&[0, 1], &[1, 0]), w).unwrap(), DensityValue::new(1, 2).unwrap());
        assert_eq!(cylinder_frequency(&evens, &spec(&[], &[]), w).unwrap(), DensityValue::one());
        let big = Window::new(0, 1 << 21).unwrap();
        let v = cylinder_frequency(&LazySet::HindmanBlocks, &spec(&[0, 1], &[1, 0]), big).unwrap();
        // n = 2·4^m − 1 for m = 0..=10; the last block [2^20, 2^21) ends inside the window
        assert_eq!((v.numer, v.denom), (11, 1 << 21));
    }

    #[test]
    fn spec_validation() {
        assert!(CylinderSpec::new(vec![1, 1], vec![true, false]).is_err());
        assert!(CylinderSpec::new(vec![0], vec![]).is_err());
    }

    #[test]
    fn histogram_agrees_with_cylinders() {
        let w = Window::new(-50, 400).unwrap();
        let set = LazySet::periodic(7, [0, 2, 3]).unwrap();
        let shifts = vec![-3, 0, 4];
        let hist = word_histogram(&set, &shifts, w).unwrap();
        for bits in 0..8u64 {
            let f = cylinder_frequency(&set, &CylinderSpec::from_bits(shifts.clone(), bits).unwrap(), w).unwrap();
            assert_eq!(f.numer, hist.get(&bits).copied().unwrap_or(0), "word {bits:03b}");
        }
        assert_eq!(hist.values().sum::<u64>(), w.len());
    }

    #[test]
    fn expr_examples() {
        let w = Window::new(0, 1 << 12).unwrap();
        let set = LazySet::HindmanBlocks;
        let e: ShiftExpr = "E".parse().unwrap();
        assert_eq!(expr_via_cylinders(&set, &e, w).unwrap().numer, count_on(&e, &set, w).unwrap());
        let all: ShiftExpr = "(E | ~E)".parse().unwrap();
        assert_eq!(expr_via_cylinders(&set, &all, w).unwrap(), DensityValue::one());
        let wide = ShiftExpr::union_of_shifts(0..21).unwrap();
        assert_eq!(expr_via_cylinders(&set, &wide, w), Err(SetError::TooManyShifts(21)));
    }

    #[test]
    fn memo_and_word_total() {
        let mut m = EmpiricalMeasure::new(LazySet::HindmanBlocks, Window::new(0, 5000).unwrap());
        assert_eq!(m.word_total(&[0, 1, 5, 9]).unwrap(), BigRational::one());
        assert_eq!(m.cached(), 16);
        let s = spec(&[0, 1, 5, 9], &[1, 1, 0, 1]);
        let v = m.frequency(&s).unwrap();
        assert_eq!(m.cached(), 16);
        let frozen = m.freeze();
        assert_eq!(frozen.get(&s), Some(v));
    }

    #[test]
    fn hindman_table() {
        let exprs: Vec<ShiftExpr> = ["E", "(E | E@1)", "(~E & E@1)"].iter().map(|s| s.parse().unwrap()).collect();
        let t = correspondence_table(&LazySet::HindmanBlocks, &exprs, &FolnerFamily::DyadicEven, 10, MONOTONE_GAP_EPS).unwrap();
        let third = 2.0 / 3.0;
        assert!((t.final_value(0).unwrap().to_f64() - third).abs() < 1e-6);
        assert!((t.final_value(1).unwrap().to_f64() - third).abs() < 1e-5);
        assert!(t.final_value(2).unwrap().to_f64() <= 110.0 / (1u64 << 21) as f64);
        assert!(t.to_csv().starts_with("exprId,N,numer,denom,decimal\n0,1,"));
        // the boundary term peaks at N=1 (2/8), so every later row sits far below the running max
        let flags: Vec<bool> = t.rows.iter().filter(|r| r.expr_id == 2).map(|r| r.monotone_gap).collect();
        assert_eq!(flags[0], false);
        assert!(flags[1..].iter().all(|&f| f));
    }

    #[test]
    fn evens_periodic_table() {
        let exprs = vec!["(E & E@2)".parse().unwrap()];
        let t = correspondence_table(&LazySet::evens(), &exprs, &FolnerFamily::InitialSegments, 40, MONOTONE_GAP_EPS).unwrap();
        for r in t.rows.iter().filter(|r| r.n % 2 == 0) {
            assert_eq!(r.value, DensityValue::new(1, 2).unwrap());
        }
    }

    #[test]
    fn evens_averaged_correlation() {
        let a = averaged_correlation(&LazySet::evens(), &FolnerFamily::InitialSegments, 1000, 100).unwrap();
        let quarter = BigRational::new(1.into(), 4.into());
        assert_eq!(a.reference, quarter);
        assert_eq!(a.partial[0], BigRational::new(1.into(), 2.into()));
        assert_eq!(a.partial[1], quarter);
        assert_eq!(a.partial[2], BigRational::new(1.into(), 3.into()));
        assert!(a.partial.iter().all(|p| *p >= quarter));
        assert!(a.min_margin() >= BigRational::zero());
        assert!((a.last().to_f64().unwrap() - 0.25).abs() < 0.01);
    }
}
