//! End-to-end drivers: covering curves, the Hindman counterexample table,
//! complement witnesses and the sweeping-out classifier.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Signed;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::Error;
use crate::sequences::IntSequence;
use crate::sets::{
    banach_lower_bound, count_on, expr::restrict, BanachBound, DensityValue, FolnerFamily, LazySet,
    ShiftExpr, Window,
};

/// Window-scan parameters shared by the Banach-density drivers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ScanParams {
    pub len: u64,
    pub bound: u64,
    pub stride: u64,
}

impl ScanParams {
    /// Stride defaults to half the window length.
    pub fn new(len: u64, bound: u64, stride: Option<u64>) -> Self {
        Self { len, bound, stride: stride.unwrap_or((len / 2).max(1)) }
    }
}

/// Rotation sets are evaluated once on `w` and replaced by their intervals
/// there, so that repeated scans do not recompute the orbit.
fn localize(set: &LazySet, w: Window) -> Result<LazySet, Error> {
    if set.is_exact() {
        return Ok(set.clone());
    }
    Ok(LazySet::explicit(restrict(set, w)?.intervals().to_vec()))
}

fn scan_window(params: &ScanParams, pad_lo: i64, pad_hi: i64) -> Result<Window, Error> {
    Ok(Window::from_i128(pad_lo as i128, params.bound as i128 + pad_hi as i128)?)
}

#[derive(Clone, Debug, Serialize)]
pub struct CoveringRow {
    pub k: u64,
    pub distinct_shifts: usize,
    pub density: DensityValue,
    pub witness: Window,
}

#[derive(Clone, Debug, Serialize)]
pub struct CoveringReport {
    pub set: String,
    pub seq: String,
    pub params: ScanParams,
    pub rows: Vec<CoveringRow>,
}

impl CoveringReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("K,shifts,numer,denom,decimal,witnessLo,witnessHi\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.k,
                r.distinct_shifts,
                r.density.numer,
                r.density.denom,
                r.density.decimal(),
                r.witness.lo,
                r.witness.hi
            ));
        }
        out
    }

    pub fn is_monotone(&self) -> bool {
        self.rows.windows(2).all(|p| p[0].density <= p[1].density)
    }

    pub fn final_density(&self) -> DensityValue {
        self.rows.last().map_or_else(DensityValue::zero, |r| r.density)
    }
}

fn check_checkpoints(ks: &[u64]) -> Result<(), Error> {
    if ks.is_empty() || ks[0] == 0 || ks.windows(2).any(|p| p[0] >= p[1]) {
        return Err(Error::Invalid("K checkpoints must be positive and strictly increasing".into()));
    }
    Ok(())
}

/// Best-window densities of `⋃_{n ≤ K} (E − k_n)` for each checkpoint `K`.
pub fn covering_curve(set: &LazySet, seq: &IntSequence, ks: &[u64], params: ScanParams) -> Result<CoveringReport, Error> {
    check_checkpoints(ks)?;
    let values = seq.values_up_to(*ks.last().expect("non-empty"))?;
    let lo = values.iter().copied().min().unwrap_or(0).min(0);
    let hi = values.iter().copied().max().unwrap_or(0).max(0);
    let span = lo.unsigned_abs().max(hi.unsigned_abs()) as i64;
    let local = localize(set, scan_window(&params, -span, span)?)?;
    let rows = ks
        .par_iter()
        .map(|&k| {
            let mut shifts: Vec<i64> = values[..k as usize].to_vec();
            shifts.sort_unstable();
            shifts.dedup();
            let expr = ShiftExpr::union_of_shifts(shifts.iter().copied()).expect("K >= 1");
            let BanachBound { density, witness } = banach_lower_bound(&expr, &local, params.len, params.bound, params.stride)?;
            Ok(CoveringRow { k, distinct_shifts: shifts.len(), density, witness })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    Ok(CoveringReport { set: set.to_string(), seq: seq.to_string(), params, rows })
}

#[derive(Clone, Debug, Serialize)]
pub struct CounterexampleRow {
    pub k: u64,
    pub n: u32,
    pub value: DensityValue,
    /// `(K+1)(N+1)/2^{2N+1} + 4^{−N}` as an exact rational string.
    pub bound: String,
    pub within: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CounterexampleTable {
    pub rows: Vec<CounterexampleRow>,
}

impl CounterexampleTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("K,N,numer,denom,decimal,bound,within\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.k,
                r.n,
                r.value.numer,
                r.value.denom,
                r.value.decimal(),
                r.bound,
                r.within
            ));
        }
        out
    }

    pub fn all_within(&self) -> bool {
        self.rows.iter().all(|r| r.within)
    }
}

fn big(n: impl Into<BigInt>) -> BigRational {
    BigRational::from_integer(n.into())
}

/// Densities of `⋃_{i=0}^{K} (E − i)` for Hindman's `E` along `[0, 2^{2N+1})`,
/// each compared with `2/3` under the block-boundary bound.
pub fn hindman_counterexample(n_max: u32, ks: &[u64]) -> Result<CounterexampleTable, Error> {
    if n_max == 0 {
        return Err(Error::Invalid("Nmax must be at least 1".into()));
    }
    let set = LazySet::HindmanBlocks;
    let two_thirds = BigRational::new(2.into(), 3.into());
    let cells: Vec<(u64, u32)> = ks.iter().flat_map(|&k| (1..=n_max).map(move |n| (k, n))).collect();
    let rows = cells
        .par_iter()
        .map(|&(k, n)| {
            let expr = ShiftExpr::union_of_shifts(0..=k as i64).expect("non-empty range");
            let w = FolnerFamily::DyadicEven.window(n)?;
            let value = DensityValue { numer: count_on(&expr, &set, w)?, denom: w.len() };
            let bound = big((k + 1) * (n as u64 + 1)) / big(BigInt::from(2).pow(2 * n + 1))
                + BigRational::new(1.into(), BigInt::from(4).pow(n));
            let within = (value.to_big() - &two_thirds).abs() <= bound;
            Ok(CounterexampleRow { k, n, value, bound: bound.to_string(), within })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    Ok(CounterexampleTable { rows })
}

#[derive(Clone, Debug, Serialize)]
pub struct ComplementWitness {
    pub h: u64,
    pub density: DensityValue,
    pub witness: Window,
}

/// The shift `h ∈ [1, h_max]` maximizing the best-window density of
/// `E^c ∩ (E − h)`; `None` when every scan is empty.
pub fn complement_witness_search(set: &LazySet, h_max: u64, params: ScanParams) -> Result<Option<ComplementWitness>, Error> {
    if h_max == 0 {
        return Err(Error::Invalid("hMax must be at least 1".into()));
    }
    let local = localize(set, scan_window(&params, 0, h_max as i64)?)?;
    let found = (1..=h_max)
        .into_par_iter()
        .map(|h| {
            let expr = ShiftExpr::intersect(ShiftExpr::not_atom(0), ShiftExpr::atom(h as i64));
            let b = banach_lower_bound(&expr, &local, params.len, params.bound, params.stride)?;
            Ok(ComplementWitness { h, density: b.density, witness: b.witness })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let mut best: Option<ComplementWitness> = None;
    for w in found {
        if best.as_ref().is_none_or(|b| w.density > b.density) {
            best = Some(w);
        }
    }
    Ok(best.filter(|b| b.density.numer > 0))
}

pub const SWEEP_THRESHOLD: f64 = 0.95;
pub const PLATEAU_DELTA: f64 = 0.01;
pub const PLATEAU_CEILING: f64 = 0.9;

/// Printed with every classification.
pub const CLASSIFIER_CAVEAT: &str = "heuristic finite evidence: thresholds 0.95 (sweeping), plateau 0.01 below 0.9 (obstructed); \
a sequence that is sweeping out may still look obstructed at this scale, since no effective rate is known";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING-KEBAB-CASE")]
pub enum CurveVerdict {
    Sweeping,
    Plateau,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassifiedSet {
    pub name: String,
    pub curve: CoveringReport,
    pub verdict: CurveVerdict,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING-KEBAB-CASE")]
pub enum SweepVerdict {
    SweepingEvidence,
    Obstructed(Vec<String>),
    Inconclusive,
}

impl std::fmt::Display for SweepVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::SweepingEvidence => write!(f, "SWEEPING-EVIDENCE"),
            Self::Obstructed(names) => write!(f, "OBSTRUCTED({})", names.join(";")),
            Self::Inconclusive => write!(f, "INCONCLUSIVE"),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Classification {
    pub seq: String,
    pub sets: Vec<ClassifiedSet>,
    pub verdict: SweepVerdict,
    pub caveat: &'static str,
}

fn classify_curve(curve: &CoveringReport) -> CurveVerdict {
    let last = curve.final_density().to_f64();
    let mid = curve.rows[curve.rows.len() / 2].density.to_f64();
    if last >= SWEEP_THRESHOLD {
        CurveVerdict::Sweeping
    } else if last - mid < PLATEAU_DELTA && last < PLATEAU_CEILING {
        CurveVerdict::Plateau
    } else {
        CurveVerdict::Inconclusive
    }
}

/// Covering curves of `seq` on every test set, with an overall verdict.
pub fn sweeping_classifier(
    seq: &IntSequence,
    sets: &[(String, LazySet)],
    ks: &[u64],
    params: ScanParams,
) -> Result<Classification, Error> {
    if sets.is_empty() {
        return Err(Error::Invalid("no test sets".into()));
    }
    let classified = sets
        .iter()
        .map(|(name, set)| {
            let curve = covering_curve(set, seq, ks, params)?;
            let verdict = classify_curve(&curve);
            Ok(ClassifiedSet { name: name.clone(), curve, verdict })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let obstructed: Vec<String> =
        classified.iter().filter(|c| c.verdict == CurveVerdict::Plateau).map(|c| c.name.clone()).collect();
    let verdict = if !obstructed.is_empty() {
        SweepVerdict::Obstructed(obstructed)
    } else if classified.iter().all(|c| c.verdict == CurveVerdict::Sweeping) {
        SweepVerdict::SweepingEvidence
    } else {
        SweepVerdict::Inconclusive
    };
    Ok(Classification { seq: seq.to_string(), sets: classified, verdict, caveat: CLASSIFIER_CAVEAT })
}
