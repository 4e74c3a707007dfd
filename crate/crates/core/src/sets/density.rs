use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::Serialize;

use super::expr::{count_on, evaluate, padded_window, restrict};
use super::{FolnerFamily, LazySet, ShiftExpr, Window, WindowSet};
use crate::error::SetError;

/// Exact window density `count / window length`, kept unreduced so that the
/// count and the window length stay visible.
#[derive(Clone, Copy, Debug)]
pub struct DensityValue {
    pub numer: u64,
    pub denom: u64,
}

impl DensityValue {
    pub fn new(numer: u64, denom: u64) -> Result<Self, SetError> {
        if denom == 0 || numer > denom {
            return Err(SetError::InvalidParameter(format!("density {numer}/{denom} outside [0,1]")));
        }
        Ok(Self { numer, denom })
    }

    pub fn of(x: &WindowSet) -> Self {
        Self { numer: x.count(), denom: x.window().len() }
    }

    pub fn zero() -> Self {
        Self { numer: 0, denom: 1 }
    }

    pub fn one() -> Self {
        Self { numer: 1, denom: 1 }
    }

    pub fn to_f64(self) -> f64 {
        self.numer as f64 / self.denom as f64
    }

    pub fn to_big(self) -> BigRational {
        BigRational::new(BigInt::from(self.numer), BigInt::from(self.denom))
    }

    /// Rounded to 12 decimal places, e.g. `0.666666666667`.
    pub fn decimal(self) -> String {
        decimal12(&self.to_big())
    }
}

impl PartialEq for DensityValue {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for DensityValue {}

impl PartialOrd for DensityValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for DensityValue {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.numer as u128 * other.denom as u128).cmp(&(other.numer as u128 * self.denom as u128))
    }
}

// JSON keeps the exact value as strings next to the rounded decimal.
impl Serialize for DensityValue {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("DensityValue", 3)?;
        st.serialize_field("numer", &self.numer.to_string())?;
        st.serialize_field("denom", &self.denom.to_string())?;
        st.serialize_field("decimal", &self.decimal())?;
        st.end()
    }
}

impl fmt::Display for DensityValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numer, self.denom)
    }
}

/// Decimal rendering of an exact rational to 12 places, half away from zero.
pub fn decimal12(r: &BigRational) -> String {
    let scale = BigInt::from(10u64.pow(12));
    let scaled = r.abs() * BigRational::from_integer(scale.clone());
    let rounded = (scaled + BigRational::new(BigInt::from(1), BigInt::from(2))).floor().to_integer();
    let int_part = &rounded / &scale;
    let frac_part = &rounded % &scale;
    let sign = if r.is_negative() && !rounded.is_zero() { "-" } else { "" };
    format!("{sign}{int_part}.{frac_part:0>12}")
}

/// Density terms along a Følner family and their running maximum, the finite
/// surrogate of the upper density.
#[derive(Clone, Debug, Serialize)]
pub struct DensityCurve {
    pub terms: Vec<DensityTerm>,
    pub running_max: DensityValue,
}

#[derive(Clone, Debug, Serialize)]
pub struct DensityTerm {
    pub n: u32,
    pub window: Window,
    pub value: DensityValue,
}

pub fn upper_density_along(
    expr: &ShiftExpr,
    set: &LazySet,
    family: &FolnerFamily,
    n_max: u32,
) -> Result<DensityCurve, SetError> {
    if n_max == 0 {
        return Err(SetError::InvalidParameter("Nmax must be at least 1".into()));
    }
    let mut terms = Vec::with_capacity(n_max as usize);
    let mut running_max = DensityValue::zero();
    for n in 1..=n_max {
        let w = family.window(n)?;
        // the padded window must also respect the cap
        padded_window(expr, w)?;
        let value = DensityValue { numer: count_on(expr, set, w)?, denom: w.len() };
        running_max = running_max.max(value);
        terms.push(DensityTerm { n, window: w, value });
    }
    Ok(DensityCurve { terms, running_max })
}

/// Best window found by a Banach-density scan; `density` is a certified
/// lower bound for `d*`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct BanachBound {
    pub density: DensityValue,
    pub witness: Window,
}

/// Maximum exact density over windows `[s, s + len)`, `s = 0, stride, …`,
/// `s ≤ bound − len`. Ties keep the first window.
pub fn banach_lower_bound(
    expr: &ShiftExpr,
    set: &LazySet,
    len: u64,
    bound: u64,
    stride: u64,
) -> Result<BanachBound, SetError> {
    if len == 0 || stride == 0 || bound < len {
        return Err(SetError::InvalidParameter(format!("need L >= 1, stride >= 1, B >= L (L={len}, B={bound}, stride={stride})")));
    }
    let scan = Window::from_i128(0, bound as i128)?;
    let base = restrict(set, padded_window(expr, scan)?)?;
    let evaluated = evaluate(expr, &base, scan)?;
    Ok(scan_windows(&evaluated, len, stride))
}

/// Window scan over an already evaluated set, using prefix counts.
pub fn scan_windows(x: &WindowSet, len: u64, stride: u64) -> BanachBound {
    let prefix = x.prefix_counts();
    let start = x.window().lo;
    let last = x.window().hi - len as i64;
    let mut best: Option<BanachBound> = None;
    let mut s = start;
    while s <= last {
        let count = x.count_below(s + len as i64, &prefix) - x.count_below(s, &prefix);
        let density = DensityValue { numer: count, denom: len };
        if best.is_none_or(|b| density > b.density) {
            best = Some(BanachBound { density, witness: Window { lo: s, hi: s + len as i64 } });
        }
        s += stride as i64;
    }
    best.expect("bound >= len leaves at least one window")
}
