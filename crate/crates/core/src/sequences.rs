//! Integer sequences `n ↦ k_n` used as return-time sequences.
//!
//! Real expressions are evaluated in double-double arithmetic and floored.
//! A value whose distance to the nearest integer is inside the guard band is
//! an error unless the parameters are exact rationals and the value can be
//! certified to be that integer.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedMul, One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::dd::DoubleDouble;
use crate::error::SeqError;
use crate::real::Real;
use crate::sets::GUARD_BAND;

/// Families of sequences, all floors of real expressions (log is natural).
#[derive(Clone, Debug, PartialEq)]
pub enum SeqKind {
    /// `k_n = n`.
    Identity,
    /// `⌊b n^c⌋`.
    FloorPower { b: Real, c: Real },
    /// `⌊b n^c + d n^a⌋`.
    FloorPowerSum { b: Real, c: Real, d: Real, a: Real },
    /// `⌊b n^c (log n)^d⌋`.
    FloorPowerLog { b: Real, c: Real, d: Real },
    /// `⌊b n^c + d (log n)^a⌋`.
    FloorPowerLogSum { b: Real, c: Real, d: Real, a: Real },
    /// `⌊log n⌋`.
    FloorLog,
    /// `⌊n² + log n⌋`.
    PolyPlusLog,
    /// `⌊p_n^c⌋`, `p_n` the n-th prime.
    PrimePower { c: Real },
    /// `k_n = list[n − 1]`.
    Explicit(Vec<i64>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct IntSequence {
    kind: SeqKind,
    primes: Arc<[u64]>,
}

fn positive(x: &Real) -> bool {
    x.value() > DoubleDouble::ZERO
}

fn invalid(msg: impl Into<String>) -> SeqError {
    SeqError::InvalidParameter(msg.into())
}

impl IntSequence {
    fn plain(kind: SeqKind) -> Self {
        Self { kind, primes: Arc::from(Vec::new()) }
    }

    pub fn identity() -> Self {
        Self::plain(SeqKind::Identity)
    }

    pub fn floor_log() -> Self {
        Self::plain(SeqKind::FloorLog)
    }

    pub fn poly_plus_log() -> Self {
        Self::plain(SeqKind::PolyPlusLog)
    }

    /// `⌊b n^c⌋` with `b > 0`, `c > 1`.
    pub fn floor_power(b: Real, c: Real) -> Result<Self, SeqError> {
        if !positive(&b) {
            return Err(invalid(format!("b={b} must be positive")));
        }
        if !(c.value() > DoubleDouble::ONE) {
            return Err(invalid(format!("c={c} must exceed 1")));
        }
        Ok(Self::plain(SeqKind::FloorPower { b, c }))
    }

    /// `⌊b n^c + d n^a⌋` with `c ≥ 1`, `a > 0`, `a ≠ c`, and the coefficient of
    /// the dominant power positive.
    pub fn floor_power_sum(b: Real, c: Real, d: Real, a: Real) -> Result<Self, SeqError> {
        if b.is_zero() || d.is_zero() {
            return Err(invalid("b and d must be nonzero"));
        }
        if !(c.value() >= DoubleDouble::ONE) || !positive(&a) || a.value() == c.value() {
            return Err(invalid(format!("need c >= 1, a > 0, a != c (c={c}, a={a})")));
        }
        let leading = if a.value() > c.value() { &d } else { &b };
        if !positive(leading) {
            return Err(invalid(format!("leading coefficient {leading} must be positive")));
        }
        Ok(Self::plain(SeqKind::FloorPowerSum { b, c, d, a }))
    }

    /// `⌊b n^c (log n)^d⌋` with `b > 0`, `c > 1`.
    pub fn floor_power_log(b: Real, c: Real, d: Real) -> Result<Self, SeqError> {
        if !positive(&b) {
            return Err(invalid(format!("b={b} must be positive")));
        }
        if !(c.value() > DoubleDouble::ONE) {
            return Err(invalid(format!("c={c} must exceed 1")));
        }
        Ok(Self::plain(SeqKind::FloorPowerLog { b, c, d }))
    }

    /// `⌊b n^c + d (log n)^a⌋` with `b > 0`, `c ≥ 1`, `d ≠ 0`, `a > 1`.
    pub fn floor_power_log_sum(b: Real, c: Real, d: Real, a: Real) -> Result<Self, SeqError> {
        if !positive(&b) || d.is_zero() {
            return Err(invalid("need b > 0 and d != 0"));
        }
        if !(c.value() >= DoubleDouble::ONE) || !(a.value() > DoubleDouble::ONE) {
            return Err(invalid(format!("need c >= 1 and a > 1 (c={c}, a={a})")));
        }
        Ok(Self::plain(SeqKind::FloorPowerLogSum { b, c, d, a }))
    }

    /// `⌊p_n^c⌋` for `n ≤ n_max`; the first `n_max` primes are sieved now.
    pub fn prime_power(c: Real, n_max: usize) -> Result<Self, SeqError> {
        if !positive(&c) || c.as_exact_integer().is_some() {
            return Err(invalid(format!("c={c} must be positive and not an integer")));
        }
        if n_max == 0 {
            return Err(invalid("need at least one prime"));
        }
        Ok(Self { kind: SeqKind::PrimePower { c }, primes: Arc::from(first_primes(n_max)) })
    }

    pub fn explicit(list: Vec<i64>) -> Result<Self, SeqError> {
        if list.is_empty() {
            return Err(invalid("explicit list is empty"));
        }
        Ok(Self::plain(SeqKind::Explicit(list)))
    }

    pub fn kind(&self) -> &SeqKind {
        &self.kind
    }

    /// Largest index that can be evaluated, when there is one.
    pub fn max_index(&self) -> Option<u64> {
        match &self.kind {
            SeqKind::PrimePower { .. } => Some(self.primes.len() as u64),
            SeqKind::Explicit(list) => Some(list.len() as u64),
            _ => None,
        }
    }

    pub fn eval(&self, n: u64) -> Result<i64, SeqError> {
        if n == 0 {
            return Err(SeqError::ZeroIndex);
        }
        match &self.kind {
            SeqKind::Identity => i64::try_from(n).map_err(|_| SeqError::Overflow(n)),
            SeqKind::FloorLog => {
                if n == 1 {
                    return Ok(0);
                }
                floor_guarded(ln_u64(n), n)
            }
            SeqKind::PolyPlusLog => {
                let sq = (n as i128).checked_mul(n as i128).filter(|&s| s < 1 << 62).ok_or(SeqError::Overflow(n))?;
                let log_part = if n == 1 { 0 } else { floor_guarded(ln_u64(n), n)? };
                Ok(sq as i64 + log_part)
            }
            SeqKind::FloorPower { b, c } => power_term(b, c, n),
            SeqKind::FloorPowerSum { b, c, d, a } => {
                if let (Some(bx), Some(dx), Some(ci), Some(ai)) = (b.exact(), d.exact(), c.as_exact_integer(), a.as_exact_integer()) {
                    let exact = exact_monomial(bx, n, ci).zip(exact_monomial(dx, n, ai)).and_then(|(x, y)| x.checked_add(&y));
                    return exact.map_or(Err(SeqError::Overflow(n)), |v| floor_ratio(&v, n));
                }
                let v = b.value() * pow_u64(n, c.value()) + d.value() * pow_u64(n, a.value());
                floor_guarded(v, n)
            }
            SeqKind::FloorPowerLog { b, c, d } => {
                if n == 1 {
                    return match d.value().partial_cmp(&DoubleDouble::ZERO) {
                        Some(std::cmp::Ordering::Greater) => Ok(0),
                        Some(std::cmp::Ordering::Equal) => power_term(b, c, 1),
                        _ => Err(SeqError::Domain(1)),
                    };
                }
                let log_pow = (d.value() * ln_u64(n).ln()).exp();
                floor_guarded(b.value() * pow_u64(n, c.value()) * log_pow, n)
            }
            SeqKind::FloorPowerLogSum { b, c, d, a } => {
                if n == 1 {
                    return power_term(b, c, 1);
                }
                let log_pow = (a.value() * ln_u64(n).ln()).exp();
                floor_guarded(b.value() * pow_u64(n, c.value()) + d.value() * log_pow, n)
            }
            SeqKind::PrimePower { c } => {
                let idx = usize::try_from(n - 1).ok().filter(|&i| i < self.primes.len());
                let p = idx
                    .map(|i| self.primes[i])
                    .ok_or(SeqError::PrimeIndexOutOfRange { n, sieved: self.primes.len() })?;
                let v = pow_u64(p, c.value());
                match floor_guarded(v, n) {
                    Err(SeqError::GuardBand { .. }) if certify_power(&Ratio::one(), p, c, v) => Ok(v.round().to_i128() as i64),
                    other => other,
                }
            }
            SeqKind::Explicit(list) => {
                list.get((n - 1) as usize).copied().ok_or(SeqError::ExplicitOutOfRange { n, len: list.len() })
            }
        }
    }

    /// `[k_1, …, k_N]`; the first failing index determines the error.
    pub fn values_up_to(&self, n: u64) -> Result<Vec<i64>, SeqError> {
        if n == 0 {
            return Err(SeqError::ZeroIndex);
        }
        if let Some(max) = self.max_index() {
            if n > max {
                return Err(match &self.kind {
                    SeqKind::Explicit(list) => SeqError::ExplicitOutOfRange { n, len: list.len() },
                    _ => SeqError::PrimeIndexOutOfRange { n, sieved: self.primes.len() },
                });
            }
        }
        if n < 1 << 14 {
            return (1..=n).map(|k| self.eval(k)).collect();
        }
        let results: Vec<Result<i64, SeqError>> = (1..=n).into_par_iter().map(|k| self.eval(k)).collect();
        results.into_iter().collect()
    }
}

fn ln_u64(n: u64) -> DoubleDouble {
    DoubleDouble::from_i128(n as i128).ln()
}

fn pow_u64(n: u64, c: DoubleDouble) -> DoubleDouble {
    DoubleDouble::from_i128(n as i128).powf(c)
}

fn floor_guarded(v: DoubleDouble, n: u64) -> Result<i64, SeqError> {
    if !v.is_finite() || v.abs().hi >= 2f64.powi(62) {
        return Err(SeqError::Overflow(n));
    }
    let fl = v.floor();
    let frac = v - fl;
    // absolute error of exp/ln chains grows with the magnitude of the value
    let guard = GUARD_BAND.max(v.abs().hi * 2f64.powi(-90));
    if frac.to_f64() < guard || (DoubleDouble::ONE - frac).to_f64() < guard {
        return Err(SeqError::GuardBand { n, value: v.to_f64() });
    }
    Ok(fl.to_i128() as i64)
}

fn floor_ratio(r: &Ratio<i128>, n: u64) -> Result<i64, SeqError> {
    r.floor().to_integer().to_i64().filter(|v| v.abs() < 1 << 62).ok_or(SeqError::Overflow(n))
}

fn exact_monomial(coef: &Ratio<i128>, n: u64, exp: i128) -> Option<Ratio<i128>> {
    let e = u32::try_from(exp).ok()?;
    let pow = (n as i128).checked_pow(e)?;
    coef.checked_mul(&Ratio::from_integer(pow))
}

/// `⌊b n^c⌋`, exact when `b` and `c` are an exact rational and an integer.
fn power_term(b: &Real, c: &Real, n: u64) -> Result<i64, SeqError> {
    if let (Some(bx), Some(ci)) = (b.exact(), c.as_exact_integer()) {
        return exact_monomial(bx, n, ci).map_or(Err(SeqError::Overflow(n)), |v| floor_ratio(&v, n));
    }
    if n == 1 {
        return match b.exact() {
            Some(bx) => floor_ratio(bx, n),
            None => floor_guarded(b.value(), n),
        };
    }
    let v = b.value() * pow_u64(n, c.value());
    match (floor_guarded(v, n), b.exact()) {
        (Err(SeqError::GuardBand { .. }), Some(bx)) if certify_power(bx, n, c, v) => Ok(v.round().to_i128() as i64),
        (result, _) => result,
    }
}

/// Whether `b · base^c` equals the integer nearest to `approx`, decided in
/// exact integer arithmetic: with `b = p/q` and `c = r/s`, the identity
/// `b · base^{r/s} = m` is `p^s · base^r = m^s · q^s` for positive `b`, `m`.
fn certify_power(b: &Ratio<i128>, base: u64, c: &Real, approx: DoubleDouble) -> bool {
    const MAX_ROOT: i128 = 64;
    let Some(c) = c.exact() else { return false };
    let (r, s) = (*c.numer(), *c.denom());
    if !b.is_positive() || r <= 0 || s > MAX_ROOT || r > 4096 {
        return false;
    }
    let m = approx.round().to_i128();
    if m <= 0 {
        return false;
    }
    let s = s as u32;
    let lhs = BigInt::from(*b.numer()).pow(s) * BigInt::from(base).pow(r as u32);
    let rhs = BigInt::from(m).pow(s) * BigInt::from(*b.denom()).pow(s);
    !lhs.is_zero() && lhs == rhs
}

/// The first `count` primes by a sieve of Eratosthenes sized with
/// `p_n < n (ln n + ln ln n)` for `n ≥ 6`.
pub fn first_primes(count: usize) -> Vec<u64> {
    let limit = if count < 6 {
        15
    } else {
        let n = count as f64;
        (n * (n.ln() + n.ln().ln())).ceil() as usize + 1
    };
    let mut composite = vec![false; limit + 1];
    let mut primes = Vec::with_capacity(count);
    for i in 2..=limit {
        if composite[i] {
            continue;
        }
        primes.push(i as u64);
        if primes.len() == count {
            break;
        }
        let mut j = i * i;
        while j <= limit {
            composite[j] = true;
            j += i;
        }
    }
    primes
}

impl fmt::Display for IntSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            SeqKind::Identity => write!(f, "id"),
            SeqKind::FloorPower { b, c } => write!(f, "pow b={b} c={c}"),
            SeqKind::FloorPowerSum { b, c, d, a } => write!(f, "powsum b={b} c={c} d={d} a={a}"),
            SeqKind::FloorPowerLog { b, c, d } => write!(f, "powlog b={b} c={c} d={d}"),
            SeqKind::FloorPowerLogSum { b, c, d, a } => write!(f, "powlogsum b={b} c={c} d={d} a={a}"),
            SeqKind::FloorLog => write!(f, "log"),
            SeqKind::PolyPlusLog => write!(f, "poly2log"),
            SeqKind::PrimePower { c } => write!(f, "prime c={c}"),
            SeqKind::Explicit(list) => {
                let items: Vec<String> = list.iter().map(i64::to_string).collect();
                write!(f, "list {}", items.join(","))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(s: &str) -> Real {
        Real::parse(s).unwrap()
    }

    #[test]
    fn examples() {
        assert_eq!(IntSequence::identity().eval(7).unwrap(), 7);
        assert_eq!(IntSequence::identity().values_up_to(3).unwrap(), vec![1, 2, 3]);
        let log = IntSequence::floor_log();
        assert_eq!(log.eval(1).unwrap(), 0);
        assert_eq!(log.eval(3).unwrap(), 1);
        assert_eq!(log.values_up_to(8).unwrap(), vec![0, 0, 1, 1, 1, 1, 1, 2]);
        assert_eq!(IntSequence::poly_plus_log().eval(10).unwrap(), 102);
        let p = IntSequence::prime_power(r("0.5"), 4).unwrap();
        assert_eq!(p.values_up_to(4).unwrap(), vec![1, 1, 2, 2]);
    }

    #[test]
    fn errors() {
        assert_eq!(IntSequence::identity().eval(0), Err(SeqError::ZeroIndex));
        let p = IntSequence::prime_power(r("0.5"), 4).unwrap();
        assert!(matches!(p.eval(5), Err(SeqError::PrimeIndexOutOfRange { n: 5, sieved: 4 })));
        let e = IntSequence::explicit(vec![1, 4, 9]).unwrap();
        assert_eq!(e.eval(3).unwrap(), 9);
        assert!(matches!(e.eval(4), Err(SeqError::ExplicitOutOfRange { .. })));
        let neg_log = IntSequence::floor_power_log(r("1"), r("1.5"), r("-2")).unwrap();
        assert_eq!(neg_log.eval(1), Err(SeqError::Domain(1)));
        assert!(IntSequence::floor_power(r("-1"), r("1.5")).is_err());
        assert!(IntSequence::floor_power(r("1"), r("1")).is_err());
        assert!(IntSequence::prime_power(r("2"), 4).is_err());
    }

    #[test]
    fn exact_integer_values_are_certified() {
        let s = IntSequence::floor_power(r("1"), r("1.5")).unwrap();
        assert_eq!(s.eval(4).unwrap(), 8);
        assert_eq!(s.eval(9).unwrap(), 27);
        assert_eq!(s.eval(2).unwrap(), 2);
        let sq = IntSequence::floor_power(r("1/3"), r("2")).unwrap();
        assert_eq!(sq.values_up_to(4).unwrap(), vec![0, 1, 3, 5]);
    }

    #[test]
    fn guard_band_is_an_error() {
        // 4^{1.5}·(1 + 10^-25) is within 10^-23 of 8 but not equal to it
        let s = IntSequence::floor_power(r("1.0000000000000000000000001"), r("1.5")).unwrap();
        assert!(matches!(s.eval(4), Err(SeqError::GuardBand { n: 4, .. })));
        assert_eq!(s.eval(3).unwrap(), 5);
    }

    #[test]
    fn sieve() {
        assert_eq!(first_primes(10), vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29]);
        let big = first_primes(100_000);
        assert_eq!(big.len(), 100_000);
        assert_eq!(*big.last().unwrap(), 1_299_709);
    }

    #[test]
    fn display_round_trips_names() {
        assert_eq!(IntSequence::floor_log().to_string(), "log");
        assert_eq!(IntSequence::explicit(vec![1, 4, 9]).unwrap().to_string(), "list 1,4,9");
    }
}
