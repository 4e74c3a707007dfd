//! Double-double ("dd") floating point: an unevaluated sum `hi + lo` of two
//! `f64` values with `|lo| <= ulp(hi) / 2`, giving roughly 31 significant
//! decimal digits.
//!
//! Used wherever a real-valued parameter decides integer membership (rotation
//! return sets, floors of `b n^c`), so that near-integer ambiguities can be
//! detected with a guard band instead of silently rounded.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DoubleDouble {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// `ln 2` to double-double precision.
const LN2: DoubleDouble = DoubleDouble {
    hi: 6.931_471_805_599_452_862e-1,
    lo: 2.319_046_813_846_299_558e-17,
};

pub const PI: DoubleDouble = DoubleDouble {
    hi: 3.141_592_653_589_793_116e0,
    lo: 1.224_646_799_147_353_207e-16,
};

/// Relative precision of the format, 2^-104.
pub const EPSILON: f64 = 4.930_380_657_631_324e-32;

impl DoubleDouble {
    pub const ZERO: Self = Self { hi: 0.0, lo: 0.0 };
    pub const ONE: Self = Self { hi: 1.0, lo: 0.0 };

    pub const fn from_f64(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }

    /// Exact for |n| < 2^106.
    pub fn from_i128(n: i128) -> Self {
        let hi = n as f64;
        let rest = n - hi as i128;
        let (hi, lo) = quick_two_sum(hi, rest as f64);
        Self { hi, lo }
    }

    pub fn from_i64(n: i64) -> Self {
        Self::from_i128(n as i128)
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn is_finite(self) -> bool {
        self.hi.is_finite() && self.lo.is_finite()
    }

    pub fn abs(self) -> Self {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            -self
        } else {
            self
        }
    }

    pub fn is_negative(self) -> bool {
        self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0)
    }

    pub fn mul_f64(self, b: f64) -> Self {
        let (p, e) = two_prod(self.hi, b);
        let e = e + self.lo * b;
        let (hi, lo) = quick_two_sum(p, e);
        Self { hi, lo }
    }

    pub fn div_f64(self, b: f64) -> Self {
        let q1 = self.hi / b;
        let (p, e) = two_prod(q1, b);
        let (s, f) = two_sum(self.hi, -p);
        let f = f - e + self.lo;
        let q2 = (s + f) / b;
        let (hi, lo) = quick_two_sum(q1, q2);
        Self { hi, lo }
    }

    /// Multiplication by an exact power of two.
    pub fn ldexp(self, exp: i32) -> Self {
        let scale = 2f64.powi(exp);
        Self { hi: self.hi * scale, lo: self.lo * scale }
    }

    pub fn sqr(self) -> Self {
        self * self
    }

    pub fn sqrt(self) -> Self {
        if self.hi <= 0.0 {
            return Self::ZERO;
        }
        let q = self.hi.sqrt();
        let q_dd = Self::from_f64(q);
        let residual = self - q_dd.sqr();
        q_dd + residual.div_f64(2.0 * q)
    }

    pub fn floor(self) -> Self {
        let hi = self.hi.floor();
        if hi == self.hi {
            let (hi, lo) = quick_two_sum(hi, self.lo.floor());
            Self { hi, lo }
        } else {
            Self { hi, lo: 0.0 }
        }
    }

    pub fn round(self) -> Self {
        (self + Self::from_f64(0.5)).floor()
    }

    /// Fractional part in [0, 1).
    pub fn fract(self) -> Self {
        let f = self - self.floor();
        // `f` can round up to exactly 1 when the true value is just below an integer.
        if f.hi > 1.0 || (f.hi == 1.0 && f.lo >= 0.0) {
            Self::ZERO
        } else {
            f
        }
    }

    /// Integer value of a dd holding an integer (as produced by `floor`).
    pub fn to_i128(self) -> i128 {
        self.hi as i128 + self.lo as i128
    }

    pub fn exp(self) -> Self {
        if self.hi > 709.0 {
            return Self::from_f64(f64::INFINITY);
        }
        if self.hi < -745.0 {
            return Self::ZERO;
        }
        if self.hi == 0.0 && self.lo == 0.0 {
            return Self::ONE;
        }
        const SQUARINGS: i32 = 10;
        let k = (self.hi / LN2.hi).round();
        let r = (self - LN2.mul_f64(k)).ldexp(-SQUARINGS);

        // expm1(r) by Taylor series; |r| < 3.5e-4 so 12 terms are ample.
        let mut term = r;
        let mut sum = r;
        for n in 2..=12 {
            term = (term * r).div_f64(n as f64);
            sum = sum + term;
            if term.hi.abs() < 1e-36 {
                break;
            }
        }
        // (1 + p)^2 - 1 = p (p + 2): squaring in expm1 form keeps relative accuracy.
        for _ in 0..SQUARINGS {
            sum = sum * (sum + Self::from_f64(2.0));
        }
        (sum + Self::ONE).ldexp(k as i32)
    }

    /// Natural logarithm; NaN for non-positive input.
    pub fn ln(self) -> Self {
        if self.hi <= 0.0 {
            return Self::from_f64(f64::NAN);
        }
        if self.hi == 1.0 && self.lo == 0.0 {
            return Self::ZERO;
        }
        // Newton on exp(y) = x; each step doubles the number of correct digits.
        let mut y = Self::from_f64(self.hi.ln());
        for _ in 0..2 {
            y = y + self * (-y).exp() - Self::ONE;
        }
        y
    }

    pub fn powf(self, exponent: Self) -> Self {
        if self.hi == 1.0 && self.lo == 0.0 {
            return Self::ONE;
        }
        (exponent * self.ln()).exp()
    }

    /// Parses a decimal literal such as `-1.41421356237309504880e0`.
    pub fn parse_decimal(text: &str) -> Option<Self> {
        let (negative, digits, exp10) = split_decimal(text)?;
        let significant: String = digits.trim_start_matches('0').chars().take(40).collect();
        let dropped = digits.trim_start_matches('0').len() - significant.len();
        let mut acc = Self::ZERO;
        for chunk in significant.as_bytes().chunks(15) {
            let chunk_str = std::str::from_utf8(chunk).ok()?;
            let value: u64 = chunk_str.parse().ok()?;
            acc = acc.mul_f64(10f64.powi(chunk.len() as i32)) + Self::from_f64(value as f64);
        }
        let exp10 = exp10 + dropped as i64;
        let scaled = if exp10 >= 0 {
            acc * pow10(exp10 as u32)
        } else {
            acc / pow10((-exp10) as u32)
        };
        Some(if negative { -scaled } else { scaled })
    }
}

/// Splits a decimal literal into sign, digit string and base-10 exponent so that
/// value = digits * 10^exp.
pub(crate) fn split_decimal(text: &str) -> Option<(bool, String, i64)> {
    let text = text.trim();
    let (negative, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text.strip_prefix('+').unwrap_or(text)),
    };
    let (mantissa, exponent) = match body.find(['e', 'E']) {
        Some(pos) => (&body[..pos], body[pos + 1..].parse::<i64>().ok()?),
        None => (body, 0),
    };
    let (int_part, frac_part) = match mantissa.find('.') {
        Some(pos) => (&mantissa[..pos], &mantissa[pos + 1..]),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let digits = if digits.trim_start_matches('0').is_empty() { "0".to_string() } else { digits };
    Some((negative, digits, exponent - frac_part.len() as i64))
}

fn pow10(mut e: u32) -> DoubleDouble {
    let mut acc = DoubleDouble::ONE;
    while e > 0 {
        let step = e.min(22);
        acc = acc.mul_f64(10f64.powi(step as i32));
        e -= step;
    }
    acc
}

impl Add for DoubleDouble {
    type Output = Self;
    fn add(self, b: Self) -> Self {
        let (s, e) = two_sum(self.hi, b.hi);
        let (t, f) = two_sum(self.lo, b.lo);
        let e = e + t;
        let (s, e) = quick_two_sum(s, e);
        let e = e + f;
        let (hi, lo) = quick_two_sum(s, e);
        Self { hi, lo }
    }
}

impl Sub for DoubleDouble {
    type Output = Self;
    fn sub(self, b: Self) -> Self {
        self + (-b)
    }
}

impl Neg for DoubleDouble {
    type Output = Self;
    fn neg(self) -> Self {
        Self { hi: -self.hi, lo: -self.lo }
    }
}

impl Mul for DoubleDouble {
    type Output = Self;
    fn mul(self, b: Self) -> Self {
        let (p, e) = two_prod(self.hi, b.hi);
        let e = e + (self.hi * b.lo + self.lo * b.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Self { hi, lo }
    }
}

impl Div for DoubleDouble {
    type Output = Self;
    fn div(self, b: Self) -> Self {
        let q1 = self.hi / b.hi;
        let r = self - b.mul_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b.mul_f64(q2);
        let q3 = r.hi / b.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Self { hi, lo } + Self::from_f64(q3)
    }
}

impl PartialOrd for DoubleDouble {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi)? {
            Ordering::Equal => self.lo.partial_cmp(&other.lo),
            ord => Some(ord),
        }
    }
}

impl fmt::Display for DoubleDouble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:e} + {:e}", self.hi, self.lo)
    }
}
