use std::fmt;

use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};

use crate::dd::{split_decimal, DoubleDouble};

/// A real parameter: its double-double value, and the exact rational it
/// denotes when the user wrote a terminating decimal or a fraction.
#[derive(Clone, Debug, PartialEq)]
pub struct Real {
    value: DoubleDouble,
    exact: Option<Ratio<i128>>,
    label: String,
}

impl Real {
    /// Accepts `golden` (the conjugate golden ratio (√5−1)/2), `phi`, `sqrt2`,
    /// `sqrt3`, fractions `p/q` and decimal literals.
    pub fn parse(text: &str) -> Option<Self> {
        let text = text.trim();
        let named = |value: DoubleDouble| Some(Self { value, exact: None, label: text.to_string() });
        let five = DoubleDouble::from_f64(5.0);
        match text {
            "golden" => return named((five.sqrt() - DoubleDouble::ONE).div_f64(2.0)),
            "phi" => return named((five.sqrt() + DoubleDouble::ONE).div_f64(2.0)),
            "sqrt2" => return named(DoubleDouble::from_f64(2.0).sqrt()),
            "sqrt3" => return named(DoubleDouble::from_f64(3.0).sqrt()),
            _ => {}
        }
        if let Some((p, q)) = text.split_once('/') {
            let p: i128 = p.trim().parse().ok()?;
            let q: i128 = q.trim().parse().ok()?;
            if q == 0 {
                return None;
            }
            let mut real = Self::from_ratio(Ratio::new(p, q));
            real.label = text.to_string();
            return Some(real);
        }
        let value = DoubleDouble::parse_decimal(text)?;
        Some(Self { value, exact: decimal_ratio(text), label: text.to_string() })
    }

    pub fn from_ratio(r: Ratio<i128>) -> Self {
        let value = DoubleDouble::from_i128(*r.numer()) / DoubleDouble::from_i128(*r.denom());
        let label = if *r.denom() == 1 { r.numer().to_string() } else { format!("{}/{}", r.numer(), r.denom()) };
        Self { value, exact: Some(r), label }
    }

    pub fn from_f64(x: f64) -> Self {
        Self { value: DoubleDouble::from_f64(x), exact: None, label: format!("{x}") }
    }

    pub fn value(&self) -> DoubleDouble {
        self.value
    }

    pub fn exact(&self) -> Option<&Ratio<i128>> {
        self.exact.as_ref()
    }

    pub fn to_f64(&self) -> f64 {
        self.value.to_f64()
    }

    pub fn is_zero(&self) -> bool {
        match &self.exact {
            Some(r) => r.is_zero(),
            None => self.value.hi == 0.0 && self.value.lo == 0.0,
        }
    }

    /// Exact integer value when the parameter is known to be one.
    pub fn as_exact_integer(&self) -> Option<i128> {
        self.exact.as_ref().filter(|r| r.is_integer()).map(|r| r.to_integer())
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

fn decimal_ratio(text: &str) -> Option<Ratio<i128>> {
    let (negative, digits, exp10) = split_decimal(text)?;
    let mut numer: i128 = digits.parse().ok()?;
    if negative {
        numer = -numer;
    }
    if exp10 >= 0 {
        let scale = 10i128.checked_pow(u32::try_from(exp10).ok()?)?;
        Some(Ratio::from_integer(numer.checked_mul(scale)?))
    } else {
        let scale = 10i128.checked_pow(u32::try_from(-exp10).ok()?)?;
        Some(Ratio::new(numer, scale))
    }
}

/// Rational parsing for parameters that must be exact (e.g. `1/3`, `0.25`).
pub fn parse_ratio(text: &str) -> Option<Ratio<i64>> {
    let r = Real::parse(text)?;
    let exact = r.exact()?;
    Some(Ratio::new(exact.numer().to_i64()?, exact.denom().to_i64()?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn named_and_decimal() {
        let g = Real::parse("golden").unwrap();
        let v = g.value();
        // g² + g = 1
        assert!((v * v + v - crate::dd::DoubleDouble::ONE).abs().to_f64() < 1e-31);
        assert!(g.exact().is_none());
        let d = Real::parse("0.25").unwrap();
        assert_eq!(d.exact(), Some(&Ratio::new(1, 4)));
        let f = Real::parse("2/6").unwrap();
        assert_eq!(f.exact(), Some(&Ratio::new(1, 3)));
        assert_eq!(Real::parse("3").unwrap().as_exact_integer(), Some(3));
        assert!(Real::parse("abc").is_none());
        assert!(Real::parse("1/0").is_none());
    }

    #[test]
    fn ratio_parsing() {
        assert_eq!(parse_ratio("1/3"), Some(Ratio::new(1, 3)));
        assert_eq!(parse_ratio("0.5"), Some(Ratio::new(1, 2)));
        assert_eq!(parse_ratio("golden"), None);
    }
}
