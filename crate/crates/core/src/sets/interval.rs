use std::fmt;

use serde::Serialize;

use crate::error::SetError;

/// Largest admissible ambient window length.
pub const MAX_WINDOW_LEN: i128 = 1 << 62;

/// Half-open integer interval `[lo, hi)` with `lo < hi`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Interval {
    pub lo: i64,
    pub hi: i64,
}

impl Interval {
    pub fn new(lo: i64, hi: i64) -> Result<Self, SetError> {
        if lo < hi {
            Ok(Self { lo, hi })
        } else {
            Err(SetError::EmptyInterval { lo, hi })
        }
    }

    pub fn len(&self) -> u64 {
        (self.hi as i128 - self.lo as i128) as u64
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, n: i64) -> bool {
        self.lo <= n && n < self.hi
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{})", self.lo, self.hi)
    }
}

/// Ambient half-open window a `WindowSet` lives in. Length is capped at 2^62.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Window {
    pub lo: i64,
    pub hi: i64,
}

impl Window {
    pub fn new(lo: i64, hi: i64) -> Result<Self, SetError> {
        Self::from_i128(lo as i128, hi as i128)
    }

    /// Builds a window from wide endpoints, rejecting anything outside i64 or
    /// longer than the 2^62 cap.
    pub fn from_i128(lo: i128, hi: i128) -> Result<Self, SetError> {
        if lo >= hi {
            return Err(SetError::EmptyInterval {
                lo: lo.clamp(i64::MIN as i128, i64::MAX as i128) as i64,
                hi: hi.clamp(i64::MIN as i128, i64::MAX as i128) as i64,
            });
        }
        if hi - lo > MAX_WINDOW_LEN || lo < i64::MIN as i128 || hi > i64::MAX as i128 {
            return Err(SetError::Range(hi - lo));
        }
        Ok(Self { lo: lo as i64, hi: hi as i64 })
    }

    pub fn len(&self) -> u64 {
        (self.hi as i128 - self.lo as i128) as u64
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, n: i64) -> bool {
        self.lo <= n && n < self.hi
    }

    pub fn covers(&self, other: &Window) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    /// `[lo - left, hi + right)`.
    pub fn pad(&self, left: u64, right: u64) -> Result<Self, SetError> {
        Self::from_i128(self.lo as i128 - left as i128, self.hi as i128 + right as i128)
    }

    /// `[lo + a, hi + b)`.
    pub fn offset(&self, a: i64, b: i64) -> Result<Self, SetError> {
        Self::from_i128(self.lo as i128 + a as i128, self.hi as i128 + b as i128)
    }

    pub fn as_interval(&self) -> Interval {
        Interval { lo: self.lo, hi: self.hi }
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{})", self.lo, self.hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_inverted_and_oversized() {
        assert!(Interval::new(3, 3).is_err());
        assert!(Window::new(5, 4).is_err());
        assert!(matches!(Window::from_i128(0, (1 << 62) + 1), Err(SetError::Range(_))));
        assert_eq!(Window::from_i128(0, 1 << 62).unwrap().len(), 1 << 62);
    }

    #[test]
    fn padding() {
        let w = Window::new(0, 10).unwrap();
        assert_eq!(w.pad(3, 2).unwrap(), Window::new(-3, 12).unwrap());
        assert!(w.pad(3, 2).unwrap().covers(&w));
    }
}
