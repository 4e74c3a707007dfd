use std::fmt;

use num_rational::Ratio;

use super::Window;
use crate::error::SetError;

/// Rule `N ↦ F_N` producing interval Følner windows with `|F_N| → ∞`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FolnerFamily {
    /// `F_N = [0, N)`.
    InitialSegments,
    /// `F_N = [0, 2^{2N+1})`; the window ends coincide with the right ends of
    /// the blocks `[4^N, 2·4^N)`.
    DyadicEven,
    /// `F_N = [base + step·N, base + step·N + scale·N)`.
    Shifted { base: i64, step: i64, scale: u64 },
    /// `F_N` is the `N`-th window of the list (1-based).
    Explicit(Vec<Window>),
}

impl FolnerFamily {
    /// The window `F_N` for `N ≥ 1` (`N = 0` is also accepted for `DyadicEven`).
    pub fn window(&self, n: u32) -> Result<Window, SetError> {
        match self {
            Self::InitialSegments => {
                if n == 0 {
                    return Err(SetError::InvalidParameter("InitialSegments starts at N=1".into()));
                }
                Window::new(0, n as i64)
            }
            Self::DyadicEven => {
                let exp = 2 * n as u64 + 1;
                if exp > 62 {
                    return Err(SetError::Range(1i128 << exp.min(126)));
                }
                Window::from_i128(0, 1i128 << exp)
            }
            Self::Shifted { base, step, scale } => {
                if n == 0 || *scale == 0 {
                    return Err(SetError::InvalidParameter("shifted family needs N >= 1 and scale >= 1".into()));
                }
                let lo = *base as i128 + *step as i128 * n as i128;
                Window::from_i128(lo, lo + *scale as i128 * n as i128)
            }
            Self::Explicit(list) => {
                let idx = (n as usize).checked_sub(1);
                idx.and_then(|i| list.get(i)).copied().ok_or_else(|| {
                    SetError::InvalidParameter(format!("explicit family has {} windows, asked for N={n}", list.len()))
                })
            }
        }
    }

    /// Exact `|F_N Δ (F_N − g)| / |F_N|`, computed by interval arithmetic.
    pub fn defect(&self, n: u32, g: i64) -> Result<Ratio<u128>, SetError> {
        let f = self.window(n)?;
        let (lo, hi) = (f.lo as i128, f.hi as i128);
        let (slo, shi) = (lo - g as i128, hi - g as i128);
        let overlap = (hi.min(shi) - lo.max(slo)).max(0);
        let len = hi - lo;
        let sym_diff = 2 * (len - overlap);
        Ok(Ratio::new(sym_diff as u128, len as u128))
    }
}

impl fmt::Display for FolnerFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::InitialSegments => write!(f, "initial"),
            Self::DyadicEven => write!(f, "dyadic"),
            Self::Shifted { base, step, scale } => write!(f, "shifted base={base} step={step} scale={scale}"),
            Self::Explicit(list) => {
                write!(f, "list ")?;
                for w in list {
                    write!(f, "{w}")?;
                }
                Ok(())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defect_examples() {
        let r = |a: u128, b: u128| Ratio::new(a, b);
        assert_eq!(FolnerFamily::InitialSegments.defect(100, 3).unwrap(), r(6, 100));
        assert_eq!(FolnerFamily::InitialSegments.defect(100, 0).unwrap(), r(0, 1));
        assert_eq!(FolnerFamily::DyadicEven.defect(5, 7).unwrap(), r(14, 1 << 11));
        // shift longer than the window: symmetric difference is everything twice
        assert_eq!(FolnerFamily::InitialSegments.defect(4, -9).unwrap(), r(2, 1));
    }

    #[test]
    fn windows() {
        assert_eq!(FolnerFamily::DyadicEven.window(3).unwrap(), Window::new(0, 128).unwrap());
        assert!(matches!(FolnerFamily::DyadicEven.window(31), Err(SetError::Range(_))));
        assert!(FolnerFamily::DyadicEven.window(30).is_ok());
        let s = FolnerFamily::Shifted { base: -5, step: 10, scale: 3 };
        assert_eq!(s.window(2).unwrap(), Window::new(15, 21).unwrap());
        let e = FolnerFamily::Explicit(vec![Window::new(0, 4).unwrap()]);
        assert!(e.window(1).is_ok() && e.window(2).is_err() && e.window(0).is_err());
    }
}
