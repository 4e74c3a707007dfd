//! Exact finite-window algebra of subsets of ℤ.

mod bits;
mod density;
pub mod expr;
mod folner;
mod interval;
mod lazy;
pub mod stream;
mod window_set;

pub use bits::BitWindow;
pub use density::{
    banach_lower_bound, decimal12, scan_windows, upper_density_along, BanachBound, DensityCurve, DensityTerm,
    DensityValue,
};
pub use expr::{count_on, eval_expr, ExprParseError, ShiftExpr};
pub use folner::FolnerFamily;
pub use interval::{Interval, Window, MAX_WINDOW_LEN};
pub use lazy::{AbSet, LazySet, Rotation, GUARD_BAND};
pub use window_set::{parse_interval_list, WindowSet};

use crate::error::SetError;
use stream::IntervalIter;

/// Anything that can stream its canonical intervals inside a window.
pub trait IntervalSource {
    fn stream(&self, w: Window) -> Result<IntervalIter<'_>, SetError>;
}
