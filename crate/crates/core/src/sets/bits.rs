use super::{Window, WindowSet};

/// Packed membership bits of a [`WindowSet`], for shifted-overlap counts.
#[derive(Clone, Debug)]
pub struct BitWindow {
    window: Window,
    words: Vec<u64>,
}

impl BitWindow {
    /// Largest window accepted, in bits.
    pub const MAX_LEN: u64 = 1 << 32;

    pub fn new(set: &WindowSet) -> Option<Self> {
        let window = set.window();
        if window.len() > Self::MAX_LEN {
            return None;
        }
        // one spare word so unaligned reads never run off the end
        let mut words = vec![0u64; window.len().div_ceil(64) as usize + 1];
        for iv in set.iter() {
            let (mut i, end) = ((iv.lo - window.lo) as u64, (iv.hi - window.lo) as u64);
            while i < end {
                let bit = i % 64;
                let take = (64 - bit).min(end - i);
                let mask = if take == 64 { u64::MAX } else { ((1u64 << take) - 1) << bit };
                words[(i / 64) as usize] |= mask;
                i += take;
            }
        }
        Some(Self { window, words })
    }

    pub fn window(&self) -> Window {
        self.window
    }

    fn word_at(&self, bit: u64) -> u64 {
        let (idx, off) = ((bit / 64) as usize, bit % 64);
        let lo = self.words[idx] >> off;
        if off == 0 {
            lo
        } else {
            lo | self.words.get(idx + 1).map_or(0, |w| w << (64 - off))
        }
    }

    /// `|{m ∈ w : m ∈ X and m + k ∈ X}|`; both `w` and `w + k` must lie in the window.
    pub fn overlap_count(&self, w: Window, k: i64) -> u64 {
        let lo = self.window.lo;
        debug_assert!(self.window.covers(&w));
        debug_assert!(w.lo + k >= lo && w.hi + k <= self.window.hi);
        let a0 = (w.lo - lo) as u64;
        let b0 = (w.lo + k - lo) as u64;
        let len = w.len();
        let mut count = 0u64;
        let mut i = 0;
        while i < len {
            let take = (len - i).min(64);
            let mask = if take == 64 { u64::MAX } else { (1u64 << take) - 1 };
            count += (self.word_at(a0 + i) & self.word_at(b0 + i) & mask).count_ones() as u64;
            i += take;
        }
        count
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sets::Interval;

    #[test]
    fn overlap_matches_direct_count() {
        let w = Window::new(-70, 300).unwrap();
        let ivs = vec![Interval { lo: -70, hi: -3 }, Interval { lo: 5, hi: 130 }, Interval { lo: 131, hi: 132 }, Interval { lo: 200, hi: 299 }];
        let set = WindowSet::new(w, ivs).unwrap();
        let bits = BitWindow::new(&set).unwrap();
        for k in [-40i64, -1, 0, 1, 63, 64, 65, 100] {
            let inner = Window::new(-30, 200).unwrap();
            let direct = (inner.lo..inner.hi).filter(|&m| set.contains(m) && set.contains(m + k)).count() as u64;
            assert_eq!(bits.overlap_count(inner, k), direct, "k={k}");
        }
    }
}
