//! Compensated floating-point accumulation.
//!
//! Sums are accumulated in fixed-size blocks (Neumaier-compensated inside each
//! block) and the block partials are then combined in block order. The result
//! depends only on the order of the input, never on how blocks are scheduled.

/// Number of terms folded into one partial sum.
pub const BLOCK_LEN: usize = 4096;

/// Neumaier's variant of Kahan summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    compensation: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// Block-wise compensated sum of `values` in iteration order.
pub fn block_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut total = NeumaierSum::new();
    let mut block = NeumaierSum::new();
    let mut filled = 0usize;
    for v in values {
        block.add(v);
        filled += 1;
        if filled == BLOCK_LEN {
            total.add(block.value());
            block = NeumaierSum::new();
            filled = 0;
        }
    }
    if filled > 0 {
        total.add(block.value());
    }
    total.value()
}

/// Error-free transformation `a + b = s + e`.
#[inline]
pub(crate) fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

/// A double-double running prefix value, used where prefix sums are later
/// differenced and plain f64 would lose the low digits.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub(crate) struct DoubleDouble {
    pub hi: f64,
    pub lo: f64,
}

impl DoubleDouble {
    #[inline]
    pub fn add_f64(self, x: f64) -> Self {
        let (s, e) = two_sum(self.hi, x);
        let (hi, lo) = two_sum(s, e + self.lo);
        Self { hi, lo }
    }

    #[inline]
    pub fn add_dd(self, other: Self) -> Self {
        let (s, e) = two_sum(self.hi, other.hi);
        let (hi, lo) = two_sum(s, e + self.lo + other.lo);
        Self { hi, lo }
    }

    #[inline]
    pub fn sub_dd(self, other: Self) -> Self {
        self.add_dd(Self {
            hi: -other.hi,
            lo: -other.lo,
        })
    }

    #[cfg(test)]
    pub fn sub(self, other: Self) -> f64 {
        let (s, e) = two_sum(self.hi, -other.hi);
        s + (e + (self.lo - other.lo))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neumaier_recovers_cancelled_terms() {
        let mut s = NeumaierSum::new();
        for v in [1.0, 1e100, 1.0, -1e100] {
            s.add(v);
        }
        assert_eq!(s.value(), 2.0);
    }

    #[test]
    fn block_sum_matches_exact_integer_total() {
        let n = 3 * BLOCK_LEN + 17;
        let got = block_sum((1..=n).map(|k| k as f64 * 0.1));
        let exact = 0.1 * (n * (n + 1) / 2) as f64;
        assert!((got - exact).abs() <= 1e-15 * exact);
    }

    #[test]
    fn double_double_difference_keeps_low_digits() {
        let mut acc = DoubleDouble::default();
        let start = acc;
        for _ in 0..1000 {
            acc = acc.add_f64(1e6);
        }
        let mid = acc;
        acc = acc.add_f64(1e-9);
        assert_eq!(acc.sub(mid), 1e-9);
        assert_eq!(mid.sub(start), 1e9);
    }
}
