//! Numbers too large for machine words, written as towers of a small base.

use std::cmp::Ordering;
use std::fmt;

/// `base^top` is materialized as an `f64` while `top·ln(base)` stays below this.
const COLLAPSE_LN: f64 = 700.0;

/// A nonnegative quantity that is either a machine integer or a tower
/// `base^base^…^top` with `height` copies of `base`.
///
/// Towers are kept normalized: a tower of height `h ≥ 1` always has
/// `top·ln(base) ≥ 700`, so its value exceeds every finite `f64` of height 0
/// by at least the gap handled in [`TowerValue::compare`]. Arithmetic on
/// towers of height ≥ 2 is approximate: terms that cannot change the top in
/// double precision are dropped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TowerValue {
    Exact(u64),
    /// Height 0 is the real number `top`.
    Tower { base: u32, height: u32, top: f64 },
}

impl TowerValue {
    /// A tower, collapsed as far as double precision allows.
    pub fn tower(base: u32, height: u32, top: f64) -> Self {
        let ln_base = (base as f64).ln();
        let (mut height, mut top) = (height, top);
        while height > 0 && top * ln_base < COLLAPSE_LN {
            top = (base as f64).powf(top);
            height -= 1;
        }
        if height == 0 && top >= 0.0 && top.fract() == 0.0 && top < 9.007_199_254_740_992e15 {
            return TowerValue::Exact(top as u64);
        }
        TowerValue::Tower { base, height, top }
    }

    pub fn real(base: u32, value: f64) -> Self {
        Self::tower(base, 0, value)
    }

    pub fn height(&self) -> u32 {
        match self {
            TowerValue::Exact(_) => 0,
            TowerValue::Tower { height, .. } => *height,
        }
    }

    pub fn top(&self) -> f64 {
        match self {
            TowerValue::Exact(v) => *v as f64,
            TowerValue::Tower { top, .. } => *top,
        }
    }

    /// The value as an `f64`, when it is one.
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            TowerValue::Exact(v) => Some(*v as f64),
            TowerValue::Tower { height: 0, top, .. } => Some(*top),
            TowerValue::Tower { .. } => None,
        }
    }

    /// `log_base` of the value as an `f64`, available up to height 1.
    pub fn log_as_f64(&self, base: u32) -> Option<f64> {
        match (self.as_f64(), self) {
            (Some(x), _) => Some(x.ln() / (base as f64).ln()),
            (None, TowerValue::Tower { height: 1, top, base: b }) if *b == base => Some(*top),
            _ => None,
        }
    }

    fn base_or(&self, base: u32) -> u32 {
        match self {
            TowerValue::Tower { base: b, height, .. } if *height > 0 => {
                assert_eq!(*b, base, "mixing towers of different bases");
                *b
            }
            _ => base,
        }
    }

    /// `base^self`.
    pub fn exp_base(self, base: u32) -> Self {
        let base = self.base_or(base);
        match self.as_f64() {
            Some(x) => Self::tower(base, 1, x),
            None => Self::tower(base, self.height() + 1, self.top()),
        }
    }

    /// `log_base(self)`; the value must be positive.
    pub fn log_base(self, base: u32) -> Self {
        let base = self.base_or(base);
        match self.as_f64() {
            Some(x) => Self::real(base, x.ln() / (base as f64).ln()),
            None => Self::tower(base, self.height() - 1, self.top()),
        }
    }

    /// `self · k` for `k > 0`.
    pub fn mul_f64(self, base: u32, k: f64) -> Self {
        let base = self.base_or(base);
        match self.as_f64() {
            Some(x) if (x * k).is_finite() => Self::real(base, x * k),
            Some(x) => Self::tower(base, 1, (x.ln() + k.ln()) / (base as f64).ln()),
            None if self.height() == 1 => Self::tower(base, 1, self.top() + k.ln() / (base as f64).ln()),
            None => self,
        }
    }

    /// `self + c` for a real `c` (negative allowed when the result stays
    /// nonnegative).
    pub fn add_f64(self, base: u32, c: f64) -> Self {
        self.add(base, Self::real(base, c.max(0.0))).sub_small(base, (-c).max(0.0))
    }

    fn sub_small(self, base: u32, c: f64) -> Self {
        if c == 0.0 {
            return self;
        }
        match self.as_f64() {
            Some(x) => Self::real(base, x - c),
            // c is below 1e304 while the tower exceeds e^700
            None => self,
        }
    }

    /// `self + other`.
    pub fn add(self, base: u32, other: Self) -> Self {
        let base = other.base_or(self.base_or(base));
        if let (Some(a), Some(b)) = (self.as_f64(), other.as_f64()) {
            if (a + b).is_finite() {
                return match (self, other) {
                    (TowerValue::Exact(x), TowerValue::Exact(y)) if x.checked_add(y).is_some() => {
                        TowerValue::Exact(x + y)
                    }
                    _ => Self::real(base, a + b),
                };
            }
        }
        let (big, small) = match self.compare(&other) {
            Some(Ordering::Less) => (other, self),
            _ => (self, other),
        };
        match (big.log_as_f64(base), small.log_as_f64(base)) {
            (Some(lb), Some(ls)) => {
                let ln_base = (base as f64).ln();
                let top = lb + ((ls - lb) * ln_base).exp().ln_1p() / ln_base;
                Self::tower(base, 1, top)
            }
            _ => big,
        }
    }

    /// Total order for values sharing a base; `None` only for NaN tops or
    /// towers of different bases.
    pub fn compare(&self, other: &Self) -> Option<Ordering> {
        match (self.as_f64(), other.as_f64()) {
            (Some(a), Some(b)) => a.partial_cmp(&b),
            _ => {
                let base = match (self, other) {
                    (TowerValue::Tower { base: a, height: ha, .. }, TowerValue::Tower { base: b, height: hb, .. })
                        if *ha > 0 && *hb > 0 =>
                    {
                        if a != b {
                            return None;
                        }
                        *a
                    }
                    (TowerValue::Tower { base, height, .. }, _) if *height > 0 => *base,
                    (_, TowerValue::Tower { base, .. }) => *base,
                    _ => unreachable!("one side is a tower of positive height"),
                };
                // both sides exceed 1 unless a real side is small
                if let Some(a) = self.as_f64() {
                    if a <= 1.0 {
                        return Some(Ordering::Less);
                    }
                }
                if let Some(b) = other.as_f64() {
                    if b <= 1.0 {
                        return Some(Ordering::Greater);
                    }
                }
                self.log_base(base).compare(&other.log_base(base))
            }
        }
    }
}

impl PartialOrd for TowerValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.compare(other)
    }
}

impl fmt::Display for TowerValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TowerValue::Exact(v) => write!(f, "{v}"),
            TowerValue::Tower { height: 0, top, .. } => write!(f, "{top}"),
            TowerValue::Tower { base, height, top } => write!(f, "tower({base}, {height}, {top})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_towers_collapse_to_integers() {
        assert_eq!(TowerValue::tower(3, 2, 2.0), TowerValue::Exact(19683));
        assert_eq!(TowerValue::tower(2, 0, 5.0), TowerValue::Exact(5));
        assert_eq!(TowerValue::tower(3, 3, 2.0).height(), 1);
    }

    #[test]
    fn ordering_across_heights() {
        let a = TowerValue::tower(3, 4, 10.0);
        let b = TowerValue::tower(3, 3, 10.0);
        let c = TowerValue::tower(3, 1, 1e6);
        assert!(a > b && b > c);
        assert!(c > TowerValue::Exact(u64::MAX));
        assert!(TowerValue::real(3, 1e300) < c);
        assert!(TowerValue::tower(3, 2, 700.0) > TowerValue::tower(3, 2, 699.0));
        assert_eq!(a.compare(&TowerValue::tower(5, 4, 10.0)), None);
    }

    #[test]
    fn log_and_exp_invert() {
        let t = TowerValue::tower(3, 3, 12.5);
        assert_eq!(t.log_base(3).exp_base(3), t);
        assert!((TowerValue::Exact(81).log_base(3).top() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn arithmetic_in_log_space() {
        let big = TowerValue::tower(3, 1, 1000.0);
        let doubled = big.mul_f64(3, 3.0);
        assert!((doubled.top() - 1001.0).abs() < 1e-12);
        let sum = big.add(3, big);
        assert!((sum.top() - (1000.0 + 2f64.ln() / 3f64.ln())).abs() < 1e-12);
        assert_eq!(big.add_f64(3, 1e10), big);
        assert_eq!(TowerValue::Exact(2).add(3, TowerValue::Exact(3)), TowerValue::Exact(5));
        assert_eq!(TowerValue::Exact(5).add_f64(3, -2.0), TowerValue::Exact(3));
    }

    #[test]
    fn display() {
        assert_eq!(TowerValue::Exact(7).to_string(), "7");
        assert_eq!(TowerValue::tower(3, 5, 10.0).to_string(), "tower(3, 4, 59049)");
    }
}
