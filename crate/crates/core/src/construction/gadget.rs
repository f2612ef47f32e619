//! A large interval of `F_p` with few 3-APs.

use crate::space::is_odd_prime;
use crate::{Error, Result};

/// `I = {0, …, ⌈2p/3⌉ − 1}` with its per-difference progression counts.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalGadget {
    p: u32,
    len: u32,
    /// `counts[b] = #{x : x, x+b, x+2b ∈ I}`.
    counts: Vec<u64>,
    h: Vec<f64>,
}

impl IntervalGadget {
    pub fn new(p: u32) -> Result<Self> {
        if !is_odd_prime(p) {
            return Err(Error::InvalidParameter(format!("{p} is not an odd prime")));
        }
        let len = (2 * p).div_ceil(3);
        let counts: Vec<u64> = (0..p as u64)
            .map(|b| {
                (0..p as u64)
                    .filter(|&x| (0..3).all(|k| (x + k * b) % (p as u64) < (len as u64)))
                    .count() as u64
            })
            .collect();
        let h = counts.iter().map(|&c| c as f64 / p as f64).collect();
        Ok(IntervalGadget { p, len, counts, h })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    /// `|I| = ⌈2p/3⌉`.
    pub fn len(&self) -> u32 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// `|J| = p − |I|`, the complement's size.
    pub fn complement_len(&self) -> u32 {
        self.p - self.len
    }

    #[inline]
    pub fn contains(&self, m: u32) -> bool {
        m < self.len
    }

    /// `ζ = |I|/p`.
    pub fn zeta(&self) -> f64 {
        self.len as f64 / self.p as f64
    }

    /// `φ = 1 − ζ`.
    pub fn phi(&self) -> f64 {
        self.complement_len() as f64 / self.p as f64
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// `h[b]`: density of progressions with difference `b` inside `I`.
    pub fn h(&self) -> &[f64] {
        &self.h
    }

    /// Number of 3-APs (trivial ones included) inside `I`.
    pub fn total_count(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// `p² − 3|J|p + 3|J|² − ⌈|J|²/2⌉` by inclusion–exclusion over the complement.
    pub fn inclusion_exclusion_count(&self) -> i64 {
        let (p, j) = (self.p as i64, self.complement_len() as i64);
        p * p - 3 * j * p + 3 * j * j - (j * j + 1) / 2
    }

    /// Checks every identity the gadget is meant to satisfy, in exact
    /// integer arithmetic.
    pub fn check(&self) -> Result<()> {
        let (p, j) = (self.p as i64, self.complement_len() as i64);
        let count = self.total_count() as i64;
        let fail = |what: &str| Err(Error::InvariantViolated(format!("interval gadget at p = {p}: {what}")));
        if count != self.inclusion_exclusion_count() {
            return fail("count differs from inclusion-exclusion");
        }
        // count/p² ≤ (1−φ)³ − (φ²/2 − φ³), times 2p³
        if 2 * count * p > 2 * (p - j).pow(3) - j * j * p + 2 * j.pow(3) {
            return fail("density above the interval bound");
        }
        if 5 * j < p || 3 * j > p {
            return fail("phi outside [1/5, 1/3]");
        }
        if self.counts[0] != self.len as u64 {
            return fail("h(0) differs from zeta");
        }
        Ok(())
    }

    /// `E_b h(b)`.
    pub fn mean_h(&self) -> f64 {
        self.total_count() as f64 / (self.p as f64 * self.p as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn p3() {
        let g = IntervalGadget::new(3).unwrap();
        assert_eq!(g.len(), 2);
        assert_eq!(g.h(), &[2.0 / 3.0, 0.0, 0.0]);
        assert_eq!(g.total_count(), 2);
        assert!(g.mean_h() <= 8.0 / 27.0 - 1.0 / 54.0);
        g.check().unwrap();
    }

    #[test]
    fn p5() {
        let g = IntervalGadget::new(5).unwrap();
        assert_eq!(g.len(), 4);
        assert_eq!(g.counts(), &[4, 2, 2, 2, 2]);
        assert_eq!(g.total_count(), 12);
        assert_eq!(g.inclusion_exclusion_count(), 12);
        assert_eq!(g.h()[0], g.zeta());
    }

    #[test]
    fn all_small_primes() {
        for p in (3..=31).filter(|&p| is_odd_prime(p)) {
            let g = IntervalGadget::new(p).unwrap();
            g.check().unwrap();
            assert_eq!(g.h()[0], g.zeta());
            assert!(g.h()[0] <= 0.8);
        }
        assert!(IntervalGadget::new(9).is_err());
    }
}
