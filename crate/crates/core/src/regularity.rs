//! Weakly regular subspaces and the counting bound.
//!
//! `H` is δ-weakly-regular for `f` when `f` and its coset average `f_H` are
//! δ-close, i.e. every Fourier coefficient of `f − f_H` is at most δ in
//! modulus. Taking `H` inside the annihilator of the large spectrum
//! `S = {t ≠ 0 : |f̂(χ_t)| ≥ δ}` achieves this, and `|S| ≤ ⌊δ⁻²⌋` by Parseval.

use crate::apstats::lambda3;
use crate::fourier::{average_over, dft, sup_fourier_gap, GFunction};
use crate::space::{Point, Subspace};
use crate::{Error, Result};

/// Slack allowed when re-checking a certificate.
pub const CERTIFICATE_TOLERANCE: f64 = 1e-9;
/// Coefficients this close below δ still count as large.
const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct RegularityCertificate {
    pub delta: f64,
    pub subspace: Subspace,
    /// Nonzero `t` with `|f̂(χ_t)| ≥ δ`, in increasing index order.
    pub large_spectrum: Vec<Point>,
    /// `max_t |(f − f_H)^(χ_t)|`, recomputed after construction.
    pub achieved_gap: f64,
    pub gap_witness: Point,
    /// `⌊δ⁻²⌋`.
    pub codim_requested: usize,
    pub codim_actual: usize,
}

impl RegularityCertificate {
    /// Re-checks the recorded invariants (not the gap itself, which was
    /// measured when the certificate was issued).
    pub fn is_consistent(&self) -> bool {
        let space = self.subspace.space();
        self.achieved_gap <= self.delta + CERTIFICATE_TOLERANCE
            && self.large_spectrum.len() <= self.codim_requested
            && self.codim_actual == self.subspace.codim()
            && self
                .large_spectrum
                .iter()
                .all(|&t| self.subspace.basis().iter().all(|&b| space.dot(t, b) == 0))
    }
}

/// `⌊δ⁻²⌋`, robust to `1/δ²` landing a hair below an integer (e.g. δ = 0.1).
pub fn floor_inv_square(delta: f64) -> usize {
    let q = 1.0 / (delta * delta);
    let r = q.round();
    if (q - r).abs() <= 1e-9 * q.max(1.0) {
        r as usize
    } else {
        q.floor() as usize
    }
}

/// Builds a δ-weakly-regular subspace for `f` and certifies it.
///
/// Without `pad` the returned `H` is the full annihilator of the large
/// spectrum (the largest valid choice). With `pad` it is shrunk to codimension
/// `min(⌊δ⁻²⌋, n)`.
pub fn weak_regular_subspace(f: &GFunction, delta: f64, pad: bool) -> Result<RegularityCertificate> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::InvalidParameter(format!("delta must lie in (0, 1], got {delta}")));
    }
    let space = f.space();
    let spectrum = dft(f);
    let large_spectrum: Vec<Point> = space
        .points()
        .skip(1)
        .filter(|&t| spectrum.coeff(t).norm() >= delta - TIE_TOLERANCE)
        .collect();
    let codim_requested = floor_inv_square(delta);
    let mut subspace = Subspace::from_constraints(space, &large_spectrum);
    if pad {
        let target = codim_requested.min(space.n() as usize).max(subspace.codim());
        subspace = subspace.pad(target)?;
    }
    let averaged = average_over(f, &subspace)?;
    let (achieved_gap, gap_witness) = sup_fourier_gap(f, &averaged)?;
    if achieved_gap > delta + CERTIFICATE_TOLERANCE {
        return Err(Error::CertificationFailed {
            gap: achieved_gap,
            delta,
        });
    }
    Ok(RegularityCertificate {
        delta,
        codim_actual: subspace.codim(),
        subspace,
        large_spectrum,
        achieved_gap,
        gap_witness,
        codim_requested,
    })
}

/// Outcome of comparing `Λ(f)` with `Λ(g)` against `3·δ·α`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CountingCheck {
    /// `|Λ(f) − Λ(g)|`.
    pub gap: f64,
    /// `sup_t |(f − g)^(χ_t)|`.
    pub delta: f64,
    /// Density of the first argument.
    pub alpha: f64,
    /// `3·δ·α`.
    pub bound: f64,
}

impl CountingCheck {
    pub fn holds(&self) -> bool {
        self.gap <= self.bound + CERTIFICATE_TOLERANCE
    }
}

/// Measures both sides of the counting bound. The bound is guaranteed when
/// `E[g²] ≤ α` (for instance when `g` is a coset average of `f`) but can fail
/// when `g` is much denser than `f`; the caller inspects
/// [`CountingCheck::holds`].
pub fn verify_counting(f: &GFunction, g: &GFunction) -> Result<CountingCheck> {
    let (delta, _) = sup_fourier_gap(f, g)?;
    let gap = (lambda3(f)? - lambda3(g)?).abs();
    let alpha = f.density();
    Ok(CountingCheck {
        gap,
        delta,
        alpha,
        bound: 3.0 * delta * alpha,
    })
}
