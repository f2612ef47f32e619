//! Random rounding of a weighted set to an actual set.

use std::fmt;

use rand::Rng;

use crate::apstats::rho_scan;
use crate::fourier::GFunction;
use crate::rng::stream_rng;
use crate::space::Point;
use crate::{Error, Result};

/// `2·√(ln(12N)/N)`: below this the deviation guarantee is not available.
pub fn hoeffding_threshold(size: usize) -> f64 {
    let n = size as f64;
    2.0 * ((12.0 * n).ln() / n).sqrt()
}

/// The statistics of `f` that a rounding must reproduce.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundingReference {
    pub density: f64,
    pub rho: Vec<f64>,
}

impl RoundingReference {
    pub fn new(f: &GFunction) -> Result<Self> {
        Ok(RoundingReference {
            density: f.density(),
            rho: rho_scan(f)?.rho,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundingOutcome {
    /// The sampled set, increasing.
    pub set: Vec<Point>,
    /// Attempts used (the accepted one included).
    pub attempts: u32,
    pub accepted: bool,
    pub density_deviation: f64,
    /// `max_{d≠0} |ρ_A(d) − ρ_f(d)|`.
    pub max_rho_deviation: f64,
    pub worst_d: Option<Point>,
    pub eps_star: f64,
    /// `eps_star` is below [`hoeffding_threshold`]: the run is best effort.
    pub below_hypothesis: bool,
}

impl RoundingOutcome {
    fn score(&self) -> f64 {
        self.density_deviation.max(self.max_rho_deviation)
    }
}

impl fmt::Display for RoundingOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} after {} attempts: |A| = {}, density deviation {:.3e}, max 3-AP deviation {:.3e} (eps* = {:.4})",
            if self.accepted { "accepted" } else { "rejected" },
            self.attempts,
            self.set.len(),
            self.density_deviation,
            self.max_rho_deviation,
            self.eps_star
        )?;
        if self.below_hypothesis {
            write!(f, " [eps* below the guaranteed regime]")?;
        }
        Ok(())
    }
}

/// One rounding draw: `x ∈ A` independently with probability `f(x)`, using
/// stream `attempt` of `seed`. Returns the set with its measured deviations.
pub fn round_once(
    f: &GFunction,
    reference: &RoundingReference,
    eps_star: f64,
    seed: u64,
    attempt: u32,
) -> Result<RoundingOutcome> {
    if f.is_signed() {
        return Err(Error::InvalidParameter("cannot round a signed function".into()));
    }
    let space = f.space();
    if reference.rho.len() != space.size() {
        return Err(Error::SpaceMismatch);
    }
    let mut rng = stream_rng(seed, attempt as u64);
    let set: Vec<Point> = space
        .points()
        .filter(|&x| rng.gen::<f64>() < f.value(x))
        .collect();
    let indicator = GFunction::indicator(space, set.iter().copied())?;
    let density_deviation = (indicator.density() - reference.density).abs();
    let scan = rho_scan(&indicator)?;
    let mut worst: Option<(Point, f64)> = None;
    for (d, (&a, &b)) in scan.rho.iter().zip(&reference.rho).enumerate().skip(1) {
        let dev = (a - b).abs();
        if worst.map_or(true, |(_, w)| dev > w) {
            worst = Some((Point(d), dev));
        }
    }
    let max_rho_deviation = worst.map_or(0.0, |w| w.1);
    Ok(RoundingOutcome {
        set,
        attempts: attempt + 1,
        accepted: density_deviation <= eps_star && max_rho_deviation <= eps_star,
        density_deviation,
        max_rho_deviation,
        worst_d: worst.map(|w| w.0),
        eps_star,
        below_hypothesis: eps_star < hoeffding_threshold(space.size()),
    })
}

/// Rounds `f`, retrying until both the density and every nonzero-difference
/// density are within `eps_star` of `f`'s. Fails with the best attempt once
/// `retries` attempts are spent.
pub fn round_to_set(f: &GFunction, eps_star: f64, seed: u64, retries: u32) -> Result<RoundingOutcome> {
    let reference = RoundingReference::new(f)?;
    round_with_reference(f, &reference, eps_star, seed, retries)
}

pub fn round_with_reference(
    f: &GFunction,
    reference: &RoundingReference,
    eps_star: f64,
    seed: u64,
    retries: u32,
) -> Result<RoundingOutcome> {
    if !(eps_star.is_finite() && eps_star >= 0.0) {
        return Err(Error::InvalidParameter(format!("eps* must be a nonnegative real, got {eps_star}")));
    }
    if retries == 0 {
        return Err(Error::InvalidParameter("at least one attempt is needed".into()));
    }
    let mut best: Option<RoundingOutcome> = None;
    for attempt in 0..retries {
        let outcome = round_once(f, reference, eps_star, seed, attempt)?;
        if outcome.accepted {
            return Ok(outcome);
        }
        if best.as_ref().map_or(true, |b| outcome.score() < b.score()) {
            best = Some(outcome);
        }
    }
    let mut best = best.expect("at least one attempt ran");
    best.attempts = retries;
    Err(Error::RetriesExhausted(Box::new(best)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::Space;

    #[test]
    fn threshold_value() {
        let t = hoeffding_threshold(19683);
        assert!((t - 0.05011).abs() < 1e-4, "{t}");
    }

    #[test]
    fn constant_functions_round_exactly() {
        let s = Space::new(3, 3).unwrap();
        let one = round_to_set(&GFunction::constant(s, 1.0).unwrap(), 0.0, 1, 1).unwrap();
        assert_eq!(one.set.len(), 27);
        assert_eq!((one.density_deviation, one.max_rho_deviation), (0.0, 0.0));
        let zero = round_to_set(&GFunction::constant(s, 0.0).unwrap(), 0.0, 1, 1).unwrap();
        assert!(zero.set.is_empty());
        assert!(zero.accepted);
    }

    #[test]
    fn impossible_tolerance_reports_best() {
        let s = Space::new(3, 3).unwrap();
        let f = GFunction::constant(s, 0.5).unwrap();
        match round_to_set(&f, 1e-6, 4, 5).unwrap_err() {
            Error::RetriesExhausted(best) => {
                assert_eq!(best.attempts, 5);
                assert!(!best.accepted);
                assert!(best.below_hypothesis);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn reproducible() {
        let s = Space::new(3, 4).unwrap();
        let f = GFunction::constant(s, 0.5).unwrap();
        let r = RoundingReference::new(&f).unwrap();
        assert_eq!(round_once(&f, &r, 1.0, 9, 2).unwrap(), round_once(&f, &r, 1.0, 9, 2).unwrap());
    }
}
