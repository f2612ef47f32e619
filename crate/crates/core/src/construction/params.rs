//! Parameters of the multi-level construction and the closed forms they
//! predict.

use super::directions::SamplingOptions;
use super::gadget::IntervalGadget;
use crate::fourier::GFunction;
use crate::space::{is_odd_prime, Space};
use crate::{Error, Result};

/// Values closer than this are treated as equal when classifying a function.
pub const VALUE_TOLERANCE: f64 = 1e-12;

/// How `H_i` is chosen among the points carrying the base value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HSelection {
    #[default]
    Lowest,
    Random,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LevelOptions {
    pub sampling: SamplingOptions,
    pub selection: HSelection,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstructionParams {
    pub p: u32,
    pub alpha: f64,
    /// Level-1 perturbation.
    pub eta: f64,
    /// `m_1, …, m_s`.
    pub dims: Vec<u32>,
    /// `μ_2, …, μ_s`.
    pub mus: Vec<f64>,
    pub seed: u64,
    pub options: LevelOptions,
}

/// Predicted worst nonzero-difference density after one level.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelRegime {
    pub level: usize,
    /// Upper bound on `max_{d≠0} ρ_i(d)` implied by the closed forms and the
    /// direction threshold.
    pub worst_rho: f64,
    /// `z_i` from the closed forms.
    pub z: f64,
    /// `worst_rho < α³`.
    pub within: bool,
}

/// `k = μ·P` as an integer, or an error when it is not (close to) one.
pub fn h_size(mu: f64, prev_points: usize) -> Result<usize> {
    if !(mu.is_finite() && mu >= 0.0) {
        return Err(Error::InvalidParameter(format!("mu must be a nonnegative real, got {mu}")));
    }
    let k = mu * prev_points as f64;
    let rounded = k.round();
    if (k - rounded).abs() > 1e-9 * rounded.max(1.0) {
        return Err(Error::InvalidParameter(format!(
            "mu * p^n = {k} is not an integer (mu = {mu}, p^n = {prev_points})"
        )));
    }
    Ok(rounded as usize)
}

impl ConstructionParams {
    pub fn new(p: u32, alpha: f64, eta: f64, dims: Vec<u32>, mus: Vec<f64>, seed: u64) -> Self {
        ConstructionParams {
            p,
            alpha,
            eta,
            dims,
            mus,
            seed,
            options: LevelOptions::default(),
        }
    }

    /// `N_1 = p^{m_1}`.
    pub fn n1(&self) -> usize {
        (self.p as usize).pow(self.dims.first().copied().unwrap_or(0))
    }

    pub fn total_dim(&self) -> u32 {
        self.dims.iter().sum()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !is_odd_prime(self.p) {
            return bad(format!("{} is not an odd prime", self.p));
        }
        if !(self.alpha > 0.0 && self.alpha <= 0.5) {
            return bad(format!("alpha must lie in (0, 1/2], got {}", self.alpha));
        }
        if !(self.eta.is_finite() && self.eta >= 0.0) {
            return bad(format!("eta must be a nonnegative real, got {}", self.eta));
        }
        if self.dims.is_empty() || self.dims.contains(&0) {
            return bad("dims must be a nonempty list of positive dimensions".into());
        }
        if self.mus.len() + 1 != self.dims.len() {
            return bad(format!(
                "{} dims need {} mus, got {}",
                self.dims.len(),
                self.dims.len() - 1,
                self.mus.len()
            ));
        }
        Space::new(self.p, self.total_dim())?;
        if self.eta * (self.n1() as f64 - 1.0) > 1.0 + VALUE_TOLERANCE {
            return bad(format!(
                "eta * (N_1 - 1) = {} exceeds 1",
                self.eta * (self.n1() as f64 - 1.0)
            ));
        }
        let descriptor = self.descriptor(0);
        if descriptor.high() > 1.0 + VALUE_TOLERANCE {
            return bad(format!("top value (1 + eta) alpha / zeta = {} exceeds 1", descriptor.high()));
        }
        let mut prev_dim = self.dims[0];
        for (&m, &mu) in self.dims[1..].iter().zip(&self.mus) {
            h_size(mu, (self.p as usize).pow(prev_dim))?;
            prev_dim += m;
        }
        let slack = self.options.sampling.slack;
        if !(slack.is_finite() && slack >= 0.0) {
            return bad(format!("slack must be a nonnegative real, got {slack}"));
        }
        if self.options.sampling.max_attempts == 0 {
            return bad("max_attempts must be positive".into());
        }
        Ok(())
    }

    /// The descriptor of level `1 + levels_done`.
    pub fn descriptor(&self, levels_done: usize) -> LevelDescriptor {
        LevelDescriptor {
            p: self.p,
            alpha: self.alpha,
            eta: self.eta,
            n1: self.n1(),
            mus: self.mus[..levels_done.min(self.mus.len())].to_vec(),
        }
    }

    /// What the closed forms predict for every level, assuming each accepted
    /// direction map only just meets its threshold.
    pub fn regime(&self) -> Vec<LevelRegime> {
        let first = self.descriptor(0);
        let alpha3 = self.alpha.powi(3);
        let mut worst = (1.0 - 2.0 * self.eta) * (1.0 + self.eta).powi(2) * alpha3;
        let mut out = vec![LevelRegime {
            level: 1,
            worst_rho: worst,
            z: first.z_predicted(),
            within: worst < alpha3,
        }];
        let zeta = first.zeta();
        let base3 = first.base().powi(3);
        let slack = self.options.sampling.slack;
        for (k, &mu) in self.mus.iter().enumerate() {
            let prev = self.descriptor(k);
            let fiber = prev.z_predicted() - mu * base3 / zeta.powi(3) * (1.0 / 125.0 - slack);
            worst = worst.max(fiber);
            out.push(LevelRegime {
                level: k + 2,
                worst_rho: worst,
                z: self.descriptor(k + 1).z_predicted(),
                within: worst < alpha3,
            });
        }
        out
    }

    /// Every level is predicted to keep all nonzero differences below `α³`.
    pub fn in_regime(&self) -> bool {
        self.regime().iter().all(|r| r.within)
    }
}

/// The value pattern a level-`i` function is supposed to have, and the
/// quantities the closed forms attach to it.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelDescriptor {
    pub p: u32,
    pub alpha: f64,
    pub eta: f64,
    /// `N_1`, the size of the level-1 space.
    pub n1: usize,
    /// `μ_2, …, μ_i`.
    pub mus: Vec<f64>,
}

impl LevelDescriptor {
    pub fn zeta(&self) -> f64 {
        (2 * self.p).div_ceil(3) as f64 / self.p as f64
    }

    /// `(1 − η(N_1 − 1))α`, the level-1 value at 0.
    pub fn low(&self) -> f64 {
        (1.0 - self.eta * (self.n1 as f64 - 1.0)) * self.alpha
    }

    /// `(1 + η)α`.
    pub fn base(&self) -> f64 {
        (1.0 + self.eta) * self.alpha
    }

    /// `(1 + η)α/ζ`.
    pub fn high(&self) -> f64 {
        self.base() / self.zeta()
    }

    pub fn level(&self) -> usize {
        self.mus.len() + 1
    }

    pub fn mu_sum(&self) -> f64 {
        self.mus.iter().sum()
    }

    /// `z_1 = (1 + 3η²(N_1−1) − η³(N_1−1)(N_1−2))α³`.
    pub fn z1(&self) -> f64 {
        let (eta, n) = (self.eta, self.n1 as f64);
        (1.0 + 3.0 * eta * eta * (n - 1.0) - eta.powi(3) * (n - 1.0) * (n - 2.0)) * self.alpha.powi(3)
    }

    /// `z_i = z_1 + (1/ζ² − 1)·(Σμ)·(1+η)³α³`.
    pub fn z_predicted(&self) -> f64 {
        self.z1() + (self.zeta().powi(-2) - 1.0) * self.mu_sum() * self.base().powi(3)
    }

    /// `(1 + 4μ_i/3)α³` with the last level's `μ_i` (0 at level 1); only
    /// meaningful at very small `η`.
    pub fn z_asymptotic_bound(&self) -> f64 {
        (1.0 + 4.0 / 3.0 * self.mus.last().copied().unwrap_or(0.0)) * self.alpha.powi(3)
    }

    /// Largest admissible fraction of points off the base value: the level-1
    /// point at 0 (carried through every cylinder) plus every perturbed fiber.
    pub fn nonbase_bound(&self) -> f64 {
        let low = if self.eta > 0.0 { 1.0 / self.n1 as f64 } else { 0.0 };
        low + self.mu_sum()
    }

    /// The four admissible values `{0, low, base, high}`.
    pub fn admissible_values(&self) -> [f64; 4] {
        [0.0, self.low(), self.base(), self.high()]
    }

    /// Reconstructs a descriptor from a bare function: `α` is its density,
    /// the base value is its most frequent value, and `N_1`, `Σμ` are read off
    /// the value counts. All of `Σμ` is attributed to a single level.
    pub fn infer(f: &GFunction) -> Result<Self> {
        let space = f.space();
        let p = space.p();
        IntervalGadget::new(p)?;
        let alpha = f.density();
        if !(alpha > 0.0) {
            return Err(Error::InvalidParameter("cannot infer a level pattern for a zero function".into()));
        }
        let mut counts = std::collections::HashMap::<u64, usize>::new();
        for &v in f.values() {
            *counts.entry(v.to_bits()).or_default() += 1;
        }
        let base_bits = counts
            .iter()
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
            .map(|(&bits, _)| bits)
            .expect("spaces are nonempty");
        let base = f64::from_bits(base_bits);
        let mut eta = base / alpha - 1.0;
        if eta.abs() < VALUE_TOLERANCE {
            eta = 0.0;
        }
        let zeta = (2 * p).div_ceil(3) as f64 / p as f64;
        let high = base / zeta;
        let near = |a: f64, b: f64| (a - b).abs() <= VALUE_TOLERANCE;
        let (mut zeros, mut highs, mut lows) = (0usize, 0usize, 0usize);
        for &v in f.values() {
            if near(v, 0.0) {
                zeros += 1;
            } else if near(v, base) {
            } else if near(v, high) {
                highs += 1;
            } else {
                lows += 1;
            }
        }
        let size = space.size();
        let n1 = if eta <= 0.0 {
            1
        } else if lows > 0 {
            ((size as f64 / lows as f64).round() as usize).max(1)
        } else {
            // the level-1 value at 0 is itself 0
            let n1 = (1.0 + 1.0 / eta).round().max(1.0) as usize;
            zeros = zeros.saturating_sub(size / n1);
            n1
        };
        let mu = (zeros + highs) as f64 / size as f64;
        Ok(LevelDescriptor {
            p,
            alpha,
            eta,
            n1,
            mus: if mu > 0.0 { vec![mu] } else { Vec::new() },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture() -> ConstructionParams {
        ConstructionParams::new(3, 0.5, 0.02, vec![2, 2], vec![4.0 / 9.0], 1)
    }

    #[test]
    fn level1_closed_forms() {
        let d = ConstructionParams::new(3, 0.5, 0.1, vec![2], vec![], 0).descriptor(0);
        assert!((d.low() - 0.1).abs() < 1e-15);
        assert!((d.base() - 0.55).abs() < 1e-15);
        assert!((d.z1() - 0.148).abs() < 1e-15);
        assert_eq!(d.nonbase_bound(), 1.0 / 9.0);
    }

    #[test]
    fn validation() {
        fixture().validate().unwrap();
        let mut p = fixture();
        p.eta = 0.2;
        assert!(p.validate().is_err());
        let mut p = fixture();
        p.mus = vec![0.1];
        assert!(p.validate().is_err());
        let mut p = fixture();
        p.mus.clear();
        assert!(p.validate().is_err());
        let mut p = fixture();
        p.alpha = 0.6;
        assert!(p.validate().is_err());
        let mut p = fixture();
        p.alpha = 0.5;
        p.p = 9;
        assert!(p.validate().is_err());
        // boundary eta = 1/(N_1 - 1)
        let p = ConstructionParams::new(3, 0.5, 0.125, vec![2], vec![], 0);
        p.validate().unwrap();
        assert_eq!(p.descriptor(0).low(), 0.0);
    }

    #[test]
    fn regime_prediction() {
        let r = fixture().regime();
        assert_eq!(r.len(), 2);
        assert!(r.iter().all(|l| l.within));
        assert!((r[0].z - 0.126144).abs() < 1e-12);
        // the cylinder extension keeps z_1 > α³ on its fibers
        let flat = ConstructionParams::new(3, 0.5, 0.02, vec![2, 2], vec![0.0], 1);
        assert!(!flat.in_regime());
        assert!(!ConstructionParams::new(3, 0.5, 0.0, vec![2], vec![], 1).in_regime());
    }

    #[test]
    fn h_sizes() {
        assert_eq!(h_size(2.0 / 9.0, 9).unwrap(), 2);
        assert_eq!(h_size(0.0, 9).unwrap(), 0);
        assert!(h_size(0.1, 9).is_err());
        assert!(h_size(-1.0, 9).is_err());
    }
}
