//! The density-increment engine behind the upper bound.
//!
//! The potential is the mean cube density `b(H) = E_g α(H+g)³`. A step takes
//! a subspace `H` whose cosets carry few nontrivial 3-APs on average, makes
//! `f` weakly regular on every coset, and intersects the resulting subspaces;
//! the mean cube density then roughly doubles its excess over `α³`.

mod plan;
mod tower;

pub use plan::{plan_upper_bound, upper_height, CodimStep, UpperBoundPlan};
pub use tower::TowerValue;

use rayon::prelude::*;

use crate::apstats::coset_lambdas;
use crate::fourier::GFunction;
use crate::regularity::{floor_inv_square, weak_regular_subspace};
use crate::space::{Space, Subspace, DEFAULT_COSET_BUDGET};
use crate::{Error, Result};

/// Slack on the asserted step inequality; the certificates themselves allow
/// `1e-9` per coset.
const STEP_TOLERANCE: f64 = 1e-8;

/// `b(H) = E_g α(H+g)³`.
pub fn mean_cube_density(f: &GFunction, h: &Subspace) -> Result<f64> {
    if h.space() != f.space() {
        return Err(Error::SpaceMismatch);
    }
    if h.codim() == 0 {
        return Ok(f.density().powi(3));
    }
    let cosets = h.cosets()?;
    let total: f64 = cosets
        .iter()
        .map(|coset| {
            let a = coset.iter().map(|&x| f.value(x)).sum::<f64>() / coset.len() as f64;
            a * a * a
        })
        .sum();
    Ok(total / cosets.len() as f64)
}

/// What one successful increment step measured.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub codim_before: usize,
    pub codim_after: usize,
    pub size_before: usize,
    pub b_before: f64,
    pub b_after: f64,
    /// `E_j λ(H_j)` over the cosets of the incoming subspace.
    pub mean_lambda: f64,
    pub eta: f64,
    pub epsilon: f64,
    /// `2·b(H) − E_j λ(H_j) − 6η`, the guaranteed floor for `b(H')`.
    pub guaranteed: f64,
    /// `codim(H) + ⌊η⁻²⌋·p^{codim(H)}`.
    pub codim_bound: u128,
}

impl StepRecord {
    pub fn inequality_holds(&self) -> bool {
        self.b_after >= self.guaranteed - STEP_TOLERANCE
    }

    pub fn codim_bound_holds(&self) -> bool {
        self.codim_after as u128 <= self.codim_bound
    }

    /// `b(H') − α³ ≥ 2(b(H) − α³) + ε/2`, the conclusion available when
    /// `η = ε/12` and `E_j λ < α³ − ε`.
    pub fn doubling_holds(&self, alpha: f64) -> bool {
        let a3 = alpha.powi(3);
        self.b_after - a3 >= 2.0 * (self.b_before - a3) + self.epsilon / 2.0 - STEP_TOLERANCE
    }
}

/// One increment step from `H` with regularity parameter `eta`.
///
/// Requires `|H| ≥ 2`, `|H| > α/(3η)` and `E_j λ(H_j) < α³ − ε`. Each coset
/// `H_j = H + g_j` is read through its local coordinates, a
/// `min(⌊η⁻²⌋, dim H)`-codimensional η-weakly-regular subspace `T_j` is
/// certified there, and `H' = H ∩ ⋂_j T_j`. Both the codimension bound and
/// `b(H') ≥ 2b(H) − E_j λ(H_j) − 6η` are checked before returning.
pub fn increment_step(f: &GFunction, h: &Subspace, epsilon: f64, eta: f64) -> Result<(Subspace, StepRecord)> {
    increment_step_with_budget(f, h, epsilon, eta, DEFAULT_COSET_BUDGET)
}

pub fn increment_step_with_budget(
    f: &GFunction,
    h: &Subspace,
    epsilon: f64,
    eta: f64,
    max_cosets: usize,
) -> Result<(Subspace, StepRecord)> {
    if h.space() != f.space() {
        return Err(Error::SpaceMismatch);
    }
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::InvalidParameter(format!("eta must lie in (0, 1], got {eta}")));
    }
    if !(epsilon > 0.0) {
        return Err(Error::InvalidParameter(format!("epsilon must be positive, got {epsilon}")));
    }
    let space = f.space();
    let alpha = f.density();
    let size = h.size();
    if size < 2 || size as f64 <= alpha / (3.0 * eta) {
        return Err(Error::DegenerateSubspace {
            size,
            reason: format!("need |H| >= 2 and |H| > alpha/(3 eta) = {}", alpha / (3.0 * eta)),
        });
    }
    let cosets_needed = (space.p() as u128).pow(h.codim() as u32);
    if cosets_needed > max_cosets as u128 {
        return Err(Error::BudgetExceeded {
            what: "coset",
            needed: cosets_needed,
            budget: max_cosets as u128,
        });
    }

    let per_coset = coset_lambdas(f, h)?;
    let mean_lambda = per_coset.iter().map(|&(_, l)| l).sum::<f64>() / per_coset.len() as f64;
    let threshold = alpha.powi(3) - epsilon;
    if mean_lambda >= threshold {
        return Err(Error::PreconditionFailed { mean_lambda, threshold });
    }

    let cosets = h.cosets_with_budget(max_cosets)?;
    let local = Space::new(space.p(), h.dim() as u32)?;
    let target = floor_inv_square(eta).min(h.dim());
    let local_rows: Vec<Vec<Vec<u32>>> = cosets
        .representatives()
        .par_iter()
        .map(|&g| {
            let restricted = f.pull_back(local, &h.coset_points(g))?;
            let mut cert = weak_regular_subspace(&restricted, eta, false)?;
            if cert.subspace.codim() < target {
                cert.subspace = cert.subspace.pad(target)?;
            }
            Ok(cert.subspace.rows().to_vec())
        })
        .collect::<Result<_>>()?;

    let mut rows: Vec<Vec<u32>> = h.rows().to_vec();
    for coset_rows in &local_rows {
        rows.extend(coset_rows.iter().map(|r| h.lift_local_row(r)));
    }
    let refined = Subspace::from_rows(space, rows);

    let b_before = mean_cube_density(f, h)?;
    let b_after = mean_cube_density(f, &refined)?;
    let record = StepRecord {
        codim_before: h.codim(),
        codim_after: refined.codim(),
        size_before: size,
        b_before,
        b_after,
        mean_lambda,
        eta,
        epsilon,
        guaranteed: 2.0 * b_before - mean_lambda - 6.0 * eta,
        codim_bound: h.codim() as u128 + floor_inv_square(eta) as u128 * cosets_needed,
    };
    if !record.codim_bound_holds() {
        return Err(Error::InvariantViolated(format!(
            "codimension {} exceeds {}",
            record.codim_after, record.codim_bound
        )));
    }
    if !record.inequality_holds() {
        return Err(Error::InvariantViolated(format!(
            "b(H') = {} below 2b(H) - E lambda - 6 eta = {}",
            record.b_after, record.guaranteed
        )));
    }
    Ok((refined, record))
}

/// Regularity parameter per step.
#[derive(Debug, Clone, PartialEq)]
pub enum EtaSchedule {
    Constant(f64),
    /// `η = ε/12`, the value the doubling conclusion needs.
    Doubling,
    /// Explicit values; the last one repeats.
    List(Vec<f64>),
}

impl EtaSchedule {
    pub fn eta(&self, step: usize, epsilon: f64) -> f64 {
        match self {
            EtaSchedule::Constant(eta) => *eta,
            EtaSchedule::Doubling => epsilon / 12.0,
            EtaSchedule::List(values) => values[step.min(values.len() - 1)],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IncrementBudget {
    pub max_steps: usize,
    pub max_cosets: usize,
}

impl Default for IncrementBudget {
    fn default() -> Self {
        IncrementBudget {
            max_steps: 64,
            max_cosets: DEFAULT_COSET_BUDGET,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Termination {
    /// `|H| < 2` or `|H| ≤ α/(3η)`: the step is not applicable.
    SmallSubspace { size: usize, threshold: f64 },
    /// `E_j λ(H_j) ≥ α³ − ε` on the current subspace.
    PreconditionFailed { mean_lambda: f64, threshold: f64 },
    Budget { reason: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct IncrementTrace {
    pub alpha: f64,
    pub epsilon: f64,
    pub steps: Vec<StepRecord>,
    pub termination: Termination,
    pub final_subspace: Subspace,
    pub final_b: f64,
}

impl IncrementTrace {
    /// `(codim, b)` for every subspace visited, starting with the full space.
    pub fn potentials(&self) -> Vec<(usize, f64)> {
        let mut out = vec![(0, self.alpha.powi(3))];
        out.extend(self.steps.iter().map(|s| (s.codim_after, s.b_after)));
        out
    }

    pub fn is_monotone(&self) -> bool {
        self.potentials().windows(2).all(|w| w[1].1 >= w[0].1 - 1e-12)
    }

    pub fn within_ceiling(&self) -> bool {
        self.potentials().iter().all(|&(_, b)| b <= self.alpha + 1e-12)
    }
}

/// Repeats [`increment_step`] from the full space until a step is not
/// applicable or the budget runs out.
pub fn run_increment(
    f: &GFunction,
    epsilon: f64,
    schedule: &EtaSchedule,
    budget: IncrementBudget,
) -> Result<IncrementTrace> {
    let alpha = f.density();
    let mut h = Subspace::full(f.space());
    let mut steps = Vec::new();
    let termination = loop {
        let eta = schedule.eta(steps.len(), epsilon);
        let threshold = alpha / (3.0 * eta);
        if h.size() < 2 || h.size() as f64 <= threshold {
            break Termination::SmallSubspace {
                size: h.size(),
                threshold,
            };
        }
        if steps.len() >= budget.max_steps {
            break Termination::Budget {
                reason: format!("step limit {} reached", budget.max_steps),
            };
        }
        match increment_step_with_budget(f, &h, epsilon, eta, budget.max_cosets) {
            Ok((next, record)) => {
                steps.push(record);
                h = next;
            }
            Err(Error::PreconditionFailed { mean_lambda, threshold }) => {
                break Termination::PreconditionFailed { mean_lambda, threshold };
            }
            Err(e @ Error::BudgetExceeded { .. }) => break Termination::Budget { reason: e.to_string() },
            Err(e) => return Err(e),
        }
    };
    let final_b = steps.last().map_or(alpha.powi(3), |s| s.b_after);
    Ok(IncrementTrace {
        alpha,
        epsilon,
        steps,
        termination,
        final_subspace: h,
        final_b,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::Point;
    use approx::assert_abs_diff_eq;
    use rand::Rng;

    fn sp(p: u32, n: u32) -> Space {
        Space::new(p, n).unwrap()
    }

    fn level1_like(space: Space, alpha: f64, eta: f64) -> GFunction {
        let n1 = space.size() as f64;
        GFunction::from_fn(space, |x| {
            if x == Point::ZERO {
                (1.0 - eta * (n1 - 1.0)) * alpha
            } else {
                (1.0 + eta) * alpha
            }
        })
        .unwrap()
    }

    #[test]
    fn mean_cube_examples() {
        let s = sp(3, 2);
        let c = GFunction::constant(s, 0.3).unwrap();
        let h = Subspace::from_constraints(s, &[Point(1)]);
        assert_abs_diff_eq!(mean_cube_density(&c, &h).unwrap(), 0.027, epsilon = 1e-15);
        let f = GFunction::from_fn(s, |x| if s.coords(x)[0] == 0 { 1.0 } else { 0.0 }).unwrap();
        assert_eq!(mean_cube_density(&f, &Subspace::full(s)).unwrap(), f.density().powi(3));
        assert_abs_diff_eq!(mean_cube_density(&f, &h).unwrap(), 1.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn constant_fails_precondition() {
        let f = GFunction::constant(sp(3, 3), 0.5).unwrap();
        let err = increment_step(&f, &Subspace::full(f.space()), 0.01, 0.5).unwrap_err();
        assert!(matches!(err, Error::PreconditionFailed { .. }));
        let trace = run_increment(&f, 0.01, &EtaSchedule::Constant(0.5), IncrementBudget::default()).unwrap();
        assert!(trace.steps.is_empty());
        assert!(matches!(trace.termination, Termination::PreconditionFailed { .. }));
    }

    #[test]
    fn small_subspace_is_rejected() {
        let f = GFunction::constant(sp(3, 2), 0.5).unwrap();
        let h = Subspace::from_constraints(f.space(), &[Point(1)]);
        // |H| = 3 ≤ 0.5 / (3 · 0.05)
        let err = increment_step(&f, &h, 0.01, 0.05).unwrap_err();
        assert!(matches!(err, Error::DegenerateSubspace { .. }));
    }

    #[test]
    fn level1_step() {
        let f = level1_like(sp(3, 2), 0.5, 0.1);
        let (h, record) = increment_step(&f, &Subspace::full(f.space()), 0.002, 0.5).unwrap();
        assert!(record.inequality_holds() && record.codim_bound_holds());
        assert_abs_diff_eq!(record.mean_lambda, 0.121, epsilon = 1e-12);
        assert_abs_diff_eq!(record.b_before, 0.125, epsilon = 1e-15);
        assert!(record.b_after >= record.b_before);
        assert_eq!(record.codim_after, h.codim());
    }

    #[test]
    fn random_traces_are_monotone() {
        for seed in 0..5 {
            let mut rng = crate::rng::stream_rng(seed, 3);
            let f = GFunction::from_fn(sp(3, 4), |_| rng.gen::<f64>()).unwrap();
            let trace = run_increment(&f, 1e-4, &EtaSchedule::Constant(0.5), IncrementBudget::default()).unwrap();
            assert!(trace.is_monotone() && trace.within_ceiling());
            for s in &trace.steps {
                assert!(s.inequality_holds() && s.codim_bound_holds());
            }
        }
    }

    #[test]
    fn large_epsilon_stops_immediately() {
        let f = level1_like(sp(3, 3), 0.5, 0.02);
        let trace = run_increment(&f, 0.4, &EtaSchedule::Constant(0.5), IncrementBudget::default()).unwrap();
        assert!(trace.steps.len() <= 1);
        assert!(trace.within_ceiling());
    }

    #[test]
    fn schedules() {
        assert_eq!(EtaSchedule::Doubling.eta(3, 0.12), 0.01);
        let list = EtaSchedule::List(vec![0.5, 0.25]);
        assert_eq!(list.eta(0, 0.1), 0.5);
        assert_eq!(list.eta(7, 0.1), 0.25);
    }
}
