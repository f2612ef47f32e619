//! Parameter arithmetic for the upper bound: how many increment steps can
//! occur, how fast the codimension grows, and the resulting tower height.

use super::tower::TowerValue;
use crate::space::is_odd_prime;
use crate::{Error, Result};

/// One link `C_{k+1} = C_k + p^{C_k}·144/ε²` of the codimension chain.
#[derive(Debug, Clone, PartialEq)]
pub struct CodimStep {
    /// `k + 1`.
    pub step: u32,
    pub codim: TowerValue,
    /// `2·C_{k+1} ≤ max(145²·ε⁻⁴, p^{2·C_k})`.
    pub recursion_ok: bool,
    /// `C_{k+1}` is at most a tower of height `k + 3` with `1/ε` on top.
    pub tower_ok: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UpperBoundPlan {
    pub p: u32,
    pub alpha: f64,
    pub epsilon: f64,
    /// `⌈log₂((α − α³)/ε)⌉ + 5`.
    pub height: u32,
    /// Tower of `p`'s of that height with `1/ε` on top.
    pub bound: TowerValue,
    /// Largest `s` with `α³ + (2^s − 1)ε/2 < α`: no run can take more steps.
    pub max_steps: u32,
    pub chain: Vec<CodimStep>,
}

impl UpperBoundPlan {
    pub fn all_checks_pass(&self) -> bool {
        self.chain.iter().all(|s| s.recursion_ok && s.tower_ok)
            && self.chain.last().map_or(true, |s| s.codim <= self.bound)
    }
}

fn validate(alpha: f64, epsilon: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Domain(format!("alpha must lie in (0, 1], got {alpha}")));
    }
    let room = alpha - alpha.powi(3);
    if !(epsilon > 0.0) || epsilon >= room {
        return Err(Error::Domain(format!(
            "epsilon must lie in (0, alpha - alpha^3) = (0, {room}), got {epsilon}"
        )));
    }
    Ok(room)
}

/// `⌈log₂((α − α³)/ε)⌉ + 5`, with exact powers of two landing on integers.
pub fn upper_height(alpha: f64, epsilon: f64) -> Result<u32> {
    let room = validate(alpha, epsilon)?;
    let log = (room / epsilon).log2();
    Ok((log - 1e-9).ceil().max(0.0) as u32 + 5)
}

pub fn plan_upper_bound(p: u32, epsilon: f64, alpha: f64) -> Result<UpperBoundPlan> {
    if !is_odd_prime(p) {
        return Err(Error::Domain(format!("{p} is not an odd prime")));
    }
    let room = validate(alpha, epsilon)?;
    let height = upper_height(alpha, epsilon)?;
    let bound = TowerValue::tower(p, height, 1.0 / epsilon);

    let mut max_steps = 0u32;
    while ((2f64).powi(max_steps as i32 + 1) - 1.0) * epsilon / 2.0 < room {
        max_steps += 1;
    }

    let ln_p = (p as f64).ln();
    let k = 144.0 / (epsilon * epsilon);
    // p^C ≥ 4K makes 2C + 2K·p^C ≤ p^{2C} automatic
    let algebraic_floor = TowerValue::real(p, (4.0 * k).ln() / ln_p);
    let ln_floor = 2.0 * 145f64.ln() - 4.0 * epsilon.ln();

    let mut chain = Vec::with_capacity(max_steps as usize);
    let mut codim = TowerValue::Exact(0);
    for step in 0..max_steps {
        let next = codim.add(p, codim.exp_base(p).mul_f64(p, k));
        let recursion_ok = match (codim.as_f64(), next.log_as_f64(p)) {
            (Some(c), Some(log_next)) => {
                let lhs = 2f64.ln() + log_next * ln_p;
                let rhs = ln_floor.max(2.0 * c * ln_p);
                lhs <= rhs + 1e-12 * rhs.abs()
            }
            _ => codim >= algebraic_floor,
        };
        let tower_ok = next <= TowerValue::tower(p, step + 3, 1.0 / epsilon);
        chain.push(CodimStep {
            step: step + 1,
            codim: next,
            recursion_ok,
            tower_ok,
        });
        codim = next;
    }

    Ok(UpperBoundPlan {
        p,
        alpha,
        epsilon,
        height,
        bound,
        max_steps,
        chain,
    })
}
