//! The lower-bound parameter schedule at full scale, evaluated in log space.

use std::fmt;

use crate::increment::TowerValue;
use crate::space::is_odd_prime;
use crate::{Error, Result};

/// Relative slack for inequalities that are tight at the regime boundary.
const BOUNDARY_TOLERANCE: f64 = 1e-9;

/// One inequality of the schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanCheck {
    pub name: &'static str,
    /// The level it refers to, when it is per level.
    pub level: Option<usize>,
    pub holds: bool,
    /// Whether the inequality is promised at these parameters; checks outside
    /// the regime are computed but not enforced.
    pub enforced: bool,
    pub detail: String,
}

impl PlanCheck {
    pub fn passed(&self) -> bool {
        self.holds || !self.enforced
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TowerPlan {
    pub p: u32,
    pub ln_epsilon: f64,
    /// `s = ⌊log₉₀(1/(8pε^{1/4}))⌋`; may be below 1 outside the regime.
    pub s: i64,
    /// `m_1 = ⌊½·log_p(3/ε)⌋`.
    pub m1: u64,
    /// `σ = 10⁴·ln p`.
    pub sigma: f64,
    /// `ln μ_i` for `i = 1, …, max(s, 1)`, with `μ_i = 90^i·p·ε^{1/4}`.
    pub ln_mus: Vec<f64>,
    /// `m_1, …, m_{max(s,1)}` with `m_i = μ_i·N_{i−1}/σ` for `i ≥ 2`.
    pub dims: Vec<TowerValue>,
    /// `n_i = m_1 + … + m_i`.
    pub partial_sums: Vec<TowerValue>,
    /// `log₉₀(1/(8pε^{1/4})) − 2`, the tower height reached by `n`.
    pub height: f64,
    /// `(1/52)·log₂(2/ε)`.
    pub height_bound: f64,
    /// `ε ≤ 2^{−160}·p^{−8}`.
    pub in_regime: bool,
    pub checks: Vec<PlanCheck>,
}

impl TowerPlan {
    pub fn epsilon(&self) -> f64 {
        self.ln_epsilon.exp()
    }

    pub fn mus(&self) -> Vec<f64> {
        self.ln_mus.iter().map(|l| l.exp()).collect()
    }

    pub fn all_checks_pass(&self) -> bool {
        self.checks.iter().all(PlanCheck::passed)
    }

    /// `n = n_s`.
    pub fn total_dim(&self) -> TowerValue {
        *self.partial_sums.last().expect("at least one level")
    }
}

impl fmt::Display for TowerPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "p = {}, ln eps = {:.6}, s = {}, m1 = {}, sigma = {:.6}",
            self.p, self.ln_epsilon, self.s, self.m1, self.sigma
        )?;
        for (i, (m, n)) in self.dims.iter().zip(&self.partial_sums).enumerate() {
            writeln!(f, "  m_{} = {m}, n_{} = {n}", i + 1, i + 1)?;
        }
        write!(f, "  height {:.4} vs bound {:.4}", self.height, self.height_bound)
    }
}

pub fn plan_lower_schedule(p: u32, epsilon: f64) -> Result<TowerPlan> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Domain(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    plan_lower_schedule_log(p, epsilon.ln())
}

/// The schedule for `ε = e^{ln_epsilon}`, so that `ε` may be far below the
/// smallest positive double.
pub fn plan_lower_schedule_log(p: u32, ln_epsilon: f64) -> Result<TowerPlan> {
    if !is_odd_prime(p) {
        return Err(Error::Domain(format!("{p} is not an odd prime")));
    }
    if !(ln_epsilon < 0.0) || !ln_epsilon.is_finite() {
        return Err(Error::Domain(format!("ln epsilon must be finite and negative, got {ln_epsilon}")));
    }
    let (ln_p, ln_90, ln_2) = ((p as f64).ln(), 90f64.ln(), 2f64.ln());
    let ln_quarter = ln_epsilon / 4.0;

    let s = ((-(8f64.ln()) - ln_p - ln_quarter) / ln_90 + BOUNDARY_TOLERANCE).floor() as i64;
    let m1 = (0.5 * (3f64.ln() - ln_epsilon) / ln_p + BOUNDARY_TOLERANCE).floor().max(0.0) as u64;
    let sigma = 1e4 * ln_p;
    let levels = s.max(1) as usize;
    let ln_mus: Vec<f64> = (1..=levels).map(|i| i as f64 * ln_90 + ln_p + ln_quarter).collect();

    let mut dims = vec![TowerValue::Exact(m1)];
    let mut partial_sums = vec![TowerValue::Exact(m1)];
    for i in 2..=levels {
        let prev = partial_sums[i - 2];
        let offset = (ln_mus[i - 1] - sigma.ln()) / ln_p;
        let m = prev.add_f64(p, offset).exp_base(p);
        dims.push(m);
        partial_sums.push(prev.add(p, m));
    }

    let regime_ln = -160.0 * ln_2 - 8.0 * ln_p;
    let in_regime = ln_epsilon <= regime_ln + BOUNDARY_TOLERANCE * regime_ln.abs();
    let height = (-(8f64.ln()) - ln_p - ln_quarter) / ln_90 - 2.0;
    let height_bound = (ln_2 - ln_epsilon) / ln_2 / 52.0;

    let mut checks = Vec::new();
    let mut push = |name, level, holds, detail: String| {
        checks.push(PlanCheck {
            name,
            level,
            holds,
            enforced: in_regime,
            detail,
        })
    };
    push(
        "regime",
        None,
        in_regime,
        format!("ln eps = {ln_epsilon:.6} vs ln(2^-160 p^-8) = {regime_ln:.6}"),
    );

    if levels >= 2 {
        let ln_m2 = dims[1].as_f64().map(f64::ln).unwrap_or(f64::INFINITY);
        let ln_mu2 = ln_mus[1];
        // N_1 > (3/ε)^{1/2}/p, from the floor in m_1
        let lhs = ln_mu2 + 0.5 * (3f64.ln() - ln_epsilon) - ln_p - sigma.ln();
        push(
            "m2 > mu2 (3/eps)^(1/2) / (p sigma)",
            Some(2),
            ln_m2 > lhs,
            format!("ln m2 = {ln_m2:.6} vs {lhs:.6}"),
        );
        let quarter = -ln_quarter - ln_p.ln();
        push(
            "mu2 (3/eps)^(1/2) / (p sigma) > eps^(-1/4) / ln p",
            Some(2),
            lhs > quarter,
            format!("{lhs:.6} vs {quarter:.6}"),
        );
        let eighth = -ln_epsilon / 8.0;
        push(
            "eps^(-1/4) / ln p > eps^(-1/8)",
            Some(2),
            quarter > eighth,
            format!("{quarter:.6} vs {eighth:.6}"),
        );
        let floor = 20.0 * ln_2 + ln_p;
        push(
            "eps^(-1/8) >= 2^20 p",
            Some(2),
            eighth >= floor - BOUNDARY_TOLERANCE * floor,
            format!("{eighth:.6} vs {floor:.6}"),
        );
    }
    for i in 2..levels {
        // log_p m_{i+1} = n_i + log_p(μ_{i+1}/σ) > m_i  ⇔  n_{i−1} + log_p(μ_{i+1}/σ) > 0
        let offset = (ln_mus[i] - sigma.ln()) / ln_p;
        let prev = partial_sums[i - 2];
        push(
            "m_{i+1} > p^{m_i}",
            Some(i),
            prev > TowerValue::real(p, (-offset).max(0.0)),
            format!("n_{} = {prev} vs {:.6}", i - 1, -offset),
        );
    }
    for i in 2..=levels {
        let need = partial_sums[i - 2].mul_f64(p, 3.0).add_f64(p, 3.0);
        push(
            "m_i >= 3 n_{i-1} + 3",
            Some(i),
            dims[i - 1] >= need,
            format!("m_{i} = {} vs {need}", dims[i - 1]),
        );
    }
    let mu_s = ln_mus[levels - 1].exp();
    push("mu_s < 3/4", Some(levels), mu_s < 0.75, format!("mu_s = {mu_s:.6e}"));
    let off_base = p as f64 * (ln_epsilon / 2.0).exp() + ln_mus.get(1..).unwrap_or(&[]).iter().map(|l| l.exp()).sum::<f64>();
    push(
        "p eps^(1/2) + sum mu < 1/4",
        None,
        off_base < 0.25,
        format!("{off_base:.6e}"),
    );
    push(
        "height >= log2(2/eps)/52",
        None,
        height >= height_bound,
        format!("{height:.6} vs {height_bound:.6}"),
    );
    if levels >= 3 {
        if let Some(m2) = dims[1].as_f64() {
            let tower = TowerValue::tower(p, (levels - 2) as u32, m2);
            let n = *partial_sums.last().expect("nonempty");
            push(
                "n >= tower(p, s - 2, m2)",
                None,
                n >= tower,
                format!("n = {n} vs {tower}"),
            );
        }
    }

    Ok(TowerPlan {
        p,
        ln_epsilon,
        s,
        m1,
        sigma,
        ln_mus,
        dims,
        partial_sums,
        height,
        height_bound,
        in_regime,
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn boundary(p: u32) -> f64 {
        -160.0 * 2f64.ln() - 8.0 * (p as f64).ln()
    }

    #[test]
    fn boundary_schedule_p3() {
        let plan = plan_lower_schedule_log(3, boundary(3)).unwrap();
        assert_eq!(plan.s, 5);
        assert_eq!(plan.m1, 54);
        assert!(plan.in_regime);
        let mu1 = plan.mus()[0];
        assert!((mu1 / (270.0 * 2f64.powi(-40) / 9.0) - 1.0).abs() < 1e-9);
        let m2 = plan.dims[1].as_f64().unwrap();
        assert!((m2 / 1.3e13 - 1.0).abs() < 0.01, "{m2}");
        assert!(plan.all_checks_pass(), "{:#?}", plan.checks);
        assert!((plan.height - 3.944).abs() < 1e-3);
        assert!((plan.height_bound - 3.340).abs() < 1e-3);
        assert_eq!(plan.dims[4].height(), 3);
    }

    #[test]
    fn linear_and_log_entry_points_agree() {
        let eps = 2f64.powi(-160) * 3f64.powi(-8);
        let a = plan_lower_schedule(3, eps).unwrap();
        let b = plan_lower_schedule_log(3, boundary(3)).unwrap();
        assert_eq!((a.s, a.m1), (b.s, b.m1));
    }

    #[test]
    fn deep_regime() {
        for &ln_eps in &[-1000.0, -1e5] {
            let plan = plan_lower_schedule_log(5, ln_eps).unwrap();
            assert!(plan.in_regime);
            assert!(plan.all_checks_pass(), "{:#?}", plan.checks);
        }
    }

    #[test]
    fn relaxed_regime_is_not_enforced() {
        let plan = plan_lower_schedule(3, 0.01).unwrap();
        assert!(!plan.in_regime);
        assert!(plan.all_checks_pass());
        assert!(plan.s < 1);
        assert_eq!(plan.dims.len(), 1);
    }

    #[test]
    fn domain_errors() {
        assert!(plan_lower_schedule(3, 1.0).is_err());
        assert!(plan_lower_schedule(4, 0.1).is_err());
        assert!(plan_lower_schedule(3, 0.0).is_err());
        assert!(plan_lower_schedule_log(3, f64::NAN).is_err());
    }
}
