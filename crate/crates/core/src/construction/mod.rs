//! The multi-level weighted construction in which every nonzero difference
//! has fewer 3-APs than a random set of the same density.
//!
//! Level 1 lives on `F_p^{m_1}`: the base value `(1+η)α` everywhere except a
//! compensating low value at 0. Level `i` adds `m_i` coordinates. On a chosen
//! set `H_i` of base points `x`, the fiber over `x` is replaced by the scaled
//! indicator of `{y : y·v(x) ∈ I}` for a large interval `I ⊂ F_p` and a
//! sampled direction `v(x)`; all other fibers copy the previous level.
//! Differences with a nonzero restriction to the previous space keep their
//! previous density exactly; the remaining ones see the interval's deficit of
//! progressions.

mod directions;
mod gadget;
mod level;
mod params;
mod rounding;
mod schedule;
mod verify;

pub use directions::{
    sample_directions, DirectionMap, IndependenceMode, SamplingDiagnostics, SamplingOptions, STRICT_DOMAIN_LIMIT,
    THRESHOLD_BUDGET,
};
pub use gadget::IntervalGadget;
pub use level::{build_pipeline, extend_level, level1, LevelState};
pub use params::{h_size, ConstructionParams, HSelection, LevelDescriptor, LevelOptions, LevelRegime, VALUE_TOLERANCE};
pub use rounding::{
    hoeffding_threshold, round_once, round_to_set, round_with_reference, RoundingOutcome, RoundingReference,
};
pub use schedule::{plan_lower_schedule, plan_lower_schedule_log, PlanCheck, TowerPlan};
pub use verify::{
    report_from_scan, stability_check, stability_from_rho, verify_five_properties, verify_function,
    FivePropertyReport, PropertyCheck, IDENTITY_TOLERANCE,
};
