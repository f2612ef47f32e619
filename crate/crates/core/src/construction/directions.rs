//! Seeded rejection sampling of the direction map `v`.

use std::fmt;

use rand::Rng;

use super::gadget::IntervalGadget;
use crate::rng::stream_rng;
use crate::space::{rank_mod, Point, Space};
use crate::{Error, Result};

/// Largest `p^m · |H|` evaluated by the threshold check.
pub const THRESHOLD_BUDGET: u128 = 1 << 28;
/// Largest domain accepted in strict mode (all triples are checked).
pub const STRICT_DOMAIN_LIMIT: usize = 243;

/// Which triples must receive linearly independent directions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IndependenceMode {
    /// Pairs of distinct points of `H` and nontrivial 3-APs inside `H`; this
    /// is all the construction uses.
    #[default]
    WithinSet,
    /// `v` is drawn on the whole previous space and every triple of distinct
    /// points must be independent.
    Strict,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplingOptions {
    /// Added to the threshold `ζ³ − 1/125`.
    pub slack: f64,
    pub max_attempts: u64,
    pub mode: IndependenceMode,
}

impl Default for SamplingOptions {
    fn default() -> Self {
        SamplingOptions {
            slack: 0.0,
            max_attempts: 100_000,
            mode: IndependenceMode::WithinSet,
        }
    }
}

/// An accepted direction map.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionMap {
    pub m: u32,
    /// `directions[k] = v(h_points[k])`, a nonzero point of `F_p^m`.
    pub directions: Vec<Point>,
    /// `max_{d ≠ 0} E_{x∈H} h(d·v(x))` and the first maximizing `d`.
    pub max_mean_h: f64,
    pub argmax_d: Point,
    pub threshold: f64,
    /// Attempts used, including the accepted one.
    pub attempts: u64,
}

/// Why sampling gave up: the first failed condition of every attempt.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SamplingDiagnostics {
    pub attempts: u64,
    pub duplicates: u64,
    pub dependent_pairs: u64,
    pub dependent_triples: u64,
    pub threshold_violations: u64,
    /// Smallest `max_d E h` among attempts that reached the threshold check.
    pub best_max_mean_h: Option<f64>,
    pub threshold: f64,
}

impl SamplingDiagnostics {
    /// The condition that failed most often.
    pub fn dominant(&self) -> &'static str {
        let tallies = [
            (self.duplicates, "repeated direction"),
            (self.dependent_pairs, "dependent pair"),
            (self.dependent_triples, "dependent triple"),
            (self.threshold_violations, "progression threshold"),
        ];
        tallies.iter().max_by_key(|t| t.0).map_or("none", |t| t.1)
    }
}

impl fmt::Display for SamplingDiagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} attempts ({} repeated, {} dependent pairs, {} dependent triples, {} over threshold {:.6}",
            self.attempts,
            self.duplicates,
            self.dependent_pairs,
            self.dependent_triples,
            self.threshold_violations,
            self.threshold
        )?;
        if let Some(best) = self.best_max_mean_h {
            write!(f, ", best max mean h {best:.6}")?;
        }
        write!(f, "); most frequent failure: {}", self.dominant())
    }
}

/// Scales `v` so that its first nonzero coordinate is 1.
fn projective(space: Space, v: Point) -> Point {
    let coords = space.coords(v);
    let lead = coords.iter().copied().find(|&c| c != 0).expect("directions are nonzero");
    let inv = crate::space::pow_mod(lead as u64, space.p() as u64 - 2, space.p() as u64) as u32;
    space.scale(inv, v)
}

enum Failure {
    Duplicate,
    Pair,
    Triple,
    Threshold(f64),
}

struct Checker<'a> {
    dir_space: Space,
    gadget: &'a IntervalGadget,
    /// Positions (into the sampled vector) of the points of `H`.
    h_slots: Vec<usize>,
    /// Triples of sampled positions that must be independent.
    triples: Vec<[usize; 3]>,
    threshold: f64,
}

impl Checker<'_> {
    fn check(&self, sampled: &[Point]) -> std::result::Result<(f64, Point), Failure> {
        let mut seen = std::collections::HashSet::with_capacity(sampled.len());
        if !sampled.iter().all(|v| seen.insert(*v)) {
            return Err(Failure::Duplicate);
        }
        let mut lines = std::collections::HashSet::with_capacity(sampled.len());
        if !sampled.iter().all(|&v| lines.insert(projective(self.dir_space, v))) {
            return Err(Failure::Pair);
        }
        let (p, m) = (self.dir_space.p(), self.dir_space.n() as usize);
        for t in &self.triples {
            let rows = t.iter().map(|&k| self.dir_space.coords(sampled[k])).collect();
            if rank_mod(rows, p, m) < 3 {
                return Err(Failure::Triple);
            }
        }
        let h = self.gadget.h();
        let count = self.h_slots.len() as f64;
        let mut best = (f64::NEG_INFINITY, Point::ZERO);
        for d in self.dir_space.points().skip(1) {
            let total: f64 = self
                .h_slots
                .iter()
                .map(|&k| h[self.dir_space.dot(d, sampled[k]) as usize])
                .sum();
            let mean = total / count;
            if mean > best.0 {
                best = (mean, d);
            }
        }
        if best.0 > self.threshold {
            return Err(Failure::Threshold(best.0));
        }
        Ok(best)
    }
}

/// Draws uniform nonzero `v(x) ∈ F_p^m` until every condition holds:
/// distinct values, the required linear independence, and
/// `E_{x∈H} h(d·v(x)) ≤ ζ³ − 1/125 + slack` for every nonzero `d`.
///
/// Attempt `k` uses the generator stream `stream_base + k` of `seed`, so the
/// result depends only on the inputs.
pub fn sample_directions(
    prev_space: Space,
    h_points: &[Point],
    m: u32,
    gadget: &IntervalGadget,
    options: &SamplingOptions,
    seed: u64,
    stream_base: u64,
) -> Result<DirectionMap> {
    if h_points.is_empty() {
        return Err(Error::InvalidParameter("direction map needs at least one point".into()));
    }
    if gadget.p() != prev_space.p() {
        return Err(Error::SpaceMismatch);
    }
    let dir_space = Space::new(prev_space.p(), m)?;
    if m == 0 {
        return Err(Error::InvalidParameter("directions need m >= 1".into()));
    }
    let cost = dir_space.size() as u128 * h_points.len() as u128;
    if cost > THRESHOLD_BUDGET {
        return Err(Error::BudgetExceeded {
            what: "direction threshold check",
            needed: cost,
            budget: THRESHOLD_BUDGET,
        });
    }
    let threshold = gadget.zeta().powi(3) - 1.0 / 125.0 + options.slack;

    let (domain, h_slots, triples) = match options.mode {
        IndependenceMode::WithinSet => {
            let mut slot = vec![usize::MAX; prev_space.size()];
            for (k, &x) in h_points.iter().enumerate() {
                slot[x.0] = k;
            }
            let mut triples = Vec::new();
            for (ia, &a) in h_points.iter().enumerate() {
                for (ib, &b) in h_points.iter().enumerate() {
                    if ia == ib {
                        continue;
                    }
                    // b is the middle term; (a, b, c) and (c, b, a) are one progression
                    let c = prev_space.combine(2, b, prev_space.p() - 1, a);
                    if a.0 < c.0 && slot[c.0] != usize::MAX {
                        triples.push([ia, ib, slot[c.0]]);
                    }
                }
            }
            (h_points.to_vec(), (0..h_points.len()).collect(), triples)
        }
        IndependenceMode::Strict => {
            if prev_space.size() > STRICT_DOMAIN_LIMIT {
                return Err(Error::BudgetExceeded {
                    what: "strict independence domain",
                    needed: prev_space.size() as u128,
                    budget: STRICT_DOMAIN_LIMIT as u128,
                });
            }
            let size = prev_space.size();
            let mut triples = Vec::new();
            for a in 0..size {
                for b in a + 1..size {
                    for c in b + 1..size {
                        triples.push([a, b, c]);
                    }
                }
            }
            let domain: Vec<Point> = prev_space.points().collect();
            (domain, h_points.iter().map(|x| x.0).collect(), triples)
        }
    };

    let checker = Checker {
        dir_space,
        gadget,
        h_slots,
        triples,
        threshold,
    };
    let mut diag = SamplingDiagnostics {
        threshold,
        ..Default::default()
    };
    let upper = dir_space.size();
    let mut sampled = vec![Point::ZERO; domain.len()];
    for attempt in 0..options.max_attempts {
        let mut rng = stream_rng(seed, stream_base.wrapping_add(attempt));
        for v in sampled.iter_mut() {
            *v = Point(rng.gen_range(1..upper));
        }
        diag.attempts += 1;
        match checker.check(&sampled) {
            Ok((max_mean_h, argmax_d)) => {
                return Ok(DirectionMap {
                    m,
                    directions: checker.h_slots.iter().map(|&k| sampled[k]).collect(),
                    max_mean_h,
                    argmax_d,
                    threshold,
                    attempts: attempt + 1,
                });
            }
            Err(Failure::Duplicate) => diag.duplicates += 1,
            Err(Failure::Pair) => diag.dependent_pairs += 1,
            Err(Failure::Triple) => diag.dependent_triples += 1,
            Err(Failure::Threshold(value)) => {
                diag.threshold_violations += 1;
                diag.best_max_mean_h = Some(diag.best_max_mean_h.map_or(value, |b: f64| b.min(value)));
            }
        }
    }
    Err(Error::SamplingExhausted(Box::new(diag)))
}
