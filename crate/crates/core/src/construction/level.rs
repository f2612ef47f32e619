//! Level 1 and the level-by-level extension.

use rand::seq::index::sample;

use super::directions::{sample_directions, DirectionMap};
use super::gadget::IntervalGadget;
use super::params::{h_size, ConstructionParams, HSelection, LevelDescriptor, LevelOptions};
use crate::fourier::GFunction;
use crate::rng::stream_rng;
use crate::space::{Point, Space};
use crate::{Error, Result};

/// Stream offset separating `H_i` selection from direction sampling.
const SELECTION_STREAM: u64 = 1 << 39;

/// One level of the construction.
///
/// A point of level `i` is a pair `(x, y)` with `x` in the previous space
/// (the low coordinates) and `y ∈ F_p^{m_i}`, so `d*`, the restriction of a
/// difference to the previous space, is its index modulo `p^{n_{i−1}}`.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelState {
    pub level: usize,
    pub descriptor: LevelDescriptor,
    pub f: GFunction,
    /// `n_{i−1}`; 0 at level 1.
    pub prev_dim: u32,
    /// `m_i`.
    pub m: u32,
    /// `H_i`, increasing; empty at level 1.
    pub h_points: Vec<Point>,
    /// `v` on `H_i`; `None` when `H_i` is empty.
    pub directions: Option<DirectionMap>,
    /// `z_i = E f_i³`.
    pub z: f64,
}

impl LevelState {
    pub fn space(&self) -> Space {
        self.f.space()
    }

    /// `G_i`: the points carrying the base value `(1+η)α`.
    pub fn good_points(&self) -> Vec<Point> {
        let base = self.descriptor.base();
        self.f
            .values()
            .iter()
            .enumerate()
            .filter(|(_, &v)| v == base)
            .map(|(k, _)| Point(k))
            .collect()
    }
}

pub fn level1(params: &ConstructionParams) -> Result<LevelState> {
    params.validate()?;
    let descriptor = params.descriptor(0);
    let space = Space::new(params.p, params.dims[0])?;
    let (low, base) = (descriptor.low().max(0.0), descriptor.base());
    let f = GFunction::from_fn(space, |x| if x == Point::ZERO { low } else { base })?;
    Ok(LevelState {
        level: 1,
        z: f.mean_cube(),
        descriptor,
        f,
        prev_dim: 0,
        m: params.dims[0],
        h_points: Vec::new(),
        directions: None,
    })
}

/// Builds level `i + 1` from level `i`: the first `μ·p^{n_i}` base points (or
/// a seeded random choice) are replaced, along their fibers, by the scaled
/// interval pattern `y ↦ (1/ζ)(1+η)α·[y·v(x) ∈ I]`; every other fiber copies
/// the previous value.
pub fn extend_level(prev: &LevelState, m: u32, mu: f64, options: &LevelOptions, seed: u64) -> Result<LevelState> {
    if m == 0 {
        return Err(Error::InvalidParameter("level dimension must be positive".into()));
    }
    let prev_space = prev.space();
    let p = prev_space.p();
    let space = Space::new(p, prev_space.n() + m)?;
    let fiber_space = Space::new(p, m)?;
    let level = prev.level + 1;
    let k = h_size(mu, prev_space.size())?;
    let good = prev.good_points();
    if k > good.len() {
        return Err(Error::InvalidParameter(format!(
            "mu = {mu} asks for {k} points but only {} carry the base value",
            good.len()
        )));
    }
    let h_points: Vec<Point> = match options.selection {
        HSelection::Lowest => good[..k].to_vec(),
        HSelection::Random => {
            let mut rng = stream_rng(seed, ((level as u64) << 40) | SELECTION_STREAM);
            let mut chosen: Vec<Point> = sample(&mut rng, good.len(), k).into_iter().map(|j| good[j]).collect();
            chosen.sort_unstable();
            chosen
        }
    };

    let gadget = IntervalGadget::new(p)?;
    let directions = if k == 0 {
        None
    } else {
        Some(sample_directions(
            prev_space,
            &h_points,
            m,
            &gadget,
            &options.sampling,
            seed,
            (level as u64) << 40,
        )?)
    };

    let mut descriptor = prev.descriptor.clone();
    descriptor.mus.push(mu);
    let high = descriptor.high();

    let mut direction_of = vec![None; prev_space.size()];
    if let Some(map) = &directions {
        for (x, v) in h_points.iter().zip(&map.directions) {
            direction_of[x.0] = Some(*v);
        }
    }
    let prev_values = prev.f.values();
    let stride = prev_space.size();
    let mut values = Vec::with_capacity(space.size());
    for y in fiber_space.points() {
        for (x, &value) in prev_values.iter().enumerate() {
            values.push(match direction_of[x] {
                Some(v) if gadget.contains(fiber_space.dot(y, v)) => high,
                Some(_) => 0.0,
                None => value,
            });
        }
    }
    debug_assert_eq!(values.len(), stride * fiber_space.size());
    let f = GFunction::new(space, values)?;
    Ok(LevelState {
        level,
        z: f.mean_cube(),
        descriptor,
        f,
        prev_dim: prev_space.n(),
        m,
        h_points,
        directions,
    })
}

/// Runs every level; the result starts with level 1.
pub fn build_pipeline(params: &ConstructionParams) -> Result<Vec<LevelState>> {
    let mut levels = vec![level1(params)?];
    for (&m, &mu) in params.dims[1..].iter().zip(&params.mus) {
        let next = extend_level(levels.last().expect("level 1 exists"), m, mu, &params.options, params.seed)?;
        levels.push(next);
    }
    Ok(levels)
}
