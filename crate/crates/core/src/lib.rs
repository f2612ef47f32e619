//! Additive combinatorics over `F_p^n` at desk scale.
//!
//! The crate covers the full toolchain around popular common differences of
//! three-term arithmetic progressions (3-APs) in vector spaces over a small odd
//! prime field:
//!
//! * [`space`]: points, subspaces given by dual constraints, coset partitions.
//! * [`fourier`]: dense weighted sets, the radix-p transform, coset averaging.
//! * [`apstats`]: `Λ`, the per-difference densities `ρ(d)` and nontrivial `λ`.
//! * [`regularity`]: weakly regular subspaces and the counting bound.
//! * [`increment`]: mean cube density, the increment step and its iteration,
//!   and the tower-height planner for the upper bound.
//! * [`construction`]: the multi-level weighted construction with few 3-APs
//!   per nonzero difference, its verification and rounding to a set.
//! * [`oracle`]: slow reference implementations used to cross-check the above.
//!
//! Index convention: a point `x = (x_1, …, x_n)` has index `Σ x_k p^{k-1}`, so
//! coordinate 1 varies fastest and the first `k` coordinates of `x` are
//! `x mod p^k`.

pub mod apstats;
pub mod construction;
mod error;
pub mod fourier;
pub mod increment;
pub mod oracle;
pub mod regularity;
pub mod rng;
pub mod space;

pub use error::{Error, Result};
pub use fourier::{GFunction, Spectrum};
pub use space::{CosetPartition, Point, Space, Subspace};
