//! 3-AP densities: the global count `Λ`, nontrivial densities `λ` inside
//! cosets, and the per-difference vector `ρ(d) = E_x f(x) f(x+d) f(x+2d)`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::fourier::{dft, GFunction, Spectrum};
use crate::space::{Point, Space, Subspace};
use crate::{Error, Result};

/// Imaginary residue tolerated in the spectral 3-AP identity.
pub const SPECTRAL_TOLERANCE: f64 = 1e-9;

/// Default cap on triple evaluations for a full scan (`N²`); admits `N = 3^11`.
pub const DEFAULT_SCAN_BUDGET: u128 = 1 << 36;

/// `Λ(f1, f2, f3) = Σ_t f̂1(χ_t) f̂2(χ_{-2t}) f̂3(χ_t)`, which equals
/// `E_{x-2y+z=0} f1(x) f2(y) f3(z)`.
pub fn lambda3_spectral(f1: &GFunction, f2: &GFunction, f3: &GFunction) -> Result<f64> {
    if f1.space() != f2.space() || f1.space() != f3.space() {
        return Err(Error::SpaceMismatch);
    }
    if std::ptr::eq(f1, f2) && std::ptr::eq(f2, f3) {
        let s = dft(f1);
        return lambda3_from_spectra(&s, &s, &s);
    }
    lambda3_from_spectra(&dft(f1), &dft(f2), &dft(f3))
}

/// `Λ(f)` for a single function.
pub fn lambda3(f: &GFunction) -> Result<f64> {
    lambda3_spectral(f, f, f)
}

pub fn lambda3_from_spectra(s1: &Spectrum, s2: &Spectrum, s3: &Spectrum) -> Result<f64> {
    let space = s1.space();
    if space != s2.space() || space != s3.space() {
        return Err(Error::SpaceMismatch);
    }
    let minus_two = space.p() - 2;
    let mut acc = Complex64::default();
    for t in space.points() {
        acc += s1.coeff(t) * s2.coeff(space.scale(minus_two, t)) * s3.coeff(t);
    }
    if acc.im.abs() > SPECTRAL_TOLERANCE {
        return Err(Error::NonRealResult { residue: acc.im.abs() });
    }
    Ok(acc.re)
}

/// Result of a full difference scan.
#[derive(Debug, Clone, PartialEq)]
pub struct ApReport {
    pub alpha: f64,
    /// `Λ(f)`, the mean of `rho` over all differences.
    pub lambda: f64,
    /// `rho[d] = E_x f(x) f(x+d) f(x+2d)`.
    pub rho: Vec<f64>,
    /// `rho[0] = E_x f(x)³`.
    pub z: f64,
    /// First `d ≠ 0` attaining the minimum, with its value; `None` when `n = 0`.
    pub min_nonzero: Option<(Point, f64)>,
    pub max_nonzero: Option<(Point, f64)>,
}

impl ApReport {
    fn from_rho(f: &GFunction, rho: Vec<f64>) -> Self {
        let lambda = rho.iter().sum::<f64>() / rho.len() as f64;
        let mut min_nonzero: Option<(Point, f64)> = None;
        let mut max_nonzero: Option<(Point, f64)> = None;
        for (d, &r) in rho.iter().enumerate().skip(1) {
            if min_nonzero.map_or(true, |(_, m)| r < m) {
                min_nonzero = Some((Point(d), r));
            }
            if max_nonzero.map_or(true, |(_, m)| r > m) {
                max_nonzero = Some((Point(d), r));
            }
        }
        ApReport {
            alpha: f.density(),
            lambda,
            z: rho[0],
            rho,
            min_nonzero,
            max_nonzero,
        }
    }

    /// `α³ − ε − max_{d≠0} ρ(d)`: positive exactly when every nonzero
    /// difference has density below `α³ − ε`. Infinite when there is no
    /// nonzero difference.
    pub fn margin(&self, epsilon: f64) -> f64 {
        match self.max_nonzero {
            Some((_, m)) => self.alpha.powi(3) - epsilon - m,
            None => f64::INFINITY,
        }
    }

    /// `1 − max_{d≠0} ρ(d)/α³`, the largest `ε` for which every nonzero
    /// difference stays below `(1 − ε)α³`.
    pub fn effective_epsilon(&self) -> f64 {
        match self.max_nonzero {
            Some((_, m)) if self.alpha > 0.0 => 1.0 - m / self.alpha.powi(3),
            _ => 0.0,
        }
    }
}

/// Digit-wise translation tables for one block of coordinates.
struct Block {
    space: Space,
}

impl Block {
    /// `table[x] = x + c·d` inside the block.
    fn shift(&self, d: Point, c: u32, out: &mut Vec<u32>) {
        let step = self.space.scale(c, d);
        out.clear();
        out.extend(self.space.points().map(|x| self.space.add(x, step).0 as u32));
    }
}

/// Full difference scan with the default budget.
pub fn rho_scan(f: &GFunction) -> Result<ApReport> {
    rho_scan_with_budget(f, DEFAULT_SCAN_BUDGET)
}

/// Computes `ρ(d)` for every `d` by direct summation, `N²` triple products.
///
/// The index splits into a low block of `⌈n/2⌉` coordinates and a high block;
/// translation never carries between blocks, so `x + d` is a pair of table
/// lookups. Since `ρ(−d) = ρ(d)` only one of each pair is summed. Differences
/// are distributed across the rayon pool and each is summed in a fixed order,
/// so the output does not depend on the number of threads.
///
/// Cost: about `N²/2` fused multiply–adds; `N = 3^10` takes a few seconds on
/// one core.
pub fn rho_scan_with_budget(f: &GFunction, budget: u128) -> Result<ApReport> {
    let space = f.space();
    let big_n = space.size();
    let needed = (big_n as u128) * (big_n as u128);
    if needed > budget {
        return Err(Error::BudgetExceeded {
            what: "difference scan",
            needed,
            budget,
        });
    }
    let p = space.p();
    let lo_dims = space.n().div_ceil(2);
    let lo = Block {
        space: Space::new(p, lo_dims)?,
    };
    let hi = Block {
        space: Space::new(p, space.n() - lo_dims)?,
    };
    let width = lo.space.size();
    let values = f.values();

    let canonical: Vec<usize> = space
        .points()
        .filter(|&d| d.0 <= space.neg(d).0)
        .map(|d| d.0)
        .collect();

    let sums: Vec<f64> = canonical
        .par_iter()
        .map_init(
            || (Vec::new(), Vec::new(), Vec::new(), Vec::new()),
            |(lo1, lo2, hi1, hi2), &d| {
                let (d_lo, d_hi) = (Point(d % width), Point(d / width));
                lo.shift(d_lo, 1, lo1);
                lo.shift(d_lo, 2, lo2);
                hi.shift(d_hi, 1, hi1);
                hi.shift(d_hi, 2, hi2);
                let mut total = 0.0;
                for xh in 0..hi.space.size() {
                    let row0 = &values[xh * width..(xh + 1) * width];
                    let r1 = hi1[xh] as usize * width;
                    let r2 = hi2[xh] as usize * width;
                    let row1 = &values[r1..r1 + width];
                    let row2 = &values[r2..r2 + width];
                    let mut acc = 0.0;
                    for ((&a, &i1), &i2) in row0.iter().zip(lo1.iter()).zip(lo2.iter()) {
                        acc += a * row1[i1 as usize] * row2[i2 as usize];
                    }
                    total += acc;
                }
                total / big_n as f64
            },
        )
        .collect();

    let mut rho = vec![0.0; big_n];
    for (&d, &value) in canonical.iter().zip(&sums) {
        rho[d] = value;
        rho[space.neg(Point(d)).0] = value;
    }
    Ok(ApReport::from_rho(f, rho))
}

/// `ρ` as a bare vector.
pub fn rho_vector(f: &GFunction) -> Result<Vec<f64>> {
    Ok(rho_scan(f)?.rho)
}

fn coset_function(f: &GFunction, h: &Subspace, g: Point) -> Result<GFunction> {
    if h.space() != f.space() {
        return Err(Error::SpaceMismatch);
    }
    let local = Space::new(f.space().p(), h.dim() as u32)?;
    f.pull_back(local, &h.coset_points(g))
}

/// `λ` from `Λ` on a coset of size `M`:
/// `λ = (Λ·M² − M·E[f³]) / (M(M−1))`.
pub fn nontrivial_from_total(lambda: f64, mean_cube: f64, size: usize) -> Result<f64> {
    if size < 2 {
        return Err(Error::DegenerateSubspace {
            size,
            reason: "nontrivial progressions need at least two points".into(),
        });
    }
    let m = size as f64;
    Ok((lambda * m - mean_cube) / (m - 1.0))
}

/// `Λ(H+g)` and `E_{x∈H+g} f(x)³`; the coset is viewed through its local
/// coordinates, an affine bijection that preserves 3-APs.
fn coset_statistics(f: &GFunction, h: &Subspace, g: Point) -> Result<(f64, f64)> {
    let local = coset_function(f, h, g)?;
    Ok((lambda3(&local)?, local.mean_cube()))
}

/// Density of nontrivial 3-APs (`d ≠ 0`) inside the coset `H + g`.
pub fn lambda_nontrivial(f: &GFunction, h: &Subspace, g: Point) -> Result<f64> {
    if h.size() < 2 {
        return nontrivial_from_total(0.0, 0.0, h.size());
    }
    let (lambda, cube) = coset_statistics(f, h, g)?;
    nontrivial_from_total(lambda, cube, h.size())
}

/// `Λ(H + g)`, the density of all 3-APs inside the coset.
pub fn lambda_in_coset(f: &GFunction, h: &Subspace, g: Point) -> Result<f64> {
    Ok(coset_statistics(f, h, g)?.0)
}

/// Per-coset `(Λ(H_j), λ(H_j))` in coset order.
pub fn coset_lambdas(f: &GFunction, h: &Subspace) -> Result<Vec<(f64, f64)>> {
    if h.size() < 2 {
        return Err(Error::DegenerateSubspace {
            size: h.size(),
            reason: "nontrivial progressions need at least two points".into(),
        });
    }
    let cosets = h.cosets()?;
    cosets
        .representatives()
        .par_iter()
        .map(|&g| {
            let (lambda, cube) = coset_statistics(f, h, g)?;
            Ok((lambda, nontrivial_from_total(lambda, cube, h.size())?))
        })
        .collect()
}

/// `E_j λ(H_j)` over all cosets of `H`.
pub fn mean_lambda_over_cosets(f: &GFunction, h: &Subspace) -> Result<f64> {
    let per = coset_lambdas(f, h)?;
    Ok(per.iter().map(|&(_, l)| l).sum::<f64>() / per.len() as f64)
}
