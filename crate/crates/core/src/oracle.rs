//! Slow reference implementations.
//!
//! Everything here is a literal transcription of a defining formula, with its
//! own digit handling, so it shares nothing with the fast paths it checks.
//! Each oracle refuses inputs beyond a small budget.

use num_complex::Complex64;

use crate::fourier::{GFunction, Spectrum};
use crate::space::{Point, Space};
use crate::{Error, Result};

/// Largest `N` accepted by the quadratic oracles.
pub const QUADRATIC_LIMIT: usize = 6561;
/// Largest `N` accepted by the linear oracles.
pub const LINEAR_LIMIT: usize = 1 << 22;

fn check(what: &'static str, needed: usize, budget: usize) -> Result<()> {
    if needed > budget {
        return Err(Error::BudgetExceeded {
            what,
            needed: needed as u128,
            budget: budget as u128,
        });
    }
    Ok(())
}

fn digits(mut x: usize, p: usize, n: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        out.push(x % p);
        x /= p;
    }
    out
}

fn undigits(d: &[usize], p: usize) -> usize {
    d.iter().rev().fold(0, |acc, &v| acc * p + v)
}

/// `a·x + b·y` computed digit by digit.
fn affine(x: usize, a: usize, y: usize, b: usize, p: usize, n: usize) -> usize {
    let (dx, dy) = (digits(x, p, n), digits(y, p, n));
    let out: Vec<usize> = dx.iter().zip(&dy).map(|(u, v)| (a * u + b * v) % p).collect();
    undigits(&out, p)
}

/// `e^{2πik/p}` for `k = 0, …, p − 1`.
fn roots(p: usize) -> Vec<Complex64> {
    (0..p)
        .map(|k| {
            let angle = 2.0 * std::f64::consts::PI * k as f64 / p as f64;
            Complex64::new(angle.cos(), angle.sin())
        })
        .collect()
}

fn dot(a: &[usize], b: &[usize], p: usize) -> usize {
    a.iter().zip(b).map(|(u, v)| u * v).sum::<usize>() % p
}

/// `f̂(χ_t) = (1/N) Σ_x f(x) e^{2πi t·x/p}` by direct summation.
pub fn naive_dft(f: &GFunction) -> Result<Spectrum> {
    let space = f.space();
    let (p, n, big_n) = (space.p() as usize, space.n() as usize, space.size());
    check("naive transform", big_n, QUADRATIC_LIMIT)?;
    let all: Vec<Vec<usize>> = (0..big_n).map(|x| digits(x, p, n)).collect();
    let w = roots(p);
    let coeffs = (0..big_n)
        .map(|t| {
            let acc: Complex64 = all
                .iter()
                .zip(f.values())
                .map(|(dx, &v)| w[dot(&all[t], dx, p)] * v)
                .sum();
            acc / big_n as f64
        })
        .collect();
    Spectrum::new(space, coeffs)
}

/// A single coefficient `f̂(χ_t)` by direct summation, for spaces too large
/// for [`naive_dft`].
pub fn naive_coefficient(f: &GFunction, t: Point) -> Result<Complex64> {
    let space = f.space();
    let (p, n, big_n) = (space.p() as usize, space.n() as usize, space.size());
    check("naive coefficient", big_n, LINEAR_LIMIT)?;
    if t.0 >= big_n {
        return Err(Error::Coordinate(format!("character {t} outside the space")));
    }
    let dt = digits(t.0, p, n);
    let w = roots(p);
    // odometer over the digits of x
    let mut dx = vec![0usize; n];
    let mut acc = Complex64::new(0.0, 0.0);
    for &value in f.values() {
        acc += w[dot(&dt, &dx, p)] * value;
        for digit in dx.iter_mut() {
            *digit += 1;
            if *digit < p {
                break;
            }
            *digit = 0;
        }
    }
    Ok(acc / big_n as f64)
}

/// `E_x f(x) f(x+d) f(x+2d)`.
pub fn naive_rho(f: &GFunction, d: Point) -> Result<f64> {
    let space = f.space();
    let (p, n, big_n) = (space.p() as usize, space.n() as usize, space.size());
    check("naive difference scan", big_n, LINEAR_LIMIT)?;
    if d.0 >= big_n {
        return Err(Error::Coordinate(format!("difference {d} outside the space")));
    }
    let v = f.values();
    let mut total = 0.0;
    for x in 0..big_n {
        let x1 = affine(x, 1, d.0, 1, p, n);
        let x2 = affine(x, 1, d.0, 2, p, n);
        total += v[x] * v[x1] * v[x2];
    }
    Ok(total / big_n as f64)
}

/// `E_{x,y} f(x) f(y) f(2y − x)`, over all `N²` pairs.
pub fn naive_lambda(f: &GFunction) -> Result<f64> {
    let space = f.space();
    let (p, n, big_n) = (space.p() as usize, space.n() as usize, space.size());
    check("naive progression count", big_n, QUADRATIC_LIMIT)?;
    let all: Vec<Vec<usize>> = (0..big_n).map(|x| digits(x, p, n)).collect();
    let v = f.values();
    let mut total = 0.0;
    for (x, dx) in all.iter().enumerate() {
        for (y, dy) in all.iter().enumerate() {
            let z = dy.iter().zip(dx).rev().fold(0, |acc, (b, a)| acc * p + (2 * b + (p - 1) * a) % p);
            total += v[x] * v[y] * v[z];
        }
    }
    Ok(total / (big_n * big_n) as f64)
}

/// `#{x : x, x+d, x+2d ∈ A}` for a set `A` given by indices.
pub fn exact_count_3aps(space: Space, set: &[Point], d: Point) -> Result<u64> {
    let (p, n, big_n) = (space.p() as usize, space.n() as usize, space.size());
    check("exact progression count", big_n, LINEAR_LIMIT)?;
    let mut member = vec![false; big_n];
    for &a in set {
        if a.0 >= big_n {
            return Err(Error::Coordinate(format!("point {a} outside the space")));
        }
        member[a.0] = true;
    }
    let mut count = 0u64;
    for x in (0..big_n).filter(|&x| member[x]) {
        if member[affine(x, 1, d.0, 1, p, n)] && member[affine(x, 1, d.0, 2, p, n)] {
            count += 1;
        }
    }
    Ok(count)
}
