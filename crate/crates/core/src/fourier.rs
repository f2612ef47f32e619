//! Dense functions on `F_p^n` and their Fourier transform.
//!
//! The transform follows the normalization
//! `f̂(χ_t) = (1/N) Σ_x f(x) ω^{t·x}` with `ω = e^{2πi/p}` and no conjugation,
//! so `χ_{-2t}` in the 3-AP identity is simply the character indexed by
//! `-2t mod p`.

use num_complex::Complex64;

use crate::space::{CosetPartition, Point, Space, Subspace};
use crate::{Error, Result};

/// Imaginary residue tolerated when a transform result is expected real.
pub const REAL_TOLERANCE: f64 = 1e-10;

/// A function `f: F_p^n → ℝ` stored densely in index order.
///
/// Weighted sets take values in `[0, 1]`; differences of weighted sets are
/// flagged `signed` and may take any finite value.
#[derive(Debug, Clone, PartialEq)]
pub struct GFunction {
    space: Space,
    values: Vec<f64>,
    signed: bool,
}

impl GFunction {
    /// A weighted set; every value must lie in `[0, 1]`.
    pub fn new(space: Space, values: Vec<f64>) -> Result<Self> {
        Self::checked(space, values, false)
    }

    /// A real function with arbitrary finite values.
    pub fn signed(space: Space, values: Vec<f64>) -> Result<Self> {
        Self::checked(space, values, true)
    }

    fn checked(space: Space, values: Vec<f64>, signed: bool) -> Result<Self> {
        if values.len() != space.size() {
            return Err(Error::InvalidParameter(format!(
                "expected {} values, got {}",
                space.size(),
                values.len()
            )));
        }
        for (index, &value) in values.iter().enumerate() {
            if !value.is_finite() || (!signed && !(0.0..=1.0).contains(&value)) {
                return Err(Error::InvalidValue { index, value });
            }
        }
        Ok(GFunction { space, values, signed })
    }

    pub fn constant(space: Space, value: f64) -> Result<Self> {
        Self::new(space, vec![value; space.size()])
    }

    pub fn indicator<I: IntoIterator<Item = Point>>(space: Space, points: I) -> Result<Self> {
        let mut values = vec![0.0; space.size()];
        for x in points {
            if !space.contains(x) {
                return Err(Error::Coordinate(format!("point {x} outside a space of {} points", space.size())));
            }
            values[x.0] = 1.0;
        }
        Self::new(space, values)
    }

    pub fn from_fn(space: Space, mut f: impl FnMut(Point) -> f64) -> Result<Self> {
        Self::new(space, space.points().map(&mut f).collect())
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn value(&self, x: Point) -> f64 {
        self.values[x.0]
    }

    pub fn is_signed(&self) -> bool {
        self.signed
    }

    /// `E_x f(x)`.
    pub fn density(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// `E_x f(x)^3`, the 3-AP density of the trivial difference.
    pub fn mean_cube(&self) -> f64 {
        self.values.iter().map(|v| v * v * v).sum::<f64>() / self.values.len() as f64
    }

    pub fn mean_square(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>() / self.values.len() as f64
    }

    /// `f - g`, flagged signed.
    pub fn sub(&self, other: &GFunction) -> Result<GFunction> {
        if self.space != other.space {
            return Err(Error::SpaceMismatch);
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        Ok(GFunction {
            space: self.space,
            values,
            signed: true,
        })
    }

    /// The function `c ↦ f(points[c])` on `local`, used to view `f` on an
    /// affine coset through its local coordinates.
    pub fn pull_back(&self, local: Space, points: &[Point]) -> Result<GFunction> {
        if points.len() != local.size() {
            return Err(Error::InvalidParameter(format!(
                "{} points cannot parametrize a space of {} points",
                points.len(),
                local.size()
            )));
        }
        let values = points.iter().map(|&x| self.values[x.0]).collect();
        Ok(GFunction {
            space: local,
            values,
            signed: self.signed,
        })
    }
}

/// Fourier coefficients `f̂(χ_t)`, indexed by `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    space: Space,
    coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub fn new(space: Space, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != space.size() {
            return Err(Error::InvalidParameter(format!(
                "expected {} coefficients, got {}",
                space.size(),
                coeffs.len()
            )));
        }
        Ok(Spectrum { space, coeffs })
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    #[inline]
    pub fn coeff(&self, t: Point) -> Complex64 {
        self.coeffs[t.0]
    }

    /// `Σ_t |f̂(χ_t)|²`, equal to `E_x f(x)²` by Parseval.
    pub fn energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Largest `|f̂(χ_t)|` and the first `t` attaining it.
    pub fn sup_norm(&self) -> (f64, Point) {
        let mut best = (0.0, Point::ZERO);
        for (t, c) in self.coeffs.iter().enumerate() {
            let m = c.norm();
            if m > best.0 {
                best = (m, Point(t));
            }
        }
        best
    }
}

pub(crate) fn roots_of_unity(p: u32, sign: f64) -> Vec<Complex64> {
    (0..p)
        .map(|j| Complex64::from_polar(1.0, sign * std::f64::consts::TAU * j as f64 / p as f64))
        .collect()
}

/// In-place `n`-stage radix-`p` transform `a[t] ← Σ_x a[x] ω^{sign·t·x}`.
fn transform_in_place(data: &mut [Complex64], space: Space, sign: f64) {
    let p = space.p() as usize;
    let roots = roots_of_unity(space.p(), sign);
    let mut scratch = vec![Complex64::default(); p];
    let mut stride = 1usize;
    for _ in 0..space.n() {
        let block = stride * p;
        for start in (0..data.len()).step_by(block) {
            for offset in 0..stride {
                let base = start + offset;
                for (t, out) in scratch.iter_mut().enumerate() {
                    let mut acc = Complex64::default();
                    for x in 0..p {
                        acc += data[base + x * stride] * roots[(t * x) % p];
                    }
                    *out = acc;
                }
                for (t, &v) in scratch.iter().enumerate() {
                    data[base + t * stride] = v;
                }
            }
        }
        stride = block;
    }
}

pub fn dft(f: &GFunction) -> Spectrum {
    let mut data: Vec<Complex64> = f.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    transform_in_place(&mut data, f.space, 1.0);
    let scale = 1.0 / f.space.size() as f64;
    for c in data.iter_mut() {
        *c *= scale;
    }
    Spectrum {
        space: f.space,
        coeffs: data,
    }
}

/// Inverse transform `f(x) = Σ_t f̂(χ_t) ω^{-t·x}`.
///
/// The result is a weighted set when every value lies in `[0, 1]` up to
/// [`REAL_TOLERANCE`] (values are clamped), and a signed function otherwise.
pub fn idft(s: &Spectrum) -> Result<GFunction> {
    let mut data = s.coeffs.clone();
    transform_in_place(&mut data, s.space, -1.0);
    let residue = data.iter().map(|c| c.im.abs()).fold(0.0, f64::max);
    if residue > REAL_TOLERANCE {
        return Err(Error::NonRealResult { residue });
    }
    let values: Vec<f64> = data.iter().map(|c| c.re).collect();
    let weighted = values
        .iter()
        .all(|&v| (-REAL_TOLERANCE..=1.0 + REAL_TOLERANCE).contains(&v));
    if weighted {
        GFunction::new(s.space, values.into_iter().map(|v| v.clamp(0.0, 1.0)).collect())
    } else {
        GFunction::signed(s.space, values)
    }
}

/// `f_H(x) = E_{y ∈ H+x} f(y)`.
pub fn average_over(f: &GFunction, h: &Subspace) -> Result<GFunction> {
    if h.space() != f.space {
        return Err(Error::SpaceMismatch);
    }
    Ok(average_over_partition(f, &h.cosets()?))
}

pub fn average_over_partition(f: &GFunction, cosets: &CosetPartition) -> GFunction {
    let mut values = vec![0.0; f.values.len()];
    for coset in cosets.iter() {
        let mean = coset.iter().map(|&x| f.values[x.0]).sum::<f64>() / coset.len() as f64;
        for &x in coset {
            values[x.0] = mean;
        }
    }
    GFunction {
        space: f.space,
        values,
        signed: f.signed,
    }
}

/// `max_t |(f-g)^(χ_t)|` with the first maximizing `t`; `f` and `g` are
/// δ-close exactly when the returned value is at most δ.
pub fn sup_fourier_gap(f: &GFunction, g: &GFunction) -> Result<(f64, Point)> {
    Ok(dft(&f.sub(g)?).sup_norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;
    use approx::assert_abs_diff_eq;
    use rand::Rng;

    fn sp(p: u32, n: u32) -> Space {
        Space::new(p, n).unwrap()
    }

    fn random_f(space: Space, seed: u64) -> GFunction {
        let mut rng = crate::rng::stream_rng(seed, 0);
        GFunction::from_fn(space, |_| rng.gen::<f64>()).unwrap()
    }

    #[test]
    fn rejects_out_of_range_values() {
        let s = sp(3, 1);
        assert!(GFunction::new(s, vec![0.0, 1.5, 0.2]).is_err());
        assert!(GFunction::new(s, vec![0.0, 0.5]).is_err());
        assert!(GFunction::signed(s, vec![0.0, -1.5, 0.2]).is_ok());
        assert!(GFunction::signed(s, vec![0.0, f64::NAN, 0.2]).is_err());
    }

    #[test]
    fn constant_has_point_mass_spectrum() {
        let s = sp(5, 2);
        let spec = dft(&GFunction::constant(s, 0.3).unwrap());
        assert_abs_diff_eq!(spec.coeff(Point(0)).re, 0.3, epsilon = 1e-14);
        for t in 1..s.size() {
            assert!(spec.coeff(Point(t)).norm() < 1e-14);
        }
    }

    #[test]
    fn point_mass_has_flat_spectrum() {
        let s = sp(3, 1);
        let spec = dft(&GFunction::indicator(s, [Point(0)]).unwrap());
        for c in spec.coeffs() {
            assert_abs_diff_eq!(c.re, 1.0 / 3.0, epsilon = 1e-15);
            assert_abs_diff_eq!(c.im, 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn hyperplane_indicator_spectrum() {
        let s = sp(3, 2);
        let f = GFunction::from_fn(s, |x| if s.coords(x)[0] == 0 { 1.0 } else { 0.0 }).unwrap();
        let fast = dft(&f);
        let slow = oracle::naive_dft(&f).unwrap();
        for t in s.points() {
            let expected = if s.coords(t)[1] == 0 { 1.0 / 3.0 } else { 0.0 };
            assert_abs_diff_eq!(fast.coeff(t).re, expected, epsilon = 1e-12);
            assert!((fast.coeff(t) - slow.coeff(t)).norm() < 1e-12);
        }
    }

    #[test]
    fn fast_matches_naive() {
        for (p, n) in [(3, 4), (5, 3), (7, 2), (3, 7)] {
            let s = sp(p, n);
            let f = random_f(s, 11 + p as u64 * 7 + n as u64);
            let fast = dft(&f);
            let slow = oracle::naive_dft(&f).unwrap();
            for t in s.points() {
                assert!((fast.coeff(t) - slow.coeff(t)).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn conjugate_symmetry_for_real_input() {
        let s = sp(5, 3);
        let spec = dft(&random_f(s, 5));
        for t in s.points() {
            assert!((spec.coeff(s.neg(t)) - spec.coeff(t).conj()).norm() < 1e-13);
        }
    }

    #[test]
    fn inverse_round_trip() {
        for n in 1..=6 {
            let s = sp(3, n);
            let f = random_f(s, 100 + n as u64);
            let back = idft(&dft(&f)).unwrap();
            assert!(!back.is_signed());
            for (a, b) in f.values().iter().zip(back.values()) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn inverse_of_zero_and_constant() {
        let s = sp(3, 3);
        let zero = Spectrum::new(s, vec![Complex64::default(); 27]).unwrap();
        assert!(idft(&zero).unwrap().values().iter().all(|&v| v == 0.0));
        let back = idft(&dft(&GFunction::constant(s, 0.7).unwrap())).unwrap();
        assert!(back.values().iter().all(|&v| (v - 0.7).abs() < 1e-12));
    }

    #[test]
    fn corrupted_spectrum_is_not_real() {
        let s = sp(3, 1);
        let mut coeffs = vec![Complex64::default(); 3];
        coeffs[1] = Complex64::new(0.0, 0.5);
        let err = idft(&Spectrum::new(s, coeffs).unwrap()).unwrap_err();
        assert!(matches!(err, Error::NonRealResult { .. }));
    }

    #[test]
    fn averaging_examples() {
        let s = sp(3, 2);
        let f = random_f(s, 3);
        let g = average_over(&f, &Subspace::full(s)).unwrap();
        assert!(g.values().iter().all(|&v| (v - f.density()).abs() < 1e-15));
        let z = average_over(&f, &Subspace::zero(s)).unwrap();
        assert_eq!(z.values(), f.values());

        let h = Subspace::from_constraints(s, &[s.point(&[1, 0]).unwrap()]);
        let point = GFunction::indicator(s, [Point(0)]).unwrap();
        let avg = average_over(&point, &h).unwrap();
        for x in s.points() {
            let expected = if s.coords(x)[0] == 0 { 1.0 / 3.0 } else { 0.0 };
            assert_abs_diff_eq!(avg.value(x), expected, epsilon = 1e-15);
        }
    }

    #[test]
    fn averaging_keeps_density_and_projects_spectrum() {
        let s = sp(3, 5);
        let f = random_f(s, 9);
        let h = Subspace::from_constraints(s, &[Point(5), Point(77)]);
        let fh = average_over(&f, &h).unwrap();
        assert_abs_diff_eq!(fh.density(), f.density(), epsilon = 1e-12);
        let (sf, sh) = (dft(&f), dft(&fh));
        for t in s.points() {
            // t ∈ H^⊥ iff t·x = 0 on all of H
            let in_perp = h.coset_points(Point::ZERO).iter().all(|&x| s.dot(t, x) == 0);
            let expected = if in_perp { sf.coeff(t) } else { Complex64::default() };
            assert!((sh.coeff(t) - expected).norm() < 1e-12);
        }
    }

    #[test]
    fn gap_examples() {
        let s = sp(3, 2);
        let f = random_f(s, 21);
        assert_eq!(sup_fourier_gap(&f, &f).unwrap(), (0.0, Point(0)));
        let a = GFunction::constant(s, 0.2).unwrap();
        let b = GFunction::constant(s, 0.7).unwrap();
        let (gap, t) = sup_fourier_gap(&a, &b).unwrap();
        assert_abs_diff_eq!(gap, 0.5, epsilon = 1e-15);
        assert_eq!(t, Point(0));

        let h = Subspace::from_constraints(s, &[s.point(&[1, 0]).unwrap()]);
        let coset = GFunction::from_fn(s, |x| if s.coords(x)[0] == 0 { 1.0 } else { 0.0 }).unwrap();
        let (gap, _) = sup_fourier_gap(&coset, &average_over(&coset, &h).unwrap()).unwrap();
        assert!(gap < 1e-15);
    }
}
