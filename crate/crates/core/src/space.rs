//! The ambient group `F_p^n`, its points, subspaces and coset partitions.
//!
//! Points are stored as mixed-radix indices, little-endian: coordinate 1 is
//! the least significant digit. Subspaces are stored by their dual
//! constraints in reduced row-echelon form, so two subspaces are equal exactly
//! when their constraint matrices are equal.

use std::fmt;

use crate::{Error, Result};

/// Largest number of points a dense [`Space`] may have.
pub const MAX_POINTS: usize = 1 << 32;

/// Default cap on the number of cosets enumerated by [`Subspace::cosets`].
pub const DEFAULT_COSET_BUDGET: usize = 1 << 24;

pub fn is_odd_prime(p: u32) -> bool {
    if p < 3 || p % 2 == 0 {
        return false;
    }
    let mut k = 3u32;
    while k.saturating_mul(k) <= p {
        if p % k == 0 {
            return false;
        }
        k += 2;
    }
    true
}

pub(crate) fn pow_mod(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1u64;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % p;
        }
        base = base * base % p;
        exp >>= 1;
    }
    acc
}

fn inv_mod(a: u32, p: u32) -> u32 {
    debug_assert!(a % p != 0);
    pow_mod(a as u64, (p - 2) as u64, p as u64) as u32
}

/// A point of `F_p^n`, identified with its mixed-radix index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Point(pub usize);

impl Point {
    pub const ZERO: Point = Point(0);

    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The vector space `F_p^n` for an odd prime `p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Space {
    p: u32,
    n: u32,
    size: usize,
}

impl Space {
    pub fn new(p: u32, n: u32) -> Result<Self> {
        if !is_odd_prime(p) {
            return Err(Error::InvalidSpace(format!("p = {p} is not an odd prime")));
        }
        let mut size = 1usize;
        for _ in 0..n {
            size = size
                .checked_mul(p as usize)
                .filter(|&s| s <= MAX_POINTS)
                .ok_or_else(|| Error::InvalidSpace(format!("{p}^{n} points do not fit a dense space")))?;
        }
        Ok(Space { p, n, size })
    }

    #[inline]
    pub fn p(&self) -> u32 {
        self.p
    }

    #[inline]
    pub fn n(&self) -> u32 {
        self.n
    }

    /// `N = p^n`.
    #[inline]
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn points(&self) -> impl Iterator<Item = Point> {
        (0..self.size).map(Point)
    }

    pub fn point(&self, coords: &[u32]) -> Result<Point> {
        if coords.len() != self.n as usize {
            return Err(Error::Coordinate(format!(
                "expected {} coordinates, got {}",
                self.n,
                coords.len()
            )));
        }
        let mut index = 0usize;
        for &c in coords.iter().rev() {
            if c >= self.p {
                return Err(Error::Coordinate(format!("entry {c} is not in [0, {})", self.p)));
            }
            index = index * self.p as usize + c as usize;
        }
        Ok(Point(index))
    }

    pub fn coords(&self, x: Point) -> Vec<u32> {
        let mut out = Vec::with_capacity(self.n as usize);
        self.write_coords(x, &mut out);
        out
    }

    pub(crate) fn write_coords(&self, x: Point, out: &mut Vec<u32>) {
        out.clear();
        let p = self.p as usize;
        let mut rest = x.0;
        for _ in 0..self.n {
            out.push((rest % p) as u32);
            rest /= p;
        }
    }

    pub fn contains(&self, x: Point) -> bool {
        x.0 < self.size
    }

    /// Coordinatewise `a·x + b·y` with scalar coefficients in `F_p`.
    pub fn combine(&self, a: u32, x: Point, b: u32, y: Point) -> Point {
        let p = self.p as usize;
        let (a, b) = (a as usize % p, b as usize % p);
        let (mut x, mut y) = (x.0, y.0);
        let mut out = 0usize;
        let mut weight = 1usize;
        for _ in 0..self.n {
            let digit = (a * (x % p) + b * (y % p)) % p;
            out += digit * weight;
            weight *= p;
            x /= p;
            y /= p;
        }
        Point(out)
    }

    pub fn add(&self, x: Point, y: Point) -> Point {
        self.combine(1, x, 1, y)
    }

    pub fn sub(&self, x: Point, y: Point) -> Point {
        self.combine(1, x, self.p - 1, y)
    }

    pub fn neg(&self, x: Point) -> Point {
        self.combine(self.p - 1, x, 0, Point::ZERO)
    }

    pub fn scale(&self, c: u32, x: Point) -> Point {
        self.combine(c, x, 0, Point::ZERO)
    }

    pub fn dot(&self, x: Point, y: Point) -> u32 {
        let p = self.p as usize;
        let (mut x, mut y) = (x.0, y.0);
        let mut acc = 0usize;
        for _ in 0..self.n {
            acc = (acc + (x % p) * (y % p)) % p;
            x /= p;
            y /= p;
        }
        acc as u32
    }

    /// Restriction of `x` to its first `k` coordinates, as a point of `F_p^k`.
    pub fn prefix(&self, x: Point, k: u32) -> Point {
        debug_assert!(k <= self.n);
        Point(x.0 % (self.p as usize).pow(k))
    }
}

/// A linear subspace `H = {x : t·x = 0 for every constraint t}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Subspace {
    space: Space,
    /// Constraint rows in reduced row-echelon form, each of length `n`.
    rows: Vec<Vec<u32>>,
    pivots: Vec<usize>,
}

impl Subspace {
    /// The whole space (no constraints).
    pub fn full(space: Space) -> Self {
        Subspace {
            space,
            rows: Vec::new(),
            pivots: Vec::new(),
        }
    }

    /// The trivial subspace `{0}`.
    pub fn zero(space: Space) -> Self {
        let rows = (0..space.n() as usize)
            .map(|k| {
                let mut row = vec![0; space.n() as usize];
                row[k] = 1;
                row
            })
            .collect();
        Self::from_rows(space, rows)
    }

    /// Annihilator of the given dual vectors.
    pub fn from_constraints(space: Space, ts: &[Point]) -> Self {
        let rows = ts.iter().map(|&t| space.coords(t)).collect();
        Self::from_rows(space, rows)
    }

    pub fn from_rows(space: Space, rows: Vec<Vec<u32>>) -> Self {
        let (rows, pivots) = rref(rows, space.p(), space.n() as usize);
        Subspace { space, rows, pivots }
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn codim(&self) -> usize {
        self.rows.len()
    }

    pub fn dim(&self) -> usize {
        self.space.n() as usize - self.rows.len()
    }

    /// `|H| = p^{dim}`.
    pub fn size(&self) -> usize {
        (self.space.p() as usize).pow(self.dim() as u32)
    }

    pub fn rows(&self) -> &[Vec<u32>] {
        &self.rows
    }

    pub fn constraints(&self) -> Vec<Point> {
        self.rows
            .iter()
            .map(|row| self.space.point(row).expect("echelon rows are reduced mod p"))
            .collect()
    }

    pub fn contains(&self, x: Point) -> bool {
        let coords = self.space.coords(x);
        self.rows.iter().all(|row| dot_mod(row, &coords, self.space.p()) == 0)
    }

    /// `H ∩ K`, by concatenating constraints.
    pub fn intersect(&self, other: &Subspace) -> Result<Subspace> {
        if self.space != other.space {
            return Err(Error::SpaceMismatch);
        }
        let rows = self.rows.iter().chain(other.rows.iter()).cloned().collect();
        Ok(Self::from_rows(self.space, rows))
    }

    /// Adds unit-vector constraints on free coordinates, lowest coordinate
    /// first, until the codimension reaches `target_codim`.
    pub fn pad(&self, target_codim: usize) -> Result<Subspace> {
        let n = self.space.n() as usize;
        if target_codim < self.codim() || target_codim > n {
            return Err(Error::InvalidParameter(format!(
                "target codimension {target_codim} outside [{}, {n}]",
                self.codim()
            )));
        }
        let mut rows = self.rows.clone();
        for col in self.free_columns().into_iter().take(target_codim - self.codim()) {
            let mut row = vec![0; n];
            row[col] = 1;
            rows.push(row);
        }
        Ok(Self::from_rows(self.space, rows))
    }

    /// Coordinates not used as pivots; a point of `H` is determined by them.
    pub fn free_columns(&self) -> Vec<usize> {
        let n = self.space.n() as usize;
        let mut is_pivot = vec![false; n];
        for &c in &self.pivots {
            is_pivot[c] = true;
        }
        (0..n).filter(|&c| !is_pivot[c]).collect()
    }

    /// Basis `b_1, …, b_dim` of `H`; `b_i` has a 1 at the `i`-th free column
    /// and 0 at the other free columns.
    pub fn basis(&self) -> Vec<Point> {
        let p = self.space.p();
        let n = self.space.n() as usize;
        self.free_columns()
            .into_iter()
            .map(|free| {
                let mut v = vec![0u32; n];
                v[free] = 1;
                for (row, &pivot) in self.rows.iter().zip(&self.pivots) {
                    v[pivot] = (p - row[free]) % p;
                }
                self.space.point(&v).expect("basis entries are reduced mod p")
            })
            .collect()
    }

    /// Points of the coset `H + rep`, ordered by local coordinates: the point
    /// `rep + Σ c_i b_i` sits at position `Σ c_i p^{i-1}`.
    pub fn coset_points(&self, rep: Point) -> Vec<Point> {
        let p = self.space.p() as usize;
        let mut points = Vec::with_capacity(self.size());
        points.push(rep);
        for b in self.basis() {
            let len = points.len();
            for c in 1..p {
                let step = self.space.scale(c as u32, b);
                for k in 0..len {
                    let next = self.space.add(points[k], step);
                    points.push(next);
                }
            }
        }
        points
    }

    /// Lifts a constraint on local coordinates (free columns) to a row of
    /// `F_p^n`; the result cuts out a subspace of `H` when intersected with it.
    pub fn lift_local_row(&self, local: &[u32]) -> Vec<u32> {
        let mut row = vec![0u32; self.space.n() as usize];
        for (&col, &s) in self.free_columns().iter().zip(local) {
            row[col] = s;
        }
        row
    }

    pub fn cosets(&self) -> Result<CosetPartition> {
        self.cosets_with_budget(DEFAULT_COSET_BUDGET)
    }

    pub fn cosets_with_budget(&self, budget: usize) -> Result<CosetPartition> {
        let count = (self.space.p() as u128).pow(self.codim() as u32);
        if count > budget as u128 {
            return Err(Error::BudgetExceeded {
                what: "coset",
                needed: count,
                budget: budget as u128,
            });
        }
        CosetPartition::build(self.clone(), count as usize)
    }
}

fn dot_mod(a: &[u32], b: &[u32], p: u32) -> u32 {
    let p = p as u64;
    (a.iter().zip(b).map(|(&x, &y)| x as u64 * y as u64).sum::<u64>() % p) as u32
}

/// Reduced row-echelon form over `F_p`; zero rows are dropped.
pub(crate) fn rref(mut rows: Vec<Vec<u32>>, p: u32, n: usize) -> (Vec<Vec<u32>>, Vec<usize>) {
    for row in rows.iter_mut() {
        row.resize(n, 0);
        for v in row.iter_mut() {
            *v %= p;
        }
    }
    let mut pivots = Vec::new();
    let mut rank = 0usize;
    for col in 0..n {
        let Some(found) = (rank..rows.len()).find(|&r| rows[r][col] != 0) else {
            continue;
        };
        rows.swap(rank, found);
        let inv = inv_mod(rows[rank][col], p);
        for v in rows[rank].iter_mut() {
            *v = (*v as u64 * inv as u64 % p as u64) as u32;
        }
        let pivot_row = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r == rank || row[col] == 0 {
                continue;
            }
            let factor = row[col] as u64;
            for (v, &q) in row.iter_mut().zip(&pivot_row) {
                *v = ((*v as u64 + (p as u64 - factor) * q as u64) % p as u64) as u32;
            }
        }
        pivots.push(col);
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rows.truncate(rank);
    (rows, pivots)
}

/// Rank of a list of vectors over `F_p`.
pub(crate) fn rank_mod(rows: Vec<Vec<u32>>, p: u32, n: usize) -> usize {
    rref(rows, p, n).0.len()
}

/// The partition of `F_p^n` into the cosets of a subspace.
#[derive(Debug, Clone)]
pub struct CosetPartition {
    subspace: Subspace,
    representatives: Vec<Point>,
    /// Members grouped by coset; coset `j` occupies `[j·|H|, (j+1)·|H|)`.
    members: Vec<Point>,
    labels: Vec<u32>,
}

impl CosetPartition {
    fn build(subspace: Subspace, count: usize) -> Result<Self> {
        let space = subspace.space;
        let p = space.p() as usize;
        let mut ids = vec![u32::MAX; count];
        let mut labels = vec![0u32; space.size()];
        let mut representatives = Vec::with_capacity(count);
        let mut coords = Vec::with_capacity(space.n() as usize);
        for x in space.points() {
            space.write_coords(x, &mut coords);
            let mut syndrome = 0usize;
            for row in subspace.rows.iter().rev() {
                syndrome = syndrome * p + dot_mod(row, &coords, space.p()) as usize;
            }
            if ids[syndrome] == u32::MAX {
                ids[syndrome] = representatives.len() as u32;
                representatives.push(x);
            }
            labels[x.0] = ids[syndrome];
        }
        debug_assert_eq!(representatives.len(), count);
        let mut members = Vec::with_capacity(space.size());
        for &rep in &representatives {
            members.extend(subspace.coset_points(rep));
        }
        Ok(CosetPartition {
            subspace,
            representatives,
            members,
            labels,
        })
    }

    pub fn subspace(&self) -> &Subspace {
        &self.subspace
    }

    /// Number of cosets, `p^{codim}`.
    pub fn len(&self) -> usize {
        self.representatives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.representatives.is_empty()
    }

    pub fn coset_size(&self) -> usize {
        self.subspace.size()
    }

    /// Minimal-index representatives, in increasing order.
    pub fn representatives(&self) -> &[Point] {
        &self.representatives
    }

    /// Members of coset `j` in local-coordinate order (see
    /// [`Subspace::coset_points`]).
    pub fn members(&self, j: usize) -> &[Point] {
        let m = self.coset_size();
        &self.members[j * m..(j + 1) * m]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[Point]> {
        self.members.chunks(self.coset_size())
    }

    pub fn coset_of(&self, x: Point) -> usize {
        self.labels[x.0] as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sp(p: u32, n: u32) -> Space {
        Space::new(p, n).unwrap()
    }

    #[test]
    fn rejects_bad_primes() {
        for p in [0, 1, 2, 4, 9, 15, 21] {
            assert!(Space::new(p, 2).is_err(), "p = {p}");
        }
        assert!(Space::new(3, 40).is_err());
        assert!(Space::new(7, 0).is_ok());
    }

    #[test]
    fn mixed_radix_examples() {
        assert_eq!(sp(3, 2).point(&[0, 0]).unwrap(), Point(0));
        assert_eq!(sp(3, 2).point(&[2, 1]).unwrap(), Point(5));
        assert_eq!(sp(5, 3).point(&[4, 4, 4]).unwrap(), Point(124));
        assert_eq!(sp(5, 3).coords(Point(124)), vec![4, 4, 4]);
        assert!(sp(3, 2).point(&[3, 0]).is_err());
        assert!(sp(3, 2).point(&[1]).is_err());
    }

    #[test]
    fn coordinate_bijection() {
        let s = sp(5, 3);
        for x in s.points() {
            assert_eq!(s.point(&s.coords(x)).unwrap(), x);
        }
    }

    #[test]
    fn arithmetic_laws() {
        let s = sp(7, 3);
        let (x, y, z) = (Point(100), Point(281), Point(7));
        assert_eq!(s.add(s.add(x, y), z), s.add(x, s.add(y, z)));
        assert_eq!(s.add(x, s.neg(x)), Point::ZERO);
        assert_eq!(s.scale(7, x), Point::ZERO);
        assert_eq!(s.sub(s.add(x, y), y), x);
        assert_eq!(s.prefix(s.point(&[1, 2, 3]).unwrap(), 2), sp(7, 2).point(&[1, 2]).unwrap());
    }

    #[test]
    fn constraint_examples() {
        let s = sp(3, 2);
        let full = Subspace::from_constraints(s, &[]);
        assert_eq!(full.codim(), 0);
        assert_eq!(full, Subspace::full(s));

        let h = Subspace::from_constraints(s, &[s.point(&[1, 0]).unwrap()]);
        assert_eq!(h.codim(), 1);
        assert_eq!(h.size(), 3);
        let members: Vec<_> = s.points().filter(|&x| h.contains(x)).collect();
        assert_eq!(members, vec![Point(0), Point(3), Point(6)]);

        let dup = Subspace::from_constraints(s, &[s.point(&[1, 0]).unwrap(), s.point(&[2, 0]).unwrap()]);
        assert_eq!(dup, h);
    }

    #[test]
    fn coset_examples() {
        let s = sp(3, 2);
        let g = Subspace::full(s).cosets().unwrap();
        assert_eq!(g.len(), 1);
        assert_eq!(g.representatives(), &[Point(0)]);

        let h = Subspace::from_constraints(s, &[s.point(&[1, 0]).unwrap()]);
        let c = h.cosets().unwrap();
        assert_eq!(c.representatives(), &[Point(0), Point(1), Point(2)]);

        let z = Subspace::zero(s).cosets().unwrap();
        assert_eq!(z.len(), 9);
        assert!(z.iter().all(|m| m.len() == 1));
    }

    #[test]
    fn coset_budget() {
        let s = sp(3, 4);
        assert!(matches!(
            Subspace::zero(s).cosets_with_budget(10),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn pad_examples() {
        let s = sp(3, 2);
        let h = Subspace::from_constraints(s, &[s.point(&[1, 0]).unwrap()]);
        assert_eq!(h.pad(1).unwrap(), h);
        assert_eq!(h.pad(2).unwrap(), Subspace::zero(s));
        assert!(h.pad(0).is_err());
        assert!(h.pad(3).is_err());

        let s4 = sp(3, 4);
        let h4 = Subspace::from_constraints(s4, &[s4.point(&[1, 1, 0, 2]).unwrap()]);
        let k = h4.pad(3).unwrap();
        assert_eq!(k.codim(), 3);
        let inside: Vec<_> = s4.points().filter(|&x| k.contains(x)).collect();
        assert_eq!(inside.len(), 3);
        assert!(inside.iter().all(|&x| h4.contains(x)));
    }

    #[test]
    fn basis_spans_subspace() {
        let s = sp(5, 3);
        let h = Subspace::from_constraints(s, &[s.point(&[1, 2, 3]).unwrap()]);
        let pts = h.coset_points(Point::ZERO);
        assert_eq!(pts.len(), 25);
        let mut sorted = pts.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), 25);
        assert!(pts.iter().all(|&x| h.contains(x)));
    }

    #[test]
    fn cosets_cover_exhaustively() {
        let s = sp(3, 5);
        let h = Subspace::from_constraints(s, &[Point(17), Point(40), Point(17 + 40)]);
        let part = h.cosets().unwrap();
        let mut seen = vec![0u8; s.size()];
        for (j, coset) in part.iter().enumerate() {
            assert_eq!(coset[0], part.representatives()[j]);
            assert_eq!(*coset.iter().min().unwrap(), coset[0]);
            for &x in coset {
                seen[x.0] += 1;
                assert_eq!(part.coset_of(x), j);
                assert!(h.contains(s.sub(x, coset[0])));
            }
        }
        assert!(seen.iter().all(|&c| c == 1));
    }
}
