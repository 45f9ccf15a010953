//! Exact lattice polytopes: supports, `Γ₀(f)`, `Γ⁺(f)`, face lattices and bad faces.
//!
//! Everything here is integer or rational; no floats. Faces are identified by the set of
//! input lattice points they contain, which is stored as a bitmask over the polytope's
//! sorted point list.

use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeMap, BTreeSet};
use std::hash::{Hash, Hasher};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::lp::{self, Constraint, Rational};
use crate::mixed_poly::MixedPolynomial;
use crate::{Error, Result};

type Mask = u128;
const MAX_POINTS: usize = 128;

/// The set `supp(f) = {ν + μ : c_{ν,μ} ≠ 0}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupportSet {
    pub n: usize,
    pub points: BTreeSet<Vec<u32>>,
}

impl SupportSet {
    pub fn new(n: usize, points: impl IntoIterator<Item = Vec<u32>>) -> Result<Self> {
        let points: BTreeSet<Vec<u32>> = points.into_iter().collect();
        if let Some(p) = points.iter().find(|p| p.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: p.len(),
            });
        }
        Ok(Self { n, points })
    }

    pub fn contains_origin(&self) -> bool {
        self.points.iter().any(|p| p.iter().all(|&x| x == 0))
    }

    /// `conv(supp ∖ {0})`.
    pub fn hull(&self) -> Result<LatticePolytope> {
        let pts: Vec<Vec<u32>> = self
            .points
            .iter()
            .filter(|p| p.iter().any(|&x| x > 0))
            .cloned()
            .collect();
        if pts.is_empty() {
            return Err(Error::EmptySupport);
        }
        LatticePolytope::new(PolytopeKind::SupportHull, self.n, pts)
    }

    /// `Γ₀ = conv({0} ∪ supp)`.
    pub fn newton_polyhedron(&self) -> Result<LatticePolytope> {
        let mut pts: BTreeSet<Vec<u32>> = self.points.clone();
        pts.insert(vec![0; self.n]);
        LatticePolytope::new(PolytopeKind::NewtonPolyhedron, self.n, pts.into_iter().collect())
    }

    /// Every point has a positive coordinate axis representative.
    pub fn is_convenient(&self) -> bool {
        (0..self.n).all(|i| {
            self.points
                .iter()
                .any(|p| p[i] > 0 && p.iter().enumerate().all(|(j, &x)| j == i || x == 0))
        })
    }

    fn key(&self, kind: PolytopeKind) -> u64 {
        let pts: Vec<Vec<u32>> = match kind {
            PolytopeKind::SupportHull => self
                .points
                .iter()
                .filter(|p| p.iter().any(|&x| x > 0))
                .cloned()
                .collect(),
            PolytopeKind::NewtonPolyhedron => {
                let mut s = self.points.clone();
                s.insert(vec![0; self.n]);
                s.into_iter().collect()
            }
            PolytopeKind::Hull => self.points.iter().cloned().collect(),
        };
        polytope_key(kind, &pts)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolytopeKind {
    /// `Γ₀(f)`
    NewtonPolyhedron,
    /// `conv(supp(f) ∖ {0})`
    SupportHull,
    /// Any other lattice point configuration.
    Hull,
}

/// A non-zero integer linear form `l_p(x) = Σ pᵢ xᵢ`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LinearFunctional {
    coeffs: Vec<BigInt>,
}

impl LinearFunctional {
    pub fn new(coeffs: Vec<BigInt>) -> Result<Self> {
        if coeffs.iter().all(Zero::is_zero) {
            return Err(Error::ZeroFunctional);
        }
        Ok(Self { coeffs })
    }

    pub fn from_i64(coeffs: &[i64]) -> Result<Self> {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn apply(&self, x: &[u32]) -> BigInt {
        dot(&self.coeffs, x)
    }
}

/// A face of a [`LatticePolytope`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Face {
    pub kind: PolytopeKind,
    /// Extreme points of the face, sorted.
    pub vertices: Vec<Vec<u32>>,
    /// All input lattice points lying on the face, sorted.
    pub points: Vec<Vec<u32>>,
    pub dim: usize,
    /// Integer functional minimised over the polytope exactly on this face. Zero only
    /// for the improper face of a full-dimensional polytope.
    pub functional: Vec<BigInt>,
    /// Minimum value of `functional` over the polytope.
    pub value: BigInt,
    pub contains_origin: bool,
    pub on_gamma_plus: bool,
    /// A functional certifying that the face is bad (only set by [`bad_faces`]).
    pub bad_witness: Option<Vec<BigInt>>,
    owner: u64,
    mask: Mask,
}

impl Face {
    pub fn is_bad(&self) -> bool {
        self.bad_witness.is_some()
    }

    /// `0 ∈ aff(Δ)`, i.e. the linear and affine spans have the same dimension.
    pub fn affine_span_contains_origin(&self) -> bool {
        linear_rank(&self.vertices) == self.dim
    }

    /// Integer basis of `{a : a·v = 0 for every vertex v}`; the real torus directions
    /// `z ↦ t^a ∘ z` that fix `f_Δ` when the face's span meets the origin.
    pub fn annihilator(&self) -> Vec<Vec<BigInt>> {
        let n = self.vertices.first().map_or(0, Vec::len);
        let rows: Vec<Vec<Rational>> = self.vertices.iter().map(|v| to_rat(v)).collect();
        lp::nullspace(&rows, n)
    }

    pub fn contains_point(&self, p: &[u32]) -> bool {
        self.points.binary_search_by(|q| q.as_slice().cmp(p)).is_ok()
    }

    /// Whether `other` is a face of this face (same polytope, point subset).
    pub fn contains_face(&self, other: &Face) -> bool {
        self.owner == other.owner && other.mask & !self.mask == 0
    }
}

/// Convex hull of finitely many lattice points together with its full face lattice.
#[derive(Clone, Debug)]
pub struct LatticePolytope {
    kind: PolytopeKind,
    n: usize,
    key: u64,
    points: Vec<Vec<u32>>,
    vertex_mask: Mask,
    dim: usize,
    faces: Vec<Face>,
}

impl LatticePolytope {
    pub fn new(kind: PolytopeKind, n: usize, points: Vec<Vec<u32>>) -> Result<Self> {
        let points: Vec<Vec<u32>> = points.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
        if points.is_empty() {
            return Err(Error::EmptySupport);
        }
        if let Some(p) = points.iter().find(|p| p.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: p.len(),
            });
        }
        if points.len() > MAX_POINTS {
            return Err(Error::InvalidConfig(format!(
                "at most {MAX_POINTS} lattice points are supported, got {}",
                points.len()
            )));
        }
        let key = polytope_key(kind, &points);
        let mut poly = Self {
            kind,
            n,
            key,
            points,
            vertex_mask: 0,
            dim: 0,
            faces: Vec::new(),
        };
        poly.build();
        Ok(poly)
    }

    pub fn kind(&self) -> PolytopeKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> &[Vec<u32>] {
        &self.points
    }

    pub fn vertices(&self) -> Vec<Vec<u32>> {
        self.points_of(self.vertex_mask)
    }

    /// All faces, ordered by dimension and then by vertex list.
    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn improper_face(&self) -> &Face {
        self.faces.last().expect("a polytope has at least its improper face")
    }

    pub fn face_with_vertices(&self, vertices: &[Vec<u32>]) -> Option<&Face> {
        let mut want = vertices.to_vec();
        want.sort();
        self.faces.iter().find(|f| f.vertices == want)
    }

    /// The face `{x : face(a)}` obtained as the intersection of two faces.
    pub fn meet(&self, a: &Face, b: &Face) -> Option<&Face> {
        let m = a.mask & b.mask;
        self.faces.iter().find(|f| f.mask == m)
    }

    fn points_of(&self, mask: Mask) -> Vec<Vec<u32>> {
        (0..self.points.len())
            .filter(|&i| mask >> i & 1 == 1)
            .map(|i| self.points[i].clone())
            .collect()
    }

    fn all_mask(&self) -> Mask {
        if self.points.len() == MAX_POINTS {
            Mask::MAX
        } else {
            (1 << self.points.len()) - 1
        }
    }

    fn build(&mut self) {
        let p0 = &self.points[0];
        let diffs: Vec<Vec<Rational>> = self.points[1..]
            .iter()
            .map(|p| {
                p.iter()
                    .zip(p0)
                    .map(|(&a, &b)| lp::rat(i64::from(a) - i64::from(b)))
                    .collect()
            })
            .collect();
        let pivots = lp::pivot_columns(&diffs);
        let k = pivots.len();
        self.dim = k;

        // Facets in the projected full-dimensional coordinates (the pivot columns).
        let proj: Vec<Vec<BigInt>> = self
            .points
            .iter()
            .map(|p| pivots.iter().map(|&c| BigInt::from(p[c])).collect())
            .collect();
        let mut facets: BTreeMap<Mask, Vec<BigInt>> = BTreeMap::new();
        if k > 0 {
            for subset in combinations(self.points.len(), k) {
                let base = &proj[subset[0]];
                let rows: Vec<Vec<BigInt>> = subset[1..]
                    .iter()
                    .map(|&i| proj[i].iter().zip(base).map(|(a, b)| a - b).collect())
                    .collect();
                let mut normal = cross(&rows, k);
                if normal.iter().all(Zero::is_zero) {
                    continue;
                }
                let level = dot_big(&normal, base);
                let mut sign = 0i8;
                let mut mask: Mask = 0;
                let mut ok = true;
                for (i, q) in proj.iter().enumerate() {
                    let d = dot_big(&normal, q) - &level;
                    if d.is_zero() {
                        mask |= 1 << i;
                        continue;
                    }
                    let s = if d.is_positive() { 1 } else { -1 };
                    if sign == 0 {
                        sign = s;
                    } else if sign != s {
                        ok = false;
                        break;
                    }
                }
                if !ok || sign == 0 {
                    continue;
                }
                if sign < 0 {
                    normal.iter_mut().for_each(|c| *c = -c.clone());
                }
                facets.entry(mask).or_insert(normal);
            }
        }

        // Lift facet normals back to ℤⁿ (zero outside the pivot coordinates).
        let lifted: Vec<(Mask, Vec<BigInt>)> = facets
            .into_iter()
            .map(|(m, a)| {
                let mut full = vec![BigInt::zero(); self.n];
                for (t, &c) in pivots.iter().enumerate() {
                    full[c] = a[t].clone();
                }
                (m, primitive(&full))
            })
            .collect();

        // Close under intersection.
        let mut masks: BTreeSet<Mask> = lifted.iter().map(|(m, _)| *m).collect();
        let mut frontier: Vec<Mask> = masks.iter().copied().collect();
        while let Some(m) = frontier.pop() {
            let current: Vec<Mask> = masks.iter().copied().collect();
            for other in current {
                let meet = m & other;
                if meet != 0 && masks.insert(meet) {
                    frontier.push(meet);
                }
            }
        }
        masks.insert(self.all_mask());

        // A point is a vertex iff it is a face by itself.
        self.vertex_mask = if k == 0 {
            1
        } else {
            masks.iter().filter(|m| m.count_ones() == 1).fold(0, |acc, m| acc | m)
        };

        let origin_idx = self.points.iter().position(|p| p.iter().all(|&x| x == 0));
        let mut faces: Vec<Face> = masks
            .into_iter()
            .map(|mask| {
                let mut functional = vec![BigInt::zero(); self.n];
                for (fm, a) in &lifted {
                    if mask & !fm == 0 {
                        for (s, c) in functional.iter_mut().zip(a) {
                            *s += c;
                        }
                    }
                }
                let functional = primitive(&functional);
                let vertices = self.points_of(mask & self.vertex_mask);
                let points = self.points_of(mask);
                let value = dot(&functional, &points[0]);
                let contains_origin = origin_idx.is_some_and(|o| mask >> o & 1 == 1);
                Face {
                    kind: self.kind,
                    dim: affine_rank(&vertices),
                    vertices,
                    points,
                    functional,
                    value,
                    contains_origin,
                    on_gamma_plus: self.kind == PolytopeKind::NewtonPolyhedron && !contains_origin,
                    bad_witness: None,
                    owner: self.key,
                    mask,
                }
            })
            .collect();
        faces.sort_by(|a, b| (a.dim, &a.vertices).cmp(&(b.dim, &b.vertices)));
        self.faces = faces;
    }
}

fn polytope_key(kind: PolytopeKind, points: &[Vec<u32>]) -> u64 {
    let mut h = DefaultHasher::new();
    kind.hash(&mut h);
    points.hash(&mut h);
    h.finish()
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k <= n {
        rec(0, n, k, &mut Vec::with_capacity(k), &mut out);
    }
    out
}

/// Generalised cross product of `k − 1` vectors in `ℤᵏ`.
fn cross(rows: &[Vec<BigInt>], k: usize) -> Vec<BigInt> {
    (0..k)
        .map(|col| {
            let minor: Vec<Vec<BigInt>> = rows
                .iter()
                .map(|r| {
                    r.iter()
                        .enumerate()
                        .filter(|(j, _)| *j != col)
                        .map(|(_, v)| v.clone())
                        .collect()
                })
                .collect();
            let d = det(minor);
            if col % 2 == 0 {
                d
            } else {
                -d
            }
        })
        .collect()
}

/// Fraction-free (Bareiss) determinant.
fn det(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            let Some(p) = (k + 1..n).find(|&i| !m[i][k].is_zero()) else {
                return BigInt::zero();
            };
            m.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&m[i][j] * &m[k][k] - &m[i][k] * &m[k][j]) / &prev;
                m[i][j] = v;
            }
        }
        prev = m[k][k].clone();
    }
    sign * &m[n - 1][n - 1]
}

fn dot(a: &[BigInt], x: &[u32]) -> BigInt {
    a.iter().zip(x).map(|(c, &v)| c * BigInt::from(v)).sum()
}

fn dot_big(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn primitive(v: &[BigInt]) -> Vec<BigInt> {
    let r: Vec<Rational> = v.iter().map(|x| BigRational::from_integer(x.clone())).collect();
    lp::primitive_integer(&r)
}

fn to_rat(v: &[u32]) -> Vec<Rational> {
    v.iter().map(|&x| lp::rat(i64::from(x))).collect()
}

fn linear_rank(points: &[Vec<u32>]) -> usize {
    let rows: Vec<Vec<Rational>> = points.iter().map(|p| to_rat(p)).collect();
    lp::rank(&rows)
}

fn affine_rank(points: &[Vec<u32>]) -> usize {
    let Some(p0) = points.first() else { return 0 };
    let rows: Vec<Vec<Rational>> = points[1..]
        .iter()
        .map(|p| {
            p.iter()
                .zip(p0)
                .map(|(&a, &b)| lp::rat(i64::from(a) - i64::from(b)))
                .collect()
        })
        .collect();
    lp::rank(&rows)
}

fn require_nonzero(f: &MixedPolynomial) -> Result<()> {
    if f.is_zero() {
        Err(Error::ZeroPolynomial)
    } else {
        Ok(())
    }
}

pub fn support(f: &MixedPolynomial) -> Result<SupportSet> {
    require_nonzero(f)?;
    SupportSet::new(f.n(), f.support_points())
}

pub fn support_hull(f: &MixedPolynomial) -> Result<LatticePolytope> {
    support(f)?.hull()
}

pub fn newton_polyhedron(f: &MixedPolynomial) -> Result<LatticePolytope> {
    support(f)?.newton_polyhedron()
}

/// Faces of `Γ₀(f)` not containing the origin.
pub fn gamma_plus(f: &MixedPolynomial) -> Result<Vec<Face>> {
    Ok(gamma_plus_of(&newton_polyhedron(f)?))
}

pub fn gamma_plus_of(gamma0: &LatticePolytope) -> Vec<Face> {
    gamma0.faces().iter().filter(|f| !f.contains_origin).cloned().collect()
}

pub fn is_convenient(f: &MixedPolynomial) -> Result<bool> {
    Ok(support(f)?.is_convenient())
}

/// The maximal face on which `p` attains its minimum, and that minimum `d_p`.
pub fn min_face(poly: &LatticePolytope, p: &LinearFunctional) -> Result<(Face, BigRational)> {
    if p.coeffs.len() != poly.n {
        return Err(Error::DimensionMismatch {
            expected: poly.n,
            found: p.coeffs.len(),
        });
    }
    let values: Vec<BigInt> = poly.points.iter().map(|x| p.apply(x)).collect();
    let d = values.iter().min().expect("non-empty polytope").clone();
    let mask = values
        .iter()
        .enumerate()
        .filter(|(_, v)| **v == d)
        .fold(0 as Mask, |acc, (i, _)| acc | 1 << i);
    let face = poly
        .faces
        .iter()
        .find(|f| f.mask == mask)
        .expect("the minimising set of a linear functional is a face")
        .clone();
    Ok((face, BigRational::from_integer(d)))
}

/// Tests the two bad-face conditions for one face of `conv(supp ∖ {0})` and returns a
/// certifying functional.
pub fn bad_face_witness(hull: &LatticePolytope, face: &Face) -> Option<Vec<BigInt>> {
    if face.owner != hull.key || !face.affine_span_contains_origin() {
        return None;
    }
    let n = hull.n;
    let basis = face.annihilator();
    if basis.is_empty() {
        return None;
    }
    let outside: Vec<Vec<u32>> = hull
        .vertices()
        .into_iter()
        .filter(|v| !face.vertices.contains(v))
        .collect();
    // a = Σ t_s b_s; constraints are linear in t.
    let coord = |i: usize| -> Vec<Rational> { basis.iter().map(|b| BigRational::from_integer(b[i].clone())).collect() };
    let along = |w: &[u32]| -> Vec<Rational> { basis.iter().map(|b| BigRational::from_integer(dot(b, w))).collect() };
    let mut base: Vec<Constraint> = outside.iter().map(|w| Constraint::new(along(w), lp::rat(1))).collect();
    let nb = base.len();
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            base.truncate(nb);
            // a_i ≥ 1 and a_j ≤ −1
            let neg: Vec<Rational> = coord(j).into_iter().map(|c| -c).collect();
            base.push(Constraint::new(coord(i), lp::rat(1)));
            base.push(Constraint::new(neg, lp::rat(1)));
            if let Some(t) = lp::feasible_point(basis.len(), &[], &base) {
                let a: Vec<Rational> = (0..n)
                    .map(|c| {
                        basis
                            .iter()
                            .zip(&t)
                            .map(|(b, ts)| BigRational::from_integer(b[c].clone()) * ts)
                            .sum()
                    })
                    .collect();
                return Some(lp::primitive_integer(&a));
            }
        }
    }
    None
}

/// Re-checks the three defining conditions of a bad face for a given functional.
pub fn verify_bad_witness(hull: &LatticePolytope, face: &Face, a: &[BigInt]) -> bool {
    let on = face.vertices.iter().all(|v| dot(a, v).is_zero());
    let off = hull
        .vertices()
        .iter()
        .filter(|v| !face.vertices.contains(v))
        .all(|w| dot(a, w).is_positive());
    let mixed = a.iter().any(Signed::is_negative) && a.iter().any(Signed::is_positive);
    face.affine_span_contains_origin() && on && off && mixed
}

/// All bad faces of `conv(supp(f) ∖ {0})` (the improper face included), each carrying
/// its witness functional.
pub fn bad_faces(f: &MixedPolynomial) -> Result<Vec<Face>> {
    Ok(bad_faces_of(&support_hull(f)?))
}

pub fn bad_faces_of(hull: &LatticePolytope) -> Vec<Face> {
    hull.faces()
        .iter()
        .filter_map(|face| {
            bad_face_witness(hull, face).map(|a| {
                let mut face = face.clone();
                face.bad_witness = Some(a);
                face
            })
        })
        .collect()
}

/// Whether a face of `conv(supp ∖ {0})` coincides with a face of `Γ₀(f)` missing 0.
pub fn is_face_of_gamma_plus(f: &MixedPolynomial, face: &Face) -> Result<bool> {
    let supp = support(f)?;
    if face.owner != supp.key(PolytopeKind::SupportHull) {
        return Err(Error::ForeignFace);
    }
    Ok(is_face_of_gamma_plus_in(&supp.newton_polyhedron()?, face))
}

pub fn is_face_of_gamma_plus_in(gamma0: &LatticePolytope, face: &Face) -> bool {
    gamma0
        .face_with_vertices(&face.vertices)
        .is_some_and(|g| !g.contains_origin && g.points == face.points)
}

/// `f_Δ`: the terms of `f` whose exponent sum lies on `Δ`.
pub fn restrict_to_face(f: &MixedPolynomial, face: &Face) -> Result<MixedPolynomial> {
    let supp = support(f)?;
    if face.owner != supp.key(face.kind) {
        return Err(Error::ForeignFace);
    }
    Ok(f.filter_terms(|m| face.contains_point(&m.support_point())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_str;
    use proptest::prelude::*;

    fn ex1() -> MixedPolynomial {
        parse_str("z1*z2 + zb1^2*zb2^2").unwrap()
    }

    fn ex2() -> MixedPolynomial {
        parse_str("z1 + z2 + zb1^2 + zb2^2").unwrap()
    }

    fn pts(v: &[&[u32]]) -> Vec<Vec<u32>> {
        v.iter().map(|p| p.to_vec()).collect()
    }

    fn big(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn supports_of_examples() {
        assert_eq!(
            support(&ex1()).unwrap().points,
            pts(&[&[1, 1], &[2, 2]]).into_iter().collect()
        );
        assert_eq!(support(&ex2()).unwrap().points.len(), 4);
        let f = parse_str("z1*zb1").unwrap();
        assert_eq!(support(&f).unwrap().points, pts(&[&[2]]).into_iter().collect());
        assert_eq!(support(&MixedPolynomial::zero(2)), Err(Error::ZeroPolynomial));
    }

    #[test]
    fn hulls_of_examples() {
        let h = support_hull(&ex1()).unwrap();
        assert_eq!(h.vertices(), pts(&[&[1, 1], &[2, 2]]));
        assert_eq!(h.dim(), 1);
        let h = support_hull(&ex2()).unwrap();
        assert_eq!(h.vertices(), pts(&[&[0, 1], &[0, 2], &[1, 0], &[2, 0]]));
        assert_eq!(h.dim(), 2);
        assert_eq!(h.faces().iter().filter(|f| f.dim == 1).count(), 4);
        let single = support_hull(&parse_str("z1^2*zb2").unwrap()).unwrap();
        assert_eq!(single.dim(), 0);
        assert_eq!(single.faces().len(), 1);
    }

    #[test]
    fn newton_polyhedra_of_examples() {
        let g = newton_polyhedron(&ex1()).unwrap();
        assert_eq!(g.vertices(), pts(&[&[0, 0], &[2, 2]]));
        let g = newton_polyhedron(&ex2()).unwrap();
        assert_eq!(g.vertices(), pts(&[&[0, 0], &[0, 2], &[2, 0]]));
        let g = newton_polyhedron(&parse_str("z1").unwrap()).unwrap();
        assert_eq!(g.vertices(), pts(&[&[0], &[1]]));
    }

    #[test]
    fn gamma_plus_of_examples() {
        let gp = gamma_plus(&ex1()).unwrap();
        assert_eq!(gp.len(), 1);
        assert_eq!(gp[0].vertices, pts(&[&[2, 2]]));
        let gp = gamma_plus(&ex2()).unwrap();
        let verts: Vec<_> = gp.iter().map(|f| f.vertices.clone()).collect();
        assert_eq!(verts, vec![pts(&[&[0, 2]]), pts(&[&[2, 0]]), pts(&[&[0, 2], &[2, 0]])]);
        assert_eq!(gp[2].points, pts(&[&[0, 2], &[2, 0]]));
        let gp = gamma_plus(&parse_str("z1").unwrap()).unwrap();
        assert_eq!(gp.len(), 1);
        assert_eq!(gp[0].vertices, pts(&[&[1]]));
    }

    #[test]
    fn min_face_on_mixed_product() {
        let h = support_hull(&ex1()).unwrap();
        let (face, d) = min_face(&h, &LinearFunctional::from_i64(&[-1, -1]).unwrap()).unwrap();
        assert_eq!(face.vertices, pts(&[&[2, 2]]));
        assert_eq!(d, BigRational::from_integer((-4).into()));
        let (face, d) = min_face(&h, &LinearFunctional::from_i64(&[1, -1]).unwrap()).unwrap();
        assert_eq!(face.vertices, pts(&[&[1, 1], &[2, 2]]));
        assert!(d.is_zero());
        assert_eq!(LinearFunctional::from_i64(&[0, 0]), Err(Error::ZeroFunctional));
    }

    #[test]
    fn conveniency() {
        assert!(is_convenient(&ex2()).unwrap());
        assert!(!is_convenient(&ex1()).unwrap());
        assert!(!is_convenient(&parse_str("z1 + 0*z2").unwrap().with_n(2).unwrap()).unwrap());
    }

    #[test]
    fn bad_faces_of_examples() {
        let bad = bad_faces(&ex1()).unwrap();
        assert_eq!(bad.len(), 1);
        assert_eq!(bad[0].vertices, pts(&[&[1, 1], &[2, 2]]));
        let a = bad[0].bad_witness.clone().unwrap();
        assert!(a == big(&[1, -1]) || a == big(&[-1, 1]));
        assert!(bad_faces(&ex2()).unwrap().is_empty());
        // Support on the hyperplane x1 + x2 = 3 misses the origin.
        let wh = parse_str("z1^3 + z1*zb2^2 + zb1^2*z2 + z2^3").unwrap();
        assert!(bad_faces(&wh).unwrap().is_empty());
    }

    #[test]
    fn bad_face_brute_force_on_small_grid() {
        // Definition-level check: enumerate integer functionals in a box.
        let f = parse_str("z1*z2 + z1^2*zb2 + zb1*z2^3").unwrap();
        let hull = support_hull(&f).unwrap();
        let found: Vec<Vec<Vec<u32>>> = bad_faces_of(&hull).iter().map(|f| f.vertices.clone()).collect();
        let mut brute = Vec::new();
        for face in hull.faces() {
            if !face.affine_span_contains_origin() {
                continue;
            }
            let mut hit = false;
            for a0 in -6i64..=6 {
                for a1 in -6i64..=6 {
                    let a = big(&[a0, a1]);
                    if verify_bad_witness(&hull, face, &a) {
                        hit = true;
                    }
                }
            }
            if hit {
                brute.push(face.vertices.clone());
            }
        }
        assert_eq!(found, brute);
    }

    #[test]
    fn gamma_plus_membership() {
        let f = ex1();
        let h = support_hull(&f).unwrap();
        let v = h.face_with_vertices(&pts(&[&[2, 2]])).unwrap();
        assert!(is_face_of_gamma_plus(&f, v).unwrap());
        assert!(!is_face_of_gamma_plus(&f, h.improper_face()).unwrap());
        let g = ex2();
        let h2 = support_hull(&g).unwrap();
        let e = h2.face_with_vertices(&pts(&[&[0, 2], &[2, 0]])).unwrap();
        assert!(is_face_of_gamma_plus(&g, e).unwrap());
        assert_eq!(is_face_of_gamma_plus(&g, v), Err(Error::ForeignFace));
    }

    #[test]
    fn face_restrictions() {
        let f = ex1();
        let h = support_hull(&f).unwrap();
        assert_eq!(restrict_to_face(&f, h.improper_face()).unwrap(), f);
        let gp = gamma_plus(&f).unwrap();
        assert_eq!(restrict_to_face(&f, &gp[0]).unwrap(), parse_str("zb1^2*zb2^2").unwrap());
        let g = ex2();
        let h2 = support_hull(&g).unwrap();
        let v = h2.face_with_vertices(&pts(&[&[2, 0]])).unwrap();
        assert_eq!(
            restrict_to_face(&g, v).unwrap(),
            parse_str("zb1^2").unwrap().with_n(2).unwrap()
        );
        assert_eq!(restrict_to_face(&g, &gp[0]), Err(Error::ForeignFace));
    }

    #[test]
    fn cube_face_counts() {
        let mut cube = Vec::new();
        for a in 0..2u32 {
            for b in 0..2u32 {
                for c in 0..2u32 {
                    cube.push(vec![a + 1, b + 1, c + 1]);
                }
            }
        }
        let p = LatticePolytope::new(PolytopeKind::Hull, 3, cube).unwrap();
        let count = |d| p.faces().iter().filter(|f| f.dim == d).count();
        assert_eq!((count(0), count(1), count(2), count(3)), (8, 12, 6, 1));
    }

    fn arb_points() -> impl Strategy<Value = (usize, Vec<Vec<u32>>)> {
        (1usize..=3).prop_flat_map(|n| {
            (
                Just(n),
                proptest::collection::vec(proptest::collection::vec(0u32..4, n), 1..9),
            )
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn supporting_functionals_are_exact((n, points) in arb_points()) {
            let p = LatticePolytope::new(PolytopeKind::Hull, n, points).unwrap();
            for face in p.faces() {
                for q in p.points() {
                    let v = dot(&face.functional, q);
                    prop_assert!(v >= face.value);
                    prop_assert_eq!(v == face.value, face.contains_point(q));
                }
            }
        }

        #[test]
        fn lattice_closed_under_meets((n, points) in arb_points()) {
            let p = LatticePolytope::new(PolytopeKind::Hull, n, points).unwrap();
            for a in p.faces() {
                for b in p.faces() {
                    let m = a.mask & b.mask;
                    if m != 0 {
                        prop_assert!(p.faces().iter().any(|f| f.mask == m));
                    }
                }
                // A face's own faces are faces of the polytope.
                for v in &a.vertices {
                    prop_assert!(p.face_with_vertices(std::slice::from_ref(v)).is_some());
                }
            }
        }

        #[test]
        fn bad_witnesses_recheck((n, points) in arb_points()) {
            let s = SupportSet::new(n, points).unwrap();
            if let Ok(h) = s.hull() {
                for face in bad_faces_of(&h) {
                    prop_assert!(verify_bad_witness(&h, &face, face.bad_witness.as_ref().unwrap()));
                }
            }
        }
    }
}
