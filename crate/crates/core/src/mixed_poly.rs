//! Mixed polynomials `f(z, z̄) = Σ c_{ν,μ} z^ν z̄^μ` as exact term maps.
//!
//! Exponents are exact; coefficients are `Complex64`. Every arithmetic operation
//! drops coefficients that come out exactly zero, so the term map is the normal form
//! and the empty map is the zero polynomial.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::lp::{self, Constraint};
use crate::{Error, Result};

/// Non-negative integer exponent vector of length `n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Exponent(Vec<u32>);

impl Exponent {
    pub fn zeros(n: usize) -> Self {
        Self(vec![0; n])
    }

    pub fn unit(n: usize, i: usize) -> Self {
        let mut e = vec![0; n];
        e[i] = 1;
        Self(e)
    }

    pub fn new(entries: Vec<u32>) -> Self {
        Self(entries)
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    fn plus(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl std::ops::Index<usize> for Exponent {
    type Output = u32;
    fn index(&self, i: usize) -> &u32 {
        &self.0[i]
    }
}

/// The exponent pair `(ν, μ)` of the monomial `z^ν z̄^μ`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Monomial {
    pub z: Exponent,
    pub zb: Exponent,
}

impl Monomial {
    pub fn one(n: usize) -> Self {
        Self {
            z: Exponent::zeros(n),
            zb: Exponent::zeros(n),
        }
    }

    pub fn new(z: Vec<u32>, zb: Vec<u32>) -> Self {
        assert_eq!(z.len(), zb.len(), "ν and μ must have equal length");
        Self {
            z: Exponent(z),
            zb: Exponent(zb),
        }
    }

    pub fn degree(&self) -> u32 {
        self.z.degree() + self.zb.degree()
    }

    /// The support point `ν + μ`.
    pub fn support_point(&self) -> Vec<u32> {
        self.z.plus(&self.zb).0
    }

    fn times(&self, other: &Self) -> Self {
        Self {
            z: self.z.plus(&other.z),
            zb: self.zb.plus(&other.zb),
        }
    }

    fn conjugate(&self) -> Self {
        Self {
            z: self.zb.clone(),
            zb: self.z.clone(),
        }
    }
}

/// A point of `ℂⁿ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ComplexPoint(pub Vec<Complex64>);

impl ComplexPoint {
    pub fn new(coords: Vec<Complex64>) -> Self {
        Self(coords)
    }

    pub fn from_real(coords: &[f64]) -> Self {
        Self(coords.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixedPolynomial {
    n: usize,
    terms: BTreeMap<Monomial, Complex64>,
}

impl MixedPolynomial {
    pub fn zero(n: usize) -> Self {
        assert!(n >= 1, "a mixed polynomial needs at least one variable");
        Self {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(n: usize, c: Complex64) -> Self {
        let mut p = Self::zero(n);
        p.add_term(Monomial::one(n), c);
        p
    }

    /// The variable `z_i` (0-based).
    pub fn var(n: usize, i: usize) -> Self {
        let mut p = Self::zero(n);
        p.add_term(
            Monomial {
                z: Exponent::unit(n, i),
                zb: Exponent::zeros(n),
            },
            Complex64::one(),
        );
        p
    }

    /// The conjugate variable `z̄_i` (0-based).
    pub fn conj_var(n: usize, i: usize) -> Self {
        Self::var(n, i).conjugate()
    }

    pub fn from_terms(n: usize, terms: impl IntoIterator<Item = (Monomial, Complex64)>) -> Self {
        let mut p = Self::zero(n);
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    /// Accumulates `c · m`, removing the entry if the sum becomes exactly zero.
    pub fn add_term(&mut self, m: Monomial, c: Complex64) {
        assert!(
            m.z.len() == self.n && m.zb.len() == self.n,
            "monomial arity must equal n"
        );
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = *o.get() + c;
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Complex64)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, m: &Monomial) -> Complex64 {
        self.terms.get(m).copied().unwrap_or_else(Complex64::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|m| m.degree() == 0)
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    /// `f(0, 0̄)`.
    pub fn constant_term(&self) -> Complex64 {
        self.coeff(&Monomial::one(self.n))
    }

    /// Same terms, viewed in a larger ambient dimension.
    pub fn with_n(&self, n: usize) -> Result<Self> {
        if n < self.effective_variables().last().map_or(1, |&i| i + 1) {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: n,
            });
        }
        let resize = |e: &Exponent| {
            let mut v = e.0.clone();
            v.resize(n, 0);
            Exponent(v)
        };
        Ok(Self::from_terms(
            n,
            self.terms.iter().map(|(m, c)| {
                (
                    Monomial {
                        z: resize(&m.z),
                        zb: resize(&m.zb),
                    },
                    *c,
                )
            }),
        ))
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::from_terms(self.n, self.terms.iter().map(|(m, c)| (m.clone(), c * s)))
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::constant(self.n, Complex64::one());
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// `Σ c_{ν,μ} z^ν z̄^μ`, evaluated term by term.
    pub fn evaluate(&self, z: &ComplexPoint) -> Result<Complex64> {
        if z.dim() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: z.dim(),
            });
        }
        Ok(self.eval_slice(z.coords()))
    }

    pub(crate) fn eval_slice(&self, z: &[Complex64]) -> Complex64 {
        let mut acc = Complex64::zero();
        for (m, c) in &self.terms {
            let mut t = *c;
            for (i, zi) in z.iter().enumerate().take(self.n) {
                if m.z[i] > 0 {
                    t *= zi.powu(m.z[i]);
                }
                if m.zb[i] > 0 {
                    t *= zi.conj().powu(m.zb[i]);
                }
            }
            acc += t;
        }
        acc
    }

    /// Wirtinger gradient `∂f = (∂f/∂z₁, …, ∂f/∂zₙ)`, treating `z̄` as independent.
    pub fn wirtinger_dz(&self) -> Vec<Self> {
        (0..self.n).map(|i| self.d_dz(i)).collect()
    }

    /// Conjugate Wirtinger gradient `∂̄f = (∂f/∂z̄₁, …, ∂f/∂z̄ₙ)`.
    pub fn wirtinger_dzbar(&self) -> Vec<Self> {
        (0..self.n).map(|i| self.d_dzbar(i)).collect()
    }

    pub fn d_dz(&self, i: usize) -> Self {
        Self::from_terms(
            self.n,
            self.terms.iter().filter(|(m, _)| m.z[i] > 0).map(|(m, c)| {
                let mut m2 = m.clone();
                m2.z.0[i] -= 1;
                (m2, c * f64::from(m.z[i]))
            }),
        )
    }

    pub fn d_dzbar(&self, i: usize) -> Self {
        Self::from_terms(
            self.n,
            self.terms.iter().filter(|(m, _)| m.zb[i] > 0).map(|(m, c)| {
                let mut m2 = m.clone();
                m2.zb.0[i] -= 1;
                (m2, c * f64::from(m.zb[i]))
            }),
        )
    }

    /// `f̄`: `(ν, μ, c) ↦ (μ, ν, c̄)`.
    pub fn conjugate(&self) -> Self {
        Self::from_terms(self.n, self.terms.iter().map(|(m, c)| (m.conjugate(), c.conj())))
    }

    /// `f − f(0)`.
    pub fn shift_constant(&self) -> Self {
        let mut out = self.clone();
        out.terms.remove(&Monomial::one(self.n));
        out
    }

    /// `f^I`: the terms whose exponents vanish outside `axes` (0-based indices).
    pub fn restrict_to_axes(&self, axes: &[usize]) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::EmptyIndexSet);
        }
        if let Some(&i) = axes.iter().find(|&&i| i >= self.n) {
            return Err(Error::IndexOutOfRange { index: i, n: self.n });
        }
        let keep: BTreeSet<usize> = axes.iter().copied().collect();
        Ok(self.filter_terms(|m| (0..self.n).all(|i| keep.contains(&i) || (m.z[i] == 0 && m.zb[i] == 0))))
    }

    /// Keeps the terms whose monomial satisfies `pred`.
    pub fn filter_terms(&self, pred: impl Fn(&Monomial) -> bool) -> Self {
        Self {
            n: self.n,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| pred(m))
                .map(|(m, c)| (m.clone(), *c))
                .collect(),
        }
    }

    /// Indices `i` (0-based) with `νᵢ + μᵢ > 0` in some term.
    pub fn effective_variables(&self) -> Vec<usize> {
        (0..self.n)
            .filter(|&i| self.terms.keys().any(|m| m.z[i] + m.zb[i] > 0))
            .collect()
    }

    /// Distinct support points `ν + μ`.
    pub fn support_points(&self) -> BTreeSet<Vec<u32>> {
        self.terms.keys().map(Monomial::support_point).collect()
    }

    /// Positive weights `q` with `gcd(q) = 1` and a degree `m > 0` such that
    /// `q · (ν + μ) = m` on every term, if they exist.
    pub fn is_weighted_homogeneous(&self) -> Result<Option<(Vec<u64>, u64)>> {
        if self.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        let pts: Vec<Vec<u32>> = self.support_points().into_iter().collect();
        if pts.iter().any(|p| p.iter().all(|&e| e == 0)) {
            return Ok(None);
        }
        let base = &pts[0];
        let eq: Vec<Constraint> = pts[1..]
            .iter()
            .map(|p| {
                let row: Vec<i64> = p.iter().zip(base).map(|(&a, &b)| i64::from(a) - i64::from(b)).collect();
                Constraint::from_ints(&row, 0)
            })
            .collect();
        let ge: Vec<Constraint> = (0..self.n)
            .map(|j| {
                let mut row = vec![0; self.n];
                row[j] = 1;
                Constraint::from_ints(&row, 1)
            })
            .collect();
        let Some(q) = lp::feasible_point(self.n, &eq, &ge) else {
            return Ok(None);
        };
        let q: Vec<u64> = lp::primitive_integer(&q)
            .into_iter()
            .map(|x| u64::try_from(x).expect("weights are positive and small"))
            .collect();
        let m = q.iter().zip(base).map(|(&w, &e)| w * u64::from(e)).sum();
        Ok(Some((q, m)))
    }
}

impl fmt::Display for MixedPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::parser::format(self))
    }
}

impl Add for &MixedPolynomial {
    type Output = MixedPolynomial;
    fn add(self, rhs: &MixedPolynomial) -> MixedPolynomial {
        assert_eq!(self.n, rhs.n, "operands must share n");
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), *c);
        }
        out
    }
}

impl Sub for &MixedPolynomial {
    type Output = MixedPolynomial;
    fn sub(self, rhs: &MixedPolynomial) -> MixedPolynomial {
        self + &(-rhs)
    }
}

impl Neg for &MixedPolynomial {
    type Output = MixedPolynomial;
    fn neg(self) -> MixedPolynomial {
        MixedPolynomial {
            n: self.n,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

impl Mul for &MixedPolynomial {
    type Output = MixedPolynomial;
    fn mul(self, rhs: &MixedPolynomial) -> MixedPolynomial {
        assert_eq!(self.n, rhs.n, "operands must share n");
        let mut out = MixedPolynomial::zero(self.n);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.times(mb), ca * cb);
            }
        }
        out
    }
}

/// A real polynomial in `2n` variables ordered `x₁, y₁, …, xₙ, yₙ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealPolynomial {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, f64>,
}

impl RealPolynomial {
    pub fn zero(nvars: usize) -> Self {
        Self {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Vec<u32>, f64)>) -> Self {
        let mut p = Self::zero(nvars);
        for (e, c) in terms {
            assert_eq!(e.len(), nvars, "exponent arity must equal nvars");
            if c == 0.0 {
                continue;
            }
            let s = p.terms.get(&e).copied().unwrap_or(0.0) + c;
            if s == 0.0 {
                p.terms.remove(&e);
            } else {
                p.terms.insert(e, s);
            }
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &f64)> {
        self.terms.iter()
    }

    pub fn evaluate(&self, v: &[f64]) -> f64 {
        assert_eq!(v.len(), self.nvars);
        self.terms
            .iter()
            .map(|(e, c)| c * e.iter().zip(v).map(|(&k, &x)| x.powi(k as i32)).product::<f64>())
            .sum()
    }
}

/// `f(z, z̄) = g((z+z̄)/2, (z−z̄)/2i) + i·h((z+z̄)/2, (z−z̄)/2i)`.
pub fn real_pair_to_mixed(g: &RealPolynomial, h: &RealPolynomial) -> Result<MixedPolynomial> {
    if g.nvars != h.nvars {
        return Err(Error::DimensionMismatch {
            expected: g.nvars,
            found: h.nvars,
        });
    }
    if g.nvars == 0 || !g.nvars.is_multiple_of(2) {
        return Err(Error::DimensionMismatch {
            expected: g.nvars + g.nvars % 2,
            found: g.nvars,
        });
    }
    let n = g.nvars / 2;
    let half = Complex64::new(0.5, 0.0);
    let xs: Vec<MixedPolynomial> = (0..n)
        .map(|k| (&MixedPolynomial::var(n, k) + &MixedPolynomial::conj_var(n, k)).scale(half))
        .collect();
    // (z − z̄)/(2i) = −(i/2)(z − z̄)
    let ys: Vec<MixedPolynomial> = (0..n)
        .map(|k| (&MixedPolynomial::var(n, k) - &MixedPolynomial::conj_var(n, k)).scale(Complex64::new(0.0, -0.5)))
        .collect();
    let mut cache: BTreeMap<(usize, u32), MixedPolynomial> = BTreeMap::new();
    let mut power = |var: usize, e: u32| -> MixedPolynomial {
        cache
            .entry((var, e))
            .or_insert_with(|| {
                if var.is_multiple_of(2) {
                    xs[var / 2].pow(e)
                } else {
                    ys[var / 2].pow(e)
                }
            })
            .clone()
    };
    let mut out = MixedPolynomial::zero(n);
    for (poly, unit) in [(g, Complex64::one()), (h, Complex64::i())] {
        for (e, c) in &poly.terms {
            let mut t = MixedPolynomial::constant(n, unit * c);
            for (var, &k) in e.iter().enumerate() {
                if k > 0 {
                    t = &t * &power(var, k);
                }
            }
            out = &out + &t;
        }
    }
    Ok(out)
}

/// `(g, h) = (Re f, Im f)` as real polynomials in `x₁, y₁, …, xₙ, yₙ`.
pub fn mixed_to_real_pair(f: &MixedPolynomial) -> (RealPolynomial, RealPolynomial) {
    let n = f.n;
    let m = 2 * n;
    // Holomorphic polynomial in the 2n real variables, complex coefficients.
    let x = |k: usize| MixedPolynomial::var(m, 2 * k);
    let iy = |k: usize| MixedPolynomial::var(m, 2 * k + 1).scale(Complex64::i());
    let zs: Vec<MixedPolynomial> = (0..n).map(|k| &x(k) + &iy(k)).collect();
    let zbs: Vec<MixedPolynomial> = (0..n).map(|k| &x(k) - &iy(k)).collect();
    let mut acc = MixedPolynomial::zero(m);
    for (mono, c) in &f.terms {
        let mut t = MixedPolynomial::constant(m, *c);
        for k in 0..n {
            if mono.z[k] > 0 {
                t = &t * &zs[k].pow(mono.z[k]);
            }
            if mono.zb[k] > 0 {
                t = &t * &zbs[k].pow(mono.zb[k]);
            }
        }
        acc = &acc + &t;
    }
    let g = RealPolynomial::from_terms(m, acc.terms.iter().map(|(mm, c)| (mm.z.0.clone(), c.re)));
    let h = RealPolynomial::from_terms(m, acc.terms.iter().map(|(mm, c)| (mm.z.0.clone(), c.im)));
    (g, h)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn z(n: usize, i: usize) -> MixedPolynomial {
        MixedPolynomial::var(n, i)
    }

    fn zb(n: usize, i: usize) -> MixedPolynomial {
        MixedPolynomial::conj_var(n, i)
    }

    fn mixed_product() -> MixedPolynomial {
        &(&z(2, 0) * &z(2, 1)) + &(&zb(2, 0).pow(2) * &zb(2, 1).pow(2))
    }

    fn convenient_sum() -> MixedPolynomial {
        &(&(&z(2, 0) + &z(2, 1)) + &zb(2, 0).pow(2)) + &zb(2, 1).pow(2)
    }

    #[test]
    fn real_pair_of_identity() {
        let g = RealPolynomial::from_terms(2, [(vec![1, 0], 1.0)]);
        let h = RealPolynomial::from_terms(2, [(vec![0, 1], 1.0)]);
        assert_eq!(real_pair_to_mixed(&g, &h).unwrap(), z(1, 0));
    }

    #[test]
    fn real_pair_of_squared_modulus() {
        let g = RealPolynomial::from_terms(2, [(vec![2, 0], 1.0), (vec![0, 2], 1.0)]);
        let h = RealPolynomial::zero(2);
        assert_eq!(real_pair_to_mixed(&g, &h).unwrap(), &z(1, 0) * &zb(1, 0));
        let (g2, h2) = mixed_to_real_pair(&(&z(1, 0) * &zb(1, 0)));
        assert_eq!(g2, g);
        assert_eq!(h2, h);
    }

    #[test]
    fn real_pair_rejects_mismatch() {
        let g = RealPolynomial::zero(2);
        let h = RealPolynomial::zero(4);
        assert!(matches!(
            real_pair_to_mixed(&g, &h),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn identity_splits_into_coordinates() {
        let (g, h) = mixed_to_real_pair(&z(1, 0));
        assert_eq!(g, RealPolynomial::from_terms(2, [(vec![1, 0], 1.0)]));
        assert_eq!(h, RealPolynomial::from_terms(2, [(vec![0, 1], 1.0)]));
    }

    #[test]
    fn example_values() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let v = mixed_product().evaluate(&ComplexPoint::from_real(&[s, s])).unwrap();
        assert!((v - c(0.75, 0.0)).norm() < 1e-15);
        let v = convenient_sum()
            .evaluate(&ComplexPoint::from_real(&[0.5, 0.5]))
            .unwrap();
        assert!((v - c(1.5, 0.0)).norm() < 1e-15);
        let zero = MixedPolynomial::zero(3);
        assert_eq!(
            zero.evaluate(&ComplexPoint::from_real(&[1.0, 2.0, 3.0])).unwrap(),
            c(0.0, 0.0)
        );
        assert!(mixed_product().evaluate(&ComplexPoint::from_real(&[1.0])).is_err());
    }

    #[test]
    fn mixed_product_wirtinger_gradients() {
        let f = mixed_product();
        assert_eq!(f.wirtinger_dz(), vec![z(2, 1), z(2, 0)]);
        let two = c(2.0, 0.0);
        assert_eq!(
            f.wirtinger_dzbar(),
            vec![
                (&zb(2, 0) * &zb(2, 1).pow(2)).scale(two),
                (&zb(2, 0).pow(2) * &zb(2, 1)).scale(two),
            ]
        );
        let k = MixedPolynomial::constant(2, c(3.0, 1.0));
        assert!(k
            .wirtinger_dz()
            .iter()
            .chain(&k.wirtinger_dzbar())
            .all(MixedPolynomial::is_zero));
    }

    #[test]
    fn conjugation_rules() {
        assert_eq!(z(1, 0).conjugate(), zb(1, 0));
        let f = (&z(2, 0) * &zb(2, 1)).scale(c(0.0, 1.0));
        let expect = (&zb(2, 0) * &z(2, 1)).scale(c(0.0, -1.0));
        assert_eq!(f.conjugate(), expect);
        assert_eq!(mixed_product().conjugate().conjugate(), mixed_product());
    }

    #[test]
    fn shift_constant_drops_only_constant() {
        let f = &z(1, 0) + &MixedPolynomial::constant(1, c(5.0, 0.0));
        assert_eq!(f.shift_constant(), z(1, 0));
        assert!(MixedPolynomial::constant(1, c(7.0, 0.0)).shift_constant().is_zero());
    }

    #[test]
    fn axis_restriction() {
        assert_eq!(
            convenient_sum().restrict_to_axes(&[0]).unwrap(),
            &z(2, 0) + &zb(2, 0).pow(2)
        );
        assert!(mixed_product().restrict_to_axes(&[0]).unwrap().is_zero());
        assert_eq!(mixed_product().restrict_to_axes(&[]), Err(Error::EmptyIndexSet));
    }

    #[test]
    fn weighted_homogeneity() {
        let single = &z(2, 0).pow(2) * &zb(2, 1);
        let (q, m) = single.is_weighted_homogeneous().unwrap().unwrap();
        assert_eq!(q.len(), 2);
        assert_eq!(q[0] * 2 + q[1], m);
        assert_eq!((q, m), (vec![1, 1], 3));
        assert_eq!(
            (&z(1, 0) * &zb(1, 0)).is_weighted_homogeneous().unwrap(),
            Some((vec![1], 2))
        );
        assert_eq!(mixed_product().is_weighted_homogeneous().unwrap(), None);
        assert_eq!(
            MixedPolynomial::zero(2).is_weighted_homogeneous(),
            Err(Error::ZeroPolynomial)
        );
        // constants have m = 0
        assert_eq!(
            MixedPolynomial::constant(1, c(1.0, 0.0))
                .is_weighted_homogeneous()
                .unwrap(),
            None
        );
    }

    #[test]
    fn effective_variable_sets() {
        let f = &z(2, 0) + &zb(2, 0).pow(2);
        assert_eq!(f.effective_variables(), vec![0]);
        assert_eq!(mixed_product().effective_variables(), vec![0, 1]);
        assert!(MixedPolynomial::zero(2).effective_variables().is_empty());
    }

    #[test]
    fn cancellation_leaves_zero() {
        let f = &mixed_product() - &mixed_product();
        assert!(f.is_zero());
        assert_eq!(f.num_terms(), 0);
    }
}
