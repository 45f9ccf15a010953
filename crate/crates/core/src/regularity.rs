//! Pointwise quantities: the KOS distance `ν`, singularity tests, Milnor-set residuals.
//!
//! With `a = conj(∂f)(z)` and `b = ∂̄f(z)`, the phase family is
//! `w(θ) = e^{iθ}·a + e^{−iθ}·b`. Then `ν = min_θ ‖w(θ)‖`, and the Milnor residual is
//! the smallest distance from `w(θ)` to the real line `ℝ·z ⊂ ℝ²ⁿ`. Both minimisations
//! are over a quadratic form in `(cos θ, sin θ)` and have closed forms.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::mixed_poly::{ComplexPoint, MixedPolynomial};
use crate::numeric::norm;
use crate::{Error, Result};

/// Default relative tolerance for zero tests.
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegularityReading {
    pub point: ComplexPoint,
    pub nu: f64,
    pub milnor_residual: f64,
    pub kos_quantity: f64,
    pub best_phase: f64,
    pub best_multiplier: f64,
}

/// Gradients `(∂f(z), ∂̄f(z))` with a dimension check.
fn gradients(f: &MixedPolynomial, z: &ComplexPoint) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    if z.dim() != f.n() {
        return Err(Error::DimensionMismatch {
            expected: f.n(),
            found: z.dim(),
        });
    }
    let dz = f.wirtinger_dz().iter().map(|g| g.eval_slice(z.coords())).collect();
    let dzb = f.wirtinger_dzbar().iter().map(|g| g.eval_slice(z.coords())).collect();
    Ok((dz, dzb))
}

/// `scale = 1 + ‖∂f‖ + ‖∂̄f‖`, the yardstick for every zero test.
pub(crate) fn scale_of(fz: &[Complex64], fzb: &[Complex64]) -> f64 {
    1.0 + norm(fz) + norm(fzb)
}

/// `Σ xᵢ · conj(yᵢ)`
fn herm(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    x.iter().zip(y).map(|(a, b)| a * b.conj()).sum()
}

/// Real inner product on `ℂⁿ ≅ ℝ²ⁿ`.
fn real_dot(x: &[Complex64], y: &[Complex64]) -> f64 {
    herm(x, y).re
}

pub(crate) fn phase_vector(a: &[Complex64], b: &[Complex64], theta: f64) -> Vec<Complex64> {
    let e = Complex64::from_polar(1.0, theta);
    a.iter().zip(b).map(|(x, y)| e * x + e.conj() * y).collect()
}

/// `(ν, θ*)` from `a = conj(∂f)`, `b = ∂̄f`. The minimiser satisfies
/// `2θ* = π − arg⟨a, b⟩`; the norm is evaluated directly to avoid cancellation.
pub(crate) fn nu_from(a: &[Complex64], b: &[Complex64]) -> (f64, f64) {
    let ab = herm(a, b);
    let theta = if ab.norm() == 0.0 { 0.0 } else { (PI - ab.arg()) / 2.0 };
    let theta = theta.rem_euclid(2.0 * PI);
    (norm(&phase_vector(a, b, theta)), theta)
}

/// `(r, θ, λ)` for the Milnor condition at `z ≠ 0`.
pub(crate) fn milnor_from(a: &[Complex64], b: &[Complex64], z: &[Complex64]) -> (f64, f64, f64) {
    let p: Vec<Complex64> = a.iter().zip(b).map(|(x, y)| x + y).collect();
    let q: Vec<Complex64> = a.iter().zip(b).map(|(x, y)| Complex64::i() * (x - y)).collect();
    let zz = real_dot(z, z);
    let (gp, gq) = (real_dot(&p, z), real_dot(&q, z));
    // M = Gram(P, Q) − g gᵀ / ‖z‖²; its smallest eigenvector is (cos θ, sin θ).
    let m11 = real_dot(&p, &p) - gp * gp / zz;
    let m22 = real_dot(&q, &q) - gq * gq / zz;
    let m12 = real_dot(&p, &q) - gp * gq / zz;
    let theta = (0.5 * (2.0 * m12).atan2(m11 - m22) + PI / 2.0).rem_euclid(PI);
    let w = phase_vector(a, b, theta);
    let lambda = real_dot(&w, z) / zz;
    let r = w
        .iter()
        .zip(z)
        .map(|(wi, zi)| (wi - lambda * zi).norm_sqr())
        .sum::<f64>()
        .sqrt();
    (r, theta, lambda)
}

/// Grid plus golden-section minimisation of a π-periodic function of θ.
pub(crate) fn minimise_phase(g: impl Fn(f64) -> f64, samples: usize) -> (f64, f64) {
    let h = PI / samples as f64;
    let (mut best_t, mut best) = (0.0, g(0.0));
    for k in 1..samples {
        let t = k as f64 * h;
        let v = g(t);
        if v < best {
            best = v;
            best_t = t;
        }
    }
    let (mut lo, mut hi) = (best_t - h, best_t + h);
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..80 {
        let m1 = hi - ratio * (hi - lo);
        let m2 = lo + ratio * (hi - lo);
        if g(m1) < g(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    let t = 0.5 * (lo + hi);
    let v = g(t);
    if v < best {
        (v, t.rem_euclid(PI))
    } else {
        (best, best_t)
    }
}

fn debug_check(closed: f64, grid: f64, yard: f64, what: &str) {
    debug_assert!(
        (closed - grid).abs() <= 1e-9 * yard || closed <= grid,
        "{what}: closed form {closed} disagrees with grid search {grid}"
    );
}

/// `ν(z) = min_{|μ|=1} ‖μ·conj(∂f) + μ̄·∂̄f‖`.
pub fn nu(f: &MixedPolynomial, z: &ComplexPoint) -> Result<f64> {
    let (dz, dzb) = gradients(f, z)?;
    let a: Vec<Complex64> = dz.iter().map(|c| c.conj()).collect();
    let (v, _) = nu_from(&a, &dzb);
    if cfg!(debug_assertions) {
        let (g, _) = minimise_phase(|t| norm(&phase_vector(&a, &dzb, t)), 64);
        debug_check(v, g, scale_of(&dz, &dzb), "nu");
    }
    Ok(v)
}

/// `ν(z) ≤ tol · (1 + ‖∂f‖ + ‖∂̄f‖)`.
pub fn is_singular(f: &MixedPolynomial, z: &ComplexPoint, tol: f64) -> Result<bool> {
    let (dz, dzb) = gradients(f, z)?;
    let a: Vec<Complex64> = dz.iter().map(|c| c.conj()).collect();
    Ok(nu_from(&a, &dzb).0 <= tol * scale_of(&dz, &dzb))
}

/// Distance of the phase family to `ℝ·z`, with the minimising phase and real multiplier.
pub fn milnor_residual(f: &MixedPolynomial, z: &ComplexPoint) -> Result<(f64, f64, f64)> {
    let (dz, dzb) = gradients(f, z)?;
    if z.norm() == 0.0 {
        return Err(Error::ZeroPoint);
    }
    let a: Vec<Complex64> = dz.iter().map(|c| c.conj()).collect();
    let out = milnor_from(&a, &dzb, z.coords());
    if cfg!(debug_assertions) {
        let zs = z.coords();
        let zz = real_dot(zs, zs);
        let dist = |t: f64| {
            let w = phase_vector(&a, &dzb, t);
            let l = real_dot(&w, zs) / zz;
            w.iter()
                .zip(zs)
                .map(|(wi, zi)| (wi - l * zi).norm_sqr())
                .sum::<f64>()
                .sqrt()
        };
        let (g, _) = minimise_phase(dist, 64);
        debug_check(out.0, g, scale_of(&dz, &dzb), "milnor residual");
    }
    Ok(out)
}

/// `(1 + ‖z‖) · ν(z)`.
pub fn kos_quantity(f: &MixedPolynomial, z: &ComplexPoint) -> Result<f64> {
    Ok((1.0 + z.norm()) * nu(f, z)?)
}

/// All pointwise quantities at once. At `z = 0` the Milnor fields are reported as
/// zero residual with phase and multiplier zero.
pub fn read(f: &MixedPolynomial, z: &ComplexPoint) -> Result<RegularityReading> {
    let v = nu(f, z)?;
    let (r, theta, lambda) = if z.norm() == 0.0 {
        (0.0, 0.0, 0.0)
    } else {
        milnor_residual(f, z)?
    };
    Ok(RegularityReading {
        point: z.clone(),
        nu: v,
        milnor_residual: r,
        kos_quantity: (1.0 + z.norm()) * v,
        best_phase: theta,
        best_multiplier: lambda,
    })
}
