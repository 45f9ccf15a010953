//! Per-face Newton (strong) non-degeneracy by multistart witness search on the torus.
//!
//! A witness for `Sing f_Δ ∩ (ℂ*)ⁿ` solves `w(θ, z) = e^{iθ}·conj(∂f_Δ) + e^{−iθ}·∂̄f_Δ = 0`
//! for some phase `θ`; the plain (non-strong) test adds `f_Δ(z) = 0`. Absence of a
//! witness after the recorded budget is reported as *presumed* non-degenerate.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::lp::{self, Rational};
use crate::mixed_poly::{ComplexPoint, MixedPolynomial};
use crate::newton::{self, Face};
use crate::numeric::{self, phase_jet, random_torus_point, rng_for, Differentiated};
use crate::regularity::{nu_from, scale_of, DEFAULT_TOL};
use crate::solve::{levenberg_marquardt, LmOptions};
use crate::{par, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NondegMode {
    /// `Sing f_Δ ∩ f_Δ⁻¹(0) ∩ (ℂ*)ⁿ = ∅`
    NondegenerateTest,
    /// `Sing f_Δ ∩ (ℂ*)ⁿ = ∅`
    StrongTest,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictStatus {
    DegenerateWitnessFound,
    PresumedNondegenerate,
}

/// A point solving the singular (`λ = 0`) or Milnor equation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalWitness {
    pub z: ComplexPoint,
    pub theta: f64,
    pub lambda: f64,
    pub residual: f64,
    pub value: Complex64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchBudget {
    pub starts: usize,
    pub max_iter: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FaceVerdict {
    /// The face this verdict belongs to; `None` when the search ran on a bare polynomial.
    pub face: Option<Face>,
    pub mode: NondegMode,
    pub status: VerdictStatus,
    pub witness: Option<CriticalWitness>,
    pub budget: SearchBudget,
}

impl FaceVerdict {
    pub fn is_degenerate(&self) -> bool {
        self.status == VerdictStatus::DegenerateWitnessFound
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NondegOptions {
    pub starts: usize,
    pub max_iter: usize,
    pub seed: u64,
    pub tol: f64,
    pub torus_margin: f64,
    /// Moduli of start points are log-uniform in `[modulus_lo, modulus_hi]`.
    pub modulus_lo: f64,
    pub modulus_hi: f64,
}

impl Default for NondegOptions {
    fn default() -> Self {
        Self {
            starts: 1000,
            max_iter: 200,
            seed: 0,
            tol: DEFAULT_TOL,
            torus_margin: 1e-3,
            modulus_lo: 0.1,
            modulus_hi: 10.0,
        }
    }
}

impl NondegOptions {
    fn validate(&self) -> Result<()> {
        let ok = self.starts > 0
            && self.max_iter > 0
            && self.tol > 0.0
            && self.torus_margin > 0.0
            && self.torus_margin < 1.0
            && self.modulus_lo > 0.0
            && self.modulus_hi >= self.modulus_lo;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(
                "non-degeneracy search options out of range".into(),
            ))
        }
    }
}

/// Verdicts for every face of `Γ⁺(f)`, tested in increasing dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct NondegReport {
    pub verdicts: Vec<FaceVerdict>,
    pub nondegenerate: bool,
    pub strongly_nondegenerate: bool,
}

/// `(|a|² − |c|²)² > |āb − c b̄|²` for `a z² + b z z̄ + c z̄²`.
pub fn quadratic_oracle(a: Complex64, b: Complex64, c: Complex64) -> bool {
    quadratic_margin(a, b, c) > 0.0
}

/// Left minus right side of the quadratic inequality.
pub fn quadratic_margin(a: Complex64, b: Complex64, c: Complex64) -> f64 {
    let lhs = (a.norm_sqr() - c.norm_sqr()).powi(2);
    let rhs = (a.conj() * b - c * b.conj()).norm_sqr();
    lhs - rhs
}

pub fn strong_degeneracy_witness(f_delta: &MixedPolynomial, opts: &NondegOptions) -> Result<FaceVerdict> {
    search(f_delta, NondegMode::StrongTest, opts)
}

pub fn degeneracy_witness(f_delta: &MixedPolynomial, opts: &NondegOptions) -> Result<FaceVerdict> {
    search(f_delta, NondegMode::NondegenerateTest, opts)
}

pub fn check_newton_nondegenerate(f: &MixedPolynomial, opts: &NondegOptions) -> Result<NondegReport> {
    if f.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    if f.is_constant() {
        return Err(Error::ConstantPolynomial);
    }
    let mut verdicts = Vec::new();
    let mut nondegenerate = true;
    let mut strong = true;
    for face in newton::gamma_plus(f)? {
        let f_delta = newton::restrict_to_face(f, &face)?;
        let mut s = strong_degeneracy_witness(&f_delta, opts)?;
        s.face = Some(face.clone());
        let mut p = if s.is_degenerate() {
            degeneracy_witness(&f_delta, opts)?
        } else {
            // No singular point at all on the torus, so none with value zero either.
            FaceVerdict {
                witness: None,
                mode: NondegMode::NondegenerateTest,
                ..s.clone()
            }
        };
        p.face = Some(face);
        strong &= !s.is_degenerate();
        nondegenerate &= !p.is_degenerate();
        verdicts.push(s);
        verdicts.push(p);
    }
    Ok(NondegReport {
        verdicts,
        nondegenerate,
        strongly_nondegenerate: strong,
    })
}

/// Starts are processed in fixed-size batches so that the search can stop at the first
/// batch holding a witness while staying independent of thread scheduling.
const BATCH: usize = 64;

fn search(f: &MixedPolynomial, mode: NondegMode, opts: &NondegOptions) -> Result<FaceVerdict> {
    if f.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    opts.validate()?;
    let budget = SearchBudget {
        starts: opts.starts,
        max_iter: opts.max_iter,
        seed: opts.seed,
    };
    let salt = match mode {
        NondegMode::StrongTest => 1,
        NondegMode::NondegenerateTest => 2,
    };
    let d = Differentiated::new(f);
    let torus = torus_directions(f);
    let mut witness = None;
    let mut start = 0;
    while start < opts.starts && witness.is_none() {
        let ids: Vec<usize> = (start..(start + BATCH).min(opts.starts)).collect();
        let found = par::map(&ids, |&k| {
            let mut rng = rng_for(opts.seed, &[salt, k as u64]);
            let z0 = random_torus_point(&mut rng, f.n(), opts.modulus_lo, opts.modulus_hi);
            let theta0 = rand::Rng::gen_range(&mut rng, 0.0..std::f64::consts::TAU);
            attempt(&d, &torus, mode, opts, z0, theta0)
        });
        witness = found.into_iter().flatten().min_by(|a, b| {
            a.residual.total_cmp(&b.residual).then_with(|| {
                lex_point(&a.z)
                    .partial_cmp(&lex_point(&b.z))
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
        });
        start += BATCH;
    }
    Ok(FaceVerdict {
        face: None,
        mode,
        status: if witness.is_some() {
            VerdictStatus::DegenerateWitnessFound
        } else {
            VerdictStatus::PresumedNondegenerate
        },
        witness,
        budget,
    })
}

fn lex_point(z: &ComplexPoint) -> Vec<f64> {
    numeric::to_real(z.coords())
}

/// Orthonormal basis (in log-modulus space) of the real torus directions `t^a ∘ z`
/// fixing `f`: all `a` with `a·(ν+μ) = 0` on the support.
pub(crate) fn torus_directions(f: &MixedPolynomial) -> Vec<Vec<f64>> {
    let rows: Vec<Vec<Rational>> = f
        .support_points()
        .into_iter()
        .map(|p| p.iter().map(|&x| lp::rat(i64::from(x))).collect())
        .collect();
    let basis = lp::nullspace(&rows, f.n());
    let mut ortho: Vec<Vec<f64>> = Vec::new();
    for b in basis {
        let mut v: Vec<f64> = b.iter().map(|x| x.to_string().parse::<f64>().unwrap_or(0.0)).collect();
        for u in &ortho {
            let d: f64 = v.iter().zip(u).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(u).for_each(|(a, b)| *a -= d * b);
        }
        let nrm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if nrm > 1e-12 {
            ortho.push(v.into_iter().map(|a| a / nrm).collect());
        }
    }
    ortho
}

/// Moves `z` along the invariant torus directions to minimise `Σ (log|zᵢ|)²`.
pub(crate) fn recenter(z: &mut [Complex64], torus: &[Vec<f64>]) {
    if torus.is_empty() || z.iter().any(|c| c.norm() == 0.0) {
        return;
    }
    let logs: Vec<f64> = z.iter().map(|c| c.norm().ln()).collect();
    let mut shift = vec![0.0; z.len()];
    for u in torus {
        let d: f64 = logs.iter().zip(u).map(|(a, b)| a * b).sum();
        shift.iter_mut().zip(u).for_each(|(s, b)| *s -= d * b);
    }
    for (c, s) in z.iter_mut().zip(shift) {
        *c *= s.exp();
    }
}

fn attempt(
    d: &Differentiated,
    torus: &[Vec<f64>],
    mode: NondegMode,
    opts: &NondegOptions,
    z0: Vec<Complex64>,
    theta0: f64,
) -> Option<CriticalWitness> {
    let n = d.n();
    let with_value = mode == NondegMode::NondegenerateTest;
    let model = |x: &DVector<f64>| {
        let z = numeric::to_complex(&x.as_slice()[..2 * n]);
        let theta = x[2 * n];
        let jet = d.jet(&z);
        let pj = phase_jet(&jet, theta);
        let rows = 2 * n + if with_value { 2 } else { 0 };
        let mut r = DVector::zeros(rows);
        let mut j = DMatrix::zeros(rows, 2 * n + 1);
        for k in 0..n {
            r[2 * k] = pj.w[k].re;
            r[2 * k + 1] = pj.w[k].im;
            for c in 0..2 * n {
                j[(2 * k, c)] = pj.dw[k][c].re;
                j[(2 * k + 1, c)] = pj.dw[k][c].im;
            }
            j[(2 * k, 2 * n)] = pj.dtheta[k].re;
            j[(2 * k + 1, 2 * n)] = pj.dtheta[k].im;
        }
        if with_value {
            r[2 * n] = jet.f.re;
            r[2 * n + 1] = jet.f.im;
            for i in 0..n {
                let (dx, dy) = numeric::real_partials(jet.fz[i], jet.fzb[i]);
                j[(2 * n, 2 * i)] = dx.re;
                j[(2 * n + 1, 2 * i)] = dx.im;
                j[(2 * n, 2 * i + 1)] = dy.re;
                j[(2 * n + 1, 2 * i + 1)] = dy.im;
            }
        }
        (r, j)
    };
    let lm = LmOptions {
        max_iter: opts.max_iter,
        ..LmOptions::default()
    };
    let pack = |z: &[Complex64], theta: f64| {
        let mut v = numeric::to_real(z);
        v.push(theta);
        DVector::from_vec(v)
    };
    let out = levenberg_marquardt(pack(&z0, theta0), model, |_| {}, lm);
    let mut z = numeric::to_complex(&out.x.as_slice()[..2 * n]);
    if verify(d, &z, with_value, opts).is_none() && !torus.is_empty() && z.iter().all(|c| c.is_finite()) {
        // Near-solutions drifting off to the torus boundary are pulled back along the
        // invariant directions and polished once more.
        recenter(&mut z, torus);
        let again = levenberg_marquardt(pack(&z, out.x[2 * n]), model, |_| {}, lm);
        z = numeric::to_complex(&again.x.as_slice()[..2 * n]);
    }
    verify(d, &z, with_value, opts)
}

/// Independent re-check: closed-form `ν`, value and torus bounds.
fn verify(d: &Differentiated, z: &[Complex64], with_value: bool, opts: &NondegOptions) -> Option<CriticalWitness> {
    if z.iter().any(|c| !c.is_finite()) {
        return None;
    }
    let lo = opts.torus_margin;
    if z.iter().any(|c| c.norm() < lo || c.norm() > 1.0 / lo) {
        return None;
    }
    let (value, fz, fzb) = d.gradients(z);
    let a: Vec<Complex64> = fz.iter().map(|c| c.conj()).collect();
    let (nu, theta) = nu_from(&a, &fzb);
    let yard = opts.tol * scale_of(&fz, &fzb);
    if nu > yard || (with_value && value.norm() > yard) {
        return None;
    }
    let residual = if with_value { nu.hypot(value.norm()) } else { nu };
    Some(CriticalWitness {
        z: ComplexPoint::new(z.to_vec()),
        theta,
        lambda: 0.0,
        residual,
        value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_str;
    use rand::Rng;

    fn quick() -> NondegOptions {
        NondegOptions {
            starts: 200,
            ..NondegOptions::default()
        }
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn quadratic(a: Complex64, b: Complex64, cc: Complex64) -> MixedPolynomial {
        let mut f = MixedPolynomial::zero(1);
        f.add_term(crate::Monomial::new(vec![2], vec![0]), a);
        f.add_term(crate::Monomial::new(vec![1], vec![1]), b);
        f.add_term(crate::Monomial::new(vec![0], vec![2]), cc);
        f
    }

    #[test]
    fn mixed_product_bad_face_is_strongly_degenerate() {
        let f = parse_str("z1*z2 + zb1^2*zb2^2").unwrap();
        let v = strong_degeneracy_witness(&f, &quick()).unwrap();
        assert!(v.is_degenerate());
        let w = v.witness.unwrap();
        // Witnesses lie on z1 z2 = 1/(2 λ̄) with |λ| = 1, so |z1 z2| = 1/2.
        let p = w.z.coords()[0] * w.z.coords()[1];
        assert!((p.norm() - 0.5).abs() < 1e-6, "{p}");
        assert!(w.residual <= 1e-9 * 10.0);
    }

    #[test]
    fn monomial_faces_are_nondegenerate() {
        for src in ["zb1^2*zb2^2", "zb1^2", "z1"] {
            let f = parse_str(src).unwrap();
            let v = strong_degeneracy_witness(&f, &quick()).unwrap();
            assert_eq!(v.status, VerdictStatus::PresumedNondegenerate, "{src}");
            assert_eq!(v.budget.starts, 200);
            assert!(!degeneracy_witness(&f, &quick()).unwrap().is_degenerate());
        }
    }

    #[test]
    fn examples_are_strongly_nondegenerate() {
        for src in ["z1*z2 + zb1^2*zb2^2", "z1 + z2 + zb1^2 + zb2^2"] {
            let r = check_newton_nondegenerate(&parse_str(src).unwrap(), &quick()).unwrap();
            assert!(r.strongly_nondegenerate && r.nondegenerate, "{src}");
        }
    }

    #[test]
    fn square_of_real_part_is_degenerate() {
        let f = parse_str("(z1 + zb1)^2").unwrap();
        let r = check_newton_nondegenerate(&f, &quick()).unwrap();
        assert!(!r.nondegenerate);
        let w = r.verdicts.iter().find_map(|v| v.witness.clone()).unwrap();
        assert!(w.z.coords()[0].re.abs() < 1e-6);
    }

    #[test]
    fn constant_input_rejected() {
        let f = parse_str("3").unwrap();
        assert_eq!(check_newton_nondegenerate(&f, &quick()), Err(Error::ConstantPolynomial));
        assert_eq!(
            strong_degeneracy_witness(&MixedPolynomial::zero(1), &quick()),
            Err(Error::ZeroPolynomial)
        );
    }

    #[test]
    fn oracle_corners() {
        assert!(quadratic_oracle(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)));
        assert!(!quadratic_oracle(c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)));
    }

    #[test]
    fn strong_test_tracks_quadratic_inequality() {
        let mut rng = rng_for(7, &[]);
        let mut checked = 0;
        while checked < 30 {
            let mut draw = || c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let (a, b, cc) = (draw(), draw(), draw());
            if quadratic_margin(a, b, cc).abs() < 0.05 {
                continue;
            }
            checked += 1;
            let v = strong_degeneracy_witness(&quadratic(a, b, cc), &quick()).unwrap();
            assert_eq!(v.is_degenerate(), !quadratic_oracle(a, b, cc), "{a} {b} {cc}");
        }
    }

    #[test]
    fn torus_action_fixes_bad_face_polynomial() {
        let f = parse_str("z1*z2 + zb1^2*zb2^2").unwrap();
        let bad = newton::bad_faces(&f).unwrap();
        let a: Vec<f64> = bad[0]
            .bad_witness
            .as_ref()
            .unwrap()
            .iter()
            .map(|x| x.to_string().parse().unwrap())
            .collect();
        let d = Differentiated::new(&f);
        let mut rng = rng_for(3, &[]);
        for _ in 0..20 {
            let z = random_torus_point(&mut rng, 2, 0.1, 10.0);
            let t: f64 = rng.gen_range(0.5..2.0);
            let moved: Vec<Complex64> = z.iter().zip(&a).map(|(zi, ai)| zi * t.powf(*ai)).collect();
            let (v0, v1) = (d.value(&z), d.value(&moved));
            assert!((v0 - v1).norm() <= 1e-10 * (1.0 + v0.norm()));
        }
    }

    #[test]
    fn searches_are_seed_deterministic() {
        let f = parse_str("z1*z2 + zb1^2*zb2^2").unwrap();
        let a = strong_degeneracy_witness(&f, &quick()).unwrap();
        let b = strong_degeneracy_witness(&f, &quick()).unwrap();
        assert_eq!(a, b);
    }
}
