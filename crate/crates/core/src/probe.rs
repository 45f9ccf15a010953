//! Numerical estimates of `f(Sing f)`, the bad-face bound, `S(f)` and `K∞(f)`.
//!
//! All searches run on a grid of phases `θ ∈ [0, π)` for the family
//! `w(θ) = e^{iθ}·conj(∂f) + e^{−iθ}·∂̄f` (shifting `θ` by `π` only flips the sign of `w`).
//! At a fixed phase the equations below have isolated solutions generically:
//!
//! * critical points: `w(θ, z) = 0`;
//! * Milnor points on the sphere `‖z‖ = R`: `λz = w(θ, z)`;
//! * `K∞` candidates: local minima of `‖w(θ, z)‖` on the sphere.
//!
//! Each phase is seeded with random starts, continuation from the previous radius and
//! the solutions found at neighbouring phases, so every sampled phase of a solution
//! branch is reached. Values are then chained across radii phase by phase.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::mixed_poly::{ComplexPoint, MixedPolynomial};
use crate::newton::{self, Face};
use crate::nondeg::{recenter, torus_directions, CriticalWitness};
use crate::numeric::{self, norm, phase_jet, random_torus_point, rng_for, Differentiated};
use crate::regularity::{milnor_from, nu_from, scale_of, DEFAULT_TOL};
use crate::solve::{levenberg_marquardt, LmOptions};
use crate::{par, Error, Result};

/// Increasing sphere radii with the per-radius random start budget.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadiusSchedule {
    pub radii: Vec<f64>,
    pub starts: usize,
}

impl Default for RadiusSchedule {
    fn default() -> Self {
        Self {
            radii: vec![1e1, 1e2, 1e3, 1e4, 1e5],
            starts: 400,
        }
    }
}

impl RadiusSchedule {
    pub fn new(radii: Vec<f64>, starts: usize) -> Result<Self> {
        let s = Self { radii, starts };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.radii.len() < 2 {
            return Err(Error::InvalidConfig(
                "a radius schedule needs at least two radii".into(),
            ));
        }
        if self.radii.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return Err(Error::InvalidConfig("radii must be positive and finite".into()));
        }
        if self.radii.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidConfig("radii must be strictly increasing".into()));
        }
        if self.starts == 0 {
            return Err(Error::InvalidConfig("start budget must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeOptions {
    pub schedule: RadiusSchedule,
    pub seed: u64,
    /// Number of phases sampled in `[0, π)`.
    pub phases: usize,
    /// Relative zero-test tolerance.
    pub tol: f64,
    /// Final drift bound for a `finite_limit` chain.
    pub cluster_tol: f64,
    /// Tolerance for comparing value sets.
    pub value_tol: f64,
    /// `K∞` candidates need `(1 + ‖z‖)·ν ≤ kos_gate`.
    pub kos_gate: f64,
    /// A `K∞` `finite_limit` chain ends with `(1 + ‖z‖)·ν ≤ kos_tol`.
    pub kos_tol: f64,
    pub max_iter: usize,
    /// Random starts for the critical point search; moduli log-uniform in the box.
    pub critical_starts: usize,
    pub box_lo: f64,
    pub box_hi: f64,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        Self {
            schedule: RadiusSchedule::default(),
            seed: 0,
            phases: 256,
            tol: DEFAULT_TOL,
            cluster_tol: 1e-3,
            value_tol: 1e-2,
            kos_gate: 1.0,
            kos_tol: 1e-2,
            max_iter: 200,
            critical_starts: 400,
            box_lo: 0.1,
            box_hi: 10.0,
        }
    }
}

impl ProbeOptions {
    pub fn validate(&self) -> Result<()> {
        self.schedule.validate()?;
        let positive = [
            self.tol,
            self.cluster_tol,
            self.value_tol,
            self.kos_gate,
            self.kos_tol,
            self.box_lo,
        ];
        if positive.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return Err(Error::InvalidConfig("tolerances must be positive".into()));
        }
        if self.phases == 0 || self.max_iter == 0 || self.critical_starts == 0 || self.box_hi < self.box_lo {
            return Err(Error::InvalidConfig("probe budgets must be positive".into()));
        }
        Ok(())
    }

    fn phase(&self, j: usize) -> f64 {
        PI * j as f64 / self.phases as f64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    FiniteLimit,
    Inconclusive,
    Divergent,
    /// A value attained at a critical point (no radius involved).
    Attained,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterMember {
    /// Sphere radius for probe members; absent for critical values.
    pub radius: Option<f64>,
    pub witness: CriticalWitness,
    /// `(1 + ‖z‖)·ν(z)`
    pub kos: f64,
    /// `(1 + ‖z‖)·tol·scale`: below this `kos` is numerically zero.
    pub kos_floor: f64,
}

/// One estimated value with its supporting witnesses.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValueCluster {
    pub center: Complex64,
    /// Final drift for chains; zero for attained values.
    pub radius: f64,
    pub classification: Classification,
    /// Grid phase the chain was tracked at.
    pub phase: Option<f64>,
    pub members: Vec<ClusterMember>,
    /// `|v_{k+1} − v_k|` along the chain.
    pub drift: Vec<f64>,
    pub kos_trace: Vec<f64>,
}

impl ValueCluster {
    pub fn is_finite_limit(&self) -> bool {
        self.classification == Classification::FiniteLimit
    }

    /// Whether the `kos` trace is non-increasing over its last three entries, entries
    /// below their floor counting as zero.
    pub fn kos_tail_non_increasing(&self) -> bool {
        let m = &self.members;
        let k = m.len();
        if k < 2 {
            return true;
        }
        let eff = |x: &ClusterMember| if x.kos <= x.kos_floor { 0.0 } else { x.kos };
        (k.saturating_sub(3)..k - 1).all(|i| eff(&m[i + 1]) <= eff(&m[i]))
    }
}

/// Critical values with the boundedness diagnostic.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalValueSet {
    pub clusters: Vec<ValueCluster>,
    pub max_modulus: f64,
}

impl CriticalValueSet {
    pub fn values(&self) -> Vec<Complex64> {
        self.clusters.iter().map(|c| c.center).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BadFaceValues {
    pub face: Face,
    pub values: Vec<ValueCluster>,
}

/// `{0} ∪ ⋃_Δ f_Δ(Sing f_Δ)`, shifted back by `f(0)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundSet {
    pub includes_zero: bool,
    /// `f(0)`, added back to every reported value.
    pub shift: Complex64,
    pub bad_face_values: Vec<BadFaceValues>,
    pub union: Vec<ValueCluster>,
}

impl BoundSet {
    pub fn distance_to(&self, c: Complex64) -> f64 {
        self.union
            .iter()
            .map(|v| (v.center - c).norm())
            .fold(f64::INFINITY, f64::min)
    }
}

/// Outcome of a radius sweep; `clusters` holds every chain, whatever its class.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeResult {
    pub clusters: Vec<ValueCluster>,
    /// Accepted points per radius (summed over phases).
    pub accepted: Vec<usize>,
}

impl ProbeResult {
    pub fn finite_limits(&self) -> impl Iterator<Item = &ValueCluster> {
        self.clusters.iter().filter(|c| c.is_finite_limit())
    }
}

fn require_nonconstant(f: &MixedPolynomial) -> Result<()> {
    if f.is_zero() {
        Err(Error::ZeroPolynomial)
    } else if f.is_constant() {
        Err(Error::ConstantPolynomial)
    } else {
        Ok(())
    }
}

// ---------------------------------------------------------------------------------
// Phase sweeps

#[derive(Clone, Debug)]
struct Seed {
    z: Vec<Complex64>,
    lambda: f64,
}

#[derive(Clone, Debug)]
struct Sol {
    z: Vec<Complex64>,
    lambda: f64,
    residual: f64,
    theta: f64,
    value: Complex64,
    kos: f64,
    kos_floor: f64,
}

impl Sol {
    fn seed(&self) -> Seed {
        Seed {
            z: self.z.clone(),
            lambda: self.lambda,
        }
    }

    fn member(&self, radius: Option<f64>) -> ClusterMember {
        ClusterMember {
            radius,
            witness: CriticalWitness {
                z: ComplexPoint::new(self.z.clone()),
                theta: self.theta,
                lambda: self.lambda,
                residual: self.residual,
                value: self.value,
            },
            kos: self.kos,
            kos_floor: self.kos_floor,
        }
    }
}

const MAX_PER_PHASE: usize = 12;

fn same_value(a: Complex64, b: Complex64) -> bool {
    (a - b).norm() <= 1e-6 * (1.0 + a.norm().max(b.norm()))
}

/// Solves every seed at its phase, then repeatedly re-seeds each phase from the new
/// solutions of its two neighbours until nothing new appears.
fn sweep<F>(phases: usize, initial: Vec<Vec<Seed>>, solve: F) -> Vec<Vec<Sol>>
where
    F: Fn(usize, &Seed) -> Option<Sol> + Sync + Send,
{
    let mut found: Vec<Vec<Sol>> = vec![Vec::new(); phases];
    let mut pending = initial;
    for _ in 0..=phases {
        let jobs: Vec<(usize, Seed)> = pending
            .iter()
            .enumerate()
            .flat_map(|(j, seeds)| seeds.iter().map(move |s| (j, s.clone())))
            .collect();
        if jobs.is_empty() {
            break;
        }
        let results = par::map(&jobs, |(j, s)| solve(*j, s));
        let mut fresh: Vec<Vec<Sol>> = vec![Vec::new(); phases];
        for ((j, _), r) in jobs.iter().zip(results) {
            let Some(sol) = r else { continue };
            if found[*j].len() >= MAX_PER_PHASE || found[*j].iter().any(|s| same_value(s.value, sol.value)) {
                continue;
            }
            found[*j].push(sol.clone());
            fresh[*j].push(sol);
        }
        if phases == 1 {
            break;
        }
        pending = (0..phases)
            .map(|j| {
                let prev = (j + phases - 1) % phases;
                let next = (j + 1) % phases;
                fresh[prev].iter().chain(&fresh[next]).map(Sol::seed).collect()
            })
            .collect();
    }
    found
}

// ---------------------------------------------------------------------------------
// Local solvers

fn lm_opts(max_iter: usize) -> LmOptions {
    LmOptions {
        max_iter,
        abs_tol: 0.0,
        step_tol: 1e-15,
    }
}

/// `w(θ, z) = 0` in the unknowns `z`.
fn solve_critical(d: &Differentiated, theta: f64, z0: &[Complex64], max_iter: usize) -> Vec<Complex64> {
    let n = d.n();
    let model = |x: &DVector<f64>| {
        let z = numeric::to_complex(x.as_slice());
        let pj = phase_jet(&d.jet(&z), theta);
        let mut r = DVector::zeros(2 * n);
        let mut j = DMatrix::zeros(2 * n, 2 * n);
        for k in 0..n {
            r[2 * k] = pj.w[k].re;
            r[2 * k + 1] = pj.w[k].im;
            for c in 0..2 * n {
                j[(2 * k, c)] = pj.dw[k][c].re;
                j[(2 * k + 1, c)] = pj.dw[k][c].im;
            }
        }
        (r, j)
    };
    let out = levenberg_marquardt(
        DVector::from_vec(numeric::to_real(z0)),
        model,
        |_| {},
        lm_opts(max_iter),
    );
    numeric::to_complex(out.x.as_slice())
}

fn sphere_retract(radius: f64, n: usize) -> impl Fn(&mut DVector<f64>) {
    move |x: &mut DVector<f64>| {
        let nz = x.rows(0, 2 * n).norm();
        if nz > 0.0 && nz.is_finite() {
            let s = radius / nz;
            for c in 0..2 * n {
                x[c] *= s;
            }
        }
    }
}

/// Projects the `z` block of a Jacobian onto the sphere's tangent space at `x`.
fn project_tangent(j: &mut DMatrix<f64>, x: &[f64]) {
    let xx: f64 = x.iter().map(|v| v * v).sum();
    if xx == 0.0 {
        return;
    }
    for r in 0..j.nrows() {
        let d: f64 = x.iter().enumerate().map(|(c, v)| j[(r, c)] * v).sum::<f64>() / xx;
        for (c, v) in x.iter().enumerate() {
            j[(r, c)] -= d * v;
        }
    }
}

/// `λz − w(θ, z) = 0` with `‖z‖ = R`, unknowns `(z, λ)`.
fn solve_milnor(d: &Differentiated, theta: f64, radius: f64, seed: &Seed, max_iter: usize) -> (Vec<Complex64>, f64) {
    let n = d.n();
    let model = |x: &DVector<f64>| {
        let xs = &x.as_slice()[..2 * n];
        let z = numeric::to_complex(xs);
        let lambda = x[2 * n];
        let pj = phase_jet(&d.jet(&z), theta);
        let mut r = DVector::zeros(2 * n);
        let mut j = DMatrix::zeros(2 * n, 2 * n + 1);
        for k in 0..n {
            let e = lambda * z[k] - pj.w[k];
            r[2 * k] = e.re;
            r[2 * k + 1] = e.im;
            for c in 0..2 * n {
                let mut v = -pj.dw[k][c];
                if c == 2 * k {
                    v += lambda;
                } else if c == 2 * k + 1 {
                    v += Complex64::new(0.0, lambda);
                }
                j[(2 * k, c)] = v.re;
                j[(2 * k + 1, c)] = v.im;
            }
            j[(2 * k, 2 * n)] = z[k].re;
            j[(2 * k + 1, 2 * n)] = z[k].im;
        }
        let mut jz = j.columns(0, 2 * n).into_owned();
        project_tangent(&mut jz, xs);
        j.columns_mut(0, 2 * n).copy_from(&jz);
        (r, j)
    };
    let mut x0 = numeric::to_real(&seed.z);
    x0.push(seed.lambda);
    let out = levenberg_marquardt(
        DVector::from_vec(x0),
        model,
        sphere_retract(radius, n),
        lm_opts(max_iter),
    );
    (numeric::to_complex(&out.x.as_slice()[..2 * n]), out.x[2 * n])
}

/// Local minimum of `‖w(θ, z)‖` on `‖z‖ = R`.
fn minimise_on_sphere(
    d: &Differentiated,
    theta: f64,
    radius: f64,
    z0: &[Complex64],
    max_iter: usize,
) -> Vec<Complex64> {
    let n = d.n();
    let model = |x: &DVector<f64>| {
        let z = numeric::to_complex(x.as_slice());
        let pj = phase_jet(&d.jet(&z), theta);
        let mut r = DVector::zeros(2 * n);
        let mut j = DMatrix::zeros(2 * n, 2 * n);
        for k in 0..n {
            r[2 * k] = pj.w[k].re;
            r[2 * k + 1] = pj.w[k].im;
            for c in 0..2 * n {
                j[(2 * k, c)] = pj.dw[k][c].re;
                j[(2 * k + 1, c)] = pj.dw[k][c].im;
            }
        }
        project_tangent(&mut j, x.as_slice());
        (r, j)
    };
    let out = levenberg_marquardt(
        DVector::from_vec(numeric::to_real(z0)),
        model,
        sphere_retract(radius, n),
        lm_opts(max_iter),
    );
    numeric::to_complex(out.x.as_slice())
}

/// Evaluates a candidate point: value, closed-form `ν` and the Milnor residual.
struct Reading {
    value: Complex64,
    nu: f64,
    nu_theta: f64,
    milnor: (f64, f64, f64),
    scale: f64,
    kos: f64,
    kos_floor: f64,
}

fn reading(d: &Differentiated, z: &[Complex64], tol: f64) -> Option<Reading> {
    if z.iter().any(|c| !c.is_finite()) {
        return None;
    }
    let (value, fz, fzb) = d.gradients(z);
    if !value.is_finite() {
        return None;
    }
    let a: Vec<Complex64> = fz.iter().map(|c| c.conj()).collect();
    let (nu, nu_theta) = nu_from(&a, &fzb);
    let scale = scale_of(&fz, &fzb);
    let milnor = if norm(z) > 0.0 {
        milnor_from(&a, &fzb, z)
    } else {
        (0.0, 0.0, 0.0)
    };
    let r = 1.0 + norm(z);
    Some(Reading {
        value,
        nu,
        nu_theta,
        milnor,
        scale,
        kos: r * nu,
        kos_floor: r * tol * scale,
    })
}

// ---------------------------------------------------------------------------------
// Critical values

fn dedupe_values(sols: Vec<Sol>) -> Vec<ValueCluster> {
    let mut out: Vec<ValueCluster> = Vec::new();
    for s in sols {
        if out.iter().any(|c| same_value(c.center, s.value)) {
            continue;
        }
        out.push(ValueCluster {
            center: s.value,
            radius: 0.0,
            classification: Classification::Attained,
            phase: Some(s.theta),
            members: vec![s.member(None)],
            drift: Vec::new(),
            kos_trace: vec![s.kos],
        });
    }
    sort_clusters(&mut out);
    out
}

fn sort_clusters(v: &mut [ValueCluster]) {
    v.sort_by(|a, b| {
        a.classification
            .cmp(&b.classification)
            .then(a.phase.unwrap_or(-1.0).total_cmp(&b.phase.unwrap_or(-1.0)))
            .then(a.center.re.total_cmp(&b.center.re))
            .then(a.center.im.total_cmp(&b.center.im))
    });
}

fn critical_sweep(d: &Differentiated, opts: &ProbeOptions, salt: u64, torus: &[Vec<f64>]) -> Vec<Sol> {
    let n = d.n();
    let phases = opts.phases;
    let per_phase = opts.critical_starts.div_ceil(phases).max(1);
    let initial: Vec<Vec<Seed>> = (0..phases)
        .map(|j| {
            let mut seeds = vec![Seed {
                z: vec![Complex64::new(0.0, 0.0); n],
                lambda: 0.0,
            }];
            for s in 0..per_phase {
                let mut rng = rng_for(opts.seed, &[salt, j as u64, s as u64]);
                let mut z = random_torus_point(&mut rng, n, opts.box_lo, opts.box_hi);
                recenter(&mut z, torus);
                seeds.push(Seed { z, lambda: 0.0 });
            }
            seeds
        })
        .collect();
    let found = sweep(phases, initial, |j, seed| {
        let theta = opts.phase(j);
        let mut z = solve_critical(d, theta, &seed.z, opts.max_iter);
        recenter(&mut z, torus);
        let r = reading(d, &z, opts.tol)?;
        (r.nu <= opts.tol * r.scale).then_some(Sol {
            z,
            lambda: 0.0,
            residual: r.nu,
            theta: r.nu_theta,
            value: r.value,
            kos: r.kos,
            kos_floor: r.kos_floor,
        })
    });
    found.into_iter().flatten().collect()
}

/// `f(Sing f)` sampled over the phase grid, deduplicated at relative `1e−6`.
pub fn critical_values(f: &MixedPolynomial, opts: &ProbeOptions) -> Result<CriticalValueSet> {
    require_nonconstant(f)?;
    opts.validate()?;
    let d = Differentiated::new(f);
    let clusters = dedupe_values(critical_sweep(&d, opts, 11, &[]));
    let max_modulus = clusters.iter().map(|c| c.center.norm()).fold(0.0, f64::max);
    Ok(CriticalValueSet { clusters, max_modulus })
}

/// `{0} ∪ ⋃_{Δ bad} h_Δ(Sing h_Δ)` for `h = f − f(0)`, with `f(0)` added back.
pub fn bad_face_critical_values(f: &MixedPolynomial, opts: &ProbeOptions) -> Result<BoundSet> {
    require_nonconstant(f)?;
    opts.validate()?;
    let shift = f.constant_term();
    let h = f.shift_constant();
    let mut bad_face_values = Vec::new();
    for (k, face) in newton::bad_faces(&h)?.into_iter().enumerate() {
        let h_delta = newton::restrict_to_face(&h, &face)?;
        let d = Differentiated::new(&h_delta);
        let torus = torus_directions(&h_delta);
        let mut values = dedupe_values(critical_sweep(&d, opts, 100 + k as u64, &torus));
        for v in &mut values {
            v.center += shift;
            for m in &mut v.members {
                m.witness.value += shift;
            }
        }
        bad_face_values.push(BadFaceValues { face, values });
    }
    let zero = ValueCluster {
        center: shift,
        radius: 0.0,
        classification: Classification::Attained,
        phase: None,
        members: Vec::new(),
        drift: Vec::new(),
        kos_trace: Vec::new(),
    };
    let mut union = vec![zero];
    for b in &bad_face_values {
        for v in &b.values {
            if !union.iter().any(|u| same_value(u.center, v.center)) {
                union.push(v.clone());
            }
        }
    }
    sort_clusters(&mut union);
    Ok(BoundSet {
        includes_zero: true,
        shift,
        bad_face_values,
        union,
    })
}

// ---------------------------------------------------------------------------------
// Radius sweeps for S(f) and K∞(f)

#[derive(Clone, Copy, PartialEq, Eq)]
enum Target {
    Milnor,
    Kos,
}

/// Random start on the sphere with anisotropic moduli `|zᵢ| ∝ R^{eᵢ}`, `eᵢ ∈ [−3, 1]`.
fn sphere_start(rng: &mut impl Rng, n: usize, radius: f64) -> Vec<Complex64> {
    let z: Vec<Complex64> = (0..n)
        .map(|_| {
            let e: f64 = rng.gen_range(-3.0..=1.0);
            Complex64::from_polar(radius.powf(e), rng.gen_range(0.0..std::f64::consts::TAU))
        })
        .collect();
    let s = radius / norm(&z);
    z.into_iter().map(|c| c * s).collect()
}

/// Continuation seeds at radius `r1` from a solution at `r0`: uniform scaling and a
/// per-coordinate power law `|zᵢ| ∝ R^{eᵢ}` fitted through the previous point.
fn predict(z: &[Complex64], lambda: f64, r0: f64, r1: f64) -> Vec<Seed> {
    let t = r1 / r0;
    let lr = r0.ln().max(1e-3);
    let uniform: Vec<Complex64> = z.iter().map(|c| c * t).collect();
    let power: Vec<Complex64> = z
        .iter()
        .map(|c| {
            let m = c.norm();
            if m == 0.0 {
                *c
            } else {
                let e = (m.ln() / lr).clamp(-3.0, 3.0);
                c * t.powf(e)
            }
        })
        .collect();
    let on_sphere = |v: Vec<Complex64>| {
        let s = r1 / norm(&v).max(f64::MIN_POSITIVE);
        v.into_iter().map(|c| c * s).collect::<Vec<_>>()
    };
    vec![
        Seed {
            z: on_sphere(uniform),
            lambda,
        },
        Seed {
            z: on_sphere(power),
            lambda,
        },
    ]
}

fn is_single_phase(f: &MixedPolynomial) -> bool {
    let holo = f.terms().all(|(m, _)| m.zb.is_zero());
    let anti = f.terms().all(|(m, _)| m.z.is_zero());
    holo || anti
}

fn radius_sweep(f: &MixedPolynomial, opts: &ProbeOptions, target: Target) -> Result<(Vec<Vec<Vec<Sol>>>, usize)> {
    require_nonconstant(f)?;
    opts.validate()?;
    let d = Differentiated::new(f);
    let n = f.n();
    let phases = if target == Target::Kos && is_single_phase(f) {
        1
    } else {
        opts.phases
    };
    let salt = match target {
        Target::Milnor => 21,
        Target::Kos => 22,
    };
    let radii = &opts.schedule.radii;
    let per_phase = opts.schedule.starts.div_ceil(phases).max(1);
    let mut all: Vec<Vec<Vec<Sol>>> = Vec::with_capacity(radii.len());
    for (k, &radius) in radii.iter().enumerate() {
        let initial: Vec<Vec<Seed>> = (0..phases)
            .map(|j| {
                let mut seeds = Vec::new();
                if k > 0 {
                    for s in &all[k - 1][j] {
                        seeds.extend(predict(&s.z, s.lambda, radii[k - 1], radius));
                    }
                }
                for s in 0..per_phase {
                    let mut rng = rng_for(opts.seed, &[salt, k as u64, j as u64, s as u64]);
                    let z = sphere_start(&mut rng, n, radius);
                    seeds.push(Seed { z, lambda: 0.0 });
                }
                seeds
            })
            .collect();
        let theta_of = |j: usize| if phases == 1 { 0.0 } else { opts.phase(j) };
        let found = sweep(phases, initial, |j, seed| {
            let theta = theta_of(j);
            match target {
                Target::Milnor => {
                    let lambda0 = if seed.lambda != 0.0 {
                        seed.lambda
                    } else {
                        let w = phase_jet(&d.jet(&seed.z), theta).w;
                        let zz: f64 = seed.z.iter().map(|c| c.norm_sqr()).sum();
                        seed.z.iter().zip(&w).map(|(a, b)| (a.conj() * b).re).sum::<f64>() / zz
                    };
                    let (z, _) = solve_milnor(
                        &d,
                        theta,
                        radius,
                        &Seed {
                            z: seed.z.clone(),
                            lambda: lambda0,
                        },
                        opts.max_iter,
                    );
                    let r = reading(&d, &z, opts.tol)?;
                    if (norm(&z) - radius).abs() > 1e-9 * radius || r.milnor.0 > opts.tol * r.scale {
                        return None;
                    }
                    Some(Sol {
                        z,
                        lambda: r.milnor.2,
                        residual: r.milnor.0,
                        theta: r.milnor.1,
                        value: r.value,
                        kos: r.kos,
                        kos_floor: r.kos_floor,
                    })
                }
                Target::Kos => {
                    let z = minimise_on_sphere(&d, theta, radius, &seed.z, opts.max_iter);
                    let r = reading(&d, &z, opts.tol)?;
                    if (norm(&z) - radius).abs() > 1e-9 * radius || r.kos > opts.kos_gate {
                        return None;
                    }
                    Some(Sol {
                        z,
                        lambda: 0.0,
                        residual: r.nu,
                        theta: r.nu_theta,
                        value: r.value,
                        kos: r.kos,
                        kos_floor: r.kos_floor,
                    })
                }
            }
        });
        all.push(found);
    }
    Ok((all, phases))
}

/// Noise floor on drift comparisons.
const DRIFT_FLOOR: f64 = 1e-10;

struct Chain {
    phase: usize,
    members: Vec<(usize, Sol)>,
}

impl Chain {
    fn drifts(&self) -> Vec<f64> {
        self.members
            .windows(2)
            .map(|w| (w[1].1.value - w[0].1.value).norm())
            .collect()
    }
}

fn chain_phase(per_radius: &[&Vec<Sol>], phase: usize) -> Vec<Chain> {
    let mut chains: Vec<Chain> = Vec::new();
    for (k, sols) in per_radius.iter().enumerate() {
        let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
        for (ci, c) in chains.iter().enumerate() {
            let Some((last_k, last)) = c.members.last() else {
                continue;
            };
            if *last_k + 1 != k {
                continue;
            }
            let prev_drift = c.drifts().last().copied().unwrap_or(0.0);
            let chain_tol = (5.0 * prev_drift).max(1e-2);
            for (si, s) in sols.iter().enumerate() {
                let dist = (s.value - last.value).norm();
                if dist <= chain_tol {
                    pairs.push((dist, ci, si));
                }
            }
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        let mut chain_used = vec![false; chains.len()];
        let mut sol_used = vec![false; sols.len()];
        for (_, ci, si) in pairs {
            if chain_used[ci] || sol_used[si] {
                continue;
            }
            chain_used[ci] = true;
            sol_used[si] = true;
            chains[ci].members.push((k, sols[si].clone()));
        }
        for (si, s) in sols.iter().enumerate() {
            if !sol_used[si] {
                chains.push(Chain {
                    phase,
                    members: vec![(k, s.clone())],
                });
            }
        }
    }
    chains
}

fn classify(
    chains: Vec<Chain>,
    opts: &ProbeOptions,
    phase_of: impl Fn(usize) -> f64,
    kos_required: bool,
) -> Vec<ValueCluster> {
    let radii = &opts.schedule.radii;
    let last = radii.len() - 1;
    let need = radii.len().min(3);
    let mut out: Vec<ValueCluster> = chains
        .into_iter()
        .map(|c| {
            let drift = c.drifts();
            let reaches = c.members.last().is_some_and(|(k, _)| *k == last);
            let members: Vec<ClusterMember> = c.members.iter().map(|(k, s)| s.member(Some(radii[*k]))).collect();
            let kos_trace: Vec<f64> = members.iter().map(|m| m.kos).collect();
            let center = c.members.last().map(|(_, s)| s.value).unwrap_or_default();
            let mut cluster = ValueCluster {
                center,
                radius: drift.last().copied().unwrap_or(0.0),
                classification: Classification::Inconclusive,
                phase: Some(phase_of(c.phase)),
                members,
                drift,
                kos_trace,
            };
            cluster.classification = if !reaches {
                Classification::Divergent
            } else {
                let d = &cluster.drift;
                let long_enough = cluster.members.len() >= need;
                let settled = d.last().is_some_and(|&x| x <= opts.cluster_tol);
                let tail = d.len() < 2 || d[d.len() - 1] <= d[d.len() - 2].max(DRIFT_FLOOR);
                let kos_ok = !kos_required || {
                    let m = cluster.members.last().expect("non-empty chain");
                    (m.kos <= opts.kos_tol || m.kos <= m.kos_floor) && cluster.kos_tail_non_increasing()
                };
                if long_enough && settled && tail && kos_ok {
                    Classification::FiniteLimit
                } else {
                    Classification::Inconclusive
                }
            };
            cluster
        })
        .collect();
    // Different phases may track the same limit; keep one representative.
    let mut kept: Vec<ValueCluster> = Vec::new();
    for c in out.drain(..) {
        let dup = c.is_finite_limit()
            && kept
                .iter()
                .any(|k| k.is_finite_limit() && (k.center - c.center).norm() <= 1e-9 * (1.0 + c.center.norm()));
        if !dup {
            kept.push(c);
        }
    }
    sort_clusters(&mut kept);
    kept
}

fn chains_from(all: &[Vec<Vec<Sol>>], phases: usize) -> Vec<Chain> {
    (0..phases)
        .flat_map(|j| {
            let per_radius: Vec<&Vec<Sol>> = all.iter().map(|r| &r[j]).collect();
            chain_phase(&per_radius, j)
        })
        .collect()
}

/// Asymptotic ρ-nonregular values: Milnor points on growing spheres, chained by value.
pub fn estimate_s(f: &MixedPolynomial, opts: &ProbeOptions) -> Result<ProbeResult> {
    let (all, phases) = radius_sweep(f, opts, Target::Milnor)?;
    let accepted = all.iter().map(|r| r.iter().map(Vec::len).sum()).collect();
    let clusters = classify(chains_from(&all, phases), opts, |j| opts.phase(j), false);
    Ok(ProbeResult { clusters, accepted })
}

/// Asymptotic critical values: sphere minima of `(1 + ‖z‖)·ν` below the gate.
pub fn estimate_kinf(f: &MixedPolynomial, opts: &ProbeOptions) -> Result<ProbeResult> {
    let (all, phases) = radius_sweep(f, opts, Target::Kos)?;
    let accepted = all.iter().map(|r| r.iter().map(Vec::len).sum()).collect();
    let phase_of = |j: usize| if phases == 1 { 0.0 } else { opts.phase(j) };
    let clusters = classify(chains_from(&all, phases), opts, phase_of, true);
    Ok(ProbeResult { clusters, accepted })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_str;

    fn small() -> ProbeOptions {
        ProbeOptions {
            phases: 32,
            critical_starts: 64,
            schedule: RadiusSchedule {
                radii: vec![1e1, 1e2, 1e3],
                starts: 64,
            },
            ..ProbeOptions::default()
        }
    }

    fn ex1_curve(phi: f64) -> Complex64 {
        let l = Complex64::from_polar(1.0, phi);
        1.0 / (2.0 * l.conj()) + 1.0 / (4.0 * l * l)
    }

    fn dist_to_ex1_curve(c: Complex64) -> f64 {
        (0..4096)
            .map(|k| (ex1_curve(2.0 * PI * k as f64 / 4096.0) - c).norm())
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn schedule_validation() {
        assert!(RadiusSchedule::new(vec![10.0], 4).is_err());
        assert!(RadiusSchedule::new(vec![10.0, 5.0], 4).is_err());
        assert!(RadiusSchedule::new(vec![10.0, 100.0], 0).is_err());
        assert!(RadiusSchedule::new(vec![10.0, 100.0], 4).is_ok());
    }

    #[test]
    fn convenient_sum_critical_values_on_curve() {
        let f = parse_str("z1 + z2 + zb1^2 + zb2^2").unwrap();
        let cv = critical_values(&f, &small()).unwrap();
        assert!(cv.clusters.len() >= 32);
        for c in &cv.clusters {
            let a = Complex64::from_polar(1.0, c.center.arg());
            // Any value a + ā²/2 with |a| = 1: solve by grid.
            let best = (0..4096)
                .map(|k| {
                    let a = Complex64::from_polar(1.0, 2.0 * PI * k as f64 / 4096.0);
                    (a + 0.5 * a.conj() * a.conj() - c.center).norm()
                })
                .fold(f64::INFINITY, f64::min);
            assert!(best < 2e-3, "{} {a}", c.center);
        }
        assert!(cv.max_modulus <= 1.5 + 1e-6);
    }

    #[test]
    fn linear_has_no_critical_values() {
        let f = parse_str("z1").unwrap();
        assert!(critical_values(&f, &small()).unwrap().clusters.is_empty());
    }

    #[test]
    fn mixed_product_bound_and_s() {
        let f = parse_str("z1*z2 + zb1^2*zb2^2").unwrap();
        let opts = small();
        let bound = bad_face_critical_values(&f, &opts).unwrap();
        assert_eq!(bound.bad_face_values.len(), 1);
        assert!(bound.includes_zero);
        let s = estimate_s(&f, &opts).unwrap();
        let fl: Vec<_> = s.finite_limits().collect();
        assert!(fl.len() >= 32, "{}", fl.len());
        for c in fl {
            assert!(dist_to_ex1_curve(c.center) < 1e-6);
            assert!(bound.distance_to(c.center) < 1e-2);
            assert!(c.center.norm() > 0.05);
        }
    }

    #[test]
    fn linear_has_empty_s_and_kinf() {
        let f = parse_str("z1").unwrap().with_n(2).unwrap();
        let opts = small();
        assert_eq!(estimate_s(&f, &opts).unwrap().finite_limits().count(), 0);
        assert!(estimate_kinf(&f, &opts).unwrap().clusters.is_empty());
    }

    #[test]
    fn constant_rejected() {
        let f = parse_str("2").unwrap();
        assert_eq!(critical_values(&f, &small()), Err(Error::ConstantPolynomial));
        assert_eq!(estimate_s(&f, &small()), Err(Error::ConstantPolynomial));
    }
}
