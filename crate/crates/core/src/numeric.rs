//! Fast floating-point evaluation of a mixed polynomial and its Wirtinger jet.

use num_complex::Complex64;

use crate::mixed_poly::MixedPolynomial;

/// A polynomial flattened into sparse `(variable, power)` factor lists.
#[derive(Clone, Debug)]
pub(crate) struct Compiled {
    terms: Vec<CTerm>,
}

#[derive(Clone, Debug)]
struct CTerm {
    coeff: Complex64,
    z: Vec<(usize, usize)>,
    zb: Vec<(usize, usize)>,
}

impl Compiled {
    pub(crate) fn new(f: &MixedPolynomial) -> Self {
        let terms = f
            .terms()
            .map(|(m, &c)| CTerm {
                coeff: c,
                z: sparse(m.z.entries()),
                zb: sparse(m.zb.entries()),
            })
            .collect();
        Self { terms }
    }

    fn eval(&self, pw: &Powers) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for t in &self.terms {
            let mut v = t.coeff;
            for &(i, k) in &t.z {
                v *= pw.z[i][k];
            }
            for &(i, k) in &t.zb {
                v *= pw.zb[i][k];
            }
            acc += v;
        }
        acc
    }
}

fn sparse(e: &[u32]) -> Vec<(usize, usize)> {
    e.iter()
        .enumerate()
        .filter(|(_, &k)| k > 0)
        .map(|(i, &k)| (i, k as usize))
        .collect()
}

/// Power tables `z_i^k` and `z̄_i^k` up to the polynomial degree.
struct Powers {
    z: Vec<Vec<Complex64>>,
    zb: Vec<Vec<Complex64>>,
}

impl Powers {
    fn new(z: &[Complex64], deg: usize) -> Self {
        let table = |w: Complex64| {
            let mut row = Vec::with_capacity(deg + 1);
            let mut acc = Complex64::new(1.0, 0.0);
            row.push(acc);
            for _ in 0..deg {
                acc *= w;
                row.push(acc);
            }
            row
        };
        Self {
            z: z.iter().map(|&w| table(w)).collect(),
            zb: z.iter().map(|&w| table(w.conj())).collect(),
        }
    }
}

/// Value, gradients and second Wirtinger derivatives at one point.
#[derive(Clone, Debug)]
pub(crate) struct Jet {
    pub f: Complex64,
    /// `∂f/∂z_i`
    pub fz: Vec<Complex64>,
    /// `∂f/∂z̄_i`
    pub fzb: Vec<Complex64>,
    /// `∂²f/∂z_i∂z_j`
    pub fzz: Vec<Vec<Complex64>>,
    /// `∂²f/∂z_i∂z̄_j`
    pub fzzb: Vec<Vec<Complex64>>,
    /// `∂²f/∂z̄_i∂z̄_j`
    pub fzbzb: Vec<Vec<Complex64>>,
}

/// Pre-differentiated polynomial: `f`, its first and second Wirtinger derivatives.
#[derive(Clone, Debug)]
pub(crate) struct Differentiated {
    n: usize,
    deg: usize,
    f: Compiled,
    fz: Vec<Compiled>,
    fzb: Vec<Compiled>,
    fzz: Vec<Vec<Compiled>>,
    fzzb: Vec<Vec<Compiled>>,
    fzbzb: Vec<Vec<Compiled>>,
}

impl Differentiated {
    pub(crate) fn new(f: &MixedPolynomial) -> Self {
        let n = f.n();
        let dz = f.wirtinger_dz();
        let dzb = f.wirtinger_dzbar();
        let fzz = dz
            .iter()
            .map(|g| g.wirtinger_dz().iter().map(Compiled::new).collect())
            .collect();
        let fzzb = dz
            .iter()
            .map(|g| g.wirtinger_dzbar().iter().map(Compiled::new).collect())
            .collect();
        let fzbzb = dzb
            .iter()
            .map(|g| g.wirtinger_dzbar().iter().map(Compiled::new).collect())
            .collect();
        Self {
            n,
            deg: f.degree() as usize,
            f: Compiled::new(f),
            fz: dz.iter().map(Compiled::new).collect(),
            fzb: dzb.iter().map(Compiled::new).collect(),
            fzz,
            fzzb,
            fzbzb,
        }
    }

    pub(crate) fn n(&self) -> usize {
        self.n
    }

    #[cfg(test)]
    pub(crate) fn value(&self, z: &[Complex64]) -> Complex64 {
        self.f.eval(&Powers::new(z, self.deg))
    }

    /// `(f, ∂f, ∂̄f)` without second derivatives.
    pub(crate) fn gradients(&self, z: &[Complex64]) -> (Complex64, Vec<Complex64>, Vec<Complex64>) {
        let pw = Powers::new(z, self.deg);
        (
            self.f.eval(&pw),
            self.fz.iter().map(|c| c.eval(&pw)).collect(),
            self.fzb.iter().map(|c| c.eval(&pw)).collect(),
        )
    }

    pub(crate) fn jet(&self, z: &[Complex64]) -> Jet {
        let pw = Powers::new(z, self.deg);
        let grid = |m: &Vec<Vec<Compiled>>| -> Vec<Vec<Complex64>> {
            m.iter().map(|row| row.iter().map(|c| c.eval(&pw)).collect()).collect()
        };
        Jet {
            f: self.f.eval(&pw),
            fz: self.fz.iter().map(|c| c.eval(&pw)).collect(),
            fzb: self.fzb.iter().map(|c| c.eval(&pw)).collect(),
            fzz: grid(&self.fzz),
            fzzb: grid(&self.fzzb),
            fzbzb: grid(&self.fzbzb),
        }
    }
}

pub(crate) fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// Real coordinates `(x1, y1, …)` to complex `z`.
pub(crate) fn to_complex(x: &[f64]) -> Vec<Complex64> {
    x.chunks_exact(2).map(|p| Complex64::new(p[0], p[1])).collect()
}

pub(crate) fn to_real(z: &[Complex64]) -> Vec<f64> {
    z.iter().flat_map(|c| [c.re, c.im]).collect()
}

/// Real Jacobian columns of a holomorphic-in-(z, z̄) quantity `G` with Wirtinger
/// derivatives `g_z`, `g_zb` in direction `x_j` and `y_j`:
/// `∂G/∂x = G_z + G_zb`, `∂G/∂y = i(G_z − G_zb)`.
#[inline]
pub(crate) fn real_partials(gz: Complex64, gzb: Complex64) -> (Complex64, Complex64) {
    (gz + gzb, Complex64::i() * (gz - gzb))
}

/// `w(θ) = e^{iθ}·conj(∂f) + e^{−iθ}·∂̄f` with its real derivatives.
pub(crate) struct PhaseJet {
    pub w: Vec<Complex64>,
    /// `dw[k][c]`: derivative of `w_k` along real coordinate `c` (`x1, y1, x2, …`).
    pub dw: Vec<Vec<Complex64>>,
    pub dtheta: Vec<Complex64>,
}

pub(crate) fn phase_jet(jet: &Jet, theta: f64) -> PhaseJet {
    let n = jet.fz.len();
    let e = Complex64::from_polar(1.0, theta);
    let ec = e.conj();
    let mut w = Vec::with_capacity(n);
    let mut dw = Vec::with_capacity(n);
    let mut dtheta = Vec::with_capacity(n);
    for k in 0..n {
        let a = jet.fz[k].conj();
        let b = jet.fzb[k];
        w.push(e * a + ec * b);
        dtheta.push(Complex64::i() * (e * a - ec * b));
        let mut row = Vec::with_capacity(2 * n);
        for j in 0..n {
            let wz = e * jet.fzzb[k][j].conj() + ec * jet.fzzb[j][k];
            let wzb = e * jet.fzz[k][j].conj() + ec * jet.fzbzb[k][j];
            let (dx, dy) = real_partials(wz, wzb);
            row.push(dx);
            row.push(dy);
        }
        dw.push(row);
    }
    PhaseJet { w, dw, dtheta }
}

/// Deterministic per-task generator: the run seed mixed with a task path.
pub(crate) fn rng_for(seed: u64, path: &[u64]) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    let mut h = splitmix(seed);
    for &p in path {
        h = splitmix(h ^ splitmix(p.wrapping_add(0x9e37_79b9_7f4a_7c15)));
    }
    rand_chacha::ChaCha8Rng::seed_from_u64(h)
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// A random point with log-uniform moduli in `[lo, hi]` and uniform phases.
pub(crate) fn random_torus_point(rng: &mut impl rand::Rng, n: usize, lo: f64, hi: f64) -> Vec<Complex64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|_| {
            let r = rng.gen_range(a..=b).exp();
            let t = rng.gen_range(0.0..std::f64::consts::TAU);
            Complex64::from_polar(r, t)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_str;

    #[test]
    fn jet_matches_symbolic_derivatives() {
        let f = parse_str("z1^2*zb2 + (1-2i)*z1*zb1*z2^3 + 3*zb2^2").unwrap();
        let d = Differentiated::new(&f);
        let z = vec![Complex64::new(0.3, -0.7), Complex64::new(1.1, 0.4)];
        let jet = d.jet(&z);
        assert!((jet.f - f.eval_slice(&z)).norm() < 1e-12);
        for i in 0..2 {
            assert!((jet.fz[i] - f.d_dz(i).eval_slice(&z)).norm() < 1e-12);
            for j in 0..2 {
                let want = f.d_dz(i).d_dzbar(j).eval_slice(&z);
                assert!((jet.fzzb[i][j] - want).norm() < 1e-12);
                let want = f.d_dzbar(i).d_dzbar(j).eval_slice(&z);
                assert!((jet.fzbzb[i][j] - want).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn phase_jet_matches_finite_differences() {
        let f = parse_str("z1^2*zb2 + (1-2i)*z1*zb1*z2^2 + 3*zb2^2 + z2").unwrap();
        let d = Differentiated::new(&f);
        let x = [0.3, -0.7, 1.1, 0.4];
        let theta = 0.9;
        let pj = phase_jet(&d.jet(&to_complex(&x)), theta);
        let h = 1e-6;
        for c in 0..4 {
            let (mut xp, mut xm) = (x, x);
            xp[c] += h;
            xm[c] -= h;
            let wp = phase_jet(&d.jet(&to_complex(&xp)), theta).w;
            let wm = phase_jet(&d.jet(&to_complex(&xm)), theta).w;
            for k in 0..2 {
                let fd = (wp[k] - wm[k]) / (2.0 * h);
                assert!((fd - pj.dw[k][c]).norm() < 1e-6, "{k} {c}");
            }
        }
        let wp = phase_jet(&d.jet(&to_complex(&x)), theta + h).w;
        let wm = phase_jet(&d.jet(&to_complex(&x)), theta - h).w;
        for k in 0..2 {
            assert!(((wp[k] - wm[k]) / (2.0 * h) - pj.dtheta[k]).norm() < 1e-6);
        }
    }

    #[test]
    fn real_partials_match_finite_differences() {
        let f = parse_str("z1^2*zb1 + i*zb1^3").unwrap();
        let d = Differentiated::new(&f);
        let z0 = Complex64::new(0.4, 0.9);
        let (_, gz, gzb) = d.gradients(&[z0]);
        let (dx, dy) = real_partials(gz[0], gzb[0]);
        let h = 1e-6;
        let fx = (d.value(&[z0 + h]) - d.value(&[z0 - h])) / (2.0 * h);
        let ih = Complex64::new(0.0, h);
        let fy = (d.value(&[z0 + ih]) - d.value(&[z0 - ih])) / (2.0 * h);
        assert!((dx - fx).norm() < 1e-7);
        assert!((dy - fy).norm() < 1e-7);
    }
}
