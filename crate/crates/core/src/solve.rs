//! Damped least squares (Levenberg–Marquardt) for small dense real systems.

use nalgebra::{DMatrix, DVector};

#[derive(Clone, Copy, Debug)]
pub(crate) struct LmOptions {
    pub max_iter: usize,
    /// Stop once `‖r‖ ≤ abs_tol`.
    pub abs_tol: f64,
    /// Stop when a step changes `x` by less than `step_tol·(1 + ‖x‖)`.
    pub step_tol: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self {
            max_iter: 200,
            abs_tol: 1e-14,
            step_tol: 1e-15,
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct LmResult {
    pub x: DVector<f64>,
    // only the unit tests read this
    #[allow(dead_code)]
    pub residual: f64,
}

/// Minimises `‖r(x)‖²`. `model` returns the residual and its Jacobian; `retract`
/// maps a trial point back onto the feasible manifold (identity for flat problems).
pub(crate) fn levenberg_marquardt<M, P>(x0: DVector<f64>, mut model: M, retract: P, opts: LmOptions) -> LmResult
where
    M: FnMut(&DVector<f64>) -> (DVector<f64>, DMatrix<f64>),
    P: Fn(&mut DVector<f64>),
{
    let mut x = x0;
    retract(&mut x);
    let (mut r, mut j) = model(&x);
    let mut cost = r.norm_squared();
    let mut mu = 1e-3;
    let mut it = 0;
    while it < opts.max_iter {
        if !cost.is_finite() || cost.sqrt() <= opts.abs_tol {
            break;
        }
        it += 1;
        let jt = j.transpose();
        let jtj = &jt * &j;
        let g = &jt * &r;
        let scale = jtj.diagonal().max().max(1e-300);
        let mut accepted = false;
        for _ in 0..30 {
            let mut a = jtj.clone();
            for k in 0..a.nrows() {
                a[(k, k)] += mu * (a[(k, k)] + 1e-12 * scale);
            }
            let Some(chol) = a.cholesky() else {
                mu *= 10.0;
                continue;
            };
            let step = chol.solve(&(-&g));
            let mut trial = &x + &step;
            retract(&mut trial);
            let (rt, jt2) = model(&trial);
            let ct = rt.norm_squared();
            if ct.is_finite() && ct < cost {
                let moved = (&trial - &x).norm();
                x = trial;
                r = rt;
                j = jt2;
                cost = ct;
                mu = (mu / 3.0).max(1e-15);
                accepted = true;
                if moved <= opts.step_tol * (1.0 + x.norm()) {
                    return LmResult {
                        residual: cost.sqrt(),
                        x,
                    };
                }
                break;
            }
            mu *= 4.0;
            if mu > 1e16 {
                break;
            }
        }
        if !accepted {
            break;
        }
    }
    LmResult {
        residual: cost.sqrt(),
        x,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_rosenbrock_residuals() {
        let model = |x: &DVector<f64>| {
            let r = DVector::from_vec(vec![10.0 * (x[1] - x[0] * x[0]), 1.0 - x[0]]);
            let j = DMatrix::from_row_slice(2, 2, &[-20.0 * x[0], 10.0, -1.0, 0.0]);
            (r, j)
        };
        let out = levenberg_marquardt(DVector::from_vec(vec![-1.2, 1.0]), model, |_| {}, LmOptions::default());
        assert!(out.residual < 1e-12, "{out:?}");
        assert!((out.x[0] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn respects_retraction_to_circle() {
        // Closest point of the unit circle to (2, 0): minimise the distance residual.
        let model = |x: &DVector<f64>| {
            let r = DVector::from_vec(vec![x[0] - 2.0, x[1]]);
            (r, DMatrix::identity(2, 2))
        };
        let retract = |x: &mut DVector<f64>| {
            let n = x.norm();
            *x /= n;
        };
        let out = levenberg_marquardt(DVector::from_vec(vec![0.0, 1.0]), model, retract, LmOptions::default());
        assert!((out.x[0] - 1.0).abs() < 1e-6, "{out:?}");
    }
}
