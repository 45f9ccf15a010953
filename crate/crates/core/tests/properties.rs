use mixbif_core::newton;
use mixbif_core::{Complex64, ComplexPoint, MixedPolynomial, Monomial};
use num_traits::ToPrimitive;
use proptest::prelude::*;

fn coef() -> impl Strategy<Value = Complex64> {
    (-2.0f64..2.0, -2.0f64..2.0).prop_map(|(re, im)| Complex64::new(re, im))
}

fn arb_poly(n: usize, max_deg: u32) -> impl Strategy<Value = MixedPolynomial> {
    let term = (
        proptest::collection::vec(0..=max_deg, n),
        proptest::collection::vec(0..=max_deg, n),
        coef(),
    );
    proptest::collection::vec(term, 1..7)
        .prop_map(move |ts| MixedPolynomial::from_terms(n, ts.into_iter().map(|(z, zb, c)| (Monomial::new(z, zb), c))))
}

fn arb_point(n: usize) -> impl Strategy<Value = ComplexPoint> {
    proptest::collection::vec(coef(), n).prop_map(ComplexPoint::new)
}

fn eval(f: &MixedPolynomial, z: &[Complex64]) -> Complex64 {
    f.evaluate(&ComplexPoint::new(z.to_vec())).unwrap()
}

/// Monomials `z^ν z̄^μ` with `Σ wᵢ(νᵢ + μᵢ) = d`, for weights in 1..=3.
fn arb_weighted(n: usize) -> impl Strategy<Value = (Vec<u64>, MixedPolynomial)> {
    (proptest::collection::vec(1u64..=3, n), 2u64..=7).prop_flat_map(move |(w, d)| {
        let lcm = w.iter().fold(1u64, |a, &b| num_integer::lcm(a, b));
        let d = d * lcm;
        let w2 = w.clone();
        let mono = proptest::collection::vec(0u64..=d, n).prop_filter_map("no monomial of degree d", move |raw| {
            // Greedy fill: spend the degree budget left to right, last coordinate takes the rest.
            let mut left = d;
            let mut lattice = vec![0u64; n];
            for i in 0..n {
                let max = left / w2[i];
                let k = if i + 1 == n { max } else { raw[i] % (max + 1) };
                lattice[i] = k;
                left -= k * w2[i];
            }
            (left == 0).then_some(lattice)
        });
        let term = (mono, proptest::collection::vec(0u64..=64, n), coef());
        proptest::collection::vec(term, 1..5).prop_map(move |ts| {
            let f = MixedPolynomial::from_terms(
                n,
                ts.into_iter().map(|(lat, split, c)| {
                    let z: Vec<u32> = lat.iter().zip(&split).map(|(&k, &s)| (s % (k + 1)) as u32).collect();
                    let zb: Vec<u32> = lat.iter().zip(&z).map(|(&k, &a)| k as u32 - a).collect();
                    (Monomial::new(z, zb), c)
                }),
            );
            (w.clone(), f)
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn wirtinger_matches_finite_differences(f in arb_poly(2, 3), z in arb_point(2)) {
        let h = 1e-6;
        let base = z.coords().to_vec();
        let dz = f.wirtinger_dz();
        let dzb = f.wirtinger_dzbar();
        for k in 0..2 {
            let mut xp = base.clone();
            let mut xm = base.clone();
            xp[k] += h;
            xm[k] -= h;
            let mut yp = base.clone();
            let mut ym = base.clone();
            yp[k] += Complex64::new(0.0, h);
            ym[k] -= Complex64::new(0.0, h);
            let fx = (eval(&f, &xp) - eval(&f, &xm)) / (2.0 * h);
            let fy = (eval(&f, &yp) - eval(&f, &ym)) / (2.0 * h);
            let i = Complex64::i();
            let want_dz = (fx - i * fy) * 0.5;
            let want_dzb = (fx + i * fy) * 0.5;
            let scale = 1.0 + want_dz.norm() + want_dzb.norm();
            prop_assert!((eval(&dz[k], &base) - want_dz).norm() <= 1e-5 * scale);
            prop_assert!((eval(&dzb[k], &base) - want_dzb).norm() <= 1e-5 * scale);
        }
    }

    #[test]
    fn conjugate_polynomial_conjugates_values(f in arb_poly(2, 3), z in arb_point(2)) {
        let a = eval(&f.conjugate(), z.coords());
        let b = eval(&f, z.coords()).conj();
        prop_assert!((a - b).norm() <= 1e-12 * (1.0 + b.norm()));
    }

    #[test]
    fn restriction_to_axes_zeroes_the_rest(f in arb_poly(3, 2), z in arb_point(3), mask in 1u8..8) {
        let axes: Vec<usize> = (0..3).filter(|i| mask >> i & 1 == 1).collect();
        let g = f.restrict_to_axes(&axes).unwrap();
        let zeroed: Vec<Complex64> =
            (0..3).map(|i| if axes.contains(&i) { z.coords()[i] } else { Complex64::new(0.0, 0.0) }).collect();
        let want = eval(&f, &zeroed);
        prop_assert!((eval(&g, z.coords()) - want).norm() <= 1e-12 * (1.0 + want.norm()));
    }

    #[test]
    fn weighted_homogeneity_scales_values((w, f) in arb_weighted(2), z in arb_point(2), t in 0.3f64..3.0) {
        prop_assume!(!f.is_constant());
        let (weights, d) = f.is_weighted_homogeneous().unwrap().expect("constructed weighted homogeneous");
        let scaled: Vec<Complex64> =
            z.coords().iter().zip(&weights).map(|(c, &wi)| c * t.powi(wi as i32)).collect();
        let want = eval(&f, z.coords()) * t.powi(d as i32);
        prop_assert!((eval(&f, &scaled) - want).norm() <= 1e-9 * (1.0 + want.norm()), "weights {:?} (built with {:?})", weights, w);
    }

    #[test]
    fn face_restrictions_are_torus_homogeneous(f in arb_poly(2, 3), z in arb_point(2), t in 0.5f64..2.0) {
        prop_assume!(!f.is_constant());
        prop_assume!(z.coords().iter().all(|c| c.norm() > 0.1));
        for face in newton::gamma_plus(&f).unwrap() {
            let fd = newton::restrict_to_face(&f, &face).unwrap();
            for (m, _) in fd.terms() {
                prop_assert!(face.contains_point(&m.support_point()));
            }
            let a: Vec<i32> = face.functional.iter().map(|x| x.to_i32().unwrap()).collect();
            let d = face.value.to_i32().unwrap();
            let scaled: Vec<Complex64> = z.coords().iter().zip(&a).map(|(c, &ai)| c * t.powi(ai)).collect();
            let want = eval(&fd, z.coords()) * t.powi(d);
            prop_assert!((eval(&fd, &scaled) - want).norm() <= 1e-9 * (1.0 + want.norm()));
        }
    }
}
