//! Exact feasibility for small rational linear systems.
//!
//! A dense phase-one simplex over `BigRational` with Bland's rule. Systems here are
//! tiny (a handful of variables, a few dozen rows), so no attempt is made at sparsity.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Rational = BigRational;

/// A linear constraint `coeffs · x (= or ≥) rhs`.
#[derive(Clone, Debug)]
pub struct Constraint {
    pub coeffs: Vec<Rational>,
    pub rhs: Rational,
}

impl Constraint {
    pub fn new(coeffs: Vec<Rational>, rhs: Rational) -> Self {
        Self { coeffs, rhs }
    }

    pub fn from_ints(coeffs: &[i64], rhs: i64) -> Self {
        Self {
            coeffs: coeffs.iter().map(|&c| rat(c)).collect(),
            rhs: rat(rhs),
        }
    }
}

pub fn rat(v: i64) -> Rational {
    BigRational::from_integer(BigInt::from(v))
}

/// Finds some `x ∈ ℚ^nvars` (variables are free) with every `eq` row satisfied with
/// equality and every `ge` row satisfied as `≥`. Returns `None` when infeasible.
pub fn feasible_point(nvars: usize, eq: &[Constraint], ge: &[Constraint]) -> Option<Vec<Rational>> {
    for c in eq.iter().chain(ge) {
        assert_eq!(c.coeffs.len(), nvars, "constraint width must equal variable count");
    }
    let m = eq.len() + ge.len();
    if m == 0 {
        return Some(vec![Rational::zero(); nvars]);
    }
    // Columns: u (nvars), v (nvars), surplus (ge.len()), artificial (m), then rhs.
    let n_surplus = ge.len();
    let art0 = 2 * nvars + n_surplus;
    let width = art0 + m;
    let mut tab: Vec<Vec<Rational>> = Vec::with_capacity(m);
    for (r, c) in eq.iter().chain(ge).enumerate() {
        let mut row = vec![Rational::zero(); width + 1];
        for (j, a) in c.coeffs.iter().enumerate() {
            row[j] = a.clone();
            row[nvars + j] = -a.clone();
        }
        if r >= eq.len() {
            row[2 * nvars + (r - eq.len())] = -Rational::one();
        }
        row[width] = c.rhs.clone();
        if row[width].is_negative() {
            for v in row.iter_mut() {
                *v = -v.clone();
            }
        }
        row[art0 + r] = Rational::one();
        tab.push(row);
    }
    let mut basis: Vec<usize> = (0..m).map(|r| art0 + r).collect();

    // Reduced costs of the phase-one objective (sum of artificials).
    let mut cost = vec![Rational::zero(); width + 1];
    for row in &tab {
        for j in 0..art0 {
            cost[j] -= &row[j];
        }
        cost[width] -= &row[width];
    }

    while let Some(enter) = (0..width).find(|&j| cost[j].is_negative()) {
        let mut leave: Option<(usize, Rational)> = None;
        for (r, row) in tab.iter().enumerate() {
            if row[enter].is_positive() {
                let ratio = &row[width] / &row[enter];
                let better = match &leave {
                    None => true,
                    Some((lr, best)) => ratio < *best || (ratio == *best && basis[r] < basis[*lr]),
                };
                if better {
                    leave = Some((r, ratio));
                }
            }
        }
        // Phase one is bounded below by zero, so an entering column always has a pivot row.
        let (pr, _) = leave.expect("phase-one simplex cannot be unbounded");
        pivot(&mut tab, &mut cost, pr, enter);
        basis[pr] = enter;
    }

    if !cost[width].is_zero() {
        return None;
    }
    let mut x = vec![Rational::zero(); 2 * nvars];
    for (r, &b) in basis.iter().enumerate() {
        if b < 2 * nvars {
            x[b] = tab[r][width].clone();
        }
    }
    Some((0..nvars).map(|j| &x[j] - &x[nvars + j]).collect())
}

fn pivot(tab: &mut [Vec<Rational>], cost: &mut [Rational], pr: usize, pc: usize) {
    let p = tab[pr][pc].clone();
    for v in tab[pr].iter_mut() {
        *v = &*v / &p;
    }
    let prow = tab[pr].clone();
    for (r, row) in tab.iter_mut().enumerate() {
        if r != pr && !row[pc].is_zero() {
            let factor = row[pc].clone();
            for (v, pv) in row.iter_mut().zip(&prow) {
                if !pv.is_zero() {
                    *v -= &factor * pv;
                }
            }
        }
    }
    if !cost[pc].is_zero() {
        let factor = cost[pc].clone();
        for (v, pv) in cost.iter_mut().zip(&prow) {
            if !pv.is_zero() {
                *v -= &factor * pv;
            }
        }
    }
}

/// Scales a rational vector by a positive factor to a primitive integer vector
/// (entries coprime). The zero vector maps to itself.
pub fn primitive_integer(v: &[Rational]) -> Vec<BigInt> {
    let mut lcm = BigInt::one();
    for x in v {
        lcm = lcm.lcm(x.denom());
    }
    let ints: Vec<BigInt> = v.iter().map(|x| (x * &lcm).to_integer()).collect();
    let mut g = BigInt::zero();
    for x in &ints {
        g = g.gcd(x);
    }
    if g.is_zero() {
        return ints;
    }
    ints.into_iter().map(|x| x / &g).collect()
}

/// Rank of a rational matrix given by rows.
pub fn rank(rows: &[Vec<Rational>]) -> usize {
    row_echelon(rows.to_vec()).1.len()
}

/// Pivot columns of the row echelon form: a maximal set of independent columns.
pub fn pivot_columns(rows: &[Vec<Rational>]) -> Vec<usize> {
    row_echelon(rows.to_vec()).1
}

/// Basis of `{x : rows · x = 0}`, each basis vector primitive integral.
pub fn nullspace(rows: &[Vec<Rational>], ncols: usize) -> Vec<Vec<BigInt>> {
    let (rref, pivots) = row_echelon(rows.to_vec());
    let mut basis = Vec::new();
    for free in (0..ncols).filter(|c| !pivots.contains(c)) {
        let mut x = vec![Rational::zero(); ncols];
        x[free] = Rational::one();
        for (r, &pc) in pivots.iter().enumerate() {
            x[pc] = -rref[r][free].clone();
        }
        basis.push(primitive_integer(&x));
    }
    basis
}

/// Reduced row echelon form; returns the non-zero rows and their pivot columns.
fn row_echelon(mut m: Vec<Vec<Rational>>) -> (Vec<Vec<Rational>>, Vec<usize>) {
    let ncols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let pv = m[r][c].clone();
        for v in m[r].iter_mut() {
            *v = &*v / &pv;
        }
        let prow = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let f = row[c].clone();
                for (v, pv) in row.iter_mut().zip(&prow) {
                    *v -= &f * pv;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == m.len() {
            break;
        }
    }
    m.truncate(r);
    (m, pivots)
}
