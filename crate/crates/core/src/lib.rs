//! Analysis of mixed polynomials `f(z, z̄): ℂⁿ → ℂ` at infinity.
//!
//! The crate is organised bottom-up:
//!
//! * [`mixed_poly`]: exact term maps, Wirtinger calculus, real/complex conversions.
//! * [`parser`]: the textual expression language (`z1*z2 + zb1^2*zb2^2`).
//! * [`newton`]: exact lattice polytopes: supports, `Γ₀`, `Γ⁺`, face lattices, bad faces.
//! * [`regularity`]: pointwise quantities: the KOS distance `ν`, Milnor residuals.
//! * [`nondeg`]: per-face Newton (strong) non-degeneracy by witness search.
//! * [`probe`]: numerical estimates of `f(Sing f)`, the bad-face bound, `S(f)` and `K∞(f)`.
//! * [`report`]: run configuration, JSON report, command entry points and SVG output.

pub mod lp;
pub mod mixed_poly;
pub mod newton;
pub mod nondeg;
mod numeric;
mod par;
pub mod parser;
pub mod probe;
pub mod regularity;
pub mod report;
mod solve;

pub use mixed_poly::{ComplexPoint, Exponent, MixedPolynomial, Monomial, RealPolynomial};
pub use num_complex::Complex64;
pub use parser::{format, parse, ParseError, SourceExpr};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("the zero polynomial is not accepted here")]
    ZeroPolynomial,
    #[error("constant polynomial: nothing to analyse")]
    ConstantPolynomial,
    #[error("index set must be non-empty")]
    EmptyIndexSet,
    #[error("variable index {index} out of range for n = {n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("support contains no point other than the origin")]
    EmptySupport,
    #[error("face does not belong to a polytope of this polynomial")]
    ForeignFace,
    #[error("the point z = 0 is excluded")]
    ZeroPoint,
    #[error("linear functional must not vanish identically")]
    ZeroFunctional,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
