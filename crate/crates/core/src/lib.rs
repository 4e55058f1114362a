//! Exact construction and certification of plurisubharmonic defining functions
//! near hyperbolic complex points of real surfaces in ℂ².

pub mod certify;
pub mod feasibility;
pub mod levi;
pub mod planes;
pub mod poly;
pub mod real;
pub mod retract;
pub mod scalar;

pub use poly::{ComplexPoly, Monomial, Poly, Var};
pub use scalar::Rational;

/// Exact polynomial in `(x, y, u, v)`.
pub type Poly4 = Poly<Rational>;
/// Floating-point polynomial in `(x, y, u, v)`.
pub type Poly4f = Poly<f64>;
