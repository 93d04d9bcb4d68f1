//! Levi-form invariants of real hypersurfaces `M = {ρ = 0} ⊂ ℂ^N`.
//!
//! The crate is organised bottom-up:
//!
//! * [`expr`]: expressions in `z_1 … z_N, z̄_1 … z̄_N` with a parser and symbolic
//!   Wirtinger derivatives.
//! * [`hypersurface`]: points on `M`, the complex gradient and Hessian of `ρ`, and
//!   orthonormal CR frames of `H^{1,0}(M)`.
//! * [`invariants`]: the Levi matrix, its spectrum, the characteristic-polynomial
//!   coefficients `A_0 … A_{n-1}`, nullity and pseudoconvexity.
//! * [`strata`]: sampling of `M`, detection of the nullity strata `S_q` and their
//!   local dimension.
//! * [`submanifold`]: the tangential Cauchy–Riemann operator and rank/wedge tests
//!   for candidate complex submanifolds.
//!
//! The contact form is fixed as `θ = (i/2)(∂̄ρ − ∂ρ)`, so `dθ = i∂∂̄ρ` and the Levi
//! matrix is the complex Hessian of `ρ` compressed to the CR frame with no extra factor.

pub mod expr;
pub mod hypersurface;
pub mod invariants;
pub mod linalg;
pub mod strata;
pub mod submanifold;

use nalgebra::{DMatrix, DVector};
pub use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Human-readable statement of the contact-form convention, embedded in reports.
pub const THETA_CONVENTION: &str = "i/2(dbar-d)rho";

pub use expr::{parse, Expr, VarSpace};
pub use hypersurface::{Hypersurface, PointOnM, ToleranceConfig};
pub use invariants::{LeviData, LeviSign, PseudoconvexityReport};

use thiserror::Error;

/// Any failure surfaced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] expr::ParseError),
    #[error(transparent)]
    VarSpace(#[from] expr::VarSpaceError),
    #[error(transparent)]
    Geometry(#[from] hypersurface::GeometryError),
    #[error(transparent)]
    Invariant(#[from] invariants::InvariantError),
    #[error(transparent)]
    Submanifold(#[from] submanifold::SubmanifoldError),
}
