//! Anisotropic proximal point iterations and nonlinear dual-space preconditioning.
//!
//! This crate implements a proximal point scheme in which the resolvent step is
//! preconditioned by the gradient of a convex conjugate: given a maximally monotone
//! operator `T` and a Legendre prox-kernel `φ`, one step from `x^k` solves
//!
//! ```text
//! z^k + ∇φ*(T(z^k)) ∋ x^k,        x^{k+1} = x^k + λ (z^k − x^k),
//! ```
//!
//! whose fixed points are exactly the zeros of `T`. The composition `∇φ* ∘ T` is in
//! general **not** monotone, so the classical Euclidean contraction arguments do not
//! apply; convergence is instead driven by a Fejér-type descent of the Bregman
//! distance `D_{φ*}(v^k, 0)` of the dual iterates `v^k ∈ T(z^k)`.
//!
//! The crate is organised as a small calculus:
//!
//! | module           | contents                                                        |
//! |------------------|-----------------------------------------------------------------|
//! | [`prox`]         | Legendre prox-kernels, conjugates, Bregman distances            |
//! | [`operators`]    | monotone operator descriptions, enlargements, Yosida envelopes  |
//! | [`resolvents`]   | anisotropic and Bregman resolvent solvers, identity residuals   |
//! | [`inner_opt`]    | smooth inner solvers (L-BFGS, projected Barzilai–Borwein)       |
//! | [`ppa`]          | the outer proximal point loop and its convergence diagnostics   |
//! | [`alm`]          | nonlinearly preconditioned augmented Lagrangian methods         |
//! | [`verify`]       | batched identity checks used by the CLI and the test suite     |
//! | [`sampling`]     | seeded, platform-independent random sampling helpers            |
//!
//! All vectors are dense [`nalgebra::DVector<f64>`] and all matrices dense
//! [`nalgebra::DMatrix<f64>`]; problems in scope are desk-scale.

pub use nalgebra;

use thiserror::Error;

pub mod alm;
pub mod inner_opt;
pub mod operators;
pub mod ppa;
pub mod prox;
pub mod resolvents;
pub mod sampling;
pub mod verify;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A vector or matrix had the wrong dimension.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// An input contained NaN or infinity.
    #[error("non-finite input in {0}")]
    NonFinite(&'static str),

    /// A parameter was outside its admissible range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A spec string could not be parsed.
    #[error("invalid spec string `{spec}`: {reason}")]
    ParseSpec { spec: String, reason: String },

    /// Single-valued evaluation was requested where the operator is set-valued.
    #[error("operator is set-valued at the queried point: {0}")]
    SetValuedAt(String),

    /// The operation requires an affine operator.
    #[error("operation requires an affine operator, got {0}")]
    NotAffine(&'static str),

    /// The symmetric part of an affine operator's matrix has a negative eigenvalue,
    /// so the operator is not monotone.
    #[error("matrix symmetric part has negative eigenvalue {min_eig:.3e}; operator is not monotone")]
    NotMonotone { min_eig: f64 },

    /// Inverting an affine operator requires a nonsingular matrix.
    #[error("inverse operator requires a nonsingular matrix")]
    SingularMatrix,

    /// An iterative solver stopped without reaching its tolerance.
    #[error("solver did not converge: residual {residual:.3e} after {iters} iterations (tol {tol:.3e})")]
    NonConvergence {
        residual: f64,
        iters: usize,
        tol: f64,
    },

    /// A resolvent solve inside an outer loop failed; the trace up to the failing
    /// iteration is preserved by the caller.
    #[error("resolvent solve failed at outer iteration {iter}: {source}")]
    ResolventFailure {
        iter: usize,
        #[source]
        source: Box<Error>,
    },

    /// The conjugate term of a saddle problem is not supported by the requested
    /// augmented Lagrangian path.
    #[error("unsupported conjugate term for the augmented Lagrangian: {0}")]
    UnsupportedGStar(String),

    /// Too few usable data points for a rate or order estimate.
    #[error("insufficient data for estimation: {usable} usable pairs, need {needed}")]
    InsufficientData { usable: usize, needed: usize },
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
