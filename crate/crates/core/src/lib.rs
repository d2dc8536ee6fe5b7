//! Forward and inverse source problems for the time-fractional evolution
//! equation `D_t^ρ u + A u = g(t) f`, `u(0) = φ`, with the overdetermination
//! `∫₀ᵀ u dt = ψ`, for a self-adjoint positive operator `A` given by its
//! eigenpairs. `D_t^ρ` is the Caputo derivative of order `ρ ∈ (0, 1]`.
//!
//! Everything is generic over the scalar type (`f32` or `f64`); the `*64`
//! aliases below name the double-precision instantiations.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod forward;
pub mod inverse;
pub mod kernel;
pub mod scalar;
pub mod special;
pub mod spectral;

pub use error::{Error, Result};
pub use forward::{
    caputo_l1, integrate_trajectory, integrate_trajectory_by_quadrature, residual, residual_in_window, solve_forward,
    ForwardProblem, TrajectorySample,
};
pub use inverse::{
    check_solvability, partition_modes, reconstruct_u, solve_inverse, Criterion, InverseProblem, InverseSolution,
    ModePartition, ViolationReport,
};
pub use kernel::{convolve_source, double_integral_identity_check, p_k, psi_coefficient, QuadratureRule, TimeProfile};
pub use scalar::Scalar;
pub use special::{gamma, ml_asymptotic_leading, ml_eval, MLParams};
pub use spectral::{apply_power, norm_tau, project, reconstruct, SpectralOperator, SpectralVector};

pub type MLParams64 = MLParams<f64>;
pub type SpectralOperator64 = SpectralOperator<f64>;
pub type SpectralVector64 = SpectralVector<f64>;
pub type TimeProfile64 = TimeProfile<f64>;
pub type QuadratureRule64 = QuadratureRule<f64>;
pub type ForwardProblem64 = ForwardProblem<f64>;
pub type InverseProblem64 = InverseProblem<f64>;
pub type InverseSolution64 = InverseSolution<f64>;

pub type SpectralOperator32 = SpectralOperator<f32>;
pub type SpectralVector32 = SpectralVector<f32>;
pub type TimeProfile32 = TimeProfile<f32>;
