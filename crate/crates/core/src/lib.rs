//! Order-6 complex Hadamard matrices by nullspace continuation.
//!
//! A complex Hadamard matrix of order 6 is a unitary whose entries all have
//! modulus `1/√6`; its columns form a basis unbiased with respect to the
//! standard basis. In the dephased gauge (first row and column real positive)
//! such a matrix is described by 25 free phases. This crate evaluates a
//! closed-form non-unitarity objective over that 25-dimensional phase space,
//! extracts the 4-dimensional nullspace of its Hessian at a Hadamard, and
//! traces curves of Hadamards by predictor–corrector steps constrained to the
//! evolving nullspace, producing a 4-parameter set of numerically integrated
//! Hadamards seeded at the Fourier matrix.
//!
//! Module map:
//! - [`phase_space`]: the 25-phase coordinate system, conversion to and from
//!   complex matrices, and a Gram-matrix non-unitarity oracle.
//! - [`objective`]: the non-unitarity `f`, its analytic gradient and Hessian.
//! - [`spectral`]: symmetric eigendecomposition, nullspace projectors, and
//!   the Newton correction in the curvature complement.
//! - [`continuation`]: the predictor–corrector integrator and the
//!   4-parameter generator.
//! - [`catalog`]: closed-form seeds (Fourier, the two Fourier affine
//!   families, Tao's matrix) and the four initial nullspace directions.
//! - [`mub`]: unbiasedness metrics between bases and MUB-set reports.
//! - [`persistence`]: bit-stable serialization of matrices, phase vectors,
//!   trajectories, and run manifests.

// Index loops mirror the paper-style double-pair sums over fixed-size
// matrices; iterator rewrites would obscure the index algebra.
#![allow(clippy::needless_range_loop)]

pub mod catalog;
pub mod continuation;
mod error;
mod linalg;
pub mod mub;
pub mod objective;
pub mod persistence;
pub mod phase_space;
pub mod spectral;

pub use error::Error;

/// Matrix order; the only supported dimension.
pub const ORDER: usize = 6;

/// Dimension of the free-phase space, `(ORDER - 1)²`.
pub const DIM: usize = 25;

/// A vector in the 25-dimensional phase space (phase shifts, gradients,
/// stepping directions all share the layout of
/// [`phase_space::PhaseVector`]).
pub type Vector25 = [f64; DIM];

/// A dense 25×25 real matrix, indexed like `Vector25` on both axes.
pub type Matrix25 = [[f64; DIM]; DIM];

/// A 6×6 complex matrix in row-major order.
pub type ComplexMatrix = [[num_complex::Complex64; ORDER]; ORDER];

/// A convenience alias for results carrying the crate error type.
pub type Result<T, E = Error> = std::result::Result<T, E>;
