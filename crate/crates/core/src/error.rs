use thiserror::Error;

use crate::continuation::Trajectory;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Phase index outside rows 2..=6, columns 2..=6.
    #[error("phase index ({row},{col}) out of range; rows and columns run 2..=6")]
    IndexOutOfRange { row: usize, col: usize },

    /// A phase component is NaN or infinite.
    #[error("phase component {index} is not finite")]
    NonFinitePhase { index: usize },

    /// Wrong number of phase components.
    #[error("expected {expected} phase components, got {got}")]
    PhaseCount { expected: usize, got: usize },

    /// A matrix entry is zero, so its phase is undefined.
    #[error("matrix entry ({row},{col}) is zero; cannot dephase")]
    ZeroEntry { row: usize, col: usize },

    /// Entry moduli are not all equal within the stated tolerance.
    #[error("entry modulus spread {spread:.3e} exceeds {limit:.1e}; matrix is not equi-modular")]
    NotEquimodular { spread: f64, limit: f64 },

    /// Matrix violates the dephased gauge (first row/column not `1/√6`).
    #[error("matrix is not in the dephased gauge: entry ({row},{col}) differs from 1/sqrt(6)")]
    NotDephased { row: usize, col: usize },

    /// Input to the eigensolver is not symmetric.
    #[error("matrix asymmetry {asymmetry:.3e} exceeds 1e-9; eigensolver requires symmetric input")]
    NotSymmetric { asymmetry: f64 },

    /// A matrix holds NaN or infinite entries.
    #[error("matrix contains non-finite entries")]
    NonFiniteMatrix,

    /// The Jacobi sweep failed to reach the off-diagonal tolerance.
    #[error("eigensolver did not reach off-diagonal norm {tol:.1e} within {sweeps} sweeps")]
    EigNotConverged { tol: f64, sweeps: usize },

    /// The Hessian nullspace does not have the expected dimension 4.
    #[error("nullspace dimension {found} at step {step}, expected 4")]
    NullspaceDimension { found: usize, step: usize },

    /// Eigenvalues too close to the nullspace threshold to separate cleanly.
    #[error(
        "ill-conditioned nullspace gap at step {step}: fifth-smallest |lambda| = {fifth:.3e} < {required:.3e}"
    )]
    IllConditionedGap { fifth: f64, required: f64, step: usize },

    /// The transported direction left the tangent space of the manifold.
    #[error("direction lost at step {step}: nullspace projection norm {projection:.3e} of {previous:.3e}")]
    DirectionLost { projection: f64, previous: f64, step: usize },

    /// A step failed its acceptance checks even after local step halving.
    #[error("step {step} rejected after {halvings} halvings: {reason}")]
    StepRejected { step: usize, halvings: usize, reason: String },

    /// The Newton corrector did not reach its residual tolerance.
    #[error(
        "Newton corrector stalled at step {step}: complement gradient {residual:.3e} after {iterations} iterations"
    )]
    NewtonStalled { residual: f64, iterations: usize, step: usize },

    /// Curve seeds must already be Hadamards.
    #[error("seed is not a Hadamard: f = {f:.3e} exceeds {limit:.1e}")]
    SeedNotHadamard { f: f64, limit: f64 },

    /// Integrator configuration violates its invariants.
    #[error("invalid integrator config: {0}")]
    InvalidConfig(String),

    /// A shipped fixture failed its construction self-check.
    #[error("fixture self-check failed: f = {f:.3e}")]
    FixtureSelfCheck { f: f64 },

    /// Basis vectors are not orthonormal within tolerance.
    #[error("basis '{label}' is not orthonormal: max Gram deviation {deviation:.3e} exceeds {limit:.1e}")]
    NotOrthonormal { label: String, deviation: f64, limit: f64 },

    /// A MUB report needs at least two bases.
    #[error("MUB report needs at least 2 bases, got {got}")]
    TooFewBases { got: usize },

    /// Malformed file content.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Structurally valid file with the wrong schema.
    #[error("schema violation: {0}")]
    Schema(String),

    /// Unknown seed identifier string.
    #[error("unknown seed id '{0}'; expected fourier, fourier-family:a,b, fourier-t-family:a,b, or tao")]
    UnknownSeedId(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    /// A curve integration aborted mid-run; the partial trajectory up to the
    /// failing step is retained.
    #[error("integration aborted after {completed} accepted steps: {source}")]
    Aborted {
        partial: Box<Trajectory>,
        completed: usize,
        #[source]
        source: Box<Error>,
    },
}
