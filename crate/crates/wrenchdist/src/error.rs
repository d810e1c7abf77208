use thiserror::Error;

/// Errors surfaced by the distribution and decomposition routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("right-hand side is not in the range of the matrix (residual {residual:.3e})")]
    Inconsistent { residual: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("interaction residuals are only defined for force-only contact sets")]
    ModelMismatch,

    #[error("full equivalence mode requires an inertia target")]
    MissingInertiaTarget,

    #[error("torque share is positive but the contact set has no torque-capable contact")]
    NoTorqueContacts,

    #[error("virtual body inertia is singular or in the pure-torque limit")]
    SingularInertia,

    #[error("grasp matrix is rank deficient (rank {rank} of {expected})")]
    RankDeficient { rank: usize, expected: usize },

    #[error("at least two contacts are required to form kinematic constraints")]
    TooFewContacts,

    #[error("a force-carrying slot has zero virtual mass; cannot form the constrained system")]
    SingularMass,

    #[error("virtual mass system is infeasible: {0}")]
    Infeasible(String),

    #[error("torque-capable contacts are not supported in a translational wrench space")]
    UnsupportedContactModel,

    #[error("invalid problem file: {0}")]
    InvalidProblem(String),
}

pub type Result<T> = std::result::Result<T, Error>;
