use thiserror::Error;

/// Errors produced by construction, calculus and verification routines.
///
/// Verifier precondition violations are *not* errors: they are reported as
/// `Outcome::PreconditionFailed` so a campaign can keep running. `Error` is
/// reserved for malformed inputs and numerical breakdowns.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("eigenvalue {value} outside domain [{lo}, {hi}]")]
    SpectrumOutsideDomain { value: f64, lo: f64, hi: f64 },

    #[error("tuple is not abelian: worst commutator norm {worst:.3e} exceeds {tol:.3e}")]
    NotAbelian { worst: f64, tol: f64 },

    #[error("tuples are not compatible: residual {residual:.3e} exceeds {tol:.3e}")]
    NotCompatible { residual: f64, tol: f64 },

    #[error("joint diagonalization failed: residual {residual:.3e}")]
    JointDiagonalizationFailed { residual: f64 },

    #[error("functional is not positive: min eigenvalue {min_eig:.3e}")]
    NotPositive { min_eig: f64 },

    #[error("element is not in the centralizer: commutator norm {norm:.3e} exceeds {tol:.3e}")]
    CentralizerViolation { norm: f64, tol: f64 },

    #[error("expected a unit vector, got norm {norm}")]
    NonUnitVector { norm: f64 },

    #[error("column is not unital: residual {residual:.3e}")]
    NotUnital { residual: f64 },

    #[error("every joint-spectrum atom has zero weight under the functional")]
    AllAtomsNull,

    #[error("arity mismatch: function takes {expected} variables, got {found}")]
    ArityMismatch { expected: usize, found: usize },

    #[error("unknown catalog function `{0}`")]
    UnknownFunction(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("linear program is infeasible (solver bug: the zero split is always feasible)")]
    LpInfeasible,

    #[error("linear program is unbounded (solver bug: the objective is bounded below by 0)")]
    LpUnbounded,

    #[error("serialization: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
