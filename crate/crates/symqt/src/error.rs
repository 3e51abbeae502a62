//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("element index {index} out of range for group of order {order}")]
    IndexOutOfRange { index: usize, order: usize },

    #[error("invalid Cayley table at ({row}, {col}): {reason}")]
    InvalidCayley {
        row: usize,
        col: usize,
        reason: String,
    },

    #[error("group axiom violated: {0}")]
    GroupAxiom(String),

    #[error("action table invalid: {0}")]
    InvalidAction(String),

    #[error("subset must be non-empty")]
    EmptySubset,

    #[error("subgroup {0} is not normal in its parent")]
    NotNormal(String),

    #[error("size limit exceeded: {what} = {got} > {limit}")]
    SizeLimit {
        what: &'static str,
        got: usize,
        limit: usize,
    },

    #[error("parameter `{name}` is not permissible: theta({phi1}) = theta({phi2}) but g={g} maps them to distinct level sets")]
    NotPermissible {
        name: String,
        phi1: usize,
        phi2: usize,
        g: usize,
    },

    #[error("unknown label `{label}` for parameter `{name}`")]
    UnknownLabel { name: String, label: String },

    #[error("representation is not a homomorphism within tolerance (deviation {deviation:.3e} at pair ({g}, {h}))")]
    NotHomomorphism { g: usize, h: usize, deviation: f64 },

    #[error("matrix for element {g} is not unitary within tolerance (deviation {deviation:.3e})")]
    NotUnitary { g: usize, deviation: f64 },

    #[error(
        "projection is not idempotent (deviation {0:.3e}); input is not an irreducible character"
    )]
    NotIdempotent(f64),

    #[error("irrep list incomplete: sum of squared dimensions {got} != group order {expected}")]
    IncompleteIrreps { got: usize, expected: usize },

    #[error("representation must be irreducible for this operation")]
    NotIrreducible,

    #[error("action must be transitive and exact on the hyperparameter set")]
    NotTransitiveExact,

    #[error("zero projection of the reference vector on needed block {block} (dimension {dim})")]
    ZeroProjectionBlock { block: usize, dim: usize },

    #[error("target function has components outside the reachable span (residual {residual:.3e} > {tol:.1e})")]
    UnreachableComponents { residual: f64, tol: f64 },

    #[error("solve residual {residual:.3e} above tolerance {tol:.1e}: V_a does not contain the state space for parameter `{name}`")]
    ContainmentFailed {
        name: String,
        residual: f64,
        tol: f64,
    },

    #[error("operator basis tags differ: `{left}` vs `{right}`")]
    BasisMismatch { left: String, right: String },

    #[error("vector is not unit norm (|norm - 1| = {0:.3e})")]
    NotUnitNorm(f64),

    #[error("prior is not a probability vector: {0}")]
    BadPrior(String),

    #[error("likelihood cannot be normalized: {0}")]
    BadLikelihood(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("no spectrum candidate admits an eigen-aligned operator for parameter `{0}`")]
    NoAlignedSpectrum(String),

    #[error("value `{value}` is outside the spectrum of `{name}`")]
    OutsideSpectrum { name: String, value: String },

    #[error("model document invalid at `{field}`: {reason}")]
    Schema { field: String, reason: String },

    #[error("window sealed: {0}")]
    WindowSealed(String),

    #[error("argument out of range: {0}")]
    OutOfRange(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// CLI exit code: 2 validation, 3 numerical residual, 4 hypothesis violation.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::UnreachableComponents { .. } | Error::ContainmentFailed { .. } => 3,
            Error::ZeroProjectionBlock { .. }
            | Error::NotPermissible { .. }
            | Error::NotTransitiveExact
            | Error::NoAlignedSpectrum(_)
            | Error::NotIrreducible => 4,
            _ => 2,
        }
    }
}
