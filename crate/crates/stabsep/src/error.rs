use thiserror::Error;

/// Errors reported by state, operator, and decision routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("party index {index} out of range for {parties} parties")]
    IndexOutOfRange { index: usize, parties: usize },

    #[error("total dimension {0} exceeds the supported limit of {1}")]
    DimensionTooLarge(usize, usize),

    #[error("invalid Hilbert shape: {0}")]
    InvalidShape(String),

    #[error("zero vector cannot be normalized into a state")]
    ZeroVector,

    #[error("factor on party {party} is numerically singular (rcond {rcond:.3e})")]
    SingularFactor { party: usize, rcond: f64 },

    #[error("state is not critical (max deviation {0:.3e}); probe applies to critical states only")]
    NotCritical(f64),

    #[error("no convergence to a critical state after {sweeps} sweeps (last deviation {deviation:.3e})")]
    NoConvergence { sweeps: usize, deviation: f64 },

    #[error("reduced density matrix on party {party} is numerically singular (rcond {rcond:.3e}); state is not n-way entangled")]
    SingularReduction { party: usize, rcond: f64 },

    #[error("stabilizer group is not unitary")]
    NonUnitaryStabilizer,

    #[error("stabilizer group has {0} elements, above the supported limit of {1}")]
    GroupTooLarge(usize, usize),

    #[error("unitarization factor on party {party} is numerically singular")]
    SingularDelta { party: usize },

    #[error("unitarization produced a non-unitary group (residual {0:.3e}); input is not a consistent stabilizer group")]
    UnitarizationFailed(f64),

    #[error("unknown catalog entry `{0}`")]
    UnknownCatalogEntry(String),

    #[error("no invariant of degree {degree} is implemented for shape {shape}")]
    UnknownInvariant { degree: usize, shape: String },

    #[error("invariant value {0:.3e} is below 1e-10; the phase check requires a non-vanishing invariant")]
    VanishingInvariant(f64),

    #[error("factor on party {party} is not positive semi-definite (min eigenvalue {min_eig:.3e})")]
    NonPositiveFactor { party: usize, min_eig: f64 },

    #[error("malformed ensemble: {0}")]
    InconsistentEnsemble(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("could not solve for the local factors of the u-basis permutation: {0}")]
    PermutationUnrealizable(String),
}

pub type Result<T> = std::result::Result<T, Error>;
