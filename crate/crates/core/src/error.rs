use alloc::string::String;

/// Errors raised by the simulation core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A Fock space needs at least two levels.
    #[error("fock cutoff must be at least 2, got {0}")]
    InvalidCutoff(usize),
    /// Operand dimensions do not compose.
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch {
        /// Required dimension.
        expected: usize,
        /// Dimension that was supplied.
        found: usize,
    },
    /// A state's weight beyond the cutoff is too large to discard.
    #[error("discarded Fock tail weight {weight:.3e} exceeds tolerance")]
    TailTooLarge {
        /// Norm-squared weight on levels at or above the cutoff.
        weight: f64,
    },
    /// Logical codewords overlap after truncation.
    #[error("codewords are not orthogonal: |<0_L|1_L>| = {overlap:.3e}")]
    NonOrthogonal {
        /// Modulus of the codeword overlap.
        overlap: f64,
    },
    /// The construction needs more Fock levels than available.
    #[error("construction needs cutoff {needed}, space has {cutoff}")]
    CutoffExceeded {
        /// Smallest cutoff that would work.
        needed: usize,
        /// Cutoff of the space in use.
        cutoff: usize,
    },
    /// A parameter is outside its domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    /// A matrix claimed to be Hermitian, unitary or physical is not.
    #[error("{what} check failed with defect {defect:.3e}")]
    NotPhysical {
        /// Which property was checked.
        what: &'static str,
        /// Size of the violation.
        defect: f64,
    },
    /// The codewords do not have a definite photon-number parity.
    #[error("codewords do not have definite photon-number parity")]
    ParityUndefined,
    /// The single-CF variant needs like-parity codewords.
    #[error("local-rotation variant requires a like-parity code")]
    VariantParityMismatch,
    /// Adaptive spherical quadrature did not reach its tolerance.
    #[error("quadrature did not converge: last change {change:.3e} at order {order}")]
    QuadratureNotConverged {
        /// Last order attempted.
        order: usize,
        /// Change between the last two orders.
        change: f64,
    },
    /// Haar moments are only provided for t = 1, 2, 3.
    #[error("Haar moment order {0} is not supported")]
    UnsupportedMomentOrder(usize),
    /// The heralded branch has zero probability, so the output is undefined.
    #[error("herald probability vanished")]
    ZeroSuccess,
}

/// Result alias for the simulation core.
pub type Result<T, E = Error> = core::result::Result<T, E>;

impl Error {
    /// Stable snake-case tag of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Self::InvalidCutoff(_) => "invalid_cutoff",
            Self::DimensionMismatch { .. } => "dimension_mismatch",
            Self::TailTooLarge { .. } => "tail_too_large",
            Self::NonOrthogonal { .. } => "non_orthogonal",
            Self::CutoffExceeded { .. } => "cutoff_exceeded",
            Self::InvalidParameter(_) => "invalid_parameter",
            Self::NotPhysical { .. } => "not_physical",
            Self::ParityUndefined => "parity_undefined",
            Self::VariantParityMismatch => "variant_parity_mismatch",
            Self::QuadratureNotConverged { .. } => "quadrature_not_converged",
            Self::UnsupportedMomentOrder(_) => "unsupported_moment_order",
            Self::ZeroSuccess => "zero_success",
        }
    }
}
