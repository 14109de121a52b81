use thiserror::Error;

/// Every failure the library can report. The CLI maps each variant to a
/// stable machine-readable code via [`Error::code`].
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid field specification: {0}")]
    InvalidFieldSpec(String),
    #[error("Hensel iteration for the Frobenius lift did not converge")]
    FrobeniusLiftFailure,
    #[error("division by an element that is zero to the tracked precision")]
    DivisionByZero,
    #[error("no precision left after the operation")]
    PrecisionExhausted,
    #[error("insufficient precision: {0}")]
    InsufficientPrecision(String),
    #[error("matrix is not invertible to the tracked precision")]
    NonInvertible,
    #[error("splitting needs a residue field of degree {required} (have {available})")]
    ResidueFieldTooSmall { required: usize, available: usize },
    #[error("field specifications do not match")]
    SpecMismatch,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("Lie algebra is not nilpotent: lower central series stabilises at dimension {0}")]
    NotNilpotent(usize),
    #[error("slope {0} outside the allowed range")]
    SlopeOutOfRange(String),
    #[error("slope {0} is not strictly negative")]
    SlopeNotStrictlyNegative(String),
    #[error("BCH degree {requested} exceeds the configured bound {bound}")]
    DegreeTooLarge { requested: usize, bound: usize },
    #[error("no Frobenius-equivariant complement available: {0}")]
    SplitUnavailable(String),
    #[error("unsupported group type: {0}")]
    UnsupportedType(String),
    #[error("cocharacter is not dominant: {0}")]
    NotDominant(String),
    #[error("invalid root datum: {0}")]
    InvalidRootDatum(String),
    #[error("matrix does not lie in the group: {0}")]
    NotInGroup(String),
    #[error("parameters do not match: {0}")]
    ParameterMismatch(String),
    #[error("substituted series must have zero constant term")]
    NonzeroConstantTerm,
    #[error("sequence d_n is empty")]
    SequenceTooShort,
    #[error("degree bound {bound} cannot certify a congruence modulo degree {needed}")]
    DegreeBoundTooSmall { needed: u64, bound: String },
    #[error("slope order violated: need mu0 < mu1, got mu0 = {mu0}, mu1 = {mu1}")]
    SlopeOrderViolated { mu0: String, mu1: String },
    #[error("algebra has no lattice")]
    MissingLattice,
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("internal invariant violated: {0}")]
    InvariantViolated(String),
    #[error("malformed input: {0}")]
    Malformed(String),
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidFieldSpec(_) => "InvalidFieldSpec",
            Error::FrobeniusLiftFailure => "FrobeniusLiftFailure",
            Error::DivisionByZero => "DivisionByZero",
            Error::PrecisionExhausted => "PrecisionExhausted",
            Error::InsufficientPrecision(_) => "InsufficientPrecision",
            Error::NonInvertible => "NonInvertible",
            Error::ResidueFieldTooSmall { .. } => "ResidueFieldTooSmall",
            Error::SpecMismatch => "SpecMismatch",
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::NotNilpotent(_) => "NotNilpotent",
            Error::SlopeOutOfRange(_) => "SlopeOutOfRange",
            Error::SlopeNotStrictlyNegative(_) => "SlopeNotStrictlyNegative",
            Error::DegreeTooLarge { .. } => "DegreeTooLarge",
            Error::SplitUnavailable(_) => "SplitUnavailable",
            Error::UnsupportedType(_) => "UnsupportedType",
            Error::NotDominant(_) => "NotDominant",
            Error::InvalidRootDatum(_) => "InvalidRootDatum",
            Error::NotInGroup(_) => "NotInGroup",
            Error::ParameterMismatch(_) => "ParameterMismatch",
            Error::NonzeroConstantTerm => "NonzeroConstantTerm",
            Error::SequenceTooShort => "SequenceTooShort",
            Error::DegreeBoundTooSmall { .. } => "DegreeBoundTooSmall",
            Error::SlopeOrderViolated { .. } => "SlopeOrderViolated",
            Error::MissingLattice => "MissingLattice",
            Error::Precondition(_) => "Precondition",
            Error::InvariantViolated(_) => "InvariantViolated",
            Error::Malformed(_) => "Malformed",
        }
    }

    pub(crate) fn precision(ctx: impl Into<String>) -> Self {
        Error::InsufficientPrecision(ctx.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
