use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Domain errors raised by the library.
///
/// Atoms are reported by index together with the label of their least point.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("the carrier has no points")]
    EmptyCarrier,
    #[error("duplicate point label `{0}`")]
    DuplicatePoint(String),
    #[error("unknown point label `{0}`")]
    UnknownPoint(String),
    #[error("not a partition of the carrier: {0}")]
    NotAPartition(String),
    #[error("set is not a union of atoms (point `{0}` splits an atom)")]
    NotMeasurable(String),
    #[error("space mismatch: {0}")]
    SpaceMismatch(String),
    #[error("{what} needs {needed} atoms, over the enumeration cap of {cap}")]
    CapacityExceeded {
        what: &'static str,
        needed: usize,
        cap: usize,
    },
    #[error("generator is not a π-system containing the carrier: {0}")]
    GeneratorNotPiSystem(String),
    #[error("expected {expected} values, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("negative weight on atom {atom} (`{label}`)")]
    NegativeWeight { atom: usize, label: String },
    #[error("absolute continuity violated on atom {atom} (`{label}`)")]
    AbsoluteContinuityViolated { atom: usize, label: String },
    #[error("functional is negative on the indicator of atom {atom} (`{label}`)")]
    NegativeFunctional { atom: usize, label: String },
    #[error("declared total {declared} differs from the sum {sum} of atom values")]
    InconsistentTotal { declared: String, sum: String },
    #[error("functional charges atom {atom} (`{label}`) which is null for the reference measure")]
    UnsupportedFunctional { atom: usize, label: String },
    #[error("invalid exponent: {0}")]
    InvalidExponent(String),
    #[error("function is negative on atom {atom} (`{label}`)")]
    NegativeFunction { atom: usize, label: String },
    #[error("row {row} has mass {mass}, not allowed for a {kind} kernel")]
    KernelKindViolated {
        row: usize,
        mass: String,
        kind: &'static str,
    },
    #[error("map splits the atom containing `{0}` across codomain atoms")]
    NotAtomMap(String),
    #[error("path space would have {atoms} atoms, over the cap of {cap}")]
    HorizonTooLarge { atoms: usize, cap: usize },
    #[error("measure does not live on a product space")]
    NotProductSpace,
    #[error("metric carrier must have singleton atoms")]
    NotDiscrete,
    #[error("invalid metric: {0}")]
    InvalidMetric(String),
    #[error("gamma must be strictly positive, got {0}")]
    InvalidGamma(String),
    #[error("threshold {0} is outside [0, 1]")]
    InvalidThreshold(String),
    #[error("formula parse error at byte {pos}: {msg}")]
    FormulaParse { pos: usize, msg: String },
    #[error("partition is not a congruence: `{left}` and `{right}` disagree on block {block}")]
    NotACongruence { left: String, right: String, block: usize },
    #[error("marginal totals differ: {left} vs {right}")]
    MassMismatch { left: String, right: String },
    #[error("kernels are not bisimilar: {0}")]
    NotBisimilar(String),
    #[error("coupling failed for matched pair: {0}")]
    CouplingFailed(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    /// Stable machine-readable name, used by the CLI and the C ABI.
    pub fn code(&self) -> &'static str {
        match self {
            Error::EmptyCarrier => "EmptyCarrier",
            Error::DuplicatePoint(_) => "DuplicatePoint",
            Error::UnknownPoint(_) => "UnknownPoint",
            Error::NotAPartition(_) => "NotAPartition",
            Error::NotMeasurable(_) => "NotMeasurable",
            Error::SpaceMismatch(_) => "SpaceMismatch",
            Error::CapacityExceeded { .. } => "CapacityExceeded",
            Error::GeneratorNotPiSystem(_) => "GeneratorNotPiSystem",
            Error::LengthMismatch { .. } => "LengthMismatch",
            Error::NegativeWeight { .. } => "NegativeWeight",
            Error::AbsoluteContinuityViolated { .. } => "AbsoluteContinuityViolated",
            Error::NegativeFunctional { .. } => "NegativeFunctional",
            Error::InconsistentTotal { .. } => "InconsistentTotal",
            Error::UnsupportedFunctional { .. } => "UnsupportedFunctional",
            Error::InvalidExponent(_) => "InvalidExponent",
            Error::NegativeFunction { .. } => "NegativeFunction",
            Error::KernelKindViolated { .. } => "KernelKindViolated",
            Error::NotAtomMap(_) => "NotAtomMap",
            Error::HorizonTooLarge { .. } => "HorizonTooLarge",
            Error::NotProductSpace => "NotProductSpace",
            Error::NotDiscrete => "NotDiscrete",
            Error::InvalidMetric(_) => "InvalidMetric",
            Error::InvalidGamma(_) => "InvalidGamma",
            Error::InvalidThreshold(_) => "InvalidThreshold",
            Error::FormulaParse { .. } => "FormulaParse",
            Error::NotACongruence { .. } => "NotACongruence",
            Error::MassMismatch { .. } => "MassMismatch",
            Error::NotBisimilar(_) => "NotBisimilar",
            Error::CouplingFailed(_) => "CouplingFailed",
            Error::Internal(_) => "Internal",
        }
    }
}
