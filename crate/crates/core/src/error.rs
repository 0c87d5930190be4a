use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("profile cannot decide the relation between {a} and {b}")]
    UnknownRelation { a: String, b: String },

    #[error("no convolution rule covers {a} * {b}")]
    UnknownConvolution { a: String, b: String },

    #[error("symmetric power of infinite-multiplicity class {class} has no absorbing rule")]
    InfiniteExpansion { class: String },

    #[error("no power rule for base {base} raised to {k}")]
    UnknownPowerRule { base: String, k: String },

    #[error("the zero spectral type has no multiplicities")]
    EmptyType,

    #[error("multiplicity set must be nonempty")]
    EmptySet,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("regime `{regime}` has no saturation rule for the Fock expansion")]
    NoSaturationRule { regime: String },

    #[error("level-1 class {low} is {verdict} relative to higher-level class {high}")]
    DisjointnessViolation { low: String, high: String, verdict: String },

    #[error("arithmetic overflow: {0}")]
    Overflow(String),

    #[error("invalid multiplicity function: {0}")]
    InvalidMultiplicityFunction(String),

    #[error("empty interval ({lo}, {hi}]")]
    EmptyInterval { lo: String, hi: String },

    #[error("search bound {bound} exceeded with {unchecked} candidate times unchecked")]
    SearchBoundExceeded { bound: String, unchecked: usize },

    #[error("{requested} symbols, over the budget of {budget}")]
    BudgetExceeded { requested: String, budget: u64 },

    #[error("lag {k} out of range for word of length {len}")]
    OutOfRange { k: u64, len: u64 },

    #[error("insufficient data: {have} correlation values, need at least {need}")]
    InsufficientData { have: usize, need: usize },

    #[error("depth {depth} exceeds the enumeration limit of {max}")]
    DepthTooLarge { depth: usize, max: usize },

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Errors that mean "the engine refuses to decide" rather than bad input.
    pub fn is_refusal(&self) -> bool {
        matches!(
            self,
            Error::UnknownRelation { .. }
                | Error::UnknownConvolution { .. }
                | Error::InfiniteExpansion { .. }
                | Error::UnknownPowerRule { .. }
                | Error::NoSaturationRule { .. }
                | Error::DisjointnessViolation { .. }
                | Error::SearchBoundExceeded { .. }
                | Error::BudgetExceeded { .. }
                | Error::DepthTooLarge { .. }
                | Error::Overflow(_)
        )
    }
}
