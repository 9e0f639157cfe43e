use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("grid size {0} is not a power of two >= 8")]
    BadGridSize(usize),
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("generator parameter out of range: {0}")]
    ParamOutOfRange(String),
    #[error("grid geometry mismatch: {0}")]
    GeometryMismatch(String),
    #[error("operator arity is {expected}, got {got} arguments")]
    ArityMismatch { expected: usize, got: usize },
    #[error("quasi-norm exponent must be positive, got {0}")]
    BadExponent(f64),
    #[error("scale range [{lo}, {hi}] does not cover the representable band {need}")]
    ScaleRangeTooNarrow { lo: i32, hi: i32, need: String },
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("finite-difference refinement insufficient: {0}")]
    InsufficientRefinement(String),
    #[error("exponents violate the Holder relation 1/r = 1/p + 1/q: {0}")]
    HolderRelation(String),
    #[error("cannot apply a negative-order derivative to a low-pass slot")]
    LowPassSlotDerivative,
    #[error("tile scale {k} outside representable range 0..={max}")]
    ScaleOutOfRange { k: i32, max: i32 },
    #[error("coefficient table mode mismatch: table holds type {have}, operator wants {want}")]
    ModeTileMismatch { have: u8, want: u8 },
    #[error("coefficient tables do not share a tile index set")]
    IndexMismatch,
    #[error("theta weights must lie in [0,1) and sum to 1")]
    ThetaConstraint,
    #[error("threshold search failed: {0}")]
    ThresholdSearch(String),
    #[error("tile interval not contained in the target set")]
    TileOutsideSet,
    #[error("level ladder start too small: need at least {need}")]
    LadderStartTooSmall { need: i32 },
    #[error("quadrature tolerance not reached: {0}")]
    QuadratureTolerance(String),
    #[error("point {x} falls outside the domain and wraparound is disabled")]
    OutsideDomain { x: f64 },
    #[error("envelope data missing from coefficient table (needed for energies)")]
    MissingEnvelope,
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad file format: {0}")]
    BadFormat(String),
}

pub type Result<T> = std::result::Result<T, Error>;
