use thiserror::Error;

use crate::tree::Address;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("series diverges at k = {k}: terms do not vanish")]
    DivergentSeries { k: u32 },

    #[error("alpha sequence is degenerate at k = {k} (zero denominator)")]
    DegenerateAlpha { k: u32 },

    #[error("letter {letter} outside alphabet for n = {n}")]
    AlphabetOutOfRange { letter: i32, n: usize },

    #[error("node budget exceeded: {nodes} nodes requested, cap {cap}")]
    BudgetExceeded { nodes: u128, cap: u64 },

    #[error("addresses {a} and {b} map to the same point")]
    DegenerateCollision { a: Address, b: Address },

    #[error("degenerate scales: {0}")]
    DegenerateScales(String),

    #[error("cone/sphere tangency violated at {what}: residual {residual:e}")]
    TangencyViolation { what: String, residual: f64 },

    #[error("overlapping holes on cap {what}")]
    OverlappingHoles { what: String },

    #[error("unsupported dimension {0} (grid mode handles 2 and 3)")]
    UnsupportedDimension(usize),

    #[error("empty point set")]
    EmptySet,

    #[error("no admissible flat height: feasible interval ({lo}, {hi}) is empty")]
    NoAdmissibleYb { lo: f64, hi: f64 },

    #[error("bump amplitude {0} must lie in (0, 1)")]
    AmplitudeTooLarge(f64),

    #[error("one-form norm {norm} >= 1 violates positivity")]
    PositivityViolated { norm: f64 },

    #[error("point {0:?} outside the domain")]
    OutsideDomain(Vec<f64>),

    #[error("seam mismatch: {0}")]
    SeamMismatch(String),

    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
