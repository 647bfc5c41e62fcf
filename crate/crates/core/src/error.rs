use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected d={expected}, got d={found}")]
    DimensionMismatch { expected: u32, found: u32 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("index (j={j}, channel={channel}, lattice={lattice}) is not in the level structure")]
    NotInStructure { j: i32, channel: u32, lattice: u64 },

    #[error("duplicate index (j={j}, channel={channel}, lattice={lattice})")]
    DuplicateIndex { j: i32, channel: u32, lattice: u64 },

    #[error("level {level} out of range {min}..={max}")]
    LevelOutOfRange { level: i32, min: i32, max: i32 },

    #[error("support of size {size} exceeds the brute-force limit {limit}")]
    SupportTooLarge { size: usize, limit: usize },

    /// Parameters violate the hypotheses of the operator (e.g. a missing
    /// compactness condition).
    #[error("parameter regime not admissible: {0}")]
    Regime(String),

    /// The requested width asymptotics are not established for this parameter range.
    #[error("uncovered regime: {0}")]
    UncoveredRegime(String),

    #[error("family regularity does not cover s={s}, p={p}: admissible s in ({lo}, {hi})")]
    Regularity { s: f64, p: String, lo: f64, hi: f64 },

    #[error("degenerate samples: {0}")]
    Degenerate(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
