use thiserror::Error;

/// Errors raised anywhere in the core library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("ball straddles the half-integer boundary {boundary}; refine precision")]
    AmbiguousBall { boundary: String },
    #[error("value {0} lies outside [-1/2, 1/2]")]
    OutOfRange(String),
    #[error("ball is already wider than the requested precision")]
    NotRefinable,
    #[error("precision exhausted at generation {generation}")]
    PrecisionExhausted { generation: usize },
    #[error("residue is exactly -1/2 at generation {generation}; sign undefined")]
    BoundaryUndefined { generation: usize },
    #[error("invalid symbol ({a},{sign})")]
    InvalidSymbol { a: u64, sign: char },
    #[error("invalid tail: {0}")]
    InvalidTail(String),
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error("the two values are equal")]
    Equal,
    #[error("expansions agree to depth {0}; split undecided")]
    Undecided(usize),
    #[error("input is rational; the expansion terminated")]
    TerminatedInput,
    #[error("rational rotation number: divisor vanishes at n = {n}")]
    RationalRotation { n: usize },
    #[error("series has a zero coefficient at n = {n}")]
    DegenerateSeries { n: usize },
    #[error("w lies on the pole lattice Z/alpha")]
    PoleAtLattice,
    #[error("every pair was excluded by its error bars")]
    InsufficientPrecision,
    #[error("operands live in different quadratic fields")]
    IncompatibleFields,
    #[error("division by zero")]
    DivisionByZero,
    #[error("continued-fraction entry does not fit in 64 bits")]
    EntryOverflow,
    #[error("cannot parse alpha spec `{spec}`: {reason}")]
    Parse { spec: String, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
