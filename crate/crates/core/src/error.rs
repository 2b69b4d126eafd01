use thiserror::Error;

/// Errors raised by the engines in this crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{base} and {modulus} are not coprime")]
    NotCoprime { base: u64, modulus: u64 },

    #[error("zero coefficient at position {0}")]
    ZeroCoefficient(usize),

    #[error("bases {k} and {l} are multiplicatively dependent ({k}^{m} = {l}^{n}); rewrite {l}^N over {k}^N with the definability rewrite")]
    DependentBases { k: u64, l: u64, m: u64, n: u64 },

    #[error("precision exhausted at {bits} bits")]
    PrecisionExhausted { bits: u32 },

    #[error("search budget exhausted: {0}")]
    BudgetExhausted(String),

    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("sort error: {0}")]
    Sort(String),

    #[error("window too large: estimated cost {cost} exceeds cap {cap}")]
    WindowTooLarge { cost: u128, cap: u128 },

    #[error("arithmetic overflow while evaluating {0}")]
    Overflow(String),

    #[error("out of scope: {0}")]
    OutOfScope(String),
}

pub type Result<T> = std::result::Result<T, Error>;
