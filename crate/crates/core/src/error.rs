use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("value {value} is outside the domain [0, {size})")]
    DomainViolation { value: u128, size: u128 },

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("round material has {subkeys} subkeys but {rounds} rounds")]
    RoundMismatch { subkeys: usize, rounds: usize },

    #[error("{rounds} rounds exceeds the cap of {cap}")]
    TooManyRounds { rounds: usize, cap: usize },

    #[error("tweak of {0} bytes exceeds the maximum length")]
    TweakTooLong(usize),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("no round count up to {cap} reaches the target advantage")]
    CapExceeded { cap: u32 },

    #[error("invalid format: {0}")]
    Format(String),

    #[error("invalid key: {0}")]
    Key(String),

    #[error("distribution is too large to enumerate ({support} tuples, limit {limit})")]
    Intractable { support: u128, limit: u128 },
}

pub type Result<T> = std::result::Result<T, Error>;
