use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{name} = {width} is outside the supported range 4..=32")]
    WidthOutOfRange { name: &'static str, width: u32 },
    #[error("word {raw:#x} does not fit in {m} bits")]
    WordOutOfRange { raw: u64, m: u32 },
    #[error("lambda out of range: {raw:#x} with k = {k}")]
    LambdaOutOfRange { raw: u64, k: u32 },
    #[error("{numerator}/{denominator} is not a proper fraction")]
    NotAFraction { numerator: u64, denominator: u64 },
    #[error("session seed word {index} is zero")]
    ZeroSeed { index: usize },
    #[error("expected {expected} session words, got {got}")]
    SeedCount { expected: usize, got: usize },
    #[error("invalid key: {0}")]
    InvalidKey(String),
    #[error("entropy source exhausted")]
    InsufficientEntropy,
    #[error("entropy source failure: {0}")]
    EntropySource(String),
    #[error(transparent)]
    KeyParse(#[from] KeyParseError),
    #[error(transparent)]
    Container(#[from] ContainerError),
    #[error("{0}")]
    Analysis(String),
    #[error("search space of {size} states exceeds the cap of {cap} (2^{bits:.1} attempts)")]
    SpaceTooLarge { size: u128, cap: u128, bits: f64 },
    #[error("length mismatch: {left} vs {right} words")]
    LengthMismatch { left: usize, right: usize },
    #[error("{0}")]
    Input(String),
}

/// Key file problems, each tagged with the 1-based line number.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KeyParseError {
    #[error("line {line}: malformed line, expected name=hex")]
    Malformed { line: usize },
    #[error("line {line}: unknown field `{name}`")]
    UnknownField { line: usize, name: String },
    #[error("line {line}: expected field `{expected}`, found `{found}`")]
    OutOfOrder { line: usize, expected: String, found: String },
    #[error("line {line}: missing field `{name}`")]
    MissingField { line: usize, name: String },
    #[error("line {line}: invalid hex value for `{name}`")]
    BadHex { line: usize, name: String },
    #[error("line {line}: lambda out of range")]
    LambdaOutOfRange { line: usize },
    #[error("line {line}: field `{name}` out of range")]
    OutOfRange { line: usize, name: String },
    #[error("key fails validation: {0}")]
    Invalid(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ContainerError {
    #[error("bad magic, not a CHS1 container")]
    BadMagic,
    #[error("container truncated")]
    Truncated,
    #[error("sentinel mismatch in block {block} (corrupted container or wrong key)")]
    SentinelMismatch { block: usize },
    #[error("length header claims {claimed} bytes but only {available} are present")]
    LengthExceedsPayload { claimed: u64, available: u64 },
    #[error("plaintext too large")]
    TooLarge,
    #[error("byte length {byte_len} inconsistent with {words} words of {m} bits")]
    PackLength { byte_len: usize, words: usize, m: u32 },
}
