use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::EncodingLevel;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    DimensionMismatch { expected: usize, found: usize },
    ZeroVector,
    NonFinite,
    EmptyInput,
    UnequalTargetSizes { targ1: usize, targ2: usize },
    DegenerateDistribution,
    TooLargeForExact { pooled: usize, limit: usize },
    MissingEmbedding(Vec<String>),
    InvalidConfig(&'static str),
    Schema(String),
    UnbalancedTargets { targ1: usize, targ2: usize },
    DuplicateItem { set: &'static str, item: String },
    InvalidFocusSpan { item: String, start: usize, end: usize },
    UnrecognizedName(String),
    BadTemplate { template: String, slots: usize },
    UnknownVariant(u8),
    AllTokensOov(String),
    DimDrift { expected: usize, found: usize },
    DuplicateToken(String),
    ConflictingDuplicate { model_id: String, level: EncodingLevel, text: String },
    LexiconMismatch,
    MismatchedPair(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::ZeroVector => f.write_str("zero vector has no direction"),
            Error::NonFinite => f.write_str("vector has a non-finite component"),
            Error::EmptyInput => f.write_str("empty input"),
            Error::UnequalTargetSizes { targ1, targ2 } => {
                write!(f, "target sets differ in size: targ1 has {targ1}, targ2 has {targ2}")
            }
            Error::DegenerateDistribution => {
                f.write_str("association scores have zero standard deviation")
            }
            Error::TooLargeForExact { pooled, limit } => write!(
                f,
                "{pooled} pooled targets exceed the exact enumeration limit of {limit}"
            ),
            Error::MissingEmbedding(items) => {
                write!(f, "no embedding for {} item(s): ", items.len())?;
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{item:?}")?;
                }
                Ok(())
            }
            Error::InvalidConfig(msg) => write!(f, "invalid configuration: {msg}"),
            Error::Schema(msg) => write!(f, "schema error: {msg}"),
            Error::UnbalancedTargets { targ1, targ2 } => write!(
                f,
                "unbalanced targets: targ1 has {targ1} items, targ2 has {targ2}"
            ),
            Error::DuplicateItem { set, item } => write!(f, "duplicate item {item:?} in {set}"),
            Error::InvalidFocusSpan { item, start, end } => {
                write!(f, "focus span [{start}, {end}) does not lie inside {item:?}")
            }
            Error::UnrecognizedName(name) => write!(f, "unrecognized test name {name:?}"),
            Error::BadTemplate { template, slots } => write!(
                f,
                "template {template:?} must contain exactly one [X] slot (found {slots}) and end with . ! or ?"
            ),
            Error::UnknownVariant(v) => write!(f, "unknown intersectional variant {v} (expected 1..=5)"),
            Error::AllTokensOov(text) => write!(f, "no in-vocabulary token in {text:?}"),
            Error::DimDrift { expected, found } => {
                write!(f, "dimension drift: expected {expected}, found {found}")
            }
            Error::DuplicateToken(token) => write!(f, "duplicate token {token:?}"),
            Error::ConflictingDuplicate { model_id, level, text } => write!(
                f,
                "conflicting vectors for ({text:?}, {level}, {model_id})"
            ),
            Error::LexiconMismatch => f.write_str("reports were built from different lexicons"),
            Error::MismatchedPair(msg) => write!(f, "mismatched result pair: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
