use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseErrorKind {
    Empty,
    UnexpectedChar(char),
    UnexpectedEnd,
    UnterminatedString,
    BadEscape(char),
    TrailingInput,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::Empty => f.write_str("empty input"),
            ParseErrorKind::UnexpectedChar(c) => write!(f, "unexpected character {c:?}"),
            ParseErrorKind::UnexpectedEnd => f.write_str("unexpected end of input"),
            ParseErrorKind::UnterminatedString => f.write_str("unterminated quoted label"),
            ParseErrorKind::BadEscape(c) => write!(f, "invalid escape \\{c}"),
            ParseErrorKind::TrailingInput => f.write_str("trailing input after tree"),
        }
    }
}

/// Syntax error in the tree text format, with the byte offset where it was
/// detected.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind} at byte {offset}")]
pub struct ParseError {
    pub offset: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("line {line}: {source}")]
    Dataset { line: usize, source: ParseError },
    #[error("invalid tree: {0}")]
    InvalidTree(String),
    #[error("invalid DAG: {0}")]
    InvalidDag(String),
    #[error("decompressed size exceeds limit of {limit} nodes")]
    TooLarge { limit: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("could not generate a non-isomorphic pair after {0} attempts")]
    RetriesExhausted(usize),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
