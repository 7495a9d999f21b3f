use thiserror::Error;

/// Failure modes shared by every module.
///
/// Verdicts that are part of a report (a failed axiom, a violated
/// cocycle identity) are not errors; these variants are for inputs
/// that cannot be processed at all.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("structural error: {0}")]
    Structural(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("budget exceeded: {what} needs {required}, limit is {limit}")]
    Budget {
        what: String,
        required: u128,
        limit: u128,
    },
    #[error("values not concentrated: entries {first} and {second} are {detail}")]
    Concentration {
        first: usize,
        second: usize,
        detail: String,
    },
    #[error("not a nilspace: {0}")]
    NotNilspace(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("not an extension: {0}")]
    NotExtension(String),
    #[error("not an isomorphism: {0}")]
    NotIsomorphic(String),
    #[error("corner has no completion: {0}")]
    Completion(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn structural(msg: impl Into<String>) -> Self {
        Error::Structural(msg.into())
    }

    pub(crate) fn budget(what: impl Into<String>, required: u128, limit: u128) -> Self {
        Error::Budget {
            what: what.into(),
            required,
            limit,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
