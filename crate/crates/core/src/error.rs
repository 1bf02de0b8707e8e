use thiserror::Error;

use crate::check::CheckError;
use crate::compose::ComposeError;
use crate::parser::ParseError;
use crate::pattern::PatternError;
use crate::semantics::EvalError;
use crate::typeck::TypeError;

/// Top-level error for library entry points that cross module boundaries.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Pattern(#[from] PatternError),
    #[error(transparent)]
    Type(#[from] TypeError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Compose(#[from] ComposeError),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Check(#[from] CheckError),
    #[error("internal: {0}")]
    Internal(String),
}
