use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: u32, col: u32, msg: String },
    #[error("`{0}` is defined twice")]
    Duplicate(String),
    #[error("unbound {what} `{name}` at {line}:{col}")]
    Unbound {
        what: &'static str,
        name: String,
        line: u32,
        col: u32,
    },
    #[error("kind error at {line}:{col}: {msg}")]
    Kind { line: u32, col: u32, msg: String },
    #[error("type error at {line}:{col}: {msg}")]
    Type { line: u32, col: u32, msg: String },
    #[error("instantaneous cycle between equations: {0}")]
    Cycle(String),
    #[error("evaluation fault: {0}")]
    Eval(String),
    #[error("distribution error: {0}")]
    Dist(String),
    #[error("all particle weights are zero (degenerate cloud)")]
    DegenerateCloud,
    #[error("no closed form for the distribution of a symbolic term")]
    NoClosedForm,
    #[error("enumeration: {0}")]
    Enumeration(String),
    #[error("configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn eval_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Eval(msg.into()))
}

pub(crate) fn dist_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Dist(msg.into()))
}
