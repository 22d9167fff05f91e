use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("{line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("duplicate name `{0}`")]
    Duplicate(String),
    #[error("unknown operation `{0}`")]
    UnknownOp(String),
    #[error("operation `{op}` expects {expected} arguments, found {found}")]
    Arity { op: String, expected: usize, found: usize },
    #[error("unbound name `{0}`")]
    UnboundName(String),
    #[error("variable {index} out of scope {scope}")]
    ScopeMismatch { index: usize, scope: usize },
    #[error("metavariable `{0}` is not assigned")]
    MissingMetavar(String),
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error("{0} budget exhausted")]
    Budget(&'static str),
    #[error("name clash on `{0}`")]
    NameClash(String),
    #[error("unknown builtin `{0}`")]
    UnknownBuiltin(String),
    #[error("unknown rule `{0}`")]
    UnknownRule(String),
    #[error("signature rejected: {0}")]
    Rejected(String),
    #[error("translation has no image for `{0}`")]
    Uncovered(String),
    #[error("base slot would receive the non-variable term {0}")]
    NonVariableBase(String),
}
