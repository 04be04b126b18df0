use std::fmt;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// One admissibility inequality that failed, with both sides evaluated.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: requires {} < {}", self.name, self.lhs, self.rhs)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParamError {
    #[error("parameter {name} = {value} must be finite and strictly positive")]
    NotPositive { name: &'static str, value: f64 },
    #[error("{}", join_violations(.0))]
    Violated(Vec<Violation>),
}

impl ParamError {
    /// Names of the violated inequalities, empty for positivity failures.
    pub fn violation_names(&self) -> Vec<&'static str> {
        match self {
            ParamError::NotPositive { .. } => Vec::new(),
            ParamError::Violated(v) => v.iter().map(|v| v.name).collect(),
        }
    }
}

fn join_violations(v: &[Violation]) -> String {
    let parts: Vec<String> = v.iter().map(|v| v.to_string()).collect();
    format!("parameter constraints violated: {}", parts.join("; "))
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("internal error: {0}")]
    Internal(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    /// Process exit code for the diagnostic category.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Io(_) => 2,
            Error::Params(_) | Error::Domain(_) => 3,
            Error::Internal(_) => 4,
        }
    }
}
