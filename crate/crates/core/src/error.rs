use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("incomplete assignment: no value for `{0}`")]
    IncompleteAssignment(String),
    #[error("domain violation: `{var}` = {value} is outside its domain")]
    DomainViolation { var: String, value: i64 },
    #[error("degenerate scope: all-different needs at least two variables, got {0}")]
    DegenerateScope(usize),
    #[error("empty domain for `{0}`")]
    EmptyDomain(String),
    #[error("duplicate variable `{0}`")]
    DuplicateVariable(String),
    #[error("duplicate constraint id `{0}`")]
    DuplicateConstraint(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("variable `{0}` repeats within a constraint scope")]
    RepeatedScopeVariable(String),
    #[error("arity mismatch in `{id}`: scope has {expected} variables, tuple has {found}")]
    ArityMismatch {
        id: String,
        expected: usize,
        found: usize,
    },
    #[error("oracle too large: {0}")]
    OracleTooLarge(String),
    #[error("tuple space too large to complement ({0} tuples)")]
    ProductTooLarge(u128),
    #[error("untransformed program: rule {0} is a choice or cardinality rule")]
    UntransformedProgram(usize),
    #[error("no extensional form for constraint `{0}`")]
    NoExtensionalForm(String),
    #[error("region blow-up for constraint `{0}`")]
    RegionBlowUp(String),
    #[error("not tight: positive dependency cycle through `{0}`")]
    NotTight(String),
    #[error("not a model: {0}")]
    NotAModel(String),
    #[error("instance is not normalized: {0}")]
    NotNormalized(String),
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}
