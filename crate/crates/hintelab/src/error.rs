//! Error type shared by the kernel, unifier, hint database and elaborator.

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("unbound name `{0}`")]
    UnboundName(String),

    #[error("type mismatch: expected `{expected}`, got `{got}`")]
    TypeMismatch { expected: String, got: String },

    #[error("ill-typed term: {0}")]
    IllTyped(String),

    #[error("scope violation: `{var}` is not in the scope of metavariable ?{meta}")]
    ScopeViolation { meta: String, var: String },

    #[error("occurs check: metavariable ?{0} occurs in its own solution")]
    OccursCheck(String),

    #[error("unification failed: `{lhs}` =?= `{rhs}`")]
    UnifyFail { lhs: String, rhs: String },

    #[error("hint recursion depth exceeded (bound {0})")]
    DepthExceeded(usize),

    #[error("reduction fuel exhausted")]
    FuelExhausted,

    #[error("hint pattern is nonlinear: ?{0} occurs more than once")]
    NonlinearPattern(String),

    #[error("hint is not acceptable: `{lhs}` and `{rhs}` are not convertible after telescopic substitution")]
    NotAcceptable { lhs: String, rhs: String },

    #[error("`{0}` is not a structure instance")]
    NotAnInstance(String),

    #[error("no coercion from `{from}` to `{to}`")]
    NoCoercion { from: String, to: String },

    #[error("a uniform coercion between these types is already declared (`{0}`)")]
    DuplicateCoercion(String),

    #[error("invalid coercion argument index {0}")]
    InvalidArgIndex(usize),

    #[error("already declared: {0}")]
    AlreadyDeclared(String),

    #[error("rewrite: no subterm matches the equation")]
    NoMatch,

    #[error("unsolved proof obligation: {0}")]
    OpenObligation(String),

    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },

    #[error("internal invariant violation: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Errors that abort the surrounding search instead of letting the
    /// caller try the next alternative. DepthExceeded is deliberately not
    /// hard: one runaway hint branch must not mask a sibling that succeeds;
    /// it is still reported preferentially when every branch fails.
    pub fn is_hard(&self) -> bool {
        matches!(self, Error::FuelExhausted | Error::Internal(_))
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Syntax { .. } => 2,
            Error::Internal(_) => 3,
            _ => 1,
        }
    }
}
