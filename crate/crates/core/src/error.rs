use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("invalid rational literal {0:?}")]
    Rational(String),
    #[error("operator text, byte {pos}: {msg}")]
    Operator { pos: usize, msg: String },
    #[error("unknown factor {0:?}")]
    Factor(String),
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum PolyError {
    #[error("leading term of the zero polynomial")]
    ZeroPolynomial,
    #[error("polynomials live in different variable contexts")]
    ContextMismatch,
    #[error("remainder is nonzero and the basis is not certified Groebner")]
    NotGroebner,
    #[error("too many variables: {0} (limit {max})", max = crate::poly::MAX_VARS)]
    TooManyVariables(usize),
    #[error("duplicate variable name {0:?}")]
    DuplicateVariable(String),
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum WeylError {
    #[error("operator dimensions differ: (n={0}, p={1}) vs (n={2}, p={3})")]
    DimensionMismatch(usize, usize, usize, usize),
    #[error("symbol of the zero operator")]
    ZeroOperator,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ArrangementError {
    #[error("arrangement is not generic; dependent subset {witness:?} (1-based)")]
    NotGeneric { witness: Vec<usize> },
    #[error("linear form {0} has the wrong length or is zero")]
    BadForm(usize),
    #[error("singular linear system for the dual field")]
    SingularSystem,
    #[error("invalid index set: {0}")]
    BadIndices(String),
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum BernsteinError {
    #[error(transparent)]
    Arrangement(#[from] ArrangementError),
    #[error("witness construction failed: {0}")]
    ConstructionFailed(String),
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum CharVarError {
    #[error(transparent)]
    Arrangement(#[from] ArrangementError),
    #[error("this check needs p = n + 1 (got n = {n}, p = {p})")]
    WrongP { n: usize, p: usize },
    #[error("check failed: {0}")]
    CheckFailed(String),
}
