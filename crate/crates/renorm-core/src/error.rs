use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("division by an interval containing zero")]
    DivisionByZero,
    #[error("square root of an interval containing negative values")]
    SqrtNegative,
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("enclosure blow-up in {stage} (index {index})")]
    Blowup { stage: &'static str, index: usize },
    #[error("no admissible ellipse radius: {0}")]
    InclusionFailure(String),
    #[error("iteration did not converge after {0} steps")]
    NoConvergence(usize),
    #[error("singular linear system")]
    SingularSystem,
    #[error("dominant eigenvalue estimate is not real and simple")]
    EigenEstimate,
    #[error("subspace correction not exactly representable at current precision")]
    SubspaceCorrection,
    #[error("argument outside validity domain: {0}")]
    OutsideDomain(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
