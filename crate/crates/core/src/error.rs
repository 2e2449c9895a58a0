use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Operands do not belong to the same cone or character family.
    #[error("contract violation: {0}")]
    ContractViolation(String),

    /// The configuration is refused before any work is done.
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// Every function of the transversal family vanishes along the orbit.
    #[error("orbit outside transversal domain")]
    OrbitOutsideTransversal,

    #[error("quadrature budget exceeded after {evaluations} evaluations (partial estimate {partial})")]
    QuadratureBudget { partial: f64, evaluations: usize },

    #[error("cone construction failed: {0}")]
    Construction(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::ContractViolation(msg.into())
    }
}
