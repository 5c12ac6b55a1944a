use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Caller broke an operation's precondition (arity, rank, index range).
    #[error("contract violation: {0}")]
    Contract(String),
    /// Requested order or point lies outside where the quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),
    /// The model produced an invalid metric (e.g. not positive definite).
    #[error("model error: {0}")]
    Model(String),
    /// The differential of an immersion lost rank.
    #[error("immersion error: {0}")]
    Immersion(String),
    #[error("invalid model spec: {0}")]
    Spec(String),
    /// A bulk integrand decays too slowly to be integrable.
    #[error("integrability error: {0}")]
    Integrability(String),
    #[error("extrapolation error: {0}")]
    Extrapolation(String),
}

pub type Result<T> = std::result::Result<T, Error>;
