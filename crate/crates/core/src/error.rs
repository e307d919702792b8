use thiserror::Error;

/// Errors produced by the simulation and analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A value failed a structural invariant (hermiticity, trace, positivity, ...).
    #[error("validation failed: {0}")]
    Validation(String),

    /// An argument lies outside the domain on which the operation is defined.
    #[error("argument out of domain: {0}")]
    Domain(String),

    /// The relative entropy is infinite because the first state has weight
    /// outside the support of the second.
    #[error("support mismatch: {0}")]
    Support(String),

    /// A numerical result missed its tolerance (e.g. unitarity drift).
    #[error("tolerance exceeded: {0}")]
    Tolerance(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("frequency grid error: {0}")]
    Grid(String),

    /// Two model columns of a peak fit are numerically indistinguishable.
    #[error("singular peak fit: {0}")]
    SingularFit(String),

    #[error("degenerate line fit: {0}")]
    DegenerateFit(String),
}

pub type Result<T> = std::result::Result<T, Error>;
