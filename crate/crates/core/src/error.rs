use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("derivative of order {order} is not available for {what}")]
    MissingDerivative { order: usize, what: String },

    #[error("quadrature did not converge: estimate {estimate:e}, error {error:e}")]
    QuadratureNonConvergence { estimate: f64, error: f64 },

    #[error("degenerate ensemble: {0}")]
    DegenerateEnsemble(String),

    #[error("dimension {n} exceeds the limit {max} of the {path} path")]
    DimensionTooLarge { n: usize, max: usize, path: &'static str },

    #[error("transform is not integrable: {0}")]
    NonIntegrable(String),

    #[error("imaginary residue {residue:e} exceeds {limit:e}")]
    ImaginaryResidue { residue: f64, limit: f64 },

    #[error("no structured path: {0}")]
    Unsupported(String),

    #[error("ensemble cannot be sampled: {0}")]
    Unsamplable(String),

    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
