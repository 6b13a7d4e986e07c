use thiserror::Error;

/// Errors produced by fitting and analysis routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("degenerate data: {0}")]
    DegenerateData(String),
    #[error("degenerate conic: B^2 + C^2 - 4AD <= 0 does not describe a real circle")]
    DegenerateConic,
    #[error("invalid circle: radius must be positive and finite")]
    InvalidCircle,
    #[error("singular geometry: a data point coincides with the circle center")]
    SingularGeometry,
    #[error("degenerate frame: {0}")]
    DegenerateFrame(String),
    #[error("arc too small: xx_bar - x_bar^2 vanishes and the Kasa bias diverges")]
    ArcTooSmall,
    #[error("line-degenerate parameters: A = 0 has no finite circle Jacobian")]
    LineDegenerate,
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
