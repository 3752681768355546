use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("pole of the gamma function at {0}")]
    Pole(String),
    #[error("accuracy error: {0}")]
    Accuracy(String),
    #[error("contract violated: {0}")]
    Contract(String),
    #[error("input is not radial (block residual {residual:.3e})")]
    NonRadial { residual: f64 },
    #[error("divergent integral: {0}")]
    Divergence(String),
    #[error("degree error: {0}")]
    Degree(String),
    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
