use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("register size mismatch: {0} vs {1}")]
    RegisterMismatch(usize, usize),
    #[error("qudit dimension mismatch: {0} vs {1}")]
    DimensionMismatch(u32, u32),
    #[error("site {site} out of range for register of size {n}")]
    SiteOutOfRange { site: usize, n: usize },
    #[error("invalid composite operator: {0}")]
    InvalidComposite(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("generators {0} and {1} do not commute")]
    NonCommuting(usize, usize),
    #[error("inconsistent stabilizer group: a nontrivial scalar is generated")]
    Inconsistent,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("geometry error: {0}")]
    Geometry(String),
    #[error("size limit exceeded: {0}")]
    TooLarge(String),
    #[error("expectation is not definite: {0}")]
    NotDefinite(String),
}

pub type Result<T> = std::result::Result<T, Error>;
