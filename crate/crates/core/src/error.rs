use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid region: {0}")]
    InvalidRegion(String),

    #[error("integrand not finite at ({tau1}, {tau2})")]
    NonFiniteSample { tau1: f64, tau2: f64 },

    #[error("kernel denominator vanishes at ({tau1}, {tau2})")]
    Singularity { tau1: f64, tau2: f64 },

    #[error("singular map: denominator {name} = {value:e}")]
    SingularMap { name: &'static str, value: f64 },

    #[error("matrix is not Hermitian: deviation {0:e}")]
    NotHermitian(f64),

    #[error("invalid config: {0}")]
    Config(String),
}
