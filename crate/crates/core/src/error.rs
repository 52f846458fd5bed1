use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid field: {0}")]
    InvalidField(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("configuration error: {0}")]
    Config(String),

    /// Time step exceeds the explicit diffusion stability bound.
    #[error("time step {dt:e} exceeds the CFL bound {bound:e}")]
    Cfl { dt: f64, bound: f64 },

    #[error("non-finite values at t = {t}")]
    BlowUp { t: f64 },

    #[error("u = {min_u:e} < 0 at t = {t}; reduce dt")]
    Negativity { t: f64, min_u: f64 },

    #[error("wrong regime: {0}")]
    Regime(String),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    /// The logarithmic functional is undefined because u touched zero.
    #[error("functional undefined: min u = {min_u:e}")]
    UndefinedFunctional { min_u: f64 },

    #[error("no feasible weight k: {0}")]
    Infeasible(String),

    #[error("degenerate cubic: {0}")]
    DegenerateCubic(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}
