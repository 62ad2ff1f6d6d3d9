use thiserror::Error;

/// Which of the excluded configurations a state hit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exclusion {
    InnerAtOrigin,
    OuterAtOrigin,
    InnerAtOuter,
}

impl std::fmt::Display for Exclusion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Exclusion::InnerAtOrigin => "x = 0",
            Exclusion::OuterAtOrigin => "x' = 0",
            Exclusion::InnerAtOuter => "x = x'",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("singular configuration: {0}")]
    Singularity(Exclusion),
    #[error("coordinate degeneracy: {0}")]
    Degenerate(String),
    #[error("orbit is not elliptic (J0 = {0})")]
    Hyperbolic(f64),
    #[error("perihelion undefined for circular orbit (e = {0})")]
    Circular(f64),
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("divergence: {0}")]
    Divergence(String),
    #[error("hypothesis `{name}` violated: {lhs} !< {rhs}")]
    Hypothesis { name: String, lhs: f64, rhs: f64 },
    #[error("incompatible series: {0}")]
    Incompatible(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
