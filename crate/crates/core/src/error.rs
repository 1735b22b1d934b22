use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("distance must be positive, got {0} m")]
    NonPositiveDistance(f64),

    #[error("eavesdropper index {index} out of range (N = {count})")]
    EavOutOfRange { index: usize, count: usize },

    #[error("exhaustive search limited to K <= 2 and N <= 2, got K = {sus}, N = {eavs}")]
    OracleTooLarge { sus: usize, eavs: usize },

    #[error(
        "infeasible outage target: eps_p = {eps_p:.4}, eps_0 = {eps_0:.4}, \
         smallest achievable = {min_achievable:.4}"
    )]
    Infeasible {
        eps_p: f64,
        eps_0: f64,
        min_achievable: f64,
    },

    #[error("empty fading ensemble")]
    EmptyEnsemble,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("config parse error: {0}")]
    Toml(#[from] toml::de::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
