use std::net::SocketAddr;
use std::path::PathBuf;

use thiserror::Error;

pub const DEFAULT_BIND: &str = "127.0.0.1:8080";
pub const DEFAULT_MAX_ROWS: usize = 1000;
/// Request bodies above this size get 413.
pub const DEFAULT_BODY_LIMIT: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServiceConfig {
    pub bind: SocketAddr,
    pub store_path: PathBuf,
    pub max_rows: usize,
    /// An exact origin, or `*` for any.
    pub cors_origin: String,
    pub body_limit: usize,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("maxResultRows must be at least 1")]
    ZeroRows,
    #[error("invalid CORS origin {0:?}")]
    BadOrigin(String),
}

impl ServiceConfig {
    pub fn new(store_path: impl Into<PathBuf>) -> Self {
        Self {
            bind: DEFAULT_BIND.parse().expect("default bind address"),
            store_path: store_path.into(),
            max_rows: DEFAULT_MAX_ROWS,
            cors_origin: "*".into(),
            body_limit: DEFAULT_BODY_LIMIT,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.max_rows == 0 {
            return Err(ConfigError::ZeroRows);
        }
        let origin = self.cors_origin.as_str();
        if origin != "*" && (origin.is_empty() || origin.chars().any(|c| c.is_whitespace() || c.is_control())) {
            return Err(ConfigError::BadOrigin(self.cors_origin.clone()));
        }
        Ok(())
    }
}
