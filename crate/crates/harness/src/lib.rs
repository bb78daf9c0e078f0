//! Experiment harness for `chainbound`: configuration, class generators,
//! named experiments, persistence and the verification suites behind the
//! `chainbound` binary.

// `!(x > 0.0)` rejects NaN along with the out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classes;
pub mod config;
pub mod experiments;
pub mod record;
pub mod suites;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    /// Invalid configuration or arguments; exit code 1.
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] chainbound::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl HarnessError {
    /// Process exit code for this error.
    pub fn exit_code(&self) -> u8 {
        1
    }
}
