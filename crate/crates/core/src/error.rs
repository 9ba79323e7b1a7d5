use thiserror::Error;

use crate::model::{Stop, Violation};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A route refers to a site the scenario does not contain, or uses the
    /// wrong stop kind for it (e.g. `v3` when vendor 3 is a decoy).
    #[error("unknown stop {0}")]
    UnknownStop(Stop),

    #[error("invalid route: {0}")]
    InvalidRoute(Violation),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Exhaustive work refused because it is larger than the configured guard.
    #[error("refusing {what}: {detail} (estimated {estimate:.3e} items)")]
    GuardExceeded {
        what: &'static str,
        detail: String,
        estimate: f64,
    },

    #[error("risk vector is empty")]
    EmptyRisks,

    #[error("exact arithmetic overflowed while computing {0}")]
    Overflow(&'static str),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
