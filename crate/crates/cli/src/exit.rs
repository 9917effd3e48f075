use std::fmt;

pub const USAGE: u8 = 1;
pub const DATA: u8 = 2;
pub const NOT_CONVERGED: u8 = 3;

/// An error paired with the process exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

impl Failure {
    pub fn usage(msg: impl Into<String>) -> Self {
        Failure {
            code: USAGE,
            error: anyhow::anyhow!(msg.into()),
        }
    }

    pub fn not_converged(msg: impl Into<String>) -> Self {
        Failure {
            code: NOT_CONVERGED,
            error: anyhow::anyhow!(msg.into()),
        }
    }
}

impl From<sssc_core::Error> for Failure {
    fn from(e: sssc_core::Error) -> Self {
        Failure {
            code: if e.is_usage() { USAGE } else { DATA },
            error: e.into(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure {
            code: DATA,
            error: e.into(),
        }
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure {
            code: DATA,
            error: e.into(),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#}", self.error)
    }
}
