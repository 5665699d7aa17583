use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExpError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{context}: {source}")]
    Module {
        context: String,
        #[source]
        source: fpplab_core::Error,
    },
    #[error("output error: {0}")]
    Io(String),
}

impl ExpError {
    /// Process exit status: 2 for configuration problems, 3 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            ExpError::Config(_) => 2,
            _ => 3,
        }
    }
}

/// Attaches a description of the failing step to a module error.
pub trait Context<T> {
    fn context(self, what: &str) -> Result<T, ExpError>;
}

impl<T> Context<T> for fpplab_core::Result<T> {
    fn context(self, what: &str) -> Result<T, ExpError> {
        self.map_err(|source| match source {
            fpplab_core::Error::InvalidDistribution(_)
            | fpplab_core::Error::InvalidSchedule(_)
            | fpplab_core::Error::InvalidWindow(_)
            | fpplab_core::Error::InvalidSeeds(_) => ExpError::Config(format!("{what}: {source}")),
            _ => ExpError::Module { context: what.to_string(), source },
        })
    }
}
