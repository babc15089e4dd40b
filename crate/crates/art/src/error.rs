use thiserror::Error;

/// Error type shared across the framework.
#[derive(Debug, Error)]
pub enum ArtError {
    /// An argument violated a precondition (non-finite rating, empty list, ...).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A configuration or request body failed validation.
    #[error("validation failed: {0}")]
    Validation(String),

    /// A uniqueness constraint was violated (duplicate agent name, ...).
    #[error("conflict: {0}")]
    Conflict(String),

    #[error("not found: {0}")]
    NotFound(String),

    /// An agent invocation failed; carries the offending agent so the
    /// tournament can exclude it for the round.
    #[error("agent {agent_id} failed: {message}")]
    Agent { agent_id: String, message: String },

    /// Every agent failed a phase; the tournament cannot proceed.
    #[error("tournament failed: {0}")]
    TournamentFailed(String),

    #[error("consensus failed: {0}")]
    ConsensusFailed(String),

    #[error("storage error: {0}")]
    Storage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, ArtError>;

impl ArtError {
    pub fn agent(agent_id: impl Into<String>, message: impl Into<String>) -> Self {
        ArtError::Agent {
            agent_id: agent_id.into(),
            message: message.into(),
        }
    }
}
