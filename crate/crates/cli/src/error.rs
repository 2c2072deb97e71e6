use std::fmt;

use gossip_core::gossip::{EnumerationError, StateError};
use gossip_core::markov::ChainError;
use gossip_core::metrics::ValidateError;
use gossip_core::sim::SimError;

/// Failure classes with fixed exit codes: 1 usage, 2 structural (the
/// topology cannot reach consensus), 3 resource cap, 4 validation criterion
/// failed. Success is 0.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Structural(String),
    Cap(String),
    ValidationFailed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Structural(_) => 2,
            CliError::Cap(_) => 3,
            CliError::ValidationFailed(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg)
            | CliError::Structural(msg)
            | CliError::Cap(msg)
            | CliError::ValidationFailed(msg) => f.write_str(msg),
        }
    }
}

impl From<ChainError> for CliError {
    fn from(err: ChainError) -> Self {
        match err {
            ChainError::StateSpaceTooLarge { .. } => CliError::Cap(err.to_string()),
            ChainError::Enumeration(
                EnumerationError::TransmissionsTooLarge { .. }
                | EnumerationError::AdoptionsTooLarge { .. },
            ) => CliError::Cap(err.to_string()),
            ChainError::NotAbsorbing | ChainError::Singular(_) => {
                CliError::Structural(err.to_string())
            }
            _ => CliError::Usage(err.to_string()),
        }
    }
}

impl From<SimError> for CliError {
    fn from(err: SimError) -> Self {
        match err {
            SimError::SweepTooLarge { .. } => CliError::Cap(err.to_string()),
            _ => CliError::Usage(err.to_string()),
        }
    }
}

impl From<StateError> for CliError {
    fn from(err: StateError) -> Self {
        CliError::Usage(err.to_string())
    }
}

impl From<ValidateError> for CliError {
    fn from(err: ValidateError) -> Self {
        match err {
            ValidateError::NotConvergent { .. } => CliError::Structural(err.to_string()),
            ValidateError::Chain(e) => e.into(),
            ValidateError::Sim(e) => e.into(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::Usage(err.to_string())
    }
}
