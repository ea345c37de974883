//! Scenario front end for the `darkfield` library.
//!
//! Scenario presets bind the parameters of the bundled experiments, the
//! runner turns them into deterministic CSV/JSON files plus a JSON manifest,
//! and the sweep module executes many runs concurrently with byte-identical
//! output regardless of worker count.

pub mod config;
pub mod output;
pub mod presets;
pub mod runner;
pub mod sweep;

pub use config::{OutputFormat, Overrides, Scenario, ScenarioConfig};
pub use runner::{run_count, run_scenario, RunOutput};
pub use sweep::{parse_sweep_manifest, run_sweep, SweepReport};

/// What kind of failure occurred, which fixes the process exit code.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FailureKind {
    /// Invalid configuration: exit code 1.
    Config,
    /// Numerical failure during integration: exit code 2.
    Numerical,
}

/// A failed run, classified.
#[derive(Clone, Debug)]
pub struct CliError {
    pub kind: FailureKind,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        Self { kind: FailureKind::Config, message: message.into() }
    }

    pub fn numerical(message: impl Into<String>) -> Self {
        Self { kind: FailureKind::Numerical, message: message.into() }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind {
            FailureKind::Config => 1,
            FailureKind::Numerical => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.message)
    }
}

impl std::error::Error for CliError {}

impl From<darkfield::Error> for CliError {
    fn from(e: darkfield::Error) -> Self {
        match &e {
            darkfield::Error::IntegrationFailure { .. }
            | darkfield::Error::InvariantViolation(_) => Self::numerical(e.to_string()),
            _ => Self::config(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::config(format!("io error: {e}"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn error_kinds_map_to_exit_codes() {
        assert_eq!(CliError::config("x").exit_code(), 1);
        assert_eq!(CliError::numerical("x").exit_code(), 2);

        let integration = darkfield::Error::IntegrationFailure {
            time: 1.0,
            message: "trace drift".into(),
        };
        assert_eq!(CliError::from(integration).kind, FailureKind::Numerical);
        let invariant = darkfield::Error::InvariantViolation("negative".into());
        assert_eq!(CliError::from(invariant).kind, FailureKind::Numerical);
        let config = darkfield::Error::Config("bad dt".into());
        assert_eq!(CliError::from(config).kind, FailureKind::Config);
        let domain = darkfield::Error::Domain("x <= 0".into());
        assert_eq!(CliError::from(domain).kind, FailureKind::Config);
    }
}
