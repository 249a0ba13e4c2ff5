use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration:\n{}", list(.0))]
    Validation(Vec<String>),

    #[error(transparent)]
    Numeric(#[from] twistkam::Error),

    #[error("{}: {message}", path.display())]
    Io { path: PathBuf, message: String },
}

fn list(items: &[String]) -> String {
    items.iter().map(|s| format!("  - {s}")).collect::<Vec<_>>().join("\n")
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, err: impl std::fmt::Display) -> Self {
        CliError::Io {
            path: path.into(),
            message: err.to_string(),
        }
    }

    /// 1 for invalid input, 2 for solver failures, 3 for I/O.
    pub fn exit_code(&self) -> i32 {
        use twistkam::Error as E;
        match self {
            CliError::Validation(_) => 1,
            CliError::Numeric(e) => match e {
                E::NonConvergence { .. }
                | E::WindowTooSmall { .. }
                | E::DegenerateMinimizer { .. }
                | E::UnresolvedGap { .. }
                | E::Overflow { .. }
                | E::NotMonotone { .. }
                | E::QuadratureFailure { .. } => 2,
                _ => 1,
            },
            CliError::Io { .. } => 3,
        }
    }
}
