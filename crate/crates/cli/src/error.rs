use std::fmt;

/// Failure classes with their process exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Unreadable or malformed input, bad arguments: exit 2.
    Input(String),
    /// Data on which the coefficient is undefined: exit 3.
    Degenerate(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Degenerate(_) => 3,
        }
    }

    pub fn input(msg: impl Into<String>) -> Self {
        CliError::Input(msg.into())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "input error: {m}"),
            CliError::Degenerate(m) => write!(f, "degenerate data: {m}"),
        }
    }
}

impl From<rhostar::Error> for CliError {
    fn from(e: rhostar::Error) -> Self {
        use rhostar::Error as E;
        match e {
            E::DegenerateMargin(_) | E::DegenerateCollapse { .. } | E::ZeroEigenfunction(_) => {
                CliError::Degenerate(e.to_string())
            }
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
