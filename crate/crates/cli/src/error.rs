use std::process::ExitCode;

use reff_core::ReffError;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Core(ReffError),
    Io(std::io::Error),
    /// One or more oracle checks failed.
    Oracle(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Oracle(_) => 4,
            CliError::Io(_) => 1,
            CliError::Core(e) => match e {
                ReffError::CapExceeded { .. } => 5,
                ReffError::NonFinite(_) | ReffError::NotUnitary(_) | ReffError::NotHermitian(_) | ReffError::NotNormalized(_) => {
                    3
                }
                ReffError::Io(_) | ReffError::Json(_) | ReffError::FormatVersion(_) => 1,
                _ => 2,
            },
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
            CliError::Oracle(m) => write!(f, "oracle failure: {m}"),
        }
    }
}

impl From<ReffError> for CliError {
    fn from(e: ReffError) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Core(ReffError::Json(e))
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        match e.into_kind() {
            csv::ErrorKind::Io(e) => CliError::Io(e),
            other => CliError::Io(std::io::Error::other(format!("{other:?}"))),
        }
    }
}

pub fn report(e: &CliError) -> ExitCode {
    eprintln!("reff: {e}");
    ExitCode::from(e.exit_code())
}
