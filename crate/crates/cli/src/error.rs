use std::fmt;
use std::path::Path;

use csie_core::beta::BetaError;
use csie_core::entropy::EntropyError;
use csie_core::synth::SynthError;
use csie_core::{PanelError, ScreenError};

/// A failure mapped onto the process exit-code contract.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags or configuration. Exit code 1.
    Usage(String),
    /// Unreadable, malformed or insufficient data. Exit code 2.
    Data(String),
    /// A computation that has no finite answer. Exit code 3.
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }

    pub fn io(path: &Path, err: std::io::Error) -> Self {
        CliError::Data(format!("{}: {err}", path.display()))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Numeric(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

pub type Result<T> = std::result::Result<T, CliError>;

impl From<PanelError> for CliError {
    fn from(e: PanelError) -> Self {
        match e {
            PanelError::InvalidRange { .. } => CliError::Usage(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<EntropyError> for CliError {
    fn from(e: EntropyError) -> Self {
        match e {
            EntropyError::InvalidAlpha(_) | EntropyError::InvalidWindow { .. } => {
                CliError::Usage(e.to_string())
            }
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<BetaError> for CliError {
    fn from(e: BetaError) -> Self {
        match e {
            BetaError::DegenerateMarket => CliError::Numeric(e.to_string()),
            BetaError::Entropy(inner) => inner.into(),
            BetaError::Panel(inner) => inner.into(),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<ScreenError> for CliError {
    fn from(e: ScreenError) -> Self {
        match e {
            ScreenError::InvalidWindow(_) => CliError::Usage(e.to_string()),
            ScreenError::Panel(inner) => inner.into(),
            ScreenError::Beta(inner) => inner.into(),
            ScreenError::IntervalTooShort { .. } => CliError::Data(e.to_string()),
        }
    }
}

impl From<SynthError> for CliError {
    fn from(e: SynthError) -> Self {
        CliError::Data(e.to_string())
    }
}
