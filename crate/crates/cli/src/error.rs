use thiserror::Error;

pub type Result<T> = std::result::Result<T, CliError>;

/// Exit status 2: unreadable or invalid input, or an unusable output
/// location.
pub const EXIT_INPUT: u8 = 2;
/// Exit status 3: the input was valid but the computation failed.
pub const EXIT_ALGORITHM: u8 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Core(#[from] mweica::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use mweica::Error as E;
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Core(e) => match e {
                E::InvalidData(_)
                | E::DegenerateData { .. }
                | E::DimensionMismatch { .. }
                | E::ShapeMismatch(_)
                | E::EmptyColumn(_)
                | E::Parse { .. }
                | E::RaggedRows { .. }
                | E::UnsupportedFormat { .. }
                | E::CorruptHeader { .. }
                | E::Io { .. } => EXIT_INPUT,
                _ => EXIT_ALGORITHM,
            },
        }
    }
}

pub(crate) fn input(message: impl Into<String>) -> CliError {
    CliError::Input(message.into())
}
