use std::io;
use std::path::PathBuf;

use qstego_core::aes::AesError;
use qstego_core::imageio::ImageIoError;
use qstego_core::pipeline::PipelineError;
use qstego_core::stego::StegoError;
use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const IO: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const INSECURE: i32 = 3;
    pub const CAPACITY: i32 = 4;
    pub const FORMAT: i32 = 5;
    pub const CRYPTO_FORMAT: i32 = 6;
    pub const VERIFY: i32 = 7;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Insecure(String),
    #[error("{0}")]
    Stego(#[from] StegoError),
    #[error("{path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: ImageIoError,
    },
    #[error("{path}: {source}")]
    Envelope {
        path: PathBuf,
        #[source]
        source: AesError,
    },
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: io::Error,
    },
    #[error("{0}")]
    Verify(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => exit::USAGE,
            CliError::Insecure(_) => exit::INSECURE,
            CliError::Stego(StegoError::CapacityExceeded { .. }) => exit::CAPACITY,
            CliError::Stego(StegoError::BitsPerChannel(_)) => exit::USAGE,
            CliError::Stego(StegoError::NotStego) => exit::FORMAT,
            CliError::Image { source, .. } => match source {
                ImageIoError::Io(_) => exit::IO,
                _ => exit::FORMAT,
            },
            CliError::Envelope { .. } => exit::CRYPTO_FORMAT,
            CliError::Io { .. } => exit::IO,
            CliError::Verify(_) => exit::VERIFY,
        }
    }

    pub fn io(context: impl Into<String>, source: io::Error) -> Self {
        CliError::Io {
            context: context.into(),
            source,
        }
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Insecure { .. } => CliError::Insecure(e.to_string()),
            PipelineError::Protocol(_) | PipelineError::Hash(_) => CliError::Usage(e.to_string()),
            PipelineError::Embed(s) | PipelineError::Extract(s) => CliError::Stego(s),
            PipelineError::Envelope(source) => CliError::Envelope {
                path: PathBuf::from("<demo envelope>"),
                source,
            },
            PipelineError::Mismatch => CliError::Verify(e.to_string()),
        }
    }
}
