//! Library side of the `modterrain` command: configuration, the three
//! commands and the render manifest.

pub mod commands;
pub mod config;
pub mod manifest;

use thiserror::Error;

pub use commands::{cmd_coeffs, cmd_info, cmd_render, FetchFlags, RenderReport};
pub use config::{Output, RenderConfig};

/// Exit status for configuration and usage errors, including malformed labels.
pub const EXIT_CONFIG: i32 = 2;
/// Exit status for coefficient data and network errors.
pub const EXIT_DATA: i32 = 3;
/// Exit status for evaluation and sampling errors.
pub const EXIT_EVAL: i32 = 4;
/// Exit status for file output errors.
pub const EXIT_IO: i32 = 5;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("lmfdb: {0}")]
    Data(#[from] modterrain::lmfdb::LmfdbError),
    #[error("terrain: {0}")]
    Terrain(#[from] modterrain::terrain::TerrainError),
    #[error("meshio: {0}")]
    MeshIo(#[from] modterrain::meshio::MeshIoError),
    #[error("io: {context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Data(modterrain::lmfdb::LmfdbError::Label { .. }) => {
                EXIT_CONFIG
            }
            CliError::Data(_) => EXIT_DATA,
            CliError::Terrain(_) => EXIT_EVAL,
            CliError::MeshIo(modterrain::meshio::MeshIoError::Io(_)) | CliError::Io { .. } => {
                EXIT_IO
            }
            CliError::MeshIo(_) => EXIT_EVAL,
        }
    }

    /// The message without its module prefix.
    pub fn message(&self) -> String {
        match self {
            CliError::Config(m) => m.clone(),
            other => other.to_string(),
        }
    }

    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io {
            context: context.into(),
            source,
        }
    }
}
