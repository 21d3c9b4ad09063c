use std::io;
use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] polybead_core::Error),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{source_name}:{line}: {msg}")]
    Parse {
        source_name: String,
        line: usize,
        msg: String,
    },
    #[error("{source_name}: frame {frame} (line {line}): {msg}")]
    Dump {
        source_name: String,
        frame: usize,
        line: usize,
        msg: String,
    },
    #[error("invalid spec:\n  {}", .0.join("\n  "))]
    Spec(Vec<String>),
    #[error("plot: {0}")]
    Plot(String),
    #[error("report references missing plot {}", .0.display())]
    MissingPlot(PathBuf),
    #[error("{0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Workflow(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(io::Error) -> Error {
        let path = path.into();
        move |source| Error::Io { path, source }
    }

    /// Exit status for the command-line driver: 2 for invalid input specs,
    /// 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Spec(_) => 2,
            _ => 1,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
