use std::fmt;
use std::path::{Path, PathBuf};

/// Failure category, mapped one-to-one onto process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Category {
    Io,
    Config,
    Format,
    Numeric,
}

impl Category {
    pub fn exit_code(self) -> i32 {
        match self {
            Category::Io => 1,
            Category::Config => 2,
            Category::Format => 3,
            Category::Numeric => 4,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Category::Io => "io",
            Category::Config => "config",
            Category::Format => "format",
            Category::Numeric => "numeric",
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{0}")]
    Config(String),
    #[error("{}{}: {msg}", path.display(), line.map(|l| format!(":{l}")).unwrap_or_default())]
    Format {
        path: PathBuf,
        line: Option<usize>,
        msg: String,
    },
    #[error("{0}")]
    Numeric(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn category(&self) -> Category {
        match self {
            Error::Config(_) => Category::Config,
            Error::Format { .. } => Category::Format,
            Error::Numeric(_) => Category::Numeric,
            Error::Io { .. } => Category::Io,
        }
    }

    pub fn config(msg: impl fmt::Display) -> Self {
        Error::Config(msg.to_string())
    }

    pub fn format(path: &Path, line: Option<usize>, msg: impl fmt::Display) -> Self {
        Error::Format {
            path: path.to_path_buf(),
            line,
            msg: msg.to_string(),
        }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// Single-line `error[category]: message` report.
    pub fn report(&self) -> String {
        let msg = self.to_string().replace('\n', " ");
        format!("error[{}]: {msg}", self.category().as_str())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
