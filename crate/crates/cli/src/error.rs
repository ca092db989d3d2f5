use std::fmt;
use std::path::Path;

/// Anything a command can fail with, tagged for the process exit code:
/// 1 usage, 2 broken input or output files, 3 numerical degeneracy.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String, std::io::Error),
    File(String, String),
    Core(spherelight::Error),
}

impl CliError {
    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Io(path.display().to_string(), e)
    }

    pub fn file(path: &Path, msg: impl Into<String>) -> Self {
        CliError::File(path.display().to_string(), msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Io(..) | CliError::File(..) => 2,
            CliError::Core(e) => match e {
                spherelight::Error::InvalidArgument(_) => 1,
                spherelight::Error::Parse { .. } | spherelight::Error::UnsupportedFormat(_) => 2,
                spherelight::Error::UnsupportedSize(_)
                | spherelight::Error::DegenerateInput(_)
                | spherelight::Error::Numerical(_) => 3,
            },
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Io(path, e) => write!(f, "{path}: {e}"),
            CliError::File(path, msg) => write!(f, "{path}: {msg}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<spherelight::Error> for CliError {
    fn from(e: spherelight::Error) -> Self {
        CliError::Core(e)
    }
}
