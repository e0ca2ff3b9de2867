use thiserror::Error;

/// Errors raised anywhere in the simulator.
///
/// The variants map onto the CLI exit-code contract: configuration problems
/// exit with 1, physics-domain problems with 2 and filesystem problems with 3.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of a physical formula.
    #[error("domain error: {0}")]
    Domain(String),

    /// A material name is not in the table.
    #[error("unknown material `{name}` (available: {available})")]
    Lookup { name: String, available: String },

    /// The Joyce-Dixon series was asked for a degeneracy beyond its range.
    #[error("Joyce-Dixon series invalid for n/N_eff = {ratio:.4} (> 10); use exact_eta")]
    Validity { ratio: f64 },

    /// A root finder or eigen solver failed to converge or bracket.
    #[error("solver error: {0}")]
    Solver(String),

    /// A physical configuration that cannot be evaluated (non-positive gap, ...).
    #[error("configuration error: {0}")]
    Configuration(String),

    /// Config file parse failure, located by key and line.
    #[error("{path}:{line}: key `{key}`: {message}")]
    Parse {
        path: String,
        line: usize,
        key: String,
        message: String,
    },

    #[error("usage error: {0}")]
    Usage(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// Process exit code for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } | Error::Usage(_) | Error::Lookup { .. } => 1,
            Error::Io { .. } => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
