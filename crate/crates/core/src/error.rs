use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid arguments: bad parameters, shape mismatches, violated preconditions.
    #[error("usage error: {0}")]
    Usage(String),

    /// The requested computation exceeds a configured size limit.
    #[error("resource limit exceeded: {what} needs {required}, limit is {limit}")]
    Resource {
        what: &'static str,
        required: String,
        limit: String,
    },

    /// A verification that should hold empirically did not.
    #[error("verification failed: {0}")]
    Verification(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub(crate) fn resource(what: &'static str, required: impl ToString, limit: impl ToString) -> Self {
        Error::Resource {
            what,
            required: required.to_string(),
            limit: limit.to_string(),
        }
    }

    /// Process exit code used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) => 1,
            Error::Resource { .. } => 2,
            Error::Verification(_) => 3,
            Error::Io(_) => 1,
        }
    }
}
