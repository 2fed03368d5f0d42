use thiserror::Error;

/// Errors reported by the library.
///
/// The variants map onto the exit-code classes of the command-line front end:
/// configuration problems, exhausted resource budgets and numerical failures.
#[derive(Debug, Error)]
pub enum Error {
    /// Arguments violate a documented precondition.
    #[error("usage error: {0}")]
    Usage(String),

    /// The potential does not provide data needed for a certified answer.
    #[error("capability error: {0}")]
    Capability(String),

    /// A finite enumeration would exceed the configured budget.
    #[error("enumeration budget exceeded: {required} patterns required, budget is {budget}")]
    Budget { required: u128, budget: u64 },

    /// A group enumeration would exceed the configured element cap.
    #[error("group growth cap exceeded: more than {cap} elements requested")]
    GrowthCap { cap: usize },

    /// A configuration value is invalid.
    #[error("configuration error at `{path}`: {message}")]
    Config { path: String, message: String },

    /// An interval computation could not be certified (for example a divisor
    /// straddling zero).
    #[error("numeric error: {0}")]
    Numeric(String),
}

impl Error {
    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn is_resource(&self) -> bool {
        matches!(self, Error::Budget { .. } | Error::GrowthCap { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
