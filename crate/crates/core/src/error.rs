use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A configuration value violates its documented range.
    #[error("invalid {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// A closed-form access probability landed outside `[0, 1]` by more than
    /// the clamping tolerance, which signals an unreachable parameter regime.
    #[error("{what} = {value} lies outside [0, 1] (network age {network_age})")]
    OutOfRange {
        what: &'static str,
        value: f64,
        network_age: f64,
    },

    #[error("age is only defined for AON nodes")]
    NotAnAonNode,

    #[error("age vector is empty")]
    EmptyAges,
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
