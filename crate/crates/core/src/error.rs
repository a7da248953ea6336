use thiserror::Error;

/// Failure modes of the numerical routines.
///
/// `Domain` marks inputs outside an operation's mathematical domain or a
/// violated precondition; `Convergence` marks an iterative method that ran
/// out of budget before reaching its tolerance; `Unsupported` marks a
/// requested variant outside the implemented set.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain: {0}")]
    Domain(String),
    #[error("convergence: {0}")]
    Convergence(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for errors caused by invalid caller input rather than a
    /// numerical breakdown. CLI layers map this to the validation exit code.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::Domain(_) | Error::Unsupported(_))
    }
}
