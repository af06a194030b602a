use thiserror::Error;

/// Errors raised by the computational modules.
///
/// Numerical payloads are carried as `f64` regardless of the scalar type the
/// computation ran in.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LabError {
    /// A field or potential was evaluated at (or too close to) a point where it
    /// is singular: a source position or the excluded axis of a gauge patch.
    #[error("singular point: {0}")]
    SingularPoint(String),

    /// An argument lies outside the operation's domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// An iterative or adaptive computation did not reach its tolerance.
    #[error("no convergence: {message} (best estimate {best}, error {error:e})")]
    Convergence { message: String, best: f64, error: f64, history: Vec<f64> },

    /// A propagation configuration would be unstable or unresolved.
    #[error("unstable configuration: {0}")]
    Stability(String),

    /// A quadrature on a supplied grid is not accurate enough.
    #[error("insufficient accuracy: {0}")]
    Accuracy(String),
}

pub type Result<T, E = LabError> = std::result::Result<T, E>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(LabError::Domain(msg.into()))
}
