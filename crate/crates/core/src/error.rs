use alloc::string::String;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A curve evaluator overflowed or produced NaN.
    #[error("curve evaluation is not finite at t = {t}")]
    Range { t: f64 },
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("degenerate configuration: {0}")]
    Degenerate(String),
    #[error("root bracketing failed: {0}")]
    Bracket(String),
    /// Sign changes of the differences at consecutive samples.
    #[error("undersampled oscillation near sample {index}")]
    Undersampled { index: usize },
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(msg: &str) -> Error {
    Error::Invalid(String::from(msg))
}
