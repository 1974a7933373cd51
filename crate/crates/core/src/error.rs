use thiserror::Error;

/// Errors produced anywhere in the solver stack.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    /// A curvature vector touched the boundary of the positive cone.
    #[error("curvature component {index} = {value:e} is on or outside the positive-cone boundary")]
    DomainBoundary { index: usize, value: f64 },

    #[error("point |xi| = {norm} lies outside the open unit ball")]
    OutsideBall { norm: f64 },

    #[error("field has no boundary ring data")]
    MissingBoundary,

    #[error("numeric failure at node ({ring}, {angle}): {what}")]
    Numeric { ring: usize, angle: usize, what: String },

    /// Recoverable: the caller is expected to retry with a smaller step.
    #[error("step rejected: min dual curvature {min_kappa:e} at node ({ring}, {angle}) below {tol:e}")]
    Rejected { ring: usize, angle: usize, min_kappa: f64, tol: f64 },

    #[error("integration aborted at t = {t}: {detail}")]
    Aborted { t: f64, detail: String },

    #[error("barrier construction failed: max violation {max_violation:e}")]
    BarrierConstruction { max_violation: f64 },

    #[error("initial data rejected: {0}")]
    Ingestion(String),

    #[error("boosted samples fold over on row {row}")]
    FoldOver { row: usize },

    #[error("snapshot format error at byte {offset}: {msg}")]
    Format { offset: usize, msg: String },

    #[error("unsupported snapshot version {0:?}")]
    UnsupportedVersion(String),

    #[error("config error (line {line}, field `{field}`): {msg}")]
    Config { line: usize, field: String, msg: String },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn arg<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Argument(msg.into()))
}
