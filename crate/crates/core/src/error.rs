use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by every module of the crate.
///
/// Each variant maps to a stable machine-readable code (see [`Error::code`]),
/// which the command-line front end prints alongside the message.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid number of users K={k}: {reason}")]
    InvalidK { k: usize, reason: String },

    #[error("invalid connectivity parameter L={l} for K={k} (need 0 <= L < K)")]
    InvalidL { l: i64, k: usize },

    #[error("invalid cooperation order M={m}: {reason}")]
    InvalidM { m: usize, reason: String },

    #[error("index {index} out of range 1..={k}")]
    IndexOutOfRange { index: usize, k: usize },

    #[error("topology mismatch: expected {expected}, found {found}")]
    TopologyMismatch { expected: String, found: String },

    #[error("unsupported topology: {0}")]
    UnsupportedTopology(String),

    #[error("too few users: K={k} but a cluster needs {needed}")]
    TooFewUsers { k: usize, needed: usize },

    #[error("2M/(2M+L) < 1/2 for M={m}, L={l}: this regime needs interference alignment, not zero forcing")]
    IaRegime { m: usize, l: usize },

    #[error("exact subset search limited to K <= {limit}, got K={k}")]
    TooLargeForExact { k: usize, limit: usize },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("internal invariant violated: {0}")]
    InternalInvariant(String),

    #[error("unknown setting: {0}")]
    UnknownSetting(String),

    #[error("no-cooperation bound needs cooperation order <= 1, got {0}")]
    CooperationNotOne(usize),

    #[error("singular channel: |H[{rx}][{tx}]| = {value:e} is below the divisor floor")]
    SingularChannel { rx: usize, tx: usize, value: f64 },

    #[error("cannot cancel message {message} at receiver {rx}: {reason}")]
    UnsolvableCancellation {
        message: usize,
        rx: usize,
        reason: String,
    },

    #[error("limit exceeded: {0}")]
    LimitExceeded(String),

    #[error("power constraint violated: {0}")]
    PowerViolation(String),

    #[error("insufficient power sweep: {0}")]
    InsufficientSweep(String),

    #[error("schema violation at {pointer}: {message}")]
    SchemaViolation { pointer: String, message: String },

    #[error("unknown strategy {0:?} (expected spiral, scheme or custom)")]
    UnknownStrategy(String),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidK { .. } => "invalid_k",
            Error::InvalidL { .. } => "invalid_l",
            Error::InvalidM { .. } => "invalid_m",
            Error::IndexOutOfRange { .. } => "index_out_of_range",
            Error::TopologyMismatch { .. } => "topology_mismatch",
            Error::UnsupportedTopology(_) => "unsupported_topology",
            Error::TooFewUsers { .. } => "too_few_users",
            Error::IaRegime { .. } => "ia_regime",
            Error::TooLargeForExact { .. } => "too_large_for_exact",
            Error::Infeasible(_) => "infeasible",
            Error::InternalInvariant(_) => "internal_invariant",
            Error::UnknownSetting(_) => "unknown_setting",
            Error::CooperationNotOne(_) => "cooperation_not_one",
            Error::SingularChannel { .. } => "singular_channel",
            Error::UnsolvableCancellation { .. } => "unsolvable_cancellation",
            Error::LimitExceeded(_) => "limit_exceeded",
            Error::PowerViolation(_) => "power_violation",
            Error::InsufficientSweep(_) => "insufficient_sweep",
            Error::SchemaViolation { .. } => "schema_violation",
            Error::UnknownStrategy(_) => "unknown_strategy",
            Error::Parse(_) => "parse",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
        }
    }
}
