use thiserror::Error;

/// Errors produced by plan construction, evaluation and the CLI.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid CSIT quality: need 0 <= alpha <= beta <= 1, got alpha={alpha}, beta={beta}")]
    InvalidQuality { alpha: String, beta: String },

    #[error("SNR must be strictly above 0 dB (P > 1), got {p_db} dB")]
    InvalidSnr { p_db: f64 },

    #[error("orthogonal complement of the zero vector is undefined")]
    ZeroVector,

    #[error("{scheme} is degenerate at this quality: {reason}")]
    DegenerateScheme { scheme: &'static str, reason: String },

    #[error("hybrid case I needs beta <= (2+alpha)/3, got alpha={alpha}, beta={beta}")]
    CaseIThreshold { alpha: String, beta: String },

    #[error(
        "hybrid case II needs beta strictly above (2+alpha)/3, got alpha={alpha}, \
         beta={beta}; hybrid case I covers that range"
    )]
    CaseIIThreshold { alpha: String, beta: String },

    #[error(
        "block count L = (1-alpha)/(3*beta-alpha-2) = {l} is not a positive integer; \
         nearest valid qualities at this alpha: {suggestions}; the analytic DoF \
         ((2+alpha)/3, (2+alpha)/3) is still available from the region analysis"
    )]
    NonIntegerBlocks { l: String, suggestions: String },

    #[error("unknown symbol `{0}` in this plan")]
    UnknownSymbol(String),

    #[error("prelog regression needs at least 3 SNR points, got {0}")]
    TooFewSnrPoints(usize),

    #[error("cannot parse `{0}` as a rational (expected `p/q`, a decimal, or an integer)")]
    BadRational(String),

    #[error("n_trials must be >= 1")]
    NoTrials,

    #[error("scheme/quality mismatch: {0}")]
    SchemeQuality(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
