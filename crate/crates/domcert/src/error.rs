use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("no solution: {0}")]
    NoSolution(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("automaton accepts no bi-infinite word")]
    EmptyLanguage,

    #[error("cycle budget exceeded: more than {cap} elementary cycles")]
    CycleBudget { cap: usize },

    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),

    #[error("invalid rate: {0}")]
    InvalidRate(String),

    #[error("degenerate cone: {0}")]
    DegenerateCone(String),

    #[error("structural assumption violated: states {0:?} are not inside a loop or on a path between loops")]
    Structure(Vec<String>),

    #[error("signal not admissible for the automaton: first violation at position {position}")]
    Inadmissible { position: usize },

    #[error("no spectral gap at degree {p}: |lambda_{p}| = |lambda_{p_next}|", p_next = p + 1)]
    NoGap { p: usize },

    #[error("initial state has numerically zero dominant component")]
    DegenerateStart,

    #[error("certificate does not match the system: fingerprint {cert} vs {system}")]
    StaleCertificate { cert: String, system: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
