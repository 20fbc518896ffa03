use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown material preset `{name}`; valid names: {}", valid.join(", "))]
    UnknownPreset { name: String, valid: Vec<String> },

    #[error("invalid magnet spec `{name}`: {reason}")]
    InvalidSpec { name: String, reason: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("load line and magnet curve do not cross in [{lo:.6e}, {hi:.6e}] A/m")]
    Bracket { lo: f64, hi: f64 },

    #[error("operating point did not converge after {iterations} iterations (residual {residual:.3e} T)")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("{magnet} element {element}: {source}")]
    Element {
        magnet: &'static str,
        element: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("interval {interval} (i_d = {i_d} A, i_q = {i_q} A): {source}")]
    Interval {
        interval: usize,
        i_d: f64,
        i_q: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid input: {0}")]
    Input(String),

    #[error("degenerate reference: interval-2 amplitude {amplitude:.3e} is below the floor")]
    DegenerateReference { amplitude: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error("unknown metric column `{0}`")]
    UnknownColumn(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Stable short name of the variant, for machine-readable reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::UnknownPreset { .. } => "unknown_preset",
            Error::InvalidSpec { .. } => "invalid_spec",
            Error::Domain(_) => "domain",
            Error::Bracket { .. } => "bracket",
            Error::NoConvergence { .. } => "no_convergence",
            Error::Element { source, .. } | Error::Interval { source, .. } => source.kind(),
            Error::Input(_) => "input",
            Error::DegenerateReference { .. } => "degenerate_reference",
            Error::Config(_) => "config",
            Error::UnknownColumn(_) => "unknown_column",
            Error::Io { .. } => "io",
            Error::Csv(_) => "csv",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
