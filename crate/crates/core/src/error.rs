use thiserror::Error;

/// Errors raised by estimators, samplers and the analysis pipelines.
#[derive(Debug, Error)]
pub enum MesError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("degenerate tail: {0}")]
    DegenerateTail(String),

    #[error("no observation strictly exceeds the radial threshold at k = {k}")]
    DegenerateThreshold { k: usize },

    #[error("k = {k} outside the admissible range 1..={max}")]
    InvalidK { k: usize, max: usize },

    #[error("tau = {0} must lie strictly between 0 and 1")]
    InvalidTau(f64),

    #[error("alpha = {0} must lie strictly between 0 and 1")]
    InvalidAlpha(f64),

    #[error("lag {lag} outside 1..{n}")]
    InvalidLag { lag: usize, n: usize },

    #[error("tail index estimate {gamma} >= 1: the expected shortfall is unbounded")]
    HeavyTailUnbounded { gamma: f64 },

    #[error("second-order parameters required for a bias-corrected interval")]
    MissingSecondOrder,

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("only {count} exceedances, at least {required} needed; increase the number of draws")]
    InsufficientExceedances { count: usize, required: usize },

    #[error("ground truth is required for this experiment")]
    MissingTruth,

    #[error("curves are evaluated on different k grids")]
    GridMismatch,

    #[error("invalid prices: {0}")]
    InvalidPrices(String),

    #[error("invalid horizon: {frequency} observations per year over {years} years")]
    InvalidHorizon { frequency: f64, years: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl MesError {
    /// Stable variant name, used for machine-readable error lines.
    pub fn name(&self) -> &'static str {
        match self {
            MesError::InvalidInput(_) => "InvalidInput",
            MesError::DegenerateTail(_) => "DegenerateTail",
            MesError::DegenerateThreshold { .. } => "DegenerateThreshold",
            MesError::InvalidK { .. } => "InvalidK",
            MesError::InvalidTau(_) => "InvalidTau",
            MesError::InvalidAlpha(_) => "InvalidAlpha",
            MesError::InvalidLag { .. } => "InvalidLag",
            MesError::HeavyTailUnbounded { .. } => "HeavyTailUnbounded",
            MesError::MissingSecondOrder => "MissingSecondOrder",
            MesError::InvalidModel(_) => "InvalidModel",
            MesError::InsufficientExceedances { .. } => "InsufficientExceedances",
            MesError::MissingTruth => "MissingTruth",
            MesError::GridMismatch => "GridMismatch",
            MesError::InvalidPrices(_) => "InvalidPrices",
            MesError::InvalidHorizon { .. } => "InvalidHorizon",
            MesError::Parse(_) => "Parse",
            MesError::Io(_) => "IoError",
            MesError::Csv(_) => "CsvError",
        }
    }
}

pub type Result<T> = std::result::Result<T, MesError>;
