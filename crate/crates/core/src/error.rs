use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("feature {feature} has zero variance")]
    ConstantFeature { feature: usize },

    #[error("component {component} of subject {subject} is constant; correlation undefined")]
    ConstantComponent { subject: usize, component: usize },

    #[error("invalid time-series panel: {0}")]
    InvalidPanel(String),

    #[error("dimension mismatch: expected {expected} features, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid feature grouping: {0}")]
    InvalidGrouping(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("cluster {cluster} became empty during fitting")]
    DegenerateCluster { cluster: usize },

    #[error("at least two non-noise clusters are required")]
    InsufficientClusters,

    #[error("model assigns every training sample to noise")]
    AllNoiseModel,

    #[error("perturbation count {m} exceeds the number of available donors {max}")]
    MTooLarge { m: usize, max: usize },

    #[error("baseline performance is zero; relative change is undefined")]
    ZeroBaselinePerformance,

    #[error("could not draw a split containing both classes after {retries} retries")]
    DegenerateFold { retries: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidData(_) => "InvalidData",
            Error::ConstantFeature { .. } => "ConstantFeature",
            Error::ConstantComponent { .. } => "ConstantComponent",
            Error::InvalidPanel(_) => "InvalidPanel",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::InvalidGrouping(_) => "InvalidGrouping",
            Error::InvalidParameter(_) => "InvalidParameter",
            Error::DegenerateCluster { .. } => "DegenerateCluster",
            Error::InsufficientClusters => "InsufficientClusters",
            Error::AllNoiseModel => "AllNoiseModel",
            Error::MTooLarge { .. } => "MTooLarge",
            Error::ZeroBaselinePerformance => "ZeroBaselinePerformance",
            Error::DegenerateFold { .. } => "DegenerateFold",
            Error::Io { .. } => "Io",
            Error::Csv(_) => "Csv",
            Error::Json(_) => "Json",
        }
    }
}
