use thiserror::Error;

use crate::dataset::{AttackClass, FeatureId};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("unknown attack label `{0}`")]
    UnknownLabel(String),

    #[error("feature index {0} outside 1..=41")]
    InvalidFeature(usize),

    #[error("feature {0} is not part of the dataset schema")]
    FeatureNotInSchema(FeatureId),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("class {0} cannot be used as an attack filter")]
    InvalidClassFilter(AttackClass),

    #[error("feature set is empty")]
    EmptyFeatureSet,

    #[error("length mismatch: {0} actual labels vs {1} predictions")]
    LengthMismatch(usize, usize),

    #[error("class {0} has zero training weight")]
    ZeroWeightClass(AttackClass),

    #[error("model was trained on features {expected}, got {got}")]
    FeatureMismatch { expected: String, got: String },

    #[error("boosting round {round}: {source}")]
    BoostRound {
        round: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("boosting produced no usable round (first-round error {0:.4} >= 0.5)")]
    EmptyEnsemble(f64),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("training data is empty")]
    EmptyTrainingSet,

    #[error("{stage}: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn in_stage(self, stage: impl Into<String>) -> Self {
        Error::Stage {
            stage: stage.into(),
            source: Box::new(self),
        }
    }
}
