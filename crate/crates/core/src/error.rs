use thiserror::Error;

use crate::model::{ExamId, SlotId};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("request must contain at least one act")]
    EmptyRequest,
    #[error("incompatibility rule pairs exam {0} with itself")]
    SelfRule(ExamId),
    #[error("slot {later} starts before slot {earlier} ends; sort the pair first")]
    Unsorted { earlier: SlotId, later: SlotId },
    #[error("assignment refers to act {0}, which is not in the request")]
    UnknownAct(usize),
    #[error("act {0} is assigned more than once")]
    DuplicateAct(usize),
    #[error("act {act} requests exam {expected} but was given a slot for exam {found}")]
    ExamMismatch {
        act: usize,
        expected: ExamId,
        found: ExamId,
    },
    #[error("schedule is empty")]
    EmptySchedule,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

impl ConfigError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        ConfigError::Invalid(msg.into())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GenerateError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("requested {requested} rules but only {available} distinct ordered exam pairs exist")]
    TooManyRules { requested: usize, available: usize },
    #[error("catalog is empty")]
    EmptyCatalog,
    #[error("requested {requested} acts, expected 1..={max}")]
    ActCount { requested: usize, max: usize },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SolveError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("unschedulable request: no candidate slot for any act")]
    Unschedulable,
    #[error("corrupted individual: act {act} selects position {position} of a {len}-slot block")]
    GeneOutOfRange {
        act: usize,
        position: usize,
        len: usize,
    },
    #[error("individual has {genes} genes but the search space has {acts} acts")]
    ShapeMismatch { genes: usize, acts: usize },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StatsError {
    #[error("both samples must be non-empty")]
    EmptySample,
    #[error("samples must not contain NaN")]
    NotANumber,
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Generate(#[from] GenerateError),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error on {path}: {source}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },
    #[error("json error on {path}: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },
}
