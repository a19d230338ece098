use alloc::string::String;

/// Errors raised by the core library.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("self-loop on drug {0}")]
    SelfLoop(usize),
    #[error("unknown drug {0}")]
    UnknownDrug(String),
    #[error("class {class} is not valid here (K = {n_classes})")]
    InvalidClass { class: usize, n_classes: usize },
    #[error("pair ({a}, {b}) already has class {existing}, refusing {requested}")]
    ConflictingLabel {
        a: usize,
        b: usize,
        existing: usize,
        requested: usize,
    },
    #[error("duplicate drug id {0}")]
    DuplicateDrug(String),
    #[error("nothing left of the sentence after normalization")]
    EmptyAfterNormalization,
    #[error("empty input")]
    EmptyInput,
    #[error("unknown phrase \"{0}\"")]
    UnknownPhrase(String),
    #[error("invalid dimensions: {0}")]
    InvalidDimensions(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("empty batch")]
    EmptyBatch,
    #[error("degenerate labels: {0}")]
    DegenerateLabels(&'static str),
    #[error("no positive items")]
    NoPositives,
    #[error("all classes are empty")]
    AllEmpty,
    #[error("too few pairs: {pairs} pairs for {folds} folds")]
    TooFewPairs { pairs: usize, folds: usize },
    #[error("empty dataset")]
    EmptyDataset,
    #[error("no common drugs between the two snapshots")]
    EmptyIntersection,
    #[error("subset restriction removed every test pair")]
    EmptySubset,
    #[error("empty hyperparameter grid")]
    EmptyGrid,
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("test edge ({0}, {1}) leaked into a training graph")]
    Leakage(usize, usize),
}

pub type Result<T> = core::result::Result<T, Error>;
