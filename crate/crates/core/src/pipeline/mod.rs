//! Dataset assembly, training, and the evaluation harnesses.

mod baseline;
mod folds;
mod grid;
mod holdout;
mod retrospective;
mod train;

pub use baseline::{baseline_majority, baseline_neighborhood};
pub use folds::{stratified_kfold, FoldAssignment};
pub use grid::{grid_search, validation_split, GridConfig, GridObjective, GridResult, GridSpec};
pub use holdout::{fold_training_graph, holdout_evaluate, HoldoutResult};
pub use retrospective::{
    retrospective_evaluate, retrospective_split, retrospective_training_set, RetrospectiveSplit,
    DEFAULT_TEST_CAP,
};
pub use train::{
    build_targets, dataset_loss, predict_pairs, train, train_on_pairs, TrainConfig, TrainOutcome,
};

pub use crate::propagation::LabeledPair;

use crate::graph::{ClassId, DrugIdx, TypedInteractionGraph};

/// A canonical pair (`i < j`) with its hard label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Sample {
    pub i: DrugIdx,
    pub j: DrugIdx,
    pub label: ClassId,
}

impl Sample {
    pub fn new(a: DrugIdx, b: DrugIdx, label: ClassId) -> Self {
        let (i, j) = if a <= b { (a, b) } else { (b, a) };
        Self { i, j, label }
    }

    pub fn pair(&self) -> (DrugIdx, DrugIdx) {
        (self.i, self.j)
    }
}

/// Every stored edge of `graph` as a sample, ascending by pair.
pub fn edge_samples(graph: &TypedInteractionGraph) -> alloc::vec::Vec<Sample> {
    graph
        .edges()
        .map(|(i, j, c)| Sample { i, j, label: c })
        .collect()
}
