use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::{
    edge_samples, predict_pairs, stratified_kfold, train, FoldAssignment, Sample, TrainConfig,
};
use crate::error::{Error, Result};
use crate::graph::{ClassId, EvalMode, TypedInteractionGraph};
use crate::metrics::{multiclass_report, MultiClassReport};

#[derive(Debug, Clone)]
pub struct HoldoutResult {
    /// Scalar metrics averaged over folds; `per_class` comes from the pooled
    /// out-of-fold predictions.
    pub mean: MultiClassReport,
    pub folds: Vec<MultiClassReport>,
    /// Report over every sample's out-of-fold prediction.
    pub pooled: MultiClassReport,
}

/// Copy of `graph` without fold `fold`'s pairs, after checking that none
/// of them survived.
pub fn fold_training_graph(
    graph: &TypedInteractionGraph,
    samples: &[Sample],
    folds: &FoldAssignment,
    fold: usize,
) -> Result<TypedInteractionGraph> {
    let test = folds.test_indices(fold);
    let train_graph = graph.without_pairs(test.iter().map(|&s| samples[s].pair()));
    for &s in &test {
        let (i, j) = samples[s].pair();
        if train_graph.get(i, j).is_some() {
            return Err(Error::Leakage(i.0, j.0));
        }
    }
    Ok(train_graph)
}

/// Stratified k-fold evaluation over the edges of a holdout-mode graph.
/// Propagation and class weights only ever see the training folds.
pub fn holdout_evaluate(
    graph: &TypedInteractionGraph,
    cfg: &TrainConfig,
    k: usize,
    seed: u64,
) -> Result<HoldoutResult> {
    if graph.mode() != EvalMode::Holdout {
        return Err(Error::InvalidConfig(String::from(
            "holdout evaluation needs a holdout-mode graph",
        )));
    }
    let samples = edge_samples(graph);
    let labels: Vec<ClassId> = samples.iter().map(|s| s.label).collect();
    let folds = stratified_kfold(&labels, k, seed)?;

    let mut pooled_probs = vec![Vec::new(); samples.len()];
    let mut reports = Vec::with_capacity(k);
    for fold in 0..k {
        let train_graph = fold_training_graph(graph, &samples, &folds, fold)?;
        let train_set: Vec<Sample> = folds
            .train_indices(fold)
            .into_iter()
            .map(|s| samples[s])
            .collect();
        let test_idx = folds.test_indices(fold);
        let test_set: Vec<Sample> = test_idx.iter().map(|&s| samples[s]).collect();

        let model = train(&train_graph, &train_set, cfg)?;
        let probs = predict_pairs(&model.params, &test_set)?;
        let truths: Vec<ClassId> = test_set.iter().map(|s| s.label).collect();
        reports.push(multiclass_report(&probs, &truths)?);
        for (&s, p) in test_idx.iter().zip(probs) {
            pooled_probs[s] = p;
        }
    }
    let pooled = multiclass_report(&pooled_probs, &labels)?;
    let mean = average_reports(&reports, &pooled);
    Ok(HoldoutResult {
        mean,
        folds: reports,
        pooled,
    })
}

fn average_reports(reports: &[MultiClassReport], pooled: &MultiClassReport) -> MultiClassReport {
    let n = reports.len() as f64;
    let avg = |f: fn(&MultiClassReport) -> f64| reports.iter().map(f).sum::<f64>() / n;
    MultiClassReport {
        n_samples: reports.iter().map(|r| r.n_samples).sum(),
        accuracy: avg(|r| r.accuracy),
        micro_precision: avg(|r| r.micro_precision),
        micro_recall: avg(|r| r.micro_recall),
        micro_f1: avg(|r| r.micro_f1),
        micro_auroc: avg(|r| r.micro_auroc),
        micro_aupr: avg(|r| r.micro_aupr),
        macro_precision: avg(|r| r.macro_precision),
        macro_recall: avg(|r| r.macro_recall),
        macro_f1: avg(|r| r.macro_f1),
        macro_auroc: avg(|r| r.macro_auroc),
        macro_aupr: avg(|r| r.macro_aupr),
        per_class: pooled.per_class.clone(),
    }
}
