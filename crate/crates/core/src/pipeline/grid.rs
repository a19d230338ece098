use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;

use super::{predict_pairs, train, Sample, TrainConfig};
use crate::error::{Error, Result};
use crate::graph::{ClassId, TypedInteractionGraph};
use crate::metrics::multiclass_report;
use crate::model::Hyperparameters;
use crate::rng::{rng_for, Stream};

/// Candidate values per hyperparameter. Points are enumerated with the last
/// dimension (`alpha`) varying fastest.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GridSpec {
    pub embedding_dim: Vec<usize>,
    pub dropout: Vec<f64>,
    pub epochs: Vec<usize>,
    pub batch_size: Vec<usize>,
    pub learning_rate: Vec<f64>,
    pub alpha: Vec<f64>,
}

fn tenths(max: usize) -> Vec<f64> {
    (0..=max).map(|t| t as f64 / 10.0).collect()
}

impl GridSpec {
    pub fn single(hp: &Hyperparameters) -> Self {
        Self {
            embedding_dim: vec![hp.embedding_dim],
            dropout: vec![hp.dropout],
            epochs: vec![hp.epochs],
            batch_size: vec![hp.batch_size],
            learning_rate: vec![hp.learning_rate],
            alpha: vec![hp.alpha],
        }
    }

    /// The published search space at embedding size 512 (88,000 points).
    pub fn full_table() -> Self {
        Self {
            embedding_dim: vec![512],
            dropout: tenths(9),
            epochs: (1..=50).collect(),
            batch_size: vec![128, 256, 512, 1024],
            learning_rate: vec![0.1, 0.01, 0.001, 0.0001],
            alpha: tenths(10),
        }
    }

    pub fn len(&self) -> usize {
        self.embedding_dim.len()
            * self.dropout.len()
            * self.epochs.len()
            * self.batch_size.len()
            * self.learning_rate.len()
            * self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Every grid point, with `seed` copied into each.
    pub fn points(&self, seed: u64) -> Vec<Hyperparameters> {
        let mut out = Vec::with_capacity(self.len());
        for &embedding_dim in &self.embedding_dim {
            for &dropout in &self.dropout {
                for &epochs in &self.epochs {
                    for &batch_size in &self.batch_size {
                        for &learning_rate in &self.learning_rate {
                            for &alpha in &self.alpha {
                                out.push(Hyperparameters {
                                    embedding_dim,
                                    dropout,
                                    epochs,
                                    batch_size,
                                    learning_rate,
                                    alpha,
                                    seed,
                                });
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum GridObjective {
    #[default]
    Accuracy,
    MacroAuroc,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridConfig {
    pub validation_fraction: f64,
    pub seed: u64,
    pub objective: GridObjective,
    pub balanced: bool,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            validation_fraction: 0.2,
            seed: 0,
            objective: GridObjective::Accuracy,
            balanced: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GridResult {
    pub best: Hyperparameters,
    /// Each point with its validation score, in enumeration order.
    pub results: Vec<(Hyperparameters, f64)>,
}

/// Splits off a stratified validation set: `round(fraction × count)` samples
/// of every class. Returns `(train, validation)`.
pub fn validation_split(
    samples: &[Sample],
    fraction: f64,
    seed: u64,
) -> Result<(Vec<Sample>, Vec<Sample>)> {
    if !(0.0..1.0).contains(&fraction) || fraction == 0.0 {
        return Err(Error::InvalidConfig(alloc::format!(
            "validation fraction {fraction} not in (0, 1)"
        )));
    }
    let k = samples.iter().map(|s| s.label.0 + 1).max().unwrap_or(0);
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (idx, s) in samples.iter().enumerate() {
        by_class[s.label.0].push(idx);
    }
    let mut rng = rng_for(seed, Stream::Validation, 0);
    let mut is_val = vec![false; samples.len()];
    for members in by_class.iter_mut() {
        members.shuffle(&mut rng);
        let take = libm::round(fraction * members.len() as f64) as usize;
        for &idx in &members[..take] {
            is_val[idx] = true;
        }
    }
    let (mut train_set, mut val) = (Vec::new(), Vec::new());
    for (s, v) in samples.iter().zip(is_val) {
        if v {
            val.push(*s)
        } else {
            train_set.push(*s)
        }
    }
    if train_set.is_empty() || val.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok((train_set, val))
}

/// Trains every grid point on the non-validation part of `samples` and keeps
/// the best validation score; ties go to the earliest point.
pub fn grid_search(
    graph: &TypedInteractionGraph,
    samples: &[Sample],
    grid: &GridSpec,
    cfg: &GridConfig,
) -> Result<GridResult> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let (train_set, val) = validation_split(samples, cfg.validation_fraction, cfg.seed)?;
    let train_graph = graph.without_pairs(val.iter().map(|s| s.pair()));
    let truths: Vec<ClassId> = val.iter().map(|s| s.label).collect();

    let mut results = Vec::with_capacity(grid.len());
    let mut best: Option<(usize, f64)> = None;
    for hp in grid.points(cfg.seed) {
        let tc = TrainConfig {
            hp: hp.clone(),
            balanced: cfg.balanced,
            propagate: true,
        };
        let model = train(&train_graph, &train_set, &tc)?;
        let report = multiclass_report(&predict_pairs(&model.params, &val)?, &truths)?;
        let score = match cfg.objective {
            GridObjective::Accuracy => report.accuracy,
            GridObjective::MacroAuroc => report.macro_auroc,
        };
        if best.is_none_or(|(_, s)| score > s) {
            best = Some((results.len(), score));
        }
        results.push((hp, score));
    }
    let (idx, _) = best.ok_or(Error::EmptyGrid)?;
    Ok(GridResult {
        best: results[idx].0.clone(),
        results,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{DrugIdx, EvalMode};
    use crate::pipeline::edge_samples;

    fn small() -> Hyperparameters {
        Hyperparameters {
            embedding_dim: 4,
            dropout: 0.0,
            epochs: 3,
            batch_size: 8,
            learning_rate: 0.05,
            alpha: 0.0,
            seed: 1,
        }
    }

    fn graph() -> TypedInteractionGraph {
        let mut g = TypedInteractionGraph::with_drugs(10, 2, EvalMode::Holdout);
        for i in 0..10 {
            for j in (i + 1)..10 {
                g.add_interaction(DrugIdx(i), DrugIdx(j), ClassId((i + j) % 2))
                    .unwrap();
            }
        }
        g
    }

    #[test]
    fn full_table_size() {
        let full = GridSpec::full_table();
        assert_eq!(full.len(), 4 * 4 * 10 * 50 * 11);
        assert_eq!(full.dropout.len(), 10);
        assert_eq!(full.alpha.last(), Some(&1.0));
    }

    #[test]
    fn enumeration_order_alpha_fastest() {
        let mut g = GridSpec::single(&small());
        g.alpha = vec![0.0, 0.5];
        g.epochs = vec![1, 2];
        let pts = g.points(3);
        let seq: Vec<(usize, f64)> = pts.iter().map(|p| (p.epochs, p.alpha)).collect();
        assert_eq!(seq, vec![(1, 0.0), (1, 0.5), (2, 0.0), (2, 0.5)]);
        assert!(pts.iter().all(|p| p.seed == 3));
    }

    #[test]
    fn single_point_returned() {
        let g = graph();
        let hp = small();
        let cfg = GridConfig {
            seed: hp.seed,
            ..Default::default()
        };
        let r = grid_search(&g, &edge_samples(&g), &GridSpec::single(&hp), &cfg).unwrap();
        assert_eq!(r.best, hp);
        assert_eq!(r.results.len(), 1);
    }

    #[test]
    fn empty_grid() {
        let g = graph();
        let mut spec = GridSpec::single(&small());
        spec.alpha.clear();
        assert_eq!(
            grid_search(&g, &edge_samples(&g), &spec, &GridConfig::default()).unwrap_err(),
            Error::EmptyGrid
        );
    }

    #[test]
    fn ties_go_first() {
        let g = graph();
        let mut spec = GridSpec::single(&small());
        // identical points score identically
        spec.embedding_dim = vec![4, 4];
        spec.alpha = vec![0.0];
        let r = grid_search(&g, &edge_samples(&g), &spec, &GridConfig::default()).unwrap();
        assert_eq!(r.results[0].1, r.results[1].1);
        assert_eq!(r.best, r.results[0].0);
    }

    #[test]
    fn validation_split_is_stratified() {
        let samples = edge_samples(&graph());
        let (tr, val) = validation_split(&samples, 0.2, 4).unwrap();
        assert_eq!(tr.len() + val.len(), samples.len());
        for c in 0..2 {
            let total = samples.iter().filter(|s| s.label.0 == c).count();
            let v = val.iter().filter(|s| s.label.0 == c).count();
            assert_eq!(v, libm::round(0.2 * total as f64) as usize);
        }
    }
}
