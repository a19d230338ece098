use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;

use super::Sample;
use crate::error::{Error, Result};
use crate::graph::TypedInteractionGraph;
use crate::metrics::class_weights;
use crate::model::{
    adam_step, backward, init_model, softmax, Dropout, Hyperparameters, ModelParameters,
    OptimizerState,
};
use crate::propagation::{propagate_target, LabeledPair, PropagationConfig};
use crate::rng::{rng_for, Stream};

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub hp: Hyperparameters,
    /// Balanced class weights from the training labels; unit weights otherwise.
    pub balanced: bool,
    /// When false, targets are one-hot regardless of `hp.alpha`.
    pub propagate: bool,
}

impl TrainConfig {
    pub fn new(hp: Hyperparameters) -> Self {
        Self {
            hp,
            balanced: true,
            propagate: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub params: ModelParameters,
    /// Mean training loss of each epoch (with dropout, as optimized).
    pub epoch_losses: Vec<f64>,
    pub class_weights: Vec<f64>,
}

/// Soft targets for `samples`, propagated over `graph` at factor `alpha`.
pub fn build_targets(
    graph: &TypedInteractionGraph,
    samples: &[Sample],
    alpha: f64,
) -> Result<Vec<LabeledPair>> {
    let cfg = PropagationConfig::new(alpha)?;
    samples
        .iter()
        .map(|s| {
            Ok(LabeledPair {
                i: s.i,
                j: s.j,
                label: s.label,
                target: propagate_target(graph, s.i, s.j, s.label, cfg)?,
            })
        })
        .collect()
}

/// Trains on `samples`, propagating targets over `graph` (which must hold
/// training edges only) and sizing the model from it.
pub fn train(
    graph: &TypedInteractionGraph,
    samples: &[Sample],
    cfg: &TrainConfig,
) -> Result<TrainOutcome> {
    if samples.is_empty() {
        return Err(Error::EmptyDataset);
    }
    cfg.hp.validate()?;
    let k = graph.n_classes();
    let pairs = if cfg.propagate {
        build_targets(graph, samples, cfg.hp.alpha)?
    } else {
        samples
            .iter()
            .map(|s| LabeledPair::hard(s.i, s.j, s.label, k))
            .collect()
    };
    let weights = if cfg.balanced {
        let mut counts = vec![0usize; k];
        for s in samples {
            counts[s.label.0] += 1;
        }
        class_weights(&counts)?
    } else {
        vec![1.0; k]
    };
    train_on_pairs(pairs, &weights, &cfg.hp, graph.n_drugs(), k)
}

/// The optimization loop: seeded shuffles, mini-batches, Adam.
pub fn train_on_pairs(
    mut pairs: Vec<LabeledPair>,
    weights: &[f64],
    hp: &Hyperparameters,
    n_drugs: usize,
    n_classes: usize,
) -> Result<TrainOutcome> {
    if pairs.is_empty() {
        return Err(Error::EmptyDataset);
    }
    hp.validate()?;
    let mut params = init_model(n_drugs, n_classes, hp)?;
    let mut state = OptimizerState::new(&params);
    let mut shuffle_rng = rng_for(hp.seed, Stream::Shuffle, 0);
    let mut dropout_rng = rng_for(hp.seed, Stream::Dropout, 0);
    let mut epoch_losses = Vec::with_capacity(hp.epochs);

    for _ in 0..hp.epochs {
        pairs.shuffle(&mut shuffle_rng);
        let mut total = 0.0;
        for batch in pairs.chunks(hp.batch_size) {
            let mut dropout = Dropout {
                rate: hp.dropout,
                rng: &mut dropout_rng,
            };
            let (grads, loss) = backward(&params, batch, weights, Some(&mut dropout))?;
            adam_step(&mut params, &grads, &mut state, hp.learning_rate)?;
            total += loss * batch.len() as f64;
        }
        epoch_losses.push(total / pairs.len() as f64);
    }
    Ok(TrainOutcome {
        params,
        epoch_losses,
        class_weights: weights.to_vec(),
    })
}

/// Dropout-free mean loss of a model over `pairs`.
pub fn dataset_loss(
    params: &ModelParameters,
    pairs: &[LabeledPair],
    weights: &[f64],
) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok(crate::model::batch_loss(params, pairs, weights))
}

/// Class distributions for each sample's pair.
pub fn predict_pairs(params: &ModelParameters, samples: &[Sample]) -> Result<Vec<Vec<f64>>> {
    samples
        .iter()
        .map(|s| Ok(softmax(&params.forward(s.i, s.j, None)?)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{ClassId, DrugIdx, EvalMode};
    use crate::pipeline::edge_samples;
    use crate::propagation::argmax;

    fn hp(epochs: usize) -> Hyperparameters {
        Hyperparameters {
            embedding_dim: 8,
            dropout: 0.0,
            epochs,
            batch_size: 4,
            learning_rate: 0.05,
            alpha: 0.0,
            seed: 5,
        }
    }

    #[test]
    fn two_drug_instance_converges() {
        let mut g = TypedInteractionGraph::with_drugs(2, 2, EvalMode::Holdout);
        g.add_interaction(DrugIdx(0), DrugIdx(1), ClassId(1))
            .unwrap();
        let out = train(&g, &edge_samples(&g), &TrainConfig::new(hp(200))).unwrap();
        let p = out.params.predict(DrugIdx(0), DrugIdx(1)).unwrap();
        assert_eq!(argmax(&p), 1);
    }

    #[test]
    fn loss_decreases_on_planted_ten_drug_graph() {
        // two blocks of five; within-block class 0, across class 1
        let mut g = TypedInteractionGraph::with_drugs(10, 2, EvalMode::Holdout);
        for i in 0..10 {
            for j in (i + 1)..10 {
                let c = if i % 2 == j % 2 { 0 } else { 1 };
                g.add_interaction(DrugIdx(i), DrugIdx(j), ClassId(c))
                    .unwrap();
            }
        }
        let samples = edge_samples(&g);
        let cfg = TrainConfig::new(Hyperparameters {
            alpha: 0.5,
            dropout: 0.2,
            ..hp(50)
        });
        let pairs = build_targets(&g, &samples, 0.5).unwrap();
        let init = init_model(10, 2, &cfg.hp).unwrap();
        let w = [1.0, 1.0];
        let before = dataset_loss(&init, &pairs, &w).unwrap();
        let out = train(&g, &samples, &cfg).unwrap();
        let after = dataset_loss(&out.params, &pairs, &out.class_weights).unwrap();
        assert!(after < before, "{before} -> {after}");
        assert_eq!(out.epoch_losses.len(), 50);
    }

    #[test]
    fn alpha_zero_equals_bypass() {
        let mut g = TypedInteractionGraph::with_drugs(6, 3, EvalMode::Holdout);
        for (i, j, c) in [
            (0, 1, 0),
            (1, 2, 1),
            (2, 3, 2),
            (3, 4, 0),
            (4, 5, 1),
            (0, 5, 2),
            (1, 4, 0),
        ] {
            g.add_interaction(DrugIdx(i), DrugIdx(j), ClassId(c))
                .unwrap();
        }
        let samples = edge_samples(&g);
        let with = TrainConfig::new(Hyperparameters {
            dropout: 0.3,
            ..hp(10)
        });
        let without = TrainConfig {
            propagate: false,
            ..with.clone()
        };
        let a = train(&g, &samples, &with).unwrap();
        let b = train(&g, &samples, &without).unwrap();
        assert_eq!(a.params, b.params);
        assert_eq!(a.epoch_losses, b.epoch_losses);
    }

    #[test]
    fn deterministic_and_seed_sensitive() {
        let mut g = TypedInteractionGraph::with_drugs(4, 2, EvalMode::Holdout);
        g.add_interaction(DrugIdx(0), DrugIdx(1), ClassId(1))
            .unwrap();
        g.add_interaction(DrugIdx(2), DrugIdx(3), ClassId(0))
            .unwrap();
        let s = edge_samples(&g);
        let cfg = TrainConfig::new(Hyperparameters {
            dropout: 0.5,
            ..hp(5)
        });
        let a = train(&g, &s, &cfg).unwrap();
        let b = train(&g, &s, &cfg).unwrap();
        assert_eq!(a.params, b.params);
        let other = TrainConfig::new(Hyperparameters {
            seed: 6,
            ..cfg.hp.clone()
        });
        assert_ne!(train(&g, &s, &other).unwrap().params, a.params);
    }

    #[test]
    fn empty_dataset() {
        let g = TypedInteractionGraph::with_drugs(4, 2, EvalMode::Holdout);
        assert_eq!(
            train(&g, &[], &TrainConfig::new(hp(1))).unwrap_err(),
            Error::EmptyDataset
        );
    }
}
