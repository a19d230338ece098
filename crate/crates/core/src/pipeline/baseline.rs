//! Non-learned reference predictors.

use alloc::vec;
use alloc::vec::Vec;

use super::Sample;
use crate::error::{Error, Result};
use crate::graph::{ClassId, TypedInteractionGraph};
use crate::propagation::neighborhood_distribution;

/// Predicts each pair's neighborhood class distribution.
pub fn baseline_neighborhood(
    graph: &TypedInteractionGraph,
    test: &[Sample],
) -> Result<Vec<Vec<f64>>> {
    test.iter()
        .map(|s| Ok(neighborhood_distribution(graph, s.i, s.j)?.probs().to_vec()))
        .collect()
}

/// Predicts the empirical training class frequencies for every test pair.
pub fn baseline_majority(
    train_labels: &[ClassId],
    n_classes: usize,
    n_test: usize,
) -> Result<Vec<Vec<f64>>> {
    if train_labels.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut freq = vec![0.0; n_classes];
    for c in train_labels {
        if c.0 >= n_classes {
            return Err(Error::InvalidClass {
                class: c.0,
                n_classes,
            });
        }
        freq[c.0] += 1.0;
    }
    let total = train_labels.len() as f64;
    freq.iter_mut().for_each(|f| *f /= total);
    Ok(vec![freq; n_test])
}
