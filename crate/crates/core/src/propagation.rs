//! Soft training targets: each hard label is blended with the class
//! distribution of the edges incident to the pair's two endpoints.
//!
//! `t = (1 - alpha) * onehot(label) + alpha * neighborhood(a, b)`

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::graph::{ClassId, DrugIdx, EvalMode, TypedInteractionGraph};

/// The propagation factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationConfig {
    alpha: f64,
}

impl PropagationConfig {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::InvalidConfig(format!(
                "propagation factor {alpha} not in [0, 1]"
            )));
        }
        Ok(Self { alpha })
    }

    pub fn alpha(self) -> f64 {
        self.alpha
    }
}

/// A probability vector over the K classes.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftTarget {
    probs: Vec<f64>,
}

impl SoftTarget {
    pub fn one_hot(k: usize, class: ClassId) -> Self {
        let mut probs = vec![0.0; k];
        probs[class.0] = 1.0;
        Self { probs }
    }

    pub fn uniform(k: usize) -> Self {
        Self {
            probs: vec![1.0 / k as f64; k],
        }
    }

    /// Wraps a distribution, checking non-negativity and unit mass (1e-9).
    pub fn from_probs(probs: Vec<f64>) -> Result<Self> {
        let sum: f64 = probs.iter().sum();
        if probs.iter().any(|p| p.is_nan() || *p < 0.0) || (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidConfig(format!(
                "not a distribution (sum {sum})"
            )));
        }
        Ok(Self { probs })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Index of the largest entry; ties go to the lowest index.
    pub fn argmax(&self) -> ClassId {
        ClassId(argmax(&self.probs))
    }
}

pub(crate) fn argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate().skip(1) {
        if x > xs[best] {
            best = i;
        }
    }
    best
}

/// A training example: canonical pair, its hard label, and its soft target.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledPair {
    pub i: DrugIdx,
    pub j: DrugIdx,
    pub label: ClassId,
    pub target: SoftTarget,
}

impl LabeledPair {
    /// Example whose target is the one-hot of `label` (no propagation).
    pub fn hard(i: DrugIdx, j: DrugIdx, label: ClassId, k: usize) -> Self {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        Self {
            i,
            j,
            label,
            target: SoftTarget::one_hot(k, label),
        }
    }
}

/// Normalized incident-edge class histogram of `(a, b)`.
///
/// When neither endpoint has any other edge the result is the one-hot on
/// class 0 in retrospective mode and uniform in holdout mode.
pub fn neighborhood_distribution(
    graph: &TypedInteractionGraph,
    a: DrugIdx,
    b: DrugIdx,
) -> Result<SoftTarget> {
    let counts = graph.pair_class_histogram(a, b)?;
    let total: usize = counts.iter().sum();
    let k = graph.n_classes();
    if total == 0 {
        return Ok(match graph.mode() {
            EvalMode::Retrospective => SoftTarget::one_hot(k, ClassId::NONE),
            EvalMode::Holdout => SoftTarget::uniform(k),
        });
    }
    let total = total as f64;
    Ok(SoftTarget {
        probs: counts.into_iter().map(|c| c as f64 / total).collect(),
    })
}

/// Convex blend of the hard label and the pair's neighborhood distribution.
pub fn propagate_target(
    graph: &TypedInteractionGraph,
    a: DrugIdx,
    b: DrugIdx,
    label: ClassId,
    cfg: PropagationConfig,
) -> Result<SoftTarget> {
    let k = graph.n_classes();
    if label.0 >= k {
        return Err(Error::InvalidClass {
            class: label.0,
            n_classes: k,
        });
    }
    let hood = neighborhood_distribution(graph, a, b)?;
    let keep = 1.0 - cfg.alpha;
    let probs = hood
        .probs
        .iter()
        .enumerate()
        .map(|(c, &p)| {
            let hard = if c == label.0 { 1.0 } else { 0.0 };
            keep * hard + cfg.alpha * p
        })
        .collect();
    Ok(SoftTarget { probs })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(i: usize) -> DrugIdx {
        DrugIdx(i)
    }

    fn star() -> TypedInteractionGraph {
        // D0 touches classes 1, 1; D1 touches class 2
        let mut g = TypedInteractionGraph::with_drugs(6, 4, EvalMode::Holdout);
        g.add_interaction(d(0), d(2), ClassId(1)).unwrap();
        g.add_interaction(d(0), d(3), ClassId(1)).unwrap();
        g.add_interaction(d(1), d(4), ClassId(2)).unwrap();
        g
    }

    #[test]
    fn normalizes_histogram() {
        let t = neighborhood_distribution(&star(), d(0), d(1)).unwrap();
        assert_eq!(t.probs(), &[0.0, 2.0 / 3.0, 1.0 / 3.0, 0.0]);
    }

    #[test]
    fn isolated_fallbacks() {
        let g = TypedInteractionGraph::with_drugs(3, 4, EvalMode::Retrospective);
        let t = neighborhood_distribution(&g, d(0), d(1)).unwrap();
        assert_eq!(t.probs(), &[1.0, 0.0, 0.0, 0.0]);
        let g = TypedInteractionGraph::with_drugs(3, 4, EvalMode::Holdout);
        let t = neighborhood_distribution(&g, d(0), d(1)).unwrap();
        assert_eq!(t.probs(), &[0.25; 4]);
    }

    #[test]
    fn alpha_endpoints_and_midpoint() {
        let g = star();
        let zero = PropagationConfig::new(0.0).unwrap();
        let one = PropagationConfig::new(1.0).unwrap();
        assert_eq!(
            propagate_target(&g, d(0), d(1), ClassId(3), zero).unwrap(),
            SoftTarget::one_hot(4, ClassId(3))
        );
        assert_eq!(
            propagate_target(&g, d(0), d(1), ClassId(3), one).unwrap(),
            neighborhood_distribution(&g, d(0), d(1)).unwrap()
        );

        // neighborhood concentrated on class 2
        let mut g = TypedInteractionGraph::with_drugs(4, 4, EvalMode::Holdout);
        g.add_interaction(d(0), d(2), ClassId(2)).unwrap();
        let half = PropagationConfig::new(0.5).unwrap();
        let t = propagate_target(&g, d(0), d(1), ClassId(1), half).unwrap();
        assert_eq!(t.probs(), &[0.0, 0.5, 0.5, 0.0]);
    }

    #[test]
    fn rejects_invalid_inputs() {
        assert!(PropagationConfig::new(1.5).is_err());
        assert!(PropagationConfig::new(f64::NAN).is_err());
        let g = star();
        let cfg = PropagationConfig::new(0.3).unwrap();
        assert!(matches!(
            propagate_target(&g, d(0), d(1), ClassId(4), cfg),
            Err(Error::InvalidClass { .. })
        ));
        assert_eq!(
            propagate_target(&g, d(2), d(2), ClassId(0), cfg),
            Err(Error::SelfLoop(2))
        );
    }

    #[test]
    fn argmax_ties_to_lowest() {
        assert_eq!(SoftTarget::uniform(4).argmax(), ClassId(0));
        assert_eq!(argmax(&[0.1, 0.5, 0.5]), 1);
    }
}
