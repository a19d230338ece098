//! Ranking and classification metrics.
//!
//! AUROC is the Mann–Whitney statistic computed from midranks, so tied scores
//! count one half. AUPR is step-wise average precision. Multi-class reports
//! pool one-vs-rest pairs for micro averages and average per-class values
//! (over classes with support) for macro averages.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::graph::ClassId;
use crate::propagation::argmax;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredLabel {
    pub score: f64,
    pub positive: bool,
}

impl ScoredLabel {
    pub fn new(score: f64, positive: bool) -> Self {
        Self { score, positive }
    }
}

/// Area under the ROC curve.
pub fn roc_auc(items: &[ScoredLabel]) -> Result<f64> {
    let n_pos = items.iter().filter(|x| x.positive).count();
    let n_neg = items.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::DegenerateLabels(
            "AUROC needs positives and negatives",
        ));
    }
    let mut order: Vec<usize> = (0..items.len()).collect();
    order.sort_unstable_by(|&a, &b| items[a].score.total_cmp(&items[b].score));

    // sum of 1-based midranks of the positives
    let mut pos_rank_sum = 0.0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && items[order[end]].score == items[order[start]].score {
            end += 1;
        }
        let midrank = (start + 1 + end) as f64 / 2.0;
        let pos_in_group = order[start..end]
            .iter()
            .filter(|&&i| items[i].positive)
            .count();
        pos_rank_sum += midrank * pos_in_group as f64;
        start = end;
    }
    let (p, n) = (n_pos as f64, n_neg as f64);
    let u = pos_rank_sum - p * (p + 1.0) / 2.0;
    Ok(u / (p * n))
}

/// Average precision: mean of precision@r over the ranks r of the
/// positives, scores descending, ties kept in input order.
pub fn average_precision(items: &[ScoredLabel]) -> Result<f64> {
    let n_pos = items.iter().filter(|x| x.positive).count();
    if n_pos == 0 {
        return Err(Error::NoPositives);
    }
    let mut order: Vec<usize> = (0..items.len()).collect();
    order.sort_by(|&a, &b| items[b].score.total_cmp(&items[a].score));
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (rank, &i) in order.iter().enumerate() {
        if items[i].positive {
            hits += 1;
            sum += hits as f64 / (rank + 1) as f64;
        }
    }
    Ok(sum / n_pos as f64)
}

/// One-vs-rest metrics of a single class.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ClassMetrics {
    pub class: usize,
    pub support: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// `None` when the class has no positives or no negatives.
    pub auroc: Option<f64>,
    /// `None` when the class has no positives.
    pub aupr: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MultiClassReport {
    pub n_samples: usize,
    pub accuracy: f64,
    pub micro_precision: f64,
    pub micro_recall: f64,
    pub micro_f1: f64,
    pub micro_auroc: f64,
    pub micro_aupr: f64,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    pub macro_auroc: f64,
    pub macro_aupr: f64,
    /// One entry per class `0..K`.
    pub per_class: Vec<ClassMetrics>,
}

impl MultiClassReport {
    /// Classes with support, most frequent first (ties by class index).
    pub fn per_class_by_support(&self) -> Vec<&ClassMetrics> {
        let mut rows: Vec<&ClassMetrics> =
            self.per_class.iter().filter(|c| c.support > 0).collect();
        rows.sort_by(|a, b| b.support.cmp(&a.support).then(a.class.cmp(&b.class)));
        rows
    }

    pub fn class(&self, c: ClassId) -> Option<&ClassMetrics> {
        self.per_class.get(c.0)
    }
}

fn f1(p: f64, r: f64) -> f64 {
    if p + r > 0.0 {
        2.0 * p * r / (p + r)
    } else {
        0.0
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn mean(xs: impl Iterator<Item = f64>) -> Option<f64> {
    let (mut sum, mut n) = (0.0, 0usize);
    for x in xs {
        sum += x;
        n += 1;
    }
    (n > 0).then(|| sum / n as f64)
}

/// Accuracy plus micro/macro precision, recall, F1, AUROC and AUPR.
///
/// Predictions are row argmaxes (ties to the lowest class). Classes without
/// support are excluded from macro averages.
pub fn multiclass_report(probs: &[Vec<f64>], truths: &[ClassId]) -> Result<MultiClassReport> {
    if probs.is_empty() {
        return Err(Error::EmptyInput);
    }
    if probs.len() != truths.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} rows vs {} truths",
            probs.len(),
            truths.len()
        )));
    }
    let k = probs[0].len();
    if let Some(row) = probs.iter().find(|r| r.len() != k) {
        return Err(Error::ShapeMismatch(format!(
            "row of {} scores, expected {k}",
            row.len()
        )));
    }
    if let Some(t) = truths.iter().find(|t| t.0 >= k) {
        return Err(Error::InvalidClass {
            class: t.0,
            n_classes: k,
        });
    }
    let m = probs.len();

    let mut support = vec![0usize; k];
    let mut predicted = vec![0usize; k];
    let mut true_pos = vec![0usize; k];
    for (row, truth) in probs.iter().zip(truths) {
        let guess = argmax(row);
        support[truth.0] += 1;
        predicted[guess] += 1;
        if guess == truth.0 {
            true_pos[guess] += 1;
        }
    }
    let correct: usize = true_pos.iter().sum();
    let wrong = m - correct;

    let mut per_class = Vec::with_capacity(k);
    let mut column = Vec::with_capacity(m);
    for c in 0..k {
        let precision = ratio(true_pos[c], predicted[c]);
        let recall = ratio(true_pos[c], support[c]);
        column.clear();
        column.extend(
            probs
                .iter()
                .zip(truths)
                .map(|(r, t)| ScoredLabel::new(r[c], t.0 == c)),
        );
        per_class.push(ClassMetrics {
            class: c,
            support: support[c],
            precision,
            recall,
            f1: f1(precision, recall),
            auroc: roc_auc(&column).ok(),
            aupr: average_precision(&column).ok(),
        });
    }

    let supported = || per_class.iter().filter(|c| c.support > 0);
    let macro_auroc = mean(supported().filter_map(|c| c.auroc)).ok_or(Error::DegenerateLabels(
        "no class has both positives and negatives",
    ))?;
    let macro_aupr = mean(supported().filter_map(|c| c.aupr)).unwrap_or(0.0);
    let macro_precision = mean(supported().map(|c| c.precision)).unwrap_or(0.0);
    let macro_recall = mean(supported().map(|c| c.recall)).unwrap_or(0.0);
    let macro_f1 = mean(supported().map(|c| c.f1)).unwrap_or(0.0);

    let pooled: Vec<ScoredLabel> = probs
        .iter()
        .zip(truths)
        .flat_map(|(r, t)| {
            r.iter()
                .enumerate()
                .map(move |(c, &s)| ScoredLabel::new(s, t.0 == c))
        })
        .collect();

    // pooled confusion: TP = correct, FP = FN = wrong
    Ok(MultiClassReport {
        n_samples: m,
        accuracy: correct as f64 / m as f64,
        micro_precision: ratio(correct, correct + wrong),
        micro_recall: ratio(correct, correct + wrong),
        micro_f1: ratio(2 * correct, 2 * correct + 2 * wrong),
        micro_auroc: roc_auc(&pooled)?,
        micro_aupr: average_precision(&pooled)?,
        macro_precision,
        macro_recall,
        macro_f1,
        macro_auroc,
        macro_aupr,
        per_class,
    })
}

/// Balanced class weights `total / (K_eff * count_k)`, zero for empty
/// classes, where `K_eff` counts the non-empty classes.
pub fn class_weights(counts: &[usize]) -> Result<Vec<f64>> {
    let total: usize = counts.iter().sum();
    if total == 0 {
        return Err(Error::AllEmpty);
    }
    let k_eff = counts.iter().filter(|&&c| c > 0).count() as f64;
    Ok(counts
        .iter()
        .map(|&c| {
            if c == 0 {
                0.0
            } else {
                total as f64 / (k_eff * c as f64)
            }
        })
        .collect())
}
