use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::graph::ClassId;
use crate::rng::{rng_for, Stream};

/// Fold index of every sample.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldAssignment {
    k: usize,
    fold_of: Vec<usize>,
}

impl FoldAssignment {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn fold_of(&self, sample: usize) -> usize {
        self.fold_of[sample]
    }

    pub fn len(&self) -> usize {
        self.fold_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fold_of.is_empty()
    }

    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.fold_of.len())
            .filter(|&s| self.fold_of[s] == fold)
            .collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.fold_of.len())
            .filter(|&s| self.fold_of[s] != fold)
            .collect()
    }
}

/// Seeded stratified k-fold: samples are shuffled within their class and
/// dealt round-robin, the dealing position carrying over from class to class.
pub fn stratified_kfold(labels: &[ClassId], k: usize, seed: u64) -> Result<FoldAssignment> {
    if k < 2 {
        return Err(Error::InvalidConfig(String::from("k-fold needs k >= 2")));
    }
    if labels.len() < k {
        return Err(Error::TooFewPairs {
            pairs: labels.len(),
            folds: k,
        });
    }
    let mut by_class: BTreeMap<ClassId, Vec<usize>> = BTreeMap::new();
    for (s, &c) in labels.iter().enumerate() {
        by_class.entry(c).or_default().push(s);
    }
    let mut rng = rng_for(seed, Stream::Folds, 0);
    let mut fold_of = vec![0; labels.len()];
    let mut cursor = 0;
    for members in by_class.values_mut() {
        members.shuffle(&mut rng);
        for &s in members.iter() {
            fold_of[s] = cursor % k;
            cursor += 1;
        }
    }
    Ok(FoldAssignment { k, fold_of })
}
