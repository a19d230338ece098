//! Typed stochastic block model with a two-snapshot split.
//!
//! Drug `i` belongs to block `i % n_blocks`. Every unordered block pair
//! `(g, h)` owns one interaction class, so the block map is an exact oracle
//! for every edge that was not hit by label noise.

use alloc::format;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng as _;

use crate::error::{Error, Result};
use crate::graph::{ClassId, DrugIdx, EvalMode, TypedInteractionGraph};
use crate::rng::{rng_for, Stream};

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticConfig {
    pub n_drugs: usize,
    pub n_blocks: usize,
    pub n_classes: usize,
    pub mode: EvalMode,
    /// Edge probability for every block pair without an override.
    pub edge_probability: f64,
    /// `(g, h, p)` per-block-pair probabilities.
    pub overrides: Vec<(usize, usize, f64)>,
    /// Fraction of edges relabeled with a random wrong class.
    pub label_noise: f64,
    /// Fraction of edges present only in the later snapshot.
    pub holdout_fraction: f64,
    pub seed: u64,
}

impl SyntheticConfig {
    /// Holdout-mode config with exactly one class per block pair.
    pub fn holdout(
        n_drugs: usize,
        n_blocks: usize,
        p: f64,
        noise: f64,
        holdout: f64,
        seed: u64,
    ) -> Self {
        Self {
            n_drugs,
            n_blocks,
            n_classes: block_pairs(n_blocks),
            mode: EvalMode::Holdout,
            edge_probability: p,
            overrides: Vec::new(),
            label_noise: noise,
            holdout_fraction: holdout,
            seed,
        }
    }

    fn class_offset(&self) -> usize {
        match self.mode {
            EvalMode::Retrospective => 1,
            EvalMode::Holdout => 0,
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: alloc::string::String| Err(Error::InvalidConfig(m));
        if self.n_drugs < 2 {
            return bad(format!("n_drugs = {} (need >= 2)", self.n_drugs));
        }
        if self.n_blocks == 0 || self.n_blocks > self.n_drugs {
            return bad(format!(
                "n_blocks = {} not in 1..={}",
                self.n_blocks, self.n_drugs
            ));
        }
        let needed = block_pairs(self.n_blocks) + self.class_offset();
        if self.n_classes < needed {
            return bad(format!(
                "{} block pairs need K >= {needed}, got {}",
                block_pairs(self.n_blocks),
                self.n_classes
            ));
        }
        let probs =
            core::iter::once(self.edge_probability).chain(self.overrides.iter().map(|o| o.2));
        for p in probs {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("edge probability {p} not in [0, 1]"));
            }
        }
        if let Some(o) = self
            .overrides
            .iter()
            .find(|o| o.0 >= self.n_blocks || o.1 >= self.n_blocks)
        {
            return bad(format!(
                "override for block pair ({}, {}) out of range",
                o.0, o.1
            ));
        }
        if !(0.0..1.0).contains(&self.label_noise) {
            return bad(format!("label_noise {} not in [0, 1)", self.label_noise));
        }
        if self.label_noise > 0.0 && self.n_classes - self.class_offset() < 2 {
            return bad("label noise needs at least two edge classes".into());
        }
        if !(0.0..1.0).contains(&self.holdout_fraction) {
            return bad(format!(
                "holdout_fraction {} not in [0, 1)",
                self.holdout_fraction
            ));
        }
        Ok(())
    }
}

/// Number of unordered block pairs, including `(g, g)`.
pub fn block_pairs(n_blocks: usize) -> usize {
    n_blocks * (n_blocks + 1) / 2
}

/// Position of the unordered block pair `(g, h)` in row-major upper-triangle order.
pub fn block_pair_index(n_blocks: usize, g: usize, h: usize) -> usize {
    let (g, h) = if g <= h { (g, h) } else { (h, g) };
    g * n_blocks - g * (g + 1) / 2 + h
}

#[derive(Debug, Clone)]
pub struct SyntheticGraph {
    /// Earlier snapshot: every edge except the held-out ones.
    pub t0: TypedInteractionGraph,
    /// Later snapshot: every edge.
    pub t1: TypedInteractionGraph,
    /// Block of each drug.
    pub blocks: Vec<usize>,
    /// Edges of `t1` missing from `t0`, ascending.
    pub held_out: Vec<(DrugIdx, DrugIdx, ClassId)>,
    n_blocks: usize,
    class_offset: usize,
}

impl SyntheticGraph {
    /// The noise-free class of a pair, from the block map alone.
    pub fn planted_class(&self, a: DrugIdx, b: DrugIdx) -> ClassId {
        let idx = block_pair_index(self.n_blocks, self.blocks[a.0], self.blocks[b.0]);
        ClassId(idx + self.class_offset)
    }

    pub fn n_blocks(&self) -> usize {
        self.n_blocks
    }
}

pub fn generate_synthetic(cfg: &SyntheticConfig) -> Result<SyntheticGraph> {
    cfg.validate()?;
    let b = cfg.n_blocks;
    let offset = cfg.class_offset();
    let n_edge_classes = cfg.n_classes - offset;
    let blocks: Vec<usize> = (0..cfg.n_drugs).map(|i| i % b).collect();

    let mut prob = alloc::vec![cfg.edge_probability; block_pairs(b)];
    for &(g, h, p) in &cfg.overrides {
        prob[block_pair_index(b, g, h)] = p;
    }

    let mut rng = rng_for(cfg.seed, Stream::Synth, 0);
    let mut edges = Vec::new();
    for i in 0..cfg.n_drugs {
        for j in (i + 1)..cfg.n_drugs {
            let pair = block_pair_index(b, blocks[i], blocks[j]);
            // one draw per candidate pair keeps the stream aligned across configs
            let draw: f64 = rng.random();
            if draw < prob[pair] {
                edges.push((DrugIdx(i), DrugIdx(j), ClassId(pair + offset)));
            }
        }
    }

    let mut noise_rng = rng_for(cfg.seed, Stream::Synth, 1);
    for edge in edges.iter_mut() {
        if noise_rng.random::<f64>() < cfg.label_noise {
            let clean = edge.2 .0 - offset;
            let mut wrong = noise_rng.random_range(0..n_edge_classes - 1);
            if wrong >= clean {
                wrong += 1;
            }
            edge.2 = ClassId(wrong + offset);
        }
    }

    let mut order: Vec<usize> = (0..edges.len()).collect();
    order.shuffle(&mut rng_for(cfg.seed, Stream::Synth, 2));
    let n_held = libm::round(cfg.holdout_fraction * edges.len() as f64) as usize;
    let mut is_held = alloc::vec![false; edges.len()];
    for &e in &order[..n_held] {
        is_held[e] = true;
    }

    let mut t0 = TypedInteractionGraph::with_drugs(cfg.n_drugs, cfg.n_classes, cfg.mode);
    let mut t1 = t0.clone();
    let mut held_out = Vec::with_capacity(n_held);
    for (e, &(i, j, c)) in edges.iter().enumerate() {
        t1.add_interaction(i, j, c)?;
        if is_held[e] {
            held_out.push((i, j, c));
        } else {
            t0.add_interaction(i, j, c)?;
        }
    }
    Ok(SyntheticGraph {
        t0,
        t1,
        blocks,
        held_out,
        n_blocks: b,
        class_offset: offset,
    })
}
