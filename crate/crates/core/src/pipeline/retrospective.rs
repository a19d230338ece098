//! Two-snapshot evaluation: train on the earlier graph, score every pair it
//! leaves unlabeled, and check the scores against the later graph.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng as _;

use super::{predict_pairs, train, Sample, TrainConfig};
use crate::error::{Error, Result};
use crate::graph::{ClassId, DrugIdx, EvalMode, Roster, TypedInteractionGraph};
use crate::metrics::{multiclass_report, MultiClassReport};
use crate::rng::{rng_for, Stream};

/// Test universes larger than this are reservoir-sampled down to it.
pub const DEFAULT_TEST_CAP: usize = 5_000_000;

#[derive(Debug, Clone)]
pub struct RetrospectiveSplit {
    /// Earlier snapshot restricted to the drugs both snapshots share.
    pub graph: TypedInteractionGraph,
    /// Earlier-snapshot edges plus sampled class-0 pairs.
    pub train: Vec<Sample>,
    /// Pairs unlabeled in the earlier snapshot, labeled by the later one
    /// (class 0 if still unlabeled).
    pub test: Vec<Sample>,
}

fn restrict(
    source: &TypedInteractionGraph,
    roster: &Roster,
    n_classes: usize,
) -> Result<TypedInteractionGraph> {
    let mut g = TypedInteractionGraph::new(roster.clone(), n_classes, EvalMode::Retrospective);
    for (i, j, c) in source.edges() {
        let a = roster.get(source.roster().external_id(i));
        let b = roster.get(source.roster().external_id(j));
        if let (Some(a), Some(b)) = (a, b) {
            g.add_interaction(a, b, c)?;
        }
    }
    Ok(g)
}

#[inline]
fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Builds the train/test split over the drugs common to both snapshots.
///
/// `negative_ratio × |edges|` unlabeled pairs are sampled as class-0 training
/// examples; everything else that is unlabeled becomes the test set, capped at
/// `test_cap` pairs by seeded reservoir sampling.
pub fn retrospective_split(
    t0: &TypedInteractionGraph,
    t1: &TypedInteractionGraph,
    negative_ratio: f64,
    seed: u64,
    test_cap: usize,
) -> Result<RetrospectiveSplit> {
    if t0.mode() != EvalMode::Retrospective || t1.mode() != EvalMode::Retrospective {
        return Err(Error::InvalidConfig(String::from(
            "retrospective split needs retrospective-mode graphs",
        )));
    }
    let mut roster = Roster::new();
    for (_, drug) in t0.roster().iter() {
        if t1.roster().get(&drug.external_id).is_some() {
            roster.push(drug.external_id.clone(), drug.name.clone())?;
        }
    }
    if roster.is_empty() {
        return Err(Error::EmptyIntersection);
    }
    let k = t0.n_classes().max(t1.n_classes());
    let g0 = restrict(t0, &roster, k)?;
    let g1 = restrict(t1, &roster, k)?;
    let n = roster.len();

    let train_set = retrospective_training_set(&g0, negative_ratio, seed)?;
    let negatives: BTreeSet<(DrugIdx, DrugIdx)> = train_set
        .iter()
        .filter(|s| s.label == ClassId::NONE)
        .map(Sample::pair)
        .collect();
    let unlabeled = pair_count(n) - g0.n_edges();

    let universe = unlabeled - negatives.len();
    let mut test = Vec::with_capacity(universe.min(test_cap));
    let mut reservoir_rng = rng_for(seed, Stream::Reservoir, 0);
    let mut seen = 0usize;
    for a in 0..n {
        for b in (a + 1)..n {
            let (i, j) = (DrugIdx(a), DrugIdx(b));
            if g0.get(i, j).is_some() || negatives.contains(&(i, j)) {
                continue;
            }
            let s = Sample {
                i,
                j,
                label: g1.get(i, j).unwrap_or(ClassId::NONE),
            };
            if seen < test_cap {
                test.push(s);
            } else {
                let slot = reservoir_rng.random_range(0..=seen);
                if slot < test_cap {
                    test[slot] = s;
                }
            }
            seen += 1;
        }
    }
    test.sort();

    Ok(RetrospectiveSplit {
        graph: g0,
        train: train_set,
        test,
    })
}

/// Every edge of `graph` plus `round(negative_ratio × |edges|)` distinct
/// unlabeled pairs as class 0, sorted.
pub fn retrospective_training_set(
    graph: &TypedInteractionGraph,
    negative_ratio: f64,
    seed: u64,
) -> Result<Vec<Sample>> {
    if graph.mode() != EvalMode::Retrospective {
        return Err(Error::InvalidConfig(String::from(
            "negative sampling needs a retrospective-mode graph",
        )));
    }
    if !(negative_ratio >= 0.0 && negative_ratio.is_finite()) {
        return Err(Error::InvalidConfig(String::from(
            "negative ratio must be a non-negative number",
        )));
    }
    let unlabeled = pair_count(graph.n_drugs()) - graph.n_edges();
    let wanted = (libm::round(negative_ratio * graph.n_edges() as f64) as usize).min(unlabeled);
    let mut out: Vec<Sample> = graph
        .edges()
        .map(|(i, j, c)| Sample { i, j, label: c })
        .collect();
    out.extend(
        sample_negatives(graph, wanted, unlabeled, seed)
            .into_iter()
            .map(|(i, j)| Sample {
                i,
                j,
                label: ClassId::NONE,
            }),
    );
    out.sort();
    Ok(out)
}

fn sample_negatives(
    g: &TypedInteractionGraph,
    wanted: usize,
    unlabeled: usize,
    seed: u64,
) -> BTreeSet<(DrugIdx, DrugIdx)> {
    let mut rng = rng_for(seed, Stream::Negatives, 0);
    let n = g.n_drugs();
    let mut picked = BTreeSet::new();
    if wanted == 0 {
        return picked;
    }
    if wanted * 2 <= unlabeled {
        while picked.len() < wanted {
            let a = rng.random_range(0..n);
            let b = rng.random_range(0..n);
            if a == b {
                continue;
            }
            let (i, j) = (DrugIdx(a.min(b)), DrugIdx(a.max(b)));
            if g.get(i, j).is_none() {
                picked.insert((i, j));
            }
        }
    } else {
        let mut all: Vec<(DrugIdx, DrugIdx)> = (0..n)
            .flat_map(|a| ((a + 1)..n).map(move |b| (DrugIdx(a), DrugIdx(b))))
            .filter(|&(i, j)| g.get(i, j).is_none())
            .collect();
        all.shuffle(&mut rng);
        picked.extend(all.into_iter().take(wanted));
    }
    picked
}

/// Trains on the split and scores its test pairs, optionally only those with
/// both endpoints in `subset` (indices into `split.graph`'s roster).
pub fn retrospective_evaluate(
    split: &RetrospectiveSplit,
    cfg: &TrainConfig,
    subset: Option<&BTreeSet<DrugIdx>>,
) -> Result<MultiClassReport> {
    let test: Vec<Sample> = match subset {
        None => split.test.clone(),
        Some(keep) => split
            .test
            .iter()
            .filter(|s| keep.contains(&s.i) && keep.contains(&s.j))
            .copied()
            .collect(),
    };
    if test.is_empty() {
        return Err(Error::EmptySubset);
    }
    debug_assert!(disjoint(&split.train, &test));
    let model = train(&split.graph, &split.train, cfg)?;
    let probs = predict_pairs(&model.params, &test)?;
    let truths: Vec<ClassId> = test.iter().map(|s| s.label).collect();
    multiclass_report(&probs, &truths)
}

fn disjoint(train: &[Sample], test: &[Sample]) -> bool {
    let seen: BTreeMap<(DrugIdx, DrugIdx), ()> = train.iter().map(|s| (s.pair(), ())).collect();
    test.iter().all(|s| !seen.contains_key(&s.pair()))
}
