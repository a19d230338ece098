//! Typed, symmetric interaction graph.
//!
//! Edges are stored once under the canonical ordering `i < j`; every query is
//! order-insensitive.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};

/// Dense 0-based drug index inside one graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DrugIdx(pub usize);

/// Interaction class index in `0..K`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ClassId(pub usize);

impl DrugIdx {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl ClassId {
    /// The reserved "no interaction" class of retrospective mode.
    pub const NONE: ClassId = ClassId(0);

    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for DrugIdx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for ClassId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// How class 0 is interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum EvalMode {
    /// Class 0 means "no interaction" and is never stored as an edge.
    Retrospective,
    /// Every class `0..K` is a real interaction.
    Holdout,
}

impl EvalMode {
    pub fn as_str(self) -> &'static str {
        match self {
            EvalMode::Retrospective => "retrospective",
            EvalMode::Holdout => "holdout",
        }
    }
}

impl core::str::FromStr for EvalMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "retrospective" => Ok(EvalMode::Retrospective),
            "holdout" => Ok(EvalMode::Holdout),
            other => Err(Error::InvalidConfig(format!("unknown mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Drug {
    pub external_id: String,
    pub name: Option<String>,
}

/// Translation table between external drug ids and dense indices.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Roster {
    drugs: Vec<Drug>,
    by_id: BTreeMap<String, usize>,
}

impl Roster {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a roster from ids in the given order; duplicates are an error.
    pub fn from_ids<I, S>(ids: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut roster = Roster::new();
        for id in ids {
            roster.push(id.into(), None)?;
        }
        Ok(roster)
    }

    /// `n` drugs named `D0..D{n-1}`.
    pub fn numbered(n: usize) -> Self {
        let mut roster = Roster::new();
        for i in 0..n {
            roster
                .push(format!("D{i}"), None)
                .expect("numbered ids are unique");
        }
        roster
    }

    pub fn push(&mut self, external_id: String, name: Option<String>) -> Result<DrugIdx> {
        if self.by_id.contains_key(&external_id) {
            return Err(Error::DuplicateDrug(external_id));
        }
        let idx = self.drugs.len();
        self.by_id.insert(external_id.clone(), idx);
        self.drugs.push(Drug { external_id, name });
        Ok(DrugIdx(idx))
    }

    /// Returns the index of `external_id`, adding it if absent.
    pub fn intern(&mut self, external_id: &str) -> DrugIdx {
        match self.by_id.get(external_id) {
            Some(&i) => DrugIdx(i),
            None => self
                .push(String::from(external_id), None)
                .expect("absent id cannot collide"),
        }
    }

    pub fn get(&self, external_id: &str) -> Option<DrugIdx> {
        self.by_id.get(external_id).map(|&i| DrugIdx(i))
    }

    pub fn resolve(&self, external_id: &str) -> Result<DrugIdx> {
        self.get(external_id)
            .ok_or_else(|| Error::UnknownDrug(String::from(external_id)))
    }

    pub fn drug(&self, idx: DrugIdx) -> Option<&Drug> {
        self.drugs.get(idx.0)
    }

    pub fn external_id(&self, idx: DrugIdx) -> &str {
        &self.drugs[idx.0].external_id
    }

    pub fn len(&self) -> usize {
        self.drugs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.drugs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (DrugIdx, &Drug)> {
        self.drugs.iter().enumerate().map(|(i, d)| (DrugIdx(i), d))
    }
}

#[inline]
fn canonical(a: DrugIdx, b: DrugIdx) -> (usize, usize) {
    if a.0 < b.0 {
        (a.0, b.0)
    } else {
        (b.0, a.0)
    }
}

/// Symmetric sparse map from unordered drug pairs to interaction classes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypedInteractionGraph {
    roster: Roster,
    n_classes: usize,
    mode: EvalMode,
    edges: BTreeMap<(usize, usize), ClassId>,
    adjacency: Vec<BTreeMap<usize, ClassId>>,
}

impl TypedInteractionGraph {
    pub fn new(roster: Roster, n_classes: usize, mode: EvalMode) -> Self {
        let adjacency = vec![BTreeMap::new(); roster.len()];
        Self {
            roster,
            n_classes,
            mode,
            edges: BTreeMap::new(),
            adjacency,
        }
    }

    /// Graph over `n` anonymous drugs `D0..`.
    pub fn with_drugs(n: usize, n_classes: usize, mode: EvalMode) -> Self {
        Self::new(Roster::numbered(n), n_classes, mode)
    }

    pub fn roster(&self) -> &Roster {
        &self.roster
    }

    pub fn n_drugs(&self) -> usize {
        self.roster.len()
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn mode(&self) -> EvalMode {
        self.mode
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    fn check_drug(&self, d: DrugIdx) -> Result<()> {
        if d.0 < self.n_drugs() {
            Ok(())
        } else {
            Err(Error::UnknownDrug(format!("#{}", d.0)))
        }
    }

    /// Checks that `c` may be stored as an edge class.
    pub fn check_edge_class(&self, c: ClassId) -> Result<()> {
        let reserved = self.mode == EvalMode::Retrospective && c == ClassId::NONE;
        if c.0 >= self.n_classes || reserved {
            return Err(Error::InvalidClass {
                class: c.0,
                n_classes: self.n_classes,
            });
        }
        Ok(())
    }

    /// Inserts an undirected typed edge. Returns `true` if the pair was new;
    /// re-inserting the identical class is a no-op.
    pub fn add_interaction(&mut self, a: DrugIdx, b: DrugIdx, c: ClassId) -> Result<bool> {
        self.check_drug(a)?;
        self.check_drug(b)?;
        if a == b {
            return Err(Error::SelfLoop(a.0));
        }
        self.check_edge_class(c)?;
        let key = canonical(a, b);
        if let Some(&existing) = self.edges.get(&key) {
            if existing == c {
                return Ok(false);
            }
            return Err(Error::ConflictingLabel {
                a: key.0,
                b: key.1,
                existing: existing.0,
                requested: c.0,
            });
        }
        self.edges.insert(key, c);
        self.adjacency[a.0].insert(b.0, c);
        self.adjacency[b.0].insert(a.0, c);
        Ok(true)
    }

    /// Same as [`add_interaction`](Self::add_interaction) but addressed by external ids.
    pub fn add_interaction_by_id(&mut self, a: &str, b: &str, c: ClassId) -> Result<bool> {
        let a = self.roster.resolve(a)?;
        let b = self.roster.resolve(b)?;
        self.add_interaction(a, b, c)
    }

    pub fn lookup(&self, a: DrugIdx, b: DrugIdx) -> Result<Option<ClassId>> {
        self.check_drug(a)?;
        self.check_drug(b)?;
        Ok(self.edges.get(&canonical(a, b)).copied())
    }

    /// Unchecked lookup for hot loops; out-of-range indices read as absent.
    #[inline]
    pub fn get(&self, a: DrugIdx, b: DrugIdx) -> Option<ClassId> {
        self.edges.get(&canonical(a, b)).copied()
    }

    /// Incident edges of `a`, ascending by partner index.
    pub fn neighbors(&self, a: DrugIdx) -> Result<Vec<(DrugIdx, ClassId)>> {
        self.check_drug(a)?;
        Ok(self.adjacency[a.0]
            .iter()
            .map(|(&k, &c)| (DrugIdx(k), c))
            .collect())
    }

    pub fn degree(&self, a: DrugIdx) -> usize {
        self.adjacency.get(a.0).map_or(0, |m| m.len())
    }

    /// Per-class counts of the edges incident to `a` or `b`, excluding the
    /// `(a, b)` edge itself.
    pub fn pair_class_histogram(&self, a: DrugIdx, b: DrugIdx) -> Result<Vec<usize>> {
        self.check_drug(a)?;
        self.check_drug(b)?;
        if a == b {
            return Err(Error::SelfLoop(a.0));
        }
        let mut counts = vec![0usize; self.n_classes];
        for (end, other) in [(a, b), (b, a)] {
            for (&k, &c) in &self.adjacency[end.0] {
                if k != other.0 {
                    counts[c.0] += 1;
                }
            }
        }
        Ok(counts)
    }

    /// All stored edges as `(i, j, class)` with `i < j`, in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (DrugIdx, DrugIdx, ClassId)> + '_ {
        self.edges
            .iter()
            .map(|(&(i, j), &c)| (DrugIdx(i), DrugIdx(j), c))
    }

    /// Per-class edge counts.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.n_classes];
        for c in self.edges.values() {
            counts[c.0] += 1;
        }
        counts
    }

    /// Copy of the graph with the given pairs removed (absent pairs are ignored).
    pub fn without_pairs<I>(&self, pairs: I) -> Self
    where
        I: IntoIterator<Item = (DrugIdx, DrugIdx)>,
    {
        let mut g = self.clone();
        for (a, b) in pairs {
            let key = canonical(a, b);
            if g.edges.remove(&key).is_some() {
                g.adjacency[key.0].remove(&key.1);
                g.adjacency[key.1].remove(&key.0);
            }
        }
        g
    }

    /// Empty graph sharing this graph's roster, class count, and mode.
    pub fn empty_like(&self) -> Self {
        Self::new(self.roster.clone(), self.n_classes, self.mode)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(i: usize) -> DrugIdx {
        DrugIdx(i)
    }

    #[test]
    fn symmetric_insert_and_lookup() {
        let mut g = TypedInteractionGraph::with_drugs(6, 8, EvalMode::Holdout);
        assert!(g.add_interaction(d(1), d(5), ClassId(4)).unwrap());
        assert_eq!(g.lookup(d(5), d(1)).unwrap(), Some(ClassId(4)));
        assert_eq!(g.lookup(d(1), d(5)).unwrap(), Some(ClassId(4)));
        assert_eq!(g.lookup(d(2), d(3)).unwrap(), None);
    }

    #[test]
    fn duplicate_same_class_is_idempotent() {
        let mut g = TypedInteractionGraph::with_drugs(6, 8, EvalMode::Holdout);
        g.add_interaction(d(1), d(5), ClassId(4)).unwrap();
        assert!(!g.add_interaction(d(1), d(5), ClassId(4)).unwrap());
        assert_eq!(g.n_edges(), 1);
    }

    #[test]
    fn conflicting_label_in_reverse_order() {
        let mut g = TypedInteractionGraph::with_drugs(6, 8, EvalMode::Holdout);
        g.add_interaction(d(1), d(5), ClassId(4)).unwrap();
        let err = g.add_interaction(d(5), d(1), ClassId(2)).unwrap_err();
        assert!(matches!(
            err,
            Error::ConflictingLabel {
                existing: 4,
                requested: 2,
                ..
            }
        ));
    }

    #[test]
    fn rejects_bad_inputs() {
        let mut g = TypedInteractionGraph::with_drugs(3, 4, EvalMode::Retrospective);
        assert_eq!(
            g.add_interaction(d(1), d(1), ClassId(1)),
            Err(Error::SelfLoop(1))
        );
        assert!(matches!(
            g.add_interaction(d(0), d(7), ClassId(1)),
            Err(Error::UnknownDrug(_))
        ));
        // class 0 is reserved in retrospective mode
        assert!(matches!(
            g.add_interaction(d(0), d(1), ClassId(0)),
            Err(Error::InvalidClass { .. })
        ));
        assert!(matches!(
            g.add_interaction(d(0), d(1), ClassId(4)),
            Err(Error::InvalidClass { .. })
        ));
        assert!(matches!(g.lookup(d(0), d(9)), Err(Error::UnknownDrug(_))));
    }

    #[test]
    fn neighbors_star_isolated_and_clique() {
        let mut g = TypedInteractionGraph::with_drugs(8, 8, EvalMode::Holdout);
        g.add_interaction(d(0), d(2), ClassId(2)).unwrap();
        g.add_interaction(d(1), d(0), ClassId(1)).unwrap();
        assert_eq!(
            g.neighbors(d(0)).unwrap(),
            vec![(d(1), ClassId(1)), (d(2), ClassId(2))]
        );
        assert!(g.neighbors(d(3)).unwrap().is_empty());

        for i in 4..8 {
            for j in (i + 1)..8 {
                g.add_interaction(d(i), d(j), ClassId(7)).unwrap();
            }
        }
        for i in 4..8 {
            let nb = g.neighbors(d(i)).unwrap();
            assert_eq!(nb.len(), 3);
            assert!(nb.iter().all(|&(_, c)| c == ClassId(7)));
        }
    }

    #[test]
    fn histogram_counts_incident_edges() {
        let g = TypedInteractionGraph::with_drugs(5, 3, EvalMode::Holdout);
        assert_eq!(g.pair_class_histogram(d(0), d(1)).unwrap(), vec![0, 0, 0]);

        let mut g = TypedInteractionGraph::with_drugs(5, 3, EvalMode::Holdout);
        g.add_interaction(d(0), d(2), ClassId(1)).unwrap();
        g.add_interaction(d(0), d(3), ClassId(1)).unwrap();
        g.add_interaction(d(1), d(4), ClassId(2)).unwrap();
        assert_eq!(g.pair_class_histogram(d(0), d(1)).unwrap(), vec![0, 2, 1]);

        // the queried pair's own edge is excluded
        g.add_interaction(d(0), d(1), ClassId(0)).unwrap();
        assert_eq!(g.pair_class_histogram(d(1), d(0)).unwrap(), vec![0, 2, 1]);
        assert_eq!(g.pair_class_histogram(d(0), d(0)), Err(Error::SelfLoop(0)));
    }

    #[test]
    fn without_pairs_drops_both_directions() {
        let mut g = TypedInteractionGraph::with_drugs(4, 3, EvalMode::Holdout);
        g.add_interaction(d(0), d(1), ClassId(1)).unwrap();
        g.add_interaction(d(2), d(3), ClassId(2)).unwrap();
        let h = g.without_pairs([(d(1), d(0))]);
        assert_eq!(h.n_edges(), 1);
        assert!(h.neighbors(d(0)).unwrap().is_empty());
        assert_eq!(h.get(d(3), d(2)), Some(ClassId(2)));
    }

    #[test]
    fn roster_rejects_duplicates() {
        assert!(matches!(
            Roster::from_ids(["DB1", "DB2", "DB1"]),
            Err(Error::DuplicateDrug(_))
        ));
        let r = Roster::from_ids(["DB1", "DB2"]).unwrap();
        assert_eq!(r.resolve("DB2").unwrap(), d(1));
        assert!(r.resolve("DB3").is_err());
    }
}
