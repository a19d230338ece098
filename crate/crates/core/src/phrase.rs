//! Rule-based reduction of interaction sentences to keyword phrases, and the
//! phrase/class vocabulary.
//!
//! Normalization is driven by two plain-text tables (a stop list and a
//! direction-verb table). The default tables ship in `data/` and are compiled
//! in; [`Normalizer::from_tables`] accepts replacements in the same format.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use crate::error::{Error, Result};
use crate::graph::{ClassId, EvalMode};

pub const DEFAULT_STOPLIST: &str = include_str!("../data/stoplist.txt");
pub const DEFAULT_VERBS: &str = include_str!("../data/verbs.txt");

const PLACEHOLDER: &str = "\u{1}";

/// One interaction sentence with the surface forms of its two drugs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InteractionSentence {
    pub text: String,
    pub drug_a_surface: String,
    pub drug_b_surface: String,
}

impl InteractionSentence {
    pub fn new(text: impl Into<String>, a: impl Into<String>, b: impl Into<String>) -> Self {
        Self {
            text: text.into(),
            drug_a_surface: a.into(),
            drug_b_surface: b.into(),
        }
    }

    /// Sentence written with the generic "Drug a" / "Drug b" placeholders.
    pub fn generic(text: impl Into<String>) -> Self {
        Self::new(text, "", "")
    }
}

/// Canonical token sequence for one interaction type.
///
/// Equality and ordering ignore token order, so "metabolism decreased" and
/// "decreased metabolism" are the same phrase; `Display` keeps the stored
/// order.
#[derive(Debug, Clone)]
pub struct KeywordPhrase {
    tokens: Vec<String>,
    sorted: Vec<String>,
}

impl KeywordPhrase {
    pub fn new<I, S>(tokens: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let tokens: Vec<String> = tokens
            .into_iter()
            .map(|t| t.as_ref().to_lowercase())
            .filter(|t| !t.is_empty())
            .collect();
        if tokens.is_empty() {
            return Err(Error::EmptyInput);
        }
        let mut sorted = tokens.clone();
        sorted.sort();
        Ok(Self { tokens, sorted })
    }

    /// Splits on whitespace.
    pub fn parse(s: &str) -> Result<Self> {
        Self::new(s.split_whitespace())
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }
}

impl PartialEq for KeywordPhrase {
    fn eq(&self, other: &Self) -> bool {
        self.sorted == other.sorted
    }
}

impl Eq for KeywordPhrase {}

impl PartialOrd for KeywordPhrase {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for KeywordPhrase {
    fn cmp(&self, other: &Self) -> Ordering {
        self.sorted.cmp(&other.sorted)
    }
}

impl fmt::Display for KeywordPhrase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.tokens.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            f.write_str(t)?;
        }
        Ok(())
    }
}

/// Non-empty, non-comment lines of a table file, with 1-based line numbers.
pub fn table_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let line = match line.find('#') {
            Some(p) => &line[..p],
            None => line,
        }
        .trim();
        (!line.is_empty()).then_some((i + 1, line))
    })
}

/// Stop list plus direction-verb table.
#[derive(Debug, Clone)]
pub struct Normalizer {
    stop_words: BTreeSet<String>,
    // longest first
    stop_sequences: Vec<Vec<String>>,
    verbs: BTreeMap<String, String>,
    canonical_verbs: BTreeSet<String>,
}

impl Default for Normalizer {
    fn default() -> Self {
        Self::from_tables(DEFAULT_STOPLIST, DEFAULT_VERBS).expect("bundled tables are well formed")
    }
}

impl Normalizer {
    pub fn from_tables(stoplist: &str, verbs: &str) -> Result<Self> {
        let mut stop_words = BTreeSet::new();
        let mut stop_sequences = Vec::new();
        for (_, line) in table_lines(stoplist) {
            let seq: Vec<String> = line.split_whitespace().map(str::to_lowercase).collect();
            if seq.len() == 1 {
                stop_words.extend(seq);
            } else {
                stop_sequences.push(seq);
            }
        }
        stop_sequences.sort_by(|a: &Vec<String>, b| b.len().cmp(&a.len()).then(a.cmp(b)));

        let mut verb_map = BTreeMap::new();
        for (no, line) in table_lines(verbs) {
            let mut parts = line.split_whitespace();
            match (parts.next(), parts.next(), parts.next()) {
                (Some(from), Some(to), None) => {
                    verb_map.insert(from.to_lowercase(), to.to_lowercase());
                }
                _ => {
                    return Err(Error::InvalidConfig(format!(
                        "verb table line {no}: expected \"<surface> <canonical>\""
                    )))
                }
            }
        }
        let canonical_verbs = verb_map.values().cloned().collect();
        Ok(Self {
            stop_words,
            stop_sequences,
            verbs: verb_map,
            canonical_verbs,
        })
    }

    fn tokenize(&self, sentence: &InteractionSentence) -> Vec<String> {
        let mut text = sentence.text.clone();
        let mut surfaces: Vec<&str> = [&sentence.drug_a_surface, &sentence.drug_b_surface]
            .into_iter()
            .map(|s| s.trim())
            .filter(|s| !s.is_empty())
            .collect();
        surfaces.sort_by_key(|s| core::cmp::Reverse(s.len()));
        for s in surfaces {
            text = text.replace(s, &format!(" {PLACEHOLDER} "));
        }

        let raw: Vec<String> = text
            .split_whitespace()
            .map(|t| {
                t.trim_matches(|c: char| matches!(c, '.' | ',' | ';' | ':' | '!' | '?' | '"'))
                    .to_lowercase()
            })
            .filter(|t| !t.is_empty())
            .collect();

        // drop surface-form placeholders and the generic "Drug a" / "Drug b"
        let mut out = Vec::with_capacity(raw.len());
        let mut i = 0;
        while i < raw.len() {
            if raw[i] == PLACEHOLDER {
                i += 1;
            } else if raw[i] == "drug"
                && matches!(raw.get(i + 1).map(String::as_str), Some("a" | "b"))
            {
                i += 2;
            } else {
                out.push(raw[i].clone());
                i += 1;
            }
        }
        out
    }

    fn strip_stop_words(&self, tokens: Vec<String>) -> Vec<String> {
        let mut kept = Vec::with_capacity(tokens.len());
        let mut i = 0;
        'outer: while i < tokens.len() {
            for seq in &self.stop_sequences {
                if tokens[i..].starts_with(seq) {
                    i += seq.len();
                    continue 'outer;
                }
            }
            kept.push(tokens[i].clone());
            i += 1;
        }
        kept.retain(|t| !self.stop_words.contains(t));
        kept
    }

    /// Reduces a sentence to its keyword phrase: drug mentions and stop words
    /// are removed, the direction verb is normalized and moved to the front,
    /// and the remaining content words keep their order.
    pub fn extract_phrase(&self, sentence: &InteractionSentence) -> Result<KeywordPhrase> {
        let tokens = self.tokenize(sentence);
        let mut tokens: Vec<String> = self
            .strip_stop_words(tokens)
            .into_iter()
            .map(|t| self.verbs.get(&t).cloned().unwrap_or(t))
            .collect();
        if tokens.is_empty() {
            return Err(Error::EmptyAfterNormalization);
        }
        if let Some(pos) = tokens.iter().position(|t| self.canonical_verbs.contains(t)) {
            let verb = tokens.remove(pos);
            tokens.insert(0, verb);
        }
        KeywordPhrase::new(tokens)
    }
}

/// Shorthand for [`Normalizer::extract_phrase`] with the bundled tables.
pub fn extract_phrase(sentence: &InteractionSentence) -> Result<KeywordPhrase> {
    Normalizer::default().extract_phrase(sentence)
}

/// How rare phrases are cut from the vocabulary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Grouping {
    /// Keep the `n` most frequent phrases.
    TopN(usize),
    /// Keep phrases seen at least this many times.
    MinCount(usize),
}

/// Bidirectional phrase/class mapping.
///
/// Retrospective layout: `0` = no interaction, `1..=N` common phrases,
/// `N + 1` = other. Holdout layout: `0..K` common phrases, rare ones dropped.
#[derive(Debug, Clone)]
pub struct ClassVocabulary {
    mode: EvalMode,
    phrase_to_class: BTreeMap<KeywordPhrase, ClassId>,
    class_to_phrase: BTreeMap<ClassId, KeywordPhrase>,
    counts: Vec<usize>,
    other_class: Option<ClassId>,
}

impl ClassVocabulary {
    pub fn build(phrases: &[KeywordPhrase], mode: EvalMode, grouping: Grouping) -> Result<Self> {
        if phrases.is_empty() {
            return Err(Error::EmptyInput);
        }
        let mut tally: BTreeMap<&KeywordPhrase, usize> = BTreeMap::new();
        for p in phrases {
            *tally.entry(p).or_default() += 1;
        }
        let mut ranked: Vec<(&KeywordPhrase, usize, String)> = tally
            .into_iter()
            .map(|(p, n)| (p, n, p.to_string()))
            .collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.2.cmp(&b.2)));

        let keep = match grouping {
            Grouping::TopN(n) => n.min(ranked.len()),
            Grouping::MinCount(m) => ranked.iter().take_while(|r| r.1 >= m).count(),
        };
        let offset = match mode {
            EvalMode::Retrospective => 1,
            EvalMode::Holdout => 0,
        };
        if keep == 0 && mode == EvalMode::Holdout {
            return Err(Error::EmptyInput);
        }

        let mut phrase_to_class = BTreeMap::new();
        let mut class_to_phrase = BTreeMap::new();
        let mut counts = Vec::with_capacity(keep + 2);
        counts.resize(offset, 0);
        for (rank, (p, n, _)) in ranked[..keep].iter().enumerate() {
            let c = ClassId(rank + offset);
            phrase_to_class.insert((*p).clone(), c);
            class_to_phrase.insert(c, (*p).clone());
            counts.push(*n);
        }
        let other_class = match mode {
            EvalMode::Retrospective => {
                counts.push(ranked[keep..].iter().map(|r| r.1).sum());
                Some(ClassId(keep + 1))
            }
            EvalMode::Holdout => None,
        };
        Ok(Self {
            mode,
            phrase_to_class,
            class_to_phrase,
            counts,
            other_class,
        })
    }

    pub fn mode(&self) -> EvalMode {
        self.mode
    }

    pub fn n_classes(&self) -> usize {
        self.counts.len()
    }

    pub fn other_class(&self) -> Option<ClassId> {
        self.other_class
    }

    /// Per-class sample counts from the building corpus (dropped phrases excluded).
    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn encode(&self, phrase: &KeywordPhrase) -> Result<ClassId> {
        match (self.phrase_to_class.get(phrase), self.other_class) {
            (Some(&c), _) => Ok(c),
            (None, Some(other)) => Ok(other),
            (None, None) => Err(Error::UnknownPhrase(phrase.to_string())),
        }
    }

    /// Phrase of a common class; `None` for the reserved and "other" classes.
    pub fn decode(&self, class: ClassId) -> Option<&KeywordPhrase> {
        self.class_to_phrase.get(&class)
    }

    /// Human-readable label of any class.
    pub fn label(&self, class: ClassId) -> Option<String> {
        if let Some(p) = self.decode(class) {
            return Some(p.to_string());
        }
        if self.mode == EvalMode::Retrospective && class == ClassId::NONE {
            return Some(String::from("no interaction"));
        }
        (self.other_class == Some(class)).then(|| String::from("other"))
    }
}

/// Shorthand for [`ClassVocabulary::build`].
pub fn build_vocabulary(
    phrases: &[KeywordPhrase],
    mode: EvalMode,
    grouping: Grouping,
) -> Result<ClassVocabulary> {
    ClassVocabulary::build(phrases, mode, grouping)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn phrase(s: &str) -> KeywordPhrase {
        KeywordPhrase::parse(s).unwrap()
    }

    fn tokens(p: &KeywordPhrase) -> Vec<&str> {
        p.tokens().iter().map(String::as_str).collect()
    }

    #[test]
    fn metabolism_sentence() {
        let s = InteractionSentence::generic(
            "The metabolism of Drug b can be decreased when combined with Drug a",
        );
        let p = extract_phrase(&s).unwrap();
        assert_eq!(tokens(&p), ["decreased", "metabolism"]);
        assert_eq!(p, phrase("metabolism decreased"));
    }

    #[test]
    fn hypoglycemic_sentence() {
        let s = InteractionSentence::generic(
            "Drug a may increase the hypoglycemic activities of Drug b",
        );
        assert_eq!(
            tokens(&extract_phrase(&s).unwrap()),
            ["increased", "hypoglycemic", "activities"]
        );
    }

    #[test]
    fn serum_concentration_sentence() {
        let s = InteractionSentence::generic(
            "The serum concentration of Drug b can be increased when it is combined with Drug a",
        );
        assert_eq!(
            tokens(&extract_phrase(&s).unwrap()),
            ["increased", "serum", "concentration"]
        );
    }

    #[test]
    fn named_drugs_and_clauses() {
        let s = InteractionSentence::new(
            "The risk or severity of adverse effects can be increased when Oxitriptan is combined with Melatonin.",
            "Oxitriptan",
            "Melatonin",
        );
        assert_eq!(
            extract_phrase(&s).unwrap().to_string(),
            "increased risk adverse effects"
        );
        let s = InteractionSentence::new(
            "Chromic Chloride may decrease the excretion rate of Cyanocobalamin which could result in a higher serum level.",
            "Chromic Chloride",
            "Cyanocobalamin",
        );
        assert_eq!(
            extract_phrase(&s).unwrap().to_string(),
            "decreased excretion rate"
        );
    }

    #[test]
    fn only_stop_words_is_an_error() {
        let s = InteractionSentence::generic("Drug a can be combined with Drug b");
        assert_eq!(extract_phrase(&s), Err(Error::EmptyAfterNormalization));
    }

    #[test]
    fn malformed_verb_table() {
        let err = Normalizer::from_tables("the\n", "increase\n").unwrap_err();
        assert!(matches!(err, Error::InvalidConfig(_)));
    }

    #[test]
    fn retrospective_tie_break_and_other() {
        let mut ps = vec![phrase("q"); 5];
        ps.extend(vec![phrase("p"); 5]);
        ps.push(phrase("r"));
        let v = build_vocabulary(&ps, EvalMode::Retrospective, Grouping::TopN(2)).unwrap();
        assert_eq!(v.encode(&phrase("p")).unwrap(), ClassId(1));
        assert_eq!(v.encode(&phrase("q")).unwrap(), ClassId(2));
        assert_eq!(v.encode(&phrase("r")).unwrap(), ClassId(3));
        assert_eq!(v.other_class(), Some(ClassId(3)));
        assert_eq!(v.n_classes(), 4);
        assert_eq!(v.counts(), &[0, 5, 5, 1]);
        assert_eq!(v.encode(&phrase("never seen")).unwrap(), ClassId(3));
        assert_eq!(v.label(ClassId(0)).unwrap(), "no interaction");
        assert_eq!(v.label(ClassId(3)).unwrap(), "other");
    }

    #[test]
    fn holdout_single_phrase() {
        let v =
            build_vocabulary(&[phrase("x y")], EvalMode::Holdout, Grouping::MinCount(1)).unwrap();
        assert_eq!(v.n_classes(), 1);
        assert_eq!(v.encode(&phrase("y x")).unwrap(), ClassId(0));
        assert!(matches!(
            v.encode(&phrase("z")),
            Err(Error::UnknownPhrase(_))
        ));
    }

    #[test]
    fn holdout_min_count_drops_rare() {
        let ps = [phrase("a1"), phrase("a1"), phrase("b1")];
        let v = build_vocabulary(&ps, EvalMode::Holdout, Grouping::MinCount(2)).unwrap();
        assert_eq!(v.n_classes(), 1);
        assert!(v.encode(&phrase("b1")).is_err());
        assert_eq!(
            build_vocabulary(&ps, EvalMode::Holdout, Grouping::MinCount(3)).unwrap_err(),
            Error::EmptyInput
        );
        assert_eq!(
            build_vocabulary(&[], EvalMode::Holdout, Grouping::MinCount(1)).unwrap_err(),
            Error::EmptyInput
        );
    }

    #[test]
    fn metabolism_ranks_second_in_a_drugbank_like_corpus() {
        let n = Normalizer::default();
        let mut ps = Vec::new();
        for _ in 0..5 {
            ps.push(
                n.extract_phrase(&InteractionSentence::generic(
                    "The risk or severity of adverse effects can be increased when Drug a is combined with Drug b",
                ))
                .unwrap(),
            );
        }
        for _ in 0..3 {
            ps.push(
                n.extract_phrase(&InteractionSentence::generic(
                    "The metabolism of Drug b can be decreased when combined with Drug a",
                ))
                .unwrap(),
            );
        }
        ps.push(phrase("increased bleeding"));
        let v = build_vocabulary(&ps, EvalMode::Retrospective, Grouping::TopN(35)).unwrap();
        assert_eq!(
            v.encode(&phrase("decreased metabolism")).unwrap(),
            ClassId(2)
        );
        assert_eq!(v.n_classes(), 5);
    }
}
