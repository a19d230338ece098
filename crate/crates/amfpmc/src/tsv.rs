//! Tab-separated interaction lists.
//!
//! Index mode: `drug_a<TAB>drug_b<TAB>class`.
//! Sentence mode: `drug_a<TAB>drug_b<TAB>sentence[<TAB>name_a<TAB>name_b]`,
//! where the optional names are the surface forms the sentence uses for the
//! two drugs (the ids are used when they are absent).
//!
//! Blank lines and lines starting with `#` are skipped. Any other malformed
//! line aborts the parse with its 1-based line number.

use std::fmt::Write as _;
use std::path::Path;

use amfpmc_core::phrase::InteractionSentence;
use amfpmc_core::{ClassId, EvalMode, Roster, TypedInteractionGraph};

use crate::error::{read_to_string, IoError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseMode {
    Indices,
    Sentences,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    Class(usize),
    Sentence {
        text: String,
        name_a: Option<String>,
        name_b: Option<String>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct InteractionRecord {
    pub line: usize,
    pub drug_a: String,
    pub drug_b: String,
    pub payload: Payload,
}

impl InteractionRecord {
    pub fn class(&self) -> Option<ClassId> {
        match self.payload {
            Payload::Class(c) => Some(ClassId(c)),
            Payload::Sentence { .. } => None,
        }
    }

    /// The record as an extraction input; `None` in index mode.
    pub fn sentence(&self) -> Option<InteractionSentence> {
        match &self.payload {
            Payload::Sentence {
                text,
                name_a,
                name_b,
            } => Some(InteractionSentence::new(
                text.clone(),
                name_a.clone().unwrap_or_else(|| self.drug_a.clone()),
                name_b.clone().unwrap_or_else(|| self.drug_b.clone()),
            )),
            Payload::Class(_) => None,
        }
    }
}

fn is_skipped(line: &str) -> bool {
    let t = line.trim();
    t.is_empty() || t.starts_with('#')
}

pub fn parse_interactions(text: &str, mode: ParseMode) -> Result<Vec<InteractionRecord>> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        if is_skipped(raw) {
            continue;
        }
        let err = |msg: String| IoError::Parse { line, msg };
        let fields: Vec<&str> = raw.trim_end_matches('\r').split('\t').collect();
        let (a, b) = (
            fields[0].trim(),
            fields.get(1).map(|s| s.trim()).unwrap_or(""),
        );
        if a.is_empty() || b.is_empty() {
            return Err(err("expected two drug ids".into()));
        }
        if a == b {
            return Err(err(format!("self-loop on {a}")));
        }
        let payload = match mode {
            ParseMode::Indices => {
                if fields.len() != 3 {
                    return Err(err(format!("expected 3 fields, found {}", fields.len())));
                }
                let c = fields[2].trim().parse::<usize>().map_err(|_| {
                    err(format!(
                        "class index {:?} is not a non-negative integer",
                        fields[2]
                    ))
                })?;
                Payload::Class(c)
            }
            ParseMode::Sentences => {
                if fields.len() != 3 && fields.len() != 5 {
                    return Err(err(format!(
                        "expected 3 or 5 fields, found {}",
                        fields.len()
                    )));
                }
                let text = fields[2].trim();
                if text.is_empty() {
                    return Err(err("empty sentence".into()));
                }
                let name = |i: usize| {
                    fields
                        .get(i)
                        .map(|s| s.trim().to_string())
                        .filter(|s| !s.is_empty())
                };
                Payload::Sentence {
                    text: text.to_string(),
                    name_a: name(3),
                    name_b: name(4),
                }
            }
        };
        out.push(InteractionRecord {
            line,
            drug_a: a.to_string(),
            drug_b: b.to_string(),
            payload,
        });
    }
    Ok(out)
}

pub fn parse_interactions_file(path: &Path, mode: ParseMode) -> Result<Vec<InteractionRecord>> {
    parse_interactions(&read_to_string(path)?, mode)
}

/// Builds a graph from index-mode records. Drugs are numbered in order of
/// first appearance. `n_classes` defaults to one more than the largest class
/// seen. Errors carry the offending record's line number.
pub fn build_graph(
    records: &[InteractionRecord],
    mode: EvalMode,
    n_classes: Option<usize>,
) -> Result<TypedInteractionGraph> {
    let max = records
        .iter()
        .filter_map(|r| r.class())
        .map(|c| c.0 + 1)
        .max()
        .unwrap_or(0);
    let k = n_classes.unwrap_or(max.max(2));
    let mut roster = Roster::new();
    for r in records {
        roster.intern(&r.drug_a);
        roster.intern(&r.drug_b);
    }
    let mut graph = TypedInteractionGraph::new(roster, k, mode);
    for r in records {
        let c = r.class().ok_or_else(|| IoError::Parse {
            line: r.line,
            msg: "expected a class index".into(),
        })?;
        graph
            .add_interaction_by_id(&r.drug_a, &r.drug_b, c)
            .map_err(|e| IoError::Parse {
                line: r.line,
                msg: e.to_string(),
            })?;
    }
    Ok(graph)
}

pub fn load_graph(
    path: &Path,
    mode: EvalMode,
    n_classes: Option<usize>,
) -> Result<TypedInteractionGraph> {
    build_graph(
        &parse_interactions_file(path, ParseMode::Indices)?,
        mode,
        n_classes,
    )
}

/// Index-mode rendering of every edge, ascending.
pub fn render_graph(graph: &TypedInteractionGraph) -> String {
    let mut out = String::new();
    for (i, j, c) in graph.edges() {
        let roster = graph.roster();
        let _ = writeln!(
            out,
            "{}\t{}\t{}",
            roster.external_id(i),
            roster.external_id(j),
            c.0
        );
    }
    out
}

/// One drug id per line; blank and `#` lines skipped.
pub fn parse_id_list(text: &str) -> Vec<String> {
    text.lines()
        .filter(|l| !is_skipped(l))
        .map(|l| l.trim().to_string())
        .collect()
}

/// Two-column pair list for prediction.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        if is_skipped(raw) {
            continue;
        }
        let fields: Vec<&str> = raw.split('\t').map(str::trim).collect();
        if fields.len() < 2 || fields[0].is_empty() || fields[1].is_empty() {
            return Err(IoError::Parse {
                line: idx + 1,
                msg: "expected two drug ids".into(),
            });
        }
        out.push((fields[0].to_string(), fields[1].to_string()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_line() {
        let r = parse_interactions("D1\tD5\t4\n", ParseMode::Indices).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].class(), Some(ClassId(4)));
    }

    #[test]
    fn self_loop_reports_line() {
        let e = parse_interactions("D1\tD1\t4\n", ParseMode::Indices).unwrap_err();
        assert!(matches!(e, IoError::Parse { line: 1, .. }), "{e}");
    }

    #[test]
    fn comments_and_line_numbers() {
        let text = "# header\n\nA\tB\t1\nA\tC\tx\n";
        let e = parse_interactions(text, ParseMode::Indices).unwrap_err();
        assert!(matches!(e, IoError::Parse { line: 4, .. }), "{e}");
    }

    #[test]
    fn duplicate_pair_conflict_surfaces_in_graph() {
        let r = parse_interactions("A\tB\t1\nB\tA\t2\n", ParseMode::Indices).unwrap();
        let e = build_graph(&r, EvalMode::Holdout, None).unwrap_err();
        assert!(matches!(e, IoError::Parse { line: 2, .. }), "{e}");
    }

    #[test]
    fn render_round_trips() {
        let r = parse_interactions("A\tB\t1\nC\tA\t0\n", ParseMode::Indices).unwrap();
        let g = build_graph(&r, EvalMode::Holdout, None).unwrap();
        let again = build_graph(
            &parse_interactions(&render_graph(&g), ParseMode::Indices).unwrap(),
            EvalMode::Holdout,
            None,
        )
        .unwrap();
        assert_eq!(again.edges().count(), 2);
        assert_eq!(again.n_classes(), 2);
    }
}
