//! Small auxiliary formats: grid files, hyperparameter configs, embedding
//! tables, and class vocabularies.

use std::path::Path;

use amfpmc_core::phrase::ClassVocabulary;
use amfpmc_core::pipeline::GridSpec;
use amfpmc_core::ClassId;
use serde::Deserialize;

use crate::error::{read_to_string, write_string, IoError, Result};

/// TOML grid: one array per hyperparameter, e.g. `alpha = [0.0, 0.8]`.
pub fn parse_grid(text: &str) -> Result<GridSpec> {
    Ok(toml::from_str(text)?)
}

pub fn read_grid(path: &Path) -> Result<GridSpec> {
    parse_grid(&read_to_string(path)?)
}

/// Flat TOML config; every key optional.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub embedding_dim: Option<usize>,
    pub dropout: Option<f64>,
    pub epochs: Option<usize>,
    pub batch_size: Option<usize>,
    pub learning_rate: Option<f64>,
    pub alpha: Option<f64>,
    pub seed: Option<u64>,
    pub balanced: Option<bool>,
}

pub fn read_config(path: &Path) -> Result<ConfigFile> {
    Ok(toml::from_str(&read_to_string(path)?)?)
}

/// CSV with a `drug_id,e0,...,e{d-1}` header.
pub fn write_embeddings(path: &Path, rows: &[(String, Vec<f64>)]) -> Result<()> {
    let d = rows.first().map_or(0, |r| r.1.len());
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["drug_id".to_string()];
    header.extend((0..d).map(|i| format!("e{i}")));
    w.write_record(&header)?;
    for (id, row) in rows {
        let mut rec = vec![id.clone()];
        rec.extend(row.iter().map(|v| format!("{v:.16e}")));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|source| IoError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(())
}

pub fn read_embeddings(path: &Path) -> Result<Vec<(String, Vec<f64>)>> {
    let mut r = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for (idx, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = idx + 2;
        let id = rec.get(0).unwrap_or("").to_string();
        let row = rec
            .iter()
            .skip(1)
            .map(|v| {
                v.parse::<f64>().map_err(|_| IoError::Parse {
                    line,
                    msg: format!("bad number {v:?}"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        out.push((id, row));
    }
    Ok(out)
}

/// `class<TAB>count<TAB>label` for every class.
pub fn render_vocabulary(vocab: &ClassVocabulary) -> String {
    let mut out = String::from("# class\tcount\tlabel\n");
    for c in 0..vocab.n_classes() {
        let label = vocab.label(ClassId(c)).unwrap_or_default();
        out.push_str(&format!("{c}\t{}\t{label}\n", vocab.counts()[c]));
    }
    out
}

pub fn write_vocabulary(path: &Path, vocab: &ClassVocabulary) -> Result<()> {
    write_string(path, &render_vocabulary(vocab))
}

/// Class labels from a vocabulary file, indexed by class.
pub fn read_labels(path: &Path) -> Result<Vec<String>> {
    let text = read_to_string(path)?;
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let f: Vec<&str> = line.split('\t').collect();
        let class: usize = f[0].trim().parse().map_err(|_| IoError::Parse {
            line: idx + 1,
            msg: "bad class index".into(),
        })?;
        if class != out.len() {
            return Err(IoError::Parse {
                line: idx + 1,
                msg: format!("expected class {}", out.len()),
            });
        }
        out.push(f.get(2).map(|s| s.to_string()).unwrap_or_default());
    }
    Ok(out)
}
