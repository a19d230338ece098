//! Plain-text model files.
//!
//! ```text
//! AMFPMC1 <n> <K> <d>
//! [ids]      n lines, one external drug id each
//! [E]        n lines of d values
//! [b]        n lines
//! [W]        K lines of d values
//! [c]        K lines
//! [u]        K lines
//! ```
//!
//! Values are written with 17 significant digits, so a round trip is exact.

use std::fmt::Write as _;
use std::path::Path;

use amfpmc_core::{ModelParameters, Roster};

use crate::error::{read_to_string, write_string, IoError, Result};

const MAGIC: &str = "AMFPMC1";
const SECTIONS: [&str; 6] = ["ids", "E", "b", "W", "c", "u"];

pub fn render_model(params: &ModelParameters, roster: &Roster) -> Result<String> {
    if roster.len() != params.n_drugs() {
        return Err(IoError::DimensionMismatch(format!(
            "roster has {} drugs, model has {}",
            roster.len(),
            params.n_drugs()
        )));
    }
    let (n, k, d) = (params.n_drugs(), params.n_classes(), params.dim());
    let mut out = format!("{MAGIC} {n} {k} {d}\n[ids]\n");
    for (_, drug) in roster.iter() {
        out.push_str(&drug.external_id);
        out.push('\n');
    }
    let rows = |out: &mut String, name: &str, values: &[f64], width: usize| {
        let _ = writeln!(out, "[{name}]");
        for row in values.chunks(width) {
            let line: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
    };
    rows(&mut out, "E", &params.e, d);
    rows(&mut out, "b", &params.b, 1);
    rows(&mut out, "W", &params.w, d);
    rows(&mut out, "c", &params.c, 1);
    rows(&mut out, "u", &params.u, 1);
    Ok(out)
}

pub fn write_model(path: &Path, params: &ModelParameters, roster: &Roster) -> Result<()> {
    write_string(path, &render_model(params, roster)?)
}

pub fn parse_model(text: &str) -> Result<(ModelParameters, Roster)> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| IoError::Format("empty file".into()))?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 4 || parts[0] != MAGIC {
        return Err(IoError::Format(format!("bad header {header:?}")));
    }
    let dims: Vec<usize> = parts[1..]
        .iter()
        .map(|p| {
            p.parse()
                .map_err(|_| IoError::Format(format!("bad header {header:?}")))
        })
        .collect::<Result<_>>()?;
    let (n, k, d) = (dims[0], dims[1], dims[2]);

    // split the body into sections, in the fixed order
    let mut bodies: Vec<Vec<&str>> = Vec::new();
    for line in lines {
        let t = line.trim();
        if let Some(name) = t.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            let expected = SECTIONS.get(bodies.len()).copied().unwrap_or("<end>");
            if name != expected {
                return Err(IoError::Format(format!(
                    "section [{name}] where [{expected}] was expected"
                )));
            }
            bodies.push(Vec::new());
        } else if !t.is_empty() {
            bodies
                .last_mut()
                .ok_or_else(|| IoError::Format("data before the first section".into()))?
                .push(t);
        }
    }
    if bodies.len() < SECTIONS.len() {
        return Err(IoError::Format(format!(
            "truncated: missing section [{}]",
            SECTIONS[bodies.len()]
        )));
    }

    let ids = &bodies[0];
    if ids.len() != n {
        return Err(IoError::DimensionMismatch(format!(
            "header n={n}, [ids] has {} rows",
            ids.len()
        )));
    }
    let roster = Roster::from_ids(ids.iter().copied())?;
    let table = |idx: usize, rows: usize, width: usize| -> Result<Vec<f64>> {
        let name = SECTIONS[idx];
        let body = &bodies[idx];
        if body.len() != rows {
            return Err(IoError::DimensionMismatch(format!(
                "[{name}] has {} rows, expected {rows}",
                body.len()
            )));
        }
        let mut out = Vec::with_capacity(rows * width);
        for line in body {
            let before = out.len();
            for tok in line.split_whitespace() {
                out.push(
                    tok.parse::<f64>()
                        .map_err(|_| IoError::Format(format!("[{name}]: bad number {tok:?}")))?,
                );
            }
            if out.len() - before != width {
                return Err(IoError::DimensionMismatch(format!(
                    "[{name}] row of {} values, expected {width}",
                    out.len() - before
                )));
            }
        }
        Ok(out)
    };
    let params = ModelParameters::from_parts(
        n,
        k,
        d,
        table(1, n, d)?,
        table(2, n, 1)?,
        table(3, k, d)?,
        table(4, k, 1)?,
        table(5, k, 1)?,
    )?;
    Ok((params, roster))
}

pub fn read_model(path: &Path) -> Result<(ModelParameters, Roster)> {
    parse_model(&read_to_string(path)?)
}
