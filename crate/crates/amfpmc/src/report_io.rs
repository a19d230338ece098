//! Evaluation reports as aligned text or JSON.

use std::fmt::Write as _;
use std::path::Path;

use amfpmc_core::metrics::{ClassMetrics, MultiClassReport};

use crate::error::{read_to_string, write_string, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ReportFormat {
    Text,
    Json,
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.4}"))
}

/// Key-value summary followed by a per-class table sorted by support.
/// `label` names classes; their index is used when it returns `None`.
pub fn render_text(report: &MultiClassReport, label: &dyn Fn(usize) -> Option<String>) -> String {
    let mut out = String::new();
    let rows: [(&str, f64); 11] = [
        ("accuracy", report.accuracy),
        ("micro_precision", report.micro_precision),
        ("micro_recall", report.micro_recall),
        ("micro_f1", report.micro_f1),
        ("micro_auroc", report.micro_auroc),
        ("micro_aupr", report.micro_aupr),
        ("macro_precision", report.macro_precision),
        ("macro_recall", report.macro_recall),
        ("macro_f1", report.macro_f1),
        ("macro_auroc", report.macro_auroc),
        ("macro_aupr", report.macro_aupr),
    ];
    let _ = writeln!(out, "{:<16} {}", "samples", report.n_samples);
    for (k, v) in rows {
        let _ = writeln!(out, "{k:<16} {v:.4}");
    }
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "{:<6} {:>8} {:>9} {:>9} {:>9} {:>9} {:>9}  label",
        "class", "support", "precision", "recall", "f1", "auroc", "aupr"
    );
    for c in report.per_class_by_support() {
        let name = label(c.class).unwrap_or_default();
        let row = format!(
            "{:<6} {:>8} {:>9.4} {:>9.4} {:>9.4} {:>9} {:>9}  {name}",
            c.class,
            c.support,
            c.precision,
            c.recall,
            c.f1,
            opt(c.auroc),
            opt(c.aupr)
        );
        let _ = writeln!(out, "{}", row.trim_end());
    }
    out
}

/// JSON with full float precision; per-class entries sorted by support.
pub fn render_json(report: &MultiClassReport) -> Result<String> {
    let mut sorted = report.clone();
    sorted.per_class = report.per_class_by_support().into_iter().cloned().collect();
    let mut s = serde_json::to_string_pretty(&sorted)?;
    s.push('\n');
    Ok(s)
}

pub fn parse_json(text: &str) -> Result<MultiClassReport> {
    let mut report: MultiClassReport = serde_json::from_str(text)?;
    report.per_class.sort_by_key(|c: &ClassMetrics| c.class);
    Ok(report)
}

pub fn write_report(path: &Path, report: &MultiClassReport, format: ReportFormat) -> Result<()> {
    let text = match format {
        ReportFormat::Text => render_text(report, &|_| None),
        ReportFormat::Json => render_json(report)?,
    };
    write_string(path, &text)
}

pub fn read_report(path: &Path) -> Result<MultiClassReport> {
    parse_json(&read_to_string(path)?)
}
