//! Evaluation result tables.

use std::io::Write;

use qembed_core::eval::{EvalReport, SimilarityDataset};

use crate::error::Result;

/// One (model, dataset) evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalRow {
    pub model: String,
    pub report: EvalReport,
    /// Word pairs aligned with `report.scores`.
    pub words: Vec<(String, String)>,
}

impl EvalRow {
    pub fn new(model: impl Into<String>, report: EvalReport, dataset: &SimilarityDataset) -> Self {
        let words = report
            .scores
            .iter()
            .map(|s| {
                let p = &dataset.pairs()[s.index];
                (p.a.clone(), p.b.clone())
            })
            .collect();
        EvalRow {
            model: model.into(),
            report,
            words,
        }
    }
}

/// Aligned plain-text table, one row per (model, dataset).
pub fn format_table(rows: &[EvalRow]) -> String {
    let header = ["model", "dataset", "pairs", "coverage", "spearman"];
    let cells: Vec<[String; 5]> = rows
        .iter()
        .map(|r| {
            [
                r.model.clone(),
                r.report.dataset.clone(),
                format!("{}/{}", r.report.covered, r.report.total),
                format!("{:.1}%", 100.0 * r.report.coverage()),
                format!("{:.4}", r.report.spearman),
            ]
        })
        .collect();
    let mut width = header.map(str::len);
    for row in &cells {
        for (w, c) in width.iter_mut().zip(row) {
            *w = (*w).max(c.chars().count());
        }
    }
    let mut out = String::new();
    let mut line = |fields: [&str; 5]| {
        let mut s = String::new();
        for (i, (f, w)) in fields.iter().zip(width).enumerate() {
            // text columns left-aligned, numbers right-aligned
            if i < 2 {
                s.push_str(&format!("{f:<w$}  "));
            } else {
                s.push_str(&format!("{f:>w$}  "));
            }
        }
        out.push_str(s.trim_end());
        out.push('\n');
    };
    line(header);
    for c in &cells {
        line([&c[0], &c[1], &c[2], &c[3], &c[4]]);
    }
    out
}

/// Columns: model, dataset, pairs, covered, coverage, spearman.
pub fn write_csv<W: Write>(rows: &[EvalRow], w: W) -> Result<()> {
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record([
        "model", "dataset", "pairs", "covered", "coverage", "spearman",
    ])?;
    for r in rows {
        csv.write_record([
            r.model.clone(),
            r.report.dataset.clone(),
            r.report.total.to_string(),
            r.report.covered.to_string(),
            format!("{:.6}", r.report.coverage()),
            format!("{:.6}", r.report.spearman),
        ])?;
    }
    csv.flush()?;
    Ok(())
}

/// Per-pair scores: model, dataset, word_a, word_b, human, system.
pub fn write_pair_scores<W: Write>(rows: &[EvalRow], w: W) -> Result<()> {
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(["model", "dataset", "word_a", "word_b", "human", "system"])?;
    for r in rows {
        for (s, (a, b)) in r.report.scores.iter().zip(&r.words) {
            csv.write_record([
                r.model.clone(),
                r.report.dataset.clone(),
                a.clone(),
                b.clone(),
                s.human.to_string(),
                format!("{:.9}", s.system),
            ])?;
        }
    }
    csv.flush()?;
    Ok(())
}
