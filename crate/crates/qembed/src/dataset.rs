//! Word-similarity dataset files.
//!
//! Rows are `word1 word2 score`, separated by tabs, commas or whitespace
//! (detected per row in that order). Blank lines and `#` comments are
//! skipped, as are leading rows whose score column is not numeric. Words
//! are lowercased. SCWS files use their own column layout.

use std::collections::HashMap;
use std::io::BufRead;
use std::path::Path;
use std::str::FromStr;

use qembed_core::eval::{ScoredPair, SimilarityDataset};

use crate::error::{Error, IoContext, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetFormat {
    /// SCWS for files named `scws*` or `ratings.txt`, else pairs.
    #[default]
    Auto,
    Pairs,
    /// Tab-separated: id, word1, pos1, word2, pos2, context1, context2,
    /// mean rating, individual ratings. Contexts are ignored.
    Scws,
}

impl FromStr for DatasetFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "auto" => Ok(DatasetFormat::Auto),
            "pairs" => Ok(DatasetFormat::Pairs),
            "scws" => Ok(DatasetFormat::Scws),
            _ => Err(Error::Config(format!("unknown dataset format {s:?}"))),
        }
    }
}

/// A parsed dataset plus parse statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedDataset {
    pub dataset: SimilarityDataset,
    /// Data rows read, before merging duplicates.
    pub rows: usize,
    /// Rows folded into an earlier row with the same ordered pair.
    pub merged_duplicates: usize,
}

fn split_row(line: &str) -> Vec<&str> {
    let fields: Vec<&str> = if line.contains('\t') {
        line.split('\t').collect()
    } else if line.contains(',') {
        line.split(',').collect()
    } else {
        line.split_whitespace().collect()
    };
    fields.into_iter().map(str::trim).collect()
}

/// Duplicate ordered pairs are merged into one pair scored by the mean.
pub fn parse_dataset<R: BufRead>(
    name: &str,
    reader: R,
    format: DatasetFormat,
) -> Result<ParsedDataset> {
    let scws = format == DatasetFormat::Scws;
    let (word_a, word_b, score) = if scws { (1, 3, 7) } else { (0, 1, 2) };
    let mut order: Vec<(String, String)> = Vec::new();
    let mut sums: HashMap<(String, String), (f64, usize)> = HashMap::new();
    let mut rows = 0;
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let fields = if scws {
            t.split('\t').map(str::trim).collect()
        } else {
            split_row(t)
        };
        let parse_err = |message: String| Error::Parse {
            line: lineno,
            message,
        };
        if fields.len() <= score {
            return Err(parse_err(format!(
                "expected at least {} fields, found {}",
                score + 1,
                fields.len()
            )));
        }
        let value = match fields[score].parse::<f64>() {
            Ok(v) => v,
            Err(_) if rows == 0 => continue,
            Err(_) => {
                return Err(parse_err(format!(
                    "score {:?} is not a number",
                    fields[score]
                )))
            }
        };
        if !value.is_finite() {
            return Err(parse_err(format!("score {value} is not finite")));
        }
        let (a, b) = (fields[word_a].to_lowercase(), fields[word_b].to_lowercase());
        if a.is_empty() || b.is_empty() {
            return Err(parse_err("empty word".into()));
        }
        rows += 1;
        let key = (a, b);
        let e = sums.entry(key.clone()).or_insert_with(|| {
            order.push(key);
            (0.0, 0)
        });
        e.0 += value;
        e.1 += 1;
    }
    let pairs: Vec<ScoredPair> = order
        .into_iter()
        .map(|k| {
            let (sum, n) = sums[&k];
            ScoredPair {
                a: k.0,
                b: k.1,
                human: sum / n as f64,
            }
        })
        .collect();
    let merged_duplicates = rows - pairs.len();
    Ok(ParsedDataset {
        dataset: SimilarityDataset::new(name, pairs)?,
        rows,
        merged_duplicates,
    })
}

fn resolve(path: &Path, format: DatasetFormat) -> DatasetFormat {
    if format != DatasetFormat::Auto {
        return format;
    }
    let file = path
        .file_name()
        .and_then(|s| s.to_str())
        .unwrap_or("")
        .to_ascii_lowercase();
    if file.starts_with("scws") || file == "ratings.txt" {
        DatasetFormat::Scws
    } else {
        DatasetFormat::Pairs
    }
}

/// Dataset name: the file stem.
pub fn load_dataset(path: &Path, format: DatasetFormat) -> Result<ParsedDataset> {
    let file = std::fs::File::open(path).at(path)?;
    let name = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("dataset");
    parse_dataset(name, std::io::BufReader::new(file), resolve(path, format)).map_err(|e| match e {
        Error::Parse { line, message } => {
            Error::Format(format!("{}:{line}: {message}", path.display()))
        }
        e => e,
    })
}
