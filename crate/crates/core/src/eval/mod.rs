//! Inter-rater agreement harness: rating matrices, Krippendorff's alpha,
//! descriptive statistics and the agreement report.
//!
//! Ratings arrive as CSV (`rater_id,item_id,item_kind,score`) with scores on
//! a 1-10 scale and missing cells allowed. All statistics are generic over
//! the scalar type; see the crate root for the `f64`-backed aliases.

mod alpha;
mod report;
mod stats;

pub use alpha::{
    alpha_from_values, coincidence_matrix, krippendorff_alpha, AgreementResult,
    CoincidenceMatrix, Metric, RELIABILITY_THRESHOLD,
};
pub use report::{agreement_report, AgreementReport, AlphaOutcome, KindReport};
pub use stats::{descriptive_stats, DescriptiveStats};

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

/// What kind of extracted thing an item rates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ItemKind {
    Step,
    Tool,
    Action,
    Prompt,
}

impl ItemKind {
    pub const ALL: [ItemKind; 4] = [ItemKind::Step, ItemKind::Tool, ItemKind::Action, ItemKind::Prompt];

    pub fn name(self) -> &'static str {
        match self {
            ItemKind::Step => "step",
            ItemKind::Tool => "tool",
            ItemKind::Action => "action",
            ItemKind::Prompt => "prompt",
        }
    }
}

impl fmt::Display for ItemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ItemKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "step" => Ok(ItemKind::Step),
            "tool" => Ok(ItemKind::Tool),
            "action" => Ok(ItemKind::Action),
            "prompt" => Ok(ItemKind::Prompt),
            other => Err(format!("unknown item kind {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("bad header: expected \"rater_id,item_id,item_kind,score\", found {found:?}")]
    BadHeader { found: String },
    #[error("duplicate cell for rater {rater:?}, item {item:?}")]
    DuplicateCell { rater: String, item: String },
    #[error("score out of range at line {line}: {value} (scores are 1-10)")]
    ScoreOutOfRange { line: usize, value: i64 },
    #[error("bad record at line {line}: {message}")]
    BadRecord { line: usize, message: String },
    #[error("matrix invalid: {0}")]
    InvalidMatrix(String),
    #[error("no item has two or more scores; nothing is pairable")]
    NothingPairable,
    #[error("all pairable scores are identical; alpha is undefined on constant data")]
    DegenerateData,
    #[error("empty input")]
    EmptyInput,
    #[error("invalid value: {0}")]
    InvalidValue(String),
}

/// Raters x items score matrix with missing cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatingMatrix {
    raters: Vec<String>,
    items: Vec<(String, ItemKind)>,
    /// item-major: `cells[item * raters.len() + rater]`
    cells: Vec<Option<u8>>,
}

/// Incremental builder keyed by rater and item ids, in first-appearance
/// order.
#[derive(Debug, Default)]
pub struct RatingMatrixBuilder {
    raters: Vec<String>,
    items: Vec<(String, ItemKind)>,
    records: BTreeMap<(usize, usize), u8>,
    seen: std::collections::BTreeSet<(usize, usize)>,
}

impl RatingMatrixBuilder {
    pub fn record(
        &mut self,
        rater: &str,
        item: &str,
        kind: ItemKind,
        score: Option<u8>,
    ) -> Result<(), EvalError> {
        if let Some(s) = score {
            if !(1..=10).contains(&s) {
                return Err(EvalError::ScoreOutOfRange {
                    line: 0,
                    value: s as i64,
                });
            }
        }
        let rater_index = match self.raters.iter().position(|r| r == rater) {
            Some(i) => i,
            None => {
                self.raters.push(rater.to_string());
                self.raters.len() - 1
            }
        };
        let item_index = match self.items.iter().position(|(i, _)| i == item) {
            Some(i) => {
                if self.items[i].1 != kind {
                    return Err(EvalError::InvalidMatrix(format!(
                        "item {item:?} appears with two kinds: {} and {}",
                        self.items[i].1, kind
                    )));
                }
                i
            }
            None => {
                self.items.push((item.to_string(), kind));
                self.items.len() - 1
            }
        };
        if !self.seen.insert((rater_index, item_index)) {
            return Err(EvalError::DuplicateCell {
                rater: rater.to_string(),
                item: item.to_string(),
            });
        }
        if let Some(s) = score {
            self.records.insert((rater_index, item_index), s);
        }
        Ok(())
    }

    pub fn build(self) -> Result<RatingMatrix, EvalError> {
        if self.raters.len() < 2 {
            return Err(EvalError::InvalidMatrix(format!(
                "at least 2 raters required, found {}",
                self.raters.len()
            )));
        }
        if self.items.is_empty() {
            return Err(EvalError::InvalidMatrix("at least 1 item required".into()));
        }
        let n_raters = self.raters.len();
        let mut cells = vec![None; n_raters * self.items.len()];
        for ((rater, item), score) in self.records {
            cells[item * n_raters + rater] = Some(score);
        }
        Ok(RatingMatrix {
            raters: self.raters,
            items: self.items,
            cells,
        })
    }
}

impl RatingMatrix {
    pub fn builder() -> RatingMatrixBuilder {
        RatingMatrixBuilder::default()
    }

    pub fn n_raters(&self) -> usize {
        self.raters.len()
    }

    pub fn n_items(&self) -> usize {
        self.items.len()
    }

    pub fn raters(&self) -> &[String] {
        &self.raters
    }

    pub fn items(&self) -> &[(String, ItemKind)] {
        &self.items
    }

    pub fn score(&self, rater: usize, item: usize) -> Option<u8> {
        self.cells[item * self.raters.len() + rater]
    }

    /// Present scores of one item, in rater order.
    pub fn item_scores(&self, item: usize) -> Vec<u8> {
        (0..self.raters.len())
            .filter_map(|r| self.score(r, item))
            .collect()
    }

    /// Every present score, item-major.
    pub fn all_scores(&self) -> Vec<u8> {
        (0..self.n_items())
            .flat_map(|i| self.item_scores(i))
            .collect()
    }

    /// Item kinds present, in enum order.
    pub fn kinds_present(&self) -> Vec<ItemKind> {
        ItemKind::ALL
            .into_iter()
            .filter(|k| self.items.iter().any(|(_, kind)| kind == k))
            .collect()
    }

    /// The sub-matrix holding only items of one kind. `None` when the kind
    /// has no items.
    pub fn filter_kind(&self, kind: ItemKind) -> Option<RatingMatrix> {
        let item_indices: Vec<usize> = (0..self.n_items())
            .filter(|&i| self.items[i].1 == kind)
            .collect();
        if item_indices.is_empty() {
            return None;
        }
        let items = item_indices.iter().map(|&i| self.items[i].clone()).collect();
        let mut cells = Vec::with_capacity(item_indices.len() * self.raters.len());
        for &i in &item_indices {
            for r in 0..self.raters.len() {
                cells.push(self.score(r, i));
            }
        }
        Some(RatingMatrix {
            raters: self.raters.clone(),
            items,
            cells,
        })
    }
}

/// Parses the ratings CSV: header `rater_id,item_id,item_kind,score`, one
/// row per cell, blank score meaning a missing cell.
pub fn load_ratings(csv_text: &str) -> Result<RatingMatrix, EvalError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(csv_text.as_bytes());

    let headers = reader
        .headers()
        .map_err(|e| EvalError::BadHeader {
            found: e.to_string(),
        })?
        .clone();
    let expected = ["rater_id", "item_id", "item_kind", "score"];
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(EvalError::BadHeader {
            found: headers.iter().collect::<Vec<_>>().join(","),
        });
    }

    let mut builder = RatingMatrix::builder();
    for (row_index, record) in reader.records().enumerate() {
        let line = row_index + 2; // header is line 1
        let record = record.map_err(|e| EvalError::BadRecord {
            line,
            message: e.to_string(),
        })?;
        if record.len() != 4 {
            return Err(EvalError::BadRecord {
                line,
                message: format!("expected 4 fields, found {}", record.len()),
            });
        }
        let rater = &record[0];
        let item = &record[1];
        if rater.is_empty() || item.is_empty() {
            return Err(EvalError::BadRecord {
                line,
                message: "empty rater_id or item_id".into(),
            });
        }
        let kind: ItemKind = record[2].parse().map_err(|message| EvalError::BadRecord {
            line,
            message,
        })?;
        let score_field = &record[3];
        let score = if score_field.is_empty() {
            None
        } else {
            let value: i64 = score_field.parse().map_err(|_| EvalError::BadRecord {
                line,
                message: format!("score {score_field:?} is not an integer"),
            })?;
            if !(1..=10).contains(&value) {
                return Err(EvalError::ScoreOutOfRange { line, value });
            }
            Some(value as u8)
        };
        builder.record(rater, item, kind, score)?;
    }
    builder.build()
}
