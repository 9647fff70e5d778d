//! The agreement report: per-kind and overall alpha with descriptive
//! statistics, rendered as a table and as JSON.

use super::{
    descriptive_stats, krippendorff_alpha, AgreementResult, DescriptiveStats, EvalError, ItemKind,
    Metric, RatingMatrix,
};
use crate::Scalar;
use serde_json::{json, Value};

/// Alpha for one slice of the matrix, with degenerate conditions reported
/// as data instead of aborting the rest of the report.
#[derive(Debug, Clone, PartialEq)]
pub enum AlphaOutcome<F> {
    Computed(AgreementResult<F>),
    /// All pairable scores identical: alpha undefined.
    Degenerate,
    /// No item rated twice: nothing to compare.
    NothingPairable,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KindReport<F> {
    pub outcome: AlphaOutcome<F>,
    /// Stats over every present score of the slice.
    pub stats: Option<DescriptiveStats<F>>,
    pub n_items: usize,
    pub n_scores: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgreementReport<F> {
    pub metric: Metric,
    pub overall: KindReport<F>,
    pub by_kind: Vec<(ItemKind, KindReport<F>)>,
}

fn kind_report<F: Scalar>(m: &RatingMatrix, metric: Metric) -> KindReport<F> {
    let outcome = match krippendorff_alpha::<F>(m, metric) {
        Ok(result) => AlphaOutcome::Computed(result),
        Err(EvalError::DegenerateData) => AlphaOutcome::Degenerate,
        Err(EvalError::NothingPairable) => AlphaOutcome::NothingPairable,
        Err(other) => unreachable!("alpha on a valid matrix: {other}"),
    };
    let scores: Vec<F> = m
        .all_scores()
        .into_iter()
        .map(|s| F::from_u8(s).expect("scores fit"))
        .collect();
    KindReport {
        outcome,
        stats: descriptive_stats(&scores).ok(),
        n_items: m.n_items(),
        n_scores: scores.len(),
    }
}

/// Computes the report: alpha and stats per item kind plus an overall
/// section across all kinds.
pub fn agreement_report<F: Scalar>(m: &RatingMatrix, metric: Metric) -> AgreementReport<F> {
    let by_kind = m
        .kinds_present()
        .into_iter()
        .filter_map(|kind| m.filter_kind(kind).map(|sub| (kind, kind_report(&sub, metric))))
        .collect();
    AgreementReport {
        metric,
        overall: kind_report(m, metric),
        by_kind,
    }
}

fn f64_of<F: Scalar>(v: F) -> f64 {
    v.to_f64().expect("scalar converts to f64")
}

fn stats_json<F: Scalar>(stats: &Option<DescriptiveStats<F>>) -> Value {
    match stats {
        None => Value::Null,
        Some(s) => json!({
            "n": s.n,
            "mean": f64_of(s.mean),
            "variance_population": f64_of(s.variance_population),
            "variance_sample": s.variance_sample.map(f64_of),
            "sd_population": f64_of(s.sd_population),
            "sd_sample": s.sd_sample.map(f64_of),
            "min": f64_of(s.min),
            "max": f64_of(s.max),
        }),
    }
}

fn section_json<F: Scalar>(report: &KindReport<F>, metric: Metric) -> Value {
    let mut section = json!({
        "metric": metric.to_string(),
        "n_items": report.n_items,
        "n_scores": report.n_scores,
        "stats": stats_json(&report.stats),
    });
    let object = section.as_object_mut().expect("section is an object");
    match &report.outcome {
        AlphaOutcome::Computed(r) => {
            object.insert("status".into(), json!("ok"));
            object.insert("alpha".into(), json!(f64_of(r.alpha)));
            object.insert("d_o".into(), json!(f64_of(r.observed_disagreement)));
            object.insert("d_e".into(), json!(f64_of(r.expected_disagreement)));
            object.insert("n_pairable".into(), json!(r.n_pairable));
            object.insert("reliable".into(), json!(r.reliable));
            object.insert(
                "verdict".into(),
                json!(if r.reliable { "reliable" } else { "not reliable" }),
            );
        }
        AlphaOutcome::Degenerate => {
            object.insert("status".into(), json!("degenerate"));
            for key in ["alpha", "d_o", "d_e", "reliable", "verdict"] {
                object.insert(key.into(), Value::Null);
            }
            object.insert("n_pairable".into(), Value::Null);
        }
        AlphaOutcome::NothingPairable => {
            object.insert("status".into(), json!("nothing_pairable"));
            for key in ["alpha", "d_o", "d_e", "reliable", "verdict"] {
                object.insert(key.into(), Value::Null);
            }
            object.insert("n_pairable".into(), json!(0));
        }
    }
    section
}

impl<F: Scalar> AgreementReport<F> {
    /// Machine-readable form, written as `report.json`.
    pub fn to_json_value(&self) -> Value {
        let mut by_kind = serde_json::Map::new();
        for (kind, report) in &self.by_kind {
            by_kind.insert(kind.name().to_string(), section_json(report, self.metric));
        }
        json!({
            "metric": self.metric.to_string(),
            "reliability_threshold": super::RELIABILITY_THRESHOLD,
            "overall": section_json(&self.overall, self.metric),
            "by_kind": Value::Object(by_kind),
        })
    }

    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(&self.to_json_value()).expect("report json");
        out.push('\n');
        out
    }

    /// Human-readable table.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "metric: {}   (not reliable below alpha {})\n\n",
            self.metric,
            super::RELIABILITY_THRESHOLD
        ));
        out.push_str(&format!(
            "{:<8} {:>6} {:>7} {:>9} {:>9}  {:<13} {:>7} {:>8}\n",
            "kind", "items", "scores", "pairable", "alpha", "verdict", "mean", "sd(pop)"
        ));
        for (kind, report) in &self.by_kind {
            out.push_str(&render_row(kind.name(), report));
        }
        out.push_str(&render_row("overall", &self.overall));
        out
    }
}

fn render_row<F: Scalar>(name: &str, report: &KindReport<F>) -> String {
    let (pairable, alpha, verdict) = match &report.outcome {
        AlphaOutcome::Computed(r) => (
            r.n_pairable.to_string(),
            format!("{:.4}", f64_of(r.alpha)),
            if r.reliable { "reliable" } else { "not reliable" }.to_string(),
        ),
        AlphaOutcome::Degenerate => ("-".into(), "-".into(), "degenerate".into()),
        AlphaOutcome::NothingPairable => ("0".into(), "-".into(), "no pairs".into()),
    };
    let (mean, sd) = match &report.stats {
        Some(s) => (
            format!("{:.2}", f64_of(s.mean)),
            format!("{:.2}", f64_of(s.sd_population)),
        ),
        None => ("-".into(), "-".into()),
    };
    format!(
        "{:<8} {:>6} {:>7} {:>9} {:>9}  {:<13} {:>7} {:>8}\n",
        name, report.n_items, report.n_scores, pairable, alpha, verdict, mean, sd
    )
}
