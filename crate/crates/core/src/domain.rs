//! Stage-document data model shared by the prompt chain, the backends and
//! the knowledge-graph emitter.
//!
//! A procedure moves through six stages. Each stage adds exactly one kind of
//! information to the step records and nothing else:
//!
//! | stage | content                                         |
//! |-------|-------------------------------------------------|
//! | S1    | draft steps (text only)                         |
//! | S2    | validation (`correct`/`incorrect`) and reason   |
//! | S3    | incorrect steps removed, validation keys gone   |
//! | S4    | order numbers, contiguous `1..N`                |
//! | S5    | tools (optional per step)                       |
//! | S6    | actions (at least one per step)                 |
//!
//! The on-disk representation is JSON with a fixed key schema: `steps` is an
//! array of objects with keys `step`, `validation`, `reason`, `order`,
//! `tools` and `actions`. Tools and actions are stored internally as lists
//! but serialized as semicolon-joined strings; the keys are omitted when the
//! lists are empty. Two optional document-level keys, `id` and `title`, carry
//! the procedure identity so that a single stage file is self-contained.

use serde::{Deserialize, Serialize};
use std::fmt;

/// Pipeline stage a document belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Stage {
    S1Draft,
    S2Validated,
    S3Filtered,
    S4Ordered,
    S5Tools,
    S6Actions,
}

impl Stage {
    pub const ALL: [Stage; 6] = [
        Stage::S1Draft,
        Stage::S2Validated,
        Stage::S3Filtered,
        Stage::S4Ordered,
        Stage::S5Tools,
        Stage::S6Actions,
    ];

    /// 1-based stage number, matching the `stage<N>.json` file names.
    pub fn number(self) -> u8 {
        match self {
            Stage::S1Draft => 1,
            Stage::S2Validated => 2,
            Stage::S3Filtered => 3,
            Stage::S4Ordered => 4,
            Stage::S5Tools => 5,
            Stage::S6Actions => 6,
        }
    }

    pub fn successor(self) -> Option<Stage> {
        match self {
            Stage::S1Draft => Some(Stage::S2Validated),
            Stage::S2Validated => Some(Stage::S3Filtered),
            Stage::S3Filtered => Some(Stage::S4Ordered),
            Stage::S4Ordered => Some(Stage::S5Tools),
            Stage::S5Tools => Some(Stage::S6Actions),
            Stage::S6Actions => None,
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "S{}", self.number())
    }
}

/// Validation verdict attached to a step at S2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Validation {
    Correct,
    Incorrect,
}

/// A free-form procedure as it enters the pipeline: an identifier, a title
/// line and unformatted body text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProcedureText {
    pub id: String,
    pub title: String,
    pub body: String,
}

impl ProcedureText {
    /// Builds a procedure, rejecting empty ids and bodies.
    pub fn new(
        id: impl Into<String>,
        title: impl Into<String>,
        body: impl Into<String>,
    ) -> Result<Self, DocumentError> {
        let id = id.into();
        let title = title.into();
        let body = body.into();
        if id.trim().is_empty() {
            return Err(DocumentError::Schema {
                rule: "procedure id is empty".into(),
            });
        }
        if body.trim().is_empty() {
            return Err(DocumentError::Schema {
                rule: "procedure body is empty".into(),
            });
        }
        Ok(Self { id, title, body })
    }

    /// Parses the `title line + body` input file format.
    pub fn from_input_text(id: impl Into<String>, text: &str) -> Result<Self, DocumentError> {
        let mut lines = text.lines();
        let title = lines.next().unwrap_or("").trim().to_string();
        let body = lines.collect::<Vec<_>>().join("\n").trim().to_string();
        if title.is_empty() {
            return Err(DocumentError::Schema {
                rule: "input is missing the title line".into(),
            });
        }
        Self::new(id, title, body)
    }
}

/// One extracted step with whatever fields its stage has populated so far.
///
/// `tools` and `actions` use an empty vector to mean "absent": the JSON key
/// is omitted entirely when the list is empty.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct StepRecord {
    pub text: String,
    pub validation: Option<Validation>,
    pub reason: Option<String>,
    pub order: Option<u32>,
    pub tools: Vec<String>,
    pub actions: Vec<String>,
}

impl StepRecord {
    pub fn draft(text: impl Into<String>) -> Self {
        StepRecord {
            text: text.into(),
            ..StepRecord::default()
        }
    }
}

/// The evolving per-procedure record flowing through the pipeline.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StageDocument {
    pub stage: Stage,
    pub procedure_id: String,
    pub title: Option<String>,
    pub steps: Vec<StepRecord>,
}

impl StageDocument {
    pub fn new(stage: Stage, steps: Vec<StepRecord>) -> Self {
        StageDocument {
            stage,
            procedure_id: String::new(),
            title: None,
            steps,
        }
    }

    pub fn with_procedure(mut self, id: impl Into<String>, title: Option<&str>) -> Self {
        self.procedure_id = id.into();
        self.title = title.map(str::to_string);
        self
    }
}

/// Errors for stage-document parsing and construction.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DocumentError {
    /// Input is not valid JSON or does not have the expected keys/types.
    #[error("malformed document: {0}")]
    Malformed(String),
    /// The document parsed but violates an invariant of the expected stage.
    #[error("schema violation: {rule}")]
    Schema { rule: String },
}

/// Error for [`validate_stage_transition`] called on non-consecutive stages.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("stage mismatch: {after} does not follow {before}")]
pub struct StageMismatch {
    pub before: Stage,
    pub after: Stage,
}

/// What a stage transition got wrong. Violations are data, not errors: a
/// pipeline run records them as warnings instead of aborting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TransitionCode {
    TextMutated,
    StepCountChanged,
    IncorrectStepRetained,
    CorrectStepDropped,
    OrderMutated,
    ToolsMutated,
    UnexpectedField,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TransitionViolation {
    pub code: TransitionCode,
    pub detail: String,
}

impl fmt::Display for TransitionViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}: {}", self.code, self.detail)
    }
}

/// Collapses whitespace runs to single spaces and trims the ends.
///
/// Step-text comparison is whitespace-normalized everywhere: models reliably
/// perturb spacing even when told not to rephrase.
pub fn normalize_ws(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Splits a semicolon-separated name list into trimmed, non-empty entries.
/// Order and duplicates are preserved; empty input yields an empty list.
pub fn split_separated_list(raw: &str) -> Vec<String> {
    raw.split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect()
}

/// Joins a name list back into the semicolon-separated wire form.
pub fn join_separated_list(names: &[String]) -> String {
    names.join("; ")
}

// Wire representation. Field order here is the serialization order.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDocument {
    #[serde(skip_serializing_if = "Option::is_none")]
    id: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    title: Option<String>,
    steps: Vec<RawStep>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStep {
    step: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    validation: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    reason: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    order: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tools: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    actions: Option<String>,
}

/// Deserializes a stage document from bare JSON text and checks every
/// invariant of `expected_stage`.
///
/// The input must already be unwrapped JSON (no code fences or prose); see
/// the backend module for payload extraction from noisy replies.
pub fn parse_stage_document(raw: &str, expected_stage: Stage) -> Result<StageDocument, DocumentError> {
    let raw_doc: RawDocument =
        serde_json::from_str(raw).map_err(|e| DocumentError::Malformed(e.to_string()))?;

    let mut steps = Vec::with_capacity(raw_doc.steps.len());
    for (i, rs) in raw_doc.steps.into_iter().enumerate() {
        let validation = match rs.validation.as_deref() {
            None => None,
            Some("correct") => Some(Validation::Correct),
            Some("incorrect") => Some(Validation::Incorrect),
            Some(other) => {
                return Err(DocumentError::Schema {
                    rule: format!(
                        "step {}: validation must be \"correct\" or \"incorrect\", got {:?}",
                        i + 1,
                        other
                    ),
                })
            }
        };
        steps.push(StepRecord {
            text: rs.step,
            validation,
            reason: rs.reason,
            order: rs.order,
            tools: rs.tools.as_deref().map(split_separated_list).unwrap_or_default(),
            actions: rs.actions.as_deref().map(split_separated_list).unwrap_or_default(),
        });
    }

    let doc = StageDocument {
        stage: expected_stage,
        procedure_id: raw_doc.id.unwrap_or_default(),
        title: raw_doc.title,
        steps,
    };
    check_stage_invariants(&doc)?;
    Ok(doc)
}

/// Serializes a stage document to the pretty-printed wire JSON (with a
/// trailing newline, so stage files are byte-stable).
pub fn serialize_stage_document(doc: &StageDocument) -> String {
    let raw = RawDocument {
        id: if doc.procedure_id.is_empty() {
            None
        } else {
            Some(doc.procedure_id.clone())
        },
        title: doc.title.clone(),
        steps: doc
            .steps
            .iter()
            .map(|s| RawStep {
                step: s.text.clone(),
                validation: s.validation.map(|v| {
                    match v {
                        Validation::Correct => "correct",
                        Validation::Incorrect => "incorrect",
                    }
                    .to_string()
                }),
                reason: s.reason.clone(),
                order: s.order,
                tools: if s.tools.is_empty() {
                    None
                } else {
                    Some(join_separated_list(&s.tools))
                },
                actions: if s.actions.is_empty() {
                    None
                } else {
                    Some(join_separated_list(&s.actions))
                },
            })
            .collect(),
    };
    let mut out = serde_json::to_string_pretty(&raw).expect("stage document serialization");
    out.push('\n');
    out
}

/// Checks the per-stage invariants, returning the first violated rule.
pub fn check_stage_invariants(doc: &StageDocument) -> Result<(), DocumentError> {
    let fail = |rule: String| Err(DocumentError::Schema { rule });
    for (i, step) in doc.steps.iter().enumerate() {
        let n = i + 1;
        if step.text.trim().is_empty() {
            return fail(format!("step {n}: text is empty"));
        }
        if let Some(order) = step.order {
            if order < 1 {
                return fail(format!("step {n}: order must be >= 1"));
            }
        }
    }
    match doc.stage {
        Stage::S1Draft | Stage::S3Filtered => {
            let name = if doc.stage == Stage::S1Draft { "S1" } else { "S3" };
            for (i, step) in doc.steps.iter().enumerate() {
                let n = i + 1;
                if step.validation.is_some() || step.reason.is_some() {
                    return fail(format!("{name} step {n}: validation and reason must be absent"));
                }
                if step.order.is_some() {
                    return fail(format!("{name} step {n}: order must be absent"));
                }
                if !step.tools.is_empty() || !step.actions.is_empty() {
                    return fail(format!("{name} step {n}: tools and actions must be absent"));
                }
            }
        }
        Stage::S2Validated => {
            for (i, step) in doc.steps.iter().enumerate() {
                let n = i + 1;
                match step.validation {
                    None => return fail(format!("S2 step {n}: validation is missing")),
                    Some(Validation::Incorrect) if step.reason.is_none() => {
                        return fail(format!("S2 step {n}: incorrect step missing reason"))
                    }
                    _ => {}
                }
                if step.order.is_some() || !step.tools.is_empty() || !step.actions.is_empty() {
                    return fail(format!("S2 step {n}: only validation and reason may be added"));
                }
            }
        }
        Stage::S4Ordered | Stage::S5Tools | Stage::S6Actions => {
            for (i, step) in doc.steps.iter().enumerate() {
                let n = i + 1;
                if step.validation.is_some() || step.reason.is_some() {
                    return fail(format!(
                        "{} step {n}: validation and reason must be absent",
                        doc.stage
                    ));
                }
                match step.order {
                    None => return fail(format!("{} step {n}: order is missing", doc.stage)),
                    Some(order) if order as usize != n => {
                        return fail(format!(
                            "{} orders not contiguous: step {n} has order {order}",
                            doc.stage
                        ))
                    }
                    _ => {}
                }
                if doc.stage == Stage::S4Ordered && (!step.tools.is_empty() || !step.actions.is_empty()) {
                    return fail(format!("S4 step {n}: tools and actions must be absent"));
                }
                if doc.stage == Stage::S5Tools && !step.actions.is_empty() {
                    return fail(format!("S5 step {n}: actions must be absent"));
                }
                if doc.stage == Stage::S6Actions && step.actions.is_empty() {
                    return fail(format!("S6 step {n}: a step should have at least one action"));
                }
            }
        }
    }
    Ok(())
}

/// Checks that a stage transition only added what its prompt instructs.
///
/// Returns the list of violations (empty when the transition is clean), or
/// [`StageMismatch`] if `after` is not the direct successor of `before`.
pub fn validate_stage_transition(
    before: &StageDocument,
    after: &StageDocument,
) -> Result<Vec<TransitionViolation>, StageMismatch> {
    if before.stage.successor() != Some(after.stage) {
        return Err(StageMismatch {
            before: before.stage,
            after: after.stage,
        });
    }

    let mut violations: Vec<TransitionViolation> = Vec::new();
    fn push(violations: &mut Vec<TransitionViolation>, code: TransitionCode, detail: String) {
        violations.push(TransitionViolation { code, detail });
    }

    if after.stage == Stage::S3Filtered {
        // S2 -> S3 must remove exactly the incorrect steps.
        let expected: Vec<String> = before
            .steps
            .iter()
            .filter(|s| s.validation == Some(Validation::Correct))
            .map(|s| normalize_ws(&s.text))
            .collect();
        let actual: Vec<String> = after.steps.iter().map(|s| normalize_ws(&s.text)).collect();
        if expected != actual {
            let incorrect: Vec<&String> = before
                .steps
                .iter()
                .filter(|s| s.validation == Some(Validation::Incorrect))
                .map(|s| &s.text)
                .collect();
            for text in &actual {
                if incorrect.iter().any(|t| normalize_ws(t) == *text) {
                    push(
                    &mut violations,
                        TransitionCode::IncorrectStepRetained,
                        format!("incorrect step retained: {text:?}"),
                    );
                }
            }
            for text in &expected {
                if !actual.contains(text) {
                    push(
                    &mut violations,
                        TransitionCode::CorrectStepDropped,
                        format!("correct step dropped: {text:?}"),
                    );
                }
            }
            if violations.is_empty() {
                push(
                    &mut violations,
                    TransitionCode::TextMutated,
                    "surviving step texts do not match the correct steps".into(),
                );
            }
        }
    } else {
        if before.steps.len() != after.steps.len() {
            push(
                    &mut violations,
                TransitionCode::StepCountChanged,
                format!(
                    "step count changed from {} to {}",
                    before.steps.len(),
                    after.steps.len()
                ),
            );
        }
        for (i, (b, a)) in before.steps.iter().zip(after.steps.iter()).enumerate() {
            let n = i + 1;
            if normalize_ws(&b.text) != normalize_ws(&a.text) {
                push(
                    &mut violations,
                    TransitionCode::TextMutated,
                    format!("step {n} text mutated: {:?} -> {:?}", b.text, a.text),
                );
            }
            match after.stage {
                Stage::S2Validated => {
                    if a.order.is_some() || !a.tools.is_empty() || !a.actions.is_empty() {
                        push(
                    &mut violations,
                            TransitionCode::UnexpectedField,
                            format!("step {n}: S2 may add only validation and reason"),
                        );
                    }
                }
                Stage::S4Ordered => {
                    if a.validation.is_some() || a.reason.is_some() {
                        push(
                    &mut violations,
                            TransitionCode::UnexpectedField,
                            format!("step {n}: validation must not reappear at S4"),
                        );
                    }
                    if !a.tools.is_empty() || !a.actions.is_empty() {
                        push(
                    &mut violations,
                            TransitionCode::UnexpectedField,
                            format!("step {n}: S4 may add only order"),
                        );
                    }
                }
                Stage::S5Tools => {
                    if a.order != b.order {
                        push(
                    &mut violations,
                            TransitionCode::OrderMutated,
                            format!("step {n} order mutated: {:?} -> {:?}", b.order, a.order),
                        );
                    }
                    if !a.actions.is_empty() {
                        push(
                    &mut violations,
                            TransitionCode::UnexpectedField,
                            format!("step {n}: S5 may add only tools"),
                        );
                    }
                }
                Stage::S6Actions => {
                    if a.order != b.order {
                        push(
                    &mut violations,
                            TransitionCode::OrderMutated,
                            format!("step {n} order mutated: {:?} -> {:?}", b.order, a.order),
                        );
                    }
                    if a.tools != b.tools {
                        push(
                    &mut violations,
                            TransitionCode::ToolsMutated,
                            format!("step {n} tools mutated: {:?} -> {:?}", b.tools, a.tools),
                        );
                    }
                }
                Stage::S1Draft | Stage::S3Filtered => unreachable!("handled above"),
            }
        }
    }
    Ok(violations)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s2_doc(steps: &[(&str, Validation, Option<&str>)]) -> StageDocument {
        StageDocument::new(
            Stage::S2Validated,
            steps
                .iter()
                .map(|(text, v, reason)| StepRecord {
                    text: text.to_string(),
                    validation: Some(*v),
                    reason: reason.map(str::to_string),
                    ..StepRecord::default()
                })
                .collect(),
        )
    }

    #[test]
    fn parse_minimal_s1() {
        let doc = parse_stage_document(r#"{"steps":[{"step":"Rinse the keyboard."}]}"#, Stage::S1Draft)
            .unwrap();
        assert_eq!(doc.steps.len(), 1);
        assert_eq!(doc.steps[0].text, "Rinse the keyboard.");
        assert_eq!(doc.steps[0].validation, None);
    }

    #[test]
    fn parse_rejects_incorrect_without_reason() {
        let err = parse_stage_document(
            r#"{"steps":[{"step":"Do not touch it.","validation":"incorrect"}]}"#,
            Stage::S2Validated,
        )
        .unwrap_err();
        match err {
            DocumentError::Schema { rule } => assert!(rule.contains("incorrect step missing reason"), "{rule}"),
            other => panic!("expected schema violation, got {other:?}"),
        }
    }

    #[test]
    fn parse_rejects_non_contiguous_orders() {
        let raw = r#"{"steps":[
            {"step":"A.","order":1},
            {"step":"B.","order":2},
            {"step":"C.","order":4}
        ]}"#;
        let err = parse_stage_document(raw, Stage::S4Ordered).unwrap_err();
        match err {
            DocumentError::Schema { rule } => assert!(rule.contains("orders not contiguous"), "{rule}"),
            other => panic!("expected schema violation, got {other:?}"),
        }
    }

    #[test]
    fn parse_rejects_non_json() {
        assert!(matches!(
            parse_stage_document("not json", Stage::S1Draft),
            Err(DocumentError::Malformed(_))
        ));
    }

    #[test]
    fn parse_rejects_unknown_validation_value() {
        let err = parse_stage_document(
            r#"{"steps":[{"step":"A.","validation":"maybe"}]}"#,
            Stage::S2Validated,
        )
        .unwrap_err();
        assert!(matches!(err, DocumentError::Schema { .. }));
    }

    #[test]
    fn parse_rejects_empty_step_text() {
        let err = parse_stage_document(r#"{"steps":[{"step":"   "}]}"#, Stage::S1Draft).unwrap_err();
        assert!(matches!(err, DocumentError::Schema { .. }));
    }

    #[test]
    fn s6_requires_actions() {
        let raw = r#"{"steps":[{"step":"Rinse.","order":1}]}"#;
        let err = parse_stage_document(raw, Stage::S6Actions).unwrap_err();
        match err {
            DocumentError::Schema { rule } => assert!(rule.contains("at least one action"), "{rule}"),
            other => panic!("expected schema violation, got {other:?}"),
        }
    }

    #[test]
    fn split_list_examples() {
        assert_eq!(split_separated_list("bowl; spoon"), vec!["bowl", "spoon"]);
        assert_eq!(split_separated_list(""), Vec::<String>::new());
        assert_eq!(split_separated_list("knife"), vec!["knife"]);
        // order and duplicates preserved
        assert_eq!(split_separated_list("b;a;b"), vec!["b", "a", "b"]);
    }

    #[test]
    fn split_list_rejoins_idempotently() {
        let once = split_separated_list(" bowl ;; spoon ; ");
        let again = split_separated_list(&join_separated_list(&once));
        assert_eq!(once, again);
    }

    #[test]
    fn roundtrip_identity_for_accepted_documents() {
        let raw = r#"{"id":"p1","title":"T","steps":[
            {"step":"Scrub the tray.","order":1,"tools":"brush; soap","actions":"scrub"},
            {"step":"Dry it.","order":2,"actions":"dry"}
        ]}"#;
        let doc = parse_stage_document(raw, Stage::S6Actions).unwrap();
        let text = serialize_stage_document(&doc);
        let doc2 = parse_stage_document(&text, Stage::S6Actions).unwrap();
        assert_eq!(doc, doc2);
        // and the serialized form itself is a fixed point
        assert_eq!(text, serialize_stage_document(&doc2));
    }

    #[test]
    fn transition_s2_to_s3_removes_incorrect() {
        let before = s2_doc(&[
            ("Rinse it.", Validation::Correct, None),
            ("Do not drop it.", Validation::Incorrect, Some("prohibition")),
        ]);
        let after = StageDocument::new(Stage::S3Filtered, vec![StepRecord::draft("Rinse it.")]);
        assert_eq!(validate_stage_transition(&before, &after).unwrap(), vec![]);
    }

    #[test]
    fn transition_flags_retained_incorrect_step() {
        let before = s2_doc(&[
            ("Rinse it.", Validation::Correct, None),
            ("Do not drop it.", Validation::Incorrect, Some("prohibition")),
        ]);
        let after = StageDocument::new(
            Stage::S3Filtered,
            vec![StepRecord::draft("Rinse it."), StepRecord::draft("Do not drop it.")],
        );
        let violations = validate_stage_transition(&before, &after).unwrap();
        assert!(violations
            .iter()
            .any(|v| v.code == TransitionCode::IncorrectStepRetained));
    }

    #[test]
    fn transition_flags_text_mutation() {
        let before = StageDocument::new(Stage::S3Filtered, vec![StepRecord::draft("Rinse the keyboard.")]);
        let after = StageDocument::new(
            Stage::S4Ordered,
            vec![StepRecord {
                text: "Rinse thoroughly.".into(),
                order: Some(1),
                ..StepRecord::default()
            }],
        );
        let violations = validate_stage_transition(&before, &after).unwrap();
        assert!(violations.iter().any(|v| v.code == TransitionCode::TextMutated));
    }

    #[test]
    fn transition_flags_order_mutation() {
        let before = StageDocument::new(
            Stage::S4Ordered,
            vec![StepRecord {
                text: "Rinse it.".into(),
                order: Some(1),
                ..StepRecord::default()
            }],
        );
        let after = StageDocument::new(
            Stage::S5Tools,
            vec![StepRecord {
                text: "Rinse it.".into(),
                order: Some(2),
                ..StepRecord::default()
            }],
        );
        let violations = validate_stage_transition(&before, &after).unwrap();
        assert!(violations.iter().any(|v| v.code == TransitionCode::OrderMutated));
    }

    #[test]
    fn transition_tolerates_whitespace_noise() {
        let before = StageDocument::new(Stage::S3Filtered, vec![StepRecord::draft("Rinse  the\tkeyboard.")]);
        let after = StageDocument::new(
            Stage::S4Ordered,
            vec![StepRecord {
                text: "Rinse the keyboard.".into(),
                order: Some(1),
                ..StepRecord::default()
            }],
        );
        assert_eq!(validate_stage_transition(&before, &after).unwrap(), vec![]);
    }

    #[test]
    fn transition_requires_consecutive_stages() {
        let before = StageDocument::new(Stage::S1Draft, vec![]);
        let after = StageDocument::new(Stage::S3Filtered, vec![]);
        assert!(validate_stage_transition(&before, &after).is_err());
    }

    #[test]
    fn procedure_text_rejects_empty_body() {
        assert!(ProcedureText::new("p1", "Title", "   ").is_err());
        assert!(ProcedureText::from_input_text("p1", "Title only\n\n  \n").is_err());
    }

    #[test]
    fn procedure_text_from_input_splits_title() {
        let p = ProcedureText::from_input_text("p1", "Watering\n\nFill the bucket. Pour it.\n").unwrap();
        assert_eq!(p.title, "Watering");
        assert_eq!(p.body, "Fill the bucket. Pour it.");
    }
}
