//! The seven-prompt extraction chain.
//!
//! Each prompt renders an instruction template with few-shot example slots
//! (the worked keyboard-cleaning example at every stage) and one input slot
//! carrying the previous stage's output. Stages are independent single-turn
//! requests: the chain re-injects the prior JSON explicitly instead of
//! relying on conversation history, so any backend satisfying the
//! [`Backend`](crate::backend::Backend) contract can run it.
//!
//! Templates and assets are compiled in but can be loaded from a directory
//! (`prompts/p1.txt` … `p7.txt`, `assets/<slot>.txt`) for experimentation.

use crate::backend::{
    extract_json_payload, extract_turtle_payload, Backend, BackendError, CompletionRequest,
};
use crate::domain::{
    parse_stage_document, serialize_stage_document, validate_stage_transition, ProcedureText,
    Stage, StageDocument,
};
use crate::kg::{emit_turtle, parse_turtle, validate_graph, OntologyTerms, ProceduralGraph};
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::time::Instant;

/// Identifier of one prompt in the chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PromptId {
    P1,
    P2,
    P3,
    P4,
    P5,
    P6,
    P7,
}

impl PromptId {
    pub const ALL: [PromptId; 7] = [
        PromptId::P1,
        PromptId::P2,
        PromptId::P3,
        PromptId::P4,
        PromptId::P5,
        PromptId::P6,
        PromptId::P7,
    ];

    pub fn number(self) -> u8 {
        match self {
            PromptId::P1 => 1,
            PromptId::P2 => 2,
            PromptId::P3 => 3,
            PromptId::P4 => 4,
            PromptId::P5 => 5,
            PromptId::P6 => 6,
            PromptId::P7 => 7,
        }
    }
}

impl fmt::Display for PromptId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "P{}", self.number())
    }
}

/// What a stage's reply must parse as.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputKind {
    Document(Stage),
    Turtle,
}

/// One prompt: its instruction template, its example slots and the slot
/// receiving the previous stage's output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StageSpec {
    pub id: PromptId,
    pub template: String,
    pub input_slot: String,
    pub example_slots: Vec<String>,
    pub output_kind: OutputKind,
}

const BUILTIN_TEMPLATES: [&str; 7] = [
    include_str!("../../data/prompts/p1.txt"),
    include_str!("../../data/prompts/p2.txt"),
    include_str!("../../data/prompts/p3.txt"),
    include_str!("../../data/prompts/p4.txt"),
    include_str!("../../data/prompts/p5.txt"),
    include_str!("../../data/prompts/p6.txt"),
    include_str!("../../data/prompts/p7.txt"),
];

const INPUT_SLOTS: [&str; 7] = [
    "procedure_for_llm",
    "initial-steps",
    "correct-incorrect-steps",
    "only-correct-steps",
    "ordered-steps",
    "tools-steps",
    "actions-steps",
];

fn output_kind_of(id: PromptId) -> OutputKind {
    match id {
        PromptId::P1 => OutputKind::Document(Stage::S1Draft),
        PromptId::P2 => OutputKind::Document(Stage::S2Validated),
        PromptId::P3 => OutputKind::Document(Stage::S3Filtered),
        PromptId::P4 => OutputKind::Document(Stage::S4Ordered),
        PromptId::P5 => OutputKind::Document(Stage::S5Tools),
        PromptId::P6 => OutputKind::Document(Stage::S6Actions),
        PromptId::P7 => OutputKind::Turtle,
    }
}

/// Scans `{slot-name}` markers in a template. Braces that do not enclose a
/// well-formed slot name are treated as literal text.
fn template_slots(template: &str) -> Vec<String> {
    let mut slots = Vec::new();
    let bytes = template.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'{' {
            if let Some(rel) = template[i + 1..].find(['}', '{', '\n']) {
                let name = &template[i + 1..i + 1 + rel];
                if template.as_bytes()[i + 1 + rel] == b'}'
                    && !name.is_empty()
                    && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
                {
                    if !slots.contains(&name.to_string()) {
                        slots.push(name.to_string());
                    }
                    i += rel + 2;
                    continue;
                }
            }
        }
        i += 1;
    }
    slots
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ChainError {
    #[error("missing asset for slot {0:?}")]
    MissingAsset(String),
    #[error("prompt {id} is invalid: {reason}")]
    BadSpec { id: PromptId, reason: String },
    #[error("asset {slot:?} is invalid: {reason}")]
    BadAsset { slot: String, reason: String },
    #[error("failed to read {path}: {reason}")]
    Io { path: String, reason: String },
}

impl StageSpec {
    /// Builds a spec from template text, checking that the input slot is
    /// present; all other slots become example slots.
    pub fn from_template(id: PromptId, template: impl Into<String>) -> Result<Self, ChainError> {
        let template = template.into();
        let input_slot = INPUT_SLOTS[id.number() as usize - 1].to_string();
        let slots = template_slots(&template);
        if !slots.contains(&input_slot) {
            return Err(ChainError::BadSpec {
                id,
                reason: format!("template lacks the input slot {{{input_slot}}}"),
            });
        }
        let example_slots = slots.into_iter().filter(|s| *s != input_slot).collect();
        Ok(StageSpec {
            id,
            template,
            input_slot,
            example_slots,
            output_kind: output_kind_of(id),
        })
    }

    /// The compiled-in prompt templates.
    pub fn builtin() -> Vec<StageSpec> {
        PromptId::ALL
            .iter()
            .map(|id| {
                StageSpec::from_template(*id, BUILTIN_TEMPLATES[id.number() as usize - 1])
                    .expect("builtin templates are well-formed")
            })
            .collect()
    }

    /// Loads `p1.txt` … `p7.txt` from a directory.
    pub fn load_dir(dir: &Path) -> Result<Vec<StageSpec>, ChainError> {
        PromptId::ALL
            .iter()
            .map(|id| {
                let path = dir.join(format!("p{}.txt", id.number()));
                let text = std::fs::read_to_string(&path).map_err(|e| ChainError::Io {
                    path: path.display().to_string(),
                    reason: e.to_string(),
                })?;
                StageSpec::from_template(*id, text)
            })
            .collect()
    }
}

/// Few-shot asset texts, keyed by slot name.
#[derive(Debug, Clone, Default)]
pub struct FewShotAssets {
    assets: BTreeMap<String, String>,
}

const BUILTIN_ASSETS: [(&str, &str); 8] = [
    ("keyboard_example", include_str!("../../data/assets/keyboard_example.txt")),
    ("keyboard_initial_steps", include_str!("../../data/assets/keyboard_initial_steps.txt")),
    ("keyboard_correct_incorrect", include_str!("../../data/assets/keyboard_correct_incorrect.txt")),
    ("keyboard_remove_incorrect", include_str!("../../data/assets/keyboard_remove_incorrect.txt")),
    ("keyboard_order", include_str!("../../data/assets/keyboard_order.txt")),
    ("keyboard_tools", include_str!("../../data/assets/keyboard_tools.txt")),
    ("keyboard_actions", include_str!("../../data/assets/keyboard_actions.txt")),
    ("keyboard_ttl", include_str!("../../data/assets/keyboard_ttl.txt")),
];

/// Slots whose assets must parse as stage documents (or as Turtle).
const STAGE_ASSET_SLOTS: [(&str, Stage); 6] = [
    ("keyboard_initial_steps", Stage::S1Draft),
    ("keyboard_correct_incorrect", Stage::S2Validated),
    ("keyboard_remove_incorrect", Stage::S3Filtered),
    ("keyboard_order", Stage::S4Ordered),
    ("keyboard_tools", Stage::S5Tools),
    ("keyboard_actions", Stage::S6Actions),
];

impl FewShotAssets {
    /// The compiled-in keyboard example assets.
    pub fn builtin() -> FewShotAssets {
        FewShotAssets {
            assets: BUILTIN_ASSETS
                .iter()
                .map(|(slot, text)| (slot.to_string(), text.trim_end().to_string()))
                .collect(),
        }
    }

    /// Loads every `<slot>.txt` file from a directory.
    pub fn load_dir(dir: &Path) -> Result<FewShotAssets, ChainError> {
        let mut assets = BTreeMap::new();
        let entries = std::fs::read_dir(dir).map_err(|e| ChainError::Io {
            path: dir.display().to_string(),
            reason: e.to_string(),
        })?;
        for entry in entries {
            let entry = entry.map_err(|e| ChainError::Io {
                path: dir.display().to_string(),
                reason: e.to_string(),
            })?;
            let path = entry.path();
            if path.extension().and_then(|e| e.to_str()) != Some("txt") {
                continue;
            }
            let Some(slot) = path.file_stem().and_then(|s| s.to_str()) else {
                continue;
            };
            let text = std::fs::read_to_string(&path).map_err(|e| ChainError::Io {
                path: path.display().to_string(),
                reason: e.to_string(),
            })?;
            assets.insert(slot.to_string(), text.trim_end().to_string());
        }
        Ok(FewShotAssets { assets })
    }

    pub fn get(&self, slot: &str) -> Option<&str> {
        self.assets.get(slot).map(String::as_str)
    }

    pub fn insert(&mut self, slot: impl Into<String>, text: impl Into<String>) {
        self.assets.insert(slot.into(), text.into());
    }

    /// Checks that every slot the specs reference is present, and that the
    /// canonical stage assets parse as documents of their stage (the turtle
    /// asset as Turtle).
    pub fn validate(&self, specs: &[StageSpec]) -> Result<(), ChainError> {
        for spec in specs {
            for slot in &spec.example_slots {
                if !self.assets.contains_key(slot) {
                    return Err(ChainError::MissingAsset(slot.clone()));
                }
            }
        }
        for (slot, stage) in STAGE_ASSET_SLOTS {
            if let Some(text) = self.get(slot) {
                parse_stage_document(text, stage).map_err(|e| ChainError::BadAsset {
                    slot: slot.to_string(),
                    reason: e.to_string(),
                })?;
            }
        }
        if let Some(ttl) = self.get("keyboard_ttl") {
            parse_turtle(ttl).map_err(|e| ChainError::BadAsset {
                slot: "keyboard_ttl".to_string(),
                reason: e.to_string(),
            })?;
        }
        Ok(())
    }
}

/// Renders a prompt: every slot in the template is substituted from the
/// assets, and the input slot from `stage_input`.
pub fn render_prompt(
    spec: &StageSpec,
    assets: &FewShotAssets,
    stage_input: &str,
) -> Result<String, ChainError> {
    let template = &spec.template;
    let mut out = String::with_capacity(template.len() + stage_input.len());
    let mut rest = template.as_str();
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let after = &rest[open + 1..];
        let close = after.find(['}', '{', '\n']);
        match close {
            Some(end)
                if after.as_bytes()[end] == b'}'
                    && end > 0
                    && after[..end]
                        .chars()
                        .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') =>
            {
                let slot = &after[..end];
                if slot == spec.input_slot {
                    out.push_str(stage_input);
                } else {
                    match assets.get(slot) {
                        Some(text) => out.push_str(text),
                        None => return Err(ChainError::MissingAsset(slot.to_string())),
                    }
                }
                rest = &after[end + 1..];
            }
            _ => {
                out.push('{');
                rest = after;
            }
        }
    }
    out.push_str(rest);
    Ok(out)
}

/// Retry and decoding limits for one pipeline run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunLimits {
    /// Re-prompts allowed per stage after an invalid reply.
    pub max_retries: u32,
    pub temperature: f64,
    pub max_output_tokens: u32,
}

impl Default for RunLimits {
    fn default() -> Self {
        RunLimits {
            max_retries: 2,
            temperature: 0.0,
            max_output_tokens: 4096,
        }
    }
}

/// One backend call within a stage.
#[derive(Debug, Clone, Serialize)]
pub struct AttemptRecord {
    pub prompt: String,
    pub raw_reply: Option<String>,
    pub error: Option<String>,
}

/// Trace of a single stage: every attempt, the retry count and timing.
#[derive(Debug, Clone, Serialize)]
pub struct StageTraceEntry {
    pub stage: String,
    pub attempts: Vec<AttemptRecord>,
    pub retry_count: u32,
    pub duration_ms: u64,
    pub output: Option<String>,
}

/// Full record of a pipeline run, persisted as `trace.json`.
#[derive(Debug, Clone, Default, Serialize)]
pub struct PipelineTrace {
    pub procedure_id: String,
    pub stages: Vec<StageTraceEntry>,
    pub warnings: Vec<String>,
}

impl PipelineTrace {
    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("trace serialization");
        out.push('\n');
        out
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StageError {
    /// Transport or auth failure; not retried.
    #[error("backend error at {stage}: {source}")]
    Backend {
        stage: PromptId,
        source: BackendError,
    },
    /// Replies stayed invalid after all allowed retries.
    #[error("stage {stage} failed after {attempts} attempts: {last_error}")]
    Failed {
        stage: PromptId,
        attempts: u32,
        last_error: String,
    },
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PipelineError {
    #[error("invalid procedure: {0}")]
    InvalidProcedure(String),
    #[error(transparent)]
    Stage(#[from] StageError),
    /// No step survived the correctness filter; prompts 4..7 presuppose
    /// steps exist.
    #[error("no steps survived filtering: the procedure has no actual steps")]
    EmptyProcedure,
    #[error("graph invalid after {attempts} attempts: {reason}")]
    GraphInvalid { attempts: u32, reason: String },
    #[error(transparent)]
    Chain(#[from] ChainError),
}

/// Output of one stage run.
#[derive(Debug, Clone)]
pub enum StageOutput {
    Document(StageDocument),
    Turtle(ProceduralGraph),
}

fn run_attempts<T>(
    spec: &StageSpec,
    assets: &FewShotAssets,
    backend: &dyn Backend,
    stage_input: &str,
    limits: &RunLimits,
    retry_note: &str,
    mut parse: impl FnMut(&str) -> Result<T, String>,
) -> Result<(Result<T, StageError>, StageTraceEntry), ChainError> {
    let base_prompt = render_prompt(spec, assets, stage_input)?;
    let started = Instant::now();
    let mut attempts: Vec<AttemptRecord> = Vec::new();
    let mut prompt = base_prompt.clone();
    let mut last_error = String::new();

    for _ in 0..=limits.max_retries {
        let request = CompletionRequest {
            prompt: prompt.clone(),
            temperature: limits.temperature,
            max_output_tokens: limits.max_output_tokens,
            stop_sequences: Vec::new(),
        };
        let reply = match backend.complete(&request) {
            Ok(reply) => reply,
            Err(e) => {
                attempts.push(AttemptRecord {
                    prompt: prompt.clone(),
                    raw_reply: None,
                    error: Some(e.to_string()),
                });
                let entry = trace_entry(spec.id, attempts, started, None);
                return Ok((
                    Err(StageError::Backend {
                        stage: spec.id,
                        source: e,
                    }),
                    entry,
                ));
            }
        };
        match parse(&reply) {
            Ok(output) => {
                attempts.push(AttemptRecord {
                    prompt: prompt.clone(),
                    raw_reply: Some(reply),
                    error: None,
                });
                let entry = trace_entry(spec.id, attempts, started, None);
                return Ok((Ok(output), entry));
            }
            Err(e) => {
                attempts.push(AttemptRecord {
                    prompt: prompt.clone(),
                    raw_reply: Some(reply),
                    error: Some(e.clone()),
                });
                last_error = e;
                prompt = format!(
                    "{base_prompt}\n\nYour previous output was invalid: {last_error}. Return only corrected {retry_note}."
                );
            }
        }
    }
    let total = attempts.len() as u32;
    let entry = trace_entry(spec.id, attempts, started, None);
    Ok((
        Err(StageError::Failed {
            stage: spec.id,
            attempts: total,
            last_error,
        }),
        entry,
    ))
}

fn trace_entry(
    id: PromptId,
    attempts: Vec<AttemptRecord>,
    started: Instant,
    output: Option<String>,
) -> StageTraceEntry {
    StageTraceEntry {
        stage: id.to_string(),
        retry_count: attempts.len().saturating_sub(1) as u32,
        attempts,
        duration_ms: started.elapsed().as_millis() as u64,
        output,
    }
}

/// Runs one stage: render, complete, extract the payload, parse, and retry
/// with the error appended while the reply stays invalid.
pub fn run_stage(
    spec: &StageSpec,
    assets: &FewShotAssets,
    backend: &dyn Backend,
    stage_input: &str,
    limits: &RunLimits,
) -> Result<(StageOutput, StageTraceEntry), PipelineError> {
    match spec.output_kind {
        OutputKind::Document(stage) => {
            let (result, mut entry) =
                run_attempts(spec, assets, backend, stage_input, limits, "JSON", |reply| {
                    let payload = extract_json_payload(reply).map_err(|e| e.to_string())?;
                    parse_stage_document(&payload, stage).map_err(|e| e.to_string())
                })?;
            let doc = result?;
            entry.output = Some(serialize_stage_document(&doc));
            Ok((StageOutput::Document(doc), entry))
        }
        OutputKind::Turtle => {
            let (result, mut entry) =
                run_attempts(spec, assets, backend, stage_input, limits, "Turtle", |reply| {
                    parse_turtle(&extract_turtle_payload(reply)).map_err(|e| e.to_string())
                })?;
            let graph = result?;
            entry.output = Some(emit_turtle(&graph));
            Ok((StageOutput::Turtle(graph), entry))
        }
    }
}

/// The result of a successful pipeline run.
#[derive(Debug, Clone)]
pub struct PipelineRun {
    pub trace: PipelineTrace,
    /// Stage documents S1..S6 with procedure identity attached.
    pub stages: Vec<StageDocument>,
    pub graph: ProceduralGraph,
    /// Canonical Turtle serialization of `graph`.
    pub turtle: String,
}

/// A failed run still carries its trace and completed stages.
#[derive(Debug, Clone)]
pub struct PipelineFailure {
    pub trace: PipelineTrace,
    pub stages: Vec<StageDocument>,
    pub error: PipelineError,
}

/// Everything a pipeline run needs besides the procedure itself.
pub struct ChainConfig {
    pub specs: Vec<StageSpec>,
    pub assets: FewShotAssets,
    pub terms: OntologyTerms,
    pub limits: RunLimits,
}

impl Default for ChainConfig {
    fn default() -> Self {
        ChainConfig {
            specs: StageSpec::builtin(),
            assets: FewShotAssets::builtin(),
            terms: OntologyTerms::default(),
            limits: RunLimits::default(),
        }
    }
}

/// Runs prompts P1..P7 over a procedure, each stage consuming the previous
/// stage's output, and parses the final reply into a validated graph.
///
/// Stage-transition violations are recorded as trace warnings; schema
/// failures retry per [`RunLimits`]; a P7 reply that stays unparseable or
/// fails graph validation after retries aborts with `GraphInvalid`.
pub fn run_pipeline(
    procedure: &ProcedureText,
    backend: &dyn Backend,
    config: &ChainConfig,
) -> Result<PipelineRun, Box<PipelineFailure>> {
    let mut trace = PipelineTrace {
        procedure_id: procedure.id.clone(),
        ..PipelineTrace::default()
    };
    let mut stages: Vec<StageDocument> = Vec::new();

    let fail = |trace: PipelineTrace, stages: Vec<StageDocument>, error: PipelineError| {
        Err(Box::new(PipelineFailure { trace, stages, error }))
    };

    if procedure.body.trim().is_empty() {
        return fail(
            trace,
            stages,
            PipelineError::InvalidProcedure("procedure body is empty".into()),
        );
    }
    if let Err(e) = config.assets.validate(&config.specs) {
        return fail(trace, stages, e.into());
    }

    let mut stage_input = procedure.body.clone();
    for spec in config.specs.iter().filter(|s| s.id != PromptId::P7) {
        match run_stage(spec, &config.assets, backend, &stage_input, &config.limits) {
            Ok((StageOutput::Document(doc), entry)) => {
                trace.stages.push(entry);
                let doc = doc.with_procedure(&procedure.id, Some(&procedure.title));
                if let Some(previous) = stages.last() {
                    match validate_stage_transition(previous, &doc) {
                        Ok(violations) => {
                            for v in violations {
                                trace.warnings.push(format!("{} -> {}: {}", previous.stage, doc.stage, v));
                            }
                        }
                        Err(e) => trace.warnings.push(e.to_string()),
                    }
                }
                if doc.stage >= Stage::S3Filtered && doc.steps.is_empty() {
                    stages.push(doc);
                    return fail(trace, stages, PipelineError::EmptyProcedure);
                }
                stage_input = serialize_stage_document(&doc);
                stages.push(doc);
            }
            Ok((StageOutput::Turtle(_), _)) => unreachable!("P7 is excluded from this loop"),
            Err(e) => return fail(trace, stages, e),
        }
    }

    // P7: parse AND validate the graph within the retry loop.
    let p7 = config
        .specs
        .iter()
        .find(|s| s.id == PromptId::P7)
        .expect("chain config includes P7");
    let (result, mut entry) = match run_attempts(
        p7,
        &config.assets,
        backend,
        &stage_input,
        &config.limits,
        "Turtle",
        |reply| {
            let graph =
                parse_turtle(&extract_turtle_payload(reply)).map_err(|e| e.to_string())?;
            let violations = validate_graph(&graph, &config.terms, procedure);
            if violations.is_empty() {
                Ok(graph)
            } else {
                let summary = violations
                    .iter()
                    .map(|v| v.to_string())
                    .collect::<Vec<_>>()
                    .join("; ");
                Err(format!("graph validation failed: {summary}"))
            }
        },
    ) {
        Ok(pair) => pair,
        Err(e) => return fail(trace, stages, e.into()),
    };
    match result {
        Ok(graph) => {
            let turtle = emit_turtle(&graph);
            entry.output = Some(turtle.clone());
            trace.stages.push(entry);
            Ok(PipelineRun {
                trace,
                stages,
                graph,
                turtle,
            })
        }
        Err(StageError::Backend { stage, source }) => {
            trace.stages.push(entry);
            fail(trace, stages, StageError::Backend { stage, source }.into())
        }
        Err(StageError::Failed { attempts, last_error, .. }) => {
            trace.stages.push(entry);
            fail(
                trace,
                stages,
                PipelineError::GraphInvalid {
                    attempts,
                    reason: last_error,
                },
            )
        }
    }
}
