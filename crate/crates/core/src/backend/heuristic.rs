//! Deterministic rule-based backend.
//!
//! Stands in for a language model during offline runs and tests: the same
//! input always yields byte-identical replies, and every reply satisfies the
//! stage schema it is asked for, so pipeline runs never retry. The rules are
//! simple (sentence segmentation, anti-step phrase patterns, a verb lexicon
//! for actions, a tool lexicon for tools) and documented as heuristics, not
//! as linguistics.

use super::{Backend, BackendError, CompletionRequest};
use crate::domain::{
    parse_stage_document, serialize_stage_document, ProcedureText, Stage, StageDocument,
    StepRecord, Validation,
};
use crate::kg::{build_graph, emit_turtle, OntologyTerms};
use std::collections::BTreeSet;
use std::path::Path;
use std::sync::OnceLock;

const BUNDLED_VERBS: &str = include_str!("../../data/lexicons/verbs.txt");
const BUNDLED_TOOLS: &str = include_str!("../../data/lexicons/tools.txt");

/// Sentence-final abbreviations that must not split (stored without the
/// final dot, lowercase).
const ABBREVIATIONS: &[&str] = &[
    "e.g", "i.e", "etc", "cf", "vs", "approx", "min", "max", "no", "fig", "mr", "mrs", "ms", "dr",
    "prof", "sr", "jr", "st", "dept", "inc",
];

/// Verb and tool word lists driving the heuristic rules.
#[derive(Debug, Clone)]
pub struct Lexicons {
    verbs: BTreeSet<String>,
    tools: Vec<String>,
}

impl Lexicons {
    /// Parses lexicon text: one lowercase entry per line, `#` comments.
    pub fn parse(verbs_text: &str, tools_text: &str) -> Lexicons {
        let entries = |text: &str| {
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(str::to_lowercase)
                .collect::<Vec<_>>()
        };
        Lexicons {
            verbs: entries(verbs_text).into_iter().collect(),
            tools: entries(tools_text),
        }
    }

    pub fn from_files(verbs: &Path, tools: &Path) -> std::io::Result<Lexicons> {
        Ok(Lexicons::parse(
            &std::fs::read_to_string(verbs)?,
            &std::fs::read_to_string(tools)?,
        ))
    }

    /// The word lists compiled into the crate.
    pub fn bundled() -> &'static Lexicons {
        static BUNDLED: OnceLock<Lexicons> = OnceLock::new();
        BUNDLED.get_or_init(|| Lexicons::parse(BUNDLED_VERBS, BUNDLED_TOOLS))
    }

    pub fn is_verb(&self, word: &str) -> bool {
        self.verbs.contains(&word.to_lowercase())
    }

    pub fn tool_entries(&self) -> impl Iterator<Item = &str> {
        self.tools.iter().map(String::as_str)
    }
}

/// A case-insensitive sentence form that disqualifies a sentence from being
/// a step, with the reason reported for it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AntiStepPattern {
    pub pattern: &'static str,
    pub label: &'static str,
}

/// The shipped pattern set, longest match first so that "you may want to"
/// wins over "you may".
pub fn shipped_anti_step_patterns() -> &'static [AntiStepPattern] {
    &[
        AntiStepPattern { pattern: "pay attention not to", label: "warning, not an instruction" },
        AntiStepPattern { pattern: "be careful not to", label: "warning, not an instruction" },
        AntiStepPattern { pattern: "you may want to", label: "optional suggestion, not an instruction" },
        AntiStepPattern { pattern: "you may", label: "optional suggestion, not an instruction" },
        AntiStepPattern { pattern: "do not", label: "prohibition, not an instruction" },
    ]
}

/// Outcome of [`classify_sentence`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SentenceClass {
    Step,
    NotStep { reason: String },
}

/// Finds `phrase` in `text` at word boundaries, case-insensitively.
/// Returns the byte span in the lowercased text.
fn find_phrase(text_lower: &str, phrase: &str) -> Option<(usize, usize)> {
    let mut from = 0;
    while let Some(rel) = text_lower[from..].find(phrase) {
        let start = from + rel;
        let end = start + phrase.len();
        let before_ok = text_lower[..start]
            .chars()
            .next_back()
            .map_or(true, |c| !c.is_alphanumeric());
        let after_ok = text_lower[end..]
            .chars()
            .next()
            .map_or(true, |c| !c.is_alphanumeric());
        if before_ok && after_ok {
            return Some((start, end));
        }
        from = start + 1;
    }
    None
}

fn words_of(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split_whitespace()
        .map(|w| {
            w.trim_matches(|c: char| !c.is_alphanumeric())
                .to_lowercase()
        })
        .filter(|w| !w.is_empty())
}

/// Decides whether a sentence is an actual step.
///
/// A sentence is not a step when an anti-step pattern fires (prohibitions,
/// warnings, optional suggestions) or when it contains no action verb from
/// the lexicon at all.
pub fn classify_sentence(
    sentence: &str,
    patterns: &[AntiStepPattern],
    lexicons: &Lexicons,
) -> SentenceClass {
    let lower = sentence.to_lowercase();
    for p in patterns {
        if find_phrase(&lower, p.pattern).is_some() {
            return SentenceClass::NotStep {
                reason: p.label.to_string(),
            };
        }
    }
    if words_of(sentence).any(|w| lexicons.is_verb(&w)) {
        SentenceClass::Step
    } else {
        SentenceClass::NotStep {
            reason: "no action to perform".to_string(),
        }
    }
}

/// Splits instructional prose into sentences.
///
/// Boundaries are `.`, `!` or `?` followed by whitespace and then an
/// uppercase letter or digit; a dot directly after a known abbreviation does
/// not split. This is a heuristic tuned for procedure text, not a general
/// segmenter.
pub fn split_sentences(text: &str) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let mut sentences = Vec::new();
    let mut start = 0usize;
    let mut i = 0usize;
    while i < chars.len() {
        let c = chars[i];
        if c == '.' || c == '!' || c == '?' {
            // collapse terminator runs ("Wait...") onto the last one
            while i + 1 < chars.len() && matches!(chars[i + 1], '.' | '!' | '?') {
                i += 1;
            }
            let mut j = i + 1;
            let mut saw_space = false;
            while j < chars.len() && chars[j].is_whitespace() {
                saw_space = true;
                j += 1;
            }
            let next_starts_sentence =
                j < chars.len() && (chars[j].is_uppercase() || chars[j].is_ascii_digit());
            let abbreviation = c == '.' && {
                let mut w = i;
                while w > start && !chars[w - 1].is_whitespace() {
                    w -= 1;
                }
                let word: String = chars[w..i].iter().collect::<String>().to_lowercase();
                ABBREVIATIONS.contains(&word.trim_end_matches('.'))
            };
            if saw_space && next_starts_sentence && !abbreviation {
                let sentence: String = chars[start..=i].iter().collect();
                let sentence = sentence.trim().to_string();
                if !sentence.is_empty() {
                    sentences.push(sentence);
                }
                start = j;
                i = j;
                continue;
            }
        }
        i += 1;
    }
    let tail: String = chars[start..].iter().collect();
    let tail = tail.trim().to_string();
    if !tail.is_empty() {
        sentences.push(tail);
    }
    sentences
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum HeuristicError {
    #[error("stage input invalid: {0}")]
    BadInput(String),
    #[error("could not identify the pipeline stage from the prompt")]
    UnknownStage,
}

/// Which prompt a rendered request belongs to. Detection picks the stage
/// whose marker phrase occurs earliest: instruction text precedes any
/// payload that might echo a marker.
fn detect_stage(prompt: &str) -> Option<u8> {
    const MARKERS: &[(u8, &str)] = &[
        (1, "find all relevant steps of a procedure"),
        (2, "check if the steps you previously identified"),
        (3, "remove from the json all the dictionaries"),
        (4, "number the steps, based on their order"),
        (5, "find the tools explicitly mentioned"),
        (6, "find the actions explicitly mentioned"),
        (7, "convert the procedure included in the json"),
    ];
    MARKERS
        .iter()
        .filter_map(|(stage, marker)| prompt.find(marker).map(|pos| (pos, *stage)))
        .min()
        .map(|(_, stage)| stage)
}

/// The instruction line that immediately precedes the stage input in each
/// prompt; everything after it is the payload to work on.
fn tail_anchor(stage: u8) -> &'static str {
    match stage {
        1 => "Extract steps from the following text, using the same json structure as in the example.",
        2 => "Add the validation and reason in the json.",
        3 => "Remove the incorrect steps from your json output, and remove the validation and reason keys from the other steps.",
        4 => "Number the steps of your json output.",
        5 => "Find the tools explicitly mentioned in the steps of your output, and add them to the json, if any.",
        6 => "Find the actions in the steps of your output, and add them to the json.",
        7 => "Generate your RDF graph.",
        _ => unreachable!("stages are 1..=7"),
    }
}

fn extract_stage_input(prompt: &str, stage: u8) -> Option<String> {
    let anchor = tail_anchor(stage);
    let mut offset = 0usize;
    for line in prompt.split_inclusive('\n') {
        if line.trim() == anchor {
            let rest = &prompt[offset + line.len()..];
            return Some(rest.trim().to_string());
        }
        offset += line.len();
    }
    None
}

fn parse_input(raw: &str, stage: Stage) -> Result<StageDocument, HeuristicError> {
    parse_stage_document(raw, stage).map_err(|e| HeuristicError::BadInput(e.to_string()))
}

/// Tools mentioned in a step text: lexicon entries matched at word
/// boundaries, ordered by first occurrence, longer match winning when one
/// entry's occurrence sits inside another's.
fn tools_in(text: &str, lexicons: &Lexicons) -> Vec<String> {
    let lower = text.to_lowercase();
    let mut matches: Vec<(usize, usize, &str)> = lexicons
        .tool_entries()
        .filter_map(|entry| find_phrase(&lower, entry).map(|(s, e)| (s, e, entry)))
        .collect();
    matches.sort_by(|a, b| (a.0, std::cmp::Reverse(a.1 - a.0)).cmp(&(b.0, std::cmp::Reverse(b.1 - b.0))));
    let mut kept: Vec<(usize, usize, &str)> = Vec::new();
    for m in matches {
        if !kept.iter().any(|k| k.0 <= m.0 && m.1 <= k.1) {
            kept.push(m);
        }
    }
    kept.into_iter().map(|(_, _, entry)| entry.to_string()).collect()
}

/// Actions of a step: the leading verb plus verbs right after coordinating
/// conjunctions, lowercased and deduplicated. Falls back to the first word
/// so a step never ends up without an action.
fn actions_in(text: &str, lexicons: &Lexicons) -> Vec<String> {
    let words: Vec<String> = words_of(text).collect();
    let mut actions: Vec<String> = Vec::new();
    let mut push = |w: &str| {
        if !actions.iter().any(|a| a == w) {
            actions.push(w.to_string());
        }
    };
    if let Some(first) = words.first() {
        if lexicons.is_verb(first) {
            push(first);
        }
    }
    for pair in words.windows(2) {
        if matches!(pair[0].as_str(), "and" | "or" | "then") && lexicons.is_verb(&pair[1]) {
            push(&pair[1]);
        }
    }
    if actions.is_empty() {
        actions.push(words.first().cloned().unwrap_or_else(|| "act".to_string()));
    }
    actions
}

/// Produces the deterministic reply for one pipeline stage.
///
/// Given input that is valid for the stage, the reply always parses as the
/// stage's output kind, so the deterministic backend never triggers retries.
pub fn heuristic_stage_reply(
    stage: u8,
    stage_input: &str,
    lexicons: &Lexicons,
    terms: &OntologyTerms,
) -> Result<String, HeuristicError> {
    match stage {
        1 => {
            let steps = split_sentences(stage_input)
                .into_iter()
                .map(StepRecord::draft)
                .collect();
            Ok(serialize_stage_document(&StageDocument::new(Stage::S1Draft, steps)))
        }
        2 => {
            let mut doc = parse_input(stage_input, Stage::S1Draft)?;
            doc.stage = Stage::S2Validated;
            let patterns = shipped_anti_step_patterns();
            for step in &mut doc.steps {
                match classify_sentence(&step.text, patterns, lexicons) {
                    SentenceClass::Step => step.validation = Some(Validation::Correct),
                    SentenceClass::NotStep { reason } => {
                        step.validation = Some(Validation::Incorrect);
                        step.reason = Some(reason);
                    }
                }
            }
            Ok(serialize_stage_document(&doc))
        }
        3 => {
            let mut doc = parse_input(stage_input, Stage::S2Validated)?;
            doc.stage = Stage::S3Filtered;
            doc.steps.retain(|s| s.validation == Some(Validation::Correct));
            for step in &mut doc.steps {
                step.validation = None;
                step.reason = None;
            }
            Ok(serialize_stage_document(&doc))
        }
        4 => {
            let mut doc = parse_input(stage_input, Stage::S3Filtered)?;
            doc.stage = Stage::S4Ordered;
            for (i, step) in doc.steps.iter_mut().enumerate() {
                step.order = Some(i as u32 + 1);
            }
            Ok(serialize_stage_document(&doc))
        }
        5 => {
            let mut doc = parse_input(stage_input, Stage::S4Ordered)?;
            doc.stage = Stage::S5Tools;
            for step in &mut doc.steps {
                step.tools = tools_in(&step.text, lexicons);
            }
            Ok(serialize_stage_document(&doc))
        }
        6 => {
            let mut doc = parse_input(stage_input, Stage::S5Tools)?;
            doc.stage = Stage::S6Actions;
            for step in &mut doc.steps {
                step.actions = actions_in(&step.text, lexicons);
            }
            Ok(serialize_stage_document(&doc))
        }
        7 => {
            let doc = parse_input(stage_input, Stage::S6Actions)?;
            let id = if doc.procedure_id.is_empty() {
                "procedure".to_string()
            } else {
                doc.procedure_id.clone()
            };
            let title = doc.title.clone().unwrap_or_else(|| id.clone());
            let body = doc
                .steps
                .iter()
                .map(|s| s.text.as_str())
                .collect::<Vec<_>>()
                .join(" ");
            let source = ProcedureText::new(id, title, body)
                .map_err(|e| HeuristicError::BadInput(e.to_string()))?;
            let graph = build_graph(&doc, terms, &source)
                .map_err(|e| HeuristicError::BadInput(e.to_string()))?;
            Ok(emit_turtle(&graph))
        }
        other => Err(HeuristicError::BadInput(format!("unknown stage {other}"))),
    }
}

/// The deterministic backend: parses the rendered prompt to find the stage
/// and its payload, then applies the rules. Pure, so trivially `Send + Sync`.
#[derive(Debug, Clone)]
pub struct HeuristicBackend {
    lexicons: Lexicons,
    terms: OntologyTerms,
}

impl HeuristicBackend {
    pub fn new() -> Self {
        HeuristicBackend {
            lexicons: Lexicons::bundled().clone(),
            terms: OntologyTerms::default(),
        }
    }

    pub fn with_lexicons(mut self, lexicons: Lexicons) -> Self {
        self.lexicons = lexicons;
        self
    }

    pub fn with_terms(mut self, terms: OntologyTerms) -> Self {
        self.terms = terms;
        self
    }

    pub fn lexicons(&self) -> &Lexicons {
        &self.lexicons
    }
}

impl Default for HeuristicBackend {
    fn default() -> Self {
        Self::new()
    }
}

impl Backend for HeuristicBackend {
    fn complete(&self, request: &CompletionRequest) -> Result<String, BackendError> {
        let stage = detect_stage(&request.prompt)
            .ok_or_else(|| BackendError::Transport(HeuristicError::UnknownStage.to_string()))?;
        let input = extract_stage_input(&request.prompt, stage).ok_or_else(|| {
            BackendError::Transport(format!("prompt for stage {stage} has no input section"))
        })?;
        heuristic_stage_reply(stage, &input, &self.lexicons, &self.terms)
            .map_err(|e| BackendError::Transport(e.to_string()))
    }
}
