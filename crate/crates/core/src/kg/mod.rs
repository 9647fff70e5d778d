//! Procedural knowledge graphs: IRI minting, graph construction from an S6
//! stage document, Turtle serialization/parsing and shape validation.
//!
//! The ontology is deliberately small: classes `Procedure`, `Step`, `Action`
//! and `Tool`; properties `hasStep`, `hasAction`, `usesTool` and
//! `stepNumber`; plus `rdf:type` and `rdfs:label`. Term IRIs default to an
//! example namespace and can be overridden with a terms config file.

mod turtle;

pub use turtle::{emit_turtle, parse_turtle, TurtleError};

use crate::domain::{check_stage_invariants, normalize_ws, DocumentError, ProcedureText, Stage, StageDocument};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
pub const RDFS_LABEL: &str = "http://www.w3.org/2000/01/rdf-schema#label";

const DEFAULT_ONTOLOGY_NS: &str = "https://example.org/pko#";
const DEFAULT_BASE_NS: &str = "https://example.org/resource/";

/// An absolute IRI.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Iri(String);

impl Iri {
    pub fn new(iri: impl Into<String>) -> Self {
        Iri(iri.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Object position of a triple: an IRI or a literal.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RdfTerm {
    Iri(Iri),
    String(String),
    Integer(i64),
}

impl RdfTerm {
    /// Lexical form used for deterministic object ordering.
    pub fn lexical(&self) -> String {
        match self {
            RdfTerm::Iri(iri) => iri.as_str().to_string(),
            RdfTerm::String(s) => s.clone(),
            RdfTerm::Integer(i) => i.to_string(),
        }
    }

    pub fn as_iri(&self) -> Option<&Iri> {
        match self {
            RdfTerm::Iri(iri) => Some(iri),
            _ => None,
        }
    }

    pub fn as_string(&self) -> Option<&str> {
        match self {
            RdfTerm::String(s) => Some(s),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Triple {
    pub subject: Iri,
    pub predicate: Iri,
    pub object: RdfTerm,
}

impl Triple {
    pub fn new(subject: Iri, predicate: Iri, object: RdfTerm) -> Self {
        Triple { subject, predicate, object }
    }
}

/// An in-memory triple set with a prefix table.
///
/// Graphs compare equal on their triple sets; the prefix table only informs
/// serialization (unused prefixes are never emitted).
#[derive(Debug, Clone, Default)]
pub struct ProceduralGraph {
    triples: BTreeSet<Triple>,
    prefixes: BTreeMap<String, String>,
}

impl PartialEq for ProceduralGraph {
    fn eq(&self, other: &Self) -> bool {
        self.triples == other.triples
    }
}

impl Eq for ProceduralGraph {}

impl ProceduralGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, triple: Triple) {
        self.triples.insert(triple);
    }

    pub fn add_prefix(&mut self, label: impl Into<String>, namespace: impl Into<String>) {
        self.prefixes.insert(label.into(), namespace.into());
    }

    pub fn triples(&self) -> impl Iterator<Item = &Triple> {
        self.triples.iter()
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn prefixes(&self) -> &BTreeMap<String, String> {
        &self.prefixes
    }

    /// Subjects typed as `class` via `rdf:type`.
    pub fn instances_of(&self, class: &Iri) -> Vec<&Iri> {
        let rdf_type = Iri::new(RDF_TYPE);
        self.triples
            .iter()
            .filter(|t| t.predicate == rdf_type && t.object.as_iri() == Some(class))
            .map(|t| &t.subject)
            .collect()
    }

    /// Objects of `(subject, predicate, _)` triples.
    pub fn objects(&self, subject: &Iri, predicate: &Iri) -> Vec<&RdfTerm> {
        self.triples
            .iter()
            .filter(|t| &t.subject == subject && &t.predicate == predicate)
            .map(|t| &t.object)
            .collect()
    }
}

/// The ontology contract: class and property IRIs plus the instance
/// namespace used for minting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OntologyTerms {
    pub base_namespace: String,
    pub ontology_namespace: String,
    pub procedure_class: Iri,
    pub step_class: Iri,
    pub action_class: Iri,
    pub tool_class: Iri,
    pub has_step: Iri,
    pub has_action: Iri,
    pub uses_tool: Iri,
    pub step_number: Iri,
    pub rdf_type: Iri,
    pub rdfs_label: Iri,
    /// prefix label -> namespace, used when emitting Turtle
    pub prefixes: BTreeMap<String, String>,
}

impl Default for OntologyTerms {
    fn default() -> Self {
        let ont = DEFAULT_ONTOLOGY_NS;
        let mut prefixes = BTreeMap::new();
        prefixes.insert("pko".to_string(), ont.to_string());
        prefixes.insert("ex".to_string(), DEFAULT_BASE_NS.to_string());
        prefixes.insert(
            "rdf".to_string(),
            "http://www.w3.org/1999/02/22-rdf-syntax-ns#".to_string(),
        );
        prefixes.insert(
            "rdfs".to_string(),
            "http://www.w3.org/2000/01/rdf-schema#".to_string(),
        );
        OntologyTerms {
            base_namespace: DEFAULT_BASE_NS.to_string(),
            ontology_namespace: ont.to_string(),
            procedure_class: Iri::new(format!("{ont}Procedure")),
            step_class: Iri::new(format!("{ont}Step")),
            action_class: Iri::new(format!("{ont}Action")),
            tool_class: Iri::new(format!("{ont}Tool")),
            has_step: Iri::new(format!("{ont}hasStep")),
            has_action: Iri::new(format!("{ont}hasAction")),
            uses_tool: Iri::new(format!("{ont}usesTool")),
            step_number: Iri::new(format!("{ont}stepNumber")),
            rdf_type: Iri::new(RDF_TYPE),
            rdfs_label: Iri::new(RDFS_LABEL),
            prefixes,
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TermsConfig {
    base_namespace: Option<String>,
    ontology_namespace: Option<String>,
    procedure_class: Option<String>,
    step_class: Option<String>,
    action_class: Option<String>,
    tool_class: Option<String>,
    has_step: Option<String>,
    has_action: Option<String>,
    uses_tool: Option<String>,
    step_number: Option<String>,
    prefixes: Option<BTreeMap<String, String>>,
}

impl OntologyTerms {
    /// Loads a terms config (JSON object mapping role names to IRIs).
    /// Roles absent from the file keep their defaults.
    pub fn from_config_json(json: &str) -> Result<Self, GraphError> {
        let cfg: TermsConfig =
            serde_json::from_str(json).map_err(|e| GraphError::BadTermsConfig(e.to_string()))?;
        let mut terms = OntologyTerms::default();
        if let Some(ns) = cfg.base_namespace {
            terms.base_namespace = ns;
        }
        if let Some(ns) = cfg.ontology_namespace {
            terms.ontology_namespace = ns;
        }
        let set = |slot: &mut Iri, value: Option<String>| {
            if let Some(v) = value {
                *slot = Iri::new(v);
            }
        };
        set(&mut terms.procedure_class, cfg.procedure_class);
        set(&mut terms.step_class, cfg.step_class);
        set(&mut terms.action_class, cfg.action_class);
        set(&mut terms.tool_class, cfg.tool_class);
        set(&mut terms.has_step, cfg.has_step);
        set(&mut terms.has_action, cfg.has_action);
        set(&mut terms.uses_tool, cfg.uses_tool);
        set(&mut terms.step_number, cfg.step_number);
        if let Some(p) = cfg.prefixes {
            terms.prefixes = p;
        }
        for iri in [
            &terms.procedure_class,
            &terms.step_class,
            &terms.action_class,
            &terms.tool_class,
            &terms.has_step,
            &terms.has_action,
            &terms.uses_tool,
            &terms.step_number,
        ] {
            if !iri.as_str().contains("://") {
                return Err(GraphError::BadTermsConfig(format!(
                    "term {iri} is not an absolute IRI"
                )));
            }
        }
        Ok(terms)
    }

    /// The set of predicates a procedural graph may use.
    pub fn allowed_predicates(&self) -> BTreeSet<&Iri> {
        [
            &self.rdf_type,
            &self.rdfs_label,
            &self.has_step,
            &self.has_action,
            &self.uses_tool,
            &self.step_number,
        ]
        .into_iter()
        .collect()
    }
}

/// Kinds of instances an IRI can be minted for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InstanceKind {
    Procedure,
    Step,
    Action,
    Tool,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GraphError {
    #[error("unsluggable key: {0:?} has no alphanumeric characters")]
    UnsluggableKey(String),
    #[error("{0}")]
    Schema(#[from] DocumentError),
    #[error("bad terms config: {0}")]
    BadTermsConfig(String),
}

/// Lowercases, maps non-alphanumerics to `-`, collapses repeats and trims.
pub fn slug(key: &str) -> Option<String> {
    let mut out = String::with_capacity(key.len());
    let mut last_dash = true; // suppress leading dashes
    for c in key.chars() {
        if c.is_ascii_alphanumeric() {
            out.push(c.to_ascii_lowercase());
            last_dash = false;
        } else if !last_dash {
            out.push('-');
            last_dash = true;
        }
    }
    while out.ends_with('-') {
        out.pop();
    }
    if out.is_empty() {
        None
    } else {
        Some(out)
    }
}

/// Mints a deterministic instance IRI.
///
/// Actions and tools with the same surface form (same slug) share one
/// instance within a procedure; steps are keyed by their order number.
pub fn mint_iri(
    kind: InstanceKind,
    key: &str,
    procedure_id: &str,
    terms: &OntologyTerms,
) -> Result<Iri, GraphError> {
    if key.is_empty() {
        return Err(GraphError::UnsluggableKey(String::new()));
    }
    let base = &terms.base_namespace;
    let iri = match kind {
        InstanceKind::Procedure => {
            let pid = slug(key).ok_or_else(|| GraphError::UnsluggableKey(key.to_string()))?;
            format!("{base}procedure/{pid}")
        }
        InstanceKind::Step => {
            let pid = slug(procedure_id)
                .ok_or_else(|| GraphError::UnsluggableKey(procedure_id.to_string()))?;
            format!("{base}procedure/{pid}/step/{key}")
        }
        InstanceKind::Action => {
            let s = slug(key).ok_or_else(|| GraphError::UnsluggableKey(key.to_string()))?;
            format!("{base}action/{s}")
        }
        InstanceKind::Tool => {
            let s = slug(key).ok_or_else(|| GraphError::UnsluggableKey(key.to_string()))?;
            format!("{base}tool/{s}")
        }
    };
    Ok(Iri::new(iri))
}

/// Builds the knowledge graph for an S6 stage document.
///
/// One `Procedure` node labeled with the source title; per step a `Step`
/// node carrying its order number and the verbatim step text as label, plus
/// `hasAction`/`usesTool` edges to deduplicated, labeled instances. No other
/// triples are produced.
pub fn build_graph(
    doc: &StageDocument,
    terms: &OntologyTerms,
    source: &ProcedureText,
) -> Result<ProceduralGraph, GraphError> {
    if doc.stage != Stage::S6Actions {
        return Err(GraphError::Schema(DocumentError::Schema {
            rule: format!("build_graph expects an S6 document, got {}", doc.stage),
        }));
    }
    check_stage_invariants(doc)?;

    let mut graph = ProceduralGraph::new();
    for (label, ns) in &terms.prefixes {
        graph.add_prefix(label.clone(), ns.clone());
    }

    let rdf_type = &terms.rdf_type;
    let rdfs_label = &terms.rdfs_label;

    let procedure = mint_iri(InstanceKind::Procedure, &source.id, &source.id, terms)?;
    graph.insert(Triple::new(
        procedure.clone(),
        rdf_type.clone(),
        RdfTerm::Iri(terms.procedure_class.clone()),
    ));
    graph.insert(Triple::new(
        procedure.clone(),
        rdfs_label.clone(),
        RdfTerm::String(source.title.clone()),
    ));

    // First surface form wins the label of a shared action/tool instance.
    let mut seen_actions: BTreeMap<String, Iri> = BTreeMap::new();
    let mut seen_tools: BTreeMap<String, Iri> = BTreeMap::new();

    for step in &doc.steps {
        let order = step.order.expect("S6 invariants checked");
        let step_iri = mint_iri(InstanceKind::Step, &order.to_string(), &source.id, terms)?;
        graph.insert(Triple::new(
            procedure.clone(),
            terms.has_step.clone(),
            RdfTerm::Iri(step_iri.clone()),
        ));
        graph.insert(Triple::new(
            step_iri.clone(),
            rdf_type.clone(),
            RdfTerm::Iri(terms.step_class.clone()),
        ));
        graph.insert(Triple::new(
            step_iri.clone(),
            rdfs_label.clone(),
            RdfTerm::String(step.text.clone()),
        ));
        graph.insert(Triple::new(
            step_iri.clone(),
            terms.step_number.clone(),
            RdfTerm::Integer(order as i64),
        ));

        for action in &step.actions {
            let key = slug(action).ok_or_else(|| GraphError::UnsluggableKey(action.clone()))?;
            let iri = match seen_actions.get(&key) {
                Some(iri) => iri.clone(),
                None => {
                    let iri = mint_iri(InstanceKind::Action, action, &source.id, terms)?;
                    graph.insert(Triple::new(
                        iri.clone(),
                        rdf_type.clone(),
                        RdfTerm::Iri(terms.action_class.clone()),
                    ));
                    graph.insert(Triple::new(
                        iri.clone(),
                        rdfs_label.clone(),
                        RdfTerm::String(action.clone()),
                    ));
                    seen_actions.insert(key, iri.clone());
                    iri
                }
            };
            graph.insert(Triple::new(
                step_iri.clone(),
                terms.has_action.clone(),
                RdfTerm::Iri(iri),
            ));
        }
        for tool in &step.tools {
            let key = slug(tool).ok_or_else(|| GraphError::UnsluggableKey(tool.clone()))?;
            let iri = match seen_tools.get(&key) {
                Some(iri) => iri.clone(),
                None => {
                    let iri = mint_iri(InstanceKind::Tool, tool, &source.id, terms)?;
                    graph.insert(Triple::new(
                        iri.clone(),
                        rdf_type.clone(),
                        RdfTerm::Iri(terms.tool_class.clone()),
                    ));
                    graph.insert(Triple::new(
                        iri.clone(),
                        rdfs_label.clone(),
                        RdfTerm::String(tool.clone()),
                    ));
                    seen_tools.insert(key, iri.clone());
                    iri
                }
            };
            graph.insert(Triple::new(
                step_iri.clone(),
                terms.uses_tool.clone(),
                RdfTerm::Iri(iri),
            ));
        }
    }
    Ok(graph)
}

/// Violation codes reported by [`validate_graph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ViolationCode {
    /// Procedure count differs from exactly one.
    MultipleProcedures,
    /// A step is not reachable from the procedure via `hasStep`.
    UnlinkedStep,
    /// Step numbers are not contiguous `1..N` (or a step number is missing
    /// or duplicated).
    OrderGap,
    /// An instance does not carry exactly one label.
    MissingLabel,
    /// A step has no `hasAction` edge.
    MissingAction,
    /// A step label is not a whitespace-normalized substring of the source.
    LabelNotVerbatim,
    /// An action or tool label does not occur in the step text that uses it.
    NotExplicitlyMentioned,
    /// A predicate outside the ontology contract.
    UnknownPredicate,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub code: ViolationCode,
    pub node: String,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} at <{}>: {}", self.code, self.node, self.detail)
    }
}

fn contains_ci(haystack: &str, needle: &str) -> bool {
    haystack.to_lowercase().contains(&needle.to_lowercase())
}

/// Checks a graph against the ontology contract and the source text.
/// Violations are data, not errors; a clean graph yields an empty list.
pub fn validate_graph(
    graph: &ProceduralGraph,
    terms: &OntologyTerms,
    source: &ProcedureText,
) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut report = |code: ViolationCode, node: &Iri, detail: String| {
        out.push(Violation {
            code,
            node: node.as_str().to_string(),
            detail,
        });
    };

    let procedures = graph.instances_of(&terms.procedure_class);
    if procedures.len() != 1 {
        let node = procedures
            .first()
            .cloned()
            .cloned()
            .unwrap_or_else(|| Iri::new(""));
        report(
            ViolationCode::MultipleProcedures,
            &node,
            format!("expected exactly 1 procedure instance, found {}", procedures.len()),
        );
    }

    let steps = graph.instances_of(&terms.step_class);
    let actions = graph.instances_of(&terms.action_class);
    let tools = graph.instances_of(&terms.tool_class);

    // Linkage: every step must hang off a procedure via hasStep.
    let mut linked: BTreeSet<&Iri> = BTreeSet::new();
    for procedure in &procedures {
        for term in graph.objects(procedure, &terms.has_step) {
            if let Some(iri) = term.as_iri() {
                linked.insert(iri);
            }
        }
    }
    for step in &steps {
        if !linked.contains(*step) {
            report(
                ViolationCode::UnlinkedStep,
                step,
                "step not reachable from the procedure via hasStep".into(),
            );
        }
    }

    // Step numbers must be exactly 1..N.
    let mut numbers = Vec::new();
    for step in &steps {
        let objs = graph.objects(step, &terms.step_number);
        match objs.as_slice() {
            [RdfTerm::Integer(n)] => numbers.push(*n),
            [] => report(ViolationCode::OrderGap, step, "step has no stepNumber".into()),
            [RdfTerm::Integer(_), ..] => {
                report(ViolationCode::OrderGap, step, "step has multiple stepNumbers".into())
            }
            _ => report(
                ViolationCode::OrderGap,
                step,
                "stepNumber is not an integer literal".into(),
            ),
        }
    }
    numbers.sort_unstable();
    let expected: Vec<i64> = (1..=steps.len() as i64).collect();
    if !numbers.is_empty() && numbers != expected {
        let node = steps.first().cloned().cloned().unwrap_or_else(|| Iri::new(""));
        report(
            ViolationCode::OrderGap,
            &node,
            format!("stepNumbers {numbers:?} are not contiguous 1..{}", steps.len()),
        );
    }

    // Exactly one label per instance.
    let mut all_instances: Vec<&Iri> = Vec::new();
    all_instances.extend(&procedures);
    all_instances.extend(&steps);
    all_instances.extend(&actions);
    all_instances.extend(&tools);
    for instance in &all_instances {
        let labels = graph.objects(instance, &terms.rdfs_label);
        if labels.len() != 1 {
            report(
                ViolationCode::MissingLabel,
                instance,
                format!("expected exactly 1 label, found {}", labels.len()),
            );
        }
    }

    let label_of = |iri: &Iri| -> Option<String> {
        graph
            .objects(iri, &terms.rdfs_label)
            .first()
            .and_then(|t| t.as_string())
            .map(str::to_string)
    };

    let body_normalized = normalize_ws(&source.body);
    for step in &steps {
        // At least one action per step.
        if graph.objects(step, &terms.has_action).is_empty() {
            report(ViolationCode::MissingAction, step, "step has no hasAction edge".into());
        }
        let Some(step_label) = label_of(step) else { continue };
        // Verbatim-label check against the source body.
        if !body_normalized.contains(&normalize_ws(&step_label)) {
            report(
                ViolationCode::LabelNotVerbatim,
                step,
                format!("step label {step_label:?} is not verbatim from the source text"),
            );
        }
        // Explicit-mention check for actions and tools of this step.
        for (property, kind) in [(&terms.has_action, "action"), (&terms.uses_tool, "tool")] {
            for term in graph.objects(step, property) {
                let Some(target) = term.as_iri() else { continue };
                let Some(target_label) = label_of(target) else { continue };
                if !contains_ci(&step_label, &target_label) {
                    report(
                        ViolationCode::NotExplicitlyMentioned,
                        target,
                        format!(
                            "{kind} label {target_label:?} does not occur in step label {step_label:?}"
                        ),
                    );
                }
            }
        }
    }

    // Predicate whitelist.
    let allowed = terms.allowed_predicates();
    for triple in graph.triples() {
        if !allowed.contains(&triple.predicate) {
            report(
                ViolationCode::UnknownPredicate,
                &triple.predicate,
                format!("predicate outside the ontology, on subject <{}>", triple.subject),
            );
        }
    }

    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::StepRecord;

    fn terms() -> OntologyTerms {
        OntologyTerms::default()
    }

    fn s6_step(text: &str, order: u32, tools: &[&str], actions: &[&str]) -> StepRecord {
        StepRecord {
            text: text.into(),
            order: Some(order),
            tools: tools.iter().map(|s| s.to_string()).collect(),
            actions: actions.iter().map(|s| s.to_string()).collect(),
            ..StepRecord::default()
        }
    }

    #[test]
    fn slug_rules() {
        assert_eq!(slug("Roasting Tray"), Some("roasting-tray".into()));
        assert_eq!(slug("  Mixing -- bowl !"), Some("mixing-bowl".into()));
        assert_eq!(slug("¡¡¡"), None);
    }

    #[test]
    fn mint_examples() {
        let t = terms();
        assert_eq!(
            mint_iri(InstanceKind::Tool, "Roasting Tray", "p1", &t).unwrap().as_str(),
            "https://example.org/resource/tool/roasting-tray"
        );
        assert_eq!(
            mint_iri(InstanceKind::Step, "2", "p1", &t).unwrap().as_str(),
            "https://example.org/resource/procedure/p1/step/2"
        );
        assert!(matches!(
            mint_iri(InstanceKind::Action, "¡¡¡", "p1", &t),
            Err(GraphError::UnsluggableKey(_))
        ));
    }

    #[test]
    fn mint_is_deterministic() {
        let t = terms();
        let a = mint_iri(InstanceKind::Action, "Rinse", "p1", &t).unwrap();
        let b = mint_iri(InstanceKind::Action, "rinse", "p1", &t).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn build_graph_counts_for_single_step() {
        let doc = StageDocument::new(
            Stage::S6Actions,
            vec![s6_step("Rinse the keyboard.", 1, &["water"], &["rinse"])],
        )
        .with_procedure("p1", Some("Keyboard"));
        let source = ProcedureText::new("p1", "Keyboard", "Rinse the keyboard.").unwrap();
        let graph = build_graph(&doc, &terms(), &source).unwrap();
        // 4 typed instances, 4 labels, 3 link triples, 1 stepNumber
        assert_eq!(graph.len(), 12);
        assert_eq!(graph.instances_of(&terms().procedure_class).len(), 1);
        assert_eq!(graph.instances_of(&terms().step_class).len(), 1);
        assert_eq!(graph.instances_of(&terms().action_class).len(), 1);
        assert_eq!(graph.instances_of(&terms().tool_class).len(), 1);
    }

    #[test]
    fn shared_tool_is_minted_once() {
        let doc = StageDocument::new(
            Stage::S6Actions,
            vec![
                s6_step("Stir with a spoon.", 1, &["spoon"], &["stir"]),
                s6_step("Serve with the spoon.", 2, &["spoon"], &["serve"]),
            ],
        );
        let source =
            ProcedureText::new("p1", "T", "Stir with a spoon. Serve with the spoon.").unwrap();
        let graph = build_graph(&doc, &terms(), &source).unwrap();
        let t = terms();
        assert_eq!(graph.instances_of(&t.tool_class).len(), 1);
        let uses: usize = graph
            .triples()
            .filter(|tr| tr.predicate == t.uses_tool)
            .count();
        assert_eq!(uses, 2);
    }

    #[test]
    fn build_rejects_step_without_action() {
        let doc = StageDocument::new(Stage::S6Actions, vec![s6_step("Rinse.", 1, &[], &[])]);
        let source = ProcedureText::new("p1", "T", "Rinse.").unwrap();
        assert!(matches!(
            build_graph(&doc, &terms(), &source),
            Err(GraphError::Schema(_))
        ));
    }

    #[test]
    fn validate_clean_graph() {
        let doc = StageDocument::new(
            Stage::S6Actions,
            vec![s6_step("Rinse the keyboard with water.", 1, &["water"], &["rinse"])],
        );
        let source =
            ProcedureText::new("p1", "Keyboard", "Rinse the keyboard with water.").unwrap();
        let graph = build_graph(&doc, &terms(), &source).unwrap();
        assert_eq!(validate_graph(&graph, &terms(), &source), vec![]);
    }

    #[test]
    fn validate_flags_rephrased_label() {
        let doc = StageDocument::new(
            Stage::S6Actions,
            vec![s6_step("Rinse thoroughly", 1, &[], &["rinse"])],
        );
        let source = ProcedureText::new("p1", "Keyboard", "Rinse the keyboard.").unwrap();
        let graph = build_graph(&doc, &terms(), &source).unwrap();
        let violations = validate_graph(&graph, &terms(), &source);
        assert!(violations
            .iter()
            .any(|v| v.code == ViolationCode::LabelNotVerbatim));
    }

    #[test]
    fn validate_flags_order_gap() {
        let doc = StageDocument::new(
            Stage::S6Actions,
            vec![
                s6_step("Rinse it.", 1, &[], &["rinse"]),
                s6_step("Dry it.", 2, &[], &["dry"]),
            ],
        );
        let source = ProcedureText::new("p1", "T", "Rinse it. Dry it.").unwrap();
        let graph = build_graph(&doc, &terms(), &source).unwrap();
        // corrupt: step 2 -> stepNumber 3
        let t = terms();
        let step2 = mint_iri(InstanceKind::Step, "2", "p1", &t).unwrap();
        let old = Triple::new(step2.clone(), t.step_number.clone(), RdfTerm::Integer(2));
        let triples: Vec<Triple> = graph.triples().cloned().collect();
        let mut corrupted = ProceduralGraph::new();
        for tr in triples {
            if tr == old {
                corrupted.insert(Triple::new(step2.clone(), t.step_number.clone(), RdfTerm::Integer(3)));
            } else {
                corrupted.insert(tr);
            }
        }
        let violations = validate_graph(&corrupted, &t, &source);
        assert!(violations.iter().any(|v| v.code == ViolationCode::OrderGap));
    }

    #[test]
    fn validate_flags_fabricated_tool_mention() {
        let doc = StageDocument::new(
            Stage::S6Actions,
            vec![s6_step("Rinse the keyboard.", 1, &["sponge"], &["rinse"])],
        );
        let source = ProcedureText::new("p1", "T", "Rinse the keyboard.").unwrap();
        let graph = build_graph(&doc, &terms(), &source).unwrap();
        let violations = validate_graph(&graph, &terms(), &source);
        assert!(violations
            .iter()
            .any(|v| v.code == ViolationCode::NotExplicitlyMentioned));
    }

    #[test]
    fn terms_config_overrides_roles() {
        let json = r#"{
            "base_namespace": "https://kg.example.com/id/",
            "procedure_class": "https://kg.example.com/ont#Workflow",
            "prefixes": {"w": "https://kg.example.com/ont#"}
        }"#;
        let t = OntologyTerms::from_config_json(json).unwrap();
        assert_eq!(t.base_namespace, "https://kg.example.com/id/");
        assert_eq!(t.procedure_class.as_str(), "https://kg.example.com/ont#Workflow");
        // untouched role keeps its default
        assert_eq!(t.has_step.as_str(), "https://example.org/pko#hasStep");
    }

    #[test]
    fn terms_config_rejects_relative_iri() {
        let json = r#"{"procedure_class": "Workflow"}"#;
        assert!(OntologyTerms::from_config_json(json).is_err());
    }
}
