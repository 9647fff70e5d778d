//! Golden-file checks for the deterministic pipeline and the agreement
//! report, plus pipeline-level invariants across the bundled samples.

use prokex_core::backend::HeuristicBackend;
use prokex_core::chain::{run_pipeline, ChainConfig};
use prokex_core::domain::{
    normalize_ws, parse_stage_document, serialize_stage_document, validate_stage_transition,
    ProcedureText, Stage,
};
use prokex_core::eval::{agreement_report, load_ratings, Metric};
use std::path::PathBuf;

fn repo_path(relative: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../..")
        .join(relative)
}

fn read(relative: &str) -> String {
    let path = repo_path(relative);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("cannot read {}: {e}", path.display()))
}

fn golden(relative: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(relative);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("cannot read {}: {e}", path.display()))
}

fn sample_procedure(name: &str) -> ProcedureText {
    ProcedureText::from_input_text(name, &read(&format!("samples/{name}.txt"))).unwrap()
}

#[test]
fn tree_watering_run_matches_golden_files() {
    let procedure = sample_procedure("tree-watering");
    let run = run_pipeline(&procedure, &HeuristicBackend::new(), &ChainConfig::default()).unwrap();

    assert_eq!(run.stages.len(), 6);
    for doc in &run.stages {
        let expected = golden(&format!("tree-watering/stage{}.json", doc.stage.number()));
        assert_eq!(
            serialize_stage_document(doc),
            expected,
            "stage{} drifted from golden",
            doc.stage.number()
        );
    }
    assert_eq!(run.turtle, golden("tree-watering/graph.ttl"), "graph.ttl drifted from golden");
    assert!(run.trace.warnings.is_empty(), "{:?}", run.trace.warnings);
}

#[test]
fn golden_stage_files_pass_invariants_and_transitions() {
    let mut docs = Vec::new();
    for stage in Stage::ALL {
        let text = golden(&format!("tree-watering/stage{}.json", stage.number()));
        docs.push(parse_stage_document(&text, stage).expect("golden stage parses"));
    }
    for pair in docs.windows(2) {
        let violations = validate_stage_transition(&pair[0], &pair[1]).unwrap();
        assert!(
            violations.is_empty(),
            "golden {} -> {}: {violations:?}",
            pair[0].stage,
            pair[1].stage
        );
    }
}

#[test]
fn every_sample_shrinks_monotonically_and_keeps_a_subsequence() {
    let backend = HeuristicBackend::new();
    let config = ChainConfig::default();
    for name in ["tree-watering", "roasted-vegetables", "gutter-cleaning"] {
        let procedure = sample_procedure(name);
        let run = run_pipeline(&procedure, &backend, &config).unwrap();
        let s1 = &run.stages[0];
        let s3 = &run.stages[2];
        let s6 = &run.stages[5];
        assert!(s3.steps.len() <= s1.steps.len(), "{name}: S3 grew");
        assert_eq!(s3.steps.len(), s6.steps.len(), "{name}: steps lost after S3");

        // surviving S6 texts are a subsequence of the S1 texts
        let mut s1_texts = s1.steps.iter().map(|s| normalize_ws(&s.text));
        for step in &s6.steps {
            let target = normalize_ws(&step.text);
            assert!(
                s1_texts.any(|t| t == target),
                "{name}: step {target:?} is not a subsequence element of S1"
            );
        }
    }
}

#[test]
fn bundled_ratings_report_matches_golden() {
    let matrix = load_ratings(&read("samples/ratings.csv")).unwrap();
    let report = agreement_report::<f64>(&matrix, Metric::Interval);
    assert_eq!(report.to_json(), golden("report.json"), "report.json drifted from golden");
}

#[test]
fn nominal_and_interval_reports_differ_only_in_alpha() {
    let matrix = load_ratings(&read("samples/ratings.csv")).unwrap();
    let nominal = agreement_report::<f64>(&matrix, Metric::Nominal).to_json_value();
    let interval = agreement_report::<f64>(&matrix, Metric::Interval).to_json_value();
    assert_ne!(
        nominal["overall"]["alpha"], interval["overall"]["alpha"],
        "metrics should disagree on this data"
    );
    assert_eq!(nominal["overall"]["stats"], interval["overall"]["stats"]);
    assert_eq!(nominal["by_kind"]["step"]["stats"], interval["by_kind"]["step"]["stats"]);
}
