//! Acceptance suite. Each test prints one PASS/FAIL line for its criterion
//! (run with `--nocapture` to see them).

use prokex_core::backend::{
    classify_sentence, shipped_anti_step_patterns, Backend, BackendError, CompletionRequest,
    HttpBackend, Lexicons, SentenceClass,
};
use prokex_core::domain::{
    parse_stage_document, validate_stage_transition, ProcedureText, Stage, StageDocument,
    StepRecord, TransitionCode,
};
use prokex_core::eval::{
    alpha_from_values, krippendorff_alpha, EvalError, ItemKind, Metric, RatingMatrix,
    RELIABILITY_THRESHOLD,
};
use prokex_core::kg::{
    build_graph, emit_turtle, parse_turtle, validate_graph, OntologyTerms, ViolationCode,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::io::{Read, Write};
use std::net::TcpListener;
use std::path::PathBuf;
use std::time::{Duration, Instant};

fn criterion<F: FnOnce() + std::panic::UnwindSafe>(number: u32, name: &str, body: F) {
    match std::panic::catch_unwind(body) {
        Ok(()) => println!("PASS criterion {number}: {name}"),
        Err(cause) => {
            println!("FAIL criterion {number}: {name}");
            std::panic::resume_unwind(cause);
        }
    }
}

fn repo_path(relative: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..").join(relative)
}

fn read_repo(relative: &str) -> String {
    let path = repo_path(relative);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("cannot read {}: {e}", path.display()))
}

// ---------------------------------------------------------------------------
// Independent brute-force oracle for Krippendorff's alpha.
//
// Works directly on per-item score lists: observed disagreement enumerates
// every ordered pair of scores within each item rated at least twice;
// expected disagreement enumerates every ordered pair of distinct score
// occurrences across the pooled pairable scores. No coincidence matrix.
// ---------------------------------------------------------------------------

#[derive(Debug, PartialEq)]
enum OracleOutcome {
    Alpha(f64),
    Degenerate,
    NothingPairable,
}

fn oracle_delta_squared(metric: Metric, a: u8, b: u8, pool: &[u8]) -> f64 {
    if a == b {
        return 0.0;
    }
    match metric {
        Metric::Nominal => 1.0,
        Metric::Interval => {
            let d = a as f64 - b as f64;
            d * d
        }
        Metric::Ordinal => {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            let count = |v: u8| pool.iter().filter(|&&x| x == v).count() as f64;
            let between: f64 = (lo..=hi).map(count).sum();
            let d = between - (count(lo) + count(hi)) / 2.0;
            d * d
        }
    }
}

fn oracle_alpha(items: &[Vec<u8>], metric: Metric) -> OracleOutcome {
    let pairable: Vec<&Vec<u8>> = items.iter().filter(|s| s.len() >= 2).collect();
    if pairable.is_empty() {
        return OracleOutcome::NothingPairable;
    }
    let pool: Vec<u8> = pairable.iter().flat_map(|s| s.iter().copied()).collect();
    let n = pool.len() as f64;

    let mut observed_sum = 0.0;
    for scores in &pairable {
        let m = scores.len();
        for i in 0..m {
            for j in 0..m {
                if i != j {
                    observed_sum +=
                        oracle_delta_squared(metric, scores[i], scores[j], &pool) / (m as f64 - 1.0);
                }
            }
        }
    }
    let d_o = observed_sum / n;

    let mut expected_sum = 0.0;
    for a in 0..pool.len() {
        for b in 0..pool.len() {
            if a != b {
                expected_sum += oracle_delta_squared(metric, pool[a], pool[b], &pool);
            }
        }
    }
    let d_e = expected_sum / (n * (n - 1.0));
    if d_e <= 0.0 {
        return OracleOutcome::Degenerate;
    }
    OracleOutcome::Alpha(1.0 - d_o / d_e)
}

fn random_cells(rng: &mut ChaCha8Rng) -> Vec<Vec<Option<u8>>> {
    let raters = rng.random_range(2..=5);
    let items = rng.random_range(2..=8);
    let missing = rng.random_range(0.0..=0.30);
    (0..items)
        .map(|_| {
            (0..raters)
                .map(|_| {
                    if rng.random_bool(missing) {
                        None
                    } else {
                        Some(rng.random_range(1..=10u8))
                    }
                })
                .collect()
        })
        .collect()
}

fn matrix_of(cells: &[Vec<Option<u8>>], rater_tag: &str) -> RatingMatrix {
    let mut builder = RatingMatrix::builder();
    for (i, item) in cells.iter().enumerate() {
        for (r, score) in item.iter().enumerate() {
            builder
                .record(&format!("{rater_tag}{r}"), &format!("i{i}"), ItemKind::Step, *score)
                .unwrap();
        }
    }
    builder.build().unwrap()
}

fn present(cells: &[Vec<Option<u8>>]) -> Vec<Vec<u8>> {
    cells
        .iter()
        .map(|item| item.iter().flatten().copied().collect())
        .collect()
}

#[test]
fn criterion_1_alpha_oracle_equivalence() {
    criterion(1, "alpha matches the brute-force oracle on 500 random matrices", || {
        let started = Instant::now();
        let mut rng = ChaCha8Rng::seed_from_u64(0xA11CE);
        let mut checked = 0usize;
        for _ in 0..500 {
            let cells = random_cells(&mut rng);
            let matrix = matrix_of(&cells, "r");
            let items = present(&cells);
            for metric in [Metric::Nominal, Metric::Interval, Metric::Ordinal] {
                let expected = oracle_alpha(&items, metric);
                match krippendorff_alpha::<f64>(&matrix, metric) {
                    Ok(result) => {
                        let OracleOutcome::Alpha(oracle) = expected else {
                            panic!("oracle says {expected:?}, implementation returned alpha");
                        };
                        assert!(
                            (result.alpha - oracle).abs() < 1e-9,
                            "{metric}: {} vs oracle {oracle} on {cells:?}",
                            result.alpha
                        );
                        checked += 1;
                    }
                    Err(EvalError::DegenerateData) => assert_eq!(expected, OracleOutcome::Degenerate),
                    Err(EvalError::NothingPairable) => {
                        assert_eq!(expected, OracleOutcome::NothingPairable)
                    }
                    Err(other) => panic!("unexpected error {other}"),
                }
            }
        }
        assert!(checked > 1000, "too few comparable cases: {checked}");
        let elapsed = started.elapsed();
        assert!(elapsed < Duration::from_secs(10), "took {elapsed:?}, budget 10s");
    });
}

#[test]
fn criterion_2_reliability_threshold_boundary() {
    criterion(2, "reliability verdict flips exactly at alpha 0.667", || {
        // Two raters over binary values: a items agree on 1, b items agree
        // on 2, d items disagree. alpha = 1 - d(2m-1)/(n1*n2), worked out by
        // hand from the pair counts.
        let two_rater = |a: usize, b: usize, d: usize| -> RatingMatrix {
            let mut builder = RatingMatrix::builder();
            let mut item = 0;
            let mut push = |builder: &mut prokex_core::eval::RatingMatrixBuilder, x: u8, y: u8| {
                builder.record("r1", &format!("i{item}"), ItemKind::Step, Some(x)).unwrap();
                builder.record("r2", &format!("i{item}"), ItemKind::Step, Some(y)).unwrap();
                item += 1;
            };
            for _ in 0..a {
                push(&mut builder, 1, 1);
            }
            for _ in 0..b {
                push(&mut builder, 2, 2);
            }
            for _ in 0..d {
                push(&mut builder, 1, 2);
            }
            builder.build().unwrap()
        };

        // a=8, b=7, d=3: alpha = 1 - 105/323 = 218/323 ~ 0.674923 (above)
        let above = krippendorff_alpha::<f64>(&two_rater(8, 7, 3), Metric::Nominal).unwrap();
        assert!((above.alpha - 218.0 / 323.0).abs() < 1e-9, "alpha {}", above.alpha);
        assert!(above.alpha >= RELIABILITY_THRESHOLD);
        assert!(above.reliable, "alpha {} must be flagged reliable", above.alpha);

        // a=7, b=7, d=3: alpha = 1 - 99/289 = 190/289 ~ 0.657439 (below)
        let below = krippendorff_alpha::<f64>(&two_rater(7, 7, 3), Metric::Nominal).unwrap();
        assert!((below.alpha - 190.0 / 289.0).abs() < 1e-9, "alpha {}", below.alpha);
        assert!(below.alpha < RELIABILITY_THRESHOLD);
        assert!(!below.reliable, "alpha {} must be flagged not reliable", below.alpha);

        // the gap straddles the threshold tightly from both sides
        assert!(above.alpha - RELIABILITY_THRESHOLD < 0.01);
        assert!(RELIABILITY_THRESHOLD - below.alpha < 0.01);
    });
}

#[test]
fn criterion_3_end_to_end_determinism() {
    criterion(3, "prokex extract is byte-deterministic over the bundled samples", || {
        let binary = env!("CARGO_BIN_EXE_prokex");
        let samples = ["tree-watering", "roasted-vegetables", "gutter-cleaning"];
        let started = Instant::now();
        let temp = tempfile::tempdir().unwrap();

        let mut outputs: Vec<Vec<(String, Vec<(String, String)>)>> = Vec::new();
        for run in 0..3 {
            let mut per_sample = Vec::new();
            for sample in samples {
                let out_dir = temp.path().join(format!("run{run}/{sample}"));
                let status = std::process::Command::new(binary)
                    .arg("extract")
                    .arg(repo_path(&format!("samples/{sample}.txt")))
                    .arg("--output")
                    .arg(&out_dir)
                    .stderr(std::process::Stdio::null())
                    .status()
                    .unwrap();
                assert!(status.success(), "extract {sample} failed (run {run})");
                let mut files = Vec::new();
                for stage in 1..=6 {
                    let name = format!("stage{stage}.json");
                    files.push((name.clone(), std::fs::read_to_string(out_dir.join(&name)).unwrap()));
                }
                files.push((
                    "graph.ttl".into(),
                    std::fs::read_to_string(out_dir.join("graph.ttl")).unwrap(),
                ));
                per_sample.push((sample.to_string(), files));
            }
            outputs.push(per_sample);
        }
        let elapsed = started.elapsed();

        for sample_index in 0..samples.len() {
            let reference = &outputs[0][sample_index];
            for run in 1..3 {
                let candidate = &outputs[run][sample_index];
                assert_eq!(reference.0, candidate.0);
                for (a, b) in reference.1.iter().zip(candidate.1.iter()) {
                    assert_eq!(a.0, b.0);
                    assert!(a.1 == b.1, "{} {} differs between runs", reference.0, a.0);
                }
            }
        }
        // and the tree-watering run still matches the checked-in golden
        let golden = read_repo("crates/core/tests/golden/tree-watering/graph.ttl");
        let produced = &outputs[0][0].1.last().unwrap().1;
        assert_eq!(produced, &golden, "graph.ttl drifted from golden");

        assert!(elapsed < Duration::from_secs(5), "9 runs took {elapsed:?}, budget 5s");
    });
}

#[test]
fn criterion_4_stage_contract_suite() {
    criterion(4, "golden stages pass invariants and transitions; bad S3 is rejected", || {
        let mut docs: Vec<StageDocument> = Vec::new();
        for stage in Stage::ALL {
            let text = read_repo(&format!(
                "crates/core/tests/golden/tree-watering/stage{}.json",
                stage.number()
            ));
            docs.push(parse_stage_document(&text, stage).expect("golden stage parses"));
        }
        for pair in docs.windows(2) {
            let violations = validate_stage_transition(&pair[0], &pair[1]).unwrap();
            assert!(violations.is_empty(), "{} -> {}: {violations:?}", pair[0].stage, pair[1].stage);
        }

        // an S2 -> S3 transition that keeps an incorrect step must be flagged
        let s2 = &docs[1];
        let incorrect_text = s2
            .steps
            .iter()
            .find(|s| s.validation == Some(prokex_core::domain::Validation::Incorrect))
            .map(|s| s.text.clone())
            .expect("golden S2 has an incorrect step");
        let mut bad_s3 = docs[2].clone();
        bad_s3.steps.push(StepRecord::draft(incorrect_text));
        let violations = validate_stage_transition(s2, &bad_s3).unwrap();
        assert!(
            violations.iter().any(|v| v.code == TransitionCode::IncorrectStepRetained),
            "{violations:?}"
        );
    });
}

#[test]
fn criterion_5_anti_step_classifier_table() {
    criterion(5, "fixed classifier table scores 100%", || {
        let lexicons = Lexicons::bundled();
        let patterns = shipped_anti_step_patterns();
        let not_steps = [
            "Do not touch the blade.",
            "Be careful not to slip on the wet floor.",
            "Pay attention not to scratch the surface.",
            "You may want to wear gloves.",
            "You may skip this part.",
        ];
        for sentence in not_steps {
            assert!(
                matches!(
                    classify_sentence(sentence, patterns, lexicons),
                    SentenceClass::NotStep { .. }
                ),
                "{sentence:?} must not be a step"
            );
        }
        let steps = [
            "Rinse the keyboard.",
            "Chop the onions finely.",
            "Fill the bucket with water.",
            "Plug the cable into the socket.",
            "Stir the sauce gently.",
            "Wipe the screen with a dry cloth.",
            "Tighten the screws on the panel.",
            "Pour the mixture into the bowl.",
            "Brush the crumbs off the table.",
            "Dry your hands with a towel.",
        ];
        for sentence in steps {
            assert_eq!(
                classify_sentence(sentence, patterns, lexicons),
                SentenceClass::Step,
                "{sentence:?} must be a step"
            );
        }
    });
}

fn random_s6(rng: &mut ChaCha8Rng) -> (StageDocument, ProcedureText) {
    let word = |rng: &mut ChaCha8Rng| -> String {
        let len = rng.random_range(1..=8);
        (0..len).map(|_| rng.random_range(b'a'..=b'z') as char).collect()
    };
    let steps = rng.random_range(1..=6);
    let mut records = Vec::new();
    for i in 0..steps {
        let n_words = rng.random_range(3..=8);
        let words: Vec<String> = (0..n_words).map(|_| word(rng)).collect();
        let mut text = words.join(" ");
        match rng.random_range(0..4) {
            0 => text.push_str(" \"quoted\""),
            1 => text.push_str("\nsecond line"),
            2 => text.push_str(" tab\there"),
            _ => text.push('.'),
        }
        let n_actions = rng.random_range(1..=2.min(words.len()));
        let n_tools = rng.random_range(0..=2.min(words.len()));
        records.push(StepRecord {
            text,
            order: Some(i as u32 + 1),
            actions: words.iter().take(n_actions).cloned().collect(),
            tools: words.iter().rev().take(n_tools).cloned().collect(),
            ..StepRecord::default()
        });
    }
    let body = records.iter().map(|r| r.text.clone()).collect::<Vec<_>>().join(" ");
    (
        StageDocument::new(Stage::S6Actions, records),
        ProcedureText::new("rand", "Random procedure", body).unwrap(),
    )
}

#[test]
fn criterion_6_turtle_roundtrip() {
    criterion(6, "turtle round-trips 200 random graphs; emission is byte-deterministic", || {
        let mut rng = ChaCha8Rng::seed_from_u64(0x7057);
        let terms = OntologyTerms::default();
        for case in 0..200 {
            let (doc, source) = random_s6(&mut rng);
            let graph = build_graph(&doc, &terms, &source).unwrap();
            let text = emit_turtle(&graph);
            let parsed = parse_turtle(&text)
                .unwrap_or_else(|e| panic!("case {case}: {e}\n--- emitted ---\n{text}"));
            assert_eq!(parsed, graph, "case {case}: triple sets differ");
            assert_eq!(emit_turtle(&graph), text, "case {case}: emit not deterministic");
            assert_eq!(emit_turtle(&parsed), text, "case {case}: re-emission differs");
        }
    });
}

#[test]
fn criterion_7_graph_validator_codes() {
    criterion(7, "golden graph validates clean; every violation code has a fixture", || {
        let terms = OntologyTerms::default();
        let source = ProcedureText::from_input_text(
            "tree-watering",
            &read_repo("samples/tree-watering.txt"),
        )
        .unwrap();

        let golden = parse_turtle(&read_repo("crates/core/tests/golden/tree-watering/graph.ttl")).unwrap();
        assert_eq!(validate_graph(&golden, &terms, &source), vec![]);

        let cases = [
            ("label_not_verbatim.ttl", ViolationCode::LabelNotVerbatim),
            ("order_gap.ttl", ViolationCode::OrderGap),
            ("missing_action.ttl", ViolationCode::MissingAction),
            ("missing_label.ttl", ViolationCode::MissingLabel),
            ("unknown_predicate.ttl", ViolationCode::UnknownPredicate),
            ("unlinked_step.ttl", ViolationCode::UnlinkedStep),
            ("multiple_procedures.ttl", ViolationCode::MultipleProcedures),
        ];
        for (fixture, expected) in cases {
            let graph =
                parse_turtle(&read_repo(&format!("crates/core/tests/fixtures/{fixture}"))).unwrap();
            let codes: Vec<ViolationCode> = validate_graph(&graph, &terms, &source)
                .into_iter()
                .map(|v| v.code)
                .collect();
            assert_eq!(codes, vec![expected], "{fixture}");
        }
    });
}

// ---------------------------------------------------------------------------
// Minimal scripted HTTP server for backend conformance.
// ---------------------------------------------------------------------------

struct Captured {
    request_line: String,
    headers: Vec<(String, String)>,
    body: String,
}

fn serve_once(
    status_line: &'static str,
    extra_headers: &'static str,
    body: &'static str,
    delay: Option<Duration>,
) -> (String, std::thread::JoinHandle<Captured>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let handle = std::thread::spawn(move || {
        let (mut stream, _) = listener.accept().unwrap();
        let mut raw = Vec::new();
        let mut buffer = [0u8; 4096];
        let (header_end, content_length) = loop {
            let read = stream.read(&mut buffer).unwrap();
            raw.extend_from_slice(&buffer[..read]);
            if let Some(pos) = raw.windows(4).position(|w| w == b"\r\n\r\n") {
                let headers = String::from_utf8_lossy(&raw[..pos]).to_string();
                let length = headers
                    .lines()
                    .find_map(|l| {
                        let (name, value) = l.split_once(':')?;
                        name.eq_ignore_ascii_case("content-length")
                            .then(|| value.trim().parse::<usize>().ok())?
                    })
                    .unwrap_or(0);
                break (pos + 4, length);
            }
        };
        while raw.len() < header_end + content_length {
            let read = stream.read(&mut buffer).unwrap();
            if read == 0 {
                break;
            }
            raw.extend_from_slice(&buffer[..read]);
        }

        let head = String::from_utf8_lossy(&raw[..header_end]).to_string();
        let mut lines = head.lines();
        let request_line = lines.next().unwrap_or_default().to_string();
        let headers = lines
            .filter_map(|l| {
                let (name, value) = l.split_once(':')?;
                Some((name.trim().to_lowercase(), value.trim().to_string()))
            })
            .collect();
        let body_text = String::from_utf8_lossy(&raw[header_end..header_end + content_length]).to_string();

        if let Some(delay) = delay {
            std::thread::sleep(delay);
        }
        let response = format!(
            "HTTP/1.1 {status_line}\r\nContent-Type: application/json\r\nContent-Length: {}\r\n{extra_headers}Connection: close\r\n\r\n{body}",
            body.len()
        );
        let _ = stream.write_all(response.as_bytes());
        Captured {
            request_line,
            headers,
            body: body_text,
        }
    });
    (format!("http://{addr}"), handle)
}

#[test]
fn criterion_8_http_backend_conformance() {
    criterion(8, "http backend sends the right request and maps every error", || {
        // happy path: request shape and auth header
        let reply = r#"{"choices":[{"message":{"content":"{\"steps\":[]}"}}]}"#;
        let (base_url, handle) = serve_once("200 OK", "", reply, None);
        let backend = HttpBackend::new(&base_url, "test-model", "secret-key".into(), 5.0, 2).unwrap();
        let request = CompletionRequest {
            prompt: "find all relevant steps".into(),
            temperature: 0.0,
            max_output_tokens: 512,
            stop_sequences: Vec::new(),
        };
        let content = backend.complete(&request).unwrap();
        assert_eq!(content, "{\"steps\":[]}");
        let captured = handle.join().unwrap();
        assert_eq!(captured.request_line, "POST /chat/completions HTTP/1.1");
        assert!(
            captured
                .headers
                .iter()
                .any(|(name, value)| name == "authorization" && value == "Bearer secret-key"),
            "missing bearer auth header: {:?}",
            captured.headers
        );
        let body: serde_json::Value = serde_json::from_str(&captured.body).unwrap();
        assert_eq!(body["model"], "test-model");
        assert_eq!(body["temperature"], 0.0);
        assert_eq!(body["messages"][0]["role"], "user");
        assert_eq!(body["messages"][0]["content"], "find all relevant steps");

        // 401 -> AuthFailed
        let (base_url, handle) = serve_once("401 Unauthorized", "", "{}", None);
        let backend = HttpBackend::new(&base_url, "m", "k".into(), 5.0, 1).unwrap();
        let err = backend.complete(&request).unwrap_err();
        assert_eq!(err, BackendError::AuthFailed { status: 401 });
        handle.join().unwrap();

        // 429 -> RateLimited with retry-after
        let (base_url, handle) = serve_once("429 Too Many Requests", "Retry-After: 1.5\r\n", "{}", None);
        let backend = HttpBackend::new(&base_url, "m", "k".into(), 5.0, 1).unwrap();
        let err = backend.complete(&request).unwrap_err();
        assert_eq!(err, BackendError::RateLimited { retry_after: Some(1.5) });
        handle.join().unwrap();

        // 500 -> Transport with the status in the message
        let (base_url, handle) = serve_once("500 Internal Server Error", "", "boom", None);
        let backend = HttpBackend::new(&base_url, "m", "k".into(), 5.0, 1).unwrap();
        match backend.complete(&request).unwrap_err() {
            BackendError::Transport(message) => assert!(message.contains("500"), "{message}"),
            other => panic!("expected transport error, got {other:?}"),
        }
        handle.join().unwrap();

        // timeout -> Timeout
        let (base_url, handle) =
            serve_once("200 OK", "", "{}", Some(Duration::from_millis(1500)));
        let backend = HttpBackend::new(&base_url, "m", "k".into(), 0.3, 1).unwrap();
        let err = backend.complete(&request).unwrap_err();
        assert_eq!(err, BackendError::Timeout);
        handle.join().unwrap();
    });
}

#[test]
fn criterion_9_invariance_properties() {
    criterion(9, "permutation, relabeling and affine invariance over 100 random matrices", || {
        let mut rng = ChaCha8Rng::seed_from_u64(0x1011);
        let metrics = [Metric::Nominal, Metric::Interval, Metric::Ordinal];
        for _ in 0..100 {
            let cells = random_cells(&mut rng);

            // permute items and raters
            let mut permuted = cells.clone();
            for i in (1..permuted.len()).rev() {
                let j = rng.random_range(0..=i);
                permuted.swap(i, j);
            }
            let raters = permuted[0].len();
            for i in (1..raters).rev() {
                let j = rng.random_range(0..=i);
                for item in &mut permuted {
                    item.swap(i, j);
                }
            }

            for metric in metrics {
                let base = krippendorff_alpha::<f64>(&matrix_of(&cells, "r"), metric);
                let shuffled = krippendorff_alpha::<f64>(&matrix_of(&permuted, "r"), metric);
                let relabeled = krippendorff_alpha::<f64>(&matrix_of(&cells, "annotator-"), metric);
                match (&base, &shuffled, &relabeled) {
                    (Ok(a), Ok(b), Ok(c)) => {
                        assert!((a.alpha - b.alpha).abs() < 1e-9, "permutation moved alpha");
                        assert!((a.alpha - c.alpha).abs() < 1e-9, "relabeling moved alpha");
                    }
                    _ => {
                        assert_eq!(base.is_err(), shuffled.is_err());
                        assert_eq!(base.is_err(), relabeled.is_err());
                    }
                }
            }

            // interval affine invariance on the same data
            let items: Vec<Vec<f64>> = cells
                .iter()
                .map(|item| item.iter().flatten().map(|&s| s as f64).collect())
                .collect();
            let a = rng.random_range(0.1..=10.0);
            let b = rng.random_range(-25.0..=25.0);
            let transformed: Vec<Vec<f64>> = items
                .iter()
                .map(|item| item.iter().map(|v| a * v + b).collect())
                .collect();
            match (
                alpha_from_values(&items, Metric::Interval),
                alpha_from_values(&transformed, Metric::Interval),
            ) {
                (Ok(x), Ok(y)) => {
                    assert!((x.alpha - y.alpha).abs() < 1e-9, "affine transform moved alpha")
                }
                (x, y) => assert_eq!(x.is_err(), y.is_err()),
            }
        }
    });
}
