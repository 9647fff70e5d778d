//! prokex: procedural knowledge extraction pipeline and rating harness.
//!
//! Exit codes are stable: 0 success, 1 usage or I/O error, 2 stage failure,
//! 3 invalid graph, 4 validation violations.

mod config;

use clap::{Args, Parser, Subcommand};
use config::RunConfig;
use prokex_core::backend::{Backend, BackendConfig, HeuristicBackend, HttpBackend, Lexicons, API_KEY_ENV};
use prokex_core::chain::{run_pipeline, ChainConfig, PipelineError, PipelineTrace, RunLimits, StageSpec};
use prokex_core::chain::FewShotAssets;
use prokex_core::domain::{serialize_stage_document, ProcedureText, StageDocument};
use prokex_core::eval::{agreement_report, load_ratings, Metric};
use prokex_core::kg::{parse_turtle, validate_graph, OntologyTerms};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicI32, AtomicUsize, Ordering};

const EXIT_OK: i32 = 0;
const EXIT_USAGE: i32 = 1;
const EXIT_STAGE_FAILED: i32 = 2;
const EXIT_GRAPH_INVALID: i32 = 3;
const EXIT_VIOLATIONS: i32 = 4;

#[derive(Parser)]
#[command(name = "prokex", version, about = "Extract procedural knowledge graphs from text and score the results")]
struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Output directory (default "out", or the config's output_dir).
    #[arg(long, global = true, value_name = "DIR")]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the seven-prompt pipeline over a procedure file (or a directory
    /// of .txt files) and write stage1..6.json, graph.ttl and trace.json.
    Extract(ExtractArgs),
    /// Validate a Turtle graph against its source procedure text.
    Validate(ValidateArgs),
    /// Compute the inter-rater agreement report for a ratings CSV.
    Eval(EvalArgs),
}

#[derive(Args)]
struct ExtractArgs {
    /// Procedure file: a title line followed by the body. A directory runs
    /// every contained .txt file.
    input: PathBuf,
    /// Concurrent pipelines in directory mode.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Args)]
struct ValidateArgs {
    /// graph.ttl to check.
    graph: PathBuf,
    /// Source procedure file (title line + body).
    source: PathBuf,
    /// Terms config JSON overriding the default ontology IRIs.
    #[arg(long, value_name = "FILE")]
    terms: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    /// Ratings CSV with header rater_id,item_id,item_kind,score.
    ratings: PathBuf,
    /// Difference function: nominal, ordinal or interval.
    #[arg(long, default_value = "interval")]
    metric: Metric,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    std::process::exit(run(cli));
}

fn run(cli: Cli) -> i32 {
    let config = match &cli.config {
        Some(path) => match RunConfig::load(path) {
            Ok(c) => c,
            Err(e) => return usage_error(&e),
        },
        None => RunConfig::default(),
    };
    let output_dir = cli
        .output
        .clone()
        .or_else(|| config.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));

    match &cli.command {
        Command::Extract(args) => cmd_extract(args, &config, &output_dir),
        Command::Validate(args) => cmd_validate(args),
        Command::Eval(args) => cmd_eval(args, &output_dir),
    }
}

fn usage_error(message: &str) -> i32 {
    eprintln!("error: {message}");
    EXIT_USAGE
}

// ---------------------------------------------------------------------------
// extract
// ---------------------------------------------------------------------------

fn build_backend(config: &RunConfig) -> Result<Box<dyn Backend>, String> {
    let terms = load_terms(config)?;
    match config.backend.clone().unwrap_or_default() {
        BackendConfig::Heuristic => {
            let mut backend = HeuristicBackend::new().with_terms(terms);
            if let Some(dir) = &config.lexicons_dir {
                let lexicons = Lexicons::from_files(&dir.join("verbs.txt"), &dir.join("tools.txt"))
                    .map_err(|e| format!("cannot load lexicons from {}: {e}", dir.display()))?;
                backend = backend.with_lexicons(lexicons);
            }
            Ok(Box::new(backend))
        }
        BackendConfig::Http {
            base_url,
            model_name,
            timeout_seconds,
            max_concurrent_requests,
        } => {
            let api_key = std::env::var(API_KEY_ENV)
                .map_err(|_| format!("missing credential: set {API_KEY_ENV}"))?;
            let timeout = config.limits.timeout_seconds.unwrap_or(timeout_seconds);
            let backend =
                HttpBackend::new(&base_url, &model_name, api_key, timeout, max_concurrent_requests)
                    .map_err(|e| e.to_string())?;
            Ok(Box::new(backend))
        }
    }
}

fn load_terms(config: &RunConfig) -> Result<OntologyTerms, String> {
    match &config.terms_file {
        None => Ok(OntologyTerms::default()),
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("cannot read terms file {}: {e}", path.display()))?;
            OntologyTerms::from_config_json(&text).map_err(|e| e.to_string())
        }
    }
}

fn build_chain_config(config: &RunConfig) -> Result<ChainConfig, String> {
    let specs = match &config.prompts_dir {
        None => StageSpec::builtin(),
        Some(dir) => StageSpec::load_dir(dir).map_err(|e| e.to_string())?,
    };
    let assets = match &config.assets_dir {
        None => FewShotAssets::builtin(),
        Some(dir) => FewShotAssets::load_dir(dir).map_err(|e| e.to_string())?,
    };
    assets.validate(&specs).map_err(|e| e.to_string())?;
    let mut limits = RunLimits::default();
    if let Some(max_retries) = config.limits.max_retries {
        limits.max_retries = max_retries;
    }
    Ok(ChainConfig {
        specs,
        assets,
        terms: load_terms(config)?,
        limits,
    })
}

fn cmd_extract(args: &ExtractArgs, config: &RunConfig, output_dir: &Path) -> i32 {
    let backend = match build_backend(config) {
        Ok(b) => b,
        Err(e) => return usage_error(&e),
    };
    let chain = match build_chain_config(config) {
        Ok(c) => c,
        Err(e) => return usage_error(&e),
    };

    if args.input.is_dir() {
        return extract_batch(args, config, &*backend, &chain, output_dir);
    }
    match extract_one(&args.input, &*backend, &chain, output_dir) {
        Ok(code) | Err(code) => code,
    }
}

fn extract_batch(
    args: &ExtractArgs,
    _config: &RunConfig,
    backend: &dyn Backend,
    chain: &ChainConfig,
    output_dir: &Path,
) -> i32 {
    let mut inputs: Vec<PathBuf> = match std::fs::read_dir(&args.input) {
        Ok(entries) => entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().and_then(|e| e.to_str()) == Some("txt"))
            .collect(),
        Err(e) => return usage_error(&format!("cannot read {}: {e}", args.input.display())),
    };
    inputs.sort();
    if inputs.is_empty() {
        return usage_error(&format!("no .txt files in {}", args.input.display()));
    }

    let jobs = args.jobs.clamp(1, inputs.len());
    let next = AtomicUsize::new(0);
    let worst = AtomicI32::new(EXIT_OK);
    std::thread::scope(|scope| {
        for _ in 0..jobs {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(input) = inputs.get(i) else { break };
                let stem = input
                    .file_stem()
                    .and_then(|s| s.to_str())
                    .unwrap_or("procedure");
                let dir = output_dir.join(stem);
                let code = match extract_one(input, backend, chain, &dir) {
                    Ok(code) | Err(code) => code,
                };
                worst.fetch_max(code, Ordering::Relaxed);
            });
        }
    });
    worst.load(Ordering::Relaxed)
}

fn extract_one(
    input: &Path,
    backend: &dyn Backend,
    chain: &ChainConfig,
    output_dir: &Path,
) -> Result<i32, i32> {
    let text = std::fs::read_to_string(input)
        .map_err(|e| usage_error(&format!("cannot read {}: {e}", input.display())))?;
    let id = input
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("procedure")
        .to_string();
    let procedure = ProcedureText::from_input_text(id, &text)
        .map_err(|e| usage_error(&format!("{}: {e}", input.display())))?;

    std::fs::create_dir_all(output_dir)
        .map_err(|e| usage_error(&format!("cannot create {}: {e}", output_dir.display())))?;

    match run_pipeline(&procedure, backend, chain) {
        Ok(run) => {
            report_progress(&procedure.id, &run.trace);
            write_stages(output_dir, &run.stages).map_err(|e| usage_error(&e))?;
            write_file(output_dir, "graph.ttl", &run.turtle).map_err(|e| usage_error(&e))?;
            write_file(output_dir, "trace.json", &run.trace.to_json()).map_err(|e| usage_error(&e))?;
            eprintln!("{}: ok ({} stages)", procedure.id, run.trace.stages.len());
            Ok(EXIT_OK)
        }
        Err(failure) => {
            report_progress(&procedure.id, &failure.trace);
            // failed runs still leave their trace and completed stages behind
            let _ = write_stages(output_dir, &failure.stages);
            let _ = write_file(output_dir, "trace.json", &failure.trace.to_json());
            eprintln!("{}: {}", procedure.id, failure.error);
            Err(match failure.error {
                PipelineError::InvalidProcedure(_) | PipelineError::Chain(_) => EXIT_USAGE,
                PipelineError::Stage(_) | PipelineError::EmptyProcedure => EXIT_STAGE_FAILED,
                PipelineError::GraphInvalid { .. } => EXIT_GRAPH_INVALID,
            })
        }
    }
}

fn report_progress(id: &str, trace: &PipelineTrace) {
    for entry in &trace.stages {
        let status = if entry.output.is_some() { "ok" } else { "failed" };
        eprintln!(
            "{id}: {} {status} ({} attempt{}, {} ms)",
            entry.stage,
            entry.attempts.len(),
            if entry.attempts.len() == 1 { "" } else { "s" },
            entry.duration_ms
        );
    }
    for warning in &trace.warnings {
        eprintln!("{id}: warning: {warning}");
    }
}

fn write_stages(dir: &Path, stages: &[StageDocument]) -> Result<(), String> {
    for doc in stages {
        let name = format!("stage{}.json", doc.stage.number());
        write_file(dir, &name, &serialize_stage_document(doc))?;
    }
    Ok(())
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), String> {
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

// ---------------------------------------------------------------------------
// validate
// ---------------------------------------------------------------------------

fn cmd_validate(args: &ValidateArgs) -> i32 {
    let turtle = match std::fs::read_to_string(&args.graph) {
        Ok(t) => t,
        Err(e) => return usage_error(&format!("cannot read {}: {e}", args.graph.display())),
    };
    let graph = match parse_turtle(&turtle) {
        Ok(g) => g,
        Err(e) => return usage_error(&format!("{}: {e}", args.graph.display())),
    };
    let source_text = match std::fs::read_to_string(&args.source) {
        Ok(t) => t,
        Err(e) => return usage_error(&format!("cannot read {}: {e}", args.source.display())),
    };
    let id = args
        .source
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("procedure");
    let source = match ProcedureText::from_input_text(id, &source_text) {
        Ok(p) => p,
        Err(e) => return usage_error(&format!("{}: {e}", args.source.display())),
    };
    let terms = match &args.terms {
        None => OntologyTerms::default(),
        Some(path) => {
            let text = match std::fs::read_to_string(path) {
                Ok(t) => t,
                Err(e) => return usage_error(&format!("cannot read {}: {e}", path.display())),
            };
            match OntologyTerms::from_config_json(&text) {
                Ok(t) => t,
                Err(e) => return usage_error(&e.to_string()),
            }
        }
    };

    let violations = validate_graph(&graph, &terms, &source);
    if violations.is_empty() {
        println!("ok: graph conforms ({} triples)", graph.len());
        EXIT_OK
    } else {
        for v in &violations {
            println!("{v}");
        }
        eprintln!("{} violation(s)", violations.len());
        EXIT_VIOLATIONS
    }
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

fn cmd_eval(args: &EvalArgs, output_dir: &Path) -> i32 {
    let csv_text = match std::fs::read_to_string(&args.ratings) {
        Ok(t) => t,
        Err(e) => return usage_error(&format!("cannot read {}: {e}", args.ratings.display())),
    };
    let matrix = match load_ratings(&csv_text) {
        Ok(m) => m,
        Err(e) => return usage_error(&e.to_string()),
    };
    let report = agreement_report::<f64>(&matrix, args.metric);
    print!("{}", report.render_table());
    if let Err(e) = std::fs::create_dir_all(output_dir) {
        return usage_error(&format!("cannot create {}: {e}", output_dir.display()));
    }
    if let Err(e) = write_file(output_dir, "report.json", &report.to_json()) {
        return usage_error(&e);
    }
    eprintln!("report written to {}", output_dir.join("report.json").display());
    EXIT_OK
}
