//! Procedural knowledge extraction from free-form text.
//!
//! The crate has three parts:
//!
//! * a seven-prompt chain ([`chain`]) that drafts, validates, filters,
//!   orders and enriches the steps of a procedure, backed by either an
//!   OpenAI-compatible endpoint or a deterministic heuristic ([`backend`]);
//! * a small RDF toolkit ([`kg`]) that turns the final stage document into
//!   a Turtle knowledge graph and validates it against the source text;
//! * an inter-rater agreement harness ([`eval`]) computing Krippendorff's
//!   alpha and descriptive statistics over human ratings of the outputs.
//!
//! Stage documents and their invariants live in [`domain`].
//!
//! All statistics are generic over the scalar type through [`Scalar`];
//! `f64`-backed aliases are provided at the crate root.

pub mod backend;
pub mod chain;
pub mod domain;
pub mod eval;
pub mod kg;

use num_traits::{Float, FromPrimitive};
use std::fmt::{Debug, Display};
use std::iter::Sum;

/// Floating-point scalar the statistics are generic over.
///
/// Implemented by `f32` and `f64`; scores themselves are small integers, so
/// any float type represents them exactly.
pub trait Scalar:
    Float + FromPrimitive + Sum<Self> + Debug + Display + Send + Sync + 'static
{
}

impl<T> Scalar for T where
    T: Float + FromPrimitive + Sum<T> + Debug + Display + Send + Sync + 'static
{
}

/// `f64`-backed agreement result, the default precision used by the CLI.
pub type Agreement = eval::AgreementResult<f64>;
/// `f64`-backed descriptive statistics.
pub type Stats = eval::DescriptiveStats<f64>;
/// `f64`-backed agreement report.
pub type Report = eval::AgreementReport<f64>;

pub use backend::{Backend, BackendConfig, BackendError, CompletionRequest, HeuristicBackend, HttpBackend};
pub use chain::{run_pipeline, ChainConfig, PipelineRun, PipelineTrace, PromptId, RunLimits, StageSpec};
pub use domain::{ProcedureText, Stage, StageDocument, StepRecord};
pub use eval::{agreement_report, krippendorff_alpha, load_ratings, Metric, RatingMatrix};
pub use kg::{build_graph, emit_turtle, parse_turtle, validate_graph, OntologyTerms, ProceduralGraph};
