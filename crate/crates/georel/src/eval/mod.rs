//! Task runners and metrics: validity/accuracy/topological distance for
//! relation qualification, filtered MRR and Hits@K for retrieval, and
//! frequency/accuracy/entropy for vernacular conversion.

mod ranking;
mod report;
mod task1;
mod task2;
mod task3;

pub use ranking::{cosine_similarity, mrr_hits, rank_candidates, RankResult, RetrievalMetrics};
pub use report::{file_sha256, fmt3, markdown_table, write_run_dir, RunManifest, RunReport};
pub use task1::{
    confusion, confusion_by_combo, fewshot_pool, materialize_task1, run_task1, task1_metrics,
    Confusion, Task1Item, Task1Metrics, PREDICATE_ORDER,
};
pub use task2::{
    gen_examples_from_fewshot, materialize_task2, run_task2, GenRecord, GenValidity, QueryMode,
    RankRecord, Task2FewshotExample, Task2Item, Task2Output,
};
pub use task3::{entropy, run_task3, Task3Output, Task3PairResult, Task3RunRecord};

use serde::{Deserialize, Serialize};

use crate::geometry::{GeomType, WktPrecision};
use crate::neighborhood::NeighborhoodGraphs;
use crate::prompts::TemplateSet;
use crate::topology::Predicate;

/// A parsed `(type, predicate, type)` tuple inside an [`EvalRecord`].
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Tuple {
    pub type_a: GeomType,
    pub predicate: Predicate,
    pub type_b: GeomType,
}

/// One model interaction with its verdicts — the audit unit every metric
/// is computed from. Verdicts are monotone by construction:
/// `combo_valid` implies `types_valid` implies `format_valid`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EvalRecord {
    pub item_id: String,
    pub task: String,
    pub style: String,
    pub prompt: String,
    pub response: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub truth: Tuple,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parsed: Option<Tuple>,
    pub format_valid: bool,
    pub types_valid: bool,
    pub combo_valid: bool,
    pub correct: bool,
    /// Topological distance between prediction and truth, present only
    /// for valid-but-incorrect records.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distance: Option<u32>,
}

/// Shared wiring for the task runners.
pub struct EvalContext {
    pub templates: TemplateSet,
    pub graphs: NeighborhoodGraphs,
    pub max_concurrency: usize,
    pub precision: WktPrecision,
}

impl Default for EvalContext {
    fn default() -> Self {
        EvalContext {
            templates: TemplateSet::default(),
            graphs: NeighborhoodGraphs::default(),
            max_concurrency: 4,
            // Full precision keeps prompt round-trips exact; the canonical
            // 6-decimal form is available through the CLI flag.
            precision: WktPrecision::Full,
        }
    }
}
