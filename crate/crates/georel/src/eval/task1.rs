//! Relation qualification: run, score, and tabulate.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{EvalContext, EvalRecord, Tuple};
use crate::dataset::{Corpus, RelationTriplet, Split};
use crate::geometry::{to_wkt_precision, Geometry};
use crate::llm::{run_parallel, ChatClient, ChatMessage};
use crate::prompts::{
    parse_task1_answer, render_task1, select_fewshot_examples, FewshotCandidate, Task1Answer,
    Task1Example, Task1Style,
};
use crate::topology::{is_valid_combination, Predicate};

/// One qualification query: a geometry pair with its ground truth.
#[derive(Clone, Debug)]
pub struct Task1Item {
    pub id: String,
    pub subject: Geometry,
    pub object: Geometry,
    pub truth: Predicate,
}

/// Resolve evaluation-split triplets against the corpus.
pub fn materialize_task1(
    corpus: &Corpus,
    triplets: &[RelationTriplet],
) -> Result<Vec<Task1Item>, String> {
    triplets
        .iter()
        .filter(|t| t.split.is_none() || t.split == Some(Split::Eval))
        .enumerate()
        .map(|(i, t)| {
            let subject = corpus
                .get(&t.subject_id)
                .ok_or_else(|| format!("missing entity {}", t.subject_id))?;
            let object = corpus
                .get(&t.object_id)
                .ok_or_else(|| format!("missing entity {}", t.object_id))?;
            Ok(Task1Item {
                id: format!("t1-{i:05}-{}-{}", t.subject_id, t.object_id),
                subject: subject.geometry.clone(),
                object: object.geometry.clone(),
                truth: t.predicate,
            })
        })
        .collect()
}

/// Turn the few-shot split into prompt demonstration candidates.
pub fn fewshot_pool(
    corpus: &Corpus,
    triplets: &[RelationTriplet],
    ctx: &EvalContext,
) -> Vec<FewshotCandidate> {
    triplets
        .iter()
        .filter(|t| t.split == Some(Split::Fewshot))
        .filter_map(|t| {
            let subject = corpus.get(&t.subject_id)?;
            let object = corpus.get(&t.object_id)?;
            Some(FewshotCandidate {
                combo: t.combo(),
                example: Task1Example {
                    wkt_a: to_wkt_precision(&subject.geometry, ctx.precision),
                    wkt_b: to_wkt_precision(&object.geometry, ctx.precision),
                    type_a: t.type_a,
                    predicate: t.predicate,
                    type_b: t.type_b,
                },
            })
        })
        .collect()
}

/// Run every item through the backend: render, ask, parse, score.
/// Backend failures are recorded per item and the run continues.
pub fn run_task1(
    items: &[Task1Item],
    client: &ChatClient,
    ctx: &EvalContext,
    style: Task1Style,
    pool: &[FewshotCandidate],
    seed: u64,
) -> Vec<EvalRecord> {
    let records = run_parallel(items, ctx.max_concurrency, |item| {
        let truth = Tuple {
            type_a: item.subject.geom_type(),
            predicate: item.truth,
            type_b: item.object.geom_type(),
        };
        let examples = if style.needs_examples() {
            match select_fewshot_examples(
                pool,
                (truth.type_a, truth.type_b),
                None,
                seed,
            ) {
                Ok(ex) => ex,
                Err(e) => {
                    return error_record(item, style, truth, format!("examples: {e}"));
                }
            }
        } else {
            Vec::new()
        };
        let prompt = match render_task1(
            &ctx.templates,
            &item.subject,
            &item.object,
            style,
            &examples,
            ctx.precision,
        ) {
            Ok(p) => p,
            Err(e) => return error_record(item, style, truth, format!("render: {e}")),
        };
        let exchange = match client.chat(&[ChatMessage::user(&prompt)], 0) {
            Ok(x) => x,
            Err(e) => {
                let mut rec = error_record(item, style, truth, e.to_string());
                rec.prompt = prompt;
                return rec;
            }
        };
        score_response(item, style, truth, prompt, exchange.text, ctx)
    });
    let _ = client.flush();
    records
}

fn error_record(
    item: &Task1Item,
    style: Task1Style,
    truth: Tuple,
    error: String,
) -> EvalRecord {
    EvalRecord {
        item_id: item.id.clone(),
        task: "task1".to_string(),
        style: style.name().to_string(),
        prompt: String::new(),
        response: String::new(),
        error: Some(error),
        truth,
        parsed: None,
        format_valid: false,
        types_valid: false,
        combo_valid: false,
        correct: false,
        distance: None,
    }
}

fn score_response(
    item: &Task1Item,
    style: Task1Style,
    truth: Tuple,
    prompt: String,
    response: String,
    ctx: &EvalContext,
) -> EvalRecord {
    let parsed = parse_task1_answer(&response);
    let (parsed_tuple, format_valid) = match parsed {
        Task1Answer::Tuple {
            type_a,
            predicate,
            type_b,
        } => (
            Some(Tuple {
                type_a,
                predicate,
                type_b,
            }),
            true,
        ),
        Task1Answer::FormatInvalid => (None, false),
    };
    let types_valid = parsed_tuple
        .map(|p| p.type_a == truth.type_a && p.type_b == truth.type_b)
        .unwrap_or(false);
    let combo_valid = types_valid
        && parsed_tuple
            .map(|p| is_valid_combination(p.type_a, p.predicate, p.type_b))
            .unwrap_or(false);
    let correct = combo_valid
        && parsed_tuple
            .map(|p| p.predicate == truth.predicate)
            .unwrap_or(false);
    let distance = if combo_valid && !correct {
        parsed_tuple.and_then(|p| {
            ctx.graphs
                .distance((truth.type_a, truth.type_b), p.predicate, truth.predicate)
                .ok()
        })
    } else {
        None
    };
    EvalRecord {
        item_id: item.id.clone(),
        task: "task1".to_string(),
        style: style.name().to_string(),
        prompt,
        response,
        error: None,
        truth,
        parsed: parsed_tuple,
        format_valid,
        types_valid,
        combo_valid,
        correct,
        distance,
    }
}

/// Aggregate qualification metrics over a record set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Task1Metrics {
    pub total: usize,
    pub backend_errors: usize,
    pub format_validity: f64,
    pub type_validity: f64,
    pub predicate_validity: f64,
    /// Accuracy over valid outputs only.
    pub accuracy: f64,
    /// Accuracy with all records in the denominator.
    pub accuracy_over_all: f64,
    pub invalid_rate: f64,
    pub incorrect_rate: f64,
    pub dist_incorrect: f64,
    pub dist_incorrect_count: usize,
}

/// Compute the validity rates, accuracy (over valid outputs, with the
/// over-all variant alongside) and the mean topological distance of the
/// incorrect predictions. Aggregation is order-independent.
pub fn task1_metrics(records: &[EvalRecord]) -> Task1Metrics {
    let total = records.len();
    let n = total.max(1) as f64;
    let count = |f: &dyn Fn(&EvalRecord) -> bool| records.iter().filter(|r| f(r)).count();
    let valid = count(&|r| r.combo_valid);
    let correct = count(&|r| r.correct);
    let incorrect = count(&|r| r.combo_valid && !r.correct);
    let distances: Vec<u32> = records.iter().filter_map(|r| r.distance).collect();
    Task1Metrics {
        total,
        backend_errors: count(&|r| r.error.is_some()),
        format_validity: count(&|r| r.format_valid) as f64 / n,
        type_validity: count(&|r| r.types_valid) as f64 / n,
        predicate_validity: valid as f64 / n,
        accuracy: if valid == 0 {
            0.0
        } else {
            correct as f64 / valid as f64
        },
        accuracy_over_all: correct as f64 / n,
        invalid_rate: (total - valid) as f64 / n,
        incorrect_rate: incorrect as f64 / n,
        dist_incorrect: if distances.is_empty() {
            0.0
        } else {
            distances.iter().sum::<u32>() as f64 / distances.len() as f64
        },
        dist_incorrect_count: distances.len(),
    }
}

/// Fixed predicate order for confusion rows and columns.
pub const PREDICATE_ORDER: [Predicate; 7] = Predicate::ALL;

/// A truth-by-prediction count matrix with an off-matrix bucket for
/// invalid outputs; the total is always preserved.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Confusion {
    pub counts: [[u64; 7]; 7],
    pub invalid: [u64; 7],
}

impl Confusion {
    fn new() -> Self {
        Confusion {
            counts: [[0; 7]; 7],
            invalid: [0; 7],
        }
    }

    fn add(&mut self, record: &EvalRecord) {
        let truth_index = PREDICATE_ORDER
            .iter()
            .position(|p| *p == record.truth.predicate)
            .unwrap();
        match record.parsed.filter(|_| record.combo_valid) {
            Some(p) => {
                let pred_index = PREDICATE_ORDER
                    .iter()
                    .position(|q| *q == p.predicate)
                    .unwrap();
                self.counts[truth_index][pred_index] += 1;
            }
            None => self.invalid[truth_index] += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum::<u64>() + self.invalid.iter().sum::<u64>()
    }

    /// CSV rows: truth label, one column per predicted predicate, then
    /// the invalid bucket.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("truth");
        for p in PREDICATE_ORDER {
            out.push(',');
            out.push_str(p.name());
        }
        out.push_str(",invalid\n");
        for (i, p) in PREDICATE_ORDER.iter().enumerate() {
            out.push_str(p.name());
            for j in 0..7 {
                out.push_str(&format!(",{}", self.counts[i][j]));
            }
            out.push_str(&format!(",{}\n", self.invalid[i]));
        }
        out
    }
}

pub fn confusion(records: &[EvalRecord]) -> Confusion {
    let mut m = Confusion::new();
    for r in records {
        m.add(r);
    }
    m
}

/// Confusion matrices per geometry-type combination.
pub fn confusion_by_combo(records: &[EvalRecord]) -> BTreeMap<String, Confusion> {
    let mut out: BTreeMap<String, Confusion> = BTreeMap::new();
    for r in records {
        let key = format!("{}-{}", r.truth.type_a.name(), r.truth.type_b.name());
        out.entry(key).or_insert_with(Confusion::new).add(r);
    }
    out
}
