//! Vernacular conversion runs: repeated samples per pair, scored by
//! frequency, accuracy, and the entropy of the mention distribution.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::EvalContext;
use crate::dataset::{ConversionPair, PairContext};
use crate::llm::{run_parallel, ChatClient, ChatMessage};
use crate::prompts::{parse_task3_answer, render_task3, Task3Answer, Task3Context};
use crate::topology::Predicate;

/// One sampled conversion run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Task3RunRecord {
    pub pair_index: usize,
    pub sample_index: u32,
    pub prompt: String,
    pub response: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub mentions: Vec<Predicate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub primary: Option<Predicate>,
    pub multi_candidate: bool,
}

/// Scores for one conversion pair over all repetitions.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Task3PairResult {
    pub description: String,
    pub predicate: Predicate,
    pub context_kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub context: Option<String>,
    pub support: usize,
    pub repetitions: usize,
    /// Runs whose answer set includes the ground-truth predicate.
    pub frequency: usize,
    /// Correct mentions over all predicate mentions.
    pub accuracy: f64,
    /// Natural-log entropy of the mention distribution, in [0, ln 7].
    pub entropy: f64,
    pub invalid_runs: usize,
    pub mention_counts: BTreeMap<String, usize>,
}

#[derive(Clone, Debug)]
pub struct Task3Output {
    pub results: Vec<Task3PairResult>,
    pub records: Vec<Task3RunRecord>,
}

/// Shannon entropy (natural log) of a count distribution. Zero when a
/// single outcome holds all the mass; `ln k` for uniform over `k`.
pub fn entropy(counts: &BTreeMap<String, usize>) -> f64 {
    let total: usize = counts.values().sum();
    if total == 0 {
        return 0.0;
    }
    let mut h = 0.0;
    for &c in counts.values() {
        if c > 0 {
            let p = c as f64 / total as f64;
            h -= p * p.ln();
        }
    }
    h
}

fn pair_context(pair: &ConversionPair) -> Option<Task3Context> {
    match &pair.context {
        PairContext::None => None,
        PairContext::PlaceType { a, b } => Some(Task3Context::PlaceTypes(a.clone(), b.clone())),
        PairContext::GeometryType { a, b } => {
            Some(Task3Context::GeomTypes(a.clone(), b.clone()))
        }
        PairContext::PlaceName { a, b } => Some(Task3Context::PlaceNames(a.clone(), b.clone())),
    }
}

fn context_label(pair: &ConversionPair) -> Option<String> {
    match &pair.context {
        PairContext::None => None,
        PairContext::PlaceType { a, b }
        | PairContext::GeometryType { a, b }
        | PairContext::PlaceName { a, b } => Some(format!("{a}/{b}")),
    }
}

/// Run every conversion pair `repetitions` times with distinct sample
/// indices. With `with_context` false the context sentence is omitted so
/// the two settings can be compared on the same pairs.
pub fn run_task3(
    pairs: &[ConversionPair],
    client: &ChatClient,
    ctx: &EvalContext,
    repetitions: u32,
    with_context: bool,
) -> Task3Output {
    let jobs: Vec<(usize, u32)> = (0..pairs.len())
        .flat_map(|i| (0..repetitions).map(move |s| (i, s)))
        .collect();
    let records = run_parallel(&jobs, ctx.max_concurrency, |(i, sample)| {
        let pair = &pairs[*i];
        let context = if with_context {
            pair_context(pair)
        } else {
            None
        };
        let mut record = Task3RunRecord {
            pair_index: *i,
            sample_index: *sample,
            prompt: String::new(),
            response: String::new(),
            error: None,
            mentions: Vec::new(),
            primary: None,
            multi_candidate: false,
        };
        let prompt = match render_task3(&ctx.templates, &pair.description, context.as_ref()) {
            Ok(p) => p,
            Err(e) => {
                record.error = Some(e.to_string());
                return record;
            }
        };
        record.prompt = prompt.clone();
        match client.chat(&[ChatMessage::user(&prompt)], *sample) {
            Ok(exchange) => {
                record.response = exchange.text.clone();
                let answer = parse_task3_answer(&exchange.text);
                record.primary = answer.primary();
                record.multi_candidate = answer.is_multi_candidate();
                if let Task3Answer::Mentions(m) = answer {
                    record.mentions = m;
                }
            }
            Err(e) => record.error = Some(e.to_string()),
        }
        record
    });
    let _ = client.flush();

    let results = pairs
        .iter()
        .enumerate()
        .map(|(i, pair)| {
            let runs: Vec<&Task3RunRecord> =
                records.iter().filter(|r| r.pair_index == i).collect();
            let mut mention_counts: BTreeMap<String, usize> = BTreeMap::new();
            let mut frequency = 0;
            let mut invalid_runs = 0;
            for run in &runs {
                if run.mentions.is_empty() {
                    invalid_runs += 1;
                    continue;
                }
                if run.mentions.contains(&pair.predicate) {
                    frequency += 1;
                }
                for m in &run.mentions {
                    *mention_counts.entry(m.name().to_string()).or_default() += 1;
                }
            }
            let total_mentions: usize = mention_counts.values().sum();
            let correct_mentions = mention_counts
                .get(pair.predicate.name())
                .copied()
                .unwrap_or(0);
            Task3PairResult {
                description: pair.description.clone(),
                predicate: pair.predicate,
                context_kind: pair.context.kind().to_string(),
                context: context_label(pair),
                support: pair.support,
                repetitions: runs.len(),
                frequency,
                accuracy: if total_mentions == 0 {
                    0.0
                } else {
                    correct_mentions as f64 / total_mentions as f64
                },
                entropy: entropy(&mention_counts),
                invalid_runs,
                mention_counts,
            }
        })
        .collect();

    Task3Output { results, records }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entropy_limits() {
        let mut counts = BTreeMap::new();
        counts.insert("touches".to_string(), 10);
        assert_eq!(entropy(&counts), 0.0);
        counts.insert("within".to_string(), 10);
        assert!((entropy(&counts) - 2.0f64.ln()).abs() < 1e-9);
        let uniform7: BTreeMap<String, usize> = crate::topology::Predicate::ALL
            .iter()
            .map(|p| (p.name().to_string(), 3))
            .collect();
        assert!((entropy(&uniform7) - 7.0f64.ln()).abs() < 1e-9);
        assert!(entropy(&BTreeMap::new()) == 0.0);
    }
}
