//! Spatial query processing: direct/typed/expanded subject retrieval and
//! original/reversed object retrieval, scored as filtered link prediction.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::ranking::{mrr_hits, rank_candidates, RetrievalMetrics};
use super::EvalContext;
use crate::dataset::{Corpus, RelationTriplet, Split};
use crate::geometry::{to_wkt_precision, GeomType, Geometry};
use crate::llm::{run_parallel, ChatClient, ChatMessage, EmbeddingClient, LlmError};
use crate::prompts::{
    parse_generated_geometry, render_task2_generation, render_task2_object_query,
    render_task2_query, GenAnswer, GenExample, GenStyle,
};
use crate::topology::{classify_predicate, Predicate};

/// One retrieval triplet with resolved geometries.
#[derive(Clone, Debug)]
pub struct Task2Item {
    pub id: String,
    pub subject_id: String,
    pub object_id: String,
    pub predicate: Predicate,
    pub subject: Geometry,
    pub object: Geometry,
}

pub fn materialize_task2(
    corpus: &Corpus,
    triplets: &[RelationTriplet],
) -> Result<Vec<Task2Item>, String> {
    triplets
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let subject = corpus
                .get(&t.subject_id)
                .ok_or_else(|| format!("missing entity {}", t.subject_id))?;
            let object = corpus
                .get(&t.object_id)
                .ok_or_else(|| format!("missing entity {}", t.object_id))?;
            Ok(Task2Item {
                id: format!("t2-{i:05}"),
                subject_id: t.subject_id.clone(),
                object_id: t.object_id.clone(),
                predicate: t.predicate,
                subject: subject.geometry.clone(),
                object: object.geometry.clone(),
            })
        })
        .collect()
}

/// Query formulation for the retrieval run.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QueryMode {
    /// "Retrieve a geometry that ..." — target is the subject.
    Direct,
    /// "Retrieve a LINESTRING geometry that ...".
    Typed,
    /// Typed query expanded with one generated geometry.
    Expanded1,
    /// Typed query expanded with three generated geometries.
    Expanded3,
    /// Object retrieval keeping subject-to-object directionality.
    ObjectOriginal,
    /// Object retrieval with the inverse predicate, phrased from the
    /// target's point of view.
    ObjectReversed,
}

impl QueryMode {
    pub fn name(self) -> &'static str {
        match self {
            QueryMode::Direct => "direct",
            QueryMode::Typed => "typed",
            QueryMode::Expanded1 => "expanded-1",
            QueryMode::Expanded3 => "expanded-3",
            QueryMode::ObjectOriginal => "object-original",
            QueryMode::ObjectReversed => "object-reversed",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "direct" => Some(QueryMode::Direct),
            "typed" => Some(QueryMode::Typed),
            "expanded-1" | "expanded1" => Some(QueryMode::Expanded1),
            "expanded-3" | "expanded3" => Some(QueryMode::Expanded3),
            "object-original" => Some(QueryMode::ObjectOriginal),
            "object-reversed" => Some(QueryMode::ObjectReversed),
            _ => None,
        }
    }

    pub fn expansions(self) -> usize {
        match self {
            QueryMode::Expanded1 => 1,
            QueryMode::Expanded3 => 3,
            _ => 0,
        }
    }

    pub fn targets_object(self) -> bool {
        matches!(self, QueryMode::ObjectOriginal | QueryMode::ObjectReversed)
    }
}

/// A generation demonstration drawn from the few-shot split.
#[derive(Clone, Debug)]
pub struct Task2FewshotExample {
    pub predicate: Predicate,
    pub type_a: GeomType,
    pub type_b: GeomType,
    pub example: GenExample,
}

/// Build generation demonstrations from few-shot triplets: the true
/// subject is the good response; a subject borrowed from a different
/// predicate serves as the bad one.
pub fn gen_examples_from_fewshot(
    corpus: &Corpus,
    triplets: &[RelationTriplet],
    ctx: &EvalContext,
) -> Vec<Task2FewshotExample> {
    let fewshot: Vec<&RelationTriplet> = triplets
        .iter()
        .filter(|t| t.split == Some(Split::Fewshot) && t.predicate != Predicate::Disjoint)
        .collect();
    fewshot
        .iter()
        .filter_map(|t| {
            let subject = corpus.get(&t.subject_id)?;
            let object = corpus.get(&t.object_id)?;
            let request = render_task2_query(
                &ctx.templates,
                t.predicate,
                &to_wkt_precision(&object.geometry, ctx.precision),
                Some(t.type_a),
                &[],
            )
            .ok()?;
            let bad = fewshot
                .iter()
                .find(|u| u.predicate != t.predicate && u.type_a == t.type_a)
                .and_then(|u| corpus.get(&u.subject_id))
                .map(|e| to_wkt_precision(&e.geometry, ctx.precision));
            Some(Task2FewshotExample {
                predicate: t.predicate,
                type_a: t.type_a,
                type_b: t.type_b,
                example: GenExample {
                    request,
                    good: to_wkt_precision(&subject.geometry, ctx.precision),
                    bad,
                },
            })
        })
        .collect()
}

/// Validity scoring of one generated geometry.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GenRecord {
    pub item_id: String,
    pub sample_index: u32,
    pub prompt: String,
    pub response: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub valid_wkt: bool,
    pub type_match: bool,
    pub predicate_match: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generated_relation: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distance: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wkt: Option<String>,
}

/// Aggregate generation validity, mirroring the per-prompt table:
/// parseable WKT rate, correct geometry type, relation accuracy, and the
/// mean topological distance of relation misses.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenValidity {
    pub attempts: usize,
    pub valid_wkt: f64,
    pub geometry_type: f64,
    pub predicate: f64,
    pub dist_incorrect: f64,
    pub dist_incorrect_count: usize,
}

pub fn gen_validity(records: &[GenRecord]) -> GenValidity {
    let attempts = records.len();
    let n = attempts.max(1) as f64;
    let valid = records.iter().filter(|r| r.valid_wkt).count().max(1) as f64;
    let valid_count = records.iter().filter(|r| r.valid_wkt).count();
    let distances: Vec<u32> = records.iter().filter_map(|r| r.distance).collect();
    GenValidity {
        attempts,
        valid_wkt: valid_count as f64 / n,
        geometry_type: records.iter().filter(|r| r.type_match).count() as f64 / valid,
        predicate: records.iter().filter(|r| r.predicate_match).count() as f64 / valid,
        dist_incorrect: if distances.is_empty() {
            0.0
        } else {
            distances.iter().sum::<u32>() as f64 / distances.len() as f64
        },
        dist_incorrect_count: distances.len(),
    }
}

/// Ranking audit record for one query.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RankRecord {
    pub item_id: String,
    pub target_id: String,
    pub query: String,
    pub rank: Option<usize>,
    pub top: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct Task2Output {
    pub metrics: RetrievalMetrics,
    pub generation: Option<GenValidity>,
    pub rank_records: Vec<RankRecord>,
    pub gen_records: Vec<GenRecord>,
}

/// Run retrieval for every item in the given mode.
///
/// Expanded modes generate geometries through the chat backend (distinct
/// sample indices per expansion), score their validity, and append only
/// the valid ones to the query text. Ranking always uses the filtered
/// setting: known positive answers other than the target are removed.
pub fn run_task2(
    items: &[Task2Item],
    chat: Option<&ChatClient>,
    embed: &EmbeddingClient,
    ctx: &EvalContext,
    mode: QueryMode,
    gen_style: GenStyle,
    gen_pool: &[Task2FewshotExample],
    ks: &[usize],
) -> Result<Task2Output, LlmError> {
    // Candidate corpus: every distinct target entity as its WKT text.
    let mut candidates_map: BTreeMap<String, String> = BTreeMap::new();
    for item in items {
        let (id, geometry) = if mode.targets_object() {
            (&item.object_id, &item.object)
        } else {
            (&item.subject_id, &item.subject)
        };
        candidates_map
            .entry(id.clone())
            .or_insert_with(|| to_wkt_precision(geometry, ctx.precision));
    }
    let candidate_ids: Vec<String> = candidates_map.keys().cloned().collect();
    let candidate_texts: Vec<String> = candidates_map.values().cloned().collect();
    let candidate_vectors = embed.embed_batch(&candidate_texts)?;
    let candidates: Vec<(String, Vec<f64>)> = candidate_ids
        .into_iter()
        .zip(candidate_vectors)
        .collect();

    // Known positives per query for the filtered setting.
    let mut positives: BTreeMap<(Predicate, String), BTreeSet<String>> = BTreeMap::new();
    for item in items {
        if mode.targets_object() {
            positives
                .entry((item.predicate, item.subject_id.clone()))
                .or_default()
                .insert(item.object_id.clone());
        } else {
            positives
                .entry((item.predicate, item.object_id.clone()))
                .or_default()
                .insert(item.subject_id.clone());
        }
    }

    // Generation pass for expanded modes.
    let mut gen_records: Vec<GenRecord> = Vec::new();
    let mut expansions: BTreeMap<String, Vec<String>> = BTreeMap::new();
    if mode.expansions() > 0 {
        let chat = chat.ok_or_else(|| {
            LlmError::Config("expanded query modes need a chat backend".to_string())
        })?;
        let jobs: Vec<(usize, u32)> = items
            .iter()
            .enumerate()
            .flat_map(|(i, _)| (0..mode.expansions() as u32).map(move |s| (i, s)))
            .collect();
        let produced = run_parallel(&jobs, ctx.max_concurrency, |(i, sample)| {
            let item = &items[*i];
            generate_one(item, chat, ctx, gen_style, gen_pool, *sample)
        });
        let _ = chat.flush();
        for ((i, _), record) in jobs.iter().zip(produced) {
            if let Some(wkt) = &record.wkt {
                expansions
                    .entry(items[*i].id.clone())
                    .or_default()
                    .push(wkt.clone());
            }
            gen_records.push(record);
        }
    }

    // Build query texts and embed them.
    let mut queries = Vec::with_capacity(items.len());
    for item in items {
        let object_wkt = to_wkt_precision(&item.object, ctx.precision);
        let subject_wkt = to_wkt_precision(&item.subject, ctx.precision);
        let expansion = expansions.get(&item.id).cloned().unwrap_or_default();
        let text = match mode {
            QueryMode::Direct => {
                render_task2_query(&ctx.templates, item.predicate, &object_wkt, None, &[])
            }
            QueryMode::Typed | QueryMode::Expanded1 | QueryMode::Expanded3 => render_task2_query(
                &ctx.templates,
                item.predicate,
                &object_wkt,
                Some(item.subject.geom_type()),
                &expansion,
            ),
            QueryMode::ObjectOriginal => render_task2_object_query(
                &ctx.templates,
                item.predicate,
                &subject_wkt,
                item.object.geom_type(),
                false,
                &[],
            ),
            QueryMode::ObjectReversed => render_task2_object_query(
                &ctx.templates,
                item.predicate,
                &subject_wkt,
                item.object.geom_type(),
                true,
                &[],
            ),
        }
        .map_err(|e| LlmError::Config(e.to_string()))?;
        queries.push(text);
    }
    let query_vectors = embed.embed_batch(&queries)?;
    let _ = embed.flush();

    let mut rank_records = Vec::with_capacity(items.len());
    let mut ranks = Vec::with_capacity(items.len());
    for ((item, query), vector) in items.iter().zip(&queries).zip(&query_vectors) {
        let (target_id, key) = if mode.targets_object() {
            (
                item.object_id.clone(),
                (item.predicate, item.subject_id.clone()),
            )
        } else {
            (
                item.subject_id.clone(),
                (item.predicate, item.object_id.clone()),
            )
        };
        let filter = positives.get(&key).cloned().unwrap_or_default();
        let result = rank_candidates(vector, &candidates, &target_id, &filter);
        ranks.push(result.rank);
        rank_records.push(RankRecord {
            item_id: item.id.clone(),
            target_id,
            query: query.clone(),
            rank: result.rank,
            top: result.top,
        });
    }

    let generation = if gen_records.is_empty() {
        None
    } else {
        Some(gen_validity(&gen_records))
    };
    Ok(Task2Output {
        metrics: mrr_hits(&ranks, ks),
        generation,
        rank_records,
        gen_records,
    })
}

fn generate_one(
    item: &Task2Item,
    chat: &ChatClient,
    ctx: &EvalContext,
    style: GenStyle,
    pool: &[Task2FewshotExample],
    sample_index: u32,
) -> GenRecord {
    let object_wkt = to_wkt_precision(&item.object, ctx.precision);
    let subject_type = item.subject.geom_type();
    let examples: Vec<GenExample> = pool
        .iter()
        .filter(|e| {
            e.predicate == item.predicate
                && e.type_a == subject_type
                && e.type_b == item.object.geom_type()
        })
        .take(3)
        .map(|e| e.example.clone())
        .collect();
    let fallback: Vec<GenExample> = if examples.is_empty() && style.needs_examples() {
        pool.iter().take(3).map(|e| e.example.clone()).collect()
    } else {
        examples
    };
    let mut record = GenRecord {
        item_id: item.id.clone(),
        sample_index,
        prompt: String::new(),
        response: String::new(),
        error: None,
        valid_wkt: false,
        type_match: false,
        predicate_match: false,
        generated_relation: None,
        distance: None,
        wkt: None,
    };
    let prompt = match render_task2_generation(
        &ctx.templates,
        item.predicate,
        &object_wkt,
        subject_type,
        style,
        &fallback,
    ) {
        Ok(p) => p,
        Err(e) => {
            record.error = Some(e.to_string());
            return record;
        }
    };
    record.prompt = prompt.clone();
    let response = match chat.chat(&[ChatMessage::user(&prompt)], sample_index) {
        Ok(x) => x.text,
        Err(e) => {
            record.error = Some(e.to_string());
            return record;
        }
    };
    record.response = response.clone();
    let generated = match parse_generated_geometry(&response) {
        GenAnswer::Geometry(g) => g,
        GenAnswer::Invalid => return record,
    };
    record.valid_wkt = true;
    record.type_match = generated.geom_type() == subject_type;
    match classify_predicate(&generated, &item.object) {
        Ok(Some(p)) => {
            record.generated_relation = Some(p.name().to_string());
            record.predicate_match = p == item.predicate;
            if !record.predicate_match {
                record.distance = ctx
                    .graphs
                    .distance(
                        (generated.geom_type(), item.object.geom_type()),
                        p,
                        item.predicate,
                    )
                    .ok();
            }
        }
        _ => {
            record.generated_relation = Some("undetermined".to_string());
        }
    }
    if record.valid_wkt {
        record.wkt = Some(to_wkt_precision(&generated, ctx.precision));
    }
    record
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mode_parsing() {
        assert_eq!(QueryMode::parse("direct"), Some(QueryMode::Direct));
        assert_eq!(QueryMode::parse("expanded-1"), Some(QueryMode::Expanded1));
        assert_eq!(QueryMode::parse("nope"), None);
        assert_eq!(QueryMode::Expanded3.expansions(), 3);
        assert!(QueryMode::ObjectReversed.targets_object());
    }

    #[test]
    fn gen_validity_rates() {
        let base = GenRecord {
            item_id: "i".into(),
            sample_index: 0,
            prompt: String::new(),
            response: String::new(),
            error: None,
            valid_wkt: true,
            type_match: true,
            predicate_match: true,
            generated_relation: None,
            distance: None,
            wkt: None,
        };
        let mut bad = base.clone();
        bad.valid_wkt = false;
        bad.type_match = false;
        bad.predicate_match = false;
        let mut wrong = base.clone();
        wrong.predicate_match = false;
        wrong.distance = Some(2);
        let v = gen_validity(&[base, bad, wrong]);
        assert_eq!(v.attempts, 3);
        assert!((v.valid_wkt - 2.0 / 3.0).abs() < 1e-12);
        assert!((v.geometry_type - 1.0).abs() < 1e-12);
        assert!((v.predicate - 0.5).abs() < 1e-12);
        assert_eq!(v.dist_incorrect, 2.0);
    }
}
