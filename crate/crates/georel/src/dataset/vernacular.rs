//! Vernacular relation descriptions: normalization, context-conditioned
//! conversion pairs, and text extraction through a chat backend.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::llm::{ChatClient, ChatMessage, LlmError};
use crate::topology::Predicate;

/// One verified vernacular observation: "subject {description} object"
/// together with the ground-truth predicate and available context.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct VernacularRecord {
    pub subject_name: String,
    pub description: String,
    pub object_name: String,
    pub predicate: Predicate,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub place_type_a: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub place_type_b: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geom_type_a: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geom_type_b: Option<String>,
}

/// The context a conversion pair is conditioned on.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PairContext {
    None,
    PlaceType { a: String, b: String },
    GeometryType { a: String, b: String },
    PlaceName { a: String, b: String },
}

impl PairContext {
    pub fn kind(&self) -> &'static str {
        match self {
            PairContext::None => "none",
            PairContext::PlaceType { .. } => "place_type",
            PairContext::GeometryType { .. } => "geometry_type",
            PairContext::PlaceName { .. } => "place_name",
        }
    }
}

/// A description + predicate conversion pair, possibly conditioned on
/// context, retained only when supported by enough observations.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct ConversionPair {
    pub description: String,
    pub predicate: Predicate,
    pub context: PairContext,
    pub support: usize,
}

const SYNONYMS: &str = include_str!("../../assets/description_synonyms.txt");

fn synonym_table() -> &'static BTreeMap<String, String> {
    use std::sync::OnceLock;
    static TABLE: OnceLock<BTreeMap<String, String>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut map = BTreeMap::new();
        for line in SYNONYMS.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some((from, to)) = line.split_once("=>") {
                map.insert(from.trim().to_string(), to.trim().to_string());
            }
        }
        map
    })
}

/// Canonicalize a vernacular phrase: lowercase, strip a leading article,
/// then apply the shipped synonym table. Unknown phrases pass through
/// lowercased.
pub fn unify_description(phrase: &str) -> String {
    let mut s = phrase.trim().to_lowercase();
    for article in ["the ", "an ", "a "] {
        if let Some(rest) = s.strip_prefix(article) {
            s = rest.to_string();
            break;
        }
    }
    match synonym_table().get(&s) {
        Some(canonical) => canonical.clone(),
        None => s,
    }
}

const MIN_SUPPORT: usize = 5;
const NAME_SAMPLES: usize = 5;

/// Build context-conditioned conversion pairs from verified records.
///
/// A description that always maps to one predicate yields a single
/// context-free pair. Ambiguous descriptions yield place-type,
/// geometry-type and place-name conditioned pairs wherever the grouping
/// resolves the ambiguity; a description may retain several context
/// kinds. Support below 5 is dropped, and place-name pairs sample
/// exactly 5 instances per qualifying (description, predicate) group,
/// reproducibly per seed.
pub fn build_conversion_pairs(records: &[VernacularRecord], seed: u64) -> Vec<ConversionPair> {
    let mut by_description: BTreeMap<&str, Vec<&VernacularRecord>> = BTreeMap::new();
    for r in records {
        by_description.entry(&r.description).or_default().push(r);
    }

    let mut pairs = Vec::new();
    for (index, (description, group)) in by_description.into_iter().enumerate() {
        let mut predicates: Vec<Predicate> = group.iter().map(|r| r.predicate).collect();
        predicates.sort();
        predicates.dedup();

        if predicates.len() == 1 {
            if group.len() >= MIN_SUPPORT {
                pairs.push(ConversionPair {
                    description: description.to_string(),
                    predicate: predicates[0],
                    context: PairContext::None,
                    support: group.len(),
                });
            }
            continue;
        }

        // Place types as context.
        let mut by_place: BTreeMap<(String, String), Vec<&VernacularRecord>> = BTreeMap::new();
        for r in &group {
            if let (Some(a), Some(b)) = (&r.place_type_a, &r.place_type_b) {
                by_place
                    .entry((a.clone(), b.clone()))
                    .or_default()
                    .push(r);
            }
        }
        for ((a, b), rs) in by_place {
            let mut preds: Vec<Predicate> = rs.iter().map(|r| r.predicate).collect();
            preds.sort();
            preds.dedup();
            if preds.len() == 1 && rs.len() >= MIN_SUPPORT {
                pairs.push(ConversionPair {
                    description: description.to_string(),
                    predicate: preds[0],
                    context: PairContext::PlaceType { a, b },
                    support: rs.len(),
                });
            }
        }

        // Geometry types as context.
        let mut by_geom: BTreeMap<(String, String), Vec<&VernacularRecord>> = BTreeMap::new();
        for r in &group {
            if let (Some(a), Some(b)) = (&r.geom_type_a, &r.geom_type_b) {
                by_geom.entry((a.clone(), b.clone())).or_default().push(r);
            }
        }
        for ((a, b), rs) in by_geom {
            let mut preds: Vec<Predicate> = rs.iter().map(|r| r.predicate).collect();
            preds.sort();
            preds.dedup();
            if preds.len() == 1 && rs.len() >= MIN_SUPPORT {
                pairs.push(ConversionPair {
                    description: description.to_string(),
                    predicate: preds[0],
                    context: PairContext::GeometryType { a, b },
                    support: rs.len(),
                });
            }
        }

        // Place names as context: every concrete pair of places has one
        // relation, so filter (description, predicate) support and sample.
        let mut by_pred: BTreeMap<Predicate, Vec<&VernacularRecord>> = BTreeMap::new();
        for r in &group {
            by_pred.entry(r.predicate).or_default().push(r);
        }
        for (pred, rs) in by_pred {
            if rs.len() < MIN_SUPPORT {
                continue;
            }
            let mut rng =
                ChaCha8Rng::seed_from_u64(seed ^ ((index as u64 + 1) << 16) ^ pred as u64);
            let mut sampled = rs.clone();
            sampled.shuffle(&mut rng);
            sampled.truncate(NAME_SAMPLES);
            for r in sampled {
                pairs.push(ConversionPair {
                    description: description.to_string(),
                    predicate: pred,
                    context: PairContext::PlaceName {
                        a: r.subject_name.clone(),
                        b: r.object_name.clone(),
                    },
                    support: rs.len(),
                });
            }
        }
    }
    pairs
}

/// A raw extracted relation mention, pending manual review.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct RawRelation {
    pub subject: String,
    pub phrase: String,
    pub object: String,
    pub needs_review: bool,
}

/// Use a chat backend to extract direct topological relation mentions
/// between known place names from an abstract.
///
/// Hierarchical chains contribute only the subject with its first direct
/// object: from "a city A in a County B, State C" only (A, in, B)
/// survives — later objects of the same (subject, phrase) and
/// object-to-object tuples are dropped. All results are flagged for
/// manual review.
pub fn extract_relations_from_text(
    abstract_text: &str,
    gazetteer: &[String],
    chat: &ChatClient,
) -> Result<Vec<RawRelation>, LlmError> {
    let prompt = format!(
        "Extract the spatial relation mentions between named places from the text below.\n\
         Only report direct subject-object mentions; when a sentence chains several \
         containers (a city in a county, state), keep only the subject with its first \
         direct object and skip the implied transitive relations.\n\
         Known places: {}.\n\
         Text: {}\n\
         Respond with one relation per line in the form: subject | relation phrase | object. \
         Respond with NONE when there is no spatial relation.",
        gazetteer.join(", "),
        abstract_text
    );
    let exchange = chat.chat(&[ChatMessage::user(&prompt)], 0)?;
    let known = |name: &str| gazetteer.iter().any(|g| g == name);

    let mut out: Vec<RawRelation> = Vec::new();
    for line in exchange.text.lines() {
        let line = line.trim();
        if line.is_empty() || line.eq_ignore_ascii_case("none") {
            continue;
        }
        let fields: Vec<&str> = line.split('|').map(str::trim).collect();
        if fields.len() != 3 {
            continue;
        }
        let (subject, phrase, object) = (fields[0], unify_description(fields[1]), fields[2]);
        if !known(subject) || !known(object) || subject == object {
            continue;
        }
        // First direct object wins for a given (subject, phrase).
        if out
            .iter()
            .any(|r| r.subject == subject && r.phrase == phrase)
        {
            continue;
        }
        // Skip object-to-object links of an already-extracted chain.
        if out
            .iter()
            .any(|r| r.phrase == phrase && r.object == subject)
        {
            continue;
        }
        out.push(RawRelation {
            subject: subject.to_string(),
            phrase,
            object: object.to_string(),
            needs_review: true,
        });
    }
    Ok(out)
}

/// JSONL persistence for vernacular records.
pub fn save_vernacular_records(
    records: &[VernacularRecord],
    path: &std::path::Path,
) -> std::io::Result<()> {
    let mut body = String::new();
    for r in records {
        body.push_str(&serde_json::to_string(r).unwrap());
        body.push('\n');
    }
    std::fs::write(path, body)
}

pub fn load_vernacular_records(path: &std::path::Path) -> std::io::Result<Vec<VernacularRecord>> {
    let text = std::fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let r: VernacularRecord = serde_json::from_str(line).map_err(|e| {
            std::io::Error::new(
                std::io::ErrorKind::InvalidData,
                format!("line {}: {e}", i + 1),
            )
        })?;
        out.push(r);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llm::{BackendConfig, TranscriptChat};
    use std::sync::Arc;

    #[test]
    fn unify_examples() {
        assert_eq!(unify_description("home of"), "is home to");
        assert_eq!(unify_description("is home to"), "is home to");
        assert_eq!(unify_description("Borders"), "borders");
        assert_eq!(unify_description("the home of"), "is home to");
        assert_eq!(unify_description("shares a border with"), "shares a border with");
    }

    fn record(
        desc: &str,
        pred: Predicate,
        places: Option<(&str, &str)>,
        geoms: Option<(&str, &str)>,
        names: (&str, &str),
    ) -> VernacularRecord {
        VernacularRecord {
            subject_name: names.0.to_string(),
            description: desc.to_string(),
            object_name: names.1.to_string(),
            predicate: pred,
            place_type_a: places.map(|(a, _)| a.to_string()),
            place_type_b: places.map(|(_, b)| b.to_string()),
            geom_type_a: geoms.map(|(a, _)| a.to_string()),
            geom_type_b: geoms.map(|(_, b)| b.to_string()),
        }
    }

    #[test]
    fn invariant_description_yields_context_free_pair() {
        let records: Vec<VernacularRecord> = (0..6)
            .map(|i| {
                record(
                    "share border with",
                    Predicate::Touches,
                    None,
                    None,
                    (&format!("A{i}"), &format!("B{i}")),
                )
            })
            .collect();
        let pairs = build_conversion_pairs(&records, 1);
        assert_eq!(pairs.len(), 1);
        assert_eq!(pairs[0].context, PairContext::None);
        assert_eq!(pairs[0].support, 6);
        assert_eq!(pairs[0].predicate, Predicate::Touches);
    }

    #[test]
    fn below_threshold_is_dropped() {
        let records: Vec<VernacularRecord> = (0..4)
            .map(|i| {
                record(
                    "is near",
                    Predicate::Disjoint,
                    None,
                    None,
                    (&format!("A{i}"), &format!("B{i}")),
                )
            })
            .collect();
        assert!(build_conversion_pairs(&records, 1).is_empty());
    }

    #[test]
    fn ambiguous_description_gets_contexts() {
        let mut records = Vec::new();
        for i in 0..6 {
            records.push(record(
                "is bordered by",
                Predicate::Touches,
                Some(("town", "city")),
                Some(("Polygon", "MultiPolygon")),
                (&format!("T{i}"), &format!("C{i}")),
            ));
        }
        for i in 0..5 {
            records.push(record(
                "is bordered by",
                Predicate::Disjoint,
                Some(("city", "river")),
                Some(("Polygon", "LineString")),
                (&format!("X{i}"), &format!("R{i}")),
            ));
        }
        let pairs = build_conversion_pairs(&records, 3);
        let place: Vec<_> = pairs
            .iter()
            .filter(|p| matches!(p.context, PairContext::PlaceType { .. }))
            .collect();
        assert_eq!(place.len(), 2);
        let geom: Vec<_> = pairs
            .iter()
            .filter(|p| matches!(p.context, PairContext::GeometryType { .. }))
            .collect();
        assert_eq!(geom.len(), 2);
        let names: Vec<_> = pairs
            .iter()
            .filter(|p| matches!(p.context, PairContext::PlaceName { .. }))
            .collect();
        // Exactly 5 sampled instances per qualifying (description, predicate).
        assert_eq!(names.len(), 10);
        assert!(pairs.iter().all(|p| p.context != PairContext::None));
        // Same seed, same samples.
        assert_eq!(pairs, build_conversion_pairs(&records, 3));
        assert_ne!(
            pairs
                .iter()
                .filter(|p| matches!(p.context, PairContext::PlaceName { .. }))
                .collect::<Vec<_>>(),
            build_conversion_pairs(&records, 4)
                .iter()
                .filter(|p| matches!(p.context, PairContext::PlaceName { .. }))
                .collect::<Vec<_>>()
        );
    }

    #[test]
    fn extraction_keeps_direct_relations_only() {
        let mut transcript = TranscriptChat::new();
        let abstract_text = "Ashton is a city in a Dane County, Wisconsin.";
        let gazetteer = vec![
            "Ashton".to_string(),
            "Dane County".to_string(),
            "Wisconsin".to_string(),
        ];
        let prompt_response = "Ashton | in | Dane County\nAshton | in | Wisconsin\nDane County | in | Wisconsin";
        // Script the exact prompt the extractor will send.
        let prompt = format!(
            "Extract the spatial relation mentions between named places from the text below.\n\
             Only report direct subject-object mentions; when a sentence chains several \
             containers (a city in a county, state), keep only the subject with its first \
             direct object and skip the implied transitive relations.\n\
             Known places: {}.\n\
             Text: {}\n\
             Respond with one relation per line in the form: subject | relation phrase | object. \
             Respond with NONE when there is no spatial relation.",
            gazetteer.join(", "),
            abstract_text
        );
        transcript.script(&prompt, prompt_response);
        let client =
            ChatClient::new(Arc::new(transcript), &BackendConfig::default()).unwrap();
        let out = extract_relations_from_text(abstract_text, &gazetteer, &client).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].subject, "Ashton");
        assert_eq!(out[0].phrase, "in");
        assert_eq!(out[0].object, "Dane County");
        assert!(out[0].needs_review);
    }

    #[test]
    fn extraction_handles_empty_and_unknown() {
        let mut transcript = TranscriptChat::new();
        let gazetteer = vec!["Springfield".to_string()];
        let abstract_text = "No places relate here.";
        let prompt = format!(
            "Extract the spatial relation mentions between named places from the text below.\n\
             Only report direct subject-object mentions; when a sentence chains several \
             containers (a city in a county, state), keep only the subject with its first \
             direct object and skip the implied transitive relations.\n\
             Known places: {}.\n\
             Text: {}\n\
             Respond with one relation per line in the form: subject | relation phrase | object. \
             Respond with NONE when there is no spatial relation.",
            gazetteer.join(", "),
            abstract_text
        );
        transcript.script(&prompt, "NONE");
        let client =
            ChatClient::new(Arc::new(transcript), &BackendConfig::default()).unwrap();
        let out = extract_relations_from_text(abstract_text, &gazetteer, &client).unwrap();
        assert!(out.is_empty());
    }
}
