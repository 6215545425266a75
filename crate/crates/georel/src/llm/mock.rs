//! Deterministic mock backends for offline runs.
//!
//! `TranscriptChat` replays scripted responses keyed by prompt hash.
//! `HashEmbedding` derives a unit vector from the text (WKT-aware, so a
//! query expanded with a geometry lands on that geometry's vector).
//! `GeometryAwareChat` actually understands the three task prompts: it
//! classifies the geometry pair for qualification prompts, constructs a
//! verified geometry for generation prompts, and answers conversion
//! prompts from a script — optionally corrupted by a configured error
//! specification, which is how the harness tests score known error
//! patterns end-to-end.

use std::collections::HashMap;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{ChatBackend, ChatMessage, EmbeddingBackend, LlmError};
use crate::geometry::{
    parse_wkt_prefix, scan_wkt, to_wkt_precision, validate, Coord, GeomType, Geometry, Polygon,
    WktPrecision,
};
use crate::prompts::predicate_phrase;
use crate::topology::{classify_predicate, exact::exact_midpoint, shape, Predicate};

/// Hash of a prompt for transcript lookup: SHA-256 over the message
/// contents joined by newlines.
pub fn prompt_hash(messages: &[ChatMessage]) -> String {
    let joined: Vec<&str> = messages.iter().map(|m| m.content.as_str()).collect();
    let mut hasher = Sha256::new();
    hasher.update(joined.join("\n").as_bytes());
    hex::encode(hasher.finalize())
}

#[derive(Serialize, Deserialize)]
struct TranscriptEntry {
    prompt_sha256: String,
    response: String,
}

/// Scripted chat backend: exact responses for known prompt hashes.
pub struct TranscriptChat {
    entries: HashMap<String, String>,
    model: String,
}

impl TranscriptChat {
    pub fn new() -> Self {
        TranscriptChat {
            entries: HashMap::new(),
            model: "mock-transcript".to_string(),
        }
    }

    /// Load `{"prompt_sha256": ..., "response": ...}` JSON lines.
    pub fn from_jsonl(path: &Path) -> Result<Self, LlmError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LlmError::Config(format!("{}: {e}", path.display())))?;
        let mut backend = TranscriptChat::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let entry: TranscriptEntry = serde_json::from_str(line)
                .map_err(|e| LlmError::Config(format!("{}:{}: {e}", path.display(), i + 1)))?;
            backend.entries.insert(entry.prompt_sha256, entry.response);
        }
        Ok(backend)
    }

    /// Script a response for the given prompt text.
    pub fn script(&mut self, prompt: &str, response: &str) {
        self.entries.insert(
            prompt_hash(&[ChatMessage::user(prompt)]),
            response.to_string(),
        );
    }
}

impl Default for TranscriptChat {
    fn default() -> Self {
        Self::new()
    }
}

impl ChatBackend for TranscriptChat {
    fn model_id(&self) -> &str {
        &self.model
    }

    fn complete(
        &self,
        messages: &[ChatMessage],
        _temperature: f64,
        _sample_index: u32,
    ) -> Result<String, LlmError> {
        let hash = prompt_hash(messages);
        self.entries
            .get(&hash)
            .cloned()
            .ok_or_else(|| LlmError::Backend(format!("no transcript entry for prompt {hash}")))
    }
}

/// Deterministic embedding backend: a unit vector seeded by the hash of
/// the last WKT substring in the text (or the whole text when none).
///
/// Identical target texts map to identical vectors; distinct texts are
/// near-orthogonal with overwhelming probability.
pub struct HashEmbedding {
    pub dim: usize,
    model: String,
}

impl HashEmbedding {
    pub fn new(dim: usize) -> Self {
        HashEmbedding {
            dim,
            model: format!("mock-hash-{dim}"),
        }
    }
}

impl EmbeddingBackend for HashEmbedding {
    fn model_id(&self) -> &str {
        &self.model
    }

    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, LlmError> {
        Ok(texts
            .iter()
            .map(|text| {
                let target = scan_wkt(text)
                    .into_iter()
                    .last()
                    .map(|(_, g)| to_wkt_precision(&g, WktPrecision::Full))
                    .unwrap_or_else(|| text.clone());
                let digest = Sha256::digest(target.as_bytes());
                let mut seed = [0u8; 32];
                seed.copy_from_slice(&digest);
                let mut rng = ChaCha8Rng::from_seed(seed);
                let mut v: Vec<f64> = (0..self.dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                if norm > 0.0 {
                    for x in &mut v {
                        *x /= norm;
                    }
                }
                v
            })
            .collect())
    }
}

/// One deterministic corruption rule: for the given type combination,
/// answer `to` instead of `from` at the given rate.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SwapRule {
    pub type_a: GeomType,
    pub type_b: GeomType,
    pub from: Predicate,
    pub to: Predicate,
    pub rate: f64,
}

/// Error behaviour of the geometry-aware mock.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct ErrorSpec {
    pub swaps: Vec<SwapRule>,
    /// Rate at which qualification answers come back as free prose with
    /// no parseable tuple.
    pub free_text_rate: f64,
}

impl ErrorSpec {
    pub fn perfect() -> Self {
        ErrorSpec::default()
    }

    pub fn swap(type_a: GeomType, type_b: GeomType, from: Predicate, to: Predicate, rate: f64) -> Self {
        ErrorSpec {
            swaps: vec![SwapRule {
                type_a,
                type_b,
                from,
                to,
                rate,
            }],
            free_text_rate: 0.0,
        }
    }
}

/// A chat backend that really performs the three tasks.
///
/// Qualification prompts are answered by classifying the two embedded
/// geometries (then applying the error spec). Generation prompts are
/// answered with a deterministically constructed geometry verified to
/// hold the requested relation, unless a scripted response exists for
/// that (predicate, reference WKT) pair. Conversion prompts are answered
/// from the description script, cycling through scripted predicates by
/// sample index.
pub struct GeometryAwareChat {
    errors: ErrorSpec,
    task2_responses: HashMap<(Predicate, String), String>,
    task3_script: HashMap<String, Vec<Predicate>>,
    task3_default: Option<Predicate>,
    model: String,
}

impl GeometryAwareChat {
    pub fn new(errors: ErrorSpec) -> Self {
        GeometryAwareChat {
            errors,
            task2_responses: HashMap::new(),
            task3_script: HashMap::new(),
            task3_default: None,
            model: "mock-geometry".to_string(),
        }
    }

    /// Script the generation answer for a (predicate, reference WKT) pair.
    pub fn with_task2_response(
        mut self,
        predicate: Predicate,
        object_wkt: &str,
        subject_wkt: &str,
    ) -> Self {
        self.task2_responses
            .insert((predicate, object_wkt.to_string()), subject_wkt.to_string());
        self
    }

    /// Script conversion answers for a description; samples cycle through
    /// the given predicates, which makes entropy fixtures exact.
    pub fn with_task3_script(mut self, description: &str, answers: Vec<Predicate>) -> Self {
        self.task3_script.insert(description.to_string(), answers);
        self
    }

    pub fn with_task3_default(mut self, predicate: Predicate) -> Self {
        self.task3_default = Some(predicate);
        self
    }

    /// Uniform pseudo-random draw in [0,1) tied to the prompt and rule.
    fn roll(prompt: &str, salt: u64) -> f64 {
        let mut hasher = Sha256::new();
        hasher.update(prompt.as_bytes());
        hasher.update(salt.to_le_bytes());
        let digest = hasher.finalize();
        let mut bytes = [0u8; 8];
        bytes.copy_from_slice(&digest[..8]);
        u64::from_le_bytes(bytes) as f64 / u64::MAX as f64
    }

    fn answer_task1(&self, prompt: &str, wkt_a: &str, wkt_b: &str) -> Result<String, LlmError> {
        if self.errors.free_text_rate > 0.0
            && Self::roll(prompt, u64::MAX) < self.errors.free_text_rate
        {
            return Ok("These two geometries are spatially related in some way.".to_string());
        }
        let (a, _) = parse_wkt_prefix(wkt_a)
            .map_err(|e| LlmError::Backend(format!("mock: bad geometry A in prompt: {e}")))?;
        let (b, _) = parse_wkt_prefix(wkt_b)
            .map_err(|e| LlmError::Backend(format!("mock: bad geometry B in prompt: {e}")))?;
        let mut predicate = match classify_predicate(&a, &b) {
            Ok(Some(p)) => p,
            _ => return Ok("The relation between these geometries is unclear.".to_string()),
        };
        for (i, rule) in self.errors.swaps.iter().enumerate() {
            if rule.type_a == a.geom_type()
                && rule.type_b == b.geom_type()
                && rule.from == predicate
                && Self::roll(prompt, i as u64) < rule.rate
            {
                predicate = rule.to;
                break;
            }
        }
        Ok(format!(
            "({}, {}, {})",
            a.type_name(),
            predicate,
            b.type_name()
        ))
    }

    fn answer_task2(&self, request: &str) -> Result<String, LlmError> {
        let (subject_type, predicate, object_wkt) = parse_generation_request(request)
            .ok_or_else(|| LlmError::Backend(format!("mock: bad generation request: {request}")))?;
        if let Some(scripted) = self
            .task2_responses
            .get(&(predicate, object_wkt.clone()))
        {
            return Ok(scripted.clone());
        }
        let (object, _) = parse_wkt_prefix(&object_wkt)
            .map_err(|e| LlmError::Backend(format!("mock: bad reference WKT: {e}")))?;
        match construct_related(predicate, subject_type, &object) {
            Some(g) => Ok(to_wkt_precision(&g, WktPrecision::Full)),
            None => Ok("I cannot construct such a geometry.".to_string()),
        }
    }

    fn answer_task3(&self, description: &str, sample_index: u32) -> Result<String, LlmError> {
        let predicate = match self.task3_script.get(description) {
            Some(answers) if !answers.is_empty() => {
                answers[sample_index as usize % answers.len()]
            }
            _ => self.task3_default.ok_or_else(|| {
                LlmError::Backend(format!("mock: no script for description `{description}`"))
            })?,
        };
        Ok(format!("A {predicate} B."))
    }
}

impl ChatBackend for GeometryAwareChat {
    fn model_id(&self) -> &str {
        &self.model
    }

    fn complete(
        &self,
        messages: &[ChatMessage],
        _temperature: f64,
        sample_index: u32,
    ) -> Result<String, LlmError> {
        let prompt: String = messages
            .iter()
            .map(|m| m.content.as_str())
            .collect::<Vec<_>>()
            .join("\n");
        if let (Some(a), Some(b)) = (
            last_marked_line(&prompt, "Geometry A: "),
            last_marked_line(&prompt, "Geometry B: "),
        ) {
            return self.answer_task1(&prompt, &a, &b);
        }
        if let Some(request) = last_marked_line(&prompt, "Request: ") {
            return self.answer_task2(&request);
        }
        if let Some(sentence) = last_marked_line(&prompt, "Sentence: ") {
            let description = sentence
                .strip_prefix("A ")
                .and_then(|s| s.strip_suffix(" B."))
                .ok_or_else(|| {
                    LlmError::Backend(format!("mock: bad conversion sentence: {sentence}"))
                })?;
            return self.answer_task3(description, sample_index);
        }
        Err(LlmError::Backend(
            "mock: prompt does not match any known task".to_string(),
        ))
    }
}

fn last_marked_line(prompt: &str, marker: &str) -> Option<String> {
    prompt
        .lines()
        .rev()
        .find_map(|l| l.strip_prefix(marker))
        .map(|s| s.trim().to_string())
}

/// Parse "Retrieve a TYPE geometry that PHRASE the WKT." back into its
/// parts. Inverse of the typed query template; used only by the mock.
fn parse_generation_request(request: &str) -> Option<(GeomType, Predicate, String)> {
    let rest = request.strip_prefix("Retrieve a ")?;
    let (keyword, rest) = rest.split_once(" geometry that ")?;
    let subject_type = GeomType::parse(keyword)?;
    let (phrase, rest) = rest.split_once(" the ")?;
    let predicate = Predicate::ALL
        .into_iter()
        .find(|p| predicate_phrase(*p) == phrase)?;
    let (geometry, used) = parse_wkt_prefix(rest).ok()?;
    let _ = geometry;
    Some((subject_type, predicate, rest[..used].trim().to_string()))
}

/// Build a geometry of `subject_type` holding `predicate` with `object`,
/// trying a fixed list of candidate constructions and returning the
/// first that verifies under classification. Fully deterministic.
pub fn construct_related(
    predicate: Predicate,
    subject_type: GeomType,
    object: &Geometry,
) -> Option<Geometry> {
    let verify = |g: &Geometry| {
        g.geom_type() == subject_type
            && validate(g).is_empty()
            && !g.is_empty()
            && classify_predicate(g, object) == Ok(Some(predicate))
    };
    for candidate in candidates(predicate, subject_type, object) {
        if verify(&candidate) {
            return Some(candidate);
        }
    }
    None
}

fn pt(x: f64, y: f64) -> Geometry {
    Geometry::Point(Some(Coord::new(x, y)))
}

fn seg(a: (f64, f64), b: (f64, f64)) -> Geometry {
    Geometry::LineString(vec![Coord::new(a.0, a.1), Coord::new(b.0, b.1)])
}

fn rect(min: (f64, f64), max: (f64, f64)) -> Geometry {
    Geometry::Polygon(Polygon::new(
        vec![
            Coord::new(min.0, min.1),
            Coord::new(max.0, min.1),
            Coord::new(max.0, max.1),
            Coord::new(min.0, max.1),
            Coord::new(min.0, min.1),
        ],
        Vec::new(),
    ))
}

/// Points strictly inside the object, best effort.
fn interior_points(object: &Geometry) -> Vec<Coord> {
    let mut out = Vec::new();
    match object {
        Geometry::Point(Some(c)) => out.push(*c),
        Geometry::MultiPoint(cs) => out.extend_from_slice(cs),
        Geometry::LineString(_) | Geometry::MultiLineString(_) => {
            if let shape::Shape::Lines(lines) = shape::Shape::build(object) {
                for v in &lines.vertices {
                    if !lines.is_boundary_node(*v) {
                        out.push(*v);
                    }
                }
                for (a, b) in &lines.segments {
                    if let Some(m) = exact_midpoint(*a, *b) {
                        out.push(m);
                    }
                }
            }
        }
        Geometry::Polygon(_) | Geometry::MultiPolygon(_) => {
            if let (Some((min, max)), shape::Shape::Areas(area)) =
                (object.bbox(), shape::Shape::build(object))
            {
                for i in 1..8 {
                    for j in 1..8 {
                        let c = Coord::new(
                            min.x + (max.x - min.x) * i as f64 / 8.0,
                            min.y + (max.y - min.y) * j as f64 / 8.0,
                        );
                        if area.locate(c) == shape::Loc::Interior {
                            out.push(c);
                            if out.len() >= 8 {
                                return out;
                            }
                        }
                    }
                }
            }
        }
        _ => {}
    }
    out
}

/// Points on the object's boundary, best effort.
fn boundary_points(object: &Geometry) -> Vec<Coord> {
    match object {
        Geometry::Point(Some(c)) => vec![*c],
        Geometry::Polygon(p) => p.outer[..p.outer.len().saturating_sub(1)].to_vec(),
        Geometry::MultiPolygon(ps) => ps
            .iter()
            .flat_map(|p| p.outer[..p.outer.len().saturating_sub(1)].to_vec())
            .collect(),
        Geometry::LineString(_) | Geometry::MultiLineString(_) => {
            match shape::Shape::build(object) {
                shape::Shape::Lines(lines) => lines.boundary,
                _ => Vec::new(),
            }
        }
        _ => Vec::new(),
    }
}

fn candidates(predicate: Predicate, subject_type: GeomType, object: &Geometry) -> Vec<Geometry> {
    let Some((min, max)) = object.bbox() else {
        return Vec::new();
    };
    let w = (max.x - min.x).max(1e-3);
    let h = (max.y - min.y).max(1e-3);
    let margin = 0.5 * (w + h);
    let center = Coord::new((min.x + max.x) / 2.0, (min.y + max.y) / 2.0);
    let inner = interior_points(object);
    let border = boundary_points(object);
    let mut out: Vec<Geometry> = Vec::new();

    match subject_type {
        GeomType::Point => match predicate {
            Predicate::Equals => {
                if let Geometry::Point(Some(c)) = object {
                    out.push(pt(c.x, c.y));
                }
            }
            Predicate::Within => out.extend(inner.iter().map(|c| pt(c.x, c.y))),
            Predicate::Touches => out.extend(border.iter().map(|c| pt(c.x, c.y))),
            Predicate::Disjoint => {
                out.push(pt(max.x + margin, max.y + margin));
                out.push(pt(min.x - margin, min.y - margin));
            }
            _ => {}
        },
        GeomType::LineString => match predicate {
            Predicate::Equals => {
                if matches!(object, Geometry::LineString(_)) {
                    out.push(object.clone());
                }
            }
            Predicate::Within => match object {
                Geometry::Polygon(_) | Geometry::MultiPolygon(_) => {
                    for p in &inner {
                        let dx = w / 32.0;
                        out.push(seg((p.x - dx, p.y), (p.x + dx, p.y)));
                        out.push(seg((p.x, p.y), (p.x + dx, p.y)));
                    }
                }
                Geometry::LineString(vs) if vs.len() >= 3 => {
                    for win in vs.windows(2) {
                        out.push(seg((win[0].x, win[0].y), (win[1].x, win[1].y)));
                    }
                }
                Geometry::LineString(vs) if vs.len() == 2 => {
                    if let Some(m) = exact_midpoint(vs[0], vs[1]) {
                        out.push(seg((m.x, m.y), (vs[1].x, vs[1].y)));
                        if let Some(m2) = exact_midpoint(m, vs[1]) {
                            out.push(seg((m.x, m.y), (m2.x, m2.y)));
                        }
                    }
                }
                _ => {}
            },
            Predicate::Contains => match object {
                Geometry::LineString(vs) => {
                    for ext in [
                        Coord::new(min.x - margin, min.y - margin),
                        Coord::new(max.x + margin, min.y - margin),
                    ] {
                        let mut pts = vec![ext];
                        pts.extend_from_slice(vs);
                        out.push(Geometry::LineString(pts));
                    }
                }
                Geometry::Point(Some(c)) => {
                    out.push(seg((c.x - margin, c.y), (c.x + margin, c.y)));
                }
                _ => {}
            },
            Predicate::Touches => {
                for v in &border {
                    let away_x = if v.x >= center.x { margin } else { -margin };
                    let away_y = if v.y >= center.y { margin } else { -margin };
                    out.push(seg((v.x, v.y), (v.x + away_x, v.y + away_y)));
                    out.push(seg((v.x, v.y), (v.x + away_x, v.y)));
                    out.push(seg((v.x, v.y), (v.x, v.y + away_y)));
                }
            }
            Predicate::Crosses => match object {
                Geometry::Polygon(_) | Geometry::MultiPolygon(_) => {
                    for p in &inner {
                        out.push(seg((min.x - margin, p.y), (max.x + margin, p.y)));
                        out.push(seg((p.x, min.y - margin), (p.x, max.y + margin)));
                    }
                }
                Geometry::LineString(vs) if vs.len() >= 2 => {
                    let a = vs[0];
                    let b = vs[1];
                    let m = Coord::new((a.x + b.x) / 2.0, (a.y + b.y) / 2.0);
                    out.push(seg((m.x - margin, m.y - margin), (m.x + margin, m.y + margin)));
                    out.push(seg((m.x + margin, m.y - margin), (m.x - margin, m.y + margin)));
                    out.push(seg((m.x, m.y - margin), (m.x, m.y + margin)));
                }
                _ => {}
            },
            Predicate::Overlaps => {
                if let Geometry::LineString(vs) = object {
                    let off = Coord::new(max.x + margin, max.y + margin);
                    if vs.len() >= 3 {
                        let mut tail: Vec<Coord> = vs[1..].to_vec();
                        tail.push(off);
                        out.push(Geometry::LineString(tail));
                        let mut head: Vec<Coord> = vec![off];
                        head.extend_from_slice(&vs[..vs.len() - 1]);
                        out.push(Geometry::LineString(head));
                    } else if vs.len() == 2 {
                        if let Some(m) = exact_midpoint(vs[0], vs[1]) {
                            out.push(Geometry::LineString(vec![m, vs[1], off]));
                        }
                    }
                }
            }
            Predicate::Disjoint => {
                out.push(seg(
                    (max.x + margin, max.y + margin),
                    (max.x + 2.0 * margin, max.y + 2.0 * margin),
                ));
            }
        },
        GeomType::Polygon => match predicate {
            Predicate::Equals => {
                if matches!(object, Geometry::Polygon(_)) {
                    out.push(object.clone());
                }
            }
            Predicate::Within => {
                for p in &inner {
                    let s = (w.min(h)) / 16.0;
                    out.push(rect((p.x, p.y), (p.x + s, p.y + s)));
                    out.push(rect((p.x - s, p.y - s), (p.x, p.y)));
                }
            }
            Predicate::Contains => {
                out.push(rect(
                    (min.x - margin, min.y - margin),
                    (max.x + margin, max.y + margin),
                ));
                out.push(rect(
                    (min.x - 2.0 * margin, min.y - 2.0 * margin),
                    (max.x + 2.0 * margin, max.y + 2.0 * margin),
                ));
            }
            Predicate::Touches => {
                for v in &border {
                    let s = margin;
                    out.push(rect((v.x - s, v.y - s), (v.x, v.y)));
                    out.push(rect((v.x, v.y - s), (v.x + s, v.y)));
                    out.push(rect((v.x - s, v.y), (v.x, v.y + s)));
                    out.push(rect((v.x, v.y), (v.x + s, v.y + s)));
                }
            }
            Predicate::Crosses => {
                if let Geometry::LineString(vs) = object {
                    if vs.len() >= 2 {
                        let a = vs[0];
                        let b = vs[1];
                        let m = Coord::new((a.x + b.x) / 2.0, (a.y + b.y) / 2.0);
                        let s = 0.25 * ((b.x - a.x).abs() + (b.y - a.y).abs()).max(1e-3);
                        out.push(rect((m.x - s, m.y - s), (m.x + s, m.y + s)));
                        let s2 = 2.0 * s;
                        out.push(rect((m.x - s2, m.y - s2), (m.x + s2, m.y + s2)));
                    }
                }
            }
            Predicate::Overlaps => {
                for p in &inner {
                    out.push(rect((p.x, p.y), (max.x + margin, max.y + margin)));
                    out.push(rect((min.x - margin, min.y - margin), (p.x, p.y)));
                }
            }
            Predicate::Disjoint => {
                out.push(rect(
                    (max.x + margin, max.y + margin),
                    (max.x + 2.0 * margin, max.y + 2.0 * margin),
                ));
            }
        },
        _ => {}
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::parse_wkt;
    use crate::llm::{BackendConfig, ChatClient};
    use std::sync::Arc;

    #[test]
    fn transcript_replays_and_misses() {
        let mut t = TranscriptChat::new();
        t.script("what relation?", "(Point, within, Polygon)");
        let out = t
            .complete(&[ChatMessage::user("what relation?")], 0.0, 0)
            .unwrap();
        assert_eq!(out, "(Point, within, Polygon)");
        assert!(t
            .complete(&[ChatMessage::user("other")], 0.0, 0)
            .is_err());
    }

    #[test]
    fn hash_embedding_is_deterministic_and_wkt_aware() {
        let e = HashEmbedding::new(32);
        let texts = vec![
            "POINT (1 2)".to_string(),
            "query text then POINT (1 2)".to_string(),
            "POINT (1 3)".to_string(),
        ];
        let vs = e.embed(&texts).unwrap();
        assert_eq!(vs[0], vs[1]);
        assert_ne!(vs[0], vs[2]);
        let norm: f64 = vs[0].iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < 1e-9);
    }

    #[test]
    fn construct_related_covers_all_valid_combinations() {
        let objects = [
            ("POINT (2 3)", GeomType::Point),
            ("LINESTRING (0 0, 2 1, 4 0)", GeomType::LineString),
            ("POLYGON ((0 0, 4 0, 4 4, 0 4, 0 0))", GeomType::Polygon),
        ];
        for p in Predicate::ALL {
            for (ta, tb) in crate::topology::valid_combinations(p) {
                let (wkt, _) = objects.iter().find(|(_, t)| t == tb).unwrap();
                let object = parse_wkt(wkt).unwrap();
                let g = construct_related(p, *ta, &object);
                assert!(
                    g.is_some(),
                    "no construction for ({}, {p}, {})",
                    ta.name(),
                    tb.name()
                );
            }
        }
    }

    #[test]
    fn geometry_mock_answers_qualification() {
        let mock = Arc::new(GeometryAwareChat::new(ErrorSpec::perfect()));
        let client = ChatClient::new(mock, &BackendConfig::default()).unwrap();
        let prompt = "Geometry A: POINT (-89.3551 43.123)\nGeometry B: POLYGON ((-89.3552 43.124, -89.355 43.124, -89.355 43.122, -89.3552 43.122, -89.3552 43.124))\nAnswer:";
        let out = client.chat(&[ChatMessage::user(prompt)], 0).unwrap();
        assert_eq!(out.text, "(Point, within, Polygon)");
    }

    #[test]
    fn geometry_mock_applies_swap_rule() {
        let spec = ErrorSpec::swap(
            GeomType::Point,
            GeomType::Polygon,
            Predicate::Within,
            Predicate::Touches,
            1.0,
        );
        let mock = GeometryAwareChat::new(spec);
        let prompt = "Geometry A: POINT (1 1)\nGeometry B: POLYGON ((0 0, 4 0, 4 4, 0 4, 0 0))";
        let out = mock
            .complete(&[ChatMessage::user(prompt)], 0.0, 0)
            .unwrap();
        assert_eq!(out, "(Point, touches, Polygon)");
    }

    #[test]
    fn geometry_mock_generates_verified_geometry() {
        let mock = GeometryAwareChat::new(ErrorSpec::perfect());
        let prompt =
            "Request: Retrieve a LINESTRING geometry that crosses the LINESTRING (0 0, 4 4).";
        let out = mock
            .complete(&[ChatMessage::user(prompt)], 0.0, 0)
            .unwrap();
        let g = parse_wkt(&out).unwrap();
        let object = parse_wkt("LINESTRING (0 0, 4 4)").unwrap();
        assert_eq!(
            classify_predicate(&g, &object).unwrap(),
            Some(Predicate::Crosses)
        );
    }

    #[test]
    fn geometry_mock_task3_cycles_script() {
        let mock = GeometryAwareChat::new(ErrorSpec::perfect())
            .with_task3_script("is bordered by", vec![Predicate::Touches, Predicate::Within]);
        let prompt = "Sentence: A is bordered by B.\nAnswer with a predicate.";
        let msgs = [ChatMessage::user(prompt)];
        assert_eq!(mock.complete(&msgs, 0.0, 0).unwrap(), "A touches B.");
        assert_eq!(mock.complete(&msgs, 0.0, 1).unwrap(), "A within B.");
        assert_eq!(mock.complete(&msgs, 0.0, 2).unwrap(), "A touches B.");
    }
}
