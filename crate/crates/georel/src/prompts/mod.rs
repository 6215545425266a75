//! Prompt templates and tolerant response parsers for the three
//! evaluation tasks.
//!
//! Templates are plain-text assets with `{placeholder}` slots, shipped
//! inside the binary and overridable from a directory, so experiment runs
//! can pin a template hash. Rendering is deterministic; parsers are total
//! functions that never panic on arbitrary model output.

use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::{scan_wkt, to_wkt_precision, validate, Dim, GeomType, Geometry, WktPrecision};
use crate::neighborhood::TypeCombo;
use crate::topology::{is_valid_combination, Predicate};

/// Prompt styles for relation qualification.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task1Style {
    Zero,
    ZeroDim,
    Few,
    ZeroCot,
    FewCot,
}

impl Task1Style {
    pub const ALL: [Task1Style; 5] = [
        Task1Style::Zero,
        Task1Style::ZeroDim,
        Task1Style::Few,
        Task1Style::ZeroCot,
        Task1Style::FewCot,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Task1Style::Zero => "zero",
            Task1Style::ZeroDim => "zero-dim",
            Task1Style::Few => "few",
            Task1Style::ZeroCot => "zero-cot",
            Task1Style::FewCot => "few-cot",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "zero" | "zero-shot" => Some(Task1Style::Zero),
            "zero-dim" | "zero-shot-dim" => Some(Task1Style::ZeroDim),
            "few" | "few-shot" => Some(Task1Style::Few),
            "zero-cot" | "zero-shot-cot" => Some(Task1Style::ZeroCot),
            "few-cot" | "few-shot-cot" => Some(Task1Style::FewCot),
            _ => None,
        }
    }

    pub fn needs_examples(self) -> bool {
        matches!(self, Task1Style::Few | Task1Style::FewCot)
    }
}

/// Prompt styles for synthetic geometry generation.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GenStyle {
    Zero,
    ZeroCheck,
    Few,
    FewNegative,
}

impl GenStyle {
    pub const ALL: [GenStyle; 4] = [
        GenStyle::Zero,
        GenStyle::ZeroCheck,
        GenStyle::Few,
        GenStyle::FewNegative,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GenStyle::Zero => "zero",
            GenStyle::ZeroCheck => "zero-check",
            GenStyle::Few => "few",
            GenStyle::FewNegative => "few-negative",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "zero" | "zero-shot" => Some(GenStyle::Zero),
            "zero-check" | "zero-shot-check" => Some(GenStyle::ZeroCheck),
            "few" | "few-shot" => Some(GenStyle::Few),
            "few-negative" | "few-shot-negative" => Some(GenStyle::FewNegative),
            _ => None,
        }
    }

    pub fn needs_examples(self) -> bool {
        matches!(self, GenStyle::Few | GenStyle::FewNegative)
    }
}

#[derive(Clone, PartialEq, Eq, Debug, thiserror::Error)]
pub enum PromptError {
    #[error("style `{0}` requires at least one example")]
    ExampleError(&'static str),
    #[error("few-shot pool exhausted: requested {requested}, available {available}")]
    PoolExhausted { requested: usize, available: usize },
    #[error("missing template `{0}`")]
    MissingTemplate(String),
}

/// The full set of named templates with a content hash for manifests.
#[derive(Clone, Debug)]
pub struct TemplateSet {
    templates: BTreeMap<String, String>,
}

macro_rules! builtin {
    ($map:expr, $name:literal) => {
        $map.insert(
            $name.to_string(),
            include_str!(concat!("../../assets/templates/", $name, ".txt")).to_string(),
        );
    };
}

impl Default for TemplateSet {
    fn default() -> Self {
        let mut templates = BTreeMap::new();
        builtin!(templates, "task1_zero");
        builtin!(templates, "task1_zero_dim");
        builtin!(templates, "task1_few");
        builtin!(templates, "task1_zero_cot");
        builtin!(templates, "task1_few_cot");
        builtin!(templates, "task2_query_direct");
        builtin!(templates, "task2_query_typed");
        builtin!(templates, "task2_query_object");
        builtin!(templates, "task2_gen_zero");
        builtin!(templates, "task2_gen_zero_check");
        builtin!(templates, "task2_gen_few");
        builtin!(templates, "task2_gen_few_negative");
        builtin!(templates, "task3_with_context");
        builtin!(templates, "task3_without_context");
        TemplateSet { templates }
    }
}

impl TemplateSet {
    /// Overlay `*.txt` files from a directory over the built-in set.
    pub fn with_overrides(dir: &Path) -> std::io::Result<Self> {
        let mut set = TemplateSet::default();
        for entry in std::fs::read_dir(dir)? {
            let entry = entry?;
            let path = entry.path();
            if path.extension().is_some_and(|e| e == "txt") {
                if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                    set.templates
                        .insert(stem.to_string(), std::fs::read_to_string(&path)?);
                }
            }
        }
        Ok(set)
    }

    fn get(&self, name: &str) -> Result<&str, PromptError> {
        self.templates
            .get(name)
            .map(String::as_str)
            .ok_or_else(|| PromptError::MissingTemplate(name.to_string()))
    }

    /// SHA-256 over the sorted (name, content) pairs; recorded in run
    /// manifests so reports pin the exact wording used.
    pub fn hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut hasher = Sha256::new();
        for (name, body) in &self.templates {
            hasher.update(name.as_bytes());
            hasher.update([0]);
            hasher.update(body.as_bytes());
            hasher.update([0]);
        }
        hex::encode(hasher.finalize())
    }
}

fn fill(template: &str, pairs: &[(&str, &str)]) -> String {
    let mut out = template.to_string();
    for (key, value) in pairs {
        out = out.replace(&format!("{{{key}}}"), value);
    }
    out
}

/// Verb phrase used for a predicate inside query sentences.
pub fn predicate_phrase(p: Predicate) -> &'static str {
    match p {
        Predicate::Equals => "equals",
        Predicate::Within => "is within",
        Predicate::Contains => "contains",
        Predicate::Overlaps => "overlaps",
        Predicate::Touches => "touches",
        Predicate::Crosses => "crosses",
        Predicate::Disjoint => "is disjoint from",
    }
}

fn dim_label(d: Dim) -> &'static str {
    match d {
        Dim::Empty => "-",
        Dim::Zero => "0",
        Dim::One => "1",
        Dim::Two => "2",
    }
}

/// One worked demonstration pair for relation qualification.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Task1Example {
    pub wkt_a: String,
    pub wkt_b: String,
    pub type_a: GeomType,
    pub predicate: Predicate,
    pub type_b: GeomType,
}

impl Task1Example {
    fn render(&self, with_rationale: bool) -> String {
        let mut out = format!("Geometry A: {}\nGeometry B: {}\n", self.wkt_a, self.wkt_b);
        if with_rationale {
            out.push_str(&format!(
                "Reasoning: {}\n",
                cot_rationale(self.type_a, self.predicate, self.type_b)
            ));
        }
        out.push_str(&format!(
            "Answer: ({}, {}, {})\n\n",
            self.type_a.name(),
            self.predicate,
            self.type_b.name()
        ));
        out
    }
}

/// Decision-path explanation for a worked example, phrased as the
/// interior/boundary/exterior checks that pin the predicate down.
fn cot_rationale(type_a: GeomType, predicate: Predicate, type_b: GeomType) -> String {
    let a = type_a.name();
    let b = type_b.name();
    match predicate {
        Predicate::Equals => format!(
            "The interiors of A and B intersect, no point of A lies in the exterior of B, \
             and no point of B lies in the exterior of A, so the two geometries cover the \
             same point set. The relation is equals."
        ),
        Predicate::Within => format!(
            "The interior of A intersects the interior of B, and neither the interior nor \
             the boundary of A reaches the exterior of B. B also has points outside A, so \
             they are not equal. The {a} is within the {b}."
        ),
        Predicate::Contains => format!(
            "The interiors intersect and no point of B lies in the exterior of A, while A \
             extends beyond B. The {a} contains the {b}."
        ),
        Predicate::Overlaps => format!(
            "The interiors of A and B intersect in their common dimension, and each \
             geometry also has interior points outside the other, so neither contains the \
             other. The {a} overlaps the {b}."
        ),
        Predicate::Touches => format!(
            "The interiors of A and B do not intersect, but their point sets meet on a \
             boundary, so they share contact without sharing interior points. The {a} \
             touches the {b}."
        ),
        Predicate::Crosses => format!(
            "The interiors of A and B intersect in a lower dimension than the geometries \
             themselves, and each extends beyond the other. The {a} crosses the {b}."
        ),
        Predicate::Disjoint => format!(
            "The interiors and boundaries of A and B have no points in common at all. The \
             {a} is disjoint from the {b}."
        ),
    }
}

/// Render the relation-qualification prompt for a geometry pair.
///
/// Few-shot styles require at least one example; zero styles ignore the
/// example list. The `zero-dim` style embeds the dimension definition
/// and both input dimensions. Identical inputs produce byte-identical
/// prompts.
pub fn render_task1(
    templates: &TemplateSet,
    a: &Geometry,
    b: &Geometry,
    style: Task1Style,
    examples: &[Task1Example],
    precision: WktPrecision,
) -> Result<String, PromptError> {
    if style.needs_examples() && examples.is_empty() {
        return Err(PromptError::ExampleError(style.name()));
    }
    let wkt_a = to_wkt_precision(a, precision);
    let wkt_b = to_wkt_precision(b, precision);
    let template = match style {
        Task1Style::Zero => templates.get("task1_zero")?,
        Task1Style::ZeroDim => templates.get("task1_zero_dim")?,
        Task1Style::Few => templates.get("task1_few")?,
        Task1Style::ZeroCot => templates.get("task1_zero_cot")?,
        Task1Style::FewCot => templates.get("task1_few_cot")?,
    };
    let rendered_examples: String = examples
        .iter()
        .map(|e| e.render(style == Task1Style::FewCot))
        .collect();
    Ok(fill(
        template,
        &[
            ("wkt_a", wkt_a.as_str()),
            ("wkt_b", wkt_b.as_str()),
            ("dim_a", dim_label(a.dimension())),
            ("dim_b", dim_label(b.dimension())),
            ("examples", rendered_examples.as_str()),
        ],
    ))
}

/// A candidate demonstration triplet from the few-shot split.
#[derive(Clone, Debug)]
pub struct FewshotCandidate {
    pub combo: TypeCombo,
    pub example: Task1Example,
}

/// Pick `k` demonstration examples for a query combination.
///
/// The default draw takes one example per predicate applicable to the
/// combination (in the fixed predicate order), then fills round-robin;
/// the shuffle inside each predicate bucket is seeded, so the same seed
/// yields the same examples.
pub fn select_fewshot_examples(
    pool: &[FewshotCandidate],
    combo: TypeCombo,
    k: Option<usize>,
    seed: u64,
) -> Result<Vec<Task1Example>, PromptError> {
    let applicable: Vec<Predicate> = Predicate::ALL
        .into_iter()
        .filter(|p| is_valid_combination(combo.0, *p, combo.1))
        .collect();
    let requested = k.unwrap_or(applicable.len());
    let mut buckets: Vec<Vec<&FewshotCandidate>> = applicable
        .iter()
        .map(|p| {
            pool.iter()
                .filter(|c| c.combo == combo && c.example.predicate == *p)
                .collect()
        })
        .collect();
    for (i, bucket) in buckets.iter_mut().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ ((i as u64 + 1) << 32));
        bucket.shuffle(&mut rng);
    }
    let available: usize = buckets.iter().map(Vec::len).sum();
    if available < requested {
        return Err(PromptError::PoolExhausted {
            requested,
            available,
        });
    }
    let mut picked = Vec::with_capacity(requested);
    let mut round = 0;
    while picked.len() < requested {
        let mut advanced = false;
        for bucket in &buckets {
            if picked.len() == requested {
                break;
            }
            if let Some(c) = bucket.get(round) {
                picked.push(c.example.clone());
                advanced = true;
            }
        }
        if !advanced {
            break;
        }
        round += 1;
    }
    Ok(picked)
}

/// Parsed relation-qualification answer.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub enum Task1Answer {
    Tuple {
        type_a: GeomType,
        predicate: Predicate,
        type_b: GeomType,
    },
    FormatInvalid,
}

/// Tolerant extraction of the `(Type, predicate, Type)` tuple: the last
/// parenthesized triple wins, so chain-of-thought intermediates are
/// skipped. Case and whitespace are normalised. Never fails on arbitrary
/// text; unmatchable input maps to `FormatInvalid`.
pub fn parse_task1_answer(text: &str) -> Task1Answer {
    let bytes = text.as_bytes();
    let mut best = Task1Answer::FormatInvalid;
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'(' {
            if let Some(close) = text[i + 1..].find(')') {
                let inner = &text[i + 1..i + 1 + close];
                let parts: Vec<&str> = inner.split(',').collect();
                if parts.len() == 3 {
                    if let (Some(type_a), Some(predicate), Some(type_b)) = (
                        GeomType::parse(parts[0]),
                        Predicate::parse(parts[1]),
                        GeomType::parse(parts[2]),
                    ) {
                        best = Task1Answer::Tuple {
                            type_a,
                            predicate,
                            type_b,
                        };
                    }
                }
            }
        }
        i += 1;
    }
    best
}

/// Render a subject-retrieval query sentence, optionally typed, with any
/// expansion geometries appended one per line after the sentence.
pub fn render_task2_query(
    templates: &TemplateSet,
    predicate: Predicate,
    wkt_b: &str,
    subject_type: Option<GeomType>,
    expansions: &[String],
) -> Result<String, PromptError> {
    let phrase = predicate_phrase(predicate);
    let mut query = match subject_type {
        None => fill(
            templates.get("task2_query_direct")?,
            &[("predicate_phrase", phrase), ("wkt_b", wkt_b)],
        ),
        Some(ty) => fill(
            templates.get("task2_query_typed")?,
            &[
                ("subject_keyword", ty.keyword()),
                ("predicate_phrase", phrase),
                ("wkt_b", wkt_b),
            ],
        ),
    };
    query = query.trim_end().to_string();
    for e in expansions {
        query.push('\n');
        query.push_str(e);
    }
    Ok(query)
}

/// Render an object-retrieval query. With `reversed` the predicate is
/// inverted and phrased from the target's point of view ("that is within
/// the ..."); otherwise subject-to-object directionality is kept ("which
/// the ... contains").
pub fn render_task2_object_query(
    templates: &TemplateSet,
    predicate: Predicate,
    wkt_a: &str,
    object_type: GeomType,
    reversed: bool,
    expansions: &[String],
) -> Result<String, PromptError> {
    if reversed {
        let inv = predicate.inverse();
        let mut query = fill(
            templates.get("task2_query_typed")?,
            &[
                ("subject_keyword", object_type.keyword()),
                ("predicate_phrase", predicate_phrase(inv)),
                ("wkt_b", wkt_a),
            ],
        )
        .trim_end()
        .to_string();
        for e in expansions {
            query.push('\n');
            query.push_str(e);
        }
        Ok(query)
    } else {
        let mut query = fill(
            templates.get("task2_query_object")?,
            &[
                ("subject_keyword", object_type.keyword()),
                ("predicate_phrase", predicate_phrase(predicate)),
                ("wkt_b", wkt_a),
            ],
        )
        .trim_end()
        .to_string();
        for e in expansions {
            query.push('\n');
            query.push_str(e);
        }
        Ok(query)
    }
}

/// One demonstration for geometry generation.
#[derive(Clone, Debug)]
pub struct GenExample {
    pub request: String,
    pub good: String,
    pub bad: Option<String>,
}

impl GenExample {
    fn render(&self, with_bad: bool) -> String {
        let mut out = format!("{}\nGood Response: {}\n", self.request, self.good);
        if with_bad {
            if let Some(bad) = &self.bad {
                out.push_str(&format!("Bad Response: {bad}\n"));
            }
        }
        out.push('\n');
        out
    }
}

/// Render the geometry-generation prompt: produce one WKT geometry of
/// `subject_type` holding `predicate` with the reference geometry.
pub fn render_task2_generation(
    templates: &TemplateSet,
    predicate: Predicate,
    wkt_b: &str,
    subject_type: GeomType,
    style: GenStyle,
    examples: &[GenExample],
) -> Result<String, PromptError> {
    if style.needs_examples() && examples.is_empty() {
        return Err(PromptError::ExampleError(style.name()));
    }
    let query = render_task2_query(templates, predicate, wkt_b, Some(subject_type), &[])?;
    let template = match style {
        GenStyle::Zero => templates.get("task2_gen_zero")?,
        GenStyle::ZeroCheck => templates.get("task2_gen_zero_check")?,
        GenStyle::Few => templates.get("task2_gen_few")?,
        GenStyle::FewNegative => templates.get("task2_gen_few_negative")?,
    };
    let rendered: String = examples
        .iter()
        .map(|e| e.render(style == GenStyle::FewNegative))
        .collect();
    Ok(fill(
        template,
        &[
            ("query", query.as_str()),
            ("subject_keyword", subject_type.keyword()),
            ("examples", rendered.as_str()),
        ],
    ))
}

/// Parsed geometry-generation answer.
#[derive(Clone, PartialEq, Debug)]
pub enum GenAnswer {
    Geometry(Geometry),
    Invalid,
}

/// Extract the first WKT substring and validate it; anything else is
/// `Invalid`. Total on arbitrary text.
pub fn parse_generated_geometry(text: &str) -> GenAnswer {
    for (_, g) in scan_wkt(text) {
        if validate(&g).is_empty() && !g.is_empty() {
            return GenAnswer::Geometry(g);
        }
        return GenAnswer::Invalid;
    }
    GenAnswer::Invalid
}

/// Context attached to a vernacular conversion prompt.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub enum Task3Context {
    /// "A is city, B is highway."
    PlaceTypes(String, String),
    /// "A is Polygon, and B is LineString."
    GeomTypes(String, String),
    /// Real place names substitute for the symbolic placeholders.
    PlaceNames(String, String),
}

impl Task3Context {
    fn sentence(&self) -> String {
        match self {
            Task3Context::PlaceTypes(a, b) => format!("A is {a}, B is {b}."),
            Task3Context::GeomTypes(a, b) => format!("A is {a}, and B is {b}."),
            Task3Context::PlaceNames(a, b) => format!("A is {a}, B is {b}."),
        }
    }
}

/// Render the vernacular-conversion prompt: "A {description} B." with an
/// optional trailing context sentence.
pub fn render_task3(
    templates: &TemplateSet,
    description: &str,
    context: Option<&Task3Context>,
) -> Result<String, PromptError> {
    let sentence = format!("A {description} B.");
    match context {
        Some(ctx) => Ok(fill(
            templates.get("task3_with_context")?,
            &[
                ("sentence", sentence.as_str()),
                ("context", ctx.sentence().as_str()),
            ],
        )),
        None => Ok(fill(
            templates.get("task3_without_context")?,
            &[("sentence", sentence.as_str())],
        )),
    }
}

/// Parsed vernacular-conversion answer: every predicate mentioned, in
/// order of first appearance. The first mention is the primary answer;
/// responses naming several candidates keep them all so the mention
/// distribution can be scored.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Task3Answer {
    Mentions(Vec<Predicate>),
    Invalid,
}

impl Task3Answer {
    pub fn primary(&self) -> Option<Predicate> {
        match self {
            Task3Answer::Mentions(m) => m.first().copied(),
            Task3Answer::Invalid => None,
        }
    }

    pub fn is_multi_candidate(&self) -> bool {
        matches!(self, Task3Answer::Mentions(m) if m.len() > 1)
    }
}

/// Total extraction of predicate words from arbitrary text.
pub fn parse_task3_answer(text: &str) -> Task3Answer {
    let lower = text.to_ascii_lowercase();
    let bytes = lower.as_bytes();
    let mut mentions: Vec<(usize, Predicate)> = Vec::new();
    for p in Predicate::ALL {
        let word = p.name();
        let mut start = 0;
        while let Some(pos) = lower[start..].find(word) {
            let at = start + pos;
            let before_ok = at == 0 || !bytes[at - 1].is_ascii_alphabetic();
            let end = at + word.len();
            let after_ok = end == bytes.len() || !bytes[end].is_ascii_alphabetic();
            if before_ok && after_ok {
                mentions.push((at, p));
                break;
            }
            start = at + word.len();
        }
    }
    if mentions.is_empty() {
        return Task3Answer::Invalid;
    }
    mentions.sort_by_key(|(pos, _)| *pos);
    Task3Answer::Mentions(mentions.into_iter().map(|(_, p)| p).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::parse_wkt;

    fn templates() -> TemplateSet {
        TemplateSet::default()
    }

    fn point() -> Geometry {
        parse_wkt("POINT (-89.3551 43.123)").unwrap()
    }

    fn polygon() -> Geometry {
        parse_wkt(
            "POLYGON ((-89.3552 43.124, -89.355 43.124, -89.355 43.122, -89.3552 43.122, -89.3552 43.124))",
        )
        .unwrap()
    }

    #[test]
    fn zero_prompt_contains_both_wkts_and_predicates() {
        let p = render_task1(
            &templates(),
            &point(),
            &polygon(),
            Task1Style::Zero,
            &[],
            WktPrecision::default(),
        )
        .unwrap();
        assert!(p.contains("POINT (-89.3551 43.123)"));
        assert!(p.contains("POLYGON ((-89.3552 43.124"));
        for name in [
            "equals", "within", "contains", "overlaps", "touches", "crosses", "disjoint",
        ] {
            assert!(p.contains(name), "{name}");
        }
    }

    #[test]
    fn zero_dim_embeds_dimensions() {
        let p = render_task1(
            &templates(),
            &point(),
            &polygon(),
            Task1Style::ZeroDim,
            &[],
            WktPrecision::default(),
        )
        .unwrap();
        assert!(p.contains("dim(A) = 0, dim(B) = 2"));
        assert!(p.contains("dimension of a geometry"));
    }

    #[test]
    fn cot_appends_step_by_step() {
        let p = render_task1(
            &templates(),
            &point(),
            &polygon(),
            Task1Style::ZeroCot,
            &[],
            WktPrecision::default(),
        )
        .unwrap();
        assert!(p.contains("Let's think step by step"));
    }

    #[test]
    fn few_requires_examples() {
        assert!(matches!(
            render_task1(
                &templates(),
                &point(),
                &polygon(),
                Task1Style::Few,
                &[],
                WktPrecision::default()
            ),
            Err(PromptError::ExampleError(_))
        ));
    }

    fn example(p: Predicate) -> Task1Example {
        Task1Example {
            wkt_a: "POINT (0 0)".into(),
            wkt_b: "POLYGON ((0 0, 1 0, 1 1, 0 1, 0 0))".into(),
            type_a: GeomType::Point,
            predicate: p,
            type_b: GeomType::Polygon,
        }
    }

    #[test]
    fn few_lists_each_example() {
        let examples: Vec<Task1Example> = [Predicate::Within, Predicate::Touches]
            .into_iter()
            .map(example)
            .collect();
        let p = render_task1(
            &templates(),
            &point(),
            &polygon(),
            Task1Style::Few,
            &examples,
            WktPrecision::default(),
        )
        .unwrap();
        assert_eq!(p.matches("Answer: (").count(), 2);
        let cot = render_task1(
            &templates(),
            &point(),
            &polygon(),
            Task1Style::FewCot,
            &examples,
            WktPrecision::default(),
        )
        .unwrap();
        assert_eq!(cot.matches("Reasoning:").count(), 2);
        assert!(cot.contains("interior"));
    }

    #[test]
    fn task1_parse_accepts_paper_form() {
        assert_eq!(
            parse_task1_answer("(Point, within, Polygon)"),
            Task1Answer::Tuple {
                type_a: GeomType::Point,
                predicate: Predicate::Within,
                type_b: GeomType::Polygon
            }
        );
    }

    #[test]
    fn task1_parse_normalises_case_and_spacing() {
        assert_eq!(
            parse_task1_answer("Answer: ( LINESTRING , Crosses , polygon )"),
            Task1Answer::Tuple {
                type_a: GeomType::LineString,
                predicate: Predicate::Crosses,
                type_b: GeomType::Polygon
            }
        );
    }

    #[test]
    fn task1_parse_takes_last_triple() {
        let cot = "First I considered (Point, touches, Polygon) but the interior test \
                   shows otherwise, so the answer is (Point, within, Polygon).";
        assert_eq!(
            parse_task1_answer(cot),
            Task1Answer::Tuple {
                type_a: GeomType::Point,
                predicate: Predicate::Within,
                type_b: GeomType::Polygon
            }
        );
    }

    #[test]
    fn task1_parse_rejects_prose() {
        assert_eq!(
            parse_task1_answer("the relation is containment"),
            Task1Answer::FormatInvalid
        );
        assert_eq!(parse_task1_answer(""), Task1Answer::FormatInvalid);
    }

    #[test]
    fn direct_query_matches_reference_sentence() {
        let q = render_task2_query(
            &templates(),
            Predicate::Crosses,
            "LINESTRING (-89.4534 43.035, -89.454 43.0351)",
            None,
            &[],
        )
        .unwrap();
        assert_eq!(
            q,
            "Retrieve a geometry that crosses the LINESTRING (-89.4534 43.035, -89.454 43.0351)."
        );
    }

    #[test]
    fn typed_query_names_the_type() {
        let q = render_task2_query(
            &templates(),
            Predicate::Crosses,
            "LINESTRING (-89.4534 43.035, -89.454 43.0351)",
            Some(GeomType::LineString),
            &[],
        )
        .unwrap();
        assert_eq!(
            q,
            "Retrieve a LINESTRING geometry that crosses the LINESTRING (-89.4534 43.035, -89.454 43.0351)."
        );
    }

    #[test]
    fn expansion_appends_wkt_lines() {
        let q = render_task2_query(
            &templates(),
            Predicate::Crosses,
            "LINESTRING (0 0, 1 1)",
            None,
            &["LINESTRING (0 1, 1 0)".to_string()],
        )
        .unwrap();
        assert!(q.ends_with(".\nLINESTRING (0 1, 1 0)"));
    }

    #[test]
    fn object_queries_keep_or_reverse_direction() {
        let original = render_task2_object_query(
            &templates(),
            Predicate::Contains,
            "POLYGON ((0 0, 1 0, 1 1, 0 1, 0 0))",
            GeomType::Point,
            false,
            &[],
        )
        .unwrap();
        assert!(original.contains("Retrieve a POINT geometry which the POLYGON"));
        assert!(original.contains("contains"));
        let reversed = render_task2_object_query(
            &templates(),
            Predicate::Contains,
            "POLYGON ((0 0, 1 0, 1 1, 0 1, 0 0))",
            GeomType::Point,
            true,
            &[],
        )
        .unwrap();
        assert!(reversed.contains("Retrieve a POINT geometry that is within the POLYGON"));
    }

    #[test]
    fn generation_styles() {
        let zero = render_task2_generation(
            &templates(),
            Predicate::Crosses,
            "LINESTRING (0 0, 1 1)",
            GeomType::LineString,
            GenStyle::Zero,
            &[],
        )
        .unwrap();
        assert!(zero.contains("crosses"));
        assert!(zero.contains("LINESTRING (0 0, 1 1)"));

        let check = render_task2_generation(
            &templates(),
            Predicate::Crosses,
            "LINESTRING (0 0, 1 1)",
            GeomType::LineString,
            GenStyle::ZeroCheck,
            &[],
        )
        .unwrap();
        assert!(check.contains("Verify"));

        let ex = GenExample {
            request: "Retrieve a LINESTRING geometry that crosses the LINESTRING (0 0, 2 2)."
                .into(),
            good: "LINESTRING (0 2, 2 0)".into(),
            bad: Some("LINESTRING (5 5, 6 6)".into()),
        };
        let neg = render_task2_generation(
            &templates(),
            Predicate::Crosses,
            "LINESTRING (0 0, 1 1)",
            GeomType::LineString,
            GenStyle::FewNegative,
            std::slice::from_ref(&ex),
        )
        .unwrap();
        assert!(neg.contains("Good Response:"));
        assert!(neg.contains("Bad Response:"));
        assert!(matches!(
            render_task2_generation(
                &templates(),
                Predicate::Crosses,
                "LINESTRING (0 0, 1 1)",
                GeomType::LineString,
                GenStyle::Few,
                &[],
            ),
            Err(PromptError::ExampleError(_))
        ));
    }

    #[test]
    fn generated_geometry_parse() {
        assert_eq!(
            parse_generated_geometry("LINESTRING (0 0, 1 1)"),
            GenAnswer::Geometry(parse_wkt("LINESTRING (0 0, 1 1)").unwrap())
        );
        assert_eq!(
            parse_generated_geometry("Sure! Here it is: POLYGON ((0 0, 1 0, 1 1, 0 1, 0 0)) :)"),
            GenAnswer::Geometry(parse_wkt("POLYGON ((0 0, 1 0, 1 1, 0 1, 0 0))").unwrap())
        );
        assert_eq!(parse_generated_geometry("I cannot do that"), GenAnswer::Invalid);
        // Parseable but invalid geometry: bow-tie ring.
        assert_eq!(
            parse_generated_geometry("POLYGON ((0 0, 2 2, 2 0, 0 2, 0 0))"),
            GenAnswer::Invalid
        );
    }

    #[test]
    fn task3_rendering() {
        let bare = render_task3(&templates(), "is bordered by", None).unwrap();
        assert!(bare.contains("Sentence: A is bordered by B."));
        assert!(!bare.contains("Context:"));

        let geom = render_task3(
            &templates(),
            "is along",
            Some(&Task3Context::GeomTypes("Polygon".into(), "LineString".into())),
        )
        .unwrap();
        assert!(geom.contains("A is Polygon, and B is LineString."));

        let names = render_task3(
            &templates(),
            "is on the shore of",
            Some(&Task3Context::PlaceNames(
                "Racine in Wisconsin".into(),
                "lake Michigan".into(),
            )),
        )
        .unwrap();
        assert!(names.contains("Racine in Wisconsin"));
        assert!(names.contains("lake Michigan"));
    }

    #[test]
    fn task3_parse_variants() {
        assert_eq!(
            parse_task3_answer("A contains B"),
            Task3Answer::Mentions(vec![Predicate::Contains])
        );
        assert_eq!(
            parse_task3_answer("The relation is: touches."),
            Task3Answer::Mentions(vec![Predicate::Touches])
        );
        let multi = parse_task3_answer("either within or overlaps, hard to say");
        assert_eq!(multi.primary(), Some(Predicate::Within));
        assert!(multi.is_multi_candidate());
        assert_eq!(parse_task3_answer("no idea"), Task3Answer::Invalid);
        // Substrings of longer words must not match.
        assert_eq!(parse_task3_answer("the widthin area"), Task3Answer::Invalid);
    }

    #[test]
    fn fewshot_selection_defaults_to_applicable_predicates() {
        let combo = (GeomType::Point, GeomType::Polygon);
        let mut pool = Vec::new();
        for p in [Predicate::Within, Predicate::Touches, Predicate::Disjoint] {
            for _ in 0..3 {
                pool.push(FewshotCandidate {
                    combo,
                    example: example(p),
                });
            }
        }
        let picked = select_fewshot_examples(&pool, combo, None, 42).unwrap();
        assert_eq!(picked.len(), 3);
        let mut preds: Vec<Predicate> = picked.iter().map(|e| e.predicate).collect();
        preds.sort();
        assert_eq!(
            preds,
            vec![Predicate::Within, Predicate::Touches, Predicate::Disjoint]
        );
        // Deterministic per seed.
        let again = select_fewshot_examples(&pool, combo, None, 42).unwrap();
        assert_eq!(
            picked.iter().map(|e| e.wkt_a.clone()).collect::<Vec<_>>(),
            again.iter().map(|e| e.wkt_a.clone()).collect::<Vec<_>>()
        );
        assert!(matches!(
            select_fewshot_examples(&pool, combo, Some(100), 42),
            Err(PromptError::PoolExhausted { .. })
        ));
    }

    #[test]
    fn template_hash_tracks_content() {
        let a = TemplateSet::default().hash();
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("task1_zero.txt"), "changed {wkt_a} {wkt_b}").unwrap();
        let b = TemplateSet::with_overrides(dir.path()).unwrap().hash();
        assert_ne!(a, b);
    }
}
