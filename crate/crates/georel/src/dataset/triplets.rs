//! Balanced triplet datasets: spatial-join sampling, equals synthesis,
//! buffered disjoint pairs, splits, and build-time verification.

use std::collections::{BTreeMap, HashSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::entity::{Corpus, SpatialEntity};
use super::synth::{sample_disjoint, synthesize_equal, SynthError, DEFAULT_DISJOINT_BUFFER};
use crate::geometry::GeomType;
use crate::neighborhood::TypeCombo;
use crate::topology::shape::Shape;
use crate::topology::{
    all_combinations, classify_matrix, classify_predicate, is_valid_combination, relate_prebuilt,
    ClassifyOutcome, Predicate,
};

/// Dataset split tags.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Eval,
    Fewshot,
}

/// One ground-truth relation triplet.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct RelationTriplet {
    pub subject_id: String,
    pub predicate: Predicate,
    pub object_id: String,
    pub type_a: GeomType,
    pub type_b: GeomType,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<Split>,
}

impl RelationTriplet {
    pub fn combo(&self) -> TypeCombo {
        (self.type_a, self.type_b)
    }

    pub fn key(&self) -> (GeomType, Predicate, GeomType) {
        (self.type_a, self.predicate, self.type_b)
    }
}

/// Sampling parameters. The builder draws `per_combo + fewshot_extra`
/// triplets for every combination so a later split can set aside the
/// few-shot candidates.
#[derive(Clone, Copy, Debug)]
pub struct TripletConfig {
    pub per_combo: usize,
    pub fewshot_extra: usize,
    pub buffer: f64,
    pub seed: u64,
}

impl Default for TripletConfig {
    fn default() -> Self {
        TripletConfig {
            per_combo: 200,
            fewshot_extra: 25,
            buffer: DEFAULT_DISJOINT_BUFFER,
            seed: 0,
        }
    }
}

impl TripletConfig {
    pub fn total_per_combo(&self) -> usize {
        self.per_combo + self.fewshot_extra
    }
}

/// Per-combination split sizes.
#[derive(Clone, Copy, Debug)]
pub struct SplitCounts {
    pub train: usize,
    pub eval: usize,
    pub fewshot: usize,
}

impl Default for SplitCounts {
    fn default() -> Self {
        SplitCounts {
            train: 160,
            eval: 40,
            fewshot: 25,
        }
    }
}

impl SplitCounts {
    pub fn total(&self) -> usize {
        self.train + self.eval + self.fewshot
    }
}

#[derive(Debug, thiserror::Error)]
pub enum BuildError {
    #[error("shortfall in {0} combinations: {1}")]
    Shortfall(usize, String),
    #[error("combination {combo} has {have} triplets, needs {need}")]
    Count {
        combo: String,
        have: usize,
        need: usize,
    },
    #[error("triplet failed ground-truth verification: {0}")]
    Verification(String),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed triplet file: {0}")]
    Malformed(String),
}

/// Spatial-join candidates: ordered entity pairs whose bounding boxes
/// fall in or next to a shared coarse grid cell.
fn candidate_pairs(corpus: &Corpus) -> Vec<(usize, usize)> {
    const CELL: f64 = 0.05;
    let entities: Vec<&SpatialEntity> = corpus.iter().collect();
    let mut grid: BTreeMap<(i64, i64), Vec<usize>> = BTreeMap::new();
    for (i, e) in entities.iter().enumerate() {
        if let Some((min, max)) = e.geometry.bbox() {
            let x0 = (min.x / CELL).floor() as i64;
            let x1 = (max.x / CELL).floor() as i64;
            let y0 = (min.y / CELL).floor() as i64;
            let y1 = (max.y / CELL).floor() as i64;
            for x in x0..=x1 {
                for y in y0..=y1 {
                    grid.entry((x, y)).or_default().push(i);
                }
            }
        }
    }
    let mut seen: HashSet<(usize, usize)> = HashSet::new();
    let mut pairs = Vec::new();
    for ((x, y), members) in &grid {
        let mut neighborhood: Vec<usize> = Vec::new();
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(more) = grid.get(&(x + dx, y + dy)) {
                    neighborhood.extend_from_slice(more);
                }
            }
        }
        for &i in members {
            for &j in &neighborhood {
                if i != j && seen.insert((i, j)) {
                    pairs.push((i, j));
                }
            }
        }
    }
    pairs.sort_unstable();
    pairs
}

/// Build the balanced triplet set: for each of the 35 combinations,
/// `per_combo + fewshot_extra` triplets—spatial-join sampling for the
/// intersecting predicates, synthesized pairs for equals, and buffered
/// nearby pairs for disjoint. Every emitted triplet is re-verified under
/// classification; the augmented corpus (with the synthesized equals
/// entities) is returned alongside.
pub fn sample_triplets(
    corpus: &Corpus,
    config: &TripletConfig,
) -> Result<(Vec<RelationTriplet>, Corpus), BuildError> {
    let want = config.total_per_combo();
    let entities: Vec<&SpatialEntity> = corpus.iter().collect();
    // Entities were validated at ingest; build their shapes once so the
    // join classifies pairs without re-validating per pair.
    let shapes: Vec<Shape> = entities.iter().map(|e| Shape::build(&e.geometry)).collect();

    // Classify every nearby ordered pair once and bucket by combination.
    let mut buckets: BTreeMap<(GeomType, Predicate, GeomType), Vec<(String, String)>> =
        BTreeMap::new();
    for (i, j) in candidate_pairs(corpus) {
        let a = entities[i];
        let b = entities[j];
        let m = relate_prebuilt(&shapes[i], &shapes[j]);
        let outcome = classify_matrix(&m, a.geometry.dimension(), b.geometry.dimension());
        if let ClassifyOutcome::Predicate(pred) = outcome {
            if pred == Predicate::Disjoint || pred == Predicate::Equals {
                continue;
            }
            let key = (a.geometry.geom_type(), pred, b.geometry.geom_type());
            if is_valid_combination(key.0, key.1, key.2) {
                buckets
                    .entry(key)
                    .or_default()
                    .push((a.id.clone(), b.id.clone()));
            }
        }
    }

    // Nearby disjoint pairs drawn through the buffer sampler, with the
    // grid adjacency as the candidate pool.
    let mut neighbors: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, j) in candidate_pairs(corpus) {
        neighbors.entry(j).or_default().push(i);
    }
    for (ti, ta) in GeomType::SIMPLE.iter().enumerate() {
        for (tj, tb) in GeomType::SIMPLE.iter().enumerate() {
            let mut rng =
                ChaCha8Rng::seed_from_u64(config.seed ^ (0xD15C0 + (ti * 3 + tj) as u64));
            let mut objects: Vec<usize> = (0..entities.len())
                .filter(|&i| entities[i].geometry.geom_type() == *tb)
                .collect();
            objects.shuffle(&mut rng);
            let key = (*ta, Predicate::Disjoint, *tb);
            for oi in objects {
                if buckets.get(&key).map(Vec::len).unwrap_or(0) >= want {
                    break;
                }
                let object = entities[oi];
                let pool = neighbors
                    .get(&oi)
                    .into_iter()
                    .flatten()
                    .map(|&i| entities[i])
                    .filter(|e| e.geometry.geom_type() == *ta);
                if let Ok(subject) = sample_disjoint(pool, object, config.buffer) {
                    let entry = buckets.entry(key).or_default();
                    let pair = (subject.id.clone(), object.id.clone());
                    if !entry.contains(&pair) {
                        entry.push(pair);
                    }
                }
            }
        }
    }

    // Synthesized equals pairs, added to the corpus as new entities.
    let mut augmented = corpus.clone();
    for (ti, ty) in GeomType::SIMPLE.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ (0xE0 + ti as u64));
        let mut sources: Vec<&SpatialEntity> = entities
            .iter()
            .copied()
            .filter(|e| e.geometry.geom_type() == *ty)
            .collect();
        sources.shuffle(&mut rng);
        let key = (*ty, Predicate::Equals, *ty);
        for (i, object) in sources.into_iter().enumerate() {
            if buckets.get(&key).map(Vec::len).unwrap_or(0) >= want {
                break;
            }
            let geometry =
                synthesize_equal(&object.geometry, config.seed ^ ((i as u64) << 20))?;
            let id = format!("{}-eq{}", object.id, i);
            augmented
                .insert(SpatialEntity {
                    id: id.clone(),
                    geometry,
                    name: object.name.clone(),
                    place_type: object.place_type.clone(),
                    source: "equals-synthesis".to_string(),
                })
                .map_err(|e| BuildError::Malformed(e.to_string()))?;
            buckets
                .entry(key)
                .or_default()
                .push((id, object.id.clone()));
        }
    }

    // Seeded subsample down to the requested count per combination.
    let mut shortfalls = Vec::new();
    let mut triplets = Vec::new();
    for (index, (ta, pred, tb)) in all_combinations().into_iter().enumerate() {
        let pairs = buckets.remove(&(ta, pred, tb)).unwrap_or_default();
        if pairs.len() < want {
            shortfalls.push(format!(
                "{}/{}/{}: have {}, need {}",
                ta.name(),
                pred,
                tb.name(),
                pairs.len(),
                want
            ));
            continue;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ ((index as u64 + 1) << 8));
        let mut pairs = pairs;
        pairs.shuffle(&mut rng);
        pairs.truncate(want);
        for (subject_id, object_id) in pairs {
            triplets.push(RelationTriplet {
                subject_id,
                predicate: pred,
                object_id,
                type_a: ta,
                type_b: tb,
                split: None,
            });
        }
    }
    if !shortfalls.is_empty() {
        return Err(BuildError::Shortfall(
            shortfalls.len(),
            shortfalls.join("; "),
        ));
    }

    // Ground-truth soundness: every emitted triplet must re-verify.
    {
        let mut shape_cache: BTreeMap<String, Shape> = BTreeMap::new();
        for t in &triplets {
            let a = augmented.get(&t.subject_id).unwrap();
            let b = augmented.get(&t.object_id).unwrap();
            for e in [a, b] {
                shape_cache
                    .entry(e.id.clone())
                    .or_insert_with(|| Shape::build(&e.geometry));
            }
            let m = relate_prebuilt(&shape_cache[&t.subject_id], &shape_cache[&t.object_id]);
            let outcome = classify_matrix(&m, a.geometry.dimension(), b.geometry.dimension());
            if outcome != ClassifyOutcome::Predicate(t.predicate) {
                return Err(BuildError::Verification(format!(
                    "({}, {}, {})",
                    t.subject_id, t.predicate, t.object_id
                )));
            }
        }
    }
    Ok((triplets, augmented))
}

/// Assign split tags per combination: `train`/`eval`/`fewshot` disjoint
/// draws from a seeded shuffle. Combinations with fewer than the
/// required total are an error; surplus triplets are dropped so the
/// output is exactly balanced.
pub fn split(
    triplets: &[RelationTriplet],
    counts: &SplitCounts,
    seed: u64,
) -> Result<Vec<RelationTriplet>, BuildError> {
    let mut groups: BTreeMap<(GeomType, Predicate, GeomType), Vec<RelationTriplet>> =
        BTreeMap::new();
    for t in triplets {
        groups.entry(t.key()).or_default().push(t.clone());
    }
    let mut out = Vec::with_capacity(triplets.len());
    for (index, (key, mut group)) in groups.into_iter().enumerate() {
        if group.len() < counts.total() {
            return Err(BuildError::Count {
                combo: format!("{}/{}/{}", key.0.name(), key.1, key.2.name()),
                have: group.len(),
                need: counts.total(),
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ ((index as u64 + 1) * 0x9E37));
        group.shuffle(&mut rng);
        for (i, mut t) in group.into_iter().take(counts.total()).enumerate() {
            t.split = Some(if i < counts.train {
                Split::Train
            } else if i < counts.train + counts.eval {
                Split::Eval
            } else {
                Split::Fewshot
            });
            out.push(t);
        }
    }
    Ok(out)
}

/// The retrieval corpus: evaluation-split triplets of the 26 non-disjoint
/// combinations.
pub fn retrieval_corpus(triplets: &[RelationTriplet]) -> Vec<RelationTriplet> {
    triplets
        .iter()
        .filter(|t| t.split == Some(Split::Eval) && t.predicate != Predicate::Disjoint)
        .cloned()
        .collect()
}

/// One verification failure found by [`verify_triplets`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VerifyIssue {
    MissingEntity { triplet: usize, id: String },
    TypeMismatch { triplet: usize, field: &'static str },
    InvalidCombination { triplet: usize },
    WrongPredicate { triplet: usize, found: String },
}

impl std::fmt::Display for VerifyIssue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            VerifyIssue::MissingEntity { triplet, id } => {
                write!(f, "triplet {triplet}: missing entity `{id}`")
            }
            VerifyIssue::TypeMismatch { triplet, field } => {
                write!(f, "triplet {triplet}: {field} does not match the geometry")
            }
            VerifyIssue::InvalidCombination { triplet } => {
                write!(f, "triplet {triplet}: type/predicate combination is not valid")
            }
            VerifyIssue::WrongPredicate { triplet, found } => {
                write!(f, "triplet {triplet}: classification yields {found}")
            }
        }
    }
}

/// Re-verify a persisted triplet set against its corpus.
pub fn verify_triplets(corpus: &Corpus, triplets: &[RelationTriplet]) -> Vec<VerifyIssue> {
    let mut issues = Vec::new();
    for (i, t) in triplets.iter().enumerate() {
        let a = match corpus.get(&t.subject_id) {
            Some(e) => e,
            None => {
                issues.push(VerifyIssue::MissingEntity {
                    triplet: i,
                    id: t.subject_id.clone(),
                });
                continue;
            }
        };
        let b = match corpus.get(&t.object_id) {
            Some(e) => e,
            None => {
                issues.push(VerifyIssue::MissingEntity {
                    triplet: i,
                    id: t.object_id.clone(),
                });
                continue;
            }
        };
        if a.geometry.geom_type() != t.type_a {
            issues.push(VerifyIssue::TypeMismatch {
                triplet: i,
                field: "type_a",
            });
            continue;
        }
        if b.geometry.geom_type() != t.type_b {
            issues.push(VerifyIssue::TypeMismatch {
                triplet: i,
                field: "type_b",
            });
            continue;
        }
        if !is_valid_combination(t.type_a, t.predicate, t.type_b) {
            issues.push(VerifyIssue::InvalidCombination { triplet: i });
            continue;
        }
        match classify_predicate(&a.geometry, &b.geometry) {
            Ok(Some(p)) if p == t.predicate => {}
            other => issues.push(VerifyIssue::WrongPredicate {
                triplet: i,
                found: format!("{other:?}"),
            }),
        }
    }
    issues
}

/// Write triplets as JSONL.
pub fn save_triplets(triplets: &[RelationTriplet], path: &std::path::Path) -> Result<(), BuildError> {
    let mut body = String::new();
    for t in triplets {
        body.push_str(&serde_json::to_string(t).unwrap());
        body.push('\n');
    }
    std::fs::write(path, body)?;
    Ok(())
}

/// Read a JSONL triplet file.
pub fn load_triplets(path: &std::path::Path) -> Result<Vec<RelationTriplet>, BuildError> {
    let text = std::fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let t: RelationTriplet = serde_json::from_str(line)
            .map_err(|e| BuildError::Malformed(format!("line {}: {e}", i + 1)))?;
        out.push(t);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::synth::{generate_corpus, CorpusSpec};
    use std::sync::OnceLock;

    fn small_config() -> TripletConfig {
        TripletConfig {
            per_combo: 4,
            fewshot_extra: 1,
            seed: 77,
            ..TripletConfig::default()
        }
    }

    /// Shared base corpus; generating it is the expensive part.
    fn corpus6() -> &'static Corpus {
        static CORPUS: OnceLock<Corpus> = OnceLock::new();
        CORPUS.get_or_init(|| generate_corpus(&CorpusSpec::new(6, 5)).unwrap())
    }

    #[test]
    fn builds_all_35_combinations() {
        let corpus = corpus6();
        let (triplets, augmented) = sample_triplets(corpus, &small_config()).unwrap();
        assert_eq!(triplets.len(), 35 * 5);
        let mut per_combo: BTreeMap<_, usize> = BTreeMap::new();
        for t in &triplets {
            *per_combo.entry(t.key()).or_default() += 1;
        }
        assert_eq!(per_combo.len(), 35);
        assert!(per_combo.values().all(|&n| n == 5));
        assert!(verify_triplets(&augmented, &triplets).is_empty());
    }

    #[test]
    fn sampling_is_deterministic() {
        let corpus = corpus6();
        let (a, _) = sample_triplets(corpus, &small_config()).unwrap();
        let (b, _) = sample_triplets(corpus, &small_config()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn shortfall_reported() {
        let corpus = generate_corpus(&CorpusSpec::new(2, 5)).unwrap();
        let config = TripletConfig {
            per_combo: 50,
            fewshot_extra: 5,
            seed: 1,
            ..TripletConfig::default()
        };
        assert!(matches!(
            sample_triplets(corpus, &config),
            Err(BuildError::Shortfall(..))
        ));
    }

    #[test]
    fn split_partitions_each_combination() {
        let corpus = corpus6();
        let (triplets, _) = sample_triplets(corpus, &small_config()).unwrap();
        let counts = SplitCounts {
            train: 3,
            eval: 1,
            fewshot: 1,
        };
        let tagged = split(&triplets, &counts, 9).unwrap();
        let mut by: BTreeMap<(Split, (GeomType, Predicate, GeomType)), usize> = BTreeMap::new();
        for t in &tagged {
            *by.entry((t.split.unwrap(), t.key())).or_default() += 1;
        }
        for (ta, p, tb) in all_combinations() {
            assert_eq!(by[&(Split::Train, (ta, p, tb))], 3);
            assert_eq!(by[&(Split::Eval, (ta, p, tb))], 1);
            assert_eq!(by[&(Split::Fewshot, (ta, p, tb))], 1);
        }
        // Determinism.
        let again = split(&triplets, &counts, 9).unwrap();
        assert_eq!(tagged, again);
        // Too small.
        let too_big = SplitCounts {
            train: 10,
            eval: 5,
            fewshot: 5,
        };
        assert!(matches!(
            split(&triplets, &too_big, 9),
            Err(BuildError::Count { .. })
        ));
    }

    #[test]
    fn retrieval_corpus_excludes_disjoint() {
        let corpus = corpus6();
        let (triplets, _) = sample_triplets(corpus, &small_config()).unwrap();
        let tagged = split(
            &triplets,
            &SplitCounts {
                train: 3,
                eval: 1,
                fewshot: 1,
            },
            9,
        )
        .unwrap();
        let retrieval = retrieval_corpus(&tagged);
        assert_eq!(retrieval.len(), 26);
        assert!(retrieval.iter().all(|t| t.predicate != Predicate::Disjoint));
        assert!(retrieval.iter().all(|t| t.split == Some(Split::Eval)));
    }

    #[test]
    fn triplet_file_round_trip_and_tamper_detection() {
        let corpus = corpus6();
        let (triplets, augmented) = sample_triplets(corpus, &small_config()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("triplets.jsonl");
        save_triplets(&triplets, &path).unwrap();
        let loaded = load_triplets(&path).unwrap();
        assert_eq!(loaded, triplets);

        let mut tampered = loaded;
        tampered[0].predicate = if tampered[0].predicate == Predicate::Touches {
            Predicate::Disjoint
        } else {
            Predicate::Touches
        };
        let issues = verify_triplets(&augmented, &tampered);
        assert!(!issues.is_empty());
    }
}
