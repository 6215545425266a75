//! Supervised baseline: a from-scratch random forest over concatenated
//! geometry embeddings.
//!
//! Labels are full `(type A, predicate, type B)` tuples, so every
//! prediction is a valid combination by construction. Trees are CART
//! with Gini-impurity splits over a random feature subset, grown on
//! bootstrap resamples until pure (or below the minimum split size).
//! Training and prediction are deterministic per seed; majority-vote
//! ties break toward the lexicographically smallest label.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::GeomType;
use crate::topology::Predicate;

/// A `(type A, predicate, type B)` class label.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct ComboLabel {
    pub type_a: GeomType,
    pub predicate: Predicate,
    pub type_b: GeomType,
}

impl ComboLabel {
    pub fn new(type_a: GeomType, predicate: Predicate, type_b: GeomType) -> Self {
        ComboLabel {
            type_a,
            predicate,
            type_b,
        }
    }

    fn name_key(&self) -> (&'static str, &'static str, &'static str) {
        (self.type_a.name(), self.predicate.name(), self.type_b.name())
    }
}

impl std::fmt::Display for ComboLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "({}, {}, {})",
            self.type_a.name(),
            self.predicate,
            self.type_b.name()
        )
    }
}

impl PartialOrd for ComboLabel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ComboLabel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.name_key().cmp(&other.name_key())
    }
}

/// One training example: concatenated embeddings plus its label.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LabeledFeature {
    pub feature: Vec<f64>,
    pub label: ComboLabel,
}

#[derive(Clone, Debug)]
pub struct ForestConfig {
    pub estimators: usize,
    pub min_samples_split: usize,
    /// Features examined per split; defaults to sqrt of the feature count.
    pub max_features: Option<usize>,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            estimators: 100,
            min_samples_split: 2,
            max_features: None,
            seed: 0,
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug, thiserror::Error)]
pub enum DataError {
    #[error("training set is empty")]
    Empty,
    #[error("feature length mismatch: expected {expected}, found {found} at row {row}")]
    LengthMismatch {
        expected: usize,
        found: usize,
        row: usize,
    },
    #[error("training set has a single class")]
    SingleClass,
}

#[derive(Clone, PartialEq, Eq, Debug, thiserror::Error)]
pub enum FormatError {
    #[error("model file is not valid JSON: {0}")]
    BadJson(String),
    #[error("unsupported model version {0}")]
    BadVersion(u32),
    #[error("io error: {0}")]
    Io(String),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
enum Node {
    Leaf {
        class: usize,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    fn predict(&self, feature: &[f64]) -> usize {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { class } => return *class,
                Node::Split {
                    feature: f,
                    threshold,
                    left,
                    right,
                } => {
                    i = if feature[*f] < *threshold { *left } else { *right };
                }
            }
        }
    }
}

const MODEL_VERSION: u32 = 1;

/// A trained forest: majority vote over the trees.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ForestModel {
    version: u32,
    n_features: usize,
    classes: Vec<ComboLabel>,
    trees: Vec<Tree>,
}

/// Train a forest of `config.estimators` trees.
///
/// Each tree sees a bootstrap resample; splits consider a seeded random
/// subset of features. Tree seeds derive from the master seed, so the
/// trained model is identical across runs and thread schedules.
pub fn train(features: &[LabeledFeature], config: &ForestConfig) -> Result<ForestModel, DataError> {
    if features.is_empty() {
        return Err(DataError::Empty);
    }
    let n_features = features[0].feature.len();
    for (row, f) in features.iter().enumerate() {
        if f.feature.len() != n_features {
            return Err(DataError::LengthMismatch {
                expected: n_features,
                found: f.feature.len(),
                row,
            });
        }
    }
    let mut classes: Vec<ComboLabel> = features.iter().map(|f| f.label).collect();
    classes.sort();
    classes.dedup();
    if classes.len() < 2 {
        return Err(DataError::SingleClass);
    }
    let labels: Vec<usize> = features
        .iter()
        .map(|f| classes.binary_search(&f.label).unwrap())
        .collect();
    let max_features = config
        .max_features
        .unwrap_or_else(|| (n_features as f64).sqrt().round().max(1.0) as usize)
        .min(n_features);

    let seeds: Vec<u64> = (0..config.estimators)
        .map(|t| config.seed.wrapping_add((t as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)))
        .collect();
    let workers = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1);
    let trees = crate::llm::run_parallel(&seeds, workers, |seed| {
        grow_tree(
            features,
            &labels,
            classes.len(),
            max_features,
            config.min_samples_split,
            *seed,
        )
    });

    Ok(ForestModel {
        version: MODEL_VERSION,
        n_features,
        classes,
        trees,
    })
}

fn grow_tree(
    features: &[LabeledFeature],
    labels: &[usize],
    n_classes: usize,
    max_features: usize,
    min_samples_split: usize,
    seed: u64,
) -> Tree {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = features.len();
    let sample: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
    let mut tree = Tree { nodes: Vec::new() };
    build_node(
        features,
        labels,
        n_classes,
        max_features,
        min_samples_split,
        &sample,
        &mut rng,
        &mut tree,
    );
    tree
}

fn majority(labels: &[usize], rows: &[usize], n_classes: usize) -> usize {
    let mut counts = vec![0usize; n_classes];
    for &r in rows {
        counts[labels[r]] += 1;
    }
    // Ties go to the smallest class index, i.e. the lexicographically
    // smallest label since classes are sorted.
    let mut best = 0;
    for (c, &count) in counts.iter().enumerate() {
        if count > counts[best] {
            best = c;
        }
    }
    best
}

fn gini(counts: &[usize], total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let mut sum_sq = 0.0;
    for &c in counts {
        let p = c as f64 / total as f64;
        sum_sq += p * p;
    }
    1.0 - sum_sq
}

#[allow(clippy::too_many_arguments)]
fn build_node(
    features: &[LabeledFeature],
    labels: &[usize],
    n_classes: usize,
    max_features: usize,
    min_samples_split: usize,
    rows: &[usize],
    rng: &mut ChaCha8Rng,
    tree: &mut Tree,
) -> usize {
    let first = labels[rows[0]];
    let pure = rows.iter().all(|&r| labels[r] == first);
    if pure || rows.len() < min_samples_split {
        tree.nodes.push(Node::Leaf {
            class: majority(labels, rows, n_classes),
        });
        return tree.nodes.len() - 1;
    }

    let n_features = features[0].feature.len();
    let mut feature_pool: Vec<usize> = (0..n_features).collect();
    feature_pool.shuffle(rng);
    feature_pool.truncate(max_features);
    feature_pool.sort_unstable();

    let mut best: Option<(f64, usize, f64)> = None; // (impurity, feature, threshold)
    for &feat in &feature_pool {
        let mut values: Vec<(f64, usize)> = rows
            .iter()
            .map(|&r| (features[r].feature[feat], labels[r]))
            .collect();
        values.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let total = values.len();
        let mut right_counts = vec![0usize; n_classes];
        for &(_, c) in &values {
            right_counts[c] += 1;
        }
        let mut left_counts = vec![0usize; n_classes];
        for i in 0..total - 1 {
            let (v, c) = values[i];
            left_counts[c] += 1;
            right_counts[c] -= 1;
            let next = values[i + 1].0;
            if next == v {
                continue;
            }
            let nl = i + 1;
            let nr = total - nl;
            let impurity = (nl as f64 * gini(&left_counts, nl)
                + nr as f64 * gini(&right_counts, nr))
                / total as f64;
            let threshold = v + (next - v) / 2.0;
            // Midpoint may round onto v itself for adjacent floats; keep
            // the split usable by testing strictly-less on the threshold.
            if threshold <= v {
                continue;
            }
            if best.is_none_or(|(bi, _, _)| impurity < bi) {
                best = Some((impurity, feat, threshold));
            }
        }
    }

    match best {
        None => {
            tree.nodes.push(Node::Leaf {
                class: majority(labels, rows, n_classes),
            });
            tree.nodes.len() - 1
        }
        Some((_, feat, threshold)) => {
            let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
                .iter()
                .partition(|&&r| features[r].feature[feat] < threshold);
            let index = tree.nodes.len();
            tree.nodes.push(Node::Leaf { class: 0 }); // placeholder
            let left = build_node(
                features,
                labels,
                n_classes,
                max_features,
                min_samples_split,
                &left_rows,
                rng,
                tree,
            );
            let right = build_node(
                features,
                labels,
                n_classes,
                max_features,
                min_samples_split,
                &right_rows,
                rng,
                tree,
            );
            tree.nodes[index] = Node::Split {
                feature: feat,
                threshold,
                left,
                right,
            };
            index
        }
    }
}

impl ForestModel {
    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn classes(&self) -> &[ComboLabel] {
        &self.classes
    }

    /// Majority vote over the trees; ties break toward the
    /// lexicographically smallest label. The result is always one of the
    /// training labels, hence always a valid combination tuple.
    pub fn predict(&self, feature: &[f64]) -> Result<ComboLabel, DataError> {
        if feature.len() != self.n_features {
            return Err(DataError::LengthMismatch {
                expected: self.n_features,
                found: feature.len(),
                row: 0,
            });
        }
        let mut votes = vec![0usize; self.classes.len()];
        for tree in &self.trees {
            votes[tree.predict(feature)] += 1;
        }
        let mut best = 0;
        for (c, &v) in votes.iter().enumerate() {
            if v > votes[best] {
                best = c;
            }
        }
        Ok(self.classes[best])
    }

    pub fn save(&self, path: &std::path::Path) -> Result<(), FormatError> {
        let body = serde_json::to_string(self).map_err(|e| FormatError::BadJson(e.to_string()))?;
        std::fs::write(path, body).map_err(|e| FormatError::Io(e.to_string()))
    }

    pub fn load(path: &std::path::Path) -> Result<Self, FormatError> {
        let text = std::fs::read_to_string(path).map_err(|e| FormatError::Io(e.to_string()))?;
        let model: ForestModel =
            serde_json::from_str(&text).map_err(|e| FormatError::BadJson(e.to_string()))?;
        if model.version != MODEL_VERSION {
            return Err(FormatError::BadVersion(model.version));
        }
        Ok(model)
    }

    /// Serialized form, used to assert byte-level training determinism.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("model serializes")
    }
}
