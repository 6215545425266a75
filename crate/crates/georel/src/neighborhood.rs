//! Conceptual-neighborhood graphs and the shortest-path topological
//! distance between predicates.
//!
//! Each geometry type combination has its own graph over the predicates
//! applicable to it; edges join relations reachable from one another by
//! continuous deformation. Distances are BFS shortest paths with unit
//! edges, the score used for near-miss predictions. The shipped
//! adjacency tables live in a data file and can be overridden at load
//! time.

use std::collections::BTreeMap;

use crate::geometry::GeomType;
use crate::topology::{is_valid_combination, Predicate};

/// A pair of simple geometry types, e.g. `Polygon/Polygon`.
pub type TypeCombo = (GeomType, GeomType);

/// Render a combination the way the graph file and CLI spell it.
pub fn combo_name(combo: TypeCombo) -> String {
    format!("{}/{}", combo.0.name(), combo.1.name())
}

/// Parse `"Polygon/Polygon"`-style combination names (case-insensitive).
pub fn parse_combo(text: &str) -> Option<TypeCombo> {
    let (a, b) = text.split_once('/')?;
    Some((GeomType::parse(a)?, GeomType::parse(b)?))
}

/// The conceptual-neighborhood graph of one type combination.
#[derive(Clone, Debug)]
pub struct NeighborhoodGraph {
    pub combo: TypeCombo,
    pub nodes: Vec<Predicate>,
    pub edges: Vec<(Predicate, Predicate)>,
}

impl NeighborhoodGraph {
    pub fn contains(&self, p: Predicate) -> bool {
        self.nodes.contains(&p)
    }

    fn neighbors(&self, p: Predicate) -> impl Iterator<Item = Predicate> + '_ {
        self.edges.iter().filter_map(move |(a, b)| {
            if *a == p {
                Some(*b)
            } else if *b == p {
                Some(*a)
            } else {
                None
            }
        })
    }

    /// BFS shortest-path length in unit edges; `None` when unreachable.
    fn bfs(&self, from: Predicate, to: Predicate) -> Option<u32> {
        if from == to {
            return Some(0);
        }
        let mut dist: BTreeMap<Predicate, u32> = BTreeMap::new();
        dist.insert(from, 0);
        let mut queue = std::collections::VecDeque::from([from]);
        while let Some(p) = queue.pop_front() {
            let d = dist[&p];
            for n in self.neighbors(p) {
                if !dist.contains_key(&n) {
                    if n == to {
                        return Some(d + 1);
                    }
                    dist.insert(n, d + 1);
                    queue.push_back(n);
                }
            }
        }
        None
    }

    fn is_connected(&self) -> bool {
        self.nodes
            .iter()
            .all(|n| self.bfs(self.nodes[0], *n).is_some())
    }
}

#[derive(Clone, PartialEq, Eq, Debug, thiserror::Error)]
pub enum GraphError {
    #[error("line {line}: expected `combo | nodes | edges`")]
    BadRecord { line: usize },
    #[error("line {line}: unknown type combination `{text}`")]
    BadCombo { line: usize, text: String },
    #[error("line {line}: unknown predicate `{text}`")]
    BadPredicate { line: usize, text: String },
    #[error("line {line}: predicate `{predicate}` is not applicable to {combo}")]
    NotApplicableNode {
        line: usize,
        predicate: Predicate,
        combo: String,
    },
    #[error("line {line}: edge endpoint `{text}` is not a listed node")]
    EdgeOutsideNodes { line: usize, text: String },
    #[error("line {line}: self-loop on `{text}`")]
    SelfLoop { line: usize, text: String },
    #[error("graph for {combo} is not connected")]
    Disconnected { combo: String },
}

#[derive(Clone, PartialEq, Eq, Debug, thiserror::Error)]
pub enum DistanceError {
    #[error("no neighborhood graph for combination {0}")]
    UnknownCombo(String),
    #[error("predicate {predicate} is not applicable to {combo}")]
    NotApplicable { combo: String, predicate: Predicate },
}

/// The full set of graphs, keyed by type combination.
#[derive(Clone, Debug)]
pub struct NeighborhoodGraphs {
    graphs: BTreeMap<TypeCombo, NeighborhoodGraph>,
}

const DEFAULT_TABLES: &str = include_str!("../assets/neighborhoods.txt");

impl Default for NeighborhoodGraphs {
    fn default() -> Self {
        NeighborhoodGraphs::parse(DEFAULT_TABLES).expect("shipped tables are well-formed")
    }
}

impl NeighborhoodGraphs {
    /// Parse the line-oriented graph format: `combo | nodes | edges`,
    /// `#` comments and blank lines ignored. Every graph is checked for
    /// applicable nodes, in-graph edges, no self-loops and connectivity.
    pub fn parse(text: &str) -> Result<Self, GraphError> {
        let mut graphs = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = trimmed.split('|').collect();
            if fields.len() != 3 {
                return Err(GraphError::BadRecord { line });
            }
            let combo = parse_combo(fields[0]).ok_or_else(|| GraphError::BadCombo {
                line,
                text: fields[0].trim().to_string(),
            })?;
            let mut nodes = Vec::new();
            for word in fields[1].split_whitespace() {
                let p = Predicate::parse(word).ok_or_else(|| GraphError::BadPredicate {
                    line,
                    text: word.to_string(),
                })?;
                if !is_valid_combination(combo.0, p, combo.1) {
                    return Err(GraphError::NotApplicableNode {
                        line,
                        predicate: p,
                        combo: combo_name(combo),
                    });
                }
                if !nodes.contains(&p) {
                    nodes.push(p);
                }
            }
            let mut edges = Vec::new();
            for word in fields[2].split_whitespace() {
                let (sa, sb) = word
                    .split_once('-')
                    .ok_or(GraphError::BadRecord { line })?;
                let pa = Predicate::parse(sa).ok_or_else(|| GraphError::BadPredicate {
                    line,
                    text: sa.to_string(),
                })?;
                let pb = Predicate::parse(sb).ok_or_else(|| GraphError::BadPredicate {
                    line,
                    text: sb.to_string(),
                })?;
                if pa == pb {
                    return Err(GraphError::SelfLoop {
                        line,
                        text: word.to_string(),
                    });
                }
                for (p, s) in [(pa, sa), (pb, sb)] {
                    if !nodes.contains(&p) {
                        return Err(GraphError::EdgeOutsideNodes {
                            line,
                            text: s.to_string(),
                        });
                    }
                }
                edges.push((pa, pb));
            }
            let graph = NeighborhoodGraph {
                combo,
                nodes,
                edges,
            };
            if !graph.nodes.is_empty() && !graph.is_connected() {
                return Err(GraphError::Disconnected {
                    combo: combo_name(combo),
                });
            }
            graphs.insert(combo, graph);
        }
        Ok(NeighborhoodGraphs { graphs })
    }

    /// Load an override file replacing the shipped tables.
    pub fn from_file(path: &std::path::Path) -> Result<Self, std::io::Error> {
        let text = std::fs::read_to_string(path)?;
        NeighborhoodGraphs::parse(&text)
            .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e.to_string()))
    }

    pub fn graph(&self, combo: TypeCombo) -> Option<&NeighborhoodGraph> {
        self.graphs.get(&combo)
    }

    pub fn combos(&self) -> impl Iterator<Item = TypeCombo> + '_ {
        self.graphs.keys().copied()
    }

    /// Shortest-path topological distance between two predicates on the
    /// combination's graph. Symmetric, zero iff the predicates are equal.
    pub fn distance(
        &self,
        combo: TypeCombo,
        r1: Predicate,
        r2: Predicate,
    ) -> Result<u32, DistanceError> {
        let graph = self
            .graphs
            .get(&combo)
            .ok_or_else(|| DistanceError::UnknownCombo(combo_name(combo)))?;
        for p in [r1, r2] {
            if !graph.contains(p) {
                return Err(DistanceError::NotApplicable {
                    combo: combo_name(combo),
                    predicate: p,
                });
            }
        }
        // Connectivity is enforced at load time, so BFS always arrives.
        Ok(graph.bfs(r1, r2).expect("connected graph"))
    }
}

/// Mean topological distance over the incorrectly predicted records.
#[derive(Clone, Copy, PartialEq, Debug, serde::Serialize)]
pub struct MeanDistance {
    pub mean: f64,
    pub incorrect: usize,
}

impl MeanDistance {
    /// No incorrect records: the mean is reported as 0 and flagged empty.
    pub fn is_empty(&self) -> bool {
        self.incorrect == 0
    }
}

/// Average `distance(combo, predicted, truth)` over records where the
/// prediction differs from the truth.
pub fn mean_incorrect_distance<I>(
    graphs: &NeighborhoodGraphs,
    records: I,
) -> Result<MeanDistance, DistanceError>
where
    I: IntoIterator<Item = (Predicate, Predicate, TypeCombo)>,
{
    let mut total = 0u64;
    let mut incorrect = 0usize;
    for (predicted, truth, combo) in records {
        if predicted == truth {
            continue;
        }
        total += graphs.distance(combo, predicted, truth)? as u64;
        incorrect += 1;
    }
    let mean = if incorrect == 0 {
        0.0
    } else {
        total as f64 / incorrect as f64
    };
    Ok(MeanDistance { mean, incorrect })
}
