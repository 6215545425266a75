//! Topological spatial relations over vector geometries, plus an evaluation
//! harness for language-model spatial reasoning.
//!
//! The crate is organised around a small number of building blocks:
//!
//! - [`geometry`]: WKT/GeoJSON geometry values and validation.
//! - [`topology`]: exact DE-9IM intersection matrices and the seven
//!   mutually-exclusive topological predicates.
//! - [`neighborhood`]: conceptual-neighborhood graphs and the shortest-path
//!   topological distance between predicates.
//! - [`dataset`]: ingestion of spatial entities and synthesis of balanced
//!   relation-triplet datasets and vernacular conversion pairs.
//! - [`llm`]: pluggable chat/embedding backends with an on-disk response
//!   cache and deterministic mocks for offline runs.
//! - [`prompts`]: prompt templates and tolerant response parsers for the
//!   three evaluation tasks.
//! - [`classifier`]: a from-scratch random forest over concatenated
//!   geometry embeddings.
//! - [`eval`]: task runners, metrics (validity, accuracy, topological
//!   distance, MRR/Hits@K, entropy) and report writers.

pub mod classifier;
pub mod dataset;
pub mod eval;
pub mod geometry;
pub mod llm;
pub mod neighborhood;
pub mod prompts;
pub mod topology;

pub use geometry::{Coord, Geometry, GeomType, ParseError, Polygon};
pub use topology::{classify, relate, IntersectionMatrix, MatrixPattern, Predicate};
