//! Spatial-entity corpora, balanced relation-triplet synthesis, and
//! vernacular conversion pairs.

mod entity;
mod synth;
mod triplets;
mod vernacular;

pub use entity::{
    ingest, load_corpus, save_corpus, Corpus, IngestError, IngestFormat, IngestReport,
    SpatialEntity,
};
pub use synth::{
    generate_corpus, sample_disjoint, synthesize_equal, CorpusSpec, SynthError,
    DEFAULT_DISJOINT_BUFFER,
};
pub use triplets::{
    load_triplets, retrieval_corpus, sample_triplets, save_triplets, split, verify_triplets,
    BuildError, RelationTriplet, Split, SplitCounts, TripletConfig, VerifyIssue,
};
pub use vernacular::{
    build_conversion_pairs, extract_relations_from_text, load_vernacular_records,
    save_vernacular_records, unify_description, ConversionPair, PairContext, RawRelation,
    VernacularRecord,
};
