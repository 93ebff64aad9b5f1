//! Long-term memory for language-model applications built on a temporal
//! concept graph.
//!
//! Text goes in through [`Engine::ingest`]: nouns become concepts, adjacent
//! concepts become relations, and a global counter stamps everything touched.
//! Questions are answered by [`Engine::ask`], which gathers the concepts
//! named in the question plus their freshest neighbours and hands their
//! contexts, oldest first, to a chat model.
//!
//! The library is generic over the float type used for scores and vectors.
//! The aliases at the crate root fix it to `f64`.

pub mod bench;
pub mod engine;
pub mod error;
pub mod extract;
pub mod hybrid;
pub mod kgraph;
pub mod label;
pub mod num;
pub mod provider;
pub mod recall;
pub mod update;
pub mod vecstore;

pub use engine::{AskMode, IngestReport, Stats};
pub use error::{Error, Result};
pub use extract::Extractor;
pub use kgraph::{ConceptNode, GraphStore, MergeReport, Relation, TemporalWindow};
pub use label::{EdgeKey, Label};
pub use num::Scalar;
pub use update::{RevisionPolicy, UpdateReport};

pub type Engine = engine::Engine<f64>;
pub type EngineConfig = engine::EngineConfig<f64>;
pub type AskTrace = engine::AskTrace<f64>;
pub type RetrievalConfig = recall::RetrievalConfig<f64>;
pub type RetrievalTrace = recall::RetrievalTrace<f64>;
pub type VectorStore = vecstore::VectorStore<f64>;
pub type VectorTrace = vecstore::VectorTrace<f64>;
pub type HybridTrace = hybrid::HybridTrace<f64>;
pub type BenchReport = bench::BenchReport<f64>;
pub type RunRecord = bench::RunRecord<f64>;
