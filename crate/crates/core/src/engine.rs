//! One memory instance: graph store, vector store, and the components that
//! feed and query them. Every surface (CLI, HTTP service, bench) goes through
//! this type.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extract::Extractor;
use crate::hybrid::{self, HybridTrace};
use crate::kgraph::GraphStore;
use crate::num::Scalar;
use crate::provider::ChatProvider;
use crate::recall::{self, RetrievalConfig, RetrievalTrace};
use crate::update::{self, FallbackReviser, Reviser, RevisionPolicy, UpdateReport};
use crate::vecstore::{self, Embedder, VectorStore, VectorTrace, DEFAULT_K};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AskMode {
    Graph,
    Vector,
    Hybrid,
    RetrievalOnly,
}

impl std::str::FromStr for AskMode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(match s {
            "graph" => AskMode::Graph,
            "vector" => AskMode::Vector,
            "hybrid" => AskMode::Hybrid,
            "retrieval-only" => AskMode::RetrievalOnly,
            _ => return Err(format!("unknown mode {s:?} (graph, vector, hybrid, retrieval-only)")),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, bound = "F: Scalar")]
pub struct EngineConfig<F> {
    pub retrieval: RetrievalConfig<F>,
    pub revision: RevisionPolicy,
    /// Chunks retrieved by the vector path.
    pub k: usize,
}

impl<F: Scalar> Default for EngineConfig<F> {
    fn default() -> Self {
        Self { retrieval: RetrievalConfig::default(), revision: RevisionPolicy::default(), k: DEFAULT_K }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case", bound = "F: Scalar")]
pub enum AskTrace<F> {
    Graph(RetrievalTrace<F>),
    Vector(VectorTrace<F>),
    Hybrid(HybridTrace<F>),
    RetrievalOnly(RetrievalTrace<F>),
}

impl<F> AskTrace<F> {
    pub fn answer(&self) -> Option<&str> {
        match self {
            AskTrace::Graph(t) | AskTrace::RetrievalOnly(t) => t.answer.as_deref(),
            AskTrace::Vector(t) => t.answer.as_deref(),
            AskTrace::Hybrid(t) => t.answer.as_deref(),
        }
    }

    pub fn error(&self) -> Option<&str> {
        match self {
            AskTrace::Graph(t) | AskTrace::RetrievalOnly(t) => t.error.as_deref(),
            AskTrace::Vector(t) => t.error.as_deref(),
            AskTrace::Hybrid(t) => t.error.as_deref(),
        }
    }

    /// The text handed to the model. For hybrid traces, both backends'
    /// contexts separated by a blank line.
    pub fn context(&self) -> String {
        match self {
            AskTrace::Graph(t) | AskTrace::RetrievalOnly(t) => t.assembled_context.clone(),
            AskTrace::Vector(t) => t.assembled_context.clone(),
            AskTrace::Hybrid(t) => {
                let g = t.graph.as_ref().map(|g| g.assembled_context.as_str());
                let v = t.vector.as_ref().map(|v| v.assembled_context.as_str());
                g.into_iter().chain(v).collect::<Vec<_>>().join("\n\n")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    #[serde(flatten)]
    pub update: UpdateReport,
    /// Ordinals of the vector chunks added.
    pub chunks: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stats {
    pub counter: u64,
    pub nodes: usize,
    pub edges: usize,
    pub chunks: usize,
}

pub struct Engine<F> {
    graph: GraphStore,
    vectors: VectorStore<F>,
    extractor: Extractor,
    config: EngineConfig<F>,
    provider: Option<Arc<dyn ChatProvider>>,
    reviser: Arc<dyn Reviser>,
}

impl<F: Scalar> Default for Engine<F> {
    fn default() -> Self {
        Self::new(EngineConfig::default())
    }
}

impl<F: Scalar> Engine<F> {
    /// Empty stores, bundled lexicons, hashed embedder, no provider and the
    /// keep-last-sentences reviser.
    pub fn new(config: EngineConfig<F>) -> Self {
        Self {
            graph: GraphStore::new(),
            vectors: VectorStore::default(),
            extractor: Extractor::bundled().clone(),
            config,
            provider: None,
            reviser: Arc::new(FallbackReviser::default()),
        }
    }

    pub fn with_provider(mut self, provider: Arc<dyn ChatProvider>) -> Self {
        self.provider = Some(provider);
        self
    }

    pub fn with_reviser(mut self, reviser: Arc<dyn Reviser>) -> Self {
        self.reviser = reviser;
        self
    }

    pub fn with_extractor(mut self, extractor: Extractor) -> Self {
        self.extractor = extractor;
        self
    }

    /// Replaces the vector store with an empty one using `embedder`.
    pub fn with_embedder(mut self, embedder: Embedder) -> Self {
        self.vectors = VectorStore::new(embedder);
        self
    }

    pub fn with_stores(mut self, graph: GraphStore, vectors: VectorStore<F>) -> Self {
        self.graph = graph;
        self.vectors = vectors;
        self
    }

    pub fn graph(&self) -> &GraphStore {
        &self.graph
    }

    pub fn vectors(&self) -> &VectorStore<F> {
        &self.vectors
    }

    pub fn config(&self) -> &EngineConfig<F> {
        &self.config
    }

    pub fn extractor(&self) -> &Extractor {
        &self.extractor
    }

    pub fn provider(&self) -> Option<&dyn ChatProvider> {
        self.provider.as_deref()
    }

    pub fn stats(&self) -> Stats {
        Stats {
            counter: self.graph.global_counter(),
            nodes: self.graph.node_count(),
            edges: self.graph.edge_count(),
            chunks: self.vectors.len(),
        }
    }

    /// One knowledge update, mirrored into the vector store. The vector
    /// side is embedded first so a failing embedder leaves both stores
    /// untouched.
    pub fn ingest(&mut self, text: &str) -> Result<IngestReport> {
        if text.trim().is_empty() {
            return Err(Error::InvalidArgument("knowledge update text is empty".into()));
        }
        let chunks = self.vectors.add(text)?;
        let update = update::knowledge_update(
            &mut self.graph,
            &self.extractor,
            text,
            &self.config.revision,
            self.reviser.as_ref(),
        )?;
        Ok(IngestReport { update, chunks })
    }

    pub fn ask(&self, question: &str, mode: AskMode) -> Result<AskTrace<F>> {
        let cfg = &self.config.retrieval;
        Ok(match mode {
            AskMode::Graph => AskTrace::Graph(recall::answer(&self.graph, &self.extractor, question, self.provider(), cfg)?),
            AskMode::RetrievalOnly => {
                AskTrace::RetrievalOnly(recall::answer(&self.graph, &self.extractor, question, None, cfg)?)
            }
            AskMode::Vector => AskTrace::Vector(vecstore::answer_vec(&self.vectors, question, self.provider(), self.config.k)?),
            AskMode::Hybrid => AskTrace::Hybrid(hybrid::hybrid_answer(
                &self.graph,
                &self.extractor,
                Some(&self.vectors),
                question,
                self.provider(),
                cfg,
                self.config.k,
            )?),
        })
    }

    /// Writes both snapshots. Each file is written to a sibling temporary
    /// path and renamed into place.
    pub fn save(&self, graph_path: &Path, vector_path: &Path) -> Result<()> {
        write_atomic(graph_path, &self.graph.snapshot())?;
        write_atomic(vector_path, &self.vectors.snapshot())
    }

    /// Loads whichever snapshots exist; missing files mean empty stores.
    pub fn load_stores(&mut self, graph_path: &Path, vector_path: &Path) -> Result<()> {
        if graph_path.exists() {
            let bytes = std::fs::read(graph_path).map_err(|e| Error::io(graph_path, e))?;
            self.graph = GraphStore::load(&bytes)?;
        }
        if vector_path.exists() {
            let bytes = std::fs::read(vector_path).map_err(|e| Error::io(vector_path, e))?;
            self.vectors = VectorStore::load(&bytes, self.vectors.embedder().clone())?;
        }
        Ok(())
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = std::path::PathBuf::from(tmp);
    std::fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}
