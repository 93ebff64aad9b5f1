//! Settings resolution.
//!
//! Each setting is taken from the first source that defines it, in this
//! order: config file, environment, command-line flag, built-in default.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context};
use recallm::provider::{RemoteConfig, ENV_API_BASE, ENV_API_KEY, ENV_MODEL};
use recallm::EngineConfig;
use serde::Deserialize;

pub const ENV_CONFIG: &str = "RECALLM_CONFIG";
pub const ENV_DATA_DIR: &str = "RECALLM_DATA_DIR";
pub const ENV_PROVIDER: &str = "RECALLM_PROVIDER";
pub const ENV_ADDR: &str = "RECALLM_ADDR";
pub const DEFAULT_CONFIG_FILE: &str = "recallm.toml";
pub const DEFAULT_DATA_DIR: &str = ".recallm";
pub const DEFAULT_ADDR: &str = "127.0.0.1:7878";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProviderKind {
    /// No chat model: answers are left empty, retrieval still runs.
    None,
    /// Offline stub that echoes the question line back.
    Echo,
    Remote,
}

impl FromStr for ProviderKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "none" => Ok(Self::None),
            "echo" => Ok(Self::Echo),
            "remote" => Ok(Self::Remote),
            _ => Err(format!("unknown provider {s:?} (none, echo, remote)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmbeddingKind {
    #[default]
    Hashed,
    Remote,
}

/// Values given on the command line.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub config: Option<PathBuf>,
    pub data_dir: Option<PathBuf>,
    pub provider: Option<ProviderKind>,
    pub api_base: Option<String>,
    pub model: Option<String>,
    pub addr: Option<String>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RemoteSection {
    pub base_url: Option<String>,
    pub api_key: Option<String>,
    pub model: Option<String>,
    pub embedding_model: Option<String>,
    pub timeout_secs: Option<u64>,
    pub max_attempts: Option<u32>,
    pub backoff_ms: Option<u64>,
    pub embedding_dim: Option<usize>,
}

/// The TOML file. Every key is optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub data_dir: Option<PathBuf>,
    pub provider: Option<ProviderKind>,
    pub addr: Option<String>,
    pub embeddings: Option<EmbeddingKind>,
    #[serde(default)]
    pub engine: EngineConfig,
    #[serde(default)]
    pub remote: RemoteSection,
}

impl FileConfig {
    pub fn parse(text: &str) -> anyhow::Result<Self> {
        Ok(toml::from_str(text)?)
    }
}

#[derive(Debug, Clone)]
pub struct Settings {
    pub data_dir: PathBuf,
    pub provider: ProviderKind,
    pub addr: String,
    pub embeddings: EmbeddingKind,
    pub engine: EngineConfig,
    pub remote: RemoteConfig,
}

impl Settings {
    pub fn graph_path(&self) -> PathBuf {
        self.data_dir.join("graph.json")
    }

    pub fn vector_path(&self) -> PathBuf {
        self.data_dir.join("vectors.json")
    }
}

fn env(name: &str) -> Option<String> {
    std::env::var(name).ok().filter(|v| !v.trim().is_empty())
}

/// Finds the config file: flag, then `RECALLM_CONFIG`, then `./recallm.toml`
/// if it exists.
fn config_path(flag: Option<&Path>) -> Option<PathBuf> {
    if let Some(p) = env(ENV_CONFIG) {
        return Some(p.into());
    }
    if let Some(p) = flag {
        return Some(p.to_path_buf());
    }
    let default = PathBuf::from(DEFAULT_CONFIG_FILE);
    default.exists().then_some(default)
}

pub fn resolve(flags: &Overrides) -> anyhow::Result<Settings> {
    let file = match config_path(flags.config.as_deref()) {
        Some(path) => {
            let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
            FileConfig::parse(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => FileConfig::default(),
    };
    resolve_with(flags, file, env)
}

/// Resolution with the file and environment supplied by the caller.
pub fn resolve_with(
    flags: &Overrides,
    file: FileConfig,
    env: impl Fn(&str) -> Option<String>,
) -> anyhow::Result<Settings> {
    let env_provider = env(ENV_PROVIDER).map(|s| s.parse::<ProviderKind>()).transpose().map_err(anyhow::Error::msg)?;

    let mut remote = RemoteConfig::default();
    let r = file.remote;
    remote.base_url = r
        .base_url
        .or_else(|| env(ENV_API_BASE))
        .or_else(|| flags.api_base.clone())
        .unwrap_or_default();
    remote.api_key = r.api_key.or_else(|| env(ENV_API_KEY));
    if let Some(m) = r.model.or_else(|| env(ENV_MODEL)).or_else(|| flags.model.clone()) {
        remote.model = m;
    }
    if let Some(m) = r.embedding_model {
        remote.embedding_model = m;
    }
    remote.timeout_secs = r.timeout_secs.unwrap_or(remote.timeout_secs);
    remote.max_attempts = r.max_attempts.unwrap_or(remote.max_attempts);
    remote.backoff_ms = r.backoff_ms.unwrap_or(remote.backoff_ms);
    remote.embedding_dim = r.embedding_dim;

    let provider = file.provider.or(env_provider).or(flags.provider).unwrap_or(if remote.base_url.is_empty() {
        ProviderKind::None
    } else {
        ProviderKind::Remote
    });
    if provider == ProviderKind::Remote && remote.base_url.is_empty() {
        bail!("provider \"remote\" needs a base URL ({ENV_API_BASE}, --api-base or [remote] base_url)");
    }
    let embeddings = file.embeddings.unwrap_or_default();
    if embeddings == EmbeddingKind::Remote && remote.embedding_dim.is_none() {
        bail!("remote embeddings need [remote] embedding_dim");
    }

    file.engine.retrieval.validate()?;
    file.engine.revision.validate()?;

    Ok(Settings {
        data_dir: file
            .data_dir
            .or_else(|| env(ENV_DATA_DIR).map(PathBuf::from))
            .or_else(|| flags.data_dir.clone())
            .unwrap_or_else(|| DEFAULT_DATA_DIR.into()),
        provider,
        addr: file.addr.or_else(|| env(ENV_ADDR)).or_else(|| flags.addr.clone()).unwrap_or_else(|| DEFAULT_ADDR.into()),
        embeddings,
        engine: file.engine,
        remote,
    })
}
