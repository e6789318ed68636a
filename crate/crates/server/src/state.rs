use std::path::PathBuf;
use std::sync::{Arc, RwLock};

use curatr_core::{
    build_index, ingest_corpus, load_model, save_model, train_cbow, Corpus, EmbeddingModel,
    InvertedIndex, Store, TrainingConfig,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::ApiError;

#[derive(Debug, Clone)]
pub struct ServeConfig {
    pub host: String,
    pub port: u16,
    pub corpus_dir: PathBuf,
    pub model_path: PathBuf,
    pub state_dir: PathBuf,
    /// Train (and save to `model_path`) when the model file does not exist.
    pub train_if_missing: bool,
    pub training: TrainingConfig,
    /// Enables `POST /api/admin/reload`.
    pub allow_admin: bool,
    /// Directory with the browser client, served at `/`.
    pub static_dir: Option<PathBuf>,
}

impl Default for ServeConfig {
    fn default() -> Self {
        ServeConfig {
            host: "127.0.0.1".into(),
            port: 8080,
            corpus_dir: PathBuf::from("corpus"),
            model_path: PathBuf::from("model.txt"),
            state_dir: PathBuf::from("state"),
            train_if_missing: false,
            training: TrainingConfig::default(),
            allow_admin: false,
            static_dir: None,
        }
    }
}

/// Everything read-only the handlers need, swapped as a unit on reload.
pub struct Engine {
    pub corpus: Corpus,
    pub index: InvertedIndex,
    pub model: EmbeddingModel,
    pub model_ref: String,
}

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case", tag = "state", content = "detail")]
pub enum ComponentStatus {
    Pending,
    Loading,
    Ready(String),
    Failed(String),
}

#[derive(Debug, Clone, Serialize)]
pub struct Components {
    pub corpus: ComponentStatus,
    pub index: ComponentStatus,
    pub model: ComponentStatus,
}

pub struct AppState {
    pub config: ServeConfig,
    pub store: Store,
    engine: RwLock<Option<Arc<Engine>>>,
    components: RwLock<Components>,
}

impl AppState {
    pub fn new(config: ServeConfig, store: Store) -> Arc<Self> {
        Arc::new(AppState {
            config,
            store,
            engine: RwLock::new(None),
            components: RwLock::new(Components {
                corpus: ComponentStatus::Pending,
                index: ComponentStatus::Pending,
                model: ComponentStatus::Pending,
            }),
        })
    }

    /// A state that is ready immediately, for embedding and tests.
    pub fn with_engine(config: ServeConfig, store: Store, engine: Engine) -> Arc<Self> {
        let state = Self::new(config, store);
        state.install(engine);
        state
    }

    pub fn components(&self) -> Components {
        self.components.read().unwrap().clone()
    }

    pub fn components_json(&self) -> Value {
        json!(self.components())
    }

    fn set(&self, f: impl FnOnce(&mut Components)) {
        f(&mut self.components.write().unwrap());
    }

    pub fn engine(&self) -> Result<Arc<Engine>, ApiError> {
        self.engine
            .read()
            .unwrap()
            .clone()
            .ok_or_else(|| ApiError::not_ready(self.components_json()))
    }

    pub fn is_ready(&self) -> bool {
        self.engine.read().unwrap().is_some()
    }

    pub fn install(&self, engine: Engine) {
        let summary = (
            format!("{} documents", engine.corpus.len()),
            format!("{} unigrams", engine.index.unigrams().count()),
            format!(
                "{} terms x {}",
                engine.model.len(),
                engine.model.dimension()
            ),
        );
        *self.engine.write().unwrap() = Some(Arc::new(engine));
        self.set(|c| {
            c.corpus = ComponentStatus::Ready(summary.0);
            c.index = ComponentStatus::Ready(summary.1);
            c.model = ComponentStatus::Ready(summary.2);
        });
    }

    /// Ingests, indexes and loads (or trains) the model, reporting progress through
    /// the component statuses. The live engine, if any, keeps serving until the new
    /// one is installed.
    pub fn load(&self) -> anyhow::Result<()> {
        let cfg = &self.config;
        self.set(|c| c.corpus = ComponentStatus::Loading);
        let ingest = match ingest_corpus(&cfg.corpus_dir) {
            Ok(i) => i,
            Err(e) => {
                self.set(|c| c.corpus = ComponentStatus::Failed(e.to_string()));
                return Err(e.into());
            }
        };
        for issue in &ingest.issues {
            tracing::warn!("ingest: {issue}");
        }
        let corpus = ingest.corpus;
        self.set(|c| {
            c.corpus = ComponentStatus::Ready(format!("{} documents", corpus.len()));
            c.index = ComponentStatus::Loading;
        });
        let index = build_index(&corpus);
        self.set(|c| {
            c.index = ComponentStatus::Ready(format!("{} unigrams", index.unigrams().count()));
            c.model = ComponentStatus::Loading;
        });

        let model = if cfg.model_path.exists() {
            load_model(&cfg.model_path)
        } else if cfg.train_if_missing {
            train_cbow(&corpus, &cfg.training).and_then(|m| {
                save_model(&m, &cfg.model_path)?;
                Ok(m)
            })
        } else {
            Err(curatr_core::Error::NotFound {
                kind: "model",
                name: cfg.model_path.display().to_string(),
            })
        };
        let model = match model {
            Ok(m) => m,
            Err(e) => {
                self.set(|c| c.model = ComponentStatus::Failed(e.to_string()));
                return Err(e.into());
            }
        };
        let model_ref = model_ref_for(&cfg.model_path);
        self.install(Engine {
            corpus,
            index,
            model,
            model_ref,
        });
        Ok(())
    }
}

pub fn model_ref_for(path: &std::path::Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}
