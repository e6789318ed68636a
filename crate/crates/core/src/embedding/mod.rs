//! CBOW word2vec embeddings with negative sampling, plus cosine top-k similarity.

mod io;
mod similarity;
mod train;
mod vocab;

use serde::{Deserialize, Serialize};

pub use io::{load_model, read_model, save_model, write_model};
pub use similarity::{cosine_similarity, most_similar};
pub use train::train_cbow;
pub use vocab::{build_vocabulary, Vocabulary};

use crate::error::{Error, Result};

/// Hyper-parameters for [`train_cbow`]. Every field is written into the saved model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingConfig {
    pub dimension: usize,
    /// Context radius, in vocabulary tokens on each side of the center word.
    pub window: usize,
    pub min_count: u64,
    /// Noise words drawn per center word; 0 disables the negative term.
    pub negative_samples: usize,
    pub epochs: usize,
    pub initial_learning_rate: f64,
    /// Frequent-word subsampling threshold; 0 turns subsampling off.
    pub subsample: f64,
    pub seed: u64,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            dimension: 100,
            window: 5,
            min_count: 5,
            negative_samples: 5,
            epochs: 5,
            initial_learning_rate: 0.025,
            subsample: 0.0,
            seed: 1,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |what: &str| Err(Error::validation(format!("training config: {what}")));
        if self.dimension == 0 {
            return fail("dimension must be at least 1");
        }
        if self.window == 0 {
            return fail("window must be at least 1");
        }
        if self.min_count == 0 {
            return fail("min_count must be at least 1");
        }
        if self.epochs == 0 {
            return fail("epochs must be at least 1");
        }
        if !(self.initial_learning_rate.is_finite() && self.initial_learning_rate > 0.0) {
            return fail("initial_learning_rate must be a positive number");
        }
        if !(self.subsample.is_finite() && self.subsample >= 0.0) {
            return fail("subsample must be a non-negative number");
        }
        Ok(())
    }
}

/// Trained word vectors. Rows are indexed by vocabulary id.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingModel {
    vocabulary: Vocabulary,
    vectors: Vec<f32>,
    norms: Vec<f64>,
    config: TrainingConfig,
}

impl EmbeddingModel {
    /// Assembles a model from a vocabulary and a row-major `len × config.dimension` matrix.
    pub fn new(vocabulary: Vocabulary, vectors: Vec<f32>, config: TrainingConfig) -> Result<Self> {
        let dim = config.dimension;
        if dim == 0 {
            return Err(Error::validation("model dimension must be at least 1"));
        }
        if vectors.len() != vocabulary.len() * dim {
            return Err(Error::validation(format!(
                "expected {} x {} vector components, got {}",
                vocabulary.len(),
                dim,
                vectors.len()
            )));
        }
        if let Some(pos) = vectors.iter().position(|v| !v.is_finite()) {
            return Err(Error::validation(format!(
                "non-finite component in vector of '{}'",
                vocabulary.term(pos / dim)
            )));
        }
        let norms = vectors.chunks_exact(dim).map(similarity::norm).collect();
        Ok(EmbeddingModel {
            vocabulary,
            vectors,
            norms,
            config,
        })
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocabulary
    }

    pub fn config(&self) -> &TrainingConfig {
        &self.config
    }

    pub fn dimension(&self) -> usize {
        self.config.dimension
    }

    pub fn len(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vocabulary.is_empty()
    }

    pub fn vector_by_id(&self, id: usize) -> &[f32] {
        let d = self.dimension();
        &self.vectors[id * d..(id + 1) * d]
    }

    pub fn vector(&self, term: &str) -> Option<&[f32]> {
        self.vocabulary.id(term).map(|id| self.vector_by_id(id))
    }

    pub fn contains(&self, term: &str) -> bool {
        self.vocabulary.id(term).is_some()
    }

    pub(crate) fn norm_by_id(&self, id: usize) -> f64 {
        self.norms[id]
    }
}

/// One recommendation row: a vocabulary term and its cosine to the query vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityResult {
    pub term: String,
    pub score: f64,
}
