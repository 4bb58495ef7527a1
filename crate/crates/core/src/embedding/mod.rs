//! Skip-gram word embeddings trained with negative sampling.

mod io;
mod matrix;
mod pairs;
mod sgns;
mod train;
mod vocab;

use thiserror::Error;

pub use io::{load_embeddings, read_embeddings, save_embeddings, write_embeddings, WordVectors};
pub use matrix::Matrix;
pub use pairs::{generate_pairs, TrainingPair, Window};
pub use sgns::{sgns_gradients, sgns_loss, sgns_step, SgnsGradients, SgnsModel};
pub use train::{train, TrainedModel};
pub use vocab::{build_vocabulary, VocabEntry, Vocabulary};

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("vocabulary is empty after filtering")]
    EmptyVocabulary,
    #[error("invalid training configuration: {0}")]
    InvalidConfig(String),
    #[error("training diverged: non-finite loss {loss}")]
    Divergence { loss: f64 },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: duplicate word {word:?}")]
    DuplicateWord { line: usize, word: String },
    #[error("word {0:?} cannot be written to an embedding file")]
    UnwritableWord(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Whether the context window has a fixed radius or a radius drawn per
/// center word.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowMode {
    #[default]
    Dynamic,
    Fixed,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TrainingConfig {
    pub dims: usize,
    /// Maximum context radius.
    pub window: usize,
    pub window_mode: WindowMode,
    pub min_count: u64,
    pub negative_samples: usize,
    pub epochs: usize,
    /// Initial learning rate, decayed linearly to near zero over training.
    pub learning_rate: f64,
    /// Frequent-word subsampling threshold `t`; `None` disables subsampling.
    pub downsample_threshold: Option<f64>,
    /// Words with `ln(count / total) > stopword_logprob` are dropped from
    /// the vocabulary; `None` disables the rule.
    pub stopword_logprob: Option<f64>,
    pub rng_seed: u64,
    /// Worker threads. With more than one thread updates race and results
    /// are no longer reproducible.
    pub threads: usize,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            dims: 150,
            window: 5,
            window_mode: WindowMode::Dynamic,
            min_count: 30,
            negative_samples: 5,
            epochs: 5,
            learning_rate: 0.025,
            downsample_threshold: Some(1e-5),
            stopword_logprob: Some(-8.0),
            rng_seed: 1,
            threads: 1,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<(), EmbeddingError> {
        let invalid = |msg: &str| Err(EmbeddingError::InvalidConfig(msg.to_string()));
        if self.dims == 0 {
            return invalid("dims must be at least 1");
        }
        if self.window == 0 {
            return invalid("window must be at least 1");
        }
        if self.negative_samples == 0 {
            return invalid("negative_samples must be at least 1");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return invalid("learning_rate must be positive");
        }
        if let Some(t) = self.downsample_threshold {
            if !(t > 0.0 && t.is_finite()) {
                return invalid("downsample_threshold must be positive");
            }
        }
        if self.threads == 0 {
            return invalid("threads must be at least 1");
        }
        Ok(())
    }

    pub(crate) fn window(&self) -> Window {
        match self.window_mode {
            WindowMode::Dynamic => Window::Dynamic(self.window),
            WindowMode::Fixed => Window::Fixed(self.window),
        }
    }
}
