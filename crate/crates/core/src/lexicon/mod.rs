//! Categories generated from seed terms, their crowd filtering and seed
//! permutations.

mod catalog;
mod file;

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use catalog::{CatalogEntry, CatalogSource, SeedCatalog};
pub use file::{load_category, load_category_dir, read_category, save_category, write_category, SCHEMA_VERSION};

use crate::analyzer::{Normalizer, SuffixStripper};
use crate::crowd::Verdict;
use crate::vsm::{self, QueryMode, ScoredTerm, VectorSpace, VsmError};

pub const DEFAULT_THRESHOLD: f64 = 0.5;
pub const DEFAULT_MAX_TERMS: usize = 200;
const MAX_SEEDS: usize = 8;

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("invalid category spec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Query(#[from] VsmError),
    #[error("verdict for {0:?}, which is not a member of the category")]
    UnknownWord(String),
    #[error("drop-one needs at least two seeds")]
    TooFewSeeds,
    #[error("seed {0:?} is not in the seed list")]
    SeedNotFound(String),
    #[error("{field}: {message}")]
    Schema { field: String, message: String },
    #[error("catalog line {line}: {message}")]
    Catalog { line: usize, message: String },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn default_threshold() -> f64 {
    DEFAULT_THRESHOLD
}

fn default_max_terms() -> usize {
    DEFAULT_MAX_TERMS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategorySpec {
    pub name: String,
    pub seeds: Vec<String>,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default = "default_max_terms")]
    pub max_terms: usize,
}

impl CategorySpec {
    pub fn new<S: Into<String>>(name: impl Into<String>, seeds: impl IntoIterator<Item = S>) -> Self {
        CategorySpec {
            name: name.into(),
            seeds: seeds.into_iter().map(Into::into).collect(),
            threshold: DEFAULT_THRESHOLD,
            max_terms: DEFAULT_MAX_TERMS,
        }
    }

    pub fn with_threshold(mut self, threshold: f64) -> Self {
        self.threshold = threshold;
        self
    }

    pub fn with_max_terms(mut self, max_terms: usize) -> Self {
        self.max_terms = max_terms;
        self
    }

    pub fn validate(&self) -> Result<(), LexiconError> {
        let invalid = |m: String| Err(LexiconError::InvalidSpec(m));
        if self.name.trim().is_empty() {
            return invalid("name is empty".into());
        }
        if self.seeds.is_empty() || self.seeds.len() > MAX_SEEDS {
            return invalid(format!("{} seeds given, expected 1 to {MAX_SEEDS}", self.seeds.len()));
        }
        if let Some(i) = self.seeds.iter().position(|s| s.trim().is_empty()) {
            return invalid(format!("seed {i} is empty"));
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return invalid(format!("threshold {} is outside (0, 1)", self.threshold));
        }
        if self.max_terms == 0 {
            return invalid("max_terms must be at least 1".into());
        }
        if !(2..=5).contains(&self.seeds.len()) {
            log::warn!("category {:?} has {} seeds; 2 to 5 usually works best", self.name, self.seeds.len());
        }
        Ok(())
    }

    /// True when `word` is one of the seeds, verbatim or after normalization.
    pub fn is_seed(&self, word: &str) -> bool {
        self.seeds
            .iter()
            .any(|s| s == word || SuffixStripper.normalize(&s.to_lowercase()) == word)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CategoryStatus {
    Unvalidated,
    CrowdFiltered,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    /// RFC 3339 UTC timestamp.
    pub generated_at: String,
    pub embedding_fingerprint: String,
    #[serde(default)]
    pub query_mode: QueryMode,
}

/// A generated word list with its similarity scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Category {
    #[serde(flatten)]
    pub spec: CategorySpec,
    pub status: CategoryStatus,
    /// Incremented by the category store on every write.
    #[serde(default = "first_version")]
    pub version: u64,
    /// Sorted by similarity, descending.
    pub members: Vec<ScoredTerm>,
    /// Members dropped by crowd filtering, in their original order.
    #[serde(default)]
    pub removed: Vec<ScoredTerm>,
    pub provenance: Provenance,
}

fn first_version() -> u64 {
    1
}

impl Category {
    pub fn name(&self) -> &str {
        &self.spec.name
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.members.iter().map(|m| m.word.as_str())
    }

    pub fn contains(&self, word: &str) -> bool {
        self.members.iter().any(|m| m.word == word)
    }
}

/// Generation timestamp. Honors `SOURCE_DATE_EPOCH` so that outputs can be
/// reproduced byte for byte.
pub fn timestamp_now() -> String {
    let now = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.trim().parse::<i64>().ok())
        .and_then(|secs| chrono::DateTime::from_timestamp(secs, 0))
        .unwrap_or_else(chrono::Utc::now);
    now.to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

pub fn generate(spec: &CategorySpec, space: &VectorSpace) -> Result<Category, LexiconError> {
    generate_with(spec, space, QueryMode::Normalized)
}

/// Expands a spec into a category.
///
/// Members are the words whose similarity to the query vector is at least
/// `threshold`, plus every seed found in the vocabulary regardless of its
/// score. The `max_terms` cap counts seeds; seeds are kept first and the
/// remaining slots go to the most similar other words.
pub fn generate_with(spec: &CategorySpec, space: &VectorSpace, mode: QueryMode) -> Result<Category, LexiconError> {
    spec.validate()?;
    let query = vsm::query_vector(&spec.name, &spec.seeds, space, mode)?;
    let ranked = vsm::ranked(space, &query.vector, space.len(), &HashSet::new())?;

    let mut seed_indices: HashSet<usize> = spec.seeds.iter().filter_map(|s| space.resolve(s)).collect();
    if seed_indices.len() > spec.max_terms {
        // keep the best-ranked seeds
        let best: HashSet<usize> = ranked
            .iter()
            .filter(|(i, _)| seed_indices.contains(i))
            .take(spec.max_terms)
            .map(|&(i, _)| i)
            .collect();
        seed_indices = best;
    }
    let mut open_slots = spec.max_terms - seed_indices.len();
    let members = ranked
        .into_iter()
        .filter(|&(i, similarity)| {
            if seed_indices.contains(&i) {
                true
            } else if open_slots > 0 && similarity >= spec.threshold {
                open_slots -= 1;
                true
            } else {
                false
            }
        })
        .map(|(i, similarity)| ScoredTerm { word: space.word(i).to_string(), similarity })
        .collect();

    Ok(Category {
        spec: spec.clone(),
        status: CategoryStatus::Unvalidated,
        version: 1,
        members,
        removed: Vec::new(),
        provenance: Provenance {
            generated_at: timestamp_now(),
            embedding_fingerprint: space.fingerprint().to_string(),
            query_mode: mode,
        },
    })
}

/// Drops members with a [`Verdict::Remove`] verdict, keeping order, and
/// marks the category crowd-filtered. Unjudged members stay. Verdicts may
/// also name words removed by an earlier filter; those stay removed.
pub fn apply_crowd_filter(category: &Category, verdicts: &BTreeMap<String, Verdict>) -> Result<Category, LexiconError> {
    for word in verdicts.keys() {
        if !category.contains(word) && !category.removed.iter().any(|r| &r.word == word) {
            return Err(LexiconError::UnknownWord(word.clone()));
        }
    }
    let mut filtered = category.clone();
    let (kept, dropped): (Vec<_>, Vec<_>) = category
        .members
        .iter()
        .cloned()
        .partition(|m| verdicts.get(&m.word) != Some(&Verdict::Remove));
    filtered.members = kept;
    filtered.removed.extend(dropped);
    filtered.status = CategoryStatus::CrowdFiltered;
    Ok(filtered)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PermuteMode {
    /// One variant per seed, each missing that seed.
    DropOne,
    /// One variant with `from` replaced by `to`.
    Substitute { from: String, to: String },
}

pub fn permute_seeds(spec: &CategorySpec, mode: &PermuteMode) -> Result<Vec<CategorySpec>, LexiconError> {
    match mode {
        PermuteMode::DropOne => {
            if spec.seeds.len() < 2 {
                return Err(LexiconError::TooFewSeeds);
            }
            Ok((0..spec.seeds.len())
                .map(|skip| CategorySpec {
                    seeds: spec
                        .seeds
                        .iter()
                        .enumerate()
                        .filter(|&(i, _)| i != skip)
                        .map(|(_, s)| s.clone())
                        .collect(),
                    ..spec.clone()
                })
                .collect())
        }
        PermuteMode::Substitute { from, to } => {
            let position = spec
                .seeds
                .iter()
                .position(|s| s == from)
                .ok_or_else(|| LexiconError::SeedNotFound(from.clone()))?;
            let mut variant = spec.clone();
            variant.seeds[position] = to.clone();
            Ok(vec![variant])
        }
    }
}
