//! Read-only vector space: cosine similarity, nearest neighbours and
//! additive seed queries.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::analyzer::{Normalizer, SuffixStripper};
use crate::embedding::{Matrix, WordVectors};

#[derive(Debug, Error, PartialEq)]
pub enum VsmError {
    #[error("similarity is undefined for a zero vector")]
    ZeroVector,
    #[error("vector has {found} dimensions, expected {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("word {0:?} has a zero vector")]
    ZeroRow(String),
    #[error("word {0:?} has a non-finite vector")]
    NonFinite(String),
    #[error("duplicate word {0:?}")]
    DuplicateWord(String),
    #[error("no query term is in the vocabulary (missing: {})", .missing.join(", "))]
    EmptyQuery { missing: Vec<String> },
    #[error("k must be at least 1")]
    InvalidK,
}

/// A word and its cosine similarity to some query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredTerm {
    pub word: String,
    #[serde(rename = "score")]
    pub similarity: f64,
}

/// Word vectors with every row also stored L2-normalized.
#[derive(Debug, Clone)]
pub struct VectorSpace {
    words: Vec<String>,
    index: HashMap<String, usize>,
    raw: Matrix,
    unit: Matrix,
    fingerprint: String,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

impl VectorSpace {
    /// Rejects zero rows, non-finite values and duplicate words.
    pub fn new(vectors: WordVectors) -> Result<Self, VsmError> {
        let WordVectors { words, vectors: raw } = vectors;
        let mut index = HashMap::with_capacity(words.len());
        let mut unit = Matrix::zeros(raw.rows(), raw.cols());
        let mut hasher = Sha256::new();
        hasher.update((raw.rows() as u64).to_le_bytes());
        hasher.update((raw.cols() as u64).to_le_bytes());
        for (i, word) in words.iter().enumerate() {
            if index.insert(word.clone(), i).is_some() {
                return Err(VsmError::DuplicateWord(word.clone()));
            }
            let row = raw.row(i);
            if row.iter().any(|x| !x.is_finite()) {
                return Err(VsmError::NonFinite(word.clone()));
            }
            let length = norm(row);
            if length == 0.0 {
                return Err(VsmError::ZeroRow(word.clone()));
            }
            for (u, x) in unit.row_mut(i).iter_mut().zip(row) {
                *u = x / length;
            }
            hasher.update(word.as_bytes());
            hasher.update([0]);
            for x in row {
                hasher.update(x.to_bits().to_le_bytes());
            }
        }
        let digest = hasher.finalize();
        let fingerprint = digest[..8].iter().map(|b| format!("{b:02x}")).collect();
        Ok(VectorSpace { words, index, raw, unit, fingerprint })
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn dims(&self) -> usize {
        self.raw.cols()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn word(&self, index: usize) -> &str {
        &self.words[index]
    }

    pub fn get(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    /// Looks a term up verbatim, then by its lowercased normalized form.
    pub fn resolve(&self, term: &str) -> Option<usize> {
        self.get(term).or_else(|| self.get(&SuffixStripper.normalize(&term.to_lowercase())))
    }

    pub fn raw_vector(&self, index: usize) -> &[f64] {
        self.raw.row(index)
    }

    pub fn unit_vector(&self, index: usize) -> &[f64] {
        self.unit.row(index)
    }

    /// Short hex digest of the words and raw values, used to tie generated
    /// categories to the embedding they came from.
    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    /// Cosine similarity of every word to `query`, in vocabulary order.
    pub fn similarities(&self, query: &[f64]) -> Result<Vec<f64>, VsmError> {
        if query.len() != self.dims() {
            return Err(VsmError::DimensionMismatch { expected: self.dims(), found: query.len() });
        }
        let length = norm(query);
        if length == 0.0 || !length.is_finite() {
            return Err(VsmError::ZeroVector);
        }
        Ok(self
            .unit
            .iter_rows()
            .map(|row| row.iter().zip(query).map(|(u, q)| u * q).sum::<f64>() / length)
            .collect())
    }
}

pub fn cosine(a: &[f64], b: &[f64]) -> Result<f64, VsmError> {
    if a.len() != b.len() {
        return Err(VsmError::DimensionMismatch { expected: a.len(), found: b.len() });
    }
    let (na, nb) = (norm(a), norm(b));
    if na == 0.0 || nb == 0.0 {
        return Err(VsmError::ZeroVector);
    }
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    Ok(dot / (na * nb))
}

/// How seed vectors are combined into a query.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QueryMode {
    /// Sum of unit-length vectors; every term has equal weight.
    #[default]
    Normalized,
    /// Sum of the vectors as stored.
    Raw,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Query {
    pub vector: Vec<f64>,
    /// Terms that contributed, in query order.
    pub resolved: Vec<String>,
    /// Terms not found in the vocabulary.
    pub missing: Vec<String>,
}

/// Sums the vectors of the category name and the seeds. A multiword name
/// contributes each of its words; terms outside the vocabulary are skipped
/// and reported in [`Query::missing`].
pub fn query_vector<S: AsRef<str>>(
    name: &str,
    seeds: &[S],
    space: &VectorSpace,
    mode: QueryMode,
) -> Result<Query, VsmError> {
    let terms = name.split_whitespace().chain(seeds.iter().map(AsRef::as_ref));
    let mut vector = vec![0.0; space.dims()];
    let mut resolved = Vec::new();
    let mut missing = Vec::new();
    for term in terms {
        match space.resolve(term) {
            Some(i) => {
                let v = match mode {
                    QueryMode::Normalized => space.unit_vector(i),
                    QueryMode::Raw => space.raw_vector(i),
                };
                for (acc, x) in vector.iter_mut().zip(v) {
                    *acc += x;
                }
                resolved.push(term.to_string());
            }
            None => missing.push(term.to_string()),
        }
    }
    if resolved.is_empty() {
        return Err(VsmError::EmptyQuery { missing });
    }
    Ok(Query { vector, resolved, missing })
}

/// Vocabulary indices with similarities, best first; ties go to the lower
/// index.
pub(crate) fn ranked(
    space: &VectorSpace,
    query: &[f64],
    k: usize,
    exclude: &HashSet<usize>,
) -> Result<Vec<(usize, f64)>, VsmError> {
    if k == 0 {
        return Err(VsmError::InvalidK);
    }
    let mut scored: Vec<(usize, f64)> = space
        .similarities(query)?
        .into_iter()
        .enumerate()
        .filter(|(i, _)| !exclude.contains(i))
        .collect();
    let order = |a: &(usize, f64), b: &(usize, f64)| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0));
    if k < scored.len() {
        scored.select_nth_unstable_by(k, order);
        scored.truncate(k);
    }
    scored.sort_unstable_by(order);
    Ok(scored)
}

/// The `k` words most similar to `query`, skipping `exclude`.
pub fn nearest<I, S>(space: &VectorSpace, query: &[f64], k: usize, exclude: I) -> Result<Vec<ScoredTerm>, VsmError>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let exclude: HashSet<usize> = exclude.into_iter().filter_map(|w| space.get(w.as_ref())).collect();
    Ok(ranked(space, query, k, &exclude)?
        .into_iter()
        .map(|(i, similarity)| ScoredTerm { word: space.word(i).to_string(), similarity })
        .collect())
}
