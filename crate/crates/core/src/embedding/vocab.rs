use std::collections::HashMap;

use super::{EmbeddingError, TrainingConfig};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VocabEntry {
    pub word: String,
    pub count: u64,
}

/// Word to dense index map with corpus counts.
///
/// Entries are ordered by descending count, ties by word, so the layout
/// depends only on the multiset of corpus tokens and not on their order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    entries: Vec<VocabEntry>,
    index: HashMap<String, usize>,
    total_tokens: u64,
}

impl Vocabulary {
    pub fn from_entries(entries: Vec<VocabEntry>, total_tokens: u64) -> Self {
        let index = entries.iter().enumerate().map(|(i, e)| (e.word.clone(), i)).collect();
        Vocabulary { entries, index, total_tokens }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn word(&self, index: usize) -> &str {
        &self.entries[index].word
    }

    pub fn count(&self, index: usize) -> u64 {
        self.entries[index].count
    }

    pub fn entries(&self) -> &[VocabEntry] {
        &self.entries
    }

    /// All corpus tokens seen while building, including filtered ones.
    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.word.as_str())
    }

    /// Probability of keeping an occurrence of word `index` under
    /// frequent-word subsampling with threshold `t`: `min(1, sqrt(t / f))`
    /// where `f` is the word's relative frequency.
    pub fn keep_probability(&self, index: usize, t: f64) -> f64 {
        let f = self.count(index) as f64 / self.total_tokens as f64;
        (t / f).sqrt().min(1.0)
    }
}

/// Counts tokens and keeps those with `count >= min_count` that are not
/// stopwords under the configured log-probability rule.
pub fn build_vocabulary<I, S>(tokens: I, config: &TrainingConfig) -> Result<Vocabulary, EmbeddingError>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut counts: HashMap<String, u64> = HashMap::new();
    let mut total = 0u64;
    for token in tokens {
        total += 1;
        let token = token.as_ref();
        match counts.get_mut(token) {
            Some(c) => *c += 1,
            None => {
                counts.insert(token.to_string(), 1);
            }
        }
    }
    if total == 0 {
        return Err(EmbeddingError::EmptyVocabulary);
    }
    let mut entries: Vec<VocabEntry> = counts
        .into_iter()
        .filter(|(_, count)| *count >= config.min_count)
        .filter(|(_, count)| match config.stopword_logprob {
            Some(limit) => (*count as f64 / total as f64).ln() <= limit,
            None => true,
        })
        .map(|(word, count)| VocabEntry { word, count })
        .collect();
    if entries.is_empty() {
        return Err(EmbeddingError::EmptyVocabulary);
    }
    entries.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.word.cmp(&b.word)));
    Ok(Vocabulary::from_entries(entries, total))
}
