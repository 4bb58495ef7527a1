//! Tokenization, normalization and category term counting.

mod normalize;
pub mod table;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

pub use normalize::{Identity, Normalizer, SuffixStripper};

use crate::lexicon::Category;

/// A token with its position in the source text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    pub normalized: String,
    /// Byte offset of the first byte of the token.
    pub start: usize,
    /// Byte offset one past the last byte of the token.
    pub end: usize,
}

pub type TokenStream = Vec<Token>;

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric()
}

fn is_joiner(c: char) -> bool {
    matches!(c, '-' | '\'' | '\u{2019}')
}

/// Tokenizes with the default [`SuffixStripper`] normalizer.
pub fn tokenize(text: &str) -> TokenStream {
    tokenize_with(text, &SuffixStripper)
}

/// Splits `text` on non-word characters, keeping hyphens and apostrophes
/// that sit between two word characters, then lowercases and normalizes.
pub fn tokenize_with(text: &str, normalizer: &dyn Normalizer) -> TokenStream {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        if !is_word_char(chars[i].1) {
            i += 1;
            continue;
        }
        let begin = i;
        let mut j = i + 1;
        loop {
            if j < chars.len() && is_word_char(chars[j].1) {
                j += 1;
            } else if j + 1 < chars.len() && is_joiner(chars[j].1) && is_word_char(chars[j + 1].1) {
                j += 2;
            } else {
                break;
            }
        }
        let start = chars[begin].0;
        let end = chars.get(j).map_or(text.len(), |&(offset, _)| offset);
        let surface = &text[start..end];
        tokens.push(Token {
            surface: surface.to_string(),
            normalized: normalizer.normalize(&surface.to_lowercase()),
            start,
            end,
        });
        i = j;
    }
    tokens
}

/// Normalized tokens only, for feeding the embedding trainer.
pub fn normalized_tokens(text: &str) -> Vec<String> {
    tokenize(text).into_iter().map(|t| t.normalized).collect()
}

/// Lookup from normalized word to the categories containing it.
pub struct CategoryMatcher {
    names: Vec<String>,
    index: HashMap<String, Vec<usize>>,
    normalizer: Box<dyn Normalizer>,
}

impl std::fmt::Debug for CategoryMatcher {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CategoryMatcher")
            .field("names", &self.names)
            .field("words", &self.index.len())
            .finish()
    }
}

impl CategoryMatcher {
    pub fn new(categories: &[Category]) -> Self {
        Self::from_word_lists(
            categories
                .iter()
                .map(|c| (c.spec.name.clone(), c.members.iter().map(|m| m.word.clone()).collect())),
        )
    }

    pub fn from_word_lists<I>(lists: I) -> Self
    where
        I: IntoIterator<Item = (String, Vec<String>)>,
    {
        Self::with_normalizer(lists, Box::new(SuffixStripper))
    }

    pub fn with_normalizer<I>(lists: I, normalizer: Box<dyn Normalizer>) -> Self
    where
        I: IntoIterator<Item = (String, Vec<String>)>,
    {
        let mut names = Vec::new();
        let mut index: HashMap<String, Vec<usize>> = HashMap::new();
        for (category, (name, words)) in lists.into_iter().enumerate() {
            names.push(name);
            for word in words {
                let key = normalizer.normalize(&word.to_lowercase());
                let slots = index.entry(key).or_default();
                if slots.last() != Some(&category) {
                    slots.push(category);
                }
            }
        }
        CategoryMatcher { names, index, normalizer }
    }

    pub fn category_names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    fn categories_of(&self, normalized: &str) -> &[usize] {
        self.index.get(normalized).map_or(&[], Vec::as_slice)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryCount {
    pub category: String,
    pub raw: u64,
    pub normalized: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Match {
    pub category: String,
    pub token_index: usize,
    pub start: usize,
    pub end: usize,
}

/// Per-document category counts. `per_category` follows the matcher's
/// category order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisResult {
    pub per_category: Vec<CategoryCount>,
    pub total_tokens: u64,
    pub matches: Vec<Match>,
}

impl AnalysisResult {
    pub fn count(&self, category: &str) -> Option<&CategoryCount> {
        self.per_category.iter().find(|c| c.category == category)
    }
}

/// Counts category terms in a document. A token matches a category when
/// its normalized form equals the normalized form of a member word; a token
/// in several categories counts once for each.
pub fn analyze(document: &str, matcher: &CategoryMatcher) -> AnalysisResult {
    let tokens = tokenize_with(document, matcher.normalizer.as_ref());
    let mut raw = vec![0u64; matcher.len()];
    let mut matches = Vec::new();
    for (token_index, token) in tokens.iter().enumerate() {
        for &category in matcher.categories_of(&token.normalized) {
            raw[category] += 1;
            matches.push(Match {
                category: matcher.names[category].clone(),
                token_index,
                start: token.start,
                end: token.end,
            });
        }
    }
    let total_tokens = tokens.len() as u64;
    let per_category = matcher
        .names
        .iter()
        .zip(raw)
        .map(|(name, raw)| CategoryCount {
            category: name.clone(),
            raw,
            normalized: if total_tokens == 0 { 0.0 } else { raw as f64 / total_tokens as f64 },
        })
        .collect();
    AnalysisResult { per_category, total_tokens, matches }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub id: String,
    pub text: String,
}

/// A document that could not be read; analysis of the corpus continues.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DocumentError {
    pub id: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DocumentOutcome {
    Analyzed { id: String, result: AnalysisResult },
    Failed(DocumentError),
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CorpusTotals {
    pub documents: u64,
    pub failed: u64,
    pub total_tokens: u64,
    /// Raw counts summed over documents, in matcher order.
    pub raw: Vec<(String, u64)>,
}

/// Streaming corpus analysis. Each document is analyzed as it is pulled and
/// only the running totals are retained.
pub struct CorpusAnalysis<'m, I> {
    documents: I,
    matcher: &'m CategoryMatcher,
    totals: CorpusTotals,
}

pub fn analyze_corpus<I>(documents: I, matcher: &CategoryMatcher) -> CorpusAnalysis<'_, I::IntoIter>
where
    I: IntoIterator<Item = Result<Document, DocumentError>>,
{
    CorpusAnalysis {
        documents: documents.into_iter(),
        matcher,
        totals: CorpusTotals {
            raw: matcher.names.iter().map(|n| (n.clone(), 0)).collect(),
            ..CorpusTotals::default()
        },
    }
}

impl<I> CorpusAnalysis<'_, I> {
    pub fn totals(&self) -> &CorpusTotals {
        &self.totals
    }

    pub fn into_totals(self) -> CorpusTotals {
        self.totals
    }
}

impl<I> Iterator for CorpusAnalysis<'_, I>
where
    I: Iterator<Item = Result<Document, DocumentError>>,
{
    type Item = DocumentOutcome;

    fn next(&mut self) -> Option<DocumentOutcome> {
        Some(match self.documents.next()? {
            Ok(doc) => {
                let result = analyze(&doc.text, self.matcher);
                self.totals.documents += 1;
                self.totals.total_tokens += result.total_tokens;
                for (slot, count) in self.totals.raw.iter_mut().zip(&result.per_category) {
                    slot.1 += count.raw;
                }
                DocumentOutcome::Analyzed { id: doc.id, result }
            }
            Err(err) => {
                self.totals.failed += 1;
                DocumentOutcome::Failed(err)
            }
        })
    }
}
