//! Seed-driven lexicon generation and text analytics.
//!
//! The pipeline is:
//!
//! 1. [`analyzer::tokenize`] a corpus and train skip-gram embeddings with
//!    [`embedding::train`].
//! 2. Wrap the word vectors in a [`vsm::VectorSpace`] and expand seed terms
//!    into a [`lexicon::Category`] with [`lexicon::generate`].
//! 3. Optionally filter category members through crowd labels
//!    ([`crowd::chunk_tasks`], [`crowd::aggregate`],
//!    [`lexicon::apply_crowd_filter`]).
//! 4. Count category terms in documents with [`analyzer::analyze`] and
//!    compare document groups or tools with the [`stats`] module.

pub mod analyzer;
pub mod crowd;
pub mod embedding;
pub mod lexicon;
pub mod stats;
pub mod vsm;

pub use analyzer::{analyze, tokenize, AnalysisResult, CategoryMatcher, TokenStream};
pub use crowd::{aggregate, chunk_tasks, estimate_cost, AggregationReport, LabelScale, LabelTask, Verdict, WorkerResponse};
pub use embedding::{build_vocabulary, train, TrainingConfig, Vocabulary, WordVectors};
pub use stats::{agreement, anova_oneway, bonferroni, odds_ratio, pearson, AgreementReport, ComparisonRow, GroupSummary};
pub use lexicon::{apply_crowd_filter, generate, permute_seeds, Category, CategorySpec, CategoryStatus};
pub use vsm::{cosine, nearest, query_vector, ScoredTerm, VectorSpace};
