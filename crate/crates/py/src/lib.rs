//! Python bindings. Errors from the core library surface as
//! `seedlex.SeedlexError`, a `ValueError` subclass.

use std::collections::BTreeMap;

use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;
use rust_decimal::Decimal;

use seedlex_core::analyzer::{self, CategoryMatcher};
use seedlex_core::crowd::{self, AggregateOptions, LabelScale, LabelTask, Verdict, WorkerResponse};
use seedlex_core::embedding::{self, TrainingConfig, WindowMode};
use seedlex_core::lexicon::{self, CategorySpec, CategoryStatus, PermuteMode, SeedCatalog};
use seedlex_core::stats::{self, GroupSummary, SignificanceTest};
use seedlex_core::vsm::{self, QueryMode, VectorSpace};

create_exception!(seedlex, SeedlexError, PyValueError);

fn err(e: impl std::fmt::Display) -> PyErr {
    SeedlexError::new_err(e.to_string())
}

/// Word vectors with unit-length rows for similarity queries.
#[pyclass(module = "seedlex", frozen)]
struct Embeddings {
    space: VectorSpace,
}

#[pymethods]
impl Embeddings {
    /// Reads a text embedding file (header `n dims`, then `word v1 v2 ...`).
    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        let vectors = embedding::load_embeddings(path).map_err(err)?;
        Ok(Embeddings { space: VectorSpace::new(vectors).map_err(err)? })
    }

    #[getter]
    fn dims(&self) -> usize {
        self.space.dims()
    }

    #[getter]
    fn words(&self) -> Vec<String> {
        self.space.words().to_vec()
    }

    #[getter]
    fn fingerprint(&self) -> &str {
        self.space.fingerprint()
    }

    fn __len__(&self) -> usize {
        self.space.len()
    }

    fn __contains__(&self, word: &str) -> bool {
        self.space.resolve(word).is_some()
    }

    fn __repr__(&self) -> String {
        format!("Embeddings(words={}, dims={})", self.space.len(), self.space.dims())
    }

    /// The stored (not normalized) vector of a word.
    fn vector(&self, word: &str) -> PyResult<Vec<f64>> {
        let i = self.space.resolve(word).ok_or_else(|| err(format!("{word:?} is not in the vocabulary")))?;
        Ok(self.space.raw_vector(i).to_vec())
    }

    fn similarity(&self, a: &str, b: &str) -> PyResult<f64> {
        let lookup = |w: &str| self.space.resolve(w).ok_or_else(|| err(format!("{w:?} is not in the vocabulary")));
        let (i, j) = (lookup(a)?, lookup(b)?);
        vsm::cosine(self.space.unit_vector(i), self.space.unit_vector(j)).map_err(err)
    }

    /// The `k` words closest to the sum of `words`, as `(word, score)`.
    #[pyo3(signature = (words, k = 10))]
    fn nearest(&self, words: Vec<String>, k: usize) -> PyResult<Vec<(String, f64)>> {
        let query = vsm::query_vector("", &words, &self.space, QueryMode::Normalized).map_err(err)?;
        let found = vsm::nearest(&self.space, &query.vector, k, &query.resolved).map_err(err)?;
        Ok(found.into_iter().map(|t| (t.word, t.similarity)).collect())
    }

    /// Expands seed words into a category.
    #[pyo3(signature = (name, seeds, threshold = lexicon::DEFAULT_THRESHOLD, max_terms = lexicon::DEFAULT_MAX_TERMS, raw_query = false))]
    fn generate(&self, name: &str, seeds: Vec<String>, threshold: f64, max_terms: usize, raw_query: bool) -> PyResult<Category> {
        let spec = CategorySpec::new(name, seeds).with_threshold(threshold).with_max_terms(max_terms);
        let mode = if raw_query { QueryMode::Raw } else { QueryMode::Normalized };
        Ok(Category { inner: lexicon::generate_with(&spec, &self.space, mode).map_err(err)? })
    }
}

/// Trains skip-gram embeddings on tokenized sentences.
#[pyfunction]
#[pyo3(signature = (
    sentences, dims = 150, window = 5, min_count = 30, negative = 5, epochs = 5,
    learning_rate = 0.025, downsample = Some(1e-5), stopword_logprob = Some(-8.0),
    seed = 1, threads = 1, fixed_window = false, save_to = None,
))]
#[allow(clippy::too_many_arguments)]
fn train(
    py: Python<'_>,
    sentences: Vec<Vec<String>>,
    dims: usize,
    window: usize,
    min_count: u64,
    negative: usize,
    epochs: usize,
    learning_rate: f64,
    downsample: Option<f64>,
    stopword_logprob: Option<f64>,
    seed: u64,
    threads: usize,
    fixed_window: bool,
    save_to: Option<String>,
) -> PyResult<(Embeddings, Vec<f64>)> {
    let config = TrainingConfig {
        dims,
        window,
        window_mode: if fixed_window { WindowMode::Fixed } else { WindowMode::Dynamic },
        min_count,
        negative_samples: negative,
        epochs,
        learning_rate,
        downsample_threshold: downsample,
        stopword_logprob,
        rng_seed: seed,
        threads,
    };
    let trained = py.detach(|| embedding::train(&sentences, &config)).map_err(err)?;
    let vectors = trained.word_vectors();
    if let Some(path) = save_to {
        embedding::save_embeddings(&vectors, path).map_err(err)?;
    }
    let space = VectorSpace::new(vectors).map_err(err)?;
    Ok((Embeddings { space }, trained.epoch_losses))
}

/// A generated category and its members, best first.
#[pyclass(module = "seedlex", from_py_object)]
#[derive(Clone)]
struct Category {
    inner: lexicon::Category,
}

#[pymethods]
impl Category {
    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(Category { inner: lexicon::load_category(path).map_err(err)? })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Category { inner: lexicon::read_category(text.as_bytes()).map_err(err)? })
    }

    fn save(&self, path: &str) -> PyResult<()> {
        lexicon::save_category(&self.inner, path).map_err(err)
    }

    fn to_json(&self) -> PyResult<String> {
        let mut out = Vec::new();
        lexicon::write_category(&self.inner, &mut out).map_err(err)?;
        String::from_utf8(out).map_err(err)
    }

    #[getter]
    fn name(&self) -> &str {
        self.inner.name()
    }

    #[getter]
    fn seeds(&self) -> Vec<String> {
        self.inner.spec.seeds.clone()
    }

    #[getter]
    fn threshold(&self) -> f64 {
        self.inner.spec.threshold
    }

    #[getter]
    fn max_terms(&self) -> usize {
        self.inner.spec.max_terms
    }

    #[getter]
    fn version(&self) -> u64 {
        self.inner.version
    }

    /// `"unvalidated"` or `"crowd_filtered"`.
    #[getter]
    fn status(&self) -> &'static str {
        match self.inner.status {
            CategoryStatus::Unvalidated => "unvalidated",
            CategoryStatus::CrowdFiltered => "crowd_filtered",
        }
    }

    #[getter]
    fn members(&self) -> Vec<(String, f64)> {
        self.inner.members.iter().map(|t| (t.word.clone(), t.similarity)).collect()
    }

    #[getter]
    fn removed(&self) -> Vec<(String, f64)> {
        self.inner.removed.iter().map(|t| (t.word.clone(), t.similarity)).collect()
    }

    fn words(&self) -> Vec<String> {
        self.inner.words().map(str::to_string).collect()
    }

    fn __len__(&self) -> usize {
        self.inner.members.len()
    }

    fn __contains__(&self, word: &str) -> bool {
        self.inner.contains(word)
    }

    fn __repr__(&self) -> String {
        format!("Category(name={:?}, members={}, status={:?})", self.inner.name(), self.inner.members.len(), self.status())
    }

    /// Labeling tasks as CSV text.
    #[pyo3(signature = (words_per_task = crowd::WORDS_PER_TASK))]
    fn export_tasks(&self, words_per_task: usize) -> PyResult<String> {
        let tasks = crowd::chunk_tasks(&self.inner, words_per_task).map_err(err)?;
        let mut out = Vec::new();
        crowd::export_tasks(&tasks, &mut out).map_err(err)?;
        String::from_utf8(out).map_err(err)
    }

    /// Drops members whose verdict is `"remove"`; `verdicts` maps word to
    /// `"keep"` or `"remove"`.
    fn apply_crowd_filter(&self, verdicts: BTreeMap<String, String>) -> PyResult<Category> {
        let verdicts = verdicts
            .into_iter()
            .map(|(w, v)| match v.as_str() {
                "keep" => Ok((w, Verdict::Keep)),
                "remove" => Ok((w, Verdict::Remove)),
                other => Err(err(format!("verdict for {w:?} must be keep or remove, got {other:?}"))),
            })
            .collect::<PyResult<BTreeMap<_, _>>>()?;
        Ok(Category { inner: lexicon::apply_crowd_filter(&self.inner, &verdicts).map_err(err)? })
    }

    /// Variants of this category's spec: every drop-one seed list, or the
    /// seed list with `substitute=(old, new)` applied.
    #[pyo3(signature = (substitute = None))]
    fn permute_seeds(&self, substitute: Option<(String, String)>) -> PyResult<Vec<Vec<String>>> {
        seed_variants(&self.inner.spec, substitute)
    }
}

fn seed_variants(spec: &CategorySpec, substitute: Option<(String, String)>) -> PyResult<Vec<Vec<String>>> {
    let mode = match substitute {
        None => PermuteMode::DropOne,
        Some((from, to)) => PermuteMode::Substitute { from, to },
    };
    let variants = lexicon::permute_seeds(spec, &mode).map_err(err)?;
    Ok(variants.into_iter().map(|s| s.seeds).collect())
}

/// Seed-list variants: drop-one by default, or `substitute=(old, new)`.
#[pyfunction]
#[pyo3(signature = (seeds, substitute = None))]
fn permute_seeds(seeds: Vec<String>, substitute: Option<(String, String)>) -> PyResult<Vec<Vec<String>>> {
    seed_variants(&CategorySpec::new("variants", seeds), substitute)
}

/// The built-in seed catalog as `{name: seeds}`.
#[pyfunction]
fn catalog() -> BTreeMap<String, Vec<String>> {
    SeedCatalog::builtin().specs().map(|s| (s.name.clone(), s.seeds.clone())).collect()
}

/// Counts category words in text.
#[pyclass(module = "seedlex", frozen)]
struct Analyzer {
    matcher: CategoryMatcher,
}

#[pymethods]
impl Analyzer {
    #[new]
    fn new(categories: Vec<Category>) -> Self {
        let inner: Vec<lexicon::Category> = categories.into_iter().map(|c| c.inner).collect();
        Analyzer { matcher: CategoryMatcher::new(&inner) }
    }

    /// Returns `{"total_tokens", "counts": {name: (raw, normalized)},
    /// "matches": [(category, start, end)]}` with byte offsets.
    fn analyze<'py>(&self, py: Python<'py>, text: &str) -> PyResult<Bound<'py, PyDict>> {
        let result = analyzer::analyze(text, &self.matcher);
        let counts: BTreeMap<String, (u64, f64)> =
            result.per_category.into_iter().map(|c| (c.category, (c.raw, c.normalized))).collect();
        let matches: Vec<(String, usize, usize)> = result.matches.into_iter().map(|m| (m.category, m.start, m.end)).collect();
        let out = PyDict::new(py);
        out.set_item("total_tokens", result.total_tokens)?;
        out.set_item("counts", counts)?;
        out.set_item("matches", matches)?;
        Ok(out)
    }

    fn categories(&self) -> Vec<String> {
        self.matcher.category_names().to_vec()
    }
}

/// Normalized tokens of a text, as the analyzer sees them.
#[pyfunction]
fn tokenize(text: &str) -> Vec<String> {
    analyzer::normalized_tokens(text)
}

#[pyfunction]
fn pearson(x: Vec<f64>, y: Vec<f64>) -> PyResult<f64> {
    stats::pearson(&x, &y).map_err(err)
}

/// One-way ANOVA; returns `(f, df_between, df_within, p)`.
#[pyfunction]
fn anova_oneway(groups: Vec<Vec<f64>>) -> PyResult<(f64, usize, usize, f64)> {
    let a = stats::anova_oneway(&groups).map_err(err)?;
    Ok((a.f, a.df_between, a.df_within, a.p_value))
}

#[pyfunction]
#[pyo3(signature = (p_values, alpha = 0.05))]
fn bonferroni(p_values: Vec<f64>, alpha: f64) -> PyResult<Vec<bool>> {
    stats::bonferroni(&p_values, alpha).map_err(err)
}

/// Compares per-document category rates of two groups. `a` and `b` map a
/// category name to that group's per-document rates. Returns one dict per
/// shared category.
#[pyfunction]
#[pyo3(signature = (a, b, alpha = 0.05, test = "welch"))]
fn compare<'py>(
    py: Python<'py>,
    a: BTreeMap<String, Vec<f64>>,
    b: BTreeMap<String, Vec<f64>>,
    alpha: f64,
    test: &str,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let test = match test {
        "welch" => SignificanceTest::Welch,
        "chi-square" | "chi_square" => SignificanceTest::ChiSquare,
        other => return Err(err(format!("unknown test {other:?}; use welch or chi-square"))),
    };
    let summary = |name: &str, rates: &BTreeMap<String, Vec<f64>>| {
        let pairs: Vec<(&str, &[f64])> = rates.iter().map(|(c, r)| (c.as_str(), r.as_slice())).collect();
        GroupSummary::from_rates(name, &pairs)
    };
    let rows = stats::compare(&summary("a", &a), &summary("b", &b), alpha, test).map_err(err)?;
    rows.into_iter()
        .map(|r| {
            let d = PyDict::new(py);
            d.set_item("category", r.category)?;
            d.set_item("odds_ratio", r.odds_ratio)?;
            d.set_item("p", r.p_value)?;
            d.set_item("significant", r.significant_after_correction)?;
            d.set_item("degenerate", r.degenerate)?;
            Ok(d)
        })
        .collect()
}

/// Correlates two tools' counts. Each argument maps document id to
/// `{category: count}`. Returns `(per_category, overall)`.
#[pyfunction]
fn agreement(
    a: BTreeMap<String, BTreeMap<String, f64>>,
    b: BTreeMap<String, BTreeMap<String, f64>>,
) -> PyResult<(BTreeMap<String, f64>, Option<f64>)> {
    let table = |t: &BTreeMap<String, BTreeMap<String, f64>>| {
        let mut categories: Vec<String> = t.values().flat_map(|m| m.keys().cloned()).collect();
        categories.sort();
        categories.dedup();
        let counts = t.values().map(|m| categories.iter().map(|c| m.get(c).copied().unwrap_or(0.0)).collect()).collect();
        stats::CountTable::new(t.keys().cloned().collect(), categories, counts)
    };
    let report = stats::agreement(&table(&a), &table(&b)).map_err(err)?;
    Ok((report.per_category.into_iter().collect(), report.overall))
}

/// Majority vote over worker labels. `responses` holds
/// `(task_id, worker_id, word, label)` tuples.
#[pyfunction]
#[pyo3(signature = (responses, quorum = 3))]
fn aggregate_labels<'py>(
    py: Python<'py>,
    responses: Vec<(String, String, String, String)>,
    quorum: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let mut grouped: BTreeMap<(String, String), BTreeMap<String, LabelScale>> = BTreeMap::new();
    for (task, worker, word, label) in responses {
        let label: LabelScale = label.parse().map_err(err)?;
        grouped.entry((task, worker)).or_default().insert(word, label);
    }
    let responses: Vec<WorkerResponse> = grouped
        .into_iter()
        .map(|((task_id, worker_id), labels)| WorkerResponse { task_id, worker_id, labels })
        .collect();
    let report = crowd::aggregate(&responses, AggregateOptions { quorum, ..AggregateOptions::default() }).map_err(err)?;
    let verdicts: BTreeMap<String, &str> = report
        .verdicts
        .iter()
        .map(|(w, v)| (w.clone(), if *v == Verdict::Keep { "keep" } else { "remove" }))
        .collect();
    let out = PyDict::new(py);
    out.set_item("verdicts", verdicts)?;
    out.set_item("judged", report.judged)?;
    out.set_item("kept", report.kept)?;
    out.set_item("acceptance_rate", report.acceptance_rate)?;
    out.set_item("unanimity_rate", report.unanimity_rate)?;
    out.set_item("minority_relevance_rate", report.minority_relevance_rate)?;
    Ok(out)
}

/// Number of labeling tasks for `n_words` words.
#[pyfunction]
#[pyo3(signature = (n_words, words_per_task = crowd::WORDS_PER_TASK))]
fn task_count(n_words: usize, words_per_task: usize) -> PyResult<usize> {
    let words: Vec<String> = (0..n_words).map(|i| i.to_string()).collect();
    let tasks: Vec<LabelTask> = crowd::chunk_words("count", &words, words_per_task).map_err(err)?;
    Ok(tasks.len())
}

/// Total payment as a decimal string, e.g. `"4.20"`.
#[pyfunction]
#[pyo3(signature = (n_tasks, workers = 3, price_per_task = "0.14"))]
fn estimate_cost(n_tasks: u64, workers: u64, price_per_task: &str) -> PyResult<String> {
    let price: Decimal = price_per_task.parse().map_err(err)?;
    Ok(crowd::estimate_cost(n_tasks, workers, price).to_string())
}

#[pymodule]
fn seedlex(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("SeedlexError", m.py().get_type::<SeedlexError>())?;
    m.add_class::<Embeddings>()?;
    m.add_class::<Category>()?;
    m.add_class::<Analyzer>()?;
    m.add_function(wrap_pyfunction!(train, m)?)?;
    m.add_function(wrap_pyfunction!(tokenize, m)?)?;
    m.add_function(wrap_pyfunction!(catalog, m)?)?;
    m.add_function(wrap_pyfunction!(permute_seeds, m)?)?;
    m.add_function(wrap_pyfunction!(pearson, m)?)?;
    m.add_function(wrap_pyfunction!(anova_oneway, m)?)?;
    m.add_function(wrap_pyfunction!(bonferroni, m)?)?;
    m.add_function(wrap_pyfunction!(compare, m)?)?;
    m.add_function(wrap_pyfunction!(agreement, m)?)?;
    m.add_function(wrap_pyfunction!(aggregate_labels, m)?)?;
    m.add_function(wrap_pyfunction!(task_count, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_cost, m)?)?;
    Ok(())
}
