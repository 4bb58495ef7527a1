use std::collections::HashSet;
use std::fs::{self, File};
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::Serialize;

use seedlex_core::analyzer::table::{read_csv, read_manifest, rows_for, write_csv, ResultRow};
use seedlex_core::analyzer::{analyze_corpus, normalized_tokens, CategoryMatcher, Document, DocumentError, DocumentOutcome};
use seedlex_core::crowd::{
    aggregate, chunk_tasks, estimate_cost, export_tasks, import_responses, read_tasks, AggregateOptions,
    AggregationReport, Verdict, LabelScale,
};
use seedlex_core::embedding::{load_embeddings, save_embeddings, train, TrainingConfig, WindowMode};
use seedlex_core::lexicon::{
    apply_crowd_filter, generate_with, load_category, load_category_dir, save_category, write_category, Category,
    CategorySpec,
};
use seedlex_core::stats::{
    agreement, compare, read_group_manifest, write_agreement_csv, write_comparison_csv, CountTable, GroupSummary,
    Measure, SignificanceTest,
};
use seedlex_core::vsm::{nearest, query_vector, QueryMode, VectorSpace};

use crate::args::*;

pub struct Session<'a> {
    pub seed: u64,
    pub quiet: bool,
    pub format: Format,
    pub stdout: &'a mut dyn Write,
    pub stderr: &'a mut dyn Write,
}

impl Session<'_> {
    fn note(&mut self, message: impl std::fmt::Display) {
        if !self.quiet {
            let _ = writeln!(self.stderr, "{message}");
        }
    }

    /// Runs `write` against `path`, or stdout when there is no path.
    fn emit(&mut self, path: Option<&Path>, write: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
        match path {
            Some(p) => {
                let mut file = File::create(p).with_context(|| format!("creating {}", p.display()))?;
                write(&mut file)?;
                file.flush()?;
                Ok(())
            }
            None => write(self.stdout),
        }
    }
}

fn json<T: Serialize + ?Sized>(out: &mut dyn Write, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    out.write_all(b"\n")?;
    Ok(())
}

fn load_space(path: &Path) -> Result<VectorSpace> {
    let vectors = load_embeddings(path).with_context(|| format!("reading embeddings {}", path.display()))?;
    VectorSpace::new(vectors).with_context(|| format!("embeddings {}", path.display()))
}

pub fn train_cmd(ctx: &mut Session, a: &TrainArgs) -> Result<()> {
    let text = fs::read_to_string(&a.corpus).with_context(|| format!("reading {}", a.corpus.display()))?;
    let sentences: Vec<Vec<String>> = text.lines().map(normalized_tokens).filter(|s| !s.is_empty()).collect();
    let config = TrainingConfig {
        dims: a.dims,
        window: a.window,
        window_mode: if a.fixed_window { WindowMode::Fixed } else { WindowMode::Dynamic },
        min_count: a.min_count,
        negative_samples: a.negative,
        epochs: a.epochs,
        learning_rate: a.learning_rate,
        downsample_threshold: (!a.no_downsample).then_some(a.downsample),
        stopword_logprob: (!a.no_stopwords).then_some(a.stopword_logprob),
        rng_seed: ctx.seed,
        threads: a.threads,
    };
    let trained = train(&sentences, &config)?;
    save_embeddings(&trained.word_vectors(), &a.out).with_context(|| format!("writing {}", a.out.display()))?;
    ctx.note(format!("{} words x {} dims written to {}", trained.vocabulary.len(), a.dims, a.out.display()));

    #[derive(Serialize)]
    struct Summary<'a> {
        words: usize,
        dims: usize,
        epoch_losses: &'a [f64],
    }
    match ctx.format {
        Format::Json => json(
            ctx.stdout,
            &Summary { words: trained.vocabulary.len(), dims: a.dims, epoch_losses: &trained.epoch_losses },
        ),
        Format::Csv => {
            writeln!(ctx.stdout, "epoch,loss")?;
            for (i, loss) in trained.epoch_losses.iter().enumerate() {
                writeln!(ctx.stdout, "{},{loss:.6}", i + 1)?;
            }
            Ok(())
        }
    }
}

pub fn neighbors_cmd(ctx: &mut Session, a: &NeighborsArgs) -> Result<()> {
    let space = load_space(&a.embeddings)?;
    let query = query_vector("", &a.words, &space, QueryMode::Normalized)?;
    if !query.missing.is_empty() {
        ctx.note(format!("warning: not in vocabulary: {}", query.missing.join(", ")));
    }
    let found = nearest(&space, &query.vector, a.k, &query.resolved)?;
    match ctx.format {
        Format::Json => json(ctx.stdout, &found),
        Format::Csv => {
            writeln!(ctx.stdout, "word,score")?;
            for term in &found {
                writeln!(ctx.stdout, "{},{:.6}", term.word, term.similarity)?;
            }
            Ok(())
        }
    }
}

pub fn generate_cmd(ctx: &mut Session, a: &GenerateArgs) -> Result<()> {
    let space = load_space(&a.embeddings)?;
    let spec = CategorySpec::new(a.name.clone(), a.seeds.clone())
        .with_threshold(a.threshold)
        .with_max_terms(a.max_terms);
    let missing: Vec<&str> = spec.seeds.iter().filter(|s| space.resolve(s).is_none()).map(String::as_str).collect();
    if missing.len() == spec.seeds.len() {
        bail!("no seed is in the vocabulary: {}", missing.join(", "));
    }
    if !missing.is_empty() {
        ctx.note(format!("warning: seeds not in vocabulary: {}", missing.join(", ")));
    }
    let mode = if a.raw_query { QueryMode::Raw } else { QueryMode::Normalized };
    let category = generate_with(&spec, &space, mode)?;
    ctx.note(format!("{}: {} members", category.name(), category.members.len()));
    match &a.out {
        Some(path) => save_category(&category, path).with_context(|| format!("writing {}", path.display())),
        None => Ok(write_category(&category, &mut *ctx.stdout)?),
    }
}

fn load_categories(paths: &[PathBuf]) -> Result<Vec<Category>> {
    let mut categories = Vec::new();
    for path in paths {
        if path.is_dir() {
            categories.extend(load_category_dir(path).with_context(|| format!("loading {}", path.display()))?);
        } else {
            categories.push(load_category(path).with_context(|| format!("loading {}", path.display()))?);
        }
    }
    let mut names = HashSet::new();
    for c in &categories {
        if !names.insert(c.name()) {
            bail!("category {:?} is loaded twice", c.name());
        }
    }
    Ok(categories)
}

fn document_list(a: &AnalyzeArgs) -> Result<Vec<(String, PathBuf)>> {
    let mut docs = Vec::new();
    if let Some(manifest) = &a.manifest {
        let base = manifest.parent().unwrap_or(Path::new("."));
        let file = File::open(manifest).with_context(|| format!("opening {}", manifest.display()))?;
        for entry in read_manifest(BufReader::new(file)).with_context(|| format!("manifest {}", manifest.display()))? {
            docs.push((entry.doc_id, base.join(entry.path)));
        }
    }
    for path in &a.files {
        let id = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| path.display().to_string());
        docs.push((id, path.clone()));
    }
    if docs.is_empty() {
        bail!("no documents: pass files or --manifest");
    }
    Ok(docs)
}

pub fn analyze_cmd(ctx: &mut Session, a: &AnalyzeArgs) -> Result<()> {
    let categories = load_categories(&a.categories)?;
    let matcher = CategoryMatcher::new(&categories);
    let docs = document_list(a)?;
    let reads = docs.into_iter().map(|(id, path)| match fs::read_to_string(&path) {
        Ok(text) => Ok(Document { id, text }),
        Err(e) => Err(DocumentError { id, message: format!("{}: {e}", path.display()) }),
    });
    let mut rows: Vec<ResultRow> = Vec::new();
    let mut failures = Vec::new();
    for outcome in analyze_corpus(reads, &matcher) {
        match outcome {
            DocumentOutcome::Analyzed { id, result } => rows.extend(rows_for(&id, &result)),
            DocumentOutcome::Failed(err) => failures.push(err),
        }
    }
    for err in &failures {
        ctx.note(format!("warning: skipped {}: {}", err.id, err.message));
    }
    let format = ctx.format;
    ctx.emit(a.out.as_deref(), |out| match format {
        Format::Json => json(out, &rows),
        Format::Csv => Ok(write_csv(out, &rows)?),
    })
}

fn read_results(path: &Path) -> Result<Vec<ResultRow>> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    read_csv(BufReader::new(file)).with_context(|| format!("reading {}", path.display()))
}

pub fn compare_cmd(ctx: &mut Session, a: &CompareArgs) -> Result<()> {
    let rows = read_results(&a.results)?;
    let file = File::open(&a.groups).with_context(|| format!("opening {}", a.groups.display()))?;
    let groups = read_group_manifest(BufReader::new(file)).with_context(|| format!("reading {}", a.groups.display()))?;
    let summaries = GroupSummary::from_rows(&rows, &groups);
    let names: Vec<&String> = summaries.keys().collect();
    let (name_a, name_b) = match (&a.a, &a.b) {
        (Some(x), Some(y)) => (x.clone(), y.clone()),
        _ if names.len() == 2 => (names[0].clone(), names[1].clone()),
        _ => bail!("pass --a and --b to choose two of the groups: {}", names.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(", ")),
    };
    let lookup = |n: &str| summaries.get(n).ok_or_else(|| anyhow!("group {n:?} has no analyzed documents"));
    let test = match a.test {
        TestKind::Welch => SignificanceTest::Welch,
        TestKind::ChiSquare => SignificanceTest::ChiSquare,
    };
    let table = compare(lookup(&name_a)?, lookup(&name_b)?, a.alpha, test)?;
    ctx.note(format!("{name_a} vs {name_b}: {} categories", table.len()));
    let format = ctx.format;
    ctx.emit(a.out.as_deref(), |out| match format {
        Format::Json => json(out, &table),
        Format::Csv => Ok(write_comparison_csv(&table, out)?),
    })
}

pub fn agree_cmd(ctx: &mut Session, a: &AgreeArgs) -> Result<()> {
    let measure = match a.measure {
        MeasureKind::Raw => Measure::Raw,
        MeasureKind::Normalized => Measure::Normalized,
    };
    let table_a = CountTable::from_rows(&read_results(&a.a)?, measure);
    let table_b = CountTable::from_rows(&read_results(&a.b)?, measure);
    let report = agreement(&table_a, &table_b)?;
    if !report.excluded.is_empty() {
        ctx.note(format!("excluded (zero variance): {}", report.excluded.join(", ")));
    }
    let format = ctx.format;
    ctx.emit(a.out.as_deref(), |out| match format {
        Format::Json => json(out, &report),
        Format::Csv => Ok(write_agreement_csv(&report, out)?),
    })
}

pub fn export_cmd(ctx: &mut Session, a: &ExportArgs) -> Result<()> {
    let category = load_category(&a.category).with_context(|| format!("loading {}", a.category.display()))?;
    let tasks = chunk_tasks(&category, a.words_per_task)?;
    let cost = estimate_cost(tasks.len() as u64, a.workers, a.price);
    ctx.note(format!(
        "{}: {} words in {} task(s); {} workers at ${} each, estimated cost ${cost}",
        category.name(),
        category.members.len(),
        tasks.len(),
        a.workers,
        a.price
    ));
    ctx.emit(a.out.as_deref(), |out| Ok(export_tasks(&tasks, out)?))
}

fn aggregate_labels(labels: &ResponseArgs) -> Result<AggregationReport> {
    let tasks_file = File::open(&labels.tasks).with_context(|| format!("opening {}", labels.tasks.display()))?;
    let tasks = read_tasks(BufReader::new(tasks_file)).with_context(|| format!("reading {}", labels.tasks.display()))?;
    let file = File::open(&labels.responses).with_context(|| format!("opening {}", labels.responses.display()))?;
    let responses = import_responses(BufReader::new(file), &tasks)
        .with_context(|| format!("reading {}", labels.responses.display()))?;
    let options = AggregateOptions { quorum: labels.quorum, ..AggregateOptions::default() };
    Ok(aggregate(&responses, options)?)
}

fn write_summary(out: &mut dyn Write, format: Format, report: &AggregationReport) -> Result<()> {
    #[derive(Serialize)]
    struct Summary {
        judged: usize,
        kept: usize,
        acceptance_rate: f64,
        unanimity_rate: f64,
        minority_relevance_rate: f64,
    }
    let s = Summary {
        judged: report.judged,
        kept: report.kept,
        acceptance_rate: report.acceptance_rate,
        unanimity_rate: report.unanimity_rate,
        minority_relevance_rate: report.minority_relevance_rate,
    };
    match format {
        Format::Json => json(out, &s),
        Format::Csv => {
            writeln!(out, "judged,kept,acceptance_rate,unanimity_rate,minority_relevance_rate")?;
            writeln!(
                out,
                "{},{},{:.6},{:.6},{:.6}",
                s.judged, s.kept, s.acceptance_rate, s.unanimity_rate, s.minority_relevance_rate
            )?;
            Ok(())
        }
    }
}

pub fn import_cmd(ctx: &mut Session, a: &ImportArgs) -> Result<()> {
    let category = load_category(&a.category).with_context(|| format!("loading {}", a.category.display()))?;
    let report = aggregate_labels(&a.labels)?;
    let filtered = apply_crowd_filter(&category, &report.verdicts)?;
    let out = a.out.as_ref().unwrap_or(&a.category);
    save_category(&filtered, out).with_context(|| format!("writing {}", out.display()))?;
    ctx.note(format!("{}: kept {} of {} judged words", filtered.name(), report.kept, report.judged));
    write_summary(ctx.stdout, ctx.format, &report)
}

pub fn aggregate_cmd(ctx: &mut Session, a: &AggregateArgs) -> Result<()> {
    let report = aggregate_labels(&a.labels)?;
    let format = ctx.format;
    ctx.emit(a.out.as_deref(), |out| match format {
        Format::Json => json(out, &report),
        Format::Csv => {
            write!(out, "word,verdict")?;
            for level in LabelScale::ALL {
                write!(out, ",{level}")?;
            }
            writeln!(out)?;
            for (word, verdict) in &report.verdicts {
                let tally = report.tallies[word];
                let verdict = match verdict {
                    Verdict::Keep => "keep",
                    Verdict::Remove => "remove",
                };
                writeln!(out, "{word},{verdict},{},{},{},{}", tally[0], tally[1], tally[2], tally[3])?;
            }
            Ok(())
        }
    })
}

pub fn serve_cmd(ctx: &mut Session, a: &ServeArgs) -> Result<()> {
    let config = seedlex_service::ServiceConfig {
        embeddings: a.embeddings.clone(),
        categories: a.categories.clone(),
        host: a.host.clone(),
        port: a.port,
        max_text_bytes: a.max_text_bytes,
    };
    ctx.note(format!("serving on {}:{}", config.host, config.effective_port()?));
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(seedlex_service::serve(config))?;
    Ok(())
}
