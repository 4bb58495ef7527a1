//! Crowd validation of category members: labeling tasks, CSV exchange,
//! majority-vote aggregation and cost estimates.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lexicon::Category;

pub const WORDS_PER_TASK: usize = 20;
pub const DEFAULT_QUORUM: usize = 3;

#[derive(Debug, Error, PartialEq)]
pub enum CrowdError {
    #[error("words per task must be between 1 and {WORDS_PER_TASK}, got {0}")]
    InvalidTaskSize(usize),
    #[error("quorum must be at least 1")]
    InvalidQuorum,
    #[error("word {word:?} has {found} labels, expected {expected}")]
    Quorum { word: String, found: usize, expected: usize },
    #[error("row {row}: unknown label {value:?} (expected unrelated, weakly, related or strongly)")]
    UnknownLabel { row: u64, value: String },
    #[error("row {row}: unknown task {task_id:?}")]
    UnknownTask { row: u64, task_id: String },
    #[error("row {row}: word {word:?} is not part of task {task_id:?}")]
    WordNotInTask { row: u64, task_id: String, word: String },
    #[error("row {row}: duplicate label for ({task_id}, {worker_id}, {word})")]
    DuplicateRow { row: u64, task_id: String, worker_id: String, word: String },
    #[error("worker {worker_id:?} did not label {word:?} in task {task_id:?}")]
    IncompleteResponse { task_id: String, worker_id: String, word: String },
    #[error("task {task_id:?} lists {word:?} twice")]
    DuplicateTaskWord { task_id: String, word: String },
    #[error("row {row}: {message}")]
    Csv { row: u64, message: String },
}

/// Four-point relatedness scale, ordered from unrelated to strongly related.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelScale {
    Unrelated = 0,
    Weakly = 1,
    Related = 2,
    Strongly = 3,
}

impl LabelScale {
    pub const ALL: [LabelScale; 4] = [LabelScale::Unrelated, LabelScale::Weakly, LabelScale::Related, LabelScale::Strongly];

    pub fn as_str(self) -> &'static str {
        match self {
            LabelScale::Unrelated => "unrelated",
            LabelScale::Weakly => "weakly",
            LabelScale::Related => "related",
            LabelScale::Strongly => "strongly",
        }
    }
}

impl fmt::Display for LabelScale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LabelScale {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        LabelScale::ALL
            .into_iter()
            .find(|l| l.as_str() == s.trim())
            .ok_or_else(|| s.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Keep,
    Remove,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelTask {
    pub task_id: String,
    pub category: String,
    pub words: Vec<String>,
    pub prompt: String,
}

/// All labels one worker gave for one task.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorkerResponse {
    pub task_id: String,
    pub worker_id: String,
    pub labels: BTreeMap<String, LabelScale>,
}

pub fn task_prompt(category: &str) -> String {
    format!(
        "Rate how strongly each word relates to the topic \"{}\": unrelated, weakly, related or strongly.",
        category.to_uppercase()
    )
}

/// File- and id-safe form of a category name.
pub fn slug(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_alphanumeric() { c.to_ascii_lowercase() } else { '_' })
        .collect()
}

/// Splits a word list into tasks of at most `words_per_task`, in order.
/// Task ids are `<category slug>-<n>` with `n` counting from 1.
pub fn chunk_words<S: AsRef<str>>(category: &str, words: &[S], words_per_task: usize) -> Result<Vec<LabelTask>, CrowdError> {
    if !(1..=WORDS_PER_TASK).contains(&words_per_task) {
        return Err(CrowdError::InvalidTaskSize(words_per_task));
    }
    let prompt = task_prompt(category);
    let prefix = slug(category);
    Ok(words
        .chunks(words_per_task)
        .enumerate()
        .map(|(i, chunk)| LabelTask {
            task_id: format!("{prefix}-{:03}", i + 1),
            category: category.to_string(),
            words: chunk.iter().map(|w| w.as_ref().to_string()).collect(),
            prompt: prompt.clone(),
        })
        .collect())
}

pub fn chunk_tasks(category: &Category, words_per_task: usize) -> Result<Vec<LabelTask>, CrowdError> {
    let words: Vec<&str> = category.words().collect();
    chunk_words(category.name(), &words, words_per_task)
}

/// `n_tasks * workers * price_per_task` in exact decimal arithmetic.
pub fn estimate_cost(n_tasks: u64, workers: u64, price_per_task: Decimal) -> Decimal {
    let mut cost = Decimal::from(n_tasks) * Decimal::from(workers) * price_per_task;
    // at least cents, never rounded
    if cost.scale() < 2 {
        cost.rescale(2);
    }
    cost
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AggregateOptions {
    /// Labels expected per word.
    pub quorum: usize,
    /// Lowest label that counts as a vote to keep.
    pub keep_at_least: LabelScale,
}

impl Default for AggregateOptions {
    fn default() -> Self {
        AggregateOptions { quorum: DEFAULT_QUORUM, keep_at_least: LabelScale::Weakly }
    }
}

impl AggregateOptions {
    /// Votes needed to keep a word: `ceil((quorum + 1) / 2)`.
    pub fn majority(&self) -> usize {
        (self.quorum + 2) / 2
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregationReport {
    pub verdicts: BTreeMap<String, Verdict>,
    /// Per word, how many labels fell on each scale level.
    pub tallies: BTreeMap<String, [usize; 4]>,
    pub judged: usize,
    pub kept: usize,
    /// `kept / judged`.
    pub acceptance_rate: f64,
    /// Fraction of words where every label fell on the same side of the
    /// keep boundary.
    pub unanimity_rate: f64,
    /// Fraction of removed words with at least one keep vote.
    pub minority_relevance_rate: f64,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Majority vote per word: keep when at least `majority()` labels are at or
/// above `keep_at_least`.
pub fn aggregate(responses: &[WorkerResponse], options: AggregateOptions) -> Result<AggregationReport, CrowdError> {
    if options.quorum == 0 {
        return Err(CrowdError::InvalidQuorum);
    }
    let mut tallies: BTreeMap<String, [usize; 4]> = BTreeMap::new();
    for response in responses {
        for (word, &label) in &response.labels {
            tallies.entry(word.clone()).or_default()[label as usize] += 1;
        }
    }
    let needed = options.majority();
    let threshold = options.keep_at_least as usize;
    let mut verdicts = BTreeMap::new();
    let (mut kept, mut unanimous, mut removed_with_support) = (0, 0, 0);
    for (word, counts) in &tallies {
        let total: usize = counts.iter().sum();
        if total != options.quorum {
            return Err(CrowdError::Quorum { word: word.clone(), found: total, expected: options.quorum });
        }
        let keep_votes: usize = counts[threshold..].iter().sum();
        if keep_votes == 0 || keep_votes == total {
            unanimous += 1;
        }
        let verdict = if keep_votes >= needed { Verdict::Keep } else { Verdict::Remove };
        match verdict {
            Verdict::Keep => kept += 1,
            Verdict::Remove if keep_votes > 0 => removed_with_support += 1,
            Verdict::Remove => {}
        }
        verdicts.insert(word.clone(), verdict);
    }
    let judged = verdicts.len();
    Ok(AggregationReport {
        verdicts,
        tallies,
        judged,
        kept,
        acceptance_rate: ratio(kept, judged),
        unanimity_rate: ratio(unanimous, judged),
        minority_relevance_rate: ratio(removed_with_support, judged - kept),
    })
}

#[derive(Debug, Serialize, Deserialize)]
struct TaskRow {
    task_id: String,
    category: String,
    word: String,
    prompt: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct ResponseRow {
    task_id: String,
    worker_id: String,
    word: String,
    label: String,
}

fn csv_error(e: csv::Error) -> CrowdError {
    let row = e.position().map_or(0, |p| p.line());
    CrowdError::Csv { row, message: e.to_string() }
}

/// One row per (task, word) with columns `task_id,category,word,prompt`.
pub fn export_tasks<W: Write>(tasks: &[LabelTask], writer: W) -> Result<(), CrowdError> {
    let mut out = csv::Writer::from_writer(writer);
    for task in tasks {
        for word in &task.words {
            out.serialize(TaskRow {
                task_id: task.task_id.clone(),
                category: task.category.clone(),
                word: word.clone(),
                prompt: task.prompt.clone(),
            })
            .map_err(csv_error)?;
        }
    }
    out.flush().map_err(|e| CrowdError::Csv { row: 0, message: e.to_string() })?;
    Ok(())
}

/// Reads an exported task file back, grouping rows by task in file order.
pub fn read_tasks<R: Read>(reader: R) -> Result<Vec<LabelTask>, CrowdError> {
    let mut tasks: Vec<LabelTask> = Vec::new();
    let mut by_id: HashMap<String, usize> = HashMap::new();
    let mut rdr = csv::Reader::from_reader(reader);
    for record in rdr.deserialize::<TaskRow>() {
        let row = record.map_err(csv_error)?;
        let slot = *by_id.entry(row.task_id.clone()).or_insert_with(|| {
            tasks.push(LabelTask { task_id: row.task_id.clone(), category: row.category.clone(), words: vec![], prompt: row.prompt.clone() });
            tasks.len() - 1
        });
        let task = &mut tasks[slot];
        if task.words.contains(&row.word) {
            return Err(CrowdError::DuplicateTaskWord { task_id: row.task_id, word: row.word });
        }
        task.words.push(row.word);
    }
    Ok(tasks)
}

/// Columns `task_id,worker_id,word,label`.
pub fn write_responses<W: Write>(responses: &[WorkerResponse], tasks: &[LabelTask], writer: W) -> Result<(), CrowdError> {
    let order: HashMap<&str, &LabelTask> = tasks.iter().map(|t| (t.task_id.as_str(), t)).collect();
    let mut out = csv::Writer::from_writer(writer);
    for response in responses {
        // task word order when the task is known, otherwise alphabetical
        let words: Vec<&String> = match order.get(response.task_id.as_str()) {
            Some(task) => task.words.iter().filter(|w| response.labels.contains_key(*w)).collect(),
            None => response.labels.keys().collect(),
        };
        for word in words {
            out.serialize(ResponseRow {
                task_id: response.task_id.clone(),
                worker_id: response.worker_id.clone(),
                word: word.clone(),
                label: response.labels[word].to_string(),
            })
            .map_err(csv_error)?;
        }
    }
    out.flush().map_err(|e| CrowdError::Csv { row: 0, message: e.to_string() })?;
    Ok(())
}

/// Parses a response file and checks it against the exported tasks: labels
/// must be on the scale, words must belong to their task, no
/// (task, worker, word) may repeat, and every worker must label every word
/// of the tasks they answered. Row numbers count the header as row 1.
pub fn import_responses<R: Read>(reader: R, tasks: &[LabelTask]) -> Result<Vec<WorkerResponse>, CrowdError> {
    let task_words: HashMap<&str, HashSet<&str>> = tasks
        .iter()
        .map(|t| (t.task_id.as_str(), t.words.iter().map(String::as_str).collect()))
        .collect();
    let mut responses: Vec<WorkerResponse> = Vec::new();
    let mut slots: HashMap<(String, String), usize> = HashMap::new();
    let mut rdr = csv::Reader::from_reader(reader);
    let headers = rdr.headers().map_err(csv_error)?.clone();
    for record in rdr.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map_or(0, |p| p.line());
        let row: ResponseRow = record
            .deserialize(Some(&headers))
            .map_err(|e| CrowdError::Csv { row: line, message: e.to_string() })?;
        let words = task_words
            .get(row.task_id.as_str())
            .ok_or_else(|| CrowdError::UnknownTask { row: line, task_id: row.task_id.clone() })?;
        if !words.contains(row.word.as_str()) {
            return Err(CrowdError::WordNotInTask { row: line, task_id: row.task_id, word: row.word });
        }
        let label: LabelScale = row
            .label
            .parse()
            .map_err(|value| CrowdError::UnknownLabel { row: line, value })?;
        let key = (row.task_id.clone(), row.worker_id.clone());
        let slot = *slots.entry(key).or_insert_with(|| {
            responses.push(WorkerResponse { task_id: row.task_id.clone(), worker_id: row.worker_id.clone(), labels: BTreeMap::new() });
            responses.len() - 1
        });
        if responses[slot].labels.insert(row.word.clone(), label).is_some() {
            return Err(CrowdError::DuplicateRow { row: line, task_id: row.task_id, worker_id: row.worker_id, word: row.word });
        }
    }
    let by_id: HashMap<&str, &LabelTask> = tasks.iter().map(|t| (t.task_id.as_str(), t)).collect();
    for response in &responses {
        let task = by_id[response.task_id.as_str()];
        if let Some(word) = task.words.iter().find(|w| !response.labels.contains_key(*w)) {
            return Err(CrowdError::IncompleteResponse {
                task_id: response.task_id.clone(),
                worker_id: response.worker_id.clone(),
                word: word.clone(),
            });
        }
    }
    Ok(responses)
}

/// Fills every task with one response per worker using `label`, for tests
/// and dry runs of the pipeline.
pub fn synthesize_responses<F>(tasks: &[LabelTask], workers: &[&str], mut label: F) -> Vec<WorkerResponse>
where
    F: FnMut(&LabelTask, &str, usize) -> LabelScale,
{
    let mut responses = Vec::new();
    for task in tasks {
        for (w, worker) in workers.iter().enumerate() {
            let labels = task.words.iter().map(|word| (word.clone(), label(task, word, w))).collect();
            responses.push(WorkerResponse { task_id: task.task_id.clone(), worker_id: worker.to_string(), labels });
        }
    }
    responses
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use LabelScale::*;

    fn words(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("w{i}")).collect()
    }

    fn triple(word: &str, labels: [LabelScale; 3]) -> Vec<WorkerResponse> {
        labels
            .iter()
            .enumerate()
            .map(|(i, &l)| WorkerResponse {
                task_id: "t".into(),
                worker_id: format!("worker{i}"),
                labels: BTreeMap::from([(word.to_string(), l)]),
            })
            .collect()
    }

    #[test]
    fn chunk_sizes() {
        let sizes = |n: usize| -> Vec<usize> {
            chunk_words("war", &words(n), 20).unwrap().iter().map(|t| t.words.len()).collect()
        };
        assert_eq!(sizes(200).len(), 10);
        assert_eq!(sizes(21), [20, 1]);
        assert_eq!(sizes(20), [20]);
        assert!(sizes(0).is_empty());
        assert_eq!(chunk_words("war", &words(3), 0), Err(CrowdError::InvalidTaskSize(0)));
        assert_eq!(chunk_words("war", &words(3), 21), Err(CrowdError::InvalidTaskSize(21)));
    }

    #[test]
    fn task_ids_are_deterministic() {
        let tasks = chunk_words("social media", &words(25), 20).unwrap();
        assert_eq!(tasks[0].task_id, "social_media-001");
        assert_eq!(tasks[1].task_id, "social_media-002");
        assert_eq!(tasks, chunk_words("social media", &words(25), 20).unwrap());
    }

    #[test]
    fn costs() {
        let price = Decimal::new(14, 2);
        assert_eq!(estimate_cost(10, 3, price).to_string(), "4.20");
        assert_eq!(estimate_cost(0, 3, price).to_string(), "0.00");
        assert_eq!(estimate_cost(7, 3, price).to_string(), "2.94");
    }

    #[test]
    fn two_of_three_rule() {
        let keep = aggregate(&triple("x", [Related, Strongly, Unrelated]), AggregateOptions::default()).unwrap();
        assert_eq!(keep.verdicts["x"], Verdict::Keep);
        let remove = aggregate(&triple("x", [Unrelated, Unrelated, Strongly]), AggregateOptions::default()).unwrap();
        assert_eq!(remove.verdicts["x"], Verdict::Remove);
        assert_eq!(remove.minority_relevance_rate, 1.0);
        assert_eq!(remove.unanimity_rate, 0.0);
    }

    #[test]
    fn quorum_errors() {
        let mut responses = triple("x", [Related, Related, Related]);
        responses.pop();
        assert_eq!(
            aggregate(&responses, AggregateOptions::default()),
            Err(CrowdError::Quorum { word: "x".into(), found: 2, expected: 3 })
        );
        let options = AggregateOptions { quorum: 0, ..Default::default() };
        assert_eq!(aggregate(&[], options), Err(CrowdError::InvalidQuorum));
    }

    #[test]
    fn majorities() {
        let m = |q| AggregateOptions { quorum: q, ..Default::default() }.majority();
        assert_eq!([m(1), m(2), m(3), m(4), m(5)], [1, 2, 2, 3, 3]);
    }

    #[test]
    fn stricter_keep_boundary() {
        let options = AggregateOptions { keep_at_least: Related, ..Default::default() };
        let report = aggregate(&triple("x", [Weakly, Weakly, Strongly]), options).unwrap();
        assert_eq!(report.verdicts["x"], Verdict::Remove);
    }

    #[test]
    fn rates() {
        let mut responses = triple("a", [Strongly, Strongly, Related]);
        responses.extend(triple("b", [Unrelated, Weakly, Unrelated]));
        responses.extend(triple("c", [Unrelated, Unrelated, Unrelated]));
        responses.extend(triple("d", [Weakly, Unrelated, Weakly]));
        let r = aggregate(&responses, AggregateOptions::default()).unwrap();
        assert_eq!((r.judged, r.kept), (4, 2));
        assert_eq!(r.acceptance_rate, 0.5);
        assert_eq!(r.unanimity_rate, 0.5);
        assert_eq!(r.minority_relevance_rate, 0.5);
    }

    fn two_tasks() -> Vec<LabelTask> {
        chunk_words("war", &words(40), 20).unwrap()
    }

    #[test]
    fn export_row_count() {
        let mut buf = Vec::new();
        export_tasks(&two_tasks(), &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().count(), 41);
        assert!(text.starts_with("task_id,category,word,prompt\n"));
        assert_eq!(read_tasks(buf.as_slice()).unwrap(), two_tasks());
    }

    fn import(text: &str) -> Result<Vec<WorkerResponse>, CrowdError> {
        let tasks = chunk_words("war", &["sword", "tank"], 20).unwrap();
        import_responses(text.as_bytes(), &tasks)
    }

    #[test]
    fn import_validation() {
        let header = "task_id,worker_id,word,label\n";
        let ok = format!("{header}war-001,w1,sword,strongly\nwar-001,w1,tank,related\n");
        let responses = import(&ok).unwrap();
        assert_eq!(responses.len(), 1);
        assert_eq!(responses[0].labels["tank"], Related);

        let bad_label = format!("{header}war-001,w1,sword,strongly\nwar-001,w1,tank,kinda\n");
        assert_eq!(import(&bad_label), Err(CrowdError::UnknownLabel { row: 3, value: "kinda".into() }));

        let stray = format!("{header}war-001,w1,desk,strongly\n");
        assert!(matches!(import(&stray), Err(CrowdError::WordNotInTask { row: 2, .. })));

        let unknown = format!("{header}war-009,w1,sword,strongly\n");
        assert!(matches!(import(&unknown), Err(CrowdError::UnknownTask { row: 2, .. })));

        let dup = format!("{header}war-001,w1,sword,strongly\nwar-001,w1,sword,weakly\nwar-001,w1,tank,related\n");
        assert!(matches!(import(&dup), Err(CrowdError::DuplicateRow { row: 3, .. })));

        let partial = format!("{header}war-001,w1,sword,strongly\n");
        assert!(matches!(import(&partial), Err(CrowdError::IncompleteResponse { .. })));
    }

    #[test]
    fn pipeline_round_trip() {
        let tasks = two_tasks();
        let mut exported = Vec::new();
        export_tasks(&tasks, &mut exported).unwrap();
        let tasks = read_tasks(exported.as_slice()).unwrap();
        // workers reject every fifth word
        let responses = synthesize_responses(&tasks, &["a", "b", "c"], |_, word, worker| {
            let i: usize = word[1..].parse().unwrap();
            if i % 5 == 0 && worker > 0 { Unrelated } else { Related }
        });
        let mut csv = Vec::new();
        write_responses(&responses, &tasks, &mut csv).unwrap();
        let imported = import_responses(csv.as_slice(), &tasks).unwrap();
        assert_eq!(imported, responses);
        let report = aggregate(&imported, AggregateOptions::default()).unwrap();
        assert_eq!((report.judged, report.kept), (40, 32));
        assert_eq!(report.verdicts["w5"], Verdict::Remove);
        assert_eq!(report.minority_relevance_rate, 1.0);
    }

    fn label() -> impl Strategy<Value = LabelScale> {
        prop_oneof![Just(Unrelated), Just(Weakly), Just(Related), Just(Strongly)]
    }

    proptest! {
        #[test]
        fn worker_order_irrelevant(labels in proptest::collection::vec(label(), 5), rotate in 0usize..5) {
            let options = AggregateOptions { quorum: 5, ..Default::default() };
            let mut rotated = labels.clone();
            rotated.rotate_left(rotate);
            let build = |ls: &[LabelScale]| -> Vec<WorkerResponse> {
                ls.iter().enumerate().map(|(i, &l)| WorkerResponse {
                    task_id: "t".into(), worker_id: i.to_string(), labels: BTreeMap::from([("x".to_string(), l)]),
                }).collect()
            };
            prop_assert_eq!(aggregate(&build(&labels), options).unwrap(), aggregate(&build(&rotated), options).unwrap());
        }

        #[test]
        fn raising_a_label_never_removes(labels in proptest::array::uniform3(label()), who in 0usize..3) {
            let before = aggregate(&triple("x", labels), AggregateOptions::default()).unwrap().verdicts["x"];
            let mut raised = labels;
            raised[who] = LabelScale::ALL[(raised[who] as usize + 1).min(3)];
            let after = aggregate(&triple("x", raised), AggregateOptions::default()).unwrap().verdicts["x"];
            prop_assert!(!(before == Verdict::Keep && after == Verdict::Remove));
        }

        #[test]
        fn partition_reassembles(n in 0usize..90, per in 1usize..=20) {
            let ws = words(n);
            let tasks = chunk_words("c", &ws, per).unwrap();
            prop_assert_eq!(tasks.len(), n.div_ceil(per));
            let joined: Vec<String> = tasks.into_iter().flat_map(|t| t.words).collect();
            prop_assert_eq!(joined, ws);
        }

        #[test]
        fn all_strongly_accepts_everything(n in 1usize..50) {
            let tasks = chunk_words("c", &words(n), 20).unwrap();
            let responses = synthesize_responses(&tasks, &["a", "b", "c"], |_, _, _| Strongly);
            let report = aggregate(&responses, AggregateOptions::default()).unwrap();
            prop_assert_eq!(report.acceptance_rate, 1.0);
            prop_assert_eq!(report.kept, n);
        }
    }
}
