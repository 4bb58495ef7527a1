//! Fixture pipeline shared by the golden and acceptance tests.

#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use seedlex_core::crowd::{read_tasks, synthesize_responses, write_responses, LabelScale};

pub const SOURCE_DATE_EPOCH: &str = "1700000000";
pub const BLESS_ENV: &str = "SEEDLEX_BLESS";

const WAR_WORDS: [&str; 10] = ["war", "battle", "soldier", "army", "weapon", "fight", "enemy", "attack", "troop", "gun"];

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

pub fn seedlex(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_seedlex"))
        .args(args)
        .env("SOURCE_DATE_EPOCH", SOURCE_DATE_EPOCH)
        .env_remove("SEEDLEX_PORT")
        .output()
        .expect("run seedlex")
}

/// Runs the binary and fails with its stderr unless it exits 0.
pub fn seedlex_ok(args: &[&str]) -> Result<Vec<u8>, String> {
    let out = seedlex(args);
    if out.status.code() != Some(0) {
        return Err(format!(
            "seedlex {} exited {:?}: {}",
            args.join(" "),
            out.status.code(),
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    Ok(out.stdout)
}

fn p(path: &Path) -> &str {
    path.to_str().expect("utf-8 path")
}

/// Synthetic crowd: war words get strongly/related/weakly, everything else
/// unrelated/unrelated/weakly.
pub fn synthetic_responses(tasks_csv: &[u8]) -> Vec<u8> {
    let tasks = read_tasks(tasks_csv).expect("task csv");
    let responses = synthesize_responses(&tasks, &["w1", "w2", "w3"], |_, word, worker| {
        let related = WAR_WORDS.contains(&word);
        match (related, worker) {
            (true, 0) => LabelScale::Strongly,
            (true, 1) => LabelScale::Related,
            (_, 2) => LabelScale::Weakly,
            _ => LabelScale::Unrelated,
        }
    });
    let mut out = Vec::new();
    write_responses(&responses, &tasks, &mut out).expect("write responses");
    out
}

/// train, neighbors, generate, crowd export, synthetic fill, crowd import,
/// crowd aggregate, analyze, compare and agree on the committed fixtures.
/// Returns every artifact under its golden file name.
pub fn run_pipeline(work: &Path) -> Result<Vec<(&'static str, Vec<u8>)>, String> {
    let fx = fixtures();
    let read = |path: &Path| std::fs::read(path).map_err(|e| format!("{}: {e}", path.display()));
    let mut artifacts = Vec::new();

    let emb = work.join("embeddings.txt");
    let train_out = seedlex_ok(&[
        "--seed", "7", "--quiet", "train",
        "--corpus", p(&fx.join("corpus.txt")),
        "--out", p(&emb),
        "--dims", "24", "--window", "4", "--epochs", "5", "--min-count", "5",
        "--no-downsample", "--no-stopwords",
    ])?;
    artifacts.push(("train.csv", train_out));
    artifacts.push(("embeddings.txt", read(&emb)?));

    artifacts.push((
        "neighbors.csv",
        seedlex_ok(&["--quiet", "neighbors", "--embeddings", p(&emb), "--words", "hat", "-k", "5"])?,
    ));

    let cats = work.join("categories");
    let unfiltered = work.join("unfiltered");
    for dir in [&cats, &unfiltered] {
        std::fs::create_dir_all(dir).map_err(|e| e.to_string())?;
    }
    let war = cats.join("war.json");
    let clothing = cats.join("clothing.json");
    seedlex_ok(&[
        "--quiet", "generate", "--embeddings", p(&emb), "--name", "war", "--seeds", "battle,soldier",
        "--threshold", "0.3", "--out", p(&war),
    ])?;
    seedlex_ok(&["--quiet", "generate", "--embeddings", p(&emb), "--name", "clothing", "--seeds", "shirt,hat", "--out", p(&clothing)])?;
    artifacts.push(("war.generated.json", read(&war)?));
    artifacts.push(("clothing.generated.json", read(&clothing)?));
    std::fs::copy(&war, unfiltered.join("war.json")).map_err(|e| e.to_string())?;
    std::fs::copy(&clothing, unfiltered.join("clothing.json")).map_err(|e| e.to_string())?;

    let tasks = work.join("war.tasks.csv");
    seedlex_ok(&["--quiet", "crowd", "export", "--category", p(&war), "--out", p(&tasks)])?;
    let tasks_csv = read(&tasks)?;
    let responses = work.join("war.responses.csv");
    let responses_csv = synthetic_responses(&tasks_csv);
    std::fs::write(&responses, &responses_csv).map_err(|e| e.to_string())?;
    artifacts.push(("war.tasks.csv", tasks_csv));
    artifacts.push(("war.responses.csv", responses_csv));

    artifacts.push((
        "aggregate.csv",
        seedlex_ok(&["--quiet", "crowd", "aggregate", "--tasks", p(&tasks), "--responses", p(&responses)])?,
    ));
    let import_out = seedlex_ok(&[
        "--quiet", "crowd", "import", "--category", p(&war), "--tasks", p(&tasks), "--responses", p(&responses),
    ])?;
    artifacts.push(("import.csv", import_out));
    artifacts.push(("war.filtered.json", read(&war)?));

    let manifest = fx.join("docs.csv");
    let analysis = work.join("analysis.csv");
    seedlex_ok(&["--quiet", "analyze", "--categories", p(&cats), "--manifest", p(&manifest), "--out", p(&analysis)])?;
    artifacts.push(("analysis.csv", read(&analysis)?));
    artifacts.push((
        "analysis.json",
        seedlex_ok(&["--quiet", "--format", "json", "analyze", "--categories", p(&cats), "--manifest", p(&manifest)])?,
    ));
    let baseline = work.join("analysis.unfiltered.csv");
    seedlex_ok(&["--quiet", "analyze", "--categories", p(&unfiltered), "--manifest", p(&manifest), "--out", p(&baseline)])?;

    artifacts.push((
        "comparison.csv",
        seedlex_ok(&[
            "--quiet", "compare", "--results", p(&analysis), "--groups", p(&fx.join("groups.csv")), "--a", "lie", "--b", "truth",
        ])?,
    ));
    artifacts.push((
        "agreement.csv",
        seedlex_ok(&["--quiet", "agree", "--a", p(&analysis), "--b", p(&baseline)])?,
    ));
    Ok(artifacts)
}

/// Compares an artifact with its golden file, or rewrites the golden file
/// when `SEEDLEX_BLESS` is set.
pub fn check_golden(name: &str, actual: &[u8]) -> Result<(), String> {
    let path = golden_dir().join(name);
    if std::env::var_os(BLESS_ENV).is_some() {
        std::fs::create_dir_all(golden_dir()).map_err(|e| e.to_string())?;
        std::fs::write(&path, actual).map_err(|e| e.to_string())?;
        return Ok(());
    }
    let expected = std::fs::read(&path).map_err(|e| format!("{}: {e} (run with {BLESS_ENV}=1 to create)", path.display()))?;
    if expected == actual {
        return Ok(());
    }
    let (exp, act) = (String::from_utf8_lossy(&expected), String::from_utf8_lossy(actual));
    let line = exp.lines().zip(act.lines()).position(|(a, b)| a != b).map_or(exp.lines().count().min(act.lines().count()), |i| i) + 1;
    Err(format!(
        "{name} differs from golden at line {line}:\n  golden: {:?}\n  actual: {:?}",
        exp.lines().nth(line - 1).unwrap_or(""),
        act.lines().nth(line - 1).unwrap_or("")
    ))
}
