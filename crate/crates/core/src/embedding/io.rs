//! Plain-text embedding interchange: a header line `n h` followed by `n`
//! lines of `word v1 ... vh`, space separated.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{EmbeddingError, Matrix};

/// Words with their vectors, row `i` belonging to `words[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct WordVectors {
    pub words: Vec<String>,
    pub vectors: Matrix,
}

pub fn write_embeddings<W: Write>(vectors: &WordVectors, writer: W) -> Result<(), EmbeddingError> {
    let mut out = BufWriter::new(writer);
    writeln!(out, "{} {}", vectors.words.len(), vectors.vectors.cols())?;
    for (word, row) in vectors.words.iter().zip(vectors.vectors.iter_rows()) {
        if word.is_empty() || word.chars().any(char::is_whitespace) {
            return Err(EmbeddingError::UnwritableWord(word.clone()));
        }
        out.write_all(word.as_bytes())?;
        for v in row {
            write!(out, " {v:.6}")?;
        }
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn save_embeddings(vectors: &WordVectors, path: impl AsRef<Path>) -> Result<(), EmbeddingError> {
    write_embeddings(vectors, File::create(path)?)
}

fn parse_error(line: usize, message: impl Into<String>) -> EmbeddingError {
    EmbeddingError::Parse { line, message: message.into() }
}

pub fn read_embeddings<R: Read>(reader: R) -> Result<WordVectors, EmbeddingError> {
    let mut lines = BufReader::new(reader).lines();
    let header = lines.next().ok_or_else(|| parse_error(1, "missing header"))??;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let [n, h] = fields.as_slice() else {
        return Err(parse_error(1, format!("expected header \"n h\", found {header:?}")));
    };
    let n: usize = n.parse().map_err(|_| parse_error(1, format!("bad word count {n:?}")))?;
    let h: usize = h.parse().map_err(|_| parse_error(1, format!("bad dimension {h:?}")))?;

    let mut words = Vec::with_capacity(n);
    let mut seen = HashSet::with_capacity(n);
    let mut data = Vec::with_capacity(n * h);
    for (i, line) in lines.enumerate() {
        let line_no = i + 2;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        if words.len() == n {
            return Err(parse_error(line_no, format!("more rows than the {n} declared in the header")));
        }
        let mut parts = line.split_whitespace();
        let word = parts.next().expect("non-empty line has a field");
        let before = data.len();
        for value in parts {
            let v: f64 = value.parse().map_err(|_| parse_error(line_no, format!("bad value {value:?}")))?;
            if !v.is_finite() {
                return Err(parse_error(line_no, format!("non-finite value {value:?}")));
            }
            data.push(v);
        }
        let found = data.len() - before;
        if found != h {
            return Err(parse_error(line_no, format!("row {word:?} has {found} values, expected {h}")));
        }
        if !seen.insert(word.to_string()) {
            return Err(EmbeddingError::DuplicateWord { line: line_no, word: word.to_string() });
        }
        words.push(word.to_string());
    }
    if words.len() != n {
        return Err(parse_error(words.len() + 2, format!("expected {n} rows, found {}", words.len())));
    }
    Ok(WordVectors { words, vectors: Matrix::from_vec(n, h, data) })
}

pub fn load_embeddings(path: impl AsRef<Path>) -> Result<WordVectors, EmbeddingError> {
    read_embeddings(File::open(path)?)
}
