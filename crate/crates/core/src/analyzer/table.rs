//! Tabular analysis output: one row per (document, category).

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::AnalysisResult;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub doc_id: String,
    pub category: String,
    pub raw: u64,
    pub normalized: f64,
    pub total_tokens: u64,
}

pub fn rows_for<'a>(doc_id: &'a str, result: &'a AnalysisResult) -> impl Iterator<Item = ResultRow> + 'a {
    let doc_id = doc_id.to_string();
    result.per_category.iter().map(move |count| ResultRow {
        doc_id: doc_id.clone(),
        category: count.category.clone(),
        raw: count.raw,
        normalized: count.normalized,
        total_tokens: result.total_tokens,
    })
}

pub fn write_csv<W: Write>(writer: W, rows: &[ResultRow]) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    for row in rows {
        out.serialize(row)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(reader: R) -> csv::Result<Vec<ResultRow>> {
    csv::Reader::from_reader(reader).deserialize().collect()
}

/// A document listed in a manifest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub doc_id: String,
    pub path: String,
}

/// Reads a document manifest with columns `doc_id,path`.
pub fn read_manifest<R: Read>(reader: R) -> csv::Result<Vec<ManifestEntry>> {
    csv::Reader::from_reader(reader).deserialize().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analyzer::{analyze, CategoryMatcher};

    #[test]
    fn csv_round_trip() {
        let matcher = CategoryMatcher::from_word_lists([
            ("war".to_string(), vec!["war".to_string()]),
            ("peace".to_string(), vec!["peace".to_string()]),
        ]);
        let result = analyze("war, war and peace", &matcher);
        let rows: Vec<_> = rows_for("doc one", &result).collect();
        let mut buf = Vec::new();
        write_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(
            text,
            "doc_id,category,raw,normalized,total_tokens\ndoc one,war,2,0.5,4\ndoc one,peace,1,0.25,4\n"
        );
        assert_eq!(read_csv(buf.as_slice()).unwrap(), rows);
    }
}
