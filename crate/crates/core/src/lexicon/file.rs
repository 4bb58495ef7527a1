//! Category documents as JSON, one file per category.

use std::collections::HashSet;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Category, LexiconError};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize)]
struct Outgoing<'a> {
    schema_version: u32,
    #[serde(flatten)]
    category: &'a Category,
}

#[derive(Deserialize)]
struct Incoming {
    schema_version: u32,
    #[serde(flatten)]
    category: Category,
}

fn schema(field: impl Into<String>, message: impl Into<String>) -> LexiconError {
    LexiconError::Schema { field: field.into(), message: message.into() }
}

fn validate(category: &Category) -> Result<(), LexiconError> {
    category.spec.validate().map_err(|e| schema("spec", e.to_string()))?;
    if category.members.len() > category.spec.max_terms {
        return Err(schema(
            "members",
            format!("{} members exceed max_terms {}", category.members.len(), category.spec.max_terms),
        ));
    }
    let mut seen = HashSet::new();
    for (list, terms) in [("members", &category.members), ("removed", &category.removed)] {
        for (i, term) in terms.iter().enumerate() {
            let field = format!("{list}[{i}]");
            if term.word.is_empty() {
                return Err(schema(format!("{field}.word"), "empty word"));
            }
            if !seen.insert(term.word.as_str()) {
                return Err(schema(format!("{field}.word"), format!("duplicate word {:?}", term.word)));
            }
            if !term.similarity.is_finite() || term.similarity.abs() > 1.0 + 1e-9 {
                return Err(schema(format!("{field}.score"), format!("{} is not a cosine similarity", term.similarity)));
            }
        }
    }
    for (i, pair) in category.members.windows(2).enumerate() {
        if pair[0].similarity < pair[1].similarity {
            return Err(schema(format!("members[{}].score", i + 1), "members are not sorted by score"));
        }
    }
    for (i, member) in category.members.iter().enumerate() {
        if member.similarity < category.spec.threshold && !category.spec.is_seed(&member.word) {
            return Err(schema(
                format!("members[{i}].score"),
                format!("{} is below threshold {}", member.similarity, category.spec.threshold),
            ));
        }
    }
    Ok(())
}

pub fn write_category<W: Write>(category: &Category, mut writer: W) -> Result<(), LexiconError> {
    serde_json::to_writer_pretty(&mut writer, &Outgoing { schema_version: SCHEMA_VERSION, category })?;
    writer.write_all(b"\n")?;
    Ok(())
}

pub fn read_category<R: Read>(reader: R) -> Result<Category, LexiconError> {
    let value: serde_json::Value = serde_json::from_reader(reader)?;
    let version = value
        .get("schema_version")
        .ok_or_else(|| schema("schema_version", "missing"))?;
    if version.as_u64() != Some(SCHEMA_VERSION as u64) {
        return Err(schema("schema_version", format!("unsupported version {version}")));
    }
    let incoming: Incoming = serde_json::from_value(value).map_err(|e| schema("category", e.to_string()))?;
    debug_assert_eq!(incoming.schema_version, SCHEMA_VERSION);
    validate(&incoming.category)?;
    Ok(incoming.category)
}

pub fn save_category(category: &Category, path: impl AsRef<Path>) -> Result<(), LexiconError> {
    let mut buf = Vec::new();
    write_category(category, &mut buf)?;
    std::fs::write(path, buf)?;
    Ok(())
}

pub fn load_category(path: impl AsRef<Path>) -> Result<Category, LexiconError> {
    read_category(File::open(path)?)
}

/// Loads every `*.json` file directly inside `dir`, sorted by file name.
pub fn load_category_dir(dir: impl AsRef<Path>) -> Result<Vec<Category>, LexiconError> {
    let mut paths: Vec<_> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    paths
        .iter()
        .map(|p| {
            load_category(p).map_err(|e| match e {
                LexiconError::Schema { field, message } => {
                    LexiconError::Schema { field: format!("{}: {field}", p.display()), message }
                }
                other => other,
            })
        })
        .collect()
}
