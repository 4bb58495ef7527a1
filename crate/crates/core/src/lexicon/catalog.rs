//! Seed catalog: category specs loaded from tab-separated data files.
//!
//! Topical file, one category per line:
//!
//! ```text
//! name<TAB>seed, seed, ...
//! ```
//!
//! Emotion hierarchy file, one emotion per line, `-` for a root emotion:
//!
//! ```text
//! emotion<TAB>parent<TAB>defining term, defining term, ...
//! ```
//!
//! Blank lines and lines starting with `#` are ignored.

use std::collections::HashSet;
use std::path::Path;

use super::{CategorySpec, LexiconError};

const BUILTIN_TOPICAL: &str = include_str!("../../data/topical.tsv");
const BUILTIN_EMOTIONS: &str = include_str!("../../data/emotions.tsv");

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CatalogSource {
    Topical,
    Emotion { parent: Option<String> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CatalogEntry {
    pub spec: CategorySpec,
    pub source: CatalogSource,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SeedCatalog {
    entries: Vec<CatalogEntry>,
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
}

fn parse_seeds(line: usize, field: &str) -> Result<Vec<String>, LexiconError> {
    let seeds: Vec<String> = field.split(',').map(|s| s.trim().to_string()).collect();
    if seeds.iter().any(String::is_empty) {
        return Err(LexiconError::Catalog { line, message: "empty seed term".into() });
    }
    Ok(seeds)
}

impl SeedCatalog {
    /// The categories shipped with the crate.
    pub fn builtin() -> Self {
        let mut catalog = SeedCatalog::default();
        catalog.add_topical(BUILTIN_TOPICAL).expect("builtin topical catalog is valid");
        catalog.add_emotions(BUILTIN_EMOTIONS).expect("builtin emotion catalog is valid");
        catalog
    }

    pub fn entries(&self) -> &[CatalogEntry] {
        &self.entries
    }

    pub fn get(&self, name: &str) -> Option<&CatalogEntry> {
        self.entries.iter().find(|e| e.spec.name == name)
    }

    pub fn specs(&self) -> impl Iterator<Item = &CategorySpec> {
        self.entries.iter().map(|e| &e.spec)
    }

    pub fn add_topical(&mut self, text: &str) -> Result<(), LexiconError> {
        for (line, content) in content_lines(text) {
            let fields: Vec<&str> = content.split('\t').collect();
            let [name, seeds] = fields.as_slice() else {
                return Err(LexiconError::Catalog { line, message: "expected name<TAB>seeds".into() });
            };
            self.push(line, name, parse_seeds(line, seeds)?, CatalogSource::Topical)?;
        }
        Ok(())
    }

    pub fn add_emotions(&mut self, text: &str) -> Result<(), LexiconError> {
        for (line, content) in content_lines(text) {
            let fields: Vec<&str> = content.split('\t').collect();
            let [name, parent, seeds] = fields.as_slice() else {
                return Err(LexiconError::Catalog { line, message: "expected emotion<TAB>parent<TAB>terms".into() });
            };
            let parent = match parent.trim() {
                "" | "-" => None,
                p => Some(p.to_string()),
            };
            self.push(line, name, parse_seeds(line, seeds)?, CatalogSource::Emotion { parent })?;
        }
        Ok(())
    }

    pub fn add_topical_file(&mut self, path: impl AsRef<Path>) -> Result<(), LexiconError> {
        self.add_topical(&std::fs::read_to_string(path)?)
    }

    pub fn add_emotions_file(&mut self, path: impl AsRef<Path>) -> Result<(), LexiconError> {
        self.add_emotions(&std::fs::read_to_string(path)?)
    }

    fn push(&mut self, line: usize, name: &str, seeds: Vec<String>, source: CatalogSource) -> Result<(), LexiconError> {
        let name = name.trim();
        if self.get(name).is_some() {
            return Err(LexiconError::Catalog { line, message: format!("duplicate category {name:?}") });
        }
        let spec = CategorySpec::new(name, seeds);
        spec.validate().map_err(|e| LexiconError::Catalog { line, message: e.to_string() })?;
        self.entries.push(CatalogEntry { spec, source });
        Ok(())
    }

    pub fn names(&self) -> HashSet<&str> {
        self.entries.iter().map(|e| e.spec.name.as_str()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_entries() {
        let catalog = SeedCatalog::builtin();
        let seeds = |name: &str| catalog.get(name).unwrap().spec.seeds.clone();
        assert_eq!(seeds("death"), ["bury", "coffin", "kill", "corpse"]);
        assert_eq!(seeds("lust"), ["desire", "passion", "infatuation"]);
        assert_eq!(seeds("clothing"), ["shirt", "hat"]);
        assert_eq!(seeds("social media"), ["facebook", "twitter"]);
        assert_eq!(seeds("spatial"), ["big", "small", "circular"]);
        assert_eq!(
            catalog.get("lust").unwrap().source,
            CatalogSource::Emotion { parent: Some("love".into()) }
        );
        assert_eq!(catalog.names().len(), catalog.entries().len());
    }

    #[test]
    fn rejects_duplicates_and_bad_lines() {
        let mut catalog = SeedCatalog::default();
        let err = catalog.add_topical("a\tx, y\na\tz\n").unwrap_err();
        assert!(matches!(err, LexiconError::Catalog { line: 2, .. }));

        let mut catalog = SeedCatalog::default();
        assert!(matches!(catalog.add_topical("no tab here"), Err(LexiconError::Catalog { line: 1, .. })));
        assert!(matches!(catalog.add_topical("x\ta,,b"), Err(LexiconError::Catalog { line: 1, .. })));
        assert!(matches!(catalog.add_emotions("joy\tx"), Err(LexiconError::Catalog { line: 1, .. })));
    }

    #[test]
    fn root_emotions_have_no_parent() {
        let mut catalog = SeedCatalog::default();
        catalog.add_emotions("# comment\n\nlove\t-\taffection, desire\n").unwrap();
        assert_eq!(catalog.entries()[0].source, CatalogSource::Emotion { parent: None });
    }
}
