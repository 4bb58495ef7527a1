//! Categories persisted as one JSON file each, plus the last exported task
//! set per category under `.tasks/`.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use axum::http::StatusCode;
use tokio::sync::{Mutex as AsyncMutex, OwnedMutexGuard};

use seedlex_core::crowd::{export_tasks, read_tasks, slug, LabelTask};
use seedlex_core::lexicon::{load_category, load_category_dir, write_category, Category};

use crate::error::ApiError;

#[derive(Debug)]
pub struct CategoryStore {
    dir: PathBuf,
    locks: Mutex<HashMap<String, Arc<AsyncMutex<()>>>>,
}

fn write_atomically(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)
}

impl CategoryStore {
    pub fn open(dir: impl Into<PathBuf>) -> std::io::Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(dir.join(".tasks"))?;
        Ok(CategoryStore { dir, locks: Mutex::new(HashMap::new()) })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(format!("{}.json", slug(name)))
    }

    fn tasks_path(&self, name: &str) -> PathBuf {
        self.dir.join(".tasks").join(format!("{}.csv", slug(name)))
    }

    /// Serializes writers of one category name. Readers never lock.
    pub async fn lock(&self, name: &str) -> OwnedMutexGuard<()> {
        let lock = {
            let mut locks = self.locks.lock().unwrap_or_else(|e| e.into_inner());
            locks.entry(slug(name)).or_default().clone()
        };
        lock.lock_owned().await
    }

    pub fn get(&self, name: &str) -> Result<Option<Category>, ApiError> {
        let path = self.path(name);
        if !path.exists() {
            return Ok(None);
        }
        let category = load_category(&path).map_err(|e| ApiError::internal(format!("{}: {e}", path.display())))?;
        Ok((category.name() == name).then_some(category))
    }

    pub fn list(&self) -> Result<Vec<Category>, ApiError> {
        load_category_dir(&self.dir).map_err(|e| ApiError::internal(e.to_string()))
    }

    /// Stores `category` with the next version number. When
    /// `expected_version` is given it must equal the stored version (0 when
    /// nothing is stored yet). Callers hold [`CategoryStore::lock`].
    pub fn put(&self, mut category: Category, expected_version: Option<u64>) -> Result<Category, ApiError> {
        let path = self.path(category.name());
        let current = if path.exists() {
            let stored = load_category(&path).map_err(|e| ApiError::internal(e.to_string()))?;
            if stored.name() != category.name() {
                return Err(ApiError::new(
                    StatusCode::CONFLICT,
                    "name_conflict",
                    format!("{:?} and {:?} map to the same file", stored.name(), category.name()),
                ));
            }
            stored.version
        } else {
            0
        };
        if let Some(expected) = expected_version {
            if expected != current {
                return Err(ApiError::new(
                    StatusCode::CONFLICT,
                    "version_conflict",
                    format!("expected version {expected}, stored version is {current}"),
                ));
            }
        }
        category.version = current + 1;
        let mut buf = Vec::new();
        write_category(&category, &mut buf).map_err(|e| ApiError::internal(e.to_string()))?;
        write_atomically(&path, &buf)?;
        Ok(category)
    }

    pub fn save_tasks(&self, name: &str, tasks: &[LabelTask]) -> Result<Vec<u8>, ApiError> {
        let mut buf = Vec::new();
        export_tasks(tasks, &mut buf)?;
        write_atomically(&self.tasks_path(name), &buf)?;
        Ok(buf)
    }

    pub fn load_tasks(&self, name: &str) -> Result<Option<Vec<LabelTask>>, ApiError> {
        let path = self.tasks_path(name);
        if !path.exists() {
            return Ok(None);
        }
        let tasks = read_tasks(fs::File::open(&path)?).map_err(|e| ApiError::internal(e.to_string()))?;
        Ok(Some(tasks))
    }

    pub fn clear_tasks(&self, name: &str) -> Result<(), ApiError> {
        match fs::remove_file(self.tasks_path(name)) {
            Err(e) if e.kind() != std::io::ErrorKind::NotFound => Err(e.into()),
            _ => Ok(()),
        }
    }
}
