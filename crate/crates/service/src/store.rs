//! On-disk persistence for collections and jobs.
//!
//! ```text
//! <data>/collections/<name>/manifest.json
//! <data>/collections/<name>/<n>.<ext>
//! <data>/jobs/<id>.json
//! <data>/tmp/
//! ```
//!
//! Collections are written to `tmp/` and renamed into place, so a collection
//! directory either holds every entry or does not exist. Collections are never
//! modified after creation.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::jobs::JobRecord;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntryMeta {
    /// Pairing key: the entry name without its extension.
    pub name: String,
    pub extension: String,
    /// File holding the raster, relative to the collection directory.
    pub file: String,
}

impl EntryMeta {
    pub fn file_name(&self) -> String {
        format!("{}.{}", self.name, self.extension)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollectionManifest {
    pub name: String,
    /// Seconds since the Unix epoch.
    pub created_at: u64,
    pub entries: Vec<EntryMeta>,
}

/// A decoded upload entry ready to be stored.
#[derive(Debug, Clone)]
pub struct NewEntry {
    pub name: String,
    pub extension: String,
    pub bytes: Vec<u8>,
}

#[derive(Debug, Clone)]
pub struct Store {
    root: PathBuf,
}

fn now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let tmp = path.with_extension("json.tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(tmp, path)
}

impl Store {
    pub fn open(root: impl Into<PathBuf>) -> io::Result<Self> {
        let root = root.into();
        for dir in ["collections", "jobs", "tmp"] {
            fs::create_dir_all(root.join(dir))?;
        }
        Ok(Self { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn collection_dir(&self, name: &str) -> PathBuf {
        self.root.join("collections").join(name)
    }

    pub fn create_collection(&self, name: &str, entries: &[NewEntry]) -> io::Result<CollectionManifest> {
        let staging = self.root.join("tmp").join(name);
        fs::create_dir_all(&staging)?;
        let result = (|| {
            let mut metas = Vec::with_capacity(entries.len());
            for (i, entry) in entries.iter().enumerate() {
                let file = format!("{i:05}.{}", sanitize_extension(&entry.extension));
                fs::write(staging.join(&file), &entry.bytes)?;
                metas.push(EntryMeta {
                    name: entry.name.clone(),
                    extension: entry.extension.clone(),
                    file,
                });
            }
            let manifest = CollectionManifest {
                name: name.to_owned(),
                created_at: now(),
                entries: metas,
            };
            fs::write(staging.join("manifest.json"), serde_json::to_vec_pretty(&manifest)?)?;
            fs::rename(&staging, self.collection_dir(name))?;
            Ok(manifest)
        })();
        if result.is_err() {
            let _ = fs::remove_dir_all(&staging);
        }
        result
    }

    /// `Ok(None)` when no collection has that name.
    pub fn collection(&self, name: &str) -> io::Result<Option<CollectionManifest>> {
        if !is_safe_name(name) {
            return Ok(None);
        }
        match fs::read(self.collection_dir(name).join("manifest.json")) {
            Ok(bytes) => Ok(Some(serde_json::from_slice(&bytes)?)),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(e),
        }
    }

    pub fn read_entry(&self, collection: &str, entry: &EntryMeta) -> io::Result<Vec<u8>> {
        fs::read(self.collection_dir(collection).join(&entry.file))
    }

    pub fn save_job(&self, job: &JobRecord) -> io::Result<()> {
        let path = self.root.join("jobs").join(format!("{}.json", job.id));
        write_atomic(&path, &serde_json::to_vec_pretty(job)?)
    }

    pub fn load_jobs(&self) -> io::Result<Vec<JobRecord>> {
        let mut jobs = Vec::new();
        for entry in fs::read_dir(self.root.join("jobs"))? {
            let path = entry?.path();
            if path.extension().is_some_and(|e| e == "json") {
                jobs.push(serde_json::from_slice(&fs::read(&path)?)?);
            }
        }
        jobs.sort_by(|a: &JobRecord, b| a.id.cmp(&b.id));
        Ok(jobs)
    }
}

/// Names used as single path components.
pub fn is_safe_name(name: &str) -> bool {
    !name.is_empty()
        && name != "."
        && name != ".."
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
}

fn sanitize_extension(ext: &str) -> String {
    let clean: String = ext
        .chars()
        .filter(char::is_ascii_alphanumeric)
        .take(8)
        .collect::<String>()
        .to_ascii_lowercase();
    if clean.is_empty() {
        "bin".to_owned()
    } else {
        clean
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn collection_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let store = Store::open(dir.path()).unwrap();
        let entries = vec![
            NewEntry {
                name: "page 1".into(),
                extension: "png".into(),
                bytes: vec![1, 2, 3],
            },
            NewEntry {
                name: "../evil".into(),
                extension: "../x".into(),
                bytes: vec![4],
            },
        ];
        let manifest = store.create_collection("abc", &entries).unwrap();
        assert_eq!(manifest.entries[1].file, "00001.x");
        assert_eq!(store.collection("abc").unwrap(), Some(manifest.clone()));
        assert_eq!(store.read_entry("abc", &manifest.entries[0]).unwrap(), [1, 2, 3]);
        assert!(store.collection("missing").unwrap().is_none());
        assert!(store.collection("../abc").unwrap().is_none());
        assert!(fs::read_dir(dir.path().join("tmp")).unwrap().next().is_none());
    }

    #[test]
    fn safe_names() {
        assert!(is_safe_name("a1-b_c.d"));
        for bad in ["", ".", "..", "a/b", "a\\b", "a b"] {
            assert!(!is_safe_name(bad), "{bad:?}");
        }
    }
}
