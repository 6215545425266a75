//! Content-addressed response cache: one JSON-lines file per model.
//!
//! Writes go to a temp file which is renamed over the live one, so a
//! crash can never leave a torn cache. Entries are buffered and flushed
//! in small batches.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::LlmError;

#[derive(Serialize, Deserialize)]
struct Entry {
    key: String,
    response: String,
}

const FLUSH_EVERY: usize = 32;

/// A key → response store backed by a JSONL file.
pub struct DiskCache {
    path: PathBuf,
    state: Mutex<CacheState>,
}

struct CacheState {
    entries: HashMap<String, String>,
    dirty: usize,
}

impl DiskCache {
    /// Open (or create) the cache file `<dir>/<name>.jsonl`.
    pub fn open(dir: &Path, name: &str) -> Result<Self, LlmError> {
        std::fs::create_dir_all(dir)
            .map_err(|e| LlmError::CacheCorruption(format!("create {}: {e}", dir.display())))?;
        let path = dir.join(format!("{name}.jsonl"));
        let mut entries = HashMap::new();
        if path.exists() {
            let text = std::fs::read_to_string(&path)
                .map_err(|e| LlmError::CacheCorruption(format!("read {}: {e}", path.display())))?;
            for (i, line) in text.lines().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                let entry: Entry = serde_json::from_str(line).map_err(|e| {
                    LlmError::CacheCorruption(format!("{}:{}: {e}", path.display(), i + 1))
                })?;
                entries.insert(entry.key, entry.response);
            }
        }
        Ok(DiskCache {
            path,
            state: Mutex::new(CacheState { entries, dirty: 0 }),
        })
    }

    pub fn get(&self, key: &str) -> Option<String> {
        self.state.lock().unwrap().entries.get(key).cloned()
    }

    pub fn len(&self) -> usize {
        self.state.lock().unwrap().entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn put(&self, key: &str, response: &str) -> Result<(), LlmError> {
        let mut state = self.state.lock().unwrap();
        if state
            .entries
            .insert(key.to_string(), response.to_string())
            .is_none()
        {
            state.dirty += 1;
        }
        if state.dirty >= FLUSH_EVERY {
            self.write_locked(&mut state)?;
        }
        Ok(())
    }

    pub fn flush(&self) -> Result<(), LlmError> {
        let mut state = self.state.lock().unwrap();
        if state.dirty > 0 {
            self.write_locked(&mut state)?;
        }
        Ok(())
    }

    fn write_locked(&self, state: &mut CacheState) -> Result<(), LlmError> {
        let mut keys: Vec<&String> = state.entries.keys().collect();
        keys.sort();
        let mut body = String::new();
        for key in keys {
            let entry = Entry {
                key: key.clone(),
                response: state.entries[key].clone(),
            };
            body.push_str(&serde_json::to_string(&entry).unwrap());
            body.push('\n');
        }
        let tmp = self.path.with_extension("jsonl.tmp");
        std::fs::write(&tmp, body)
            .map_err(|e| LlmError::CacheCorruption(format!("write {}: {e}", tmp.display())))?;
        std::fs::rename(&tmp, &self.path)
            .map_err(|e| LlmError::CacheCorruption(format!("rename {}: {e}", tmp.display())))?;
        state.dirty = 0;
        Ok(())
    }
}

impl Drop for DiskCache {
    fn drop(&mut self) {
        let _ = self.flush();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_across_reopen() {
        let dir = tempfile::tempdir().unwrap();
        {
            let cache = DiskCache::open(dir.path(), "chat-test").unwrap();
            cache.put("k1", "v1").unwrap();
            cache.put("k2", "v2").unwrap();
            cache.flush().unwrap();
        }
        let cache = DiskCache::open(dir.path(), "chat-test").unwrap();
        assert_eq!(cache.get("k1").as_deref(), Some("v1"));
        assert_eq!(cache.get("k2").as_deref(), Some("v2"));
        assert_eq!(cache.get("k3"), None);
        assert_eq!(cache.len(), 2);
    }

    #[test]
    fn corrupt_line_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("chat-bad.jsonl");
        std::fs::write(&path, "not json\n").unwrap();
        assert!(matches!(
            DiskCache::open(dir.path(), "chat-bad"),
            Err(LlmError::CacheCorruption(_))
        ));
    }
}
