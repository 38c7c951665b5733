//! On-disk state: one directory per scene and one JSON file per document.
//!
//! ```text
//! <root>/scenes/<scene_id>/{image.png, depth.dsd, camera.json}
//! <root>/scenes/<scene_id>/pipeline.json   suggested anchors + last report
//! <root>/documents/<document_id>.json
//! ```
//!
//! Every file is replaced by write-to-temp then rename. Each document has a
//! reader/writer lock so edits to one document are serialized while reads
//! and other documents proceed.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use parking_lot::{Mutex, RwLock};
use serde::{Deserialize, Serialize};
use strata_core::scene::{load_scene_dir, save_scene_dir, DocumentError};
use strata_core::{DepthScene, SceneDocument};

use crate::pipeline::PipelineReport;

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("{0} not found")]
    NotFound(String),
    #[error("invalid id '{0}'")]
    BadId(String),
    #[error(transparent)]
    Document(#[from] DocumentError),
    #[error("store I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error("stored scene: {0}")]
    Scene(#[from] strata_core::scene::ContainerError),
    #[error("stored JSON: {0}")]
    Json(#[from] serde_json::Error),
}

/// Suggested anchors of a scene and the report of the run that made them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineRecord {
    pub document: SceneDocument,
    pub report: PipelineReport,
}

pub struct Store {
    root: PathBuf,
    scenes: Mutex<HashMap<String, Arc<DepthScene>>>,
    locks: Mutex<HashMap<String, Arc<RwLock<()>>>>,
    next_doc: AtomicU64,
}

fn check_id(id: &str) -> Result<(), StoreError> {
    let ok = !id.is_empty() && id.len() <= 128 && id.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'-' || b == b'_');
    if ok {
        Ok(())
    } else {
        Err(StoreError::BadId(id.to_string()))
    }
}

/// Replaces `path` with `bytes` atomically.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

impl Store {
    pub fn open(root: &Path) -> Result<Self, StoreError> {
        fs::create_dir_all(root.join("scenes"))?;
        fs::create_dir_all(root.join("documents"))?;
        let mut max = 0;
        for e in fs::read_dir(root.join("documents"))?.flatten() {
            let name = e.file_name().to_string_lossy().to_string();
            if let Some(n) = name.strip_prefix("d").and_then(|s| s.strip_suffix(".json")).and_then(|s| s.parse::<u64>().ok()) {
                max = max.max(n);
            }
        }
        Ok(Self {
            root: root.to_path_buf(),
            scenes: Mutex::new(HashMap::new()),
            locks: Mutex::new(HashMap::new()),
            next_doc: AtomicU64::new(max + 1),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn scene_dir(&self, scene_id: &str) -> PathBuf {
        self.root.join("scenes").join(scene_id)
    }

    fn document_path(&self, id: &str) -> PathBuf {
        self.root.join("documents").join(format!("{id}.json"))
    }

    /// Stores a scene unless one with this id already exists. Ids are
    /// content hashes, so an existing directory holds the same scene.
    pub fn put_scene(&self, scene_id: &str, scene: &DepthScene) -> Result<(), StoreError> {
        check_id(scene_id)?;
        let dir = self.scene_dir(scene_id);
        if !dir.exists() {
            let tmp = tempfile::TempDir::new_in(self.root.join("scenes"))?;
            save_scene_dir(scene, tmp.path())?;
            let staged = tmp.keep();
            if let Err(e) = fs::rename(&staged, &dir) {
                let _ = fs::remove_dir_all(&staged);
                if !dir.exists() {
                    return Err(e.into());
                }
            }
        }
        self.scenes.lock().remove(scene_id);
        Ok(())
    }

    pub fn scene(&self, scene_id: &str) -> Result<Arc<DepthScene>, StoreError> {
        check_id(scene_id)?;
        if let Some(s) = self.scenes.lock().get(scene_id) {
            return Ok(s.clone());
        }
        let dir = self.scene_dir(scene_id);
        if !dir.is_dir() {
            return Err(StoreError::NotFound(format!("scene '{scene_id}'")));
        }
        let scene = Arc::new(load_scene_dir(&dir)?);
        self.scenes.lock().insert(scene_id.to_string(), scene.clone());
        Ok(scene)
    }

    pub fn put_pipeline(&self, scene_id: &str, record: &PipelineRecord) -> Result<(), StoreError> {
        check_id(scene_id)?;
        let bytes = serde_json::to_vec_pretty(record)?;
        atomic_write(&self.scene_dir(scene_id).join("pipeline.json"), &bytes)?;
        Ok(())
    }

    pub fn pipeline(&self, scene_id: &str) -> Result<Option<PipelineRecord>, StoreError> {
        check_id(scene_id)?;
        let path = self.scene_dir(scene_id).join("pipeline.json");
        match fs::read(&path) {
            Ok(b) => Ok(Some(serde_json::from_slice(&b)?)),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(e.into()),
        }
    }

    fn lock_for(&self, id: &str) -> Arc<RwLock<()>> {
        self.locks.lock().entry(id.to_string()).or_default().clone()
    }

    /// A new document over a scene, seeded with the scene's suggested
    /// anchors.
    pub fn create_document(&self, scene_id: &str) -> Result<SceneDocument, StoreError> {
        self.scene(scene_id)?;
        let id = format!("d{}", self.next_doc.fetch_add(1, Ordering::SeqCst));
        let mut doc = SceneDocument::new(id.clone(), scene_id);
        if let Some(rec) = self.pipeline(scene_id)? {
            doc.anchors = rec.document.anchors;
            doc.provenance = rec.document.provenance;
        }
        let lock = self.lock_for(&id);
        let _w = lock.write();
        self.write_document(&doc)?;
        Ok(doc)
    }

    fn write_document(&self, doc: &SceneDocument) -> Result<(), StoreError> {
        doc.validate()?;
        atomic_write(&self.document_path(&doc.id), doc.to_json()?.as_bytes())?;
        Ok(())
    }

    fn read_unlocked(&self, id: &str) -> Result<SceneDocument, StoreError> {
        match fs::read_to_string(self.document_path(id)) {
            Ok(text) => Ok(SceneDocument::from_json(&text)?),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Err(StoreError::NotFound(format!("document '{id}'"))),
            Err(e) => Err(e.into()),
        }
    }

    pub fn document(&self, id: &str) -> Result<SceneDocument, StoreError> {
        check_id(id)?;
        let lock = self.lock_for(id);
        let _r = lock.read();
        self.read_unlocked(id)
    }

    /// Applies `edit` under the document's write lock. Nothing is written
    /// if `edit` fails or leaves the document invalid.
    pub fn update_document<T, E>(
        &self,
        id: &str,
        edit: impl FnOnce(&mut SceneDocument) -> Result<T, E>,
    ) -> Result<Result<(T, SceneDocument), E>, StoreError> {
        check_id(id)?;
        let lock = self.lock_for(id);
        let _w = lock.write();
        let mut doc = self.read_unlocked(id)?;
        match edit(&mut doc) {
            Ok(v) => {
                self.write_document(&doc)?;
                Ok(Ok((v, doc)))
            }
            Err(e) => Ok(Err(e)),
        }
    }
}
