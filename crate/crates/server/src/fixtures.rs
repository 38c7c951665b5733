//! Recorded model responses.
//!
//! ```text
//! <fixture>/image.png
//! <fixture>/depth.dsd
//! <fixture>/camera.json
//! <fixture>/programs.json              {"programs": [{"program", "rationale"}]}
//! <fixture>/masks/<sha256(prompt)>.png
//! <fixture>/landmarks/<sha256(mask)>.json  {"skeleton": [...], "face": [...]}
//! <fixture>/manifest.json
//! ```
//!
//! A library is either one fixture directory or a directory of them. The
//! fixture for a request is found by the SHA-256 of the image file bytes or,
//! failing that, of the decoded pixels.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use strata_core::unproject::Landmark2D;
use strata_core::{AnchorKind, DepthScene};

use crate::sha256_hex;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const PROGRAMS_FILE: &str = "programs.json";
pub const MASKS_DIR: &str = "masks";
pub const LANDMARKS_DIR: &str = "landmarks";

/// What a fixture is expected to produce.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub name: String,
    pub image_sha256: String,
    pub expected_anchor_count: usize,
    pub expected_kinds: Vec<AnchorKind>,
    /// Diagnostic kind names expected from failing programs, in program order.
    #[serde(default)]
    pub expected_diagnostics: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratedProgram {
    pub program: String,
    pub rationale: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProgramsFile {
    pub programs: Vec<GeneratedProgram>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LandmarksFile {
    #[serde(default)]
    pub skeleton: Vec<Landmark2D>,
    #[serde(default)]
    pub face: Vec<Landmark2D>,
}

#[derive(Debug, thiserror::Error)]
pub enum FixtureError {
    #[error("no fixture recorded for {0}")]
    Missing(String),
    #[error("fixture file {path}: {message}")]
    Corrupt { path: String, message: String },
    #[error("fixture I/O on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub(crate) fn read_file(path: &Path) -> Result<Vec<u8>, FixtureError> {
    fs::read(path).map_err(|source| {
        if source.kind() == std::io::ErrorKind::NotFound {
            FixtureError::Missing(path.display().to_string())
        } else {
            FixtureError::Io {
                path: path.display().to_string(),
                source,
            }
        }
    })
}

pub(crate) fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, FixtureError> {
    serde_json::from_slice(&read_file(path)?).map_err(|e| FixtureError::Corrupt {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

/// Hash of the decoded pixels, used when only the scene is at hand.
pub fn pixel_key(image: &image::RgbaImage) -> String {
    let mut bytes = Vec::with_capacity(8 + image.as_raw().len());
    bytes.extend_from_slice(&image.width().to_le_bytes());
    bytes.extend_from_slice(&image.height().to_le_bytes());
    bytes.extend_from_slice(image.as_raw());
    sha256_hex(&bytes)
}

pub fn mask_file_name(prompt: &str) -> String {
    format!("{}.png", sha256_hex(prompt.as_bytes()))
}

pub fn landmark_file_name(mask: &strata_core::Mask) -> String {
    format!("{}.json", sha256_hex(&mask.canonical_bytes()))
}

/// An indexed set of fixture directories.
#[derive(Debug, Clone)]
pub struct FixtureLibrary {
    by_file: HashMap<String, PathBuf>,
    by_pixels: HashMap<String, PathBuf>,
    dirs: Vec<PathBuf>,
}

impl FixtureLibrary {
    /// Indexes `root` if it is a fixture, otherwise each fixture directly
    /// inside it.
    pub fn open(root: &Path) -> Result<Self, FixtureError> {
        let mut dirs = Vec::new();
        if root.join(strata_core::scene::IMAGE_FILE).exists() {
            dirs.push(root.to_path_buf());
        } else {
            let entries = fs::read_dir(root).map_err(|source| FixtureError::Io {
                path: root.display().to_string(),
                source,
            })?;
            for e in entries.flatten() {
                let p = e.path();
                if p.join(strata_core::scene::IMAGE_FILE).exists() {
                    dirs.push(p);
                }
            }
            dirs.sort();
        }
        if dirs.is_empty() {
            return Err(FixtureError::Missing(format!("fixtures under {}", root.display())));
        }
        let mut by_file = HashMap::new();
        let mut by_pixels = HashMap::new();
        for d in &dirs {
            let path = d.join(strata_core::scene::IMAGE_FILE);
            let bytes = read_file(&path)?;
            let img = image::load_from_memory(&bytes).map_err(|e| FixtureError::Corrupt {
                path: path.display().to_string(),
                message: e.to_string(),
            })?;
            by_file.insert(sha256_hex(&bytes), d.clone());
            by_pixels.insert(pixel_key(&img.into_rgba8()), d.clone());
        }
        Ok(Self { by_file, by_pixels, dirs })
    }

    pub fn dirs(&self) -> &[PathBuf] {
        &self.dirs
    }

    pub fn for_image_bytes(&self, bytes: &[u8], decoded: &image::RgbaImage) -> Result<&Path, FixtureError> {
        self.by_file
            .get(&sha256_hex(bytes))
            .or_else(|| self.by_pixels.get(&pixel_key(decoded)))
            .map(PathBuf::as_path)
            .ok_or_else(|| FixtureError::Missing(format!("image {}", sha256_hex(bytes))))
    }

    pub fn for_scene(&self, scene: &DepthScene) -> Result<&Path, FixtureError> {
        let key = pixel_key(&scene.image);
        self.by_pixels
            .get(&key)
            .map(PathBuf::as_path)
            .ok_or_else(|| FixtureError::Missing(format!("scene with pixel hash {key}")))
    }
}

pub fn load_manifest(dir: &Path) -> Result<Manifest, FixtureError> {
    read_json(&dir.join(MANIFEST_FILE))
}
