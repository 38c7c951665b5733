use std::collections::HashSet;

use image::RgbaImage;
use serde::{Deserialize, Serialize};

use crate::anchors::{apply_constrained_edit, AnchorError, ContentLayer, ParametricAnchor};

/// Where an anchor came from: the program that produced it and the
/// generator's one-line rationale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub anchor_id: String,
    pub program: String,
    pub rationale: String,
}

/// Anchors and content layers over one scene.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneDocument {
    pub id: String,
    pub scene_id: String,
    pub anchors: Vec<ParametricAnchor>,
    pub layers: Vec<ContentLayer>,
    pub provenance: Vec<Provenance>,
}

#[derive(Debug, thiserror::Error)]
pub enum DocumentError {
    #[error("unknown anchor '{0}'")]
    UnknownAnchor(String),
    #[error("unknown layer '{0}'")]
    UnknownLayer(String),
    #[error("duplicate anchor id '{0}'")]
    DuplicateAnchor(String),
    #[error("duplicate layer id '{0}'")]
    DuplicateLayer(String),
    #[error("layer '{layer}' references missing anchor '{anchor}'")]
    DanglingLayer { layer: String, anchor: String },
    #[error("layer '{0}' has empty content or invalid repeat/gap settings")]
    InvalidLayer(String),
    #[error(transparent)]
    Anchor(#[from] AnchorError),
    #[error("document JSON: {0}")]
    Json(#[from] serde_json::Error),
}

impl SceneDocument {
    pub fn new(id: impl Into<String>, scene_id: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            scene_id: scene_id.into(),
            anchors: Vec::new(),
            layers: Vec::new(),
            provenance: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<(), DocumentError> {
        let mut ids = HashSet::new();
        for a in &self.anchors {
            if !ids.insert(a.id.as_str()) {
                return Err(DocumentError::DuplicateAnchor(a.id.clone()));
            }
            a.check()?;
        }
        let mut lids = HashSet::new();
        for l in &self.layers {
            if !lids.insert(l.id.as_str()) {
                return Err(DocumentError::DuplicateLayer(l.id.clone()));
            }
            if !ids.contains(l.anchor_id.as_str()) {
                return Err(DocumentError::DanglingLayer {
                    layer: l.id.clone(),
                    anchor: l.anchor_id.clone(),
                });
            }
            if !l.is_valid() {
                return Err(DocumentError::InvalidLayer(l.id.clone()));
            }
        }
        Ok(())
    }

    pub fn anchor(&self, id: &str) -> Option<&ParametricAnchor> {
        self.anchors.iter().find(|a| a.id == id)
    }

    pub fn layer(&self, id: &str) -> Option<&ContentLayer> {
        self.layers.iter().find(|l| l.id == id)
    }

    pub fn layer_mut(&mut self, id: &str) -> Result<&mut ContentLayer, DocumentError> {
        self.layers
            .iter_mut()
            .find(|l| l.id == id)
            .ok_or_else(|| DocumentError::UnknownLayer(id.to_string()))
    }

    /// Anchors produced by extraction, i.e. not owned by a layer.
    pub fn suggested_anchors(&self) -> impl Iterator<Item = &ParametricAnchor> {
        self.anchors.iter().filter(|a| !a.id.contains('/'))
    }

    fn next_layer_number(&self) -> u32 {
        self.layers
            .iter()
            .filter_map(|l| l.id.strip_prefix('L')?.parse::<u32>().ok())
            .max()
            .map_or(1, |n| n + 1)
    }

    /// Places `content` on a private copy of `anchor_id`, so later edits to
    /// the layer leave the suggested anchor and other layers untouched.
    /// Returns the new layer id.
    pub fn add_layer(&mut self, anchor_id: &str, content: RgbaImage) -> Result<String, DocumentError> {
        let source = self
            .anchor(anchor_id)
            .ok_or_else(|| DocumentError::UnknownAnchor(anchor_id.to_string()))?
            .clone();
        let n = self.next_layer_number();
        let layer_id = format!("L{n}");
        let root = anchor_id.split('/').next().unwrap_or(anchor_id);
        let mut owned = source;
        owned.id = format!("{root}/{layer_id}");
        if self.anchor(&owned.id).is_some() {
            return Err(DocumentError::DuplicateAnchor(owned.id));
        }
        let layer = ContentLayer::new(layer_id.clone(), &owned, content);
        if !layer.is_valid() {
            return Err(DocumentError::InvalidLayer(layer_id));
        }
        if let Some(p) = self.provenance.iter().find(|p| p.anchor_id == anchor_id).cloned() {
            self.provenance.push(Provenance {
                anchor_id: owned.id.clone(),
                ..p
            });
        }
        self.anchors.push(owned);
        self.layers.push(layer);
        Ok(layer_id)
    }

    /// Constrained edit of the anchor a layer sits on.
    pub fn edit_layer_anchor(&mut self, layer_id: &str, param: &str, delta: f64) -> Result<(), DocumentError> {
        let anchor_id = self
            .layer(layer_id)
            .ok_or_else(|| DocumentError::UnknownLayer(layer_id.to_string()))?
            .anchor_id
            .clone();
        let slot = self
            .anchors
            .iter_mut()
            .find(|a| a.id == anchor_id)
            .ok_or_else(|| DocumentError::UnknownAnchor(anchor_id.clone()))?;
        *slot = apply_constrained_edit(slot, param, delta)?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String, DocumentError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self, DocumentError> {
        let doc: Self = serde_json::from_str(text)?;
        doc.validate()?;
        Ok(doc)
    }
}
