//! Depth-tested compositing of content layers over the input image.
//!
//! The framebuffer depth starts as the scene depth map (invalid pixels are
//! infinitely far), so the reconstructed scene occludes content exactly as an
//! invisible depth-only mesh would, without drawing one. Layers are drawn in
//! document order by a half-space triangle rasterizer with perspective-correct
//! attribute interpolation.

mod raster;

use image::{ImageFormat, RgbaImage};
use serde::{Deserialize, Serialize};

use crate::anchors::{build_surface_mesh, compose_layer_texture, default_tessellation};
use crate::geom::Vec3;
use crate::scene::{CameraError, DepthScene, PinholeCamera, SceneDocument};

pub use raster::{blend_over, Framebuffer, LayerDraw};

pub const DEFAULT_DEPTH_EPSILON: f64 = 1e-3;

/// `u = cx + fx·x/z`, `v = cy + fy·y/z`.
pub fn project_point(camera: &PinholeCamera, p: &Vec3) -> Result<(f64, f64, f64), CameraError> {
    camera.project(p)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Background {
    Image,
    SolidColor([u8; 4]),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenderSettings {
    pub depth_epsilon_rel: f64,
    pub supersample: u32,
    pub background: Background,
}

impl Default for RenderSettings {
    fn default() -> Self {
        Self {
            depth_epsilon_rel: DEFAULT_DEPTH_EPSILON,
            supersample: 1,
            background: Background::Image,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RenderError {
    #[error("depth_epsilon_rel must lie in [0, 0.1], got {0}")]
    Epsilon(f64),
    #[error("supersample must be between 1 and 8, got {0}")]
    Supersample(u32),
    #[error("layer '{layer}' references missing anchor '{anchor}'")]
    MissingAnchor { layer: String, anchor: String },
}

pub const MAX_SUPERSAMPLE: u32 = 8;

/// Renders every visible layer of `doc` over `scene`.
pub fn render_document(
    doc: &SceneDocument,
    scene: &DepthScene,
    settings: &RenderSettings,
) -> Result<RgbaImage, RenderError> {
    if !(0.0..=0.1).contains(&settings.depth_epsilon_rel) {
        return Err(RenderError::Epsilon(settings.depth_epsilon_rel));
    }
    let n = settings.supersample;
    if !(1..=MAX_SUPERSAMPLE).contains(&n) {
        return Err(RenderError::Supersample(n));
    }

    let mut draws = Vec::new();
    for layer in doc.layers.iter().filter(|l| l.visible) {
        let anchor = doc.anchor(&layer.anchor_id).ok_or_else(|| RenderError::MissingAnchor {
            layer: layer.id.clone(),
            anchor: layer.anchor_id.clone(),
        })?;
        draws.push(LayerDraw {
            mesh: build_surface_mesh(anchor, default_tessellation(anchor)),
            params: anchor.free_params.clone(),
            texture: compose_layer_texture(layer),
            double_sided: layer.double_sided,
        });
    }

    let mut fb = Framebuffer::from_scene(scene, settings.background, n);
    let camera = scene.camera.scaled(n);
    let near = scene.min_valid_depth().unwrap_or(1.0) * 1e-3;
    for d in &draws {
        fb.draw(&camera, d, settings.depth_epsilon_rel, near);
    }
    Ok(fb.resolve(n))
}

/// Deterministic 8-bit RGBA PNG encoding.
pub fn export_png(raster: &RgbaImage) -> Vec<u8> {
    crate::scene::encode_png(raster)
}

/// Inverse of [`export_png`].
pub fn decode_png(bytes: &[u8]) -> Result<RgbaImage, image::ImageError> {
    Ok(image::load_from_memory_with_format(bytes, ImageFormat::Png)?.into_rgba8())
}
