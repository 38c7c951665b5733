//! The reconstruction space: image, depth map and pinhole camera, plus the
//! document that aggregates anchors and content layers over a scene.
//!
//! Conventions used throughout the crate:
//!
//! * camera space is x right, y down (image v), z forward along the optical axis;
//! * depth is z-distance along the optical axis, in arbitrary (scale-free) units;
//! * pixel `(u, v)` has its centre at integer coordinates;
//! * pixels with `validity == false` are treated as infinitely far away.

mod container;
mod document;
pub mod dsd;

use std::fmt;

use image::RgbaImage;
use serde::{Deserialize, Serialize};

use crate::geom::Vec3;

pub use container::{
    depth_from_png16, encode_png, load_scene_dir, save_scene_dir, CameraFile, ContainerError,
    CAMERA_FILE, DEPTH_FILE, DEPTH_PNG_FILE, IMAGE_FILE,
};
pub use document::{DocumentError, Provenance, SceneDocument};

/// Vertical field of view used when intrinsics are not supplied.
pub const DEFAULT_VERTICAL_FOV_DEG: f64 = 55.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PinholeCamera {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: u32,
    pub height: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum CameraError {
    #[error("nonpositive depth {0}")]
    NonpositiveDepth(f64),
    #[error("point behind camera (z = {0})")]
    BehindCamera(f64),
}

impl PinholeCamera {
    /// Square pixels, principal point at the image centre, 55° vertical FOV.
    pub fn with_default_intrinsics(width: u32, height: u32) -> Self {
        let half_fov = (DEFAULT_VERTICAL_FOV_DEG / 2.0).to_radians();
        let f = (height as f64 / 2.0) / half_fov.tan();
        Self {
            fx: f,
            fy: f,
            cx: (width as f64 - 1.0) / 2.0,
            cy: (height as f64 - 1.0) / 2.0,
            width,
            height,
        }
    }

    /// Pixel plus z-depth to a camera-space point.
    pub fn unproject(&self, u: f64, v: f64, depth: f64) -> Result<Vec3, CameraError> {
        if !(depth > 0.0) {
            return Err(CameraError::NonpositiveDepth(depth));
        }
        Ok(Vec3::new(
            (u - self.cx) * depth / self.fx,
            (v - self.cy) * depth / self.fy,
            depth,
        ))
    }

    /// Camera-space point to `(u, v, z)`.
    pub fn project(&self, p: &Vec3) -> Result<(f64, f64, f64), CameraError> {
        if !(p.z > 0.0) {
            return Err(CameraError::BehindCamera(p.z));
        }
        Ok((self.cx + self.fx * p.x / p.z, self.cy + self.fy * p.y / p.z, p.z))
    }

    /// Unit-free ray direction through a pixel, normalised so that z = 1.
    pub fn ray(&self, u: f64, v: f64) -> Vec3 {
        Vec3::new((u - self.cx) / self.fx, (v - self.cy) / self.fy, 1.0)
    }

    /// The same camera rendered at `factor`× resolution.
    pub fn scaled(&self, factor: u32) -> Self {
        let s = factor as f64;
        Self {
            fx: self.fx * s,
            fy: self.fy * s,
            cx: (self.cx + 0.5) * s - 0.5,
            cy: (self.cy + 0.5) * s - 0.5,
            width: self.width * factor,
            height: self.height * factor,
        }
    }
}

/// Row-major scalar field of 32-bit depths.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthMap {
    pub width: u32,
    pub height: u32,
    pub data: Vec<f32>,
}

impl DepthMap {
    pub fn new(width: u32, height: u32, data: Vec<f32>) -> Self {
        Self { width, height, data }
    }

    pub fn filled(width: u32, height: u32, value: f32) -> Self {
        Self::new(width, height, vec![value; (width * height) as usize])
    }

    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> f32) -> Self {
        let mut data = Vec::with_capacity((width * height) as usize);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::new(width, height, data)
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> f32 {
        self.data[(y * self.width + x) as usize]
    }

    /// Bitwise equality, so NaN-encoded invalid pixels compare equal.
    pub fn bit_eq(&self, other: &Self) -> bool {
        self.width == other.width
            && self.height == other.height
            && self.data.len() == other.data.len()
            && self
                .data
                .iter()
                .zip(&other.data)
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

#[derive(Debug, Clone)]
pub struct DepthScene {
    pub image: RgbaImage,
    pub depth: DepthMap,
    pub camera: PinholeCamera,
    /// Row-major; `true` where depth is defined.
    pub validity: Vec<bool>,
}

impl DepthScene {
    /// Builds a scene whose validity mask marks every finite, positive depth.
    pub fn new(image: RgbaImage, depth: DepthMap, camera: PinholeCamera) -> Self {
        let validity = depth.data.iter().map(|d| d.is_finite() && *d > 0.0).collect();
        Self {
            image,
            depth,
            camera,
            validity,
        }
    }

    pub fn width(&self) -> u32 {
        self.depth.width
    }

    pub fn height(&self) -> u32 {
        self.depth.height
    }

    #[inline]
    pub fn is_valid(&self, x: u32, y: u32) -> bool {
        self.validity[(y * self.depth.width + x) as usize]
    }

    /// Depth at a pixel, or `None` where undefined.
    #[inline]
    pub fn depth_at(&self, x: u32, y: u32) -> Option<f64> {
        if self.is_valid(x, y) {
            Some(self.depth.get(x, y) as f64)
        } else {
            None
        }
    }

    /// Smallest valid depth, if any.
    pub fn min_valid_depth(&self) -> Option<f64> {
        self.depth
            .data
            .iter()
            .zip(&self.validity)
            .filter(|(_, v)| **v)
            .map(|(d, _)| *d as f64)
            .min_by(f64::total_cmp)
    }
}

/// One violated scene invariant.
#[derive(Debug, Clone, PartialEq)]
pub enum SceneIssue {
    DimensionMismatch {
        what: &'static str,
        expected: (u32, u32),
        found: (u32, u32),
    },
    NonpositiveDepth { x: u32, y: u32, value: f32 },
    NonfiniteDepth { x: u32, y: u32 },
    InvalidCamera(String),
}

impl fmt::Display for SceneIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SceneIssue::DimensionMismatch {
                what,
                expected,
                found,
            } => write!(
                f,
                "dimension mismatch: {what} is {}x{}, expected {}x{}",
                found.0, found.1, expected.0, expected.1
            ),
            SceneIssue::NonpositiveDepth { x, y, value } => {
                write!(f, "nonpositive depth at ({x},{y}): {value}")
            }
            SceneIssue::NonfiniteDepth { x, y } => write!(f, "nonfinite depth at ({x},{y})"),
            SceneIssue::InvalidCamera(msg) => write!(f, "invalid camera: {msg}"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub issues: Vec<SceneIssue>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.issues.is_empty()
    }

    pub fn messages(&self) -> Vec<String> {
        self.issues.iter().map(ToString::to_string).collect()
    }
}

/// Lists every violated scene invariant. An empty report means well-formed.
pub fn validate_scene(scene: &DepthScene) -> ValidationReport {
    let mut issues = Vec::new();
    let (w, h) = (scene.depth.width, scene.depth.height);
    let cam = &scene.camera;

    if scene.depth.data.len() != (w as usize) * (h as usize) {
        issues.push(SceneIssue::InvalidCamera(format!(
            "depth buffer holds {} values for {w}x{h}",
            scene.depth.data.len()
        )));
        return ValidationReport { issues };
    }
    let img = scene.image.dimensions();
    if img != (w, h) {
        issues.push(SceneIssue::DimensionMismatch {
            what: "image",
            expected: (w, h),
            found: img,
        });
    }
    if scene.validity.len() != scene.depth.data.len() {
        issues.push(SceneIssue::DimensionMismatch {
            what: "validity mask",
            expected: (w, h),
            found: (scene.validity.len() as u32, 1),
        });
    }
    if (cam.width, cam.height) != (w, h) {
        issues.push(SceneIssue::DimensionMismatch {
            what: "camera",
            expected: (w, h),
            found: (cam.width, cam.height),
        });
    }
    if !(cam.fx > 0.0) || !(cam.fy > 0.0) {
        issues.push(SceneIssue::InvalidCamera(format!(
            "focal lengths must be positive (fx={}, fy={})",
            cam.fx, cam.fy
        )));
    }
    if !(cam.cx >= 0.0 && cam.cx < cam.width as f64 && cam.cy >= 0.0 && cam.cy < cam.height as f64)
    {
        issues.push(SceneIssue::InvalidCamera(format!(
            "principal point ({}, {}) outside {}x{}",
            cam.cx, cam.cy, cam.width, cam.height
        )));
    }

    for y in 0..h {
        for x in 0..w {
            let i = (y * w + x) as usize;
            if !scene.validity.get(i).copied().unwrap_or(false) {
                continue;
            }
            let d = scene.depth.data[i];
            if !d.is_finite() {
                issues.push(SceneIssue::NonfiniteDepth { x, y });
            } else if d <= 0.0 {
                issues.push(SceneIssue::NonpositiveDepth { x, y, value: d });
            }
        }
    }
    ValidationReport { issues }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scene(w: u32, h: u32, depth: DepthMap) -> DepthScene {
        let camera = PinholeCamera {
            fx: 1.0,
            fy: 1.0,
            cx: 0.0,
            cy: 0.0,
            width: w,
            height: h,
        };
        let validity = vec![true; depth.data.len()];
        DepthScene {
            image: RgbaImage::new(w, h),
            depth,
            camera,
            validity,
        }
    }

    #[test]
    fn well_formed_scene_has_empty_report() {
        let s = scene(2, 2, DepthMap::filled(2, 2, 1.0));
        assert!(validate_scene(&s).is_empty());
    }

    #[test]
    fn negative_depth_is_reported() {
        let mut d = DepthMap::filled(2, 2, 1.0);
        d.data[3] = -0.5;
        let report = validate_scene(&scene(2, 2, d));
        assert_eq!(report.issues.len(), 1);
        assert!(report.messages()[0].contains("nonpositive depth at (1,1)"));
    }

    #[test]
    fn image_dimension_mismatch_is_reported() {
        let mut s = scene(4, 4, DepthMap::filled(4, 4, 1.0));
        s.image = RgbaImage::new(4, 5);
        let report = validate_scene(&s);
        assert!(report
            .issues
            .iter()
            .any(|i| matches!(i, SceneIssue::DimensionMismatch { what: "image", .. })));
    }

    #[test]
    fn invalid_pixels_are_not_checked() {
        let mut d = DepthMap::filled(2, 2, 1.0);
        d.data[0] = f32::NAN;
        let s = DepthScene::new(RgbaImage::new(2, 2), d, PinholeCamera::with_default_intrinsics(2, 2));
        assert!(!s.is_valid(0, 0));
        assert!(validate_scene(&s).is_empty());
    }

    #[test]
    fn default_camera_is_centred() {
        let c = PinholeCamera::with_default_intrinsics(640, 480);
        assert_eq!(c.cx, 319.5);
        assert_eq!(c.cy, 239.5);
        assert_eq!(c.fx, c.fy);
        let half = (240.0 / c.fy).atan().to_degrees();
        assert!((half - 27.5).abs() < 1e-9);
    }

    #[test]
    fn scaled_camera_maps_pixel_centres() {
        let c = PinholeCamera::with_default_intrinsics(10, 8);
        let s = c.scaled(2);
        let p = c.unproject(3.0, 4.0, 2.0).unwrap();
        let (u, v, _) = s.project(&p).unwrap();
        // pixel 3 spans [2.5, 3.5) → hi-res [5, 7), centre 6.5 - 0.5 = 6.5
        assert!((u - 6.5).abs() < 1e-9 && (v - 8.5).abs() < 1e-9, "{u} {v}");
    }
}
