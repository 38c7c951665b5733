//! Depth pixels to camera-space points: single pixels, masked selections, and
//! subpixel landmarks.

use serde::{Deserialize, Serialize};

use crate::geom::Vec3;
#[cfg(feature = "parallel")]
use crate::par::*;
use crate::scene::{CameraError, DepthScene, PinholeCamera};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum UnprojectError {
    #[error("nonpositive depth {0}")]
    NonpositiveDepth(f64),
    #[error("mask selects no valid-depth pixels")]
    EmptySelection,
    #[error("mask is {found:?} but scene is {expected:?}")]
    MaskDimensions { expected: (u32, u32), found: (u32, u32) },
    #[error("no landmark has valid depth in its neighbourhood")]
    AllLandmarksInvalid,
    #[error("landmark {name} at ({u}, {v}) is outside the image")]
    LandmarkOutOfBounds { name: String, u: f64, v: f64 },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    pub points: Vec<Vec3>,
    /// Pixel each point was unprojected from, parallel to `points`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_pixels: Option<Vec<[u32; 2]>>,
}

impl PointCloud {
    pub fn from_points(points: Vec<Vec3>) -> Self {
        Self {
            points,
            source_pixels: None,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Keeps the points at `indices` (and their source pixels).
    pub fn select(&self, indices: &[usize]) -> Self {
        Self {
            points: indices.iter().map(|&i| self.points[i]).collect(),
            source_pixels: self
                .source_pixels
                .as_ref()
                .map(|px| indices.iter().map(|&i| px[i]).collect()),
        }
    }

    /// Median z of the cloud (upper median for even counts).
    pub fn median_depth(&self) -> f64 {
        let mut z: Vec<f64> = self.points.iter().map(|p| p.z).collect();
        let mid = z.len() / 2;
        let (_, m, _) = z.select_nth_unstable_by(mid, f64::total_cmp);
        *m
    }
}

/// Binary selection over the scene raster.
#[derive(Debug, Clone, PartialEq)]
pub struct Mask {
    pub width: u32,
    pub height: u32,
    /// Row-major.
    pub bitmap: Vec<bool>,
    pub prompt: String,
}

impl Mask {
    pub fn new(width: u32, height: u32, bitmap: Vec<bool>, prompt: impl Into<String>) -> Self {
        assert_eq!(bitmap.len(), (width * height) as usize, "mask size");
        Self {
            width,
            height,
            bitmap,
            prompt: prompt.into(),
        }
    }

    pub fn from_fn(
        width: u32,
        height: u32,
        prompt: impl Into<String>,
        mut f: impl FnMut(u32, u32) -> bool,
    ) -> Self {
        let mut bitmap = Vec::with_capacity((width * height) as usize);
        for y in 0..height {
            for x in 0..width {
                bitmap.push(f(x, y));
            }
        }
        Self::new(width, height, bitmap, prompt)
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> bool {
        self.bitmap[(y * self.width + x) as usize]
    }

    pub fn count(&self) -> usize {
        self.bitmap.iter().filter(|b| **b).count()
    }

    /// Canonical byte encoding used for hashing: `"MASK"`, LE width, LE
    /// height, then one byte (0 or 1) per pixel.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(12 + self.bitmap.len());
        out.extend_from_slice(b"MASK");
        out.extend_from_slice(&self.width.to_le_bytes());
        out.extend_from_slice(&self.height.to_le_bytes());
        out.extend(self.bitmap.iter().map(|b| *b as u8));
        out
    }

    /// Decodes a mask from an image: any nonzero luma (or alpha-weighted
    /// luma for RGBA) pixel is selected.
    pub fn from_image(img: &image::DynamicImage, prompt: impl Into<String>) -> Self {
        let luma = img.to_luma_alpha8();
        let (w, h) = luma.dimensions();
        let bitmap = luma.pixels().map(|p| p.0[0] > 0 && p.0[1] > 0).collect();
        Self::new(w, h, bitmap, prompt)
    }

    pub fn to_image(&self) -> image::GrayImage {
        image::GrayImage::from_fn(self.width, self.height, |x, y| {
            image::Luma([if self.get(x, y) { 255 } else { 0 }])
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Landmark2D {
    pub name: String,
    pub u: f64,
    pub v: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Landmark3D {
    pub name: String,
    pub position: Vec3,
}

/// Landmark names understood by the skeleton frame (33-point body pose).
pub const POSE_LANDMARKS: [&str; 33] = [
    "nose",
    "left_eye_inner",
    "left_eye",
    "left_eye_outer",
    "right_eye_inner",
    "right_eye",
    "right_eye_outer",
    "left_ear",
    "right_ear",
    "mouth_left",
    "mouth_right",
    "left_shoulder",
    "right_shoulder",
    "left_elbow",
    "right_elbow",
    "left_wrist",
    "right_wrist",
    "left_pinky",
    "right_pinky",
    "left_index",
    "right_index",
    "left_thumb",
    "right_thumb",
    "left_hip",
    "right_hip",
    "left_knee",
    "right_knee",
    "left_ankle",
    "right_ankle",
    "left_heel",
    "right_heel",
    "left_foot_index",
    "right_foot_index",
];

/// Landmark names understood by the face frame.
pub const FACE_LANDMARKS: [&str; 9] = [
    "left_eye",
    "right_eye",
    "nose_tip",
    "chin",
    "left_ear",
    "right_ear",
    "forehead",
    "mouth_left",
    "mouth_right",
];

/// `x = (u − cx)·d/fx`, `y = (v − cy)·d/fy`, `z = d`.
pub fn unproject_pixel(
    camera: &PinholeCamera,
    u: f64,
    v: f64,
    depth: f64,
) -> Result<Vec3, UnprojectError> {
    camera.unproject(u, v, depth).map_err(|e| match e {
        CameraError::NonpositiveDepth(d) | CameraError::BehindCamera(d) => {
            UnprojectError::NonpositiveDepth(d)
        }
    })
}

fn check_mask(scene: &DepthScene, mask: &Mask) -> Result<(), UnprojectError> {
    let expected = (scene.width(), scene.height());
    let found = (mask.width, mask.height);
    if expected != found {
        return Err(UnprojectError::MaskDimensions { expected, found });
    }
    Ok(())
}

/// Unprojects every valid-depth pixel selected by `mask`, in row-major order.
pub fn mask_to_pointcloud(scene: &DepthScene, mask: &Mask) -> Result<PointCloud, UnprojectError> {
    check_mask(scene, mask)?;
    let rows: Vec<u32> = (0..scene.height()).collect();
    let per_row: Vec<Vec<(Vec3, [u32; 2])>> = maybe_par_iter!(rows)
        .map(|&y| {
            let mut out = Vec::new();
            for x in 0..scene.width() {
                if !mask.get(x, y) {
                    continue;
                }
                if let Some(d) = scene.depth_at(x, y) {
                    let p = scene
                        .camera
                        .unproject(x as f64, y as f64, d)
                        .expect("valid depth is positive");
                    out.push((p, [x, y]));
                }
            }
            out
        })
        .collect();

    let (points, pixels): (Vec<_>, Vec<_>) = per_row.into_iter().flatten().unzip();
    if points.is_empty() {
        return Err(UnprojectError::EmptySelection);
    }
    Ok(PointCloud {
        points,
        source_pixels: Some(pixels),
    })
}

/// Outcome of [`cast_landmarks`]: surviving 3D landmarks and the names of
/// those dropped for lack of valid depth.
#[derive(Debug, Clone, PartialEq)]
pub struct CastLandmarks {
    pub landmarks: Vec<Landmark3D>,
    pub dropped: Vec<String>,
}

/// Depth at a subpixel location: bilinear over the four surrounding pixel
/// centres, renormalised over the valid ones. Falls back to the mean of the
/// valid depths in the 3×3 window around the nearest pixel; `None` when that
/// window is empty too.
pub fn sample_depth(scene: &DepthScene, u: f64, v: f64) -> Option<f64> {
    let (w, h) = (scene.width() as i64, scene.height() as i64);
    let x0 = u.floor() as i64;
    let y0 = v.floor() as i64;
    let fx = u - x0 as f64;
    let fy = v - y0 as f64;
    let taps = [
        (x0, y0, (1.0 - fx) * (1.0 - fy)),
        (x0 + 1, y0, fx * (1.0 - fy)),
        (x0, y0 + 1, (1.0 - fx) * fy),
        (x0 + 1, y0 + 1, fx * fy),
    ];
    let mut acc = 0.0;
    let mut weight = 0.0;
    for (x, y, wgt) in taps {
        if x < 0 || y < 0 || x >= w || y >= h || wgt <= 0.0 {
            continue;
        }
        if let Some(d) = scene.depth_at(x as u32, y as u32) {
            acc += wgt * d;
            weight += wgt;
        }
    }
    if weight > 0.0 {
        return Some(acc / weight);
    }

    let cx = u.round() as i64;
    let cy = v.round() as i64;
    let mut sum = 0.0;
    let mut n = 0usize;
    for y in cy - 1..=cy + 1 {
        for x in cx - 1..=cx + 1 {
            if x < 0 || y < 0 || x >= w || y >= h {
                continue;
            }
            if let Some(d) = scene.depth_at(x as u32, y as u32) {
                sum += d;
                n += 1;
            }
        }
    }
    (n > 0).then(|| sum / n as f64)
}

/// Casts 2D landmarks into camera space by sampling the depth field.
pub fn cast_landmarks(
    scene: &DepthScene,
    landmarks: &[Landmark2D],
) -> Result<CastLandmarks, UnprojectError> {
    let (w, h) = (scene.width() as f64, scene.height() as f64);
    let mut out = Vec::with_capacity(landmarks.len());
    let mut dropped = Vec::new();
    for lm in landmarks {
        if !(lm.u >= 0.0 && lm.u < w && lm.v >= 0.0 && lm.v < h) {
            return Err(UnprojectError::LandmarkOutOfBounds {
                name: lm.name.clone(),
                u: lm.u,
                v: lm.v,
            });
        }
        match sample_depth(scene, lm.u, lm.v) {
            Some(d) => out.push(Landmark3D {
                name: lm.name.clone(),
                position: unproject_pixel(&scene.camera, lm.u, lm.v, d)?,
            }),
            None => dropped.push(lm.name.clone()),
        }
    }
    if out.is_empty() && !landmarks.is_empty() {
        return Err(UnprojectError::AllLandmarksInvalid);
    }
    Ok(CastLandmarks {
        landmarks: out,
        dropped,
    })
}
