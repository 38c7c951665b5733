//! Scene container directories: `image.png`, `depth.dsd` (or a 16-bit
//! `depth.png` with `scale`/`offset`), and `camera.json`.

use std::fs;
use std::path::Path;

use image::{ImageFormat, RgbaImage};
use serde::{Deserialize, Serialize};

use super::dsd::{self, DsdError};
use super::{DepthMap, DepthScene, PinholeCamera};

pub const IMAGE_FILE: &str = "image.png";
pub const DEPTH_FILE: &str = "depth.dsd";
pub const DEPTH_PNG_FILE: &str = "depth.png";
pub const CAMERA_FILE: &str = "camera.json";

#[derive(Debug, thiserror::Error)]
pub enum ContainerError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("image decode failed: {0}")]
    Image(#[from] image::ImageError),
    #[error("depth file: {0}")]
    Dsd(#[from] DsdError),
    #[error("camera.json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Invalid(String),
}

/// `camera.json`. Intrinsics are optional; when any is missing the default
/// camera for the image size is used.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CameraFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fx: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cx: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub width: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub height: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub offset: Option<f64>,
}

impl CameraFile {
    pub fn from_camera(c: &PinholeCamera) -> Self {
        Self {
            fx: Some(c.fx),
            fy: Some(c.fy),
            cx: Some(c.cx),
            cy: Some(c.cy),
            width: Some(c.width),
            height: Some(c.height),
            scale: None,
            offset: None,
        }
    }

    /// Resolves the camera for an image of the given size.
    pub fn camera(&self, width: u32, height: u32) -> Result<PinholeCamera, ContainerError> {
        if let (Some(w), Some(h)) = (self.width, self.height) {
            if (w, h) != (width, height) {
                return Err(ContainerError::Invalid(format!(
                    "camera.json declares {w}x{h} but image is {width}x{height}"
                )));
            }
        }
        Ok(match (self.fx, self.fy, self.cx, self.cy) {
            (Some(fx), Some(fy), Some(cx), Some(cy)) => PinholeCamera {
                fx,
                fy,
                cx,
                cy,
                width,
                height,
            },
            _ => PinholeCamera::with_default_intrinsics(width, height),
        })
    }
}

fn read(path: &Path) -> Result<Vec<u8>, ContainerError> {
    fs::read(path).map_err(|source| ContainerError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), ContainerError> {
    fs::write(path, bytes).map_err(|source| ContainerError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Converts a 16-bit grayscale depth image via `depth = pixel * scale + offset`.
/// Zero pixels are treated as missing.
pub fn depth_from_png16(bytes: &[u8], scale: f64, offset: f64) -> Result<DepthMap, ContainerError> {
    let img = image::load_from_memory(bytes)?.into_luma16();
    let (w, h) = img.dimensions();
    let data = img
        .pixels()
        .map(|p| {
            if p.0[0] == 0 {
                f32::NAN
            } else {
                (p.0[0] as f64 * scale + offset) as f32
            }
        })
        .collect();
    Ok(DepthMap::new(w, h, data))
}

pub fn load_scene_dir(dir: &Path) -> Result<DepthScene, ContainerError> {
    let image = image::load_from_memory(&read(&dir.join(IMAGE_FILE))?)?.into_rgba8();
    let (w, h) = image.dimensions();
    let camera_path = dir.join(CAMERA_FILE);
    let camera_file: CameraFile = if camera_path.exists() {
        serde_json::from_slice(&read(&camera_path)?)?
    } else {
        CameraFile::default()
    };
    let camera = camera_file.camera(w, h)?;

    let dsd_path = dir.join(DEPTH_FILE);
    let depth = if dsd_path.exists() {
        dsd::decode(&read(&dsd_path)?)?
    } else {
        let (Some(scale), Some(offset)) = (camera_file.scale, camera_file.offset) else {
            return Err(ContainerError::Invalid(
                "depth.png requires scale and offset in camera.json".into(),
            ));
        };
        depth_from_png16(&read(&dir.join(DEPTH_PNG_FILE))?, scale, offset)?
    };
    if (depth.width, depth.height) != (w, h) {
        return Err(ContainerError::Invalid(format!(
            "depth is {}x{} but image is {w}x{h}",
            depth.width, depth.height
        )));
    }
    Ok(DepthScene::new(image, depth, camera))
}

pub fn encode_png(image: &RgbaImage) -> Vec<u8> {
    let mut out = std::io::Cursor::new(Vec::new());
    image
        .write_to(&mut out, ImageFormat::Png)
        .expect("PNG encoding into memory cannot fail");
    out.into_inner()
}

pub fn save_scene_dir(scene: &DepthScene, dir: &Path) -> Result<(), ContainerError> {
    fs::create_dir_all(dir).map_err(|source| ContainerError::Io {
        path: dir.display().to_string(),
        source,
    })?;
    write(&dir.join(IMAGE_FILE), &encode_png(&scene.image))?;
    write(
        &dir.join(DEPTH_FILE),
        &dsd::encode(&scene.depth, Some(&scene.validity)),
    )?;
    let camera = serde_json::to_vec_pretty(&CameraFile::from_camera(&scene.camera))?;
    write(&dir.join(CAMERA_FILE), &camera)?;
    Ok(())
}
