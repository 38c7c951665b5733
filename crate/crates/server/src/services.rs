//! External-model clients. Each service is either replayed from a fixture
//! library or called over HTTP with a JSON protocol of our own.

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine;
use image::RgbaImage;
use serde::{Deserialize, Serialize};
use strata_core::geomfit::BodyKind;
use strata_core::scene::{dsd, CameraFile, CAMERA_FILE, DEPTH_FILE};
use strata_core::unproject::Landmark2D;
use strata_core::vpdsl::{LandmarkDetector, Segmenter, ServiceError};
use strata_core::{DepthMap, DepthScene, Mask};

use crate::fixtures::{
    landmark_file_name, mask_file_name, read_file, read_json, FixtureError, FixtureLibrary, GeneratedProgram,
    LandmarksFile, ProgramsFile, LANDMARKS_DIR, MASKS_DIR, PROGRAMS_FILE,
};

pub const DEPTH_TIMEOUT: Duration = Duration::from_secs(60);
pub const SEGMENT_TIMEOUT: Duration = Duration::from_secs(30);
pub const LANDMARK_TIMEOUT: Duration = Duration::from_secs(30);
pub const PROGRAM_TIMEOUT: Duration = Duration::from_secs(120);

/// Depth plus optional intrinsics, as returned by a depth estimator.
#[derive(Debug, Clone)]
pub struct DepthEstimate {
    pub depth: DepthMap,
    pub camera: Option<CameraFile>,
}

#[derive(Debug, thiserror::Error)]
pub enum ClientError {
    #[error(transparent)]
    Fixture(#[from] FixtureError),
    #[error(transparent)]
    Service(#[from] ServiceError),
}

pub trait DepthClient: Send + Sync {
    fn estimate(&self, image_bytes: &[u8], image: &RgbaImage) -> Result<DepthEstimate, ClientError>;
}

pub trait ProgramClient: Send + Sync {
    fn generate(&self, scene: &DepthScene) -> Result<Vec<GeneratedProgram>, ClientError>;
}

/// The four model clients used by the pipeline.
#[derive(Clone)]
pub struct ServiceBundle {
    pub depth: Arc<dyn DepthClient>,
    pub segment: Arc<dyn Segmenter + Send>,
    pub landmarks: Arc<dyn LandmarkDetector + Send>,
    pub programs: Arc<dyn ProgramClient>,
    pub mode: ServiceMode,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ServiceMode {
    Fixture,
    Remote,
}

impl ServiceBundle {
    pub fn fixtures(root: &Path) -> Result<Self, FixtureError> {
        let lib = Arc::new(FixtureLibrary::open(root)?);
        let replay = Arc::new(FixtureReplay { lib });
        Ok(Self {
            depth: replay.clone(),
            segment: replay.clone(),
            landmarks: replay.clone(),
            programs: replay,
            mode: ServiceMode::Fixture,
        })
    }

    pub fn remote(config: &RemoteConfig) -> Result<Self, ServiceError> {
        Ok(Self {
            depth: Arc::new(RemoteClient::new("depth", &config.depth, DEPTH_TIMEOUT)?),
            segment: Arc::new(RemoteClient::new("segment", &config.segment, SEGMENT_TIMEOUT)?),
            landmarks: Arc::new(RemoteClient::new("landmarks", &config.landmarks, LANDMARK_TIMEOUT)?),
            programs: Arc::new(RemoteClient::new("programs", &config.programs, PROGRAM_TIMEOUT)?),
            mode: ServiceMode::Remote,
        })
    }
}

// ---------------------------------------------------------------- fixtures

/// Replays every service from one fixture library.
pub struct FixtureReplay {
    lib: Arc<FixtureLibrary>,
}

impl FixtureReplay {
    fn dir_for(&self, scene: &DepthScene, service: &str) -> Result<&Path, ServiceError> {
        self.lib
            .for_scene(scene)
            .map_err(|e| ServiceError::new(service, e.to_string()))
    }
}

impl DepthClient for FixtureReplay {
    fn estimate(&self, image_bytes: &[u8], image: &RgbaImage) -> Result<DepthEstimate, ClientError> {
        let dir = self.lib.for_image_bytes(image_bytes, image)?;
        let path = dir.join(DEPTH_FILE);
        let depth = dsd::decode(&read_file(&path)?).map_err(|e| FixtureError::Corrupt {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        let cam_path = dir.join(CAMERA_FILE);
        let camera = if cam_path.exists() {
            Some(read_json(&cam_path)?)
        } else {
            None
        };
        Ok(DepthEstimate { depth, camera })
    }
}

impl ProgramClient for FixtureReplay {
    fn generate(&self, scene: &DepthScene) -> Result<Vec<GeneratedProgram>, ClientError> {
        let dir = self.lib.for_scene(scene)?;
        let file: ProgramsFile = read_json(&dir.join(PROGRAMS_FILE))?;
        Ok(file.programs)
    }
}

impl Segmenter for FixtureReplay {
    fn segment(&self, scene: &DepthScene, prompt: &str) -> Result<Mask, ServiceError> {
        let dir = self.dir_for(scene, "segment")?;
        let path = dir.join(MASKS_DIR).join(mask_file_name(prompt));
        let bytes = read_file(&path).map_err(|e| ServiceError::new("segment", e.to_string()))?;
        let img = image::load_from_memory(&bytes)
            .map_err(|e| ServiceError::new("segment", format!("{}: {e}", path.display())))?;
        Ok(Mask::from_image(&img, prompt))
    }
}

impl LandmarkDetector for FixtureReplay {
    /// A mask without a recorded file is replayed as "nothing detected".
    fn detect(&self, scene: &DepthScene, mask: &Mask, kind: BodyKind) -> Result<Vec<Landmark2D>, ServiceError> {
        let dir = self.dir_for(scene, "landmarks")?;
        let path = dir.join(LANDMARKS_DIR).join(landmark_file_name(mask));
        let file: LandmarksFile = match read_json(&path) {
            Ok(f) => f,
            Err(FixtureError::Missing(_)) => return Ok(Vec::new()),
            Err(e) => return Err(ServiceError::new("landmarks", e.to_string())),
        };
        Ok(match kind {
            BodyKind::Skeleton => file.skeleton,
            BodyKind::Face => file.face,
        })
    }
}

// ------------------------------------------------------------------ remote

/// Names of the environment variables that hold one endpoint's URL and,
/// optionally, its bearer token. Tokens never appear in the config itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndpointConfig {
    pub url_env: String,
    #[serde(default)]
    pub token_env: Option<String>,
    /// Overrides the service's default timeout.
    #[serde(default)]
    pub timeout_secs: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemoteConfig {
    pub depth: EndpointConfig,
    pub segment: EndpointConfig,
    pub landmarks: EndpointConfig,
    pub programs: EndpointConfig,
}

impl RemoteConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }
}

pub struct RemoteClient {
    service: &'static str,
    url: String,
    token: Option<String>,
    agent: ureq::Agent,
}

impl RemoteClient {
    pub fn new(service: &'static str, cfg: &EndpointConfig, default_timeout: Duration) -> Result<Self, ServiceError> {
        let url = std::env::var(&cfg.url_env)
            .map_err(|_| ServiceError::new(service, format!("environment variable {} is not set", cfg.url_env)))?;
        let token = match &cfg.token_env {
            Some(name) => Some(
                std::env::var(name)
                    .map_err(|_| ServiceError::new(service, format!("environment variable {name} is not set")))?,
            ),
            None => None,
        };
        let timeout = cfg.timeout_secs.map(Duration::from_secs_f64).unwrap_or(default_timeout);
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .build()
            .into();
        Ok(Self {
            service,
            url,
            token,
            agent,
        })
    }

    fn call<Req: Serialize, Resp: for<'de> Deserialize<'de>>(&self, body: &Req) -> Result<Resp, ServiceError> {
        let err = |m: String| ServiceError::new(self.service, m);
        let mut req = self.agent.post(&self.url);
        if let Some(t) = &self.token {
            req = req.header("Authorization", &format!("Bearer {t}"));
        }
        let mut resp = req.send_json(body).map_err(|e| err(format!("{}: {e}", self.url)))?;
        resp.body_mut()
            .read_json::<Resp>()
            .map_err(|e| err(format!("malformed response: {e}")))
    }
}

fn png_b64(img: &RgbaImage) -> String {
    strata_core::anchors::raster_base64(img)
}

fn unb64(service: &str, s: &str) -> Result<Vec<u8>, ServiceError> {
    B64.decode(s).map_err(|e| ServiceError::new(service, format!("bad base64: {e}")))
}

#[derive(Serialize)]
struct DepthRequest {
    image_base64: String,
}

#[derive(Deserialize)]
struct DepthResponse {
    /// `.dsd` bytes, base64.
    depth_dsd_base64: String,
    #[serde(default)]
    camera: Option<CameraFile>,
}

#[derive(Serialize)]
struct SegmentRequest<'a> {
    image_png_base64: String,
    prompt: &'a str,
}

#[derive(Deserialize)]
struct SegmentResponse {
    mask_png_base64: String,
}

#[derive(Serialize)]
struct LandmarkRequest {
    image_png_base64: String,
    mask_png_base64: String,
    kind: BodyKind,
}

#[derive(Deserialize)]
struct LandmarkResponse {
    landmarks: Vec<Landmark2D>,
}

#[derive(Serialize)]
struct ProgramRequest {
    prompt_version: &'static str,
    prompt: String,
    image_png_base64: String,
}

impl DepthClient for RemoteClient {
    fn estimate(&self, image_bytes: &[u8], _image: &RgbaImage) -> Result<DepthEstimate, ClientError> {
        let resp: DepthResponse = self.call(&DepthRequest {
            image_base64: B64.encode(image_bytes),
        })?;
        let depth = dsd::decode(&unb64(self.service, &resp.depth_dsd_base64)?)
            .map_err(|e| ServiceError::new(self.service, e.to_string()))?;
        Ok(DepthEstimate {
            depth,
            camera: resp.camera,
        })
    }
}

impl Segmenter for RemoteClient {
    fn segment(&self, scene: &DepthScene, prompt: &str) -> Result<Mask, ServiceError> {
        let resp: SegmentResponse = self.call(&SegmentRequest {
            image_png_base64: png_b64(&scene.image),
            prompt,
        })?;
        let img = image::load_from_memory(&unb64(self.service, &resp.mask_png_base64)?)
            .map_err(|e| ServiceError::new(self.service, e.to_string()))?;
        Ok(Mask::from_image(&img, prompt))
    }
}

impl LandmarkDetector for RemoteClient {
    fn detect(&self, scene: &DepthScene, mask: &Mask, kind: BodyKind) -> Result<Vec<Landmark2D>, ServiceError> {
        let mask_png = strata_core::scene::encode_png(&image::DynamicImage::ImageLuma8(mask.to_image()).into_rgba8());
        let resp: LandmarkResponse = self.call(&LandmarkRequest {
            image_png_base64: png_b64(&scene.image),
            mask_png_base64: B64.encode(mask_png),
            kind,
        })?;
        Ok(resp.landmarks)
    }
}

impl ProgramClient for RemoteClient {
    fn generate(&self, scene: &DepthScene) -> Result<Vec<GeneratedProgram>, ClientError> {
        let resp: ProgramsFile = self.call(&ProgramRequest {
            prompt_version: crate::prompt::PROMPT_VERSION,
            prompt: crate::prompt::assemble_prompt(),
            image_png_base64: png_b64(&scene.image),
        })?;
        Ok(resp.programs)
    }
}

/// Where the services come from, as chosen on the command line.
#[derive(Debug, Clone)]
pub enum ServiceSource {
    Fixtures(PathBuf),
    Remote(PathBuf),
}

impl ServiceSource {
    pub fn build(&self) -> anyhow::Result<ServiceBundle> {
        Ok(match self {
            ServiceSource::Fixtures(dir) => ServiceBundle::fixtures(dir)?,
            ServiceSource::Remote(cfg) => ServiceBundle::remote(&RemoteConfig::load(cfg)?)?,
        })
    }
}
