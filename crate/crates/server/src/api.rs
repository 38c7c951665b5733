//! HTTP API over the store and pipeline.
//!
//! Blocking work (model calls, fitting, rendering, file I/O) runs on the
//! blocking pool; handlers only shuttle bytes.

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, Multipart, Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, patch, post};
use axum::{Json, Router};
use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine;
use image::RgbaImage;
use serde::{Deserialize, Serialize};
use serde_json::json;
use strata_core::anchors::{placeholder_raster, PLACEHOLDER_ASSET};
use strata_core::render::{export_png, render_document, RenderSettings};
use strata_core::scene::{CameraFile, DocumentError};
use strata_core::SceneDocument;

use crate::pipeline::{ingest_image, run_pipeline_on_scene, scene_id_for, IngestError, PipelineOptions};
use crate::services::ServiceBundle;
use crate::store::{PipelineRecord, Store, StoreError};

/// Largest accepted request body.
pub const MAX_BODY_BYTES: usize = 64 << 20;
/// Largest accepted layer content, in pixels per side.
pub const MAX_CONTENT_SIDE: u32 = 4096;

pub struct AppState {
    pub store: Store,
    pub services: ServiceBundle,
    pub default_seed: u64,
    pub options: PipelineOptions,
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        Self {
            status,
            message: message.into(),
        }
    }

    fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({ "error": self.message }))).into_response()
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        let status = match &e {
            StoreError::NotFound(_) => StatusCode::NOT_FOUND,
            StoreError::BadId(_) => StatusCode::BAD_REQUEST,
            StoreError::Document(_) => StatusCode::UNPROCESSABLE_ENTITY,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        Self::new(status, e.to_string())
    }
}

impl From<DocumentError> for ApiError {
    fn from(e: DocumentError) -> Self {
        let status = match e {
            DocumentError::UnknownAnchor(_) | DocumentError::UnknownLayer(_) => StatusCode::NOT_FOUND,
            _ => StatusCode::UNPROCESSABLE_ENTITY,
        };
        Self::new(status, e.to_string())
    }
}

impl From<IngestError> for ApiError {
    fn from(e: IngestError) -> Self {
        let status = match &e {
            IngestError::Decode(_) => StatusCode::BAD_REQUEST,
            IngestError::FixtureMissing(_) => StatusCode::NOT_FOUND,
            IngestError::DepthService(_) => StatusCode::BAD_GATEWAY,
            IngestError::InvalidScene(_) => StatusCode::UNPROCESSABLE_ENTITY,
        };
        Self::new(status, e.to_string())
    }
}

type ApiResult<T> = Result<T, ApiError>;
type Shared = Arc<AppState>;

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> ApiResult<T> + Send + 'static) -> ApiResult<T> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, format!("worker failed: {e}")))?
}

pub fn router(state: Shared) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/scenes", post(create_scene))
        .route("/scenes/{id}", get(get_scene))
        .route("/scenes/{id}/pipeline", post(scene_pipeline))
        .route("/scenes/{id}/anchors", get(scene_anchors))
        .route("/documents", post(create_document))
        .route("/documents/{id}", get(get_document).patch(patch_document))
        .route("/documents/{id}/layers", post(add_layer))
        .route("/documents/{id}/layers/{lid}", patch(patch_layer))
        .route("/documents/{id}/render", get(render))
        .layer(DefaultBodyLimit::max(MAX_BODY_BYTES))
        .with_state(state)
}

async fn health(State(st): State<Shared>) -> Json<serde_json::Value> {
    Json(json!({
        "status": "ok",
        "mode": st.services.mode,
        "parallel": strata_core::is_parallel(),
    }))
}

#[derive(Deserialize)]
struct SeedQuery {
    seed: Option<u64>,
}

fn run_and_store(st: &AppState, scene_id: &str, seed: u64) -> ApiResult<PipelineRecord> {
    let scene = st.store.scene(scene_id)?;
    let (document, report) = run_pipeline_on_scene(&scene, scene_id, &st.services, seed, &st.options);
    let record = PipelineRecord { document, report };
    st.store.put_pipeline(scene_id, &record)?;
    Ok(record)
}

/// Ingests the `image` field and runs the pipeline on it, so the scene's
/// anchors are available as soon as it exists.
async fn create_scene(
    State(st): State<Shared>,
    Query(q): Query<SeedQuery>,
    mut multipart: Multipart,
) -> ApiResult<(StatusCode, Json<serde_json::Value>)> {
    let mut image: Option<Bytes> = None;
    while let Some(field) = multipart
        .next_field()
        .await
        .map_err(|e| ApiError::bad_request(format!("multipart: {e}")))?
    {
        if field.name() == Some("image") {
            image = Some(field.bytes().await.map_err(|e| ApiError::bad_request(format!("multipart: {e}")))?);
        }
    }
    let bytes = image.ok_or_else(|| ApiError::bad_request("missing multipart field 'image'"))?;
    let seed = q.seed.unwrap_or(st.default_seed);
    blocking(move || {
        let scene = ingest_image(&bytes, &st.services)?;
        let scene_id = scene_id_for(&bytes);
        st.store.put_scene(&scene_id, &scene)?;
        let record = run_and_store(&st, &scene_id, seed)?;
        Ok((
            StatusCode::CREATED,
            Json(json!({
                "scene_id": scene_id,
                "width": scene.width(),
                "height": scene.height(),
                "report": record.report,
            })),
        ))
    })
    .await
}

async fn get_scene(State(st): State<Shared>, Path(id): Path<String>) -> ApiResult<Json<serde_json::Value>> {
    blocking(move || {
        let scene = st.store.scene(&id)?;
        let record = st.store.pipeline(&id)?;
        Ok(Json(json!({
            "scene_id": id,
            "width": scene.width(),
            "height": scene.height(),
            "camera": CameraFile::from_camera(&scene.camera),
            "report": record.map(|r| r.report),
        })))
    })
    .await
}

async fn scene_pipeline(
    State(st): State<Shared>,
    Path(id): Path<String>,
    Query(q): Query<SeedQuery>,
) -> ApiResult<Json<serde_json::Value>> {
    let seed = q.seed.unwrap_or(st.default_seed);
    blocking(move || {
        let record = run_and_store(&st, &id, seed)?;
        Ok(Json(serde_json::to_value(record.report).expect("report serializes")))
    })
    .await
}

async fn scene_anchors(State(st): State<Shared>, Path(id): Path<String>) -> ApiResult<Json<serde_json::Value>> {
    blocking(move || {
        st.store.scene(&id)?;
        let record = st
            .store
            .pipeline(&id)?
            .ok_or_else(|| ApiError::new(StatusCode::CONFLICT, "pipeline has not run for this scene"))?;
        Ok(Json(json!({
            "scene_id": id,
            "anchors": record.document.anchors,
            "provenance": record.document.provenance,
        })))
    })
    .await
}

#[derive(Deserialize)]
struct CreateDocument {
    scene_id: String,
}

async fn create_document(
    State(st): State<Shared>,
    Json(body): Json<CreateDocument>,
) -> ApiResult<(StatusCode, Json<SceneDocument>)> {
    blocking(move || Ok((StatusCode::CREATED, Json(st.store.create_document(&body.scene_id)?)))).await
}

async fn get_document(State(st): State<Shared>, Path(id): Path<String>) -> ApiResult<Json<SceneDocument>> {
    blocking(move || Ok(Json(st.store.document(&id)?))).await
}

/// Document-level edits: layer stacking order and layer removal.
#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DocumentPatch {
    /// A permutation of the current layer ids, bottom first.
    #[serde(default)]
    pub layer_order: Option<Vec<String>>,
    #[serde(default)]
    pub remove_layers: Vec<String>,
}

fn apply_document_patch(doc: &mut SceneDocument, p: DocumentPatch) -> ApiResult<()> {
    for lid in &p.remove_layers {
        let pos = doc
            .layers
            .iter()
            .position(|l| &l.id == lid)
            .ok_or_else(|| ApiError::from(DocumentError::UnknownLayer(lid.clone())))?;
        let layer = doc.layers.remove(pos);
        if layer.anchor_id.contains('/') && !doc.layers.iter().any(|l| l.anchor_id == layer.anchor_id) {
            doc.anchors.retain(|a| a.id != layer.anchor_id);
            doc.provenance.retain(|pr| pr.anchor_id != layer.anchor_id);
        }
    }
    if let Some(order) = p.layer_order {
        let mut current: Vec<&str> = doc.layers.iter().map(|l| l.id.as_str()).collect();
        let mut wanted: Vec<&str> = order.iter().map(String::as_str).collect();
        current.sort_unstable();
        wanted.sort_unstable();
        if current != wanted {
            return Err(ApiError::new(
                StatusCode::UNPROCESSABLE_ENTITY,
                "layer_order must list every layer exactly once",
            ));
        }
        let mut layers = std::mem::take(&mut doc.layers);
        for id in &order {
            let i = layers.iter().position(|l| &l.id == id).expect("checked above");
            doc.layers.push(layers.swap_remove(i));
        }
    }
    Ok(())
}

async fn patch_document(
    State(st): State<Shared>,
    Path(id): Path<String>,
    Json(body): Json<DocumentPatch>,
) -> ApiResult<Json<SceneDocument>> {
    blocking(move || {
        let ((), doc) = st.store.update_document(&id, |d| apply_document_patch(d, body))??;
        Ok(Json(doc))
    })
    .await
}

fn decode_content(png_b64: Option<&str>, asset: Option<&str>) -> ApiResult<RgbaImage> {
    match (png_b64, asset) {
        (Some(_), Some(_)) => Err(ApiError::bad_request("give either content_png_base64 or asset, not both")),
        (Some(data), None) => {
            let bytes = B64
                .decode(data)
                .map_err(|e| ApiError::bad_request(format!("content_png_base64: {e}")))?;
            let img = image::load_from_memory(&bytes)
                .map_err(|e| ApiError::bad_request(format!("content image: {e}")))?
                .into_rgba8();
            if img.width() > MAX_CONTENT_SIDE || img.height() > MAX_CONTENT_SIDE {
                return Err(ApiError::new(
                    StatusCode::PAYLOAD_TOO_LARGE,
                    format!("content larger than {MAX_CONTENT_SIDE}x{MAX_CONTENT_SIDE}"),
                ));
            }
            Ok(img)
        }
        (None, Some(PLACEHOLDER_ASSET)) | (None, None) => Ok(placeholder_raster()),
        (None, Some(other)) => Err(ApiError::new(StatusCode::NOT_FOUND, format!("unknown asset '{other}'"))),
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AddLayer {
    anchor_id: String,
    #[serde(default)]
    content_png_base64: Option<String>,
    #[serde(default)]
    asset: Option<String>,
}

async fn add_layer(
    State(st): State<Shared>,
    Path(id): Path<String>,
    Json(body): Json<AddLayer>,
) -> ApiResult<(StatusCode, Json<serde_json::Value>)> {
    blocking(move || {
        let content = decode_content(body.content_png_base64.as_deref(), body.asset.as_deref())?;
        let (layer_id, doc) = st
            .store
            .update_document(&id, |d| d.add_layer(&body.anchor_id, content).map_err(ApiError::from))??;
        Ok((StatusCode::CREATED, Json(json!({ "layer_id": layer_id, "document": doc }))))
    })
    .await
}

/// Either a constrained edit (`param` + `delta`) or direct layer settings.
#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerPatch {
    #[serde(default)]
    pub param: Option<String>,
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default)]
    pub repeat: Option<[u32; 2]>,
    #[serde(default)]
    pub gap: Option<[f64; 2]>,
    #[serde(default)]
    pub mirror: Option<bool>,
    #[serde(default)]
    pub content_rotation: Option<f64>,
    #[serde(default)]
    pub visible: Option<bool>,
    #[serde(default)]
    pub double_sided: Option<bool>,
    #[serde(default)]
    pub content_png_base64: Option<String>,
    #[serde(default)]
    pub asset: Option<String>,
}

fn apply_layer_patch(doc: &mut SceneDocument, lid: &str, p: LayerPatch, content: Option<RgbaImage>) -> ApiResult<()> {
    match (&p.param, p.delta) {
        (Some(param), Some(delta)) => doc.edit_layer_anchor(lid, param, delta)?,
        (None, None) => {}
        _ => return Err(ApiError::bad_request("param and delta must be given together")),
    }
    let layer = doc.layer_mut(lid)?;
    if let Some(r) = p.repeat {
        layer.repeat = r;
    }
    if let Some(g) = p.gap {
        layer.gap = g;
    }
    if let Some(m) = p.mirror {
        layer.mirror = m;
    }
    if let Some(r) = p.content_rotation {
        if !r.is_finite() {
            return Err(ApiError::bad_request("content_rotation must be finite"));
        }
        layer.content_rotation = r;
    }
    if let Some(v) = p.visible {
        layer.visible = v;
    }
    if let Some(d) = p.double_sided {
        layer.double_sided = d;
    }
    if let Some(c) = content {
        layer.content = c;
    }
    if !layer.is_valid() {
        return Err(DocumentError::InvalidLayer(lid.to_string()).into());
    }
    Ok(())
}

async fn patch_layer(
    State(st): State<Shared>,
    Path((id, lid)): Path<(String, String)>,
    Json(body): Json<LayerPatch>,
) -> ApiResult<Json<SceneDocument>> {
    blocking(move || {
        let content = if body.content_png_base64.is_some() || body.asset.is_some() {
            Some(decode_content(body.content_png_base64.as_deref(), body.asset.as_deref())?)
        } else {
            None
        };
        let ((), doc) = st
            .store
            .update_document(&id, |d| apply_layer_patch(d, &lid, body, content))??;
        Ok(Json(doc))
    })
    .await
}

#[derive(Deserialize)]
struct RenderQuery {
    supersample: Option<u32>,
}

/// Renders a stored document to PNG bytes; shared by the API and the CLI.
pub fn render_png(doc: &SceneDocument, scene: &strata_core::DepthScene, supersample: u32) -> Result<Vec<u8>, String> {
    let settings = RenderSettings {
        supersample,
        ..RenderSettings::default()
    };
    render_document(doc, scene, &settings)
        .map(|img| export_png(&img))
        .map_err(|e| e.to_string())
}

async fn render(
    State(st): State<Shared>,
    Path(id): Path<String>,
    Query(q): Query<RenderQuery>,
) -> ApiResult<Response> {
    blocking(move || {
        let doc = st.store.document(&id)?;
        let scene = st.store.scene(&doc.scene_id)?;
        let png = render_png(&doc, &scene, q.supersample.unwrap_or(1))
            .map_err(|e| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, e))?;
        Ok(([(header::CONTENT_TYPE, "image/png")], png).into_response())
    })
    .await
}

#[derive(Debug, Clone)]
pub struct ServeConfig {
    pub addr: SocketAddr,
    pub store: PathBuf,
    pub seed: u64,
}

/// Opens the store, binds, and serves until Ctrl-C.
pub async fn serve(config: ServeConfig, services: ServiceBundle) -> anyhow::Result<()> {
    let store = Store::open(&config.store)?;
    let state = Arc::new(AppState {
        store,
        services,
        default_seed: config.seed,
        options: PipelineOptions::default(),
    });
    let listener = tokio::net::TcpListener::bind(config.addr)
        .await
        .map_err(|e| anyhow::anyhow!("cannot bind {}: {e}", config.addr))?;
    tracing::info!(addr = %listener.local_addr()?, store = %config.store.display(), "listening");
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
