#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use strata_server::api::{router, AppState};
use strata_server::fixtures::{load_manifest, Manifest};
use strata_server::pipeline::PipelineOptions;
use strata_server::store::Store;
use strata_server::ServiceBundle;
use tower::ServiceExt;

pub const FIXTURES: [&str; 4] = ["train", "runner", "mixed_failure", "all_fail"];

pub fn fixtures_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn fixture(name: &str) -> (Vec<u8>, Manifest) {
    let dir = fixtures_root().join(name);
    (std::fs::read(dir.join("image.png")).unwrap(), load_manifest(&dir).unwrap())
}

pub fn services() -> ServiceBundle {
    ServiceBundle::fixtures(&fixtures_root()).unwrap()
}

pub struct TestApp {
    pub router: Router,
    pub store_dir: tempfile::TempDir,
}

pub fn app() -> TestApp {
    let store_dir = tempfile::tempdir().unwrap();
    let state = Arc::new(AppState {
        store: Store::open(store_dir.path()).unwrap(),
        services: services(),
        default_seed: 0,
        options: PipelineOptions::default(),
    });
    TestApp {
        router: router(state),
        store_dir,
    }
}

pub struct Reply {
    pub status: StatusCode,
    pub content_type: Option<String>,
    pub body: Vec<u8>,
}

impl Reply {
    pub fn json(&self) -> serde_json::Value {
        serde_json::from_slice(&self.body)
            .unwrap_or_else(|e| panic!("not JSON ({e}): {}", String::from_utf8_lossy(&self.body)))
    }
}

impl TestApp {
    pub async fn send(&self, req: Request<Body>) -> Reply {
        let resp = self.router.clone().oneshot(req).await.unwrap();
        let status = resp.status();
        let content_type = resp
            .headers()
            .get("content-type")
            .map(|v| v.to_str().unwrap().to_string());
        let body = resp.into_body().collect().await.unwrap().to_bytes().to_vec();
        Reply {
            status,
            content_type,
            body,
        }
    }

    pub async fn get(&self, uri: &str) -> Reply {
        self.send(Request::get(uri).body(Body::empty()).unwrap()).await
    }

    pub async fn json(&self, method: &str, uri: &str, body: serde_json::Value) -> Reply {
        self.send(
            Request::builder()
                .method(method)
                .uri(uri)
                .header("content-type", "application/json")
                .body(Body::from(body.to_string()))
                .unwrap(),
        )
        .await
    }

    pub async fn upload(&self, uri: &str, field: &str, bytes: &[u8]) -> Reply {
        let boundary = "strata-test-boundary";
        let mut body = Vec::new();
        body.extend_from_slice(
            format!(
                "--{boundary}\r\nContent-Disposition: form-data; name=\"{field}\"; filename=\"image.png\"\r\nContent-Type: image/png\r\n\r\n"
            )
            .as_bytes(),
        );
        body.extend_from_slice(bytes);
        body.extend_from_slice(format!("\r\n--{boundary}--\r\n").as_bytes());
        self.send(
            Request::post(uri)
                .header("content-type", format!("multipart/form-data; boundary={boundary}"))
                .body(Body::from(body))
                .unwrap(),
        )
        .await
    }
}
