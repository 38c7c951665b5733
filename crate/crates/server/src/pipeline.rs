//! ingest → depth → program generation → masking → extraction.
//!
//! Stage timings are taken between consecutive checkpoints, so the stages
//! partition the run and their sum equals the total.

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use strata_core::scene::{validate_scene, CameraFile, Provenance};
use strata_core::vpdsl::{
    interpret_program, validate_program, Diagnostic, InterpretOptions, Segmenter, ServiceError, Services, Value,
    VisualProgram,
};
use strata_core::{DepthScene, Mask, SceneDocument};

use crate::fixtures::{FixtureError, GeneratedProgram};
use crate::services::{ClientError, ServiceBundle};

pub const DEFAULT_WORKERS: usize = 4;

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("image decode failed: {0}")]
    Decode(String),
    #[error("depth service: {0}")]
    DepthService(ServiceError),
    #[error("fixture missing: {0}")]
    FixtureMissing(String),
    #[error("invalid scene: {0}")]
    InvalidScene(String),
}

impl From<ClientError> for IngestError {
    fn from(e: ClientError) -> Self {
        match e {
            ClientError::Fixture(FixtureError::Missing(m)) => IngestError::FixtureMissing(m),
            ClientError::Fixture(other) => IngestError::InvalidScene(other.to_string()),
            ClientError::Service(s) => IngestError::DepthService(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTimes {
    pub depth_s: f64,
    pub program_generation_s: f64,
    pub masking_s: f64,
    pub extraction_s: f64,
    pub total_s: f64,
}

impl StageTimes {
    /// Everything except waiting on models: depth loading, mask replay and
    /// extraction.
    pub fn non_model_s(&self) -> f64 {
        self.depth_s + self.masking_s + self.extraction_s
    }

    pub fn stage_sum(&self) -> f64 {
        self.depth_s + self.program_generation_s + self.masking_s + self.extraction_s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProgramDiagnostic {
    pub program_index: usize,
    pub diagnostic: Diagnostic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub seed: u64,
    pub timings: StageTimes,
    pub programs_generated: usize,
    pub programs_succeeded: usize,
    /// The first diagnostic of each failed program.
    pub diagnostics: Vec<ProgramDiagnostic>,
    /// Set when the program generator itself failed; no programs ran.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generation_error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct PipelineOptions {
    pub workers: usize,
    pub interpret: InterpretOptions,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        Self {
            workers: DEFAULT_WORKERS,
            interpret: InterpretOptions::default(),
        }
    }
}

pub struct PipelineOutput {
    pub scene_id: String,
    pub scene: DepthScene,
    pub document: SceneDocument,
    pub report: PipelineReport,
}

/// Content-derived scene id, so every path that ingests the same bytes
/// agrees on it.
pub fn scene_id_for(image_bytes: &[u8]) -> String {
    format!("s{}", &crate::sha256_hex(image_bytes)[..16])
}

pub fn ingest_image(bytes: &[u8], services: &ServiceBundle) -> Result<DepthScene, IngestError> {
    let image = image::load_from_memory(bytes)
        .map_err(|e| IngestError::Decode(e.to_string()))?
        .into_rgba8();
    let est = services.depth.estimate(bytes, &image)?;
    let (w, h) = image.dimensions();
    let camera = est
        .camera
        .unwrap_or_else(CameraFile::default)
        .camera(w, h)
        .map_err(|e| IngestError::InvalidScene(e.to_string()))?;
    if (est.depth.width, est.depth.height) != (w, h) {
        return Err(IngestError::InvalidScene(format!(
            "depth is {}x{} but image is {w}x{h}",
            est.depth.width, est.depth.height
        )));
    }
    let scene = DepthScene::new(image, est.depth, camera);
    let report = validate_scene(&scene);
    if !report.is_empty() {
        return Err(IngestError::InvalidScene(report.messages().join("; ")));
    }
    Ok(scene)
}

pub fn generate_programs(scene: &DepthScene, services: &ServiceBundle) -> Result<Vec<GeneratedProgram>, ClientError> {
    services.programs.generate(scene)
}

pub fn run_pipeline(
    image_bytes: &[u8],
    services: &ServiceBundle,
    seed: u64,
    options: &PipelineOptions,
) -> Result<PipelineOutput, IngestError> {
    let t0 = Instant::now();
    let scene = ingest_image(image_bytes, services)?;
    let depth_s = t0.elapsed().as_secs_f64();
    let scene_id = scene_id_for(image_bytes);
    let (document, mut report) = run_pipeline_on_scene(&scene, &scene_id, services, seed, options);
    report.timings.depth_s = depth_s;
    report.timings.total_s += depth_s;
    Ok(PipelineOutput {
        scene_id,
        scene,
        document,
        report,
    })
}

/// Runs every stage after ingestion. The returned report has a zero depth
/// time.
pub fn run_pipeline_on_scene(
    scene: &DepthScene,
    scene_id: &str,
    services: &ServiceBundle,
    seed: u64,
    options: &PipelineOptions,
) -> (SceneDocument, PipelineReport) {
    let start = Instant::now();
    let generated = generate_programs(scene, services);
    let t_gen = Instant::now();

    let mut report = PipelineReport {
        seed,
        timings: StageTimes {
            depth_s: 0.0,
            program_generation_s: 0.0,
            masking_s: 0.0,
            extraction_s: 0.0,
            total_s: 0.0,
        },
        programs_generated: 0,
        programs_succeeded: 0,
        diagnostics: Vec::new(),
        generation_error: None,
    };
    let mut doc = SceneDocument::new(format!("{scene_id}-seed{seed}"), scene_id);

    let programs = match generated {
        Ok(p) => p,
        Err(e) => {
            report.generation_error = Some(e.to_string());
            report.timings.program_generation_s = (t_gen - start).as_secs_f64();
            report.timings.total_s = report.timings.program_generation_s;
            return (doc, report);
        }
    };
    report.programs_generated = programs.len();

    let parsed: Vec<Result<VisualProgram, Diagnostic>> = programs
        .iter()
        .map(|p| validate_program(&p.program).map_err(|mut d| d.swap_remove(0)))
        .collect();
    let segmenter = prefetch_masks(scene, &parsed, services, options.workers);
    let t_mask = Instant::now();

    let svc = Services {
        segmenter: &segmenter,
        landmarks: services.landmarks.as_ref(),
    };
    let results = run_bounded(&parsed, options.workers, |i, p| {
        let prog = p.as_ref().map_err(Clone::clone)?;
        interpret_program(prog, scene, svc, seed.wrapping_add(i as u64), &options.interpret)
    });
    for (i, (res, gen)) in results.into_iter().zip(&programs).enumerate() {
        match res {
            Ok(ext) => {
                let mut anchor = ext.anchor;
                anchor.id = format!("p{i}_{}", anchor.id);
                anchor.rationale = gen.rationale.clone();
                doc.provenance.push(Provenance {
                    anchor_id: anchor.id.clone(),
                    program: ext.provenance.program,
                    rationale: gen.rationale.clone(),
                });
                doc.anchors.push(anchor);
                report.programs_succeeded += 1;
            }
            Err(diagnostic) => report.diagnostics.push(ProgramDiagnostic {
                program_index: i,
                diagnostic,
            }),
        }
    }
    let end = Instant::now();

    report.timings.program_generation_s = (t_gen - start).as_secs_f64();
    report.timings.masking_s = (t_mask - t_gen).as_secs_f64();
    report.timings.extraction_s = (end - t_mask).as_secs_f64();
    report.timings.total_s = (end - start).as_secs_f64();
    (doc, report)
}

/// Segments every distinct prompt of the well-formed programs up front.
fn prefetch_masks<'a>(
    scene: &DepthScene,
    parsed: &[Result<VisualProgram, Diagnostic>],
    services: &'a ServiceBundle,
    workers: usize,
) -> CachedSegmenter<'a> {
    let mut prompts: Vec<String> = Vec::new();
    for prog in parsed.iter().flatten() {
        for stmt in &prog.statements {
            if !stmt.cell.name.eq_ignore_ascii_case("Text2Mask") {
                continue;
            }
            for arg in &stmt.args {
                if let Value::Str { text, .. } = &arg.value {
                    if !prompts.contains(text) {
                        prompts.push(text.clone());
                    }
                }
            }
        }
    }
    let masks = run_bounded(&prompts, workers, |_, p| services.segment.segment(scene, p));
    CachedSegmenter {
        cache: prompts.into_iter().zip(masks).collect(),
        inner: services.segment.as_ref(),
    }
}

struct CachedSegmenter<'a> {
    cache: HashMap<String, Result<Mask, ServiceError>>,
    inner: &'a dyn Segmenter,
}

impl Segmenter for CachedSegmenter<'_> {
    fn segment(&self, scene: &DepthScene, prompt: &str) -> Result<Mask, ServiceError> {
        match self.cache.get(prompt) {
            Some(r) => r.clone(),
            None => self.inner.segment(scene, prompt),
        }
    }
}

/// Maps `f` over `items` on at most `workers` threads; results keep input
/// order.
pub fn run_bounded<T: Sync, R: Send>(items: &[T], workers: usize, f: impl Fn(usize, &T) -> R + Sync) -> Vec<R> {
    let workers = workers.max(1).min(items.len());
    if workers <= 1 {
        return items.iter().enumerate().map(|(i, t)| f(i, t)).collect();
    }
    let next = AtomicUsize::new(0);
    let mut out: Vec<(usize, R)> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|_| {
                s.spawn(|| {
                    let mut local = Vec::new();
                    loop {
                        let i = next.fetch_add(1, Ordering::Relaxed);
                        let Some(item) = items.get(i) else { break };
                        local.push((i, f(i, item)));
                    }
                    local
                })
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("pipeline worker panicked"))
            .collect()
    });
    out.sort_by_key(|(i, _)| *i);
    out.into_iter().map(|(_, r)| r).collect()
}
