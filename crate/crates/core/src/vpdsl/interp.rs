use std::collections::HashMap;

use super::check::{attribute_type, cell_signature, typecheck_program, ValueType};
use super::{Diagnostic, DiagnosticKind, Statement, Value, VisualProgram};
use crate::anchors::{AnchorGeometry, ParametricAnchor};
use crate::geom::Vec3;
use crate::geomfit::{
    clean_pointcloud, derive_body_frames, derive_extruded_plane, fit_cylinder, fit_plane_ransac,
    fit_sphere_with_seed, BodyFrame, BodyKind, Cylinder, GeomError, Plane, Sphere,
    DEFAULT_RANSAC_ITERATIONS, DEFAULT_RANSAC_THRESHOLD,
};
use crate::scene::{DepthScene, Provenance};
use crate::unproject::{cast_landmarks, mask_to_pointcloud, Landmark2D, Mask, PointCloud, UnprojectError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{service} service failed: {message}")]
pub struct ServiceError {
    pub service: String,
    pub message: String,
}

impl ServiceError {
    pub fn new(service: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            service: service.into(),
            message: message.into(),
        }
    }
}

/// Text-grounded segmentation. Implementations must tolerate concurrent calls.
pub trait Segmenter: Sync {
    fn segment(&self, scene: &DepthScene, prompt: &str) -> Result<Mask, ServiceError>;
}

/// 2D landmark detection restricted to a mask. An empty result means nothing
/// was detected.
pub trait LandmarkDetector: Sync {
    fn detect(&self, scene: &DepthScene, mask: &Mask, kind: BodyKind) -> Result<Vec<Landmark2D>, ServiceError>;
}

#[derive(Clone, Copy)]
pub struct Services<'a> {
    pub segmenter: &'a dyn Segmenter,
    pub landmarks: &'a dyn LandmarkDetector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InterpretOptions {
    pub ransac_threshold: f64,
    pub ransac_iterations: usize,
    pub clean_k: usize,
    pub clean_sigma: f64,
}

impl Default for InterpretOptions {
    fn default() -> Self {
        Self {
            ransac_threshold: DEFAULT_RANSAC_THRESHOLD,
            ransac_iterations: DEFAULT_RANSAC_ITERATIONS,
            clean_k: 8,
            clean_sigma: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProgramValue {
    Mask(Mask),
    PointCloud(PointCloud),
    Plane(Plane),
    Cylinder(Cylinder),
    Sphere(Sphere),
    Skeleton(Box<BodyFrame>),
    Face(Box<BodyFrame>),
    Anchor(Box<ParametricAnchor>),
    Direction(Vec3),
    Null,
}

impl ProgramValue {
    pub fn value_type(&self) -> ValueType {
        match self {
            ProgramValue::Mask(_) => ValueType::Mask,
            ProgramValue::PointCloud(_) => ValueType::PointCloud,
            ProgramValue::Plane(_) => ValueType::Plane,
            ProgramValue::Cylinder(_) => ValueType::Cylinder,
            ProgramValue::Sphere(_) => ValueType::Sphere,
            ProgramValue::Skeleton(_) => ValueType::Skeleton,
            ProgramValue::Face(_) => ValueType::Face,
            ProgramValue::Anchor(_) => ValueType::Anchor,
            ProgramValue::Direction(_) => ValueType::Direction,
            ProgramValue::Null => ValueType::Null,
        }
    }

    /// Attribute access; `None` when the attribute is not defined on the value.
    pub fn attribute(&self, name: &str) -> Option<ProgramValue> {
        attribute_type(self.value_type(), name)?;
        let name = name.to_ascii_lowercase();
        Some(match (self, name.as_str()) {
            (ProgramValue::Plane(p), "extruded") => ProgramValue::Plane(derive_extruded_plane(p)),
            (ProgramValue::Plane(p), "primary") => ProgramValue::Direction(p.primary_dir),
            (ProgramValue::Skeleton(f) | ProgramValue::Face(f), attr) => match attr {
                "frontal" => ProgramValue::Plane(f.frontal.clone()),
                "median" => ProgramValue::Plane(f.median.clone()),
                "cranial" => ProgramValue::Direction(f.cranial),
                _ => ProgramValue::Direction(f.anterior),
            },
            _ => return None,
        })
    }
}

/// The anchor built by a program's final statement, with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct Extraction {
    pub anchor: ParametricAnchor,
    pub provenance: Provenance,
}

struct Failure {
    cause: &'static str,
    message: String,
}

impl From<UnprojectError> for Failure {
    fn from(e: UnprojectError) -> Self {
        let cause = match e {
            UnprojectError::EmptySelection => "EmptySelection",
            UnprojectError::NonpositiveDepth(_) => "NonpositiveDepth",
            UnprojectError::MaskDimensions { .. } => "MaskDimensions",
            UnprojectError::AllLandmarksInvalid => "AllLandmarksInvalid",
            UnprojectError::LandmarkOutOfBounds { .. } => "LandmarkOutOfBounds",
        };
        Failure {
            cause,
            message: e.to_string(),
        }
    }
}

impl From<GeomError> for Failure {
    fn from(e: GeomError) -> Self {
        let cause = match e {
            GeomError::DegenerateCloud(_) => "DegenerateCloud",
            GeomError::MissingLandmarks(_) => "MissingLandmarks",
        };
        Failure {
            cause,
            message: e.to_string(),
        }
    }
}

impl From<ServiceError> for Failure {
    fn from(e: ServiceError) -> Self {
        Failure {
            cause: "ServiceError",
            message: e.to_string(),
        }
    }
}

/// Runs a program against a scene. The program is type-checked first and the
/// first static diagnostic is returned if any. Statement `i` gets the seed
/// `seed + i` for its randomized fits. The anchor id is the terminal target;
/// its rationale is left empty for the caller to fill.
pub fn interpret_program(
    prog: &VisualProgram,
    scene: &DepthScene,
    services: Services<'_>,
    seed: u64,
    options: &InterpretOptions,
) -> Result<Extraction, Diagnostic> {
    if let Some(d) = typecheck_program(prog).into_iter().next() {
        return Err(d);
    }
    let mut env: HashMap<&str, ProgramValue> = HashMap::new();
    for (i, stmt) in prog.statements.iter().enumerate() {
        let cell = cell_signature(&stmt.cell.name).expect("typechecked").name;
        let value = run_cell(cell, stmt, &env, scene, services, seed.wrapping_add(i as u64), options)
            .map_err(|f| {
                Diagnostic::new(
                    DiagnosticKind::RuntimeFailure {
                        cell: cell.to_string(),
                        cause: f.cause.to_string(),
                    },
                    i,
                    stmt.span,
                    f.message,
                )
            })?;
        env.insert(&stmt.target.name, value);
    }
    let last = prog.terminal().expect("typechecked programs are nonempty");
    match env.remove(last.target.name.as_str()) {
        Some(ProgramValue::Anchor(anchor)) => Ok(Extraction {
            provenance: Provenance {
                anchor_id: anchor.id.clone(),
                program: prog.source.clone(),
                rationale: String::new(),
            },
            anchor: *anchor,
        }),
        _ => unreachable!("typecheck guarantees an anchor terminal"),
    }
}

fn resolve(value: &Value, env: &HashMap<&str, ProgramValue>) -> ProgramValue {
    match value {
        Value::Null { .. } => ProgramValue::Null,
        Value::Str { .. } => unreachable!("strings are only read by Text2Mask"),
        Value::Ref { ident, attr } => {
            let base = &env[ident.name.as_str()];
            match attr {
                None => base.clone(),
                Some(a) => base.attribute(&a.name).expect("typechecked attribute"),
            }
        }
    }
}

fn arg<'s>(stmt: &'s Statement, name: &str) -> Option<&'s Value> {
    stmt.args
        .iter()
        .find(|a| a.name.name.eq_ignore_ascii_case(name))
        .map(|a| &a.value)
}

fn run_cell(
    cell: &str,
    stmt: &Statement,
    env: &HashMap<&str, ProgramValue>,
    scene: &DepthScene,
    services: Services<'_>,
    seed: u64,
    options: &InterpretOptions,
) -> Result<ProgramValue, Failure> {
    let get = |name: &str| resolve(arg(stmt, name).expect("typechecked argument"), env);
    let cloud = || match get("pointcloud") {
        ProgramValue::PointCloud(pc) => pc,
        _ => unreachable!(),
    };
    let mask = || match get("mask") {
        ProgramValue::Mask(m) => m,
        _ => unreachable!(),
    };
    let id = stmt.target.name.clone();

    Ok(match cell {
        "Text2Mask" => {
            let Some(Value::Str { text, .. }) = arg(stmt, "prompt") else {
                unreachable!()
            };
            ProgramValue::Mask(services.segmenter.segment(scene, text)?)
        }
        "Mask2Pointcloud" => {
            let raw = mask_to_pointcloud(scene, &mask())?;
            let cleaned = clean_pointcloud(&raw, options.clean_k, options.clean_sigma);
            ProgramValue::PointCloud(cleaned.cloud)
        }
        "Pointcloud2Plane" => ProgramValue::Plane(fit_plane_ransac(
            &cloud(),
            options.ransac_threshold,
            options.ransac_iterations,
            seed,
        )?),
        "Pointcloud2Cylinder" => {
            let direction = match arg(stmt, "direction").map(|v| resolve(v, env)) {
                Some(ProgramValue::Direction(d)) => Some(d),
                _ => None,
            };
            ProgramValue::Cylinder(fit_cylinder(&cloud(), direction)?)
        }
        "Pointcloud2Sphere" => ProgramValue::Sphere(fit_sphere_with_seed(&cloud(), seed)?),
        "SkeletonExtraction" | "Pointcloud2Skeleton" => {
            ProgramValue::Skeleton(Box::new(body_frame(scene, services, &mask(), BodyKind::Skeleton)?))
        }
        "FaceExtraction" | "Pointcloud2Face" => {
            ProgramValue::Face(Box::new(body_frame(scene, services, &mask(), BodyKind::Face)?))
        }
        "Planar" => match get("plane") {
            ProgramValue::Plane(p) => anchor(id, AnchorGeometry::Plane(p)),
            _ => unreachable!(),
        },
        "Cylindrical" => match get("cylinder") {
            ProgramValue::Cylinder(c) => anchor(id, AnchorGeometry::Cylinder(c)),
            _ => unreachable!(),
        },
        "Spherical" => match get("sphere") {
            ProgramValue::Sphere(s) => anchor(id, AnchorGeometry::Sphere(s)),
            _ => unreachable!(),
        },
        other => unreachable!("unregistered cell {other}"),
    })
}

fn anchor(id: String, geometry: AnchorGeometry) -> ProgramValue {
    ProgramValue::Anchor(Box::new(ParametricAnchor::new(id, geometry, "")))
}

fn body_frame(
    scene: &DepthScene,
    services: Services<'_>,
    mask: &Mask,
    kind: BodyKind,
) -> Result<BodyFrame, Failure> {
    let detected = services.landmarks.detect(scene, mask, kind)?;
    if detected.is_empty() {
        let missing = kind.required_landmarks().iter().map(|s| s.to_string()).collect();
        return Err(GeomError::MissingLandmarks(missing).into());
    }
    let cast = cast_landmarks(scene, &detected)?;
    Ok(derive_body_frames(&cast.landmarks, kind)?)
}
