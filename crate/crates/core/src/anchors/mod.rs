//! Parametric anchors: a fitted primitive plus the few free parameters a
//! designer may adjust without leaving the geometry the primitive describes.
//!
//! Edits go through [`apply_constrained_edit`], which touches exactly one
//! parameter and clamps it into range. The fitted primitive itself is never
//! modified.

mod mesh;
mod texture;

use std::f64::consts::{FRAC_PI_2, FRAC_PI_6, TAU};

use serde::{Deserialize, Serialize};

use crate::geomfit::{Cylinder, Plane, Sphere};

pub use mesh::{build_surface_mesh, default_tessellation, SurfaceMesh};
pub use texture::{
    compose_layer_texture, placeholder_raster, sample_bilinear, raster_base64, PLACEHOLDER_ASSET,
};

pub const MIN_SCALE: f64 = 1e-3;
pub const MIN_ARC_SPAN: f64 = 1e-3;
pub const MIN_BAND_HEIGHT: f64 = 1e-6;
pub const MIN_BAND_EXTENT: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AnchorKind {
    Planar,
    Cylindrical,
    Spherical,
}

impl AnchorKind {
    pub fn name(self) -> &'static str {
        match self {
            AnchorKind::Planar => "Planar",
            AnchorKind::Cylindrical => "Cylindrical",
            AnchorKind::Spherical => "Spherical",
        }
    }

    /// Parameter names accepted by [`apply_constrained_edit`].
    pub fn editable_params(self) -> &'static [&'static str] {
        match self {
            AnchorKind::Planar => &[
                "offset",
                "uv_center_u",
                "uv_center_v",
                "uv_scale",
                "uv_scale_u",
                "uv_scale_v",
                "rotation",
                "size",
                "size_w",
                "size_h",
            ],
            AnchorKind::Cylindrical => &[
                "radius_scale",
                "height_offset",
                "angular_offset",
                "band_height",
                "arc_span",
            ],
            AnchorKind::Spherical => &[
                "radius_scale",
                "latitude_center",
                "longitude_center",
                "band_extent",
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "lowercase")]
pub enum AnchorGeometry {
    Plane(Plane),
    Cylinder(Cylinder),
    Sphere(Sphere),
}

impl AnchorGeometry {
    pub fn anchor_kind(&self) -> AnchorKind {
        match self {
            AnchorGeometry::Plane(_) => AnchorKind::Planar,
            AnchorGeometry::Cylinder(_) => AnchorKind::Cylindrical,
            AnchorGeometry::Sphere(_) => AnchorKind::Spherical,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanarParams {
    /// Displacement along the plane normal.
    pub offset: f64,
    /// Content centre in plane units, relative to the plane centroid.
    pub uv_center: [f64; 2],
    pub uv_scale: [f64; 2],
    /// Content rotation about the normal, radians.
    pub rotation: f64,
    /// Surface half-extents along (primary_dir, secondary_dir).
    pub size: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CylindricalParams {
    pub radius_scale: f64,
    pub height_offset: f64,
    pub angular_offset: f64,
    pub band_height: f64,
    pub arc_span: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphericalParams {
    pub radius_scale: f64,
    pub latitude_center: f64,
    pub longitude_center: f64,
    /// Latitude half-width of the band.
    pub band_extent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum AnchorParams {
    Planar(PlanarParams),
    Cylindrical(CylindricalParams),
    Spherical(SphericalParams),
}

impl AnchorParams {
    /// The placeholder state: the surface hugs the fitted object.
    pub fn initial(geometry: &AnchorGeometry) -> Self {
        match geometry {
            AnchorGeometry::Plane(p) => AnchorParams::Planar(PlanarParams {
                offset: 0.0,
                uv_center: [0.0, 0.0],
                uv_scale: [1.0, 1.0],
                rotation: 0.0,
                size: p.extent,
            }),
            AnchorGeometry::Cylinder(c) => AnchorParams::Cylindrical(CylindricalParams {
                radius_scale: 1.0,
                height_offset: 0.0,
                angular_offset: 0.0,
                band_height: (2.0 * c.half_height).max(MIN_BAND_HEIGHT),
                arc_span: TAU,
            }),
            AnchorGeometry::Sphere(_) => AnchorParams::Spherical(SphericalParams {
                radius_scale: 1.0,
                latitude_center: 0.0,
                longitude_center: 0.0,
                band_extent: FRAC_PI_6,
            }),
        }
    }

    pub fn kind(&self) -> AnchorKind {
        match self {
            AnchorParams::Planar(_) => AnchorKind::Planar,
            AnchorParams::Cylindrical(_) => AnchorKind::Cylindrical,
            AnchorParams::Spherical(_) => AnchorKind::Spherical,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParametricAnchor {
    pub id: String,
    pub kind: AnchorKind,
    pub geometry: AnchorGeometry,
    pub rationale: String,
    pub free_params: AnchorParams,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AnchorError {
    #[error("unknown parameter '{name}' for {kind:?} anchor")]
    UnknownParam { kind: AnchorKind, name: String },
    #[error("anchor '{0}': kind does not match its geometry or parameters")]
    KindMismatch(String),
    #[error("edit delta must be finite")]
    NonfiniteDelta,
}

impl ParametricAnchor {
    pub fn new(id: impl Into<String>, geometry: AnchorGeometry, rationale: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            kind: geometry.anchor_kind(),
            free_params: AnchorParams::initial(&geometry),
            geometry,
            rationale: rationale.into(),
        }
    }

    pub fn check(&self) -> Result<(), AnchorError> {
        if self.geometry.anchor_kind() == self.kind && self.free_params.kind() == self.kind {
            Ok(())
        } else {
            Err(AnchorError::KindMismatch(self.id.clone()))
        }
    }

    /// Typical length of the anchor, used to scale pointer gestures.
    pub fn characteristic_scale(&self) -> f64 {
        match &self.geometry {
            AnchorGeometry::Plane(p) => p.extent[0].max(p.extent[1]),
            AnchorGeometry::Cylinder(c) => c.radius,
            AnchorGeometry::Sphere(s) => s.radius,
        }
    }
}

/// Adds `delta` to one named parameter, clamping into the valid range.
pub fn apply_constrained_edit(
    anchor: &ParametricAnchor,
    param: &str,
    delta: f64,
) -> Result<ParametricAnchor, AnchorError> {
    anchor.check()?;
    if !delta.is_finite() {
        return Err(AnchorError::NonfiniteDelta);
    }
    let mut out = anchor.clone();
    let unknown = || AnchorError::UnknownParam {
        kind: anchor.kind,
        name: param.to_string(),
    };
    let scale = |v: f64| (v + delta).max(MIN_SCALE);
    match &mut out.free_params {
        AnchorParams::Planar(p) => match param {
            "offset" => p.offset += delta,
            "uv_center_u" => p.uv_center[0] += delta,
            "uv_center_v" => p.uv_center[1] += delta,
            "uv_scale" => p.uv_scale = p.uv_scale.map(scale),
            "uv_scale_u" => p.uv_scale[0] = scale(p.uv_scale[0]),
            "uv_scale_v" => p.uv_scale[1] = scale(p.uv_scale[1]),
            "rotation" => p.rotation += delta,
            "size" => p.size = p.size.map(|v| (v + delta).max(0.0)),
            "size_w" => p.size[0] = (p.size[0] + delta).max(0.0),
            "size_h" => p.size[1] = (p.size[1] + delta).max(0.0),
            _ => return Err(unknown()),
        },
        AnchorParams::Cylindrical(c) => match param {
            "radius_scale" => c.radius_scale = scale(c.radius_scale),
            "height_offset" => c.height_offset += delta,
            "angular_offset" => c.angular_offset += delta,
            "band_height" => c.band_height = (c.band_height + delta).max(MIN_BAND_HEIGHT),
            "arc_span" => c.arc_span = (c.arc_span + delta).clamp(MIN_ARC_SPAN, TAU),
            _ => return Err(unknown()),
        },
        AnchorParams::Spherical(s) => match param {
            "radius_scale" => s.radius_scale = scale(s.radius_scale),
            "latitude_center" => {
                s.latitude_center = (s.latitude_center + delta).clamp(-FRAC_PI_2, FRAC_PI_2)
            }
            "longitude_center" => s.longitude_center += delta,
            "band_extent" => s.band_extent = (s.band_extent + delta).clamp(MIN_BAND_EXTENT, FRAC_PI_2),
            _ => return Err(unknown()),
        },
    }
    Ok(out)
}

/// Raster content placed on an anchor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContentLayer {
    pub id: String,
    pub anchor_id: String,
    #[serde(with = "texture::raster_serde")]
    pub content: image::RgbaImage,
    pub repeat: [u32; 2],
    pub gap: [f64; 2],
    pub mirror: bool,
    pub content_rotation: f64,
    pub visible: bool,
    pub double_sided: bool,
}

impl ContentLayer {
    /// A visible single-tile layer with the kind's default sidedness.
    pub fn new(id: impl Into<String>, anchor: &ParametricAnchor, content: image::RgbaImage) -> Self {
        Self {
            id: id.into(),
            anchor_id: anchor.id.clone(),
            content,
            repeat: [1, 1],
            gap: [0.0, 0.0],
            mirror: false,
            content_rotation: 0.0,
            visible: true,
            double_sided: anchor.kind == AnchorKind::Planar,
        }
    }

    pub fn is_valid(&self) -> bool {
        self.content.width() > 0
            && self.content.height() > 0
            && self.repeat[0] >= 1
            && self.repeat[1] >= 1
            && self.gap.iter().all(|g| g.is_finite() && *g >= 0.0)
            && self.content_rotation.is_finite()
    }
}

/// Maps mesh (s, t) to the unit square of the composed layer texture.
/// Planar anchors apply their centre, scale and rotation here; bands map
/// one-to-one.
pub fn content_uv(params: &AnchorParams, s: f64, t: f64) -> (f64, f64) {
    match params {
        AnchorParams::Planar(p) => {
            let w = if p.size[0] > 0.0 { p.size[0] } else { 1.0 };
            let h = if p.size[1] > 0.0 { p.size[1] } else { 1.0 };
            let x = (2.0 * s - 1.0) * w - p.uv_center[0];
            let y = (2.0 * t - 1.0) * h - p.uv_center[1];
            let (sin, cos) = crate::geom::sin_cos_snapped(-p.rotation);
            let (xr, yr) = (cos * x - sin * y, sin * x + cos * y);
            (xr / (2.0 * w * p.uv_scale[0]) + 0.5, yr / (2.0 * h * p.uv_scale[1]) + 0.5)
        }
        _ => (s, t),
    }
}
