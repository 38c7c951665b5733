//! Core engine for 2.5D layered design over a monocular depth reconstruction.
//!
//! The pipeline is: a [`scene::DepthScene`] (image, depth, pinhole camera) is
//! sampled into point clouds ([`unproject`]), primitives are fitted to them
//! ([`geomfit`]) under the direction of a small visual-program language
//! ([`vpdsl`]), the fitted primitives become constrained placement surfaces
//! ([`anchors`]), and content is composited back into the image with
//! depth-tested occlusion ([`render`]).
//!
//! Data-parallel inner loops run on rayon when the `parallel` feature is
//! enabled (the default) and fall back to plain iterators otherwise.

#[macro_use]
mod par;

pub mod anchors;
pub mod geom;
pub mod geomfit;
pub mod render;
pub mod scene;
pub mod unproject;
pub mod vpdsl;

pub use anchors::{AnchorKind, AnchorParams, ContentLayer, ParametricAnchor, SurfaceMesh};
pub use geomfit::{Cylinder, Plane, Sphere};
pub use scene::{DepthMap, DepthScene, PinholeCamera, SceneDocument};
pub use unproject::{Mask, PointCloud};
pub use par::is_parallel;

/// Re-exported so downstream crates agree on the vector type.
pub use nalgebra::{Vector2, Vector3};
