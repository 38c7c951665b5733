//! Primitive fitting over point clouds: RANSAC planes, containing cylinders,
//! exact minimal enclosing spheres, outlier cleaning, and body frames derived
//! from skeleton or face landmarks.
//!
//! All normals and facing directions are oriented toward the camera at the
//! origin. Randomised routines take an explicit seed.

mod clean;
mod cylinder;
mod frames;
mod plane;
mod sphere;

use serde::{Deserialize, Serialize};

use crate::geom::{Vec3, IMAGE_UP};

pub use clean::{clean_pointcloud, CleanResult};
pub use cylinder::{fit_cylinder, min_enclosing_circle, Circle};
pub use frames::{derive_body_frames, BodyFrame, BodyKind};
pub use plane::{
    fit_plane_ransac, fit_plane_ransac_detailed, PlaneFit, DEFAULT_RANSAC_ITERATIONS,
    DEFAULT_RANSAC_THRESHOLD,
};
pub use sphere::{fit_sphere, fit_sphere_with_seed, MAX_SPHERE_SAMPLES};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeomError {
    #[error("degenerate point cloud: {0}")]
    DegenerateCloud(String),
    #[error("missing landmarks: {}", .0.join(", "))]
    MissingLandmarks(Vec<String>),
}

/// `{p : normal·p + d = 0}` with an in-plane frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Plane {
    pub normal: Vec3,
    pub d: f64,
    pub centroid: Vec3,
    pub primary_dir: Vec3,
    /// Half-width along `primary_dir`, half-height along `normal × primary_dir`.
    pub extent: [f64; 2],
}

impl Plane {
    /// Builds a camera-facing plane through `point`. `primary_dir` is projected
    /// into the plane and signed so content laid along it reads unmirrored.
    pub fn through(point: Vec3, normal: Vec3, primary_dir: Vec3, extent: [f64; 2]) -> Self {
        let normal = crate::geom::face_camera(normal.normalize(), &point);
        let primary = crate::geom::reject(&primary_dir, &normal).normalize();
        let primary_dir = reading_orientation(&normal, primary);
        Self {
            normal,
            d: -normal.dot(&point),
            centroid: point,
            primary_dir,
            extent,
        }
    }

    pub fn signed_distance(&self, p: &Vec3) -> f64 {
        self.normal.dot(p) + self.d
    }

    /// In-plane axis completing (primary_dir, secondary_dir, normal).
    pub fn secondary_dir(&self) -> Vec3 {
        self.normal.cross(&self.primary_dir)
    }
}

/// Signs an in-plane direction so it points image-right, or when it has no
/// horizontal component, so that `normal × dir` points image-up.
pub(crate) fn reading_orientation(normal: &Vec3, dir: Vec3) -> Vec3 {
    if dir.x.abs() > 1e-9 {
        if dir.x < 0.0 {
            -dir
        } else {
            dir
        }
    } else if normal.cross(&dir).dot(&IMAGE_UP) < 0.0 {
        -dir
    } else {
        dir
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cylinder {
    pub axis_point: Vec3,
    pub axis_dir: Vec3,
    pub radius: f64,
    pub half_height: f64,
}

impl Cylinder {
    pub fn distance_to_axis(&self, p: &Vec3) -> f64 {
        crate::geom::reject(&(p - self.axis_point), &self.axis_dir).norm()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sphere {
    pub center: Vec3,
    pub radius: f64,
}

/// Derived plane standing perpendicular to `plane` along its primary
/// direction (a wall raised from a floor's dominant direction).
pub fn derive_extruded_plane(plane: &Plane) -> Plane {
    let normal = plane.normal.cross(&plane.primary_dir).normalize();
    Plane::through(plane.centroid, normal, plane.primary_dir, plane.extent)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ground() -> Plane {
        Plane {
            normal: Vec3::new(0.0, -1.0, 0.0),
            d: 1.5,
            centroid: Vec3::new(0.2, 1.5, 4.0),
            primary_dir: Vec3::new(1.0, 0.0, 0.0),
            extent: [2.0, 3.0],
        }
    }

    #[test]
    fn extruded_ground_is_a_camera_facing_wall() {
        let e = derive_extruded_plane(&ground());
        assert!((e.normal - Vec3::new(0.0, 0.0, -1.0)).norm() < 1e-12);
        assert!((e.primary_dir - Vec3::x()).norm() < 1e-12);
        assert!(e.signed_distance(&ground().centroid).abs() < 1e-12);
        assert!(e.normal.dot(&ground().normal).abs() < 1e-12);
    }

    #[test]
    fn extruding_twice_is_parallel_to_the_original() {
        let twice = derive_extruded_plane(&derive_extruded_plane(&ground()));
        assert!((twice.normal.dot(&ground().normal).abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn anchor_geometry_json_field_names() {
        let json = serde_json::to_value(ground()).unwrap();
        for key in ["normal", "d", "centroid", "primary_dir", "extent"] {
            assert!(json.get(key).is_some(), "{key}");
        }
    }
}
