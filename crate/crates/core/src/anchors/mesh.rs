use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use super::{AnchorGeometry, AnchorParams, ParametricAnchor};
use crate::geom::{self, Vec3, IMAGE_UP};

/// Regular triangulated grid over an anchor surface. Triangles wind so that
/// `(b − a) × (c − a)` is the front (plane normal side) or outward normal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceMesh {
    pub vertices: Vec<Vec3>,
    pub uvs: Vec<[f64; 2]>,
    pub triangles: Vec<[u32; 3]>,
}

impl SurfaceMesh {
    fn grid(n: usize, mut at: impl FnMut(f64, f64) -> Vec3) -> Self {
        let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
        let mut uvs = Vec::with_capacity(vertices.capacity());
        for j in 0..=n {
            let t = j as f64 / n as f64;
            for i in 0..=n {
                let s = i as f64 / n as f64;
                vertices.push(at(s, t));
                uvs.push([s, t]);
            }
        }
        let idx = |i: usize, j: usize| (j * (n + 1) + i) as u32;
        let mut triangles = Vec::with_capacity(2 * n * n);
        for j in 0..n {
            for i in 0..n {
                let (a, b, c, d) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
                triangles.push([a, b, c]);
                triangles.push([a, c, d]);
            }
        }
        Self {
            vertices,
            uvs,
            triangles,
        }
    }

    pub fn triangle_normal(&self, tri: usize) -> Vec3 {
        let [a, b, c] = self.triangles[tri].map(|i| self.vertices[i as usize]);
        (b - a).cross(&(c - a))
    }
}

/// One cell for planes (exact under perspective-correct interpolation),
/// a finer grid for curved bands.
pub fn default_tessellation(anchor: &ParametricAnchor) -> usize {
    match anchor.geometry {
        AnchorGeometry::Plane(_) => 1,
        _ => 64,
    }
}

/// Frame for a band around `center`: `up` is the band's t direction, `back`
/// points away from the camera (the seam side), `side = up × back`.
pub(crate) fn band_frame(center: &Vec3, up: Vec3) -> (Vec3, Vec3, Vec3) {
    let back = geom::reject(center, &up);
    let back = if back.norm() > 1e-12 * center.norm().max(1.0) {
        back.normalize()
    } else {
        geom::any_orthogonal(&up)
    };
    (up, back, up.cross(&back))
}

/// Cylinder axis signed toward image-up (image-right for horizontal axes).
pub(crate) fn upward_axis(axis: &Vec3) -> Vec3 {
    let a = axis.normalize();
    let d = a.dot(&IMAGE_UP);
    if d < -1e-12 || (d.abs() <= 1e-12 && a.x < 0.0) {
        -a
    } else {
        a
    }
}

pub fn build_surface_mesh(anchor: &ParametricAnchor, tessellation: usize) -> SurfaceMesh {
    let n = tessellation.max(1);
    match (&anchor.geometry, &anchor.free_params) {
        (AnchorGeometry::Plane(pl), AnchorParams::Planar(p)) => {
            let origin = pl.centroid + pl.normal * p.offset;
            let (u, v) = (pl.primary_dir, pl.secondary_dir());
            SurfaceMesh::grid(n, |s, t| {
                origin + u * ((2.0 * s - 1.0) * p.size[0]) + v * ((2.0 * t - 1.0) * p.size[1])
            })
        }
        (AnchorGeometry::Cylinder(cy), AnchorParams::Cylindrical(p)) => {
            let (a, back, side) = band_frame(&cy.axis_point, upward_axis(&cy.axis_dir));
            let r = cy.radius * p.radius_scale;
            SurfaceMesh::grid(n, |s, t| {
                let theta = p.angular_offset + PI + (s - 0.5) * p.arc_span;
                let (sin, cos) = theta.sin_cos();
                cy.axis_point
                    + a * (p.height_offset + (t - 0.5) * p.band_height)
                    + (back * cos + side * sin) * r
            })
        }
        (AnchorGeometry::Sphere(sp), AnchorParams::Spherical(p)) => {
            let (pole, back, side) = band_frame(&sp.center, IMAGE_UP);
            let r = sp.radius * p.radius_scale;
            SurfaceMesh::grid(n, |s, t| {
                let lon = p.longitude_center + PI + (s - 0.5) * TAU;
                let lat = p.latitude_center + (2.0 * t - 1.0) * p.band_extent;
                let (slon, clon) = lon.sin_cos();
                let (slat, clat) = lat.sin_cos();
                sp.center + ((back * clon + side * slon) * clat + pole * slat) * r
            })
        }
        _ => panic!("anchor '{}' has parameters of the wrong kind", anchor.id),
    }
}
