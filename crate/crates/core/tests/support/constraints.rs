//! Random constrained-edit sequences and the checks applied after each.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use strata_core::anchors::{
    apply_constrained_edit, build_surface_mesh, AnchorError, AnchorGeometry, MIN_ARC_SPAN, MIN_BAND_EXTENT,
    MIN_BAND_HEIGHT, MIN_SCALE,
};
use strata_core::{AnchorParams, Cylinder, ParametricAnchor, Plane, Sphere, Vector3};

type V3 = Vector3<f64>;

pub const SEQUENCES: usize = 1000;
pub const TOL: f64 = 1e-9;

pub fn anchors() -> [ParametricAnchor; 3] {
    let plane = Plane::through(V3::new(0.4, 0.6, 5.0), V3::new(0.2, -0.5, -1.0), V3::new(1.0, 0.1, 0.0), [1.2, 0.7]);
    let cyl = Cylinder {
        axis_point: V3::new(-0.3, 0.1, 6.0),
        axis_dir: V3::new(0.15, -1.0, 0.1).normalize(),
        radius: 0.6,
        half_height: 1.4,
    };
    let sph = Sphere {
        center: V3::new(0.5, -0.4, 7.0),
        radius: 1.1,
    };
    [
        ParametricAnchor::new("p", AnchorGeometry::Plane(plane), ""),
        ParametricAnchor::new("c", AnchorGeometry::Cylinder(cyl), ""),
        ParametricAnchor::new("s", AnchorGeometry::Sphere(sph), ""),
    ]
}

pub fn random_delta(rng: &mut ChaCha8Rng) -> f64 {
    match rng.random_range(0..10) {
        0 => rng.random_range(-1e3..1e3),
        1 => 0.0,
        _ => rng.random_range(-1.5..1.5),
    }
}

pub fn parallel(a: &V3, b: &V3) -> bool {
    a.cross(b).norm() <= TOL * a.norm() * b.norm()
}

pub fn check_ranges(params: &AnchorParams) {
    use std::f64::consts::{FRAC_PI_2, TAU};
    match params {
        AnchorParams::Planar(p) => {
            assert!(p.uv_scale.iter().all(|s| *s >= MIN_SCALE));
            assert!(p.size.iter().all(|s| *s >= 0.0));
        }
        AnchorParams::Cylindrical(c) => {
            assert!(c.radius_scale >= MIN_SCALE);
            assert!(c.band_height >= MIN_BAND_HEIGHT);
            assert!((MIN_ARC_SPAN..=TAU).contains(&c.arc_span));
        }
        AnchorParams::Spherical(s) => {
            assert!(s.radius_scale >= MIN_SCALE);
            assert!((-FRAC_PI_2..=FRAC_PI_2).contains(&s.latitude_center));
            assert!((MIN_BAND_EXTENT..=FRAC_PI_2).contains(&s.band_extent));
        }
    }
}

/// The surface built from the edited parameters still lies on the original
/// primitive (scaled about its own axis or centre where the kind allows it).
pub fn check_surface(a: &ParametricAnchor) {
    let n = 6;
    let mesh = build_surface_mesh(a, n);
    match (&a.geometry, &a.free_params) {
        (AnchorGeometry::Plane(pl), AnchorParams::Planar(p)) => {
            let scale = pl.centroid.norm() + p.offset.abs() + p.size[0] + p.size[1];
            for v in &mesh.vertices {
                assert!((pl.signed_distance(v) - p.offset).abs() <= TOL * scale);
            }
            for i in 0..mesh.triangles.len() {
                let tn = mesh.triangle_normal(i);
                if tn.norm() > 1e-12 {
                    assert!(parallel(&tn, &pl.normal) && tn.dot(&pl.normal) > 0.0);
                }
            }
        }
        (AnchorGeometry::Cylinder(c), AnchorParams::Cylindrical(p)) => {
            let r = c.radius * p.radius_scale;
            for v in &mesh.vertices {
                assert!((c.distance_to_axis(v) - r).abs() <= TOL * (r + c.axis_point.norm()));
            }
            for i in 0..=n {
                // Columns run along the axis: no off-axis drift beyond rounding.
                let along = mesh.vertices[n * (n + 1) + i] - mesh.vertices[i];
                let axis = c.axis_dir.normalize();
                let drift = (along - axis * along.dot(&axis)).norm();
                assert!(drift <= TOL * (r + c.axis_point.norm()));
            }
        }
        (AnchorGeometry::Sphere(s), AnchorParams::Spherical(p)) => {
            let r = s.radius * p.radius_scale;
            for (k, v) in mesh.vertices.iter().enumerate() {
                assert!(((v - s.center).norm() - r).abs() <= TOL * (r + s.center.norm()));
                let row_start = mesh.vertices[k - k % (n + 1)];
                assert!(((v - s.center).y - (row_start - s.center).y).abs() <= TOL * (r + s.center.norm()));
            }
        }
        _ => panic!("kind mismatch"),
    }
}

pub fn run_sequences(original: &ParametricAnchor, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let names = original.kind.editable_params();
    for _ in 0..SEQUENCES {
        let mut a = original.clone();
        for _ in 0..rng.random_range(1..=12) {
            if rng.random_range(0..20) == 0 {
                let err = apply_constrained_edit(&a, "normal_x", 0.1).unwrap_err();
                assert!(matches!(err, AnchorError::UnknownParam { .. }));
                continue;
            }
            let name = names[rng.random_range(0..names.len())];
            a = apply_constrained_edit(&a, name, random_delta(&mut rng)).unwrap();
            assert_eq!(a.geometry, original.geometry);
            assert_eq!(a.kind, original.kind);
            check_ranges(&a.free_params);
        }
        check_surface(&a);
    }
}

