use nalgebra::{Matrix3, Rotation3, Unit, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, UnitSphere};
use strata_core::{Cylinder, PointCloud};

pub type V3 = Vector3<f64>;

/// Smallest sphere with every point of `s` (1 to 4 points) on its boundary.
pub fn circumsphere(s: &[V3]) -> Option<(V3, f64)> {
    match s.len() {
        1 => Some((s[0], 0.0)),
        2 => {
            let c = (s[0] + s[1]) / 2.0;
            Some((c, (s[0] - c).norm()))
        }
        3 => {
            let (a, b, c) = (s[0], s[1], s[2]);
            let (ab, ac) = (b - a, c - a);
            let n = ab.cross(&ac);
            let n2 = n.norm_squared();
            if n2 < 1e-18 {
                return None;
            }
            let off = (n.cross(&ab) * ac.norm_squared() + ac.cross(&n) * ab.norm_squared()) / (2.0 * n2);
            Some((a + off, off.norm()))
        }
        4 => {
            let r: Vec<V3> = s[1..].iter().map(|p| p - s[0]).collect();
            let m = Matrix3::from_rows(&[r[0].transpose(), r[1].transpose(), r[2].transpose()]);
            if m.determinant().abs() < 1e-12 {
                return None;
            }
            let rhs = V3::new(r[0].norm_squared(), r[1].norm_squared(), r[2].norm_squared()) / 2.0;
            let x = m.try_inverse()? * rhs;
            Some((s[0] + x, x.norm()))
        }
        _ => None,
    }
}

/// O(n⁴) minimal enclosing sphere: the smallest containing sphere among all
/// spheres determined by one to four input points.
pub fn brute_force_sphere(pts: &[V3]) -> (V3, f64) {
    let n = pts.len();
    let mut best: Option<(V3, f64)> = None;
    let mut consider = |s: &[V3]| {
        if let Some((c, r)) = circumsphere(s) {
            let contains = pts.iter().all(|p| (p - c).norm() <= r * (1.0 + 1e-10) + 1e-12);
            if contains && best.is_none_or(|b| r < b.1) {
                best = Some((c, r));
            }
        }
    };
    for i in 0..n {
        consider(&[pts[i]]);
        for j in i + 1..n {
            consider(&[pts[i], pts[j]]);
            for k in j + 1..n {
                consider(&[pts[i], pts[j], pts[k]]);
                for l in k + 1..n {
                    consider(&[pts[i], pts[j], pts[k], pts[l]]);
                }
            }
        }
    }
    best.expect("nonempty input")
}

pub fn random_cloud(seed: u64, n: usize) -> Vec<V3> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| V3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(2.0..4.0)))
        .collect()
}

fn random_unit(rng: &mut ChaCha8Rng) -> V3 {
    V3::from(UnitSphere.sample(rng))
}

/// Points on the lateral surface of a randomly posed cylinder: rings at
/// heights symmetric about the centre, with evenly spaced angles and a random
/// phase. The symmetric layout makes the centred covariance exactly
/// axis-aligned, so the true axis is the first principal axis.
pub fn cylinder_grid(seed: u64) -> (PointCloud, Cylinder) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let axis = random_unit(&mut rng);
    let radius = rng.random_range(0.2..1.5);
    let half_height = radius * rng.random_range(2.0..5.0);
    let centre = V3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(4.0..9.0));
    let spin = rng.random_range(0.0..std::f64::consts::TAU);
    let rot = Rotation3::from_axis_angle(&Unit::new_normalize(axis), spin);
    let base = if axis.x.abs() < 0.9 { V3::x() } else { V3::y() };
    let e1 = rot * axis.cross(&base).normalize();
    let e2 = axis.cross(&e1);
    let (rings, per_ring) = (21, 48);
    let mut pts = Vec::with_capacity(rings * per_ring);
    for i in 0..rings {
        let h = half_height * (2.0 * i as f64 / (rings - 1) as f64 - 1.0);
        for k in 0..per_ring {
            let th = std::f64::consts::TAU * k as f64 / per_ring as f64;
            pts.push(centre + axis * h + (e1 * th.cos() + e2 * th.sin()) * radius);
        }
    }
    let truth = Cylinder {
        axis_point: centre,
        axis_dir: axis,
        radius,
        half_height,
    };
    (PointCloud::from_points(pts), truth)
}

/// 800 points on a tilted plane with Gaussian noise of σ = 0.01 · depth along
/// the normal, plus 200 uniform outliers (20%). Returns the cloud and the
/// true unit normal.
pub fn noisy_plane_cloud(seed: u64) -> (PointCloud, V3) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut normal = random_unit(&mut rng);
    if normal.z.abs() < 0.3 {
        normal.z = 0.3f64.copysign(normal.z + 1e-12);
        normal = normal.normalize();
    }
    let centre = V3::new(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5), rng.random_range(3.0..6.0));
    let base = if normal.x.abs() < 0.9 { V3::x() } else { V3::y() };
    let e1 = normal.cross(&base).normalize();
    let e2 = normal.cross(&e1);
    let noise = Normal::new(0.0, 0.01 * centre.z).unwrap();
    let mut pts = Vec::with_capacity(1000);
    for _ in 0..800 {
        pts.push(
            centre
                + e1 * rng.random_range(-1.5..1.5)
                + e2 * rng.random_range(-1.5..1.5)
                + normal * noise.sample(&mut rng),
        );
    }
    for _ in 0..200 {
        pts.push(centre + V3::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)));
    }
    (PointCloud::from_points(pts), normal)
}

/// Angle between two lines, degrees (sign-insensitive).
pub fn line_angle_deg(a: &V3, b: &V3) -> f64 {
    (a.dot(b).abs() / (a.norm() * b.norm())).min(1.0).acos().to_degrees()
}
