//! Small linear-algebra helpers shared by the fitting, anchor and render code.

use nalgebra::{Matrix2, Matrix3, SymmetricEigen, Vector2, Vector3};

pub type Vec3 = Vector3<f64>;

/// Camera-space direction of image "up" (decreasing v).
pub const IMAGE_UP: Vec3 = Vector3::new(0.0, -1.0, 0.0);

/// Mean of a non-empty point set.
pub fn centroid(points: &[Vec3]) -> Vec3 {
    let sum = points.iter().fold(Vec3::zeros(), |acc, p| acc + p);
    sum / points.len() as f64
}

/// Covariance (divided by n) of points about `center`.
pub fn covariance(points: &[Vec3], center: &Vec3) -> Matrix3<f64> {
    let mut cov = Matrix3::zeros();
    for p in points {
        let d = p - center;
        cov += d * d.transpose();
    }
    cov / points.len() as f64
}

/// Principal axes of a point set: eigenvalues in descending order with
/// eigenvectors whose largest-magnitude component is positive.
#[derive(Debug, Clone)]
pub struct Principal {
    pub values: [f64; 3],
    pub axes: [Vec3; 3],
}

pub fn principal_axes(cov: &Matrix3<f64>) -> Principal {
    let eig = SymmetricEigen::new(*cov);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let axes = order.map(|i| canonical_sign(eig.eigenvectors.column(i).into_owned().normalize()));
    let values = order.map(|i| eig.eigenvalues[i]);
    Principal { values, axes }
}

/// Flip `v` so its largest-magnitude component is positive.
pub fn canonical_sign(v: Vec3) -> Vec3 {
    let mut best = 0;
    for i in 1..3 {
        if v[i].abs() > v[best].abs() {
            best = i;
        }
    }
    if v[best] < 0.0 {
        -v
    } else {
        v
    }
}

/// Dominant eigenvector of a symmetric 2x2 matrix (unit length, sign not fixed).
pub fn dominant_eigenvector_2d(m: &Matrix2<f64>) -> Vector2<f64> {
    let eig = SymmetricEigen::new(*m);
    let i = if eig.eigenvalues[0] >= eig.eigenvalues[1] { 0 } else { 1 };
    eig.eigenvectors.column(i).into_owned().normalize()
}

/// Any unit vector orthogonal to `n` (deterministic).
pub fn any_orthogonal(n: &Vec3) -> Vec3 {
    let helper = if n.x.abs() <= n.y.abs() && n.x.abs() <= n.z.abs() {
        Vec3::x()
    } else if n.y.abs() <= n.z.abs() {
        Vec3::y()
    } else {
        Vec3::z()
    };
    n.cross(&helper).normalize()
}

/// Flip `dir` so that it points toward a camera at the origin as seen from
/// `anchor` (dir·(-anchor) > 0). Exactly perpendicular directions are kept.
pub fn face_camera(dir: Vec3, anchor: &Vec3) -> Vec3 {
    if dir.dot(&(-anchor)) < 0.0 {
        -dir
    } else {
        dir
    }
}

/// Component of `v` orthogonal to the unit vector `axis`.
pub fn reject(v: &Vec3, axis: &Vec3) -> Vec3 {
    v - axis * v.dot(axis)
}

/// Snap sine/cosine of quarter-turn multiples to exact values.
pub fn sin_cos_snapped(theta: f64) -> (f64, f64) {
    let (mut s, mut c) = theta.sin_cos();
    if s.abs() < 1e-12 {
        s = 0.0;
        c = c.signum();
    } else if c.abs() < 1e-12 {
        c = 0.0;
        s = s.signum();
    }
    (s, c)
}
