use nalgebra::Vector2;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Cylinder, GeomError};
use crate::geom::{self, Vec3};
use crate::unproject::PointCloud;

type P2 = Vector2<f64>;

/// Fixed shuffle seed; the cylinder fit takes no seed of its own.
const CIRCLE_SHUFFLE_SEED: u64 = 0x5eed_c1c1e;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Circle {
    pub center: P2,
    pub radius: f64,
}

impl Circle {
    fn contains(&self, p: &P2) -> bool {
        (p - self.center).norm() <= self.radius * (1.0 + 1e-12) + 1e-15
    }

    fn diametral(a: &P2, b: &P2) -> Self {
        let center = (a + b) / 2.0;
        Self {
            center,
            radius: (a - center).norm().max((b - center).norm()),
        }
    }

    fn circumscribed(a: &P2, b: &P2, c: &P2) -> Self {
        let (bx, by) = (b.x - a.x, b.y - a.y);
        let (cx, cy) = (c.x - a.x, c.y - a.y);
        let det = 2.0 * (bx * cy - by * cx);
        if det.abs() <= 1e-14 * (bx * bx + by * by + cx * cx + cy * cy) {
            // Collinear: the widest pair spans the other point.
            let cands = [Self::diametral(a, b), Self::diametral(a, c), Self::diametral(b, c)];
            return cands
                .into_iter()
                .max_by(|x, y| x.radius.total_cmp(&y.radius))
                .unwrap();
        }
        let b2 = bx * bx + by * by;
        let c2 = cx * cx + cy * cy;
        let ux = (cy * b2 - by * c2) / det;
        let uy = (bx * c2 - cx * b2) / det;
        let center = P2::new(a.x + ux, a.y + uy);
        let radius = [a, b, c]
            .iter()
            .map(|p| (*p - center).norm())
            .fold(0.0, f64::max);
        Self { center, radius }
    }
}

/// Smallest circle enclosing `points` (randomised incremental construction,
/// expected linear time). `points` must be non-empty.
pub fn min_enclosing_circle(points: &[P2], seed: u64) -> Circle {
    let mut pts = points.to_vec();
    pts.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut c = Circle {
        center: pts[0],
        radius: 0.0,
    };
    for i in 1..pts.len() {
        if c.contains(&pts[i]) {
            continue;
        }
        c = Circle {
            center: pts[i],
            radius: 0.0,
        };
        for j in 0..i {
            if c.contains(&pts[j]) {
                continue;
            }
            c = Circle::diametral(&pts[i], &pts[j]);
            for k in 0..j {
                if !c.contains(&pts[k]) {
                    c = Circle::circumscribed(&pts[i], &pts[j], &pts[k]);
                }
            }
        }
    }
    c
}

/// Containing cylinder. The axis direction is `direction` when given, else the
/// first principal component; the axis position minimises the radius needed
/// to contain every point.
pub fn fit_cylinder(pc: &PointCloud, direction: Option<Vec3>) -> Result<Cylinder, GeomError> {
    let points = &pc.points;
    if points.is_empty() {
        return Err(GeomError::DegenerateCloud("empty cloud".into()));
    }
    let c = geom::centroid(points);
    let axis = match direction {
        Some(d) => {
            let n = d.norm();
            if !(n > 0.0) || !n.is_finite() {
                return Err(GeomError::DegenerateCloud(
                    "axis direction must be a nonzero finite vector".into(),
                ));
            }
            d / n
        }
        None => {
            if points.len() < 2 {
                return Err(GeomError::DegenerateCloud(
                    "a single point has no principal axis".into(),
                ));
            }
            let pa = geom::principal_axes(&geom::covariance(points, &c));
            if !(pa.values[0] > 0.0) {
                return Err(GeomError::DegenerateCloud("all points coincide".into()));
            }
            pa.axes[0]
        }
    };

    let e1 = geom::any_orthogonal(&axis);
    let e2 = axis.cross(&e1);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let planar: Vec<P2> = points
        .iter()
        .map(|p| {
            let q = p - c;
            let h = q.dot(&axis);
            lo = lo.min(h);
            hi = hi.max(h);
            P2::new(q.dot(&e1), q.dot(&e2))
        })
        .collect();
    let circle = min_enclosing_circle(&planar, CIRCLE_SHUFFLE_SEED);

    let mut cyl = Cylinder {
        axis_point: c + e1 * circle.center.x + e2 * circle.center.y + axis * ((lo + hi) / 2.0),
        axis_dir: axis,
        radius: circle.radius,
        half_height: (hi - lo) / 2.0,
    };
    // Absorb rounding so containment holds exactly.
    for p in points {
        cyl.radius = cyl.radius.max(cyl.distance_to_axis(p));
        cyl.half_height = cyl
            .half_height
            .max((p - cyl.axis_point).dot(&axis).abs());
    }
    Ok(cyl)
}
