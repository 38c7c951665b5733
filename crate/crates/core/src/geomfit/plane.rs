use nalgebra::Matrix2;
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{GeomError, Plane};
use crate::geom::{self, Vec3};
#[cfg(feature = "parallel")]
use crate::par::*;
use crate::unproject::PointCloud;

/// Inlier threshold as a fraction of the cloud's median depth.
pub const DEFAULT_RANSAC_THRESHOLD: f64 = 0.01;
pub const DEFAULT_RANSAC_ITERATIONS: usize = 500;
const REFIT_ROUNDS: usize = 3;

/// A fitted plane with the inlier indices it was computed from.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneFit {
    pub plane: Plane,
    /// Inliers of the returned (refitted) plane.
    pub inliers: Vec<usize>,
    /// Consensus size of the best RANSAC candidate before refitting.
    pub consensus: usize,
    /// Absolute inlier distance (`threshold · median depth`).
    pub inlier_distance: f64,
}

pub fn fit_plane_ransac(
    pc: &PointCloud,
    threshold: f64,
    iterations: usize,
    seed: u64,
) -> Result<Plane, GeomError> {
    fit_plane_ransac_detailed(pc, threshold, iterations, seed).map(|f| f.plane)
}

/// The candidate sample sequence: a `ChaCha8Rng` seeded with `seed` draws
/// `iterations` index triples with `rand::seq::index::sample(rng, n, 3)`.
fn sample_triples(n: usize, iterations: usize, seed: u64) -> Vec<[usize; 3]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..iterations)
        .map(|_| {
            let s = index::sample(&mut rng, n, 3);
            [s.index(0), s.index(1), s.index(2)]
        })
        .collect()
}

fn plane_through(a: &Vec3, b: &Vec3, c: &Vec3) -> Option<(Vec3, f64)> {
    let u = b - a;
    let v = c - a;
    let n = u.cross(&v);
    let scale = u.norm() * v.norm();
    if !(n.norm() > 1e-12 * scale) {
        return None;
    }
    let n = n.normalize();
    Some((n, -n.dot(a)))
}

fn inliers_of(points: &[Vec3], normal: &Vec3, d: f64, dist: f64) -> Vec<usize> {
    points
        .iter()
        .enumerate()
        .filter(|(_, p)| (normal.dot(p) + d).abs() <= dist)
        .map(|(i, _)| i)
        .collect()
}

fn least_squares(points: &[Vec3], idx: &[usize]) -> (Vec3, f64) {
    let sel: Vec<Vec3> = idx.iter().map(|&i| points[i]).collect();
    let c = geom::centroid(&sel);
    let pa = geom::principal_axes(&geom::covariance(&sel, &c));
    let n = pa.axes[2];
    (n, -n.dot(&c))
}

fn ensure_not_degenerate(points: &[Vec3]) -> Result<(), GeomError> {
    if points.len() < 3 {
        return Err(GeomError::DegenerateCloud(format!(
            "plane fit needs at least 3 points, got {}",
            points.len()
        )));
    }
    let c = geom::centroid(points);
    let pa = geom::principal_axes(&geom::covariance(points, &c));
    if !(pa.values[0] > 0.0) || pa.values[1] <= 1e-12 * pa.values[0] {
        return Err(GeomError::DegenerateCloud("points are collinear".into()));
    }
    Ok(())
}

/// RANSAC plane fit with a least-squares refit on the winning inlier set.
///
/// Inliers are points within `threshold · median_depth` of the returned plane;
/// the returned inlier list is computed against the returned plane itself.
pub fn fit_plane_ransac_detailed(
    pc: &PointCloud,
    threshold: f64,
    iterations: usize,
    seed: u64,
) -> Result<PlaneFit, GeomError> {
    let points = &pc.points;
    ensure_not_degenerate(points)?;
    let dist = threshold * pc.median_depth();
    let samples = sample_triples(points.len(), iterations.max(1), seed);

    // Score candidates in parallel; ties go to the earliest sample.
    let best = maybe_par_iter!(samples)
        .enumerate()
        .filter_map(|(i, s)| {
            let (n, d) = plane_through(&points[s[0]], &points[s[1]], &points[s[2]])?;
            let count = points
                .iter()
                .filter(|p| (n.dot(p) + d).abs() <= dist)
                .count();
            Some((count, i, n, d))
        })
        .max_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)));

    let Some((consensus, _, cand_n, cand_d)) = best else {
        return Err(GeomError::DegenerateCloud(
            "no non-degenerate RANSAC sample".into(),
        ));
    };

    let mut normal = cand_n;
    let mut d = cand_d;
    let mut inliers = inliers_of(points, &normal, d, dist);
    for _ in 0..REFIT_ROUNDS {
        if inliers.len() < 3 {
            break;
        }
        let (rn, rd) = least_squares(points, &inliers);
        let refit = inliers_of(points, &rn, rd, dist);
        if refit.len() < inliers.len() {
            break;
        }
        let unchanged = refit == inliers;
        normal = rn;
        d = rd;
        inliers = refit;
        if unchanged {
            break;
        }
    }

    let sel: Vec<Vec3> = inliers.iter().map(|&i| points[i]).collect();
    let raw_centroid = geom::centroid(&sel);
    let centroid = raw_centroid - normal * (normal.dot(&raw_centroid) + d);
    if normal.dot(&(-centroid)) < 0.0 {
        normal = -normal;
        d = -d;
    }

    // Dominant in-plane direction of the inlier scatter.
    let e1 = geom::any_orthogonal(&normal);
    let e2 = normal.cross(&e1);
    let mut m = Matrix2::zeros();
    for p in &sel {
        let q = p - centroid;
        let (a, b) = (q.dot(&e1), q.dot(&e2));
        m[(0, 0)] += a * a;
        m[(0, 1)] += a * b;
        m[(1, 1)] += b * b;
    }
    m[(1, 0)] = m[(0, 1)];
    let dom = geom::dominant_eigenvector_2d(&m);
    let primary = super::reading_orientation(&normal, (e1 * dom.x + e2 * dom.y).normalize());
    let secondary = normal.cross(&primary);
    let extent = sel.iter().fold([0.0f64; 2], |acc, p| {
        let q = p - centroid;
        [acc[0].max(q.dot(&primary).abs()), acc[1].max(q.dot(&secondary).abs())]
    });

    Ok(PlaneFit {
        consensus,
        plane: Plane {
            normal,
            d,
            centroid,
            primary_dir: primary,
            extent,
        },
        inliers,
        inlier_distance: dist,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_distr::{Distribution, Normal};

    fn grid_on(f: impl Fn(f64, f64) -> Vec3, n: usize) -> PointCloud {
        let mut pts = Vec::new();
        for i in 0..n {
            for j in 0..n {
                pts.push(f(i as f64 / n as f64, j as f64 / n as f64));
            }
        }
        PointCloud::from_points(pts)
    }

    #[test]
    fn exact_fronto_parallel_plane() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let pts: Vec<Vec3> = (0..500)
            .map(|_| Vec3::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0), 5.0))
            .collect();
        let pc = PointCloud::from_points(pts);
        let plane = fit_plane_ransac(&pc, 0.01, 500, 7).unwrap();
        assert!((plane.normal - Vec3::new(0.0, 0.0, -1.0)).norm() < 1e-12);
        for p in &pc.points {
            assert!(plane.signed_distance(p).abs() <= 1e-9);
        }
        assert!(plane.primary_dir.dot(&plane.normal).abs() < 1e-9);
    }

    #[test]
    fn tilted_analytic_plane() {
        // x + y + z = 3, shifted forward so every point has z > 0.
        let pc = grid_on(|a, b| Vec3::new(a * 2.0 - 1.0, b * 2.0 - 1.0, 3.0 - (a * 2.0 - 1.0) - (b * 2.0 - 1.0)), 20);
        let plane = fit_plane_ransac(&pc, 0.01, 200, 3).unwrap();
        let truth = Vec3::new(1.0, 1.0, 1.0).normalize();
        let angle = plane.normal.dot(&truth).abs().min(1.0).acos();
        assert!(angle < 1e-6, "angle {angle}");
    }

    #[test]
    fn collinear_points_are_degenerate() {
        let pc = PointCloud::from_points((0..10).map(|i| Vec3::new(i as f64, 0.0, 2.0)).collect());
        assert!(matches!(
            fit_plane_ransac(&pc, 0.01, 10, 0),
            Err(GeomError::DegenerateCloud(_))
        ));
        let two = PointCloud::from_points(vec![Vec3::new(0.0, 0.0, 1.0), Vec3::new(1.0, 0.0, 1.0)]);
        assert!(fit_plane_ransac(&two, 0.01, 10, 0).is_err());
    }

    fn noisy_cloud(seed: u64) -> (PointCloud, Vec3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Vec3::new(0.2, -0.9, -0.4).normalize();
        let center = Vec3::new(0.0, 1.0, 4.0);
        let e1 = geom::any_orthogonal(&normal);
        let e2 = normal.cross(&e1);
        let noise = Normal::new(0.0, 0.01 * 4.0).unwrap();
        let mut pts = Vec::new();
        for _ in 0..800 {
            let p = center
                + e1 * rng.random_range(-1.5..1.5)
                + e2 * rng.random_range(-1.5..1.5)
                + normal * noise.sample(&mut rng);
            pts.push(p);
        }
        for _ in 0..200 {
            pts.push(Vec3::new(
                rng.random_range(-2.0..2.0),
                rng.random_range(-1.0..3.0),
                rng.random_range(2.0..6.0),
            ));
        }
        (PointCloud::from_points(pts), normal)
    }

    #[test]
    fn replayed_samples_oracle() {
        let (pc, _) = noisy_cloud(11);
        let seed = 99;
        let fit = fit_plane_ransac_detailed(&pc, 0.01, 500, seed).unwrap();

        // Oracle: replay the documented sample sequence and brute-force every candidate.
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dist = 0.01 * pc.median_depth();
        let mut best = 0usize;
        for _ in 0..500 {
            let s = index::sample(&mut rng, pc.len(), 3);
            let (a, b, c) = (pc.points[s.index(0)], pc.points[s.index(1)], pc.points[s.index(2)]);
            let n = (b - a).cross(&(c - a));
            if n.norm() == 0.0 {
                continue;
            }
            let n = n.normalize();
            let count = pc.points.iter().filter(|p| n.dot(&(*p - a)).abs() <= dist).count();
            best = best.max(count);
        }
        let got = fit.consensus as f64;
        assert!((got - best as f64).abs() <= 0.02 * best as f64, "got {got}, oracle {best}");
    }

    #[test]
    fn inlier_residuals_are_bounded_and_deterministic() {
        let (pc, truth) = noisy_cloud(5);
        let a = fit_plane_ransac_detailed(&pc, 0.01, 500, 1).unwrap();
        let b = fit_plane_ransac_detailed(&pc, 0.01, 500, 1).unwrap();
        assert_eq!(a, b);
        for &i in &a.inliers {
            assert!(a.plane.signed_distance(&pc.points[i]).abs() <= a.inlier_distance);
        }
        let angle = a.plane.normal.dot(&truth).abs().min(1.0).acos().to_degrees();
        assert!(angle < 1.0, "{angle}");
        assert!(a.plane.normal.dot(&(-a.plane.centroid)) > 0.0);
    }
}
