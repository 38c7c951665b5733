use nalgebra::{Matrix3, Vector3};
use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{GeomError, Sphere};
use crate::geom::Vec3;
use crate::unproject::PointCloud;

/// Clouds larger than this are uniformly subsampled before the exact solve;
/// any original point left outside is then fed back in.
pub const MAX_SPHERE_SAMPLES: usize = 50_000;

const DEFAULT_SPHERE_SEED: u64 = 0;

#[derive(Debug, Clone, Copy)]
struct Ball {
    center: Vec3,
    r2: f64,
}

impl Ball {
    const EMPTY: Ball = Ball {
        center: Vector3::new(0.0, 0.0, 0.0),
        r2: -1.0,
    };

    fn contains(&self, p: &Vec3) -> bool {
        if self.r2 < 0.0 {
            return false;
        }
        let d2 = (p - self.center).norm_squared();
        d2 <= self.r2 * (1.0 + 1e-12) + 1e-24
    }

    fn through(center: Vec3, support: &[Vec3]) -> Ball {
        let r2 = support
            .iter()
            .map(|p| (p - center).norm_squared())
            .fold(0.0, f64::max);
        Ball { center, r2 }
    }
}

/// Smallest ball with every support point on its boundary, or when the
/// support is affinely dependent, the smallest ball enclosing it.
fn from_support(support: &[Vec3]) -> Ball {
    match support.len() {
        0 => Ball::EMPTY,
        1 => Ball {
            center: support[0],
            r2: 0.0,
        },
        k => {
            let p0 = support[0];
            let v: Vec<Vec3> = support[1..].iter().map(|p| p - p0).collect();
            let m = k - 1;
            let mut a = Matrix3::zeros();
            let mut b = Vector3::zeros();
            let mut scale = 0.0f64;
            for i in 0..m {
                for j in 0..m {
                    a[(i, j)] = 2.0 * v[i].dot(&v[j]);
                }
                b[i] = v[i].norm_squared();
                scale = scale.max(b[i]);
            }
            for i in m..3 {
                a[(i, i)] = 1.0;
            }
            let det = a.determinant();
            if det.abs() > 1e-10 * (2.0 * scale).powi(m as i32) {
                if let Some(lambda) = a.lu().solve(&b) {
                    let center = p0 + (0..m).map(|i| v[i] * lambda[i]).sum::<Vec3>();
                    return Ball::through(center, support);
                }
            }
            enclosing_brute_force(support)
        }
    }
}

/// Smallest ball over proper subsets of an affinely dependent support set.
fn enclosing_brute_force(support: &[Vec3]) -> Ball {
    let n = support.len();
    let mut best = Ball {
        center: Vec3::zeros(),
        r2: f64::INFINITY,
    };
    for mask in 1u32..(1 << n) - 1 {
        let sub: Vec<Vec3> = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| support[i]).collect();
        let b = from_support(&sub);
        if b.r2 < best.r2 && support.iter().all(|p| b.contains(p)) {
            best = b;
        }
    }
    best
}

/// Move-to-front construction: the ball enclosing `pts[..end]` with `support`
/// on its boundary. Recursion depth is bounded by the four support points.
fn mtf(pts: &mut Vec<Vec3>, end: usize, support: &mut Vec<Vec3>) -> Ball {
    let mut ball = from_support(support);
    if support.len() == 4 {
        return ball;
    }
    let mut i = 0;
    while i < end {
        if !ball.contains(&pts[i]) {
            support.push(pts[i]);
            ball = mtf(pts, i, support);
            support.pop();
            let p = pts.remove(i);
            pts.insert(0, p);
        }
        i += 1;
    }
    ball
}

fn miniball(points: &[Vec3], rng: &mut ChaCha8Rng) -> Ball {
    let mut pts = points.to_vec();
    pts.shuffle(rng);
    let n = pts.len();
    mtf(&mut pts, n, &mut Vec::with_capacity(4))
}

pub fn fit_sphere(pc: &PointCloud) -> Result<Sphere, GeomError> {
    fit_sphere_with_seed(pc, DEFAULT_SPHERE_SEED)
}

/// Minimal enclosing sphere. Deterministic for a given seed.
pub fn fit_sphere_with_seed(pc: &PointCloud, seed: u64) -> Result<Sphere, GeomError> {
    let points = &pc.points;
    if points.is_empty() {
        return Err(GeomError::DegenerateCloud("empty cloud".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut working: Vec<Vec3> = if points.len() > MAX_SPHERE_SAMPLES {
        index::sample(&mut rng, points.len(), MAX_SPHERE_SAMPLES)
            .into_iter()
            .map(|i| points[i])
            .collect()
    } else {
        points.clone()
    };
    let mut ball = miniball(&working, &mut rng);
    if working.len() < points.len() {
        loop {
            let outside: Vec<Vec3> = points.iter().filter(|p| !ball.contains(p)).copied().collect();
            if outside.is_empty() {
                break;
            }
            working.extend(outside);
            ball = miniball(&working, &mut rng);
        }
    }
    let radius = points
        .iter()
        .map(|p| (p - ball.center).norm())
        .fold(ball.r2.max(0.0).sqrt(), f64::max);
    Ok(Sphere {
        center: ball.center,
        radius,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    /// Circumsphere of 1–4 points with all of them on the boundary, solved
    /// directly in world coordinates.
    fn circumsphere(s: &[Vec3]) -> Option<(Vec3, f64)> {
        match s.len() {
            1 => Some((s[0], 0.0)),
            2 => {
                let c = (s[0] + s[1]) / 2.0;
                Some((c, (s[0] - c).norm()))
            }
            3 => {
                let (a, b, c) = (s[0], s[1], s[2]);
                let ab = b - a;
                let ac = c - a;
                let n = ab.cross(&ac);
                let n2 = n.norm_squared();
                if n2 < 1e-18 {
                    return None;
                }
                let off = (n.cross(&ab) * ac.norm_squared() + ac.cross(&n) * ab.norm_squared()) / (2.0 * n2);
                Some((a + off, off.norm()))
            }
            4 => {
                let rows: Vec<Vec3> = s[1..].iter().map(|p| p - s[0]).collect();
                let m = Matrix3::from_rows(&[rows[0].transpose(), rows[1].transpose(), rows[2].transpose()]);
                let rhs = Vector3::new(rows[0].norm_squared(), rows[1].norm_squared(), rows[2].norm_squared()) / 2.0;
                if m.determinant().abs() < 1e-12 {
                    return None;
                }
                let x = m.try_inverse()? * rhs;
                Some((s[0] + x, x.norm()))
            }
            _ => unreachable!(),
        }
    }

    /// O(n⁴) search over every sphere determined by up to four points.
    fn oracle(pts: &[Vec3]) -> (Vec3, f64) {
        let n = pts.len();
        let mut best: Option<(Vec3, f64)> = None;
        let mut consider = |s: &[Vec3]| {
            if let Some((c, r)) = circumsphere(s) {
                if pts.iter().all(|p| (p - c).norm() <= r * (1.0 + 1e-10) + 1e-12)
                    && best.is_none_or(|b| r < b.1)
                {
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
        best.unwrap()
    }

    fn random_cloud(seed: u64, n: usize) -> Vec<Vec3> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(2.0..4.0)))
            .collect()
    }

    #[test]
    fn single_and_pair() {
        let p = Vec3::new(1.0, 2.0, 3.0);
        let s = fit_sphere(&PointCloud::from_points(vec![p])).unwrap();
        assert_eq!((s.center, s.radius), (p, 0.0));
        let q = Vec3::new(3.0, 2.0, 3.0);
        let s = fit_sphere(&PointCloud::from_points(vec![p, q])).unwrap();
        assert!((s.center - Vec3::new(2.0, 2.0, 3.0)).norm() < 1e-12);
        assert!((s.radius - 1.0).abs() < 1e-12);
    }

    #[test]
    fn empty_is_degenerate() {
        assert!(fit_sphere(&PointCloud::from_points(vec![])).is_err());
    }

    #[test]
    fn twelve_points_match_oracle() {
        for seed in 0..20 {
            let pts = random_cloud(seed, 12);
            let s = fit_sphere_with_seed(&PointCloud::from_points(pts.clone()), seed).unwrap();
            let (c, r) = oracle(&pts);
            assert!((s.radius - r).abs() <= 1e-9, "seed {seed}: {} vs {r}", s.radius);
            assert!((s.center - c).norm() <= 1e-9 * r.max(1.0) * 10.0);
        }
    }

    #[test]
    fn cospherical_points() {
        let pts: Vec<Vec3> = (0..40)
            .map(|i| {
                let t = i as f64 * 0.7;
                let z = (i as f64 / 39.0) * 2.0 - 1.0;
                let rho = (1.0 - z * z).sqrt();
                Vec3::new(rho * t.cos(), rho * t.sin(), z) * 2.0 + Vec3::new(0.0, 0.0, 6.0)
            })
            .collect();
        let s = fit_sphere(&PointCloud::from_points(pts)).unwrap();
        assert!((s.radius - 2.0).abs() < 1e-9);
        assert!((s.center - Vec3::new(0.0, 0.0, 6.0)).norm() < 1e-9);
    }

    #[test]
    fn downsampled_cloud_still_contains_everything() {
        let pts = random_cloud(3, MAX_SPHERE_SAMPLES + 5_000);
        let s = fit_sphere_with_seed(&PointCloud::from_points(pts.clone()), 9).unwrap();
        for p in &pts {
            assert!((p - s.center).norm() <= s.radius);
        }
        let again = fit_sphere_with_seed(&PointCloud::from_points(pts), 9).unwrap();
        assert_eq!(s, again);
    }

    #[test]
    fn coplanar_and_collinear_inputs() {
        let line: Vec<Vec3> = (0..9).map(|i| Vec3::new(i as f64, 0.0, 1.0)).collect();
        let s = fit_sphere(&PointCloud::from_points(line)).unwrap();
        assert!((s.radius - 4.0).abs() < 1e-12);
        let square: Vec<Vec3> = (0..16).map(|i| Vec3::new((i % 4) as f64, (i / 4) as f64, 2.0)).collect();
        let s = fit_sphere(&PointCloud::from_points(square.clone())).unwrap();
        assert!((s.radius - oracle(&square).1).abs() < 1e-9);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn oracle_equivalence(seed in any::<u64>(), n in 1usize..=12) {
            let pts = random_cloud(seed, n);
            let s = fit_sphere_with_seed(&PointCloud::from_points(pts.clone()), seed).unwrap();
            let (_, r) = oracle(&pts);
            prop_assert!((s.radius - r).abs() <= 1e-9);
        }

        #[test]
        fn containment(seed in any::<u64>(), n in 1usize..300) {
            let pts = random_cloud(seed, n);
            let s = fit_sphere_with_seed(&PointCloud::from_points(pts.clone()), seed).unwrap();
            for p in &pts {
                prop_assert!((p - s.center).norm() <= s.radius * (1.0 + 1e-9));
            }
        }
    }
}
