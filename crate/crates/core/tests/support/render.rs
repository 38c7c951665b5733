//! Brute-force per-pixel compositor oracle and the synthetic scene suite it
//! is checked against.
//!
//! The oracle casts one ray per pixel centre, intersects it analytically with
//! each planar layer, and applies the depth test and blend in document order.
//! It shares only the texel-level primitives (layer tiling, content mapping,
//! bilinear sampling and the blend operator) with the renderer; coverage,
//! depth and parametrisation are computed independently of the rasterizer.
//!
//! When a pixel sits so close to a decision boundary (quad edge, depth-test
//! threshold, alpha cutoff) that floating-point rounding could legitimately
//! go either way, the oracle reports the scene as ambiguous and the suite
//! builder moves on to the next seed.

use image::{Rgba, RgbaImage};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use strata_core::anchors::{
    apply_constrained_edit, compose_layer_texture, content_uv, sample_bilinear, AnchorGeometry,
};
use strata_core::render::{blend_over, Background, RenderSettings};
use strata_core::{
    AnchorParams, ContentLayer, DepthMap, DepthScene, ParametricAnchor, PinholeCamera, Plane,
    SceneDocument, Vector3,
};

type V3 = Vector3<f64>;

const MARGIN: f64 = 1e-9;

pub fn oracle_render(doc: &SceneDocument, scene: &DepthScene, settings: &RenderSettings) -> Result<RgbaImage, String> {
    assert_eq!(settings.supersample, 1, "oracle renders at native resolution");
    let (w, h) = (scene.width(), scene.height());
    let cam = &scene.camera;
    let eps = settings.depth_epsilon_rel;
    let near = scene.min_valid_depth().unwrap_or(1.0) * 1e-3;

    let mut color: Vec<[u8; 4]> = Vec::with_capacity((w * h) as usize);
    let mut zbuf: Vec<f64> = Vec::with_capacity((w * h) as usize);
    for y in 0..h {
        for x in 0..w {
            color.push(match settings.background {
                Background::Image => scene.image.get_pixel(x, y).0,
                Background::SolidColor(c) => c,
            });
            zbuf.push(scene.depth_at(x, y).unwrap_or(f64::INFINITY));
        }
    }

    for layer in doc.layers.iter().filter(|l| l.visible) {
        let anchor = doc.anchor(&layer.anchor_id).expect("layer anchor exists");
        let (AnchorGeometry::Plane(plane), AnchorParams::Planar(p)) = (&anchor.geometry, &anchor.free_params) else {
            panic!("the oracle handles planar anchors only");
        };
        let texture = compose_layer_texture(layer);
        let origin = plane.centroid + plane.normal * p.offset;
        let u = plane.primary_dir;
        let v = plane.normal.cross(&u);
        let (hu, hv) = (p.size[0], p.size[1]);
        let facing = u.cross(&v).dot(&-origin);
        if facing.abs() <= MARGIN {
            return Err(format!("layer {} is seen edge-on", layer.id));
        }
        if !layer.double_sided && facing < 0.0 {
            continue;
        }
        let n = u.cross(&v);
        for y in 0..h {
            for x in 0..w {
                let ray = V3::new((x as f64 - cam.cx) / cam.fx, (y as f64 - cam.cy) / cam.fy, 1.0);
                let denom = n.dot(&ray);
                if denom == 0.0 {
                    continue;
                }
                let z = n.dot(&origin) / denom;
                if !(z > near) {
                    continue;
                }
                let q = ray * z - origin;
                let s = (q.dot(&u) / hu + 1.0) / 2.0;
                let t = (q.dot(&v) / hv + 1.0) / 2.0;
                let edge_gap = [s, 1.0 - s, t, 1.0 - t].into_iter().fold(f64::INFINITY, f64::min);
                if edge_gap.abs() <= MARGIN {
                    return Err(format!("pixel ({x}, {y}) lies on the edge of layer {}", layer.id));
                }
                if edge_gap < 0.0 {
                    continue;
                }
                let i = (y * w + x) as usize;
                let limit = zbuf[i] * (1.0 + eps);
                if (z - limit).abs() <= MARGIN * z {
                    return Err(format!("pixel ({x}, {y}) ties the depth test of layer {}", layer.id));
                }
                if !(z < limit) {
                    continue;
                }
                let (cs, ct) = content_uv(&anchor.free_params, s, t);
                let texel = sample_bilinear(&texture, cs, ct);
                let a = texel[3];
                if (a > 0.0 && a < MARGIN) || (a - 0.5).abs() < MARGIN {
                    return Err(format!("pixel ({x}, {y}) has a borderline alpha on layer {}", layer.id));
                }
                if a <= 0.0 {
                    continue;
                }
                color[i] = blend_over(color[i], texel);
                if a >= 0.5 {
                    zbuf[i] = z;
                }
            }
        }
    }
    Ok(RgbaImage::from_fn(w, h, |x, y| Rgba(color[(y * w + x) as usize])))
}

/// A synthetic compositing case.
pub struct OracleCase {
    pub name: String,
    pub scene: DepthScene,
    pub doc: SceneDocument,
    pub settings: RenderSettings,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Category {
    FlatWall,
    DepthStep,
    Overlap,
    AlphaBlend,
    EpsilonBoundary,
    BackFace,
    InvalidDepth,
    EditedParams,
    Oblique,
    SolidBackground,
}

pub const CATEGORIES: [Category; 10] = [
    Category::FlatWall,
    Category::DepthStep,
    Category::Overlap,
    Category::AlphaBlend,
    Category::EpsilonBoundary,
    Category::BackFace,
    Category::InvalidDepth,
    Category::EditedParams,
    Category::Oblique,
    Category::SolidBackground,
];

fn noise_image(rng: &mut ChaCha8Rng, w: u32, h: u32, opaque: bool) -> RgbaImage {
    RgbaImage::from_fn(w, h, |_, _| {
        let a = if opaque { 255 } else { rng.random_range(0..=255) };
        Rgba([rng.random(), rng.random(), rng.random(), a])
    })
}

fn solid(w: u32, h: u32, c: [u8; 4]) -> RgbaImage {
    RgbaImage::from_pixel(w, h, Rgba(c))
}

fn checker(block: u32, n: u32, a: [u8; 4], b: [u8; 4]) -> RgbaImage {
    RgbaImage::from_fn(block * n, block * n, |x, y| Rgba(if (x / block + y / block) % 2 == 0 { a } else { b }))
}

fn random_texture(rng: &mut ChaCha8Rng, w: u32, h: u32) -> RgbaImage {
    RgbaImage::from_fn(w, h, |_, _| Rgba([rng.random(), rng.random(), rng.random(), rng.random_range(0..=255)]))
}

fn random_rgb(rng: &mut ChaCha8Rng, a: u8) -> [u8; 4] {
    [rng.random(), rng.random(), rng.random(), a]
}

/// A tilted quad centred under pixel `(px, py)` at depth `z`, spanning about
/// `frac` of the image width.
fn quad(rng: &mut ChaCha8Rng, cam: &PinholeCamera, px: f64, py: f64, z: f64, max_tilt: f64, frac: f64) -> Plane {
    let centre = cam.unproject(px, py, z).unwrap();
    let tilt_x = rng.random_range(-max_tilt..=max_tilt);
    let tilt_y = rng.random_range(-max_tilt..=max_tilt);
    let normal = V3::new(tilt_x.sin(), tilt_y.sin(), -1.0).normalize();
    let spin: f64 = rng.random_range(-0.6..0.6);
    let primary = V3::new(spin.cos(), spin.sin(), 0.0);
    let half = z * cam.width as f64 / cam.fx * frac;
    let aspect = rng.random_range(0.5..1.5);
    Plane::through(centre, normal, primary, [half, half * aspect])
}

fn planar(id: &str, plane: Plane) -> ParametricAnchor {
    ParametricAnchor::new(id, AnchorGeometry::Plane(plane), "")
}

fn add(doc: &mut SceneDocument, anchor: ParametricAnchor, texture: RgbaImage, double_sided: bool) -> usize {
    let id = format!("L{}", doc.layers.len());
    let mut layer = ContentLayer::new(id, &anchor, texture);
    layer.double_sided = double_sided;
    if doc.anchor(&anchor.id).is_none() {
        doc.anchors.push(anchor);
    }
    doc.layers.push(layer);
    doc.layers.len() - 1
}

/// Builds one case of `category` from `seed`.
pub fn make_case(category: Category, seed: u64) -> OracleCase {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ ((category as u64) << 32));
    let w = rng.random_range(24..=64u32);
    let h = rng.random_range(24..=64u32);
    let cam = PinholeCamera::with_default_intrinsics(w, h);
    let (wf, hf) = (w as f64, h as f64);
    let mut settings = RenderSettings::default();
    let mut doc = SceneDocument::new(format!("{category:?}-{seed}"), "synthetic");
    let mut opaque_image = true;
    let depth;

    let centre = |rng: &mut ChaCha8Rng| (rng.random_range(0.3..0.7) * wf, rng.random_range(0.3..0.7) * hf);
    match category {
        Category::FlatWall => {
            depth = DepthMap::filled(w, h, 6.0);
            let (px, py) = centre(&mut rng);
            let z = rng.random_range(2.5..5.0);
            let tex = solid(8, 8, random_rgb(&mut rng, 255));
            add(&mut doc, planar("a", quad(&mut rng, &cam, px, py, z, 0.5, 0.3)), tex, true);
        }
        Category::DepthStep => {
            let split = rng.random_range(0.3..0.7) * wf;
            let (near_z, far_z) = (rng.random_range(2.0..3.0) as f32, rng.random_range(7.0..9.0) as f32);
            depth = DepthMap::from_fn(w, h, |x, y| if (x as f64) < split && y > h / 4 { near_z } else { far_z });
            let (px, py) = centre(&mut rng);
            let z = rng.random_range(4.0..6.0);
            let tex = checker(4, 4, random_rgb(&mut rng, 255), random_rgb(&mut rng, 255));
            add(&mut doc, planar("a", quad(&mut rng, &cam, px, py, z, 0.6, 0.35)), tex, true);
        }
        Category::Overlap => {
            depth = DepthMap::filled(w, h, 10.0);
            for k in 0..3 {
                let (px, py) = centre(&mut rng);
                let z = rng.random_range(3.0..8.0);
                let alpha = [255, 220, 90][k];
                let tex = solid(6, 6, random_rgb(&mut rng, alpha));
                add(&mut doc, planar(&format!("a{k}"), quad(&mut rng, &cam, px, py, z, 0.7, 0.3)), tex, true);
            }
        }
        Category::AlphaBlend => {
            depth = DepthMap::filled(w, h, 8.0);
            opaque_image = false;
            let (px, py) = centre(&mut rng);
            let tex = random_texture(&mut rng, 5, 7);
            add(&mut doc, planar("a", quad(&mut rng, &cam, px, py, 4.0, 0.4, 0.3)), tex, true);
            let (px, py) = centre(&mut rng);
            let grad = RgbaImage::from_fn(16, 4, |x, _| Rgba([200, 40, 90, (x * 16) as u8]));
            add(&mut doc, planar("b", quad(&mut rng, &cam, px, py, 5.0, 0.4, 0.3)), grad, true);
        }
        Category::EpsilonBoundary => {
            let wall = rng.random_range(4.0..6.0);
            depth = DepthMap::filled(w, h, wall as f32);
            let wall = wall as f32 as f64;
            settings.depth_epsilon_rel = [1e-3, 1e-2, 0.0][(seed % 3) as usize];
            let eps = settings.depth_epsilon_rel.max(1e-3);
            // Fronto-parallel layers just in front of, within, and beyond the tolerance band.
            for (k, factor) in [-0.5, 0.5, 1.5].into_iter().enumerate() {
                let z = wall * (1.0 + factor * eps);
                let px = wf * (0.2 + 0.3 * k as f64);
                let py = hf * rng.random_range(0.4..0.6);
                let mut plane = quad(&mut rng, &cam, px, py, z, 0.0, 0.12);
                plane = Plane::through(plane.centroid, V3::new(0.0, 0.0, -1.0), plane.primary_dir, plane.extent);
                let tex = solid(4, 4, random_rgb(&mut rng, 255));
                add(&mut doc, planar(&format!("e{k}"), plane), tex, true);
            }
        }
        Category::BackFace => {
            depth = DepthMap::filled(w, h, 9.0);
            for k in 0..2 {
                let (px, py) = centre(&mut rng);
                let z = rng.random_range(3.0..6.0);
                let mut plane = quad(&mut rng, &cam, px, py, z, 0.5, 0.3);
                // Turn the plane away from the viewer.
                plane.normal = -plane.normal;
                plane.d = -plane.d;
                let tex = checker(3, 3, random_rgb(&mut rng, 255), random_rgb(&mut rng, 180));
                add(&mut doc, planar(&format!("b{k}"), plane), tex, k == 1);
            }
            let (px, py) = centre(&mut rng);
            let tex = solid(4, 4, random_rgb(&mut rng, 255));
            add(&mut doc, planar("front", quad(&mut rng, &cam, px, py, 5.0, 0.5, 0.25)), tex, false);
        }
        Category::InvalidDepth => {
            let (hx, hy) = (rng.random_range(0..w / 2), rng.random_range(0..h / 2));
            depth = DepthMap::from_fn(w, h, |x, y| {
                if x >= hx && x < hx + w / 2 && y >= hy && y < hy + h / 2 {
                    f32::NAN
                } else if (x + y) % 7 == 0 {
                    0.0
                } else {
                    3.5
                }
            });
            let (px, py) = centre(&mut rng);
            let tex = checker(2, 5, random_rgb(&mut rng, 255), random_rgb(&mut rng, 255));
            add(&mut doc, planar("a", quad(&mut rng, &cam, px, py, 5.0, 0.5, 0.45)), tex, true);
        }
        Category::EditedParams => {
            depth = DepthMap::filled(w, h, 12.0);
            let (px, py) = centre(&mut rng);
            let mut a = planar("a", quad(&mut rng, &cam, px, py, 6.0, 0.5, 0.3));
            for (param, delta) in [
                ("offset", rng.random_range(-0.8..0.8)),
                ("rotation", rng.random_range(-1.0..1.0)),
                ("uv_center_u", rng.random_range(-0.3..0.3)),
                ("uv_center_v", rng.random_range(-0.3..0.3)),
                ("uv_scale_u", rng.random_range(-0.4..0.4)),
                ("uv_scale_v", rng.random_range(-0.4..0.4)),
                ("size_w", rng.random_range(-0.2..0.4)),
            ] {
                a = apply_constrained_edit(&a, param, delta).unwrap();
            }
            let tex = random_texture(&mut rng, 6, 4);
            let i = add(&mut doc, a, tex, true);
            let layer = &mut doc.layers[i];
            layer.repeat = [rng.random_range(1..=3), rng.random_range(1..=2)];
            layer.gap = [0.25, 0.5];
            layer.mirror = seed % 2 == 0;
            layer.content_rotation = std::f64::consts::FRAC_PI_2 * (seed % 4) as f64;
        }
        Category::Oblique => {
            depth = DepthMap::from_fn(w, h, |x, _| 6.0 + 4.0 * x as f32 / w as f32);
            let (px, py) = centre(&mut rng);
            let tex = checker(2, 8, random_rgb(&mut rng, 255), random_rgb(&mut rng, 255));
            add(&mut doc, planar("a", quad(&mut rng, &cam, px, py, 4.0, 1.1, 0.4)), tex, true);
        }
        Category::SolidBackground => {
            depth = DepthMap::from_fn(w, h, |x, y| 4.0 + ((x * 3 + y * 5) % 11) as f32 * 0.2);
            settings.background = Background::SolidColor(random_rgb(&mut rng, 255));
            let (px, py) = centre(&mut rng);
            let tex = random_texture(&mut rng, 3, 3);
            add(&mut doc, planar("a", quad(&mut rng, &cam, px, py, 4.5, 0.5, 0.35)), tex, true);
        }
    }
    let image = noise_image(&mut rng, w, h, opaque_image);
    OracleCase {
        name: format!("{category:?}#{seed}"),
        scene: DepthScene::new(image, depth, cam),
        doc,
        settings,
    }
}

/// `per_category` unambiguous cases of every category, plus how many seeds
/// were skipped for touching a decision boundary.
pub fn oracle_suite(per_category: usize) -> (Vec<(OracleCase, RgbaImage)>, usize) {
    let mut out = Vec::new();
    let mut skipped = 0;
    for cat in CATEGORIES {
        let mut seed = 0;
        let mut found = 0;
        while found < per_category {
            let case = make_case(cat, seed);
            seed += 1;
            match oracle_render(&case.doc, &case.scene, &case.settings) {
                Ok(img) => {
                    out.push((case, img));
                    found += 1;
                }
                Err(_) => skipped += 1,
            }
            assert!(seed < 1000, "no unambiguous {cat:?} case found");
        }
    }
    (out, skipped)
}
