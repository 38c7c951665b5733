mod support;

use strata_core::render::{export_png, render_document, RenderSettings};
use strata_core::{DepthMap, DepthScene, PinholeCamera, SceneDocument};
use support::render::{make_case, oracle_render, oracle_suite, Category, CATEGORIES};

#[test]
fn renderer_matches_ray_cast_oracle_pixel_for_pixel() {
    let (cases, _skipped) = oracle_suite(3);
    assert!(cases.len() >= 20);
    for (case, expected) in &cases {
        let got = render_document(&case.doc, &case.scene, &case.settings).unwrap();
        let diff = got
            .pixels()
            .zip(expected.pixels())
            .filter(|(a, b)| a != b)
            .count();
        assert_eq!(diff, 0, "{}: {diff} pixels differ", case.name);
    }
}

#[test]
fn cases_exercise_their_feature() {
    // Each category must actually change pixels, otherwise the comparison
    // above proves nothing about it.
    for cat in CATEGORIES {
        let case = make_case(cat, 0);
        let out = render_document(&case.doc, &case.scene, &case.settings).unwrap();
        let base = render_document(&SceneDocument::new("e", "s"), &case.scene, &case.settings).unwrap();
        assert_ne!(out, base, "{cat:?}");
    }
}

#[test]
fn occlusion_and_culling_hide_content() {
    // Back-facing single-sided layers never appear; the double-sided twin does.
    let case = make_case(Category::BackFace, 1);
    let mut only_culled = case.doc.clone();
    only_culled.layers.retain(|l| !l.double_sided && l.id == "L0");
    let empty = render_document(&SceneDocument::new("e", "s"), &case.scene, &case.settings).unwrap();
    let culled = render_document(&only_culled, &case.scene, &case.settings).unwrap();
    assert_eq!(culled, empty);

    // A layer entirely behind an opaque wall leaves the image untouched.
    let mut behind = make_case(Category::FlatWall, 2);
    for a in &mut behind.doc.anchors {
        a.geometry = match &a.geometry {
            strata_core::anchors::AnchorGeometry::Plane(p) => {
                let mut p = p.clone();
                p.centroid *= 3.0;
                p.d *= 3.0;
                strata_core::anchors::AnchorGeometry::Plane(p)
            }
            g => g.clone(),
        };
    }
    let out = render_document(&behind.doc, &behind.scene, &behind.settings).unwrap();
    assert_eq!(out, behind.scene.image);
    assert_eq!(oracle_render(&behind.doc, &behind.scene, &behind.settings).unwrap(), out);
}

#[test]
fn empty_document_reproduces_the_input() {
    let img = image::RgbaImage::from_fn(37, 21, |x, y| image::Rgba([x as u8 * 7, y as u8 * 11, (x ^ y) as u8, 255 - x as u8]));
    let scene = DepthScene::new(img.clone(), DepthMap::filled(37, 21, 2.0), PinholeCamera::with_default_intrinsics(37, 21));
    let doc = SceneDocument::new("d", "s");
    for n in [1, 2, 4] {
        let settings = RenderSettings {
            supersample: n,
            ..RenderSettings::default()
        };
        let out = render_document(&doc, &scene, &settings).unwrap();
        assert_eq!(out.as_raw(), img.as_raw());
        assert_eq!(export_png(&out), export_png(&img));
    }
}

#[test]
fn rejects_bad_settings() {
    let case = make_case(Category::FlatWall, 0);
    for settings in [
        RenderSettings { supersample: 0, ..RenderSettings::default() },
        RenderSettings { supersample: 9, ..RenderSettings::default() },
        RenderSettings { depth_epsilon_rel: -1e-3, ..RenderSettings::default() },
        RenderSettings { depth_epsilon_rel: 0.5, ..RenderSettings::default() },
    ] {
        assert!(render_document(&case.doc, &case.scene, &settings).is_err());
    }
}

#[test]
fn supersampling_preserves_uncovered_pixels() {
    let case = make_case(Category::FlatWall, 0);
    let one = render_document(&case.doc, &case.scene, &case.settings).unwrap();
    let four = render_document(&case.doc, &case.scene, &RenderSettings { supersample: 4, ..case.settings.clone() }).unwrap();
    assert_eq!(one.dimensions(), four.dimensions());
    // Pixels far from any layer are identical at both rates.
    let base = render_document(&SceneDocument::new("e", "s"), &case.scene, &case.settings).unwrap();
    let (w, h) = one.dimensions();
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            let untouched = (-1i32..=1).all(|dy| {
                (-1i32..=1).all(|dx| {
                    let (nx, ny) = ((x as i32 + dx) as u32, (y as i32 + dy) as u32);
                    one.get_pixel(nx, ny) == base.get_pixel(nx, ny)
                })
            });
            if untouched {
                assert_eq!(four.get_pixel(x, y), base.get_pixel(x, y), "({x}, {y})");
            }
        }
    }
}
