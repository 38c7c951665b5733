//! Writes the bundled fixtures: synthetic scenes ray-cast from analytic
//! primitives, with the recorded responses a depth estimator, segmenter,
//! landmark detector and program generator would give for them.
//!
//! ```text
//! cargo run -p strata-server --example make_fixtures -- fixtures
//! ```
//!
//! Output is deterministic, so rerunning it leaves the checked-in files
//! unchanged.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use image::{Rgba, RgbaImage};
use strata_core::scene::{dsd, encode_png, CameraFile};
use strata_core::unproject::Landmark2D;
use strata_core::{AnchorKind, DepthMap, Mask, PinholeCamera, Vector3};
use strata_server::fixtures::{
    landmark_file_name, mask_file_name, GeneratedProgram, LandmarksFile, Manifest, ProgramsFile, LANDMARKS_DIR,
    MANIFEST_FILE, MASKS_DIR, PROGRAMS_FILE,
};
use strata_server::sha256_hex;

type V = Vector3<f64>;

enum Shape {
    Plane { point: V, normal: V },
    Cylinder { center: V, axis: V, radius: f64, half_len: f64 },
    Sphere { center: V, radius: f64 },
}

struct Object {
    name: &'static str,
    shape: Shape,
    color: [u8; 3],
}

fn smallest_root(a: f64, b: f64, c: f64) -> Vec<f64> {
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 || a.abs() < 1e-12 {
        return Vec::new();
    }
    let s = disc.sqrt();
    vec![(-b - s) / (2.0 * a), (-b + s) / (2.0 * a)]
}

/// Ray parameter of the first hit along `d` from the origin. With
/// `d.z == 1` this is the z-depth.
fn intersect(shape: &Shape, d: &V) -> Option<f64> {
    let hit = match shape {
        Shape::Plane { point, normal } => {
            let den = normal.dot(d);
            (den.abs() > 1e-12).then(|| normal.dot(point) / den)
        }
        Shape::Sphere { center, radius } => {
            let roots = smallest_root(d.dot(d), -2.0 * d.dot(center), center.dot(center) - radius * radius);
            roots.into_iter().find(|t| *t > 1e-6)
        }
        Shape::Cylinder {
            center,
            axis,
            radius,
            half_len,
        } => {
            let oc = -center;
            let dp = d - axis * d.dot(axis);
            let op = oc - axis * oc.dot(axis);
            let roots = smallest_root(dp.dot(&dp), 2.0 * dp.dot(&op), op.dot(&op) - radius * radius);
            roots.into_iter().find(|&t| {
                let along = (d * t - center).dot(axis);
                t > 1e-6 && along.abs() <= *half_len
            })
        }
    };
    hit.filter(|t| *t > 1e-6)
}

struct Rendered {
    image: RgbaImage,
    depth: DepthMap,
    camera: PinholeCamera,
    owner: Vec<Option<usize>>,
}

fn raycast(w: u32, h: u32, objects: &[Object], sky: [u8; 3]) -> Rendered {
    let camera = PinholeCamera::with_default_intrinsics(w, h);
    let mut owner = vec![None; (w * h) as usize];
    let mut data = vec![f32::NAN; (w * h) as usize];
    let mut image = RgbaImage::new(w, h);
    for y in 0..h {
        for x in 0..w {
            let d = V::new((x as f64 - camera.cx) / camera.fx, (y as f64 - camera.cy) / camera.fy, 1.0);
            let best = objects
                .iter()
                .enumerate()
                .filter_map(|(i, o)| intersect(&o.shape, &d).map(|t| (i, t)))
                .min_by(|a, b| a.1.total_cmp(&b.1));
            let i = (y * w + x) as usize;
            let shade = ((x * 7 + y * 13) % 9) as u8;
            let px = match best {
                Some((k, t)) => {
                    owner[i] = Some(k);
                    data[i] = t as f32;
                    let c = objects[k].color;
                    [c[0].saturating_add(shade), c[1].saturating_add(shade), c[2].saturating_add(shade)]
                }
                None => sky,
            };
            image.put_pixel(x, y, Rgba([px[0], px[1], px[2], 255]));
        }
    }
    Rendered {
        image,
        depth: DepthMap::new(w, h, data),
        camera,
        owner,
    }
}

/// Pixel nearest to the projection of a 3D point.
fn pixel_of(camera: &PinholeCamera, p: V) -> (f64, f64) {
    let (u, v, _) = camera.project(&p).expect("point in front of the camera");
    (u.round(), v.round())
}

struct FixtureSpec {
    name: &'static str,
    scene: Rendered,
    /// Prompt and the names of the objects its mask covers.
    masks: Vec<(&'static str, Vec<&'static str>)>,
    programs: Vec<(&'static str, &'static str)>,
    /// Landmarks recorded for the mask of a prompt.
    landmarks: Vec<(&'static str, LandmarksFile)>,
    kinds: Vec<AnchorKind>,
    diagnostics: Vec<&'static str>,
}

fn mask_for(r: &Rendered, objects: &[Object], names: &[&str], prompt: &str) -> Mask {
    let ids: Vec<usize> = names
        .iter()
        .map(|n| objects.iter().position(|o| o.name == *n).expect("known object"))
        .collect();
    let w = r.depth.width;
    Mask::from_fn(w, r.depth.height, prompt, |x, y| {
        r.owner[(y * w + x) as usize].is_some_and(|k| ids.contains(&k))
    })
}

fn write(dir: &Path, spec: FixtureSpec, objects: &[Object]) -> std::io::Result<()> {
    let _ = fs::remove_dir_all(dir);
    fs::create_dir_all(dir.join(MASKS_DIR))?;
    fs::create_dir_all(dir.join(LANDMARKS_DIR))?;
    let image_png = encode_png(&spec.scene.image);
    fs::write(dir.join("image.png"), &image_png)?;
    fs::write(dir.join("depth.dsd"), dsd::encode(&spec.scene.depth, None))?;
    fs::write(
        dir.join("camera.json"),
        serde_json::to_string_pretty(&CameraFile::from_camera(&spec.scene.camera))? + "\n",
    )?;

    let mut by_prompt = BTreeMap::new();
    for (prompt, names) in &spec.masks {
        let mask = mask_for(&spec.scene, objects, names, prompt);
        let png = encode_png(&image::DynamicImage::ImageLuma8(mask.to_image()).into_rgba8());
        fs::write(dir.join(MASKS_DIR).join(mask_file_name(prompt)), &png)?;
        let replayed = Mask::from_image(&image::load_from_memory(&png).expect("own PNG"), *prompt);
        by_prompt.insert(*prompt, replayed);
    }
    for (prompt, file) in spec.landmarks {
        let mask = &by_prompt[prompt];
        fs::write(
            dir.join(LANDMARKS_DIR).join(landmark_file_name(mask)),
            serde_json::to_string_pretty(&file)? + "\n",
        )?;
    }
    let programs = ProgramsFile {
        programs: spec
            .programs
            .iter()
            .map(|(p, r)| GeneratedProgram {
                program: p.to_string(),
                rationale: r.to_string(),
            })
            .collect(),
    };
    fs::write(dir.join(PROGRAMS_FILE), serde_json::to_string_pretty(&programs)? + "\n")?;
    let manifest = Manifest {
        name: spec.name.to_string(),
        image_sha256: sha256_hex(&image_png),
        expected_anchor_count: spec.kinds.len(),
        expected_kinds: spec.kinds,
        expected_diagnostics: spec.diagnostics.iter().map(|s| s.to_string()).collect(),
    };
    fs::write(dir.join(MANIFEST_FILE), serde_json::to_string_pretty(&manifest)? + "\n")?;
    Ok(())
}

fn norm(x: f64, y: f64, z: f64) -> V {
    V::new(x, y, z).normalize()
}

fn train_objects(shift: f64, light: [u8; 3]) -> Vec<Object> {
    vec![
        Object {
            name: "ground",
            shape: Shape::Plane {
                point: V::new(0.0, 1.5, 0.0),
                normal: V::new(0.0, -1.0, 0.0),
            },
            color: [96, 92, 88],
        },
        Object {
            name: "boiler",
            shape: Shape::Cylinder {
                center: V::new(-0.4 + shift, 0.6, 7.0),
                axis: norm(1.0, 0.0, 0.3),
                radius: 0.9,
                half_len: 2.2,
            },
            color: [150, 30, 28],
        },
        Object {
            name: "headlight",
            shape: Shape::Sphere {
                center: V::new(2.3 + shift, 0.2, 5.6),
                radius: 0.55,
            },
            color: light,
        },
    ]
}

const TRAIN_PROGRAMS: [(&str, &str); 3] = [
    (
        "MASK_0=Text2Mask(prompt = \"the ground\")\n\
         POINTCLOUD_0=Mask2Pointcloud(mask = MASK_0)\n\
         PLANE_0=Pointcloud2Plane(pointcloud = POINTCLOUD_0)\n\
         PLANAR_0=Planar(plane = PLANE_0)",
        "Lay text flat along the ground in front of the train.",
    ),
    (
        "MASK_0=Text2Mask(prompt = \"the train boiler\")\n\
         POINTCLOUD_0=Mask2Pointcloud(mask = MASK_0)\n\
         CYLINDER_0=Pointcloud2Cylinder(pointcloud = POINTCLOUD_0, direction = NULL)\n\
         CYLINDRICAL_0=Cylindrical(cylinder = CYLINDER_0)",
        "Wrap a livery stripe around the boiler.",
    ),
    (
        "MASK_0=Text2Mask(prompt = \"the headlight\")\n\
         POINTCLOUD_0=Mask2Pointcloud(mask = MASK_0)\n\
         SPHERE_0=Pointcloud2Sphere(pointcloud = POINTCLOUD_0)\n\
         SPHERICAL_0=Spherical(sphere = SPHERE_0)",
        "Put a small emblem on the round headlight.",
    ),
];

fn train_masks() -> Vec<(&'static str, Vec<&'static str>)> {
    vec![
        ("the ground", vec!["ground"]),
        ("the train boiler", vec!["boiler"]),
        ("the headlight", vec!["headlight"]),
    ]
}

fn train() -> (FixtureSpec, Vec<Object>) {
    let objects = train_objects(0.0, [230, 200, 60]);
    let scene = raycast(160, 120, &objects, [150, 190, 235]);
    (
        FixtureSpec {
            name: "train",
            scene,
            masks: train_masks(),
            programs: TRAIN_PROGRAMS.to_vec(),
            landmarks: Vec::new(),
            kinds: vec![AnchorKind::Planar, AnchorKind::Cylindrical, AnchorKind::Spherical],
            diagnostics: Vec::new(),
        },
        objects,
    )
}

fn mixed_failure() -> (FixtureSpec, Vec<Object>) {
    let objects = train_objects(-0.5, [240, 240, 220]);
    let scene = raycast(160, 120, &objects, [170, 180, 200]);
    let mut programs = TRAIN_PROGRAMS.to_vec();
    programs.insert(
        2,
        (
            "MASK_0=Text2Mask(prompt = \"the ground\")\n\
             POINTCLOUD_0=Mask2Pointcloud(mask = MASK_0)\n\
             PLANE_0=Pointcloud2Plane(pointcloud = POINTCLOUD_0)",
            "Ground plane for a shadow decal.",
        ),
    );
    (
        FixtureSpec {
            name: "mixed_failure",
            scene,
            masks: train_masks(),
            programs,
            landmarks: Vec::new(),
            kinds: vec![AnchorKind::Planar, AnchorKind::Cylindrical, AnchorKind::Spherical],
            diagnostics: vec!["NotAnchorTerminal"],
        },
        objects,
    )
}

fn all_fail() -> (FixtureSpec, Vec<Object>) {
    let objects = train_objects(0.6, [90, 200, 120]);
    let scene = raycast(128, 96, &objects, [200, 170, 150]);
    (
        FixtureSpec {
            name: "all_fail",
            scene,
            masks: train_masks(),
            programs: vec![
                (
                    "MASK_0=Text2Mask(prompt = \"the train boiler\")\n\
                     POINTCLOUD_0=Mask2Pointcloud(mask = MASK_0)\n\
                     LINE_0=Linear(pointcloud = POINTCLOUD_0)",
                    "Run text along the length of the train.",
                ),
                (
                    "POINTCLOUD_0=Mask2Pointcloud(mask = MASK_0)\n\
                     PLANE_0=Pointcloud2Plane(pointcloud = POINTCLOUD_0)\n\
                     PLANAR_0=Planar(plane = PLANE_0)",
                    "Ground text, but the mask was never segmented.",
                ),
                (
                    "MASK_0=Text2Mask(prompt = \"the headlight\")\n\
                     POINTCLOUD_0=Mask2Pointcloud(mask = MASK_0)\n\
                     SPHERICAL_0=Spherical(sphere = POINTCLOUD_0)",
                    "Emblem on the headlight, skipping the fit.",
                ),
            ],
            landmarks: Vec::new(),
            kinds: Vec::new(),
            diagnostics: vec!["UnknownCell", "UndefinedIdentifier", "TypeMismatch"],
        },
        objects,
    )
}

fn runner() -> (FixtureSpec, Vec<Object>) {
    let torso_c = V::new(0.0, 0.2, 5.0);
    let torso_r = 0.45;
    let head_c = V::new(0.0, -0.85, 5.0);
    let head_r = 0.3;
    let objects = vec![
        Object {
            name: "wall",
            shape: Shape::Plane {
                point: V::new(0.0, 0.0, 9.0),
                normal: V::new(0.0, 0.0, -1.0),
            },
            color: [200, 196, 180],
        },
        Object {
            name: "floor",
            shape: Shape::Plane {
                point: V::new(0.0, 1.8, 0.0),
                normal: V::new(0.0, -1.0, 0.0),
            },
            color: [120, 110, 100],
        },
        Object {
            name: "torso",
            shape: Shape::Cylinder {
                center: torso_c,
                axis: V::new(0.0, 1.0, 0.0),
                radius: torso_r,
                half_len: 0.7,
            },
            color: [30, 80, 170],
        },
        Object {
            name: "head",
            shape: Shape::Sphere {
                center: head_c,
                radius: head_r,
            },
            color: [210, 160, 130],
        },
        Object {
            name: "left_leg",
            shape: Shape::Cylinder {
                center: V::new(0.2, 1.35, 5.0),
                axis: V::new(0.0, 1.0, 0.0),
                radius: 0.14,
                half_len: 0.45,
            },
            color: [40, 40, 50],
        },
        Object {
            name: "right_leg",
            shape: Shape::Cylinder {
                center: V::new(-0.2, 1.35, 5.0),
                axis: V::new(0.0, 1.0, 0.0),
                radius: 0.14,
                half_len: 0.45,
            },
            color: [40, 40, 50],
        },
    ];
    let scene = raycast(120, 160, &objects, [0, 0, 0]);
    let cam = scene.camera.clone();
    let on_torso = |x: f64, y: f64| V::new(x, y, torso_c.z - (torso_r * torso_r - x * x).sqrt());
    let on_head = |x: f64, y: f64| {
        let dy = y - head_c.y;
        V::new(x, y, head_c.z - (head_r * head_r - x * x - dy * dy).sqrt())
    };
    let lm = |name: &str, p: V| {
        let (u, v) = pixel_of(&cam, p);
        Landmark2D {
            name: name.to_string(),
            u,
            v,
        }
    };
    let skeleton = vec![
        lm("left_shoulder", on_torso(0.33, -0.4)),
        lm("right_shoulder", on_torso(-0.33, -0.4)),
        lm("left_hip", on_torso(0.25, 0.8)),
        lm("right_hip", on_torso(-0.25, 0.8)),
        lm("nose", on_head(0.0, -0.82)),
    ];
    let face = vec![
        lm("left_eye", on_head(0.1, -0.92)),
        lm("right_eye", on_head(-0.1, -0.92)),
        lm("nose_tip", on_head(0.0, -0.8)),
        lm("chin", on_head(0.0, -0.62)),
    ];
    (
        FixtureSpec {
            name: "runner",
            scene,
            masks: vec![
                ("the runner", vec!["torso", "head", "left_leg", "right_leg"]),
                ("the runner's shirt", vec!["torso"]),
                ("the runner's face", vec!["head"]),
            ],
            programs: vec![
                (
                    "MASK_0=Text2Mask(prompt = \"the runner\")\n\
                     SKELETON_0=SkeletonExtraction(mask = MASK_0)\n\
                     PLANAR_0=Planar(plane = SKELETON_0.median)",
                    "A speech-bubble card beside the runner, seen edge-on.",
                ),
                (
                    "MASK_0=Text2Mask(prompt = \"the runner\")\n\
                     SKELETON_0=SkeletonExtraction(mask = MASK_0)\n\
                     MASK_1=Text2Mask(prompt = \"the runner's shirt\")\n\
                     POINTCLOUD_0=Mask2Pointcloud(mask = MASK_1)\n\
                     CYLINDER_0=Pointcloud2Cylinder(pointcloud = POINTCLOUD_0, direction = SKELETON_0.cranial)\n\
                     CYLINDRICAL_0=Cylindrical(cylinder = CYLINDER_0)",
                    "Print a race number around the shirt.",
                ),
                (
                    "MASK_0=Text2Mask(prompt = \"the runner's face\")\n\
                     FACE_0=FaceExtraction(mask = MASK_0)\n\
                     PLANAR_0=Planar(plane = FACE_0.frontal)",
                    "Face paint on the runner's face.",
                ),
            ],
            landmarks: vec![
                (
                    "the runner",
                    LandmarksFile {
                        skeleton,
                        face: Vec::new(),
                    },
                ),
                (
                    "the runner's face",
                    LandmarksFile {
                        skeleton: Vec::new(),
                        face,
                    },
                ),
            ],
            kinds: vec![AnchorKind::Planar, AnchorKind::Cylindrical, AnchorKind::Planar],
            diagnostics: Vec::new(),
        },
        objects,
    )
}

fn main() -> std::io::Result<()> {
    let root = std::env::args().nth(1).unwrap_or_else(|| "fixtures".into());
    let root = Path::new(&root);
    for (spec, objects) in [train(), runner(), mixed_failure(), all_fail()] {
        let dir = root.join(spec.name);
        println!("writing {}", dir.display());
        write(&dir, spec, &objects)?;
    }
    Ok(())
}
