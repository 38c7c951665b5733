//! The reference program corpus: sixteen short programs covering every
//! cell and attribute, used as parser and typechecker fixtures and as the
//! in-context examples of the program-generation prompt.
//!
//! Four programs mix spellings of the same identifier (`MASK0` and `MASK_0`)
//! in their published form; [`CorpusProgram::raw`] keeps that form and
//! [`CorpusProgram::source`] renames each program to a single spelling.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CorpusProgram {
    pub number: u32,
    pub summary: &'static str,
    pub raw: &'static str,
    pub source: &'static str,
}

impl CorpusProgram {
    pub fn normalized(&self) -> bool {
        self.raw != self.source
    }
}

pub const CORPUS: [CorpusProgram; 16] = [
    CorpusProgram {
        number: 1,
        summary: "Wrap text around a standing person",
        raw: r#"MASK_0=Text2Mask(prompt = "the human figure")
POINTCLOUD_0=Mask2Pointcloud(mask = MASK_0)
CYLINDER_0=Pointcloud2Cylinder(Pointcloud = POINTCLOUD_0, direction = NULL)
CYLINDRICAL_0=Cylindrical(cylinder = CYLINDER_0)"#,
        source: r#"MASK_0=Text2Mask(prompt = "the human figure")
POINTCLOUD_0=Mask2Pointcloud(mask = MASK_0)
CYLINDER_0=Pointcloud2Cylinder(Pointcloud = POINTCLOUD_0, direction = NULL)
CYLINDRICAL_0=Cylindrical(cylinder = CYLINDER_0)"#,
    },
    CorpusProgram {
        number: 2,
        summary: "Place content facing outward from a person's face",
        raw: r#"MASK_0=Text2Mask(prompt = "the human figure")
FACE_0=FaceExtraction(mask = MASK_0)
PLANAR=Planar(plane = FACE_0.frontal)"#,
        source: r#"MASK_0=Text2Mask(prompt = "the human figure")
FACE_0=FaceExtraction(mask = MASK_0)
PLANAR=Planar(plane = FACE_0.frontal)"#,
    },
    CorpusProgram {
        number: 3,
        summary: "Raise a wall from a court's dominant direction",
        raw: r#"MASK_0=Text2Mask(prompt = "basketball playground")
POINTCLOUD_0=Mask2Pointcloud(mask = MASK_0)
PLANE_0=Pointcloud2PLANE(Pointcloud = POINTCLOUD_0)
PLANAR=Planar(plane = PLANE_0.extruded)"#,
        source: r#"MASK_0=Text2Mask(prompt = "basketball playground")
POINTCLOUD_0=Mask2Pointcloud(mask = MASK_0)
PLANE_0=Pointcloud2PLANE(Pointcloud = POINTCLOUD_0)
PLANAR=Planar(plane = PLANE_0.extruded)"#,
    },
    CorpusProgram {
        number: 4,
        summary: "Wrap text around a projectile",
        raw: r#"MASK_0=Text2Mask(prompt="the bullet")
POINTCLOUD_0=Mask2Pointcloud(mask=MASK_0)
CYLINDER_0=Pointcloud2Cylinder(Pointcloud=POINTCLOUD_0, direction=NULL)
CYLINDRICAL_0=Cylindrical(cylinder=CYLINDER_0)"#,
        source: r#"MASK_0=Text2Mask(prompt="the bullet")
POINTCLOUD_0=Mask2Pointcloud(mask=MASK_0)
CYLINDER_0=Pointcloud2Cylinder(Pointcloud=POINTCLOUD_0, direction=NULL)
CYLINDRICAL_0=Cylindrical(cylinder=CYLINDER_0)"#,
    },
    CorpusProgram {
        number: 5,
        summary: "Surround a person with a spherical band",
        raw: r#"MASK_0=Text2Mask(prompt = "the human figure")
POINTCLOUD_0=Mask2Pointcloud(mask = MASK_0)
SPHERE_0=Pointcloud2Sphere(Pointcloud = POINTCLOUD_0)
SPHERICAL_0=Spherical(sphere = SPHERE_0)"#,
        source: r#"MASK_0=Text2Mask(prompt = "the human figure")
POINTCLOUD_0=Mask2Pointcloud(mask = MASK_0)
SPHERE_0=Pointcloud2Sphere(Pointcloud = POINTCLOUD_0)
SPHERICAL_0=Spherical(sphere = SPHERE_0)"#,
    },
    CorpusProgram {
        number: 6,
        summary: "Lay content on a bridge deck",
        raw: r#"MASK_0=Text2Mask(prompt = "highrise bridge in the input image")
POINTCLOUD_0=Mask2Pointcloud(mask = MASK0)
PLANE_0=Pointcloud2Plane(Pointcloud = Pointcloud0)
PLANAR=Planar(plane = PLANE_0)"#,
        source: r#"MASK_0=Text2Mask(prompt = "highrise bridge in the input image")
POINTCLOUD_0=Mask2Pointcloud(mask = MASK_0)
PLANE_0=Pointcloud2Plane(Pointcloud = POINTCLOUD_0)
PLANAR=Planar(plane = PLANE_0)"#,
    },
    CorpusProgram {
        number: 7,
        summary: "Stand content in a runner's sagittal plane",
        raw: r#"MASK_0=Text2Mask(prompt = "runner")
SKELETON_0=SkeletonExtraction(mask=MASK_0)
PLANAR_0=Planar(plane = SKELETON_0.median)"#,
        source: r#"MASK_0=Text2Mask(prompt = "runner")
SKELETON_0=SkeletonExtraction(mask=MASK_0)
PLANAR_0=Planar(plane = SKELETON_0.median)"#,
    },
    CorpusProgram {
        number: 8,
        summary: "Place content on a building facade",
        raw: r#"MASK_0=Text2Mask(prompt = "the front building in the input image")
POINTCLOUD_0=Mask2Pointcloud(mask = MASK_0)
PLANE_0=Pointcloud2PLANE(Pointcloud = POINTCLOUD_0)
PLANAR_0=Planar(PLANE = PLANE_0)"#,
        source: r#"MASK_0=Text2Mask(prompt = "the front building in the input image")
POINTCLOUD_0=Mask2Pointcloud(mask = MASK_0)
PLANE_0=Pointcloud2PLANE(Pointcloud = POINTCLOUD_0)
PLANAR_0=Planar(PLANE = PLANE_0)"#,
    },
    CorpusProgram {
        number: 9,
        summary: "Stand content beside a runner over the ground",
        raw: r#"MASK0=Text2Mask(prompt = "ground")
Pointcloud0=Mask2Pointcloud(mask = MASK0)
MASK1=Text2Mask(prompt = "the runner in the middle")
SKELETON_0=SkeletonExtraction(mask = MASK1)
PLANE_0=Pointcloud2PLANE(Pointcloud = Pointcloud0)
PLANAR_0=Planar(plane = SKELETON_0.median)"#,
        source: r#"MASK0=Text2Mask(prompt = "ground")
Pointcloud0=Mask2Pointcloud(mask = MASK0)
MASK1=Text2Mask(prompt = "the runner in the middle")
SKELETON_0=SkeletonExtraction(mask = MASK1)
PLANE_0=Pointcloud2PLANE(Pointcloud = Pointcloud0)
PLANAR_0=Planar(plane = SKELETON_0.median)"#,
    },
    CorpusProgram {
        number: 10,
        summary: "Place content on a building",
        raw: r#"MASK_0=Text2Mask(prompt = "building in the image")
POINTCLOUD_0=Mask2Pointcloud(mask = MASK0)
PLANE_0=Pointcloud2Plane(Pointcloud = Pointcloud0)
PLANAR_0=Planar(plane = PLANE_0)"#,
        source: r#"MASK_0=Text2Mask(prompt = "building in the image")
POINTCLOUD_0=Mask2Pointcloud(mask = MASK_0)
PLANE_0=Pointcloud2Plane(Pointcloud = POINTCLOUD_0)
PLANAR_0=Planar(plane = PLANE_0)"#,
    },
    CorpusProgram {
        number: 11,
        summary: "Circle a head with a spherical band",
        raw: r#"MASK_0=Text2Mask(prompt = "the human face")
FACE_0=FaceExtraction(mask = MASK_0)
POINTCLOUD_0=Mask2Pointcloud(mask = MASK_0)
SPHERE_0=Pointcloud2Sphere(Pointcloud = POINTCLOUD_0)
SPHERICAL_0=Spherical(sphere = SPHERE_0)"#,
        source: r#"MASK_0=Text2Mask(prompt = "the human face")
FACE_0=FaceExtraction(mask = MASK_0)
POINTCLOUD_0=Mask2Pointcloud(mask = MASK_0)
SPHERE_0=Pointcloud2Sphere(Pointcloud = POINTCLOUD_0)
SPHERICAL_0=Spherical(sphere = SPHERE_0)"#,
    },
    CorpusProgram {
        number: 12,
        summary: "Lay content flat on a floor",
        raw: r#"MASK0=Text2Mask(prompt ="floor")
Pointcloud0=Mask2Pointcloud(mask = MASK_0)
MASK1=Text2Mask(prompt = "the player")
SKELETON_0=SkeletonExtraction(mask = MASK_1)
PLANE_0=Pointcloud2PLANE(Pointcloud = POINTCLOUD_0)
PLANAR_0=Planar(plane = PLANE_0)"#,
        source: r#"MASK0=Text2Mask(prompt ="floor")
Pointcloud0=Mask2Pointcloud(mask = MASK0)
MASK1=Text2Mask(prompt = "the player")
SKELETON_0=SkeletonExtraction(mask = MASK1)
PLANE_0=Pointcloud2PLANE(Pointcloud = Pointcloud0)
PLANAR_0=Planar(plane = PLANE_0)"#,
    },
    CorpusProgram {
        number: 13,
        summary: "Raise a wall along a driveway",
        raw: r#"MASK0=Text2Mask(prompt = "driveway")
Pointcloud0=Mask2Pointcloud(mask = MASK_0)
PLANE_0=Pointcloud2PLANE(Pointcloud = POINTCLOUD_0)
PLANAR_0=Planar(plane = PLANE_0.extruded)"#,
        source: r#"MASK0=Text2Mask(prompt = "driveway")
Pointcloud0=Mask2Pointcloud(mask = MASK0)
PLANE_0=Pointcloud2PLANE(Pointcloud = Pointcloud0)
PLANAR_0=Planar(plane = PLANE_0.extruded)"#,
    },
    CorpusProgram {
        number: 14,
        summary: "Wrap content around a head along its vertical axis",
        raw: r#"MASK_0=Text2Mask(prompt = "the human head")
FACE_0=FaceExtraction(mask = MASK_0)
POINTCLOUD_0=Mask2Pointcloud(mask = MASK_0)
CYLINDER_0=Pointcloud2Cylinder(Pointcloud = POINTCLOUD_0, direction = FACE_0.cranial)
CYLINDRICAL_0=Cylindrical(cylinder = CYLINDER_0)"#,
        source: r#"MASK_0=Text2Mask(prompt = "the human head")
FACE_0=FaceExtraction(mask = MASK_0)
POINTCLOUD_0=Mask2Pointcloud(mask = MASK_0)
CYLINDER_0=Pointcloud2Cylinder(Pointcloud = POINTCLOUD_0, direction = FACE_0.cranial)
CYLINDRICAL_0=Cylindrical(cylinder = CYLINDER_0)"#,
    },
    CorpusProgram {
        number: 15,
        summary: "Stand content in the plane dividing a face",
        raw: r#"MASK_0=Text2Mask(prompt = "the human figure")
FACE_0=FaceExtraction(mask = MASK_0)
PLANAR=Planar(plane = FACE_0.median)"#,
        source: r#"MASK_0=Text2Mask(prompt = "the human figure")
FACE_0=FaceExtraction(mask = MASK_0)
PLANAR=Planar(plane = FACE_0.median)"#,
    },
    CorpusProgram {
        number: 16,
        summary: "Wrap content around a runner",
        raw: r#"MASK_0=Text2Mask(prompt = "runner")
POINTCLOUD_0=Mask2Pointcloud(mask = MASK_0)
CYLINDER_0=Pointcloud2Cylinder(Pointcloud = POINTCLOUD_0, direction = NULL)
CYLINDRICAL_0=Cylindrical(cylinder = CYLINDER_0)"#,
        source: r#"MASK_0=Text2Mask(prompt = "runner")
POINTCLOUD_0=Mask2Pointcloud(mask = MASK_0)
CYLINDER_0=Pointcloud2Cylinder(Pointcloud = POINTCLOUD_0, direction = NULL)
CYLINDRICAL_0=Cylindrical(cylinder = CYLINDER_0)"#,
    },
];
