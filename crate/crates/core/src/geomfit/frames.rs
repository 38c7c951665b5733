use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{GeomError, Plane};
use crate::geom::{self, Vec3};
use crate::unproject::Landmark3D;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BodyKind {
    Skeleton,
    Face,
}

impl BodyKind {
    pub fn required_landmarks(self) -> &'static [&'static str] {
        match self {
            BodyKind::Skeleton => &["left_shoulder", "right_shoulder", "left_hip", "right_hip"],
            BodyKind::Face => &["left_eye", "right_eye", "nose_tip"],
        }
    }
}

/// Anatomical frame of a detected body or face. `cranial` points toward the
/// head, `anterior` out of the front of the body (camera-facing), `lateral`
/// toward the subject's left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BodyFrame {
    pub kind: BodyKind,
    pub landmarks: Vec<Landmark3D>,
    pub cranial: Vec3,
    pub anterior: Vec3,
    pub lateral: Vec3,
    pub frontal: Plane,
    pub median: Plane,
}

fn half_extents(points: &[Vec3], origin: &Vec3, a: &Vec3, b: &Vec3) -> [f64; 2] {
    points.iter().fold([0.0f64; 2], |acc, p| {
        let q = p - origin;
        [acc[0].max(q.dot(a).abs()), acc[1].max(q.dot(b).abs())]
    })
}

fn degenerate(what: &str) -> GeomError {
    GeomError::DegenerateCloud(format!("landmarks do not span a frame ({what})"))
}

fn unit(v: Vec3, what: &str) -> Result<Vec3, GeomError> {
    let n = v.norm();
    if n > 1e-12 && n.is_finite() {
        Ok(v / n)
    } else {
        Err(degenerate(what))
    }
}

pub fn derive_body_frames(landmarks: &[Landmark3D], kind: BodyKind) -> Result<BodyFrame, GeomError> {
    let by_name: HashMap<&str, Vec3> = landmarks
        .iter()
        .map(|l| (l.name.as_str(), l.position))
        .collect();
    let missing: Vec<String> = kind
        .required_landmarks()
        .iter()
        .filter(|n| !by_name.contains_key(*n))
        .map(|n| n.to_string())
        .collect();
    if !missing.is_empty() {
        return Err(GeomError::MissingLandmarks(missing));
    }
    let at = |n: &str| by_name[n];
    let positions: Vec<Vec3> = landmarks.iter().map(|l| l.position).collect();
    let centroid = geom::centroid(&positions);

    let (cranial, lateral, midline) = match kind {
        BodyKind::Skeleton => {
            let shoulders = (at("left_shoulder") + at("right_shoulder")) / 2.0;
            let hips = (at("left_hip") + at("right_hip")) / 2.0;
            let cranial = unit(shoulders - hips, "shoulders coincide with hips")?;
            let lateral = unit(
                geom::reject(&(at("left_shoulder") - at("right_shoulder")), &cranial),
                "shoulder line is vertical",
            )?;
            (cranial, lateral, (shoulders + hips) / 2.0)
        }
        BodyKind::Face => {
            let eyes = (at("left_eye") + at("right_eye")) / 2.0;
            let lateral = unit(at("left_eye") - at("right_eye"), "eyes coincide")?;
            let below = by_name.get("chin").copied().unwrap_or(at("nose_tip"));
            let cranial = unit(geom::reject(&(eyes - below), &lateral), "nose or chin on the eye line")?;
            let lateral = unit(geom::reject(&lateral, &cranial), "eye line")?;
            (cranial, lateral, eyes)
        }
    };
    let anterior = geom::face_camera(lateral.cross(&cranial), &centroid);

    let frontal_normal = anterior;
    let mut frontal = Plane::through(centroid, frontal_normal, lateral, [0.0; 2]);
    frontal.extent = half_extents(&positions, &centroid, &frontal.primary_dir, &frontal.secondary_dir());

    let mut median = Plane::through(midline, lateral, anterior, [0.0; 2]);
    let e = half_extents(&positions, &midline, &median.primary_dir, &median.secondary_dir());
    // Landmarks hug the median plane along `anterior`; size it like a profile.
    median.extent = [e[0].max(e[1]), e[1]];

    Ok(BodyFrame {
        kind,
        landmarks: landmarks.to_vec(),
        cranial,
        anterior,
        lateral,
        frontal,
        median,
    })
}
