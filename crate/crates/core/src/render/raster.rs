use image::RgbaImage;

use super::Background;
use crate::anchors::{content_uv, sample_bilinear, AnchorParams, SurfaceMesh};
use crate::geom::Vec3;
#[cfg(feature = "parallel")]
use crate::par::*;
use crate::scene::{DepthScene, PinholeCamera};

/// Everything needed to draw one layer.
#[derive(Debug, Clone)]
pub struct LayerDraw {
    pub mesh: SurfaceMesh,
    pub params: AnchorParams,
    pub texture: RgbaImage,
    pub double_sided: bool,
}

/// Colour plus a 64-bit depth buffer.
#[derive(Debug, Clone)]
pub struct Framebuffer {
    pub width: u32,
    pub height: u32,
    pub color: Vec<u8>,
    pub depth: Vec<f64>,
}

/// Straight-alpha source-over of `src` (components in [0, 1]) onto `dst`.
pub fn blend_over(dst: [u8; 4], src: [f64; 4]) -> [u8; 4] {
    let a_s = src[3];
    let a_d = dst[3] as f64 / 255.0;
    let out_a = a_s + a_d * (1.0 - a_s);
    if out_a <= 0.0 {
        return [0, 0, 0, 0];
    }
    let q = |v: f64| (v * 255.0).round().clamp(0.0, 255.0) as u8;
    let mut out = [0u8; 4];
    for c in 0..3 {
        let d = dst[c] as f64 / 255.0;
        out[c] = q((src[c] * a_s + d * a_d * (1.0 - a_s)) / out_a);
    }
    out[3] = q(out_a);
    out
}

#[derive(Debug, Clone, Copy)]
struct ClipVert {
    pos: Vec3,
    uv: [f64; 2],
}

#[derive(Debug, Clone, Copy)]
struct ScreenVert {
    x: f64,
    y: f64,
    /// 1 / z
    w: f64,
    /// uv / z
    uw: [f64; 2],
}

#[derive(Debug, Clone, Copy)]
struct ScreenTri {
    v: [ScreenVert; 3],
    top_left: [bool; 3],
    y_range: (i64, i64),
    x_range: (i64, i64),
}

/// Edge function with a canonical vertex order, so a shared edge yields
/// exactly opposite values in the two triangles that use it.
fn edge(a: (f64, f64), b: (f64, f64), p: (f64, f64)) -> f64 {
    let raw = |a: (f64, f64), b: (f64, f64)| (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
    if (a.0, a.1) <= (b.0, b.1) {
        raw(a, b)
    } else {
        -raw(b, a)
    }
}

fn clip_near(tri: [ClipVert; 3], near: f64) -> Vec<ClipVert> {
    let mut out = Vec::with_capacity(4);
    for i in 0..3 {
        let a = tri[i];
        let b = tri[(i + 1) % 3];
        let (ain, bin) = (a.pos.z >= near, b.pos.z >= near);
        if ain {
            out.push(a);
        }
        if ain != bin {
            let t = (near - a.pos.z) / (b.pos.z - a.pos.z);
            out.push(ClipVert {
                pos: a.pos + (b.pos - a.pos) * t,
                uv: [a.uv[0] + (b.uv[0] - a.uv[0]) * t, a.uv[1] + (b.uv[1] - a.uv[1]) * t],
            });
        }
    }
    out
}

fn setup(v: [ScreenVert; 3], width: u32, height: u32) -> Option<ScreenTri> {
    let p = |s: &ScreenVert| (s.x, s.y);
    let mut v = v;
    let area = edge(p(&v[0]), p(&v[1]), p(&v[2]));
    if !(area.abs() > 0.0) {
        return None;
    }
    if area < 0.0 {
        v.swap(1, 2);
    }
    let top_left = [(1, 2), (2, 0), (0, 1)].map(|(a, b): (usize, usize)| {
        let (dx, dy) = (v[b].x - v[a].x, v[b].y - v[a].y);
        dy < 0.0 || (dy == 0.0 && dx > 0.0)
    });
    let min_x = v.iter().map(|s| s.x).fold(f64::INFINITY, f64::min).ceil().max(0.0);
    let max_x = v.iter().map(|s| s.x).fold(f64::NEG_INFINITY, f64::max).floor().min(width as f64 - 1.0);
    let min_y = v.iter().map(|s| s.y).fold(f64::INFINITY, f64::min).ceil().max(0.0);
    let max_y = v.iter().map(|s| s.y).fold(f64::NEG_INFINITY, f64::max).floor().min(height as f64 - 1.0);
    if min_x > max_x || min_y > max_y {
        return None;
    }
    Some(ScreenTri {
        v,
        top_left,
        y_range: (min_y as i64, max_y as i64),
        x_range: (min_x as i64, max_x as i64),
    })
}

impl Framebuffer {
    /// Colour from the image (or a solid fill), depth from the scene, each
    /// scene pixel replicated `n × n` times.
    pub fn from_scene(scene: &DepthScene, background: Background, n: u32) -> Self {
        let (w, h) = (scene.width() * n, scene.height() * n);
        let mut color = Vec::with_capacity((w * h * 4) as usize);
        let mut depth = Vec::with_capacity((w * h) as usize);
        for y in 0..h {
            for x in 0..w {
                let (sx, sy) = (x / n, y / n);
                match background {
                    Background::Image => color.extend_from_slice(&scene.image.get_pixel(sx, sy).0),
                    Background::SolidColor(c) => color.extend_from_slice(&c),
                }
                depth.push(scene.depth_at(sx, sy).unwrap_or(f64::INFINITY));
            }
        }
        Self {
            width: w,
            height: h,
            color,
            depth,
        }
    }

    fn screen_triangles(&self, camera: &PinholeCamera, layer: &LayerDraw, near: f64) -> Vec<ScreenTri> {
        let mesh = &layer.mesh;
        let mut out = Vec::with_capacity(mesh.triangles.len());
        for (i, tri) in mesh.triangles.iter().enumerate() {
            let verts = tri.map(|k| ClipVert {
                pos: mesh.vertices[k as usize],
                uv: mesh.uvs[k as usize],
            });
            if !layer.double_sided {
                let centroid = (verts[0].pos + verts[1].pos + verts[2].pos) / 3.0;
                if mesh.triangle_normal(i).dot(&-centroid) <= 0.0 {
                    continue;
                }
            }
            let poly = clip_near(verts, near);
            if poly.len() < 3 {
                continue;
            }
            let sv: Vec<ScreenVert> = poly
                .iter()
                .map(|c| {
                    let w = 1.0 / c.pos.z;
                    ScreenVert {
                        x: camera.cx + camera.fx * c.pos.x * w,
                        y: camera.cy + camera.fy * c.pos.y * w,
                        w,
                        uw: [c.uv[0] * w, c.uv[1] * w],
                    }
                })
                .collect();
            for k in 1..sv.len() - 1 {
                if let Some(t) = setup([sv[0], sv[k], sv[k + 1]], self.width, self.height) {
                    out.push(t);
                }
            }
        }
        out
    }

    /// Rasterizes one layer with the depth test `z < zbuf · (1 + eps)`.
    pub fn draw(&mut self, camera: &PinholeCamera, layer: &LayerDraw, eps: f64, near: f64) {
        let tris = self.screen_triangles(camera, layer, near);
        if tris.is_empty() {
            return;
        }
        let width = self.width as usize;
        let rows = maybe_par_chunks_mut!(self.color, width * 4).zip(maybe_par_chunks_mut!(self.depth, width));
        rows.enumerate().for_each(|(y, (crow, zrow))| {
            let y = y as i64;
            let py = y as f64;
            for t in tris.iter().filter(|t| t.y_range.0 <= y && y <= t.y_range.1) {
                let [a, b, c] = t.v;
                let (pa, pb, pc) = ((a.x, a.y), (b.x, b.y), (c.x, c.y));
                for x in t.x_range.0..=t.x_range.1 {
                    let p = (x as f64, py);
                    let e = [edge(pb, pc, p), edge(pc, pa, p), edge(pa, pb, p)];
                    if !(0..3).all(|i| e[i] > 0.0 || (e[i] == 0.0 && t.top_left[i])) {
                        continue;
                    }
                    let sum = e[0] + e[1] + e[2];
                    let l = [e[0] / sum, e[1] / sum, e[2] / sum];
                    let iw = l[0] * a.w + l[1] * b.w + l[2] * c.w;
                    let zf = 1.0 / iw;
                    let xi = x as usize;
                    if !(zf < zrow[xi] * (1.0 + eps)) {
                        continue;
                    }
                    let s = (l[0] * a.uw[0] + l[1] * b.uw[0] + l[2] * c.uw[0]) / iw;
                    let tt = (l[0] * a.uw[1] + l[1] * b.uw[1] + l[2] * c.uw[1]) / iw;
                    let (cs, ct) = content_uv(&layer.params, s, tt);
                    let texel = sample_bilinear(&layer.texture, cs, ct);
                    if texel[3] <= 0.0 {
                        continue;
                    }
                    let px = &mut crow[xi * 4..xi * 4 + 4];
                    let out = blend_over([px[0], px[1], px[2], px[3]], texel);
                    px.copy_from_slice(&out);
                    if texel[3] >= 0.5 {
                        zrow[xi] = zf;
                    }
                }
            }
        });
    }

    /// Box-filters `n × n` blocks down to the output resolution.
    pub fn resolve(self, n: u32) -> RgbaImage {
        if n == 1 {
            return RgbaImage::from_raw(self.width, self.height, self.color).expect("buffer size");
        }
        let (w, h) = (self.width / n, self.height / n);
        let area = (n * n) as f64;
        RgbaImage::from_fn(w, h, |x, y| {
            let mut acc = [0u32; 4];
            for dy in 0..n {
                for dx in 0..n {
                    let i = (((y * n + dy) * self.width + x * n + dx) * 4) as usize;
                    for c in 0..4 {
                        acc[c] += self.color[i + c] as u32;
                    }
                }
            }
            image::Rgba(acc.map(|v| (v as f64 / area).round() as u8))
        })
    }
}
