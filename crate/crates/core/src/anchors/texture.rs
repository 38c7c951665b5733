use image::{Rgba, RgbaImage};

use super::ContentLayer;
use crate::geom::sin_cos_snapped;

/// Asset id of the bundled placeholder text raster.
pub const PLACEHOLDER_ASSET: &str = "placeholder";

/// Tiles the layer content `repeat[0] × repeat[1]` times. Each cell is the
/// content plus a transparent margin of `gap · content size` (split evenly on
/// both sides); odd columns are mirrored when `mirror` is set, and each tile
/// is rotated about its centre by `content_rotation` (nearest neighbour).
pub fn compose_layer_texture(layer: &ContentLayer) -> RgbaImage {
    let src = &layer.content;
    let (w, h) = src.dimensions();
    let gap_x = (layer.gap[0] * w as f64).round() as u32;
    let gap_y = (layer.gap[1] * h as f64).round() as u32;
    let (cell_w, cell_h) = (w + gap_x, h + gap_y);
    let (nu, nv) = (layer.repeat[0].max(1), layer.repeat[1].max(1));
    let (pad_x, pad_y) = (gap_x / 2, gap_y / 2);
    let (sin, cos) = sin_cos_snapped(layer.content_rotation);
    let (mx, my) = ((w as f64 - 1.0) / 2.0, (h as f64 - 1.0) / 2.0);
    let plain = layer.content_rotation == 0.0;

    RgbaImage::from_fn(nu * cell_w, nv * cell_h, |x, y| {
        let (col, lx) = (x / cell_w, x % cell_w);
        let ly = y % cell_h;
        if lx < pad_x || ly < pad_y || lx - pad_x >= w || ly - pad_y >= h {
            return Rgba([0, 0, 0, 0]);
        }
        let mut tx = lx - pad_x;
        let ty = ly - pad_y;
        if layer.mirror && col % 2 == 1 {
            tx = w - 1 - tx;
        }
        if plain {
            return *src.get_pixel(tx, ty);
        }
        // Inverse rotation: which source texel lands on (tx, ty).
        let (dx, dy) = (tx as f64 - mx, ty as f64 - my);
        let sx = (cos * dx + sin * dy + mx).round();
        let sy = (-sin * dx + cos * dy + my).round();
        if sx < 0.0 || sy < 0.0 || sx >= w as f64 || sy >= h as f64 {
            Rgba([0, 0, 0, 0])
        } else {
            *src.get_pixel(sx as u32, sy as u32)
        }
    })
}

/// Bilinear lookup at texture coordinates `(s, t)` with `t` increasing
/// upward. Texels outside the raster are transparent. Filtering happens in
/// premultiplied space; the result is straight alpha in `[0, 1]`.
pub fn sample_bilinear(tex: &RgbaImage, s: f64, t: f64) -> [f64; 4] {
    let (w, h) = tex.dimensions();
    if !(0.0..=1.0).contains(&s) || !(0.0..=1.0).contains(&t) {
        return [0.0; 4];
    }
    let x = s * w as f64 - 0.5;
    let y = (1.0 - t) * h as f64 - 0.5;
    let (x0, y0) = (x.floor(), y.floor());
    let (fx, fy) = (x - x0, y - y0);
    let mut acc = [0.0f64; 4];
    for (dx, dy, wt) in [
        (0, 0, (1.0 - fx) * (1.0 - fy)),
        (1, 0, fx * (1.0 - fy)),
        (0, 1, (1.0 - fx) * fy),
        (1, 1, fx * fy),
    ] {
        if wt == 0.0 {
            continue;
        }
        let (px, py) = (x0 as i64 + dx, y0 as i64 + dy);
        if px < 0 || py < 0 || px >= w as i64 || py >= h as i64 {
            continue;
        }
        let p = tex.get_pixel(px as u32, py as u32).0;
        let a = p[3] as f64 / 255.0;
        for c in 0..3 {
            acc[c] += wt * a * (p[c] as f64 / 255.0);
        }
        acc[3] += wt * a;
    }
    if acc[3] <= 0.0 {
        return [0.0; 4];
    }
    [acc[0] / acc[3], acc[1] / acc[3], acc[2] / acc[3], acc[3].min(1.0)]
}

const GLYPH_W: u32 = 5;
const GLYPH_H: u32 = 7;

fn glyph(c: char) -> [u8; 7] {
    match c {
        'E' => [0x1f, 0x10, 0x10, 0x1e, 0x10, 0x10, 0x1f],
        'I' => [0x0e, 0x04, 0x04, 0x04, 0x04, 0x04, 0x0e],
        'L' => [0x10, 0x10, 0x10, 0x10, 0x10, 0x10, 0x1f],
        'M' => [0x11, 0x1b, 0x15, 0x15, 0x11, 0x11, 0x11],
        'O' => [0x0e, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0e],
        'P' => [0x1e, 0x11, 0x11, 0x1e, 0x10, 0x10, 0x10],
        'R' => [0x1e, 0x11, 0x11, 0x1e, 0x14, 0x12, 0x11],
        'S' => [0x0f, 0x10, 0x10, 0x0e, 0x01, 0x01, 0x1e],
        'U' => [0x11, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0e],
        _ => [0; 7],
    }
}

/// The default content of a new layer: "LOREM IPSUM" in a 5×7 bitmap font,
/// dark glyphs on a transparent background.
pub fn placeholder_raster() -> RgbaImage {
    const TEXT: &str = "LOREM IPSUM";
    const SCALE: u32 = 4;
    const MARGIN: u32 = 1;
    let advance = GLYPH_W + 1;
    let cols = TEXT.len() as u32 * advance - 1 + 2 * MARGIN;
    let rows = GLYPH_H + 2 * MARGIN;
    let chars: Vec<char> = TEXT.chars().collect();
    RgbaImage::from_fn(cols * SCALE, rows * SCALE, |x, y| {
        let (gx, gy) = (x / SCALE, y / SCALE);
        if gx < MARGIN || gy < MARGIN || gy >= MARGIN + GLYPH_H {
            return Rgba([0, 0, 0, 0]);
        }
        let (ci, cx) = ((gx - MARGIN) / advance, (gx - MARGIN) % advance);
        let on = cx < GLYPH_W
            && chars
                .get(ci as usize)
                .is_some_and(|&c| glyph(c)[(gy - MARGIN) as usize] & (0x10 >> cx) != 0);
        if on {
            Rgba([24, 24, 24, 255])
        } else {
            Rgba([0, 0, 0, 0])
        }
    })
}

/// Base64 of the PNG encoding of `img`.
pub fn raster_base64(img: &RgbaImage) -> String {
    use base64::Engine;
    base64::engine::general_purpose::STANDARD.encode(crate::scene::encode_png(img))
}

/// Serializes a raster as a base64 PNG string.
pub(crate) mod raster_serde {
    use base64::Engine;
    use image::RgbaImage;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(img: &RgbaImage, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::raster_base64(img))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<RgbaImage, D::Error> {
        let text = String::deserialize(d)?;
        let bytes = base64::engine::general_purpose::STANDARD
            .decode(text.as_bytes())
            .map_err(D::Error::custom)?;
        Ok(image::load_from_memory(&bytes)
            .map_err(D::Error::custom)?
            .into_rgba8())
    }
}
