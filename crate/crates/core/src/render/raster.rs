//! Point-sampled painter's-order rasterization of square primitives.

use rayon::prelude::*;
use thiserror::Error;

use super::evaluate::Primitive;
use super::transform::Transform2D;
use crate::color::{hsv_to_rgb, RgbColor};
use crate::scene::ast::PrimKind;

/// Rows per parallel band.
const BAND: usize = 32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RasterError {
    #[error("image size {size} must exceed twice the border ({border})")]
    Canvas { size: u32, border: u32 },
}

/// Row-major RGB8 image plus the world-to-image mapping used to draw it.
#[derive(Debug, Clone, PartialEq)]
pub struct PixelBuffer {
    width: u32,
    height: u32,
    data: Vec<u8>,
    world_to_image: Transform2D,
}

impl PixelBuffer {
    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    /// Raw `RGBRGB...` samples, top row first.
    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn into_data(self) -> Vec<u8> {
        self.data
    }

    pub fn world_to_image(&self) -> Transform2D {
        self.world_to_image
    }

    pub fn pixel(&self, x: u32, y: u32) -> [u8; 3] {
        let i = (y as usize * self.width as usize + x as usize) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }
}

/// Image-space sampler for one square: pixel centre to local coordinates.
struct Stamp {
    to_local: Transform2D,
    rgb: [u8; 3],
    x0: usize,
    x1: usize,
    y0: usize,
    y1: usize,
}

/// Renders `prims` onto a `size`×`size` image.
///
/// The non-fill primitives' bounding box is scaled uniformly so its longer
/// side spans `size - 2·border` pixels and is centred. The last fill sets
/// the background (white when there is none); squares after it are painted
/// in emission order, each covering the pixels whose centres fall inside it.
pub fn rasterize(prims: &[Primitive], size: u32, border: u32) -> Result<PixelBuffer, RasterError> {
    if size == 0 || size as u64 <= 2 * border as u64 {
        return Err(RasterError::Canvas { size, border });
    }
    let n = size as usize;
    let last_fill = prims.iter().rposition(|p| p.kind == PrimKind::Fill);
    let background = match last_fill {
        Some(i) => hsv_to_rgb(prims[i].color).to_rgb8(),
        None => RgbColor::WHITE.to_rgb8(),
    };
    let squares = &prims[last_fill.map_or(0, |i| i + 1)..];

    let (mut min_x, mut min_y, mut max_x, mut max_y) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in prims.iter().filter(|p| p.kind == PrimKind::Square) {
        for (x, y) in p.transform.unit_square_corners() {
            min_x = min_x.min(x);
            max_x = max_x.max(x);
            min_y = min_y.min(y);
            max_y = max_y.max(y);
        }
    }

    let mut data = vec![0u8; n * n * 3];
    for px in data.chunks_exact_mut(3) {
        px.copy_from_slice(&background);
    }
    if !min_x.is_finite() || !max_x.is_finite() || !min_y.is_finite() || !max_y.is_finite() {
        return Ok(PixelBuffer { width: size, height: size, data, world_to_image: Transform2D::IDENTITY });
    }

    let avail = (size - 2 * border) as f64;
    let (w, h) = (max_x - min_x, max_y - min_y);
    let scale = avail / w.max(h);
    let off_x = border as f64 + (avail - w * scale) / 2.0;
    let off_y = border as f64 + (avail - h * scale) / 2.0;
    // image y grows downwards
    let world_to_image = Transform2D {
        a: scale,
        b: 0.0,
        c: 0.0,
        d: -scale,
        e: off_x - min_x * scale,
        f: off_y + max_y * scale,
    };
    let image_to_world = world_to_image.inverse().expect("positive scale");

    let stamps: Vec<Stamp> = squares
        .iter()
        .filter(|p| p.kind == PrimKind::Square)
        .filter_map(|p| stamp(p, &world_to_image, &image_to_world, n))
        .collect();

    let bands = n.div_ceil(BAND);
    let mut binned: Vec<Vec<u32>> = vec![Vec::new(); bands];
    for (i, s) in stamps.iter().enumerate() {
        for list in &mut binned[s.y0 / BAND..=s.y1 / BAND] {
            list.push(i as u32);
        }
    }

    data.par_chunks_mut(BAND * n * 3).zip(binned.par_iter()).enumerate().for_each(|(band, (rows, list))| {
        let row0 = band * BAND;
        let row_end = row0 + rows.len() / (n * 3);
        for &i in list {
            let s = &stamps[i as usize];
            for y in s.y0.max(row0)..=s.y1.min(row_end - 1) {
                let cy = y as f64 + 0.5;
                let line = &mut rows[(y - row0) * n * 3..(y - row0 + 1) * n * 3];
                for x in s.x0..=s.x1 {
                    let (lx, ly) = s.to_local.apply(x as f64 + 0.5, cy);
                    if (-0.5..0.5).contains(&lx) && (-0.5..0.5).contains(&ly) {
                        line[x * 3..x * 3 + 3].copy_from_slice(&s.rgb);
                    }
                }
            }
        }
    });

    Ok(PixelBuffer { width: size, height: size, data, world_to_image })
}

fn stamp(p: &Primitive, world_to_image: &Transform2D, image_to_world: &Transform2D, n: usize) -> Option<Stamp> {
    let to_local = p.transform.inverse()?.then(image_to_world);
    let (mut x_lo, mut y_lo, mut x_hi, mut y_hi) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for (wx, wy) in p.transform.unit_square_corners() {
        let (x, y) = world_to_image.apply(wx, wy);
        x_lo = x_lo.min(x);
        x_hi = x_hi.max(x);
        y_lo = y_lo.min(y);
        y_hi = y_hi.max(y);
    }
    // pixels whose centres may lie inside, with one pixel of slack for rounding
    let first = |v: f64| (v - 0.5).floor().max(0.0);
    let last = |v: f64| (v - 0.5).ceil().min(n as f64 - 1.0);
    let (x0, x1, y0, y1) = (first(x_lo), last(x_hi), first(y_lo), last(y_hi));
    if !(x0 <= x1 && y0 <= y1) {
        return None;
    }
    Some(Stamp {
        to_local,
        rgb: hsv_to_rgb(p.color).to_rgb8(),
        x0: x0 as usize,
        x1: x1 as usize,
        y0: y0 as usize,
        y1: y1 as usize,
    })
}
