//! Rotation about the image centre, same canvas size.
//!
//! A positive angle turns content counter-clockwise as displayed (y down).
//! Each output pixel samples the source at
//! `sx = cx + (x-cx) cos a - (y-cy) sin a`, `sy = cy + (x-cx) sin a + (y-cy) cos a`.

use crate::imaging::{BinaryImage, GrayImage};

fn inverse_map(width: usize, height: usize, angle: f64) -> impl Fn(usize, usize) -> (f64, f64) {
    let (s, c) = angle.sin_cos();
    let cx = (width as f64 - 1.0) / 2.0;
    let cy = (height as f64 - 1.0) / 2.0;
    move |x, y| {
        let (dx, dy) = (x as f64 - cx, y as f64 - cy);
        (cx + dx * c - dy * s, cy + dx * s + dy * c)
    }
}

/// Bilinear resampling; area uncovered by the source is white.
pub fn rotate_gray(img: &GrayImage, angle: f64) -> GrayImage {
    if angle == 0.0 {
        return img.clone();
    }
    let (w, h) = (img.width(), img.height());
    let map = inverse_map(w, h, angle);
    let sample = |x: i64, y: i64| -> f64 {
        if x < 0 || y < 0 || x >= w as i64 || y >= h as i64 {
            255.0
        } else {
            img.get(x as usize, y as usize) as f64
        }
    };
    GrayImage::from_fn(w, h, |x, y| {
        let (sx, sy) = map(x, y);
        let (x0, y0) = (sx.floor(), sy.floor());
        let (fx, fy) = (sx - x0, sy - y0);
        let (x0, y0) = (x0 as i64, y0 as i64);
        let top = sample(x0, y0) * (1.0 - fx) + sample(x0 + 1, y0) * fx;
        let bottom = sample(x0, y0 + 1) * (1.0 - fx) + sample(x0 + 1, y0 + 1) * fx;
        (top * (1.0 - fy) + bottom * fy).round().clamp(0.0, 255.0) as u8
    })
}

/// Nearest-neighbour resampling; uncovered area is background (0).
pub fn rotate_binary(img: &BinaryImage, angle: f64) -> BinaryImage {
    if angle == 0.0 {
        return img.clone();
    }
    let (w, h) = (img.width(), img.height());
    let map = inverse_map(w, h, angle);
    BinaryImage::from_fn(w, h, |x, y| {
        let (sx, sy) = map(x, y);
        let (sx, sy) = (sx.round(), sy.round());
        sx >= 0.0 && sy >= 0.0 && (sx as usize) < w && (sy as usize) < h && img.get(sx as usize, sy as usize)
    })
}
