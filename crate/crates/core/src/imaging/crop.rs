use serde::{Deserialize, Serialize};

use super::{binarize, compute_histogram, otsu_threshold, BinaryImage, GrayImage, ImagingError, Rect};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CropMode {
    /// Bounding box of the largest ink component, plus a margin.
    #[default]
    Auto,
    /// Keep the whole image.
    None,
    /// Use `CropConfig::rect` as given.
    Manual,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CropConfig {
    pub mode: CropMode,
    pub margin_px: usize,
    pub rect: Option<Rect>,
}

impl Default for CropConfig {
    fn default() -> Self {
        CropConfig {
            mode: CropMode::Auto,
            margin_px: 8,
            rect: None,
        }
    }
}

/// 8-connected components of set pixels as `(pixel count, bounding box)`,
/// in raster order of their first pixel.
pub fn connected_components(img: &BinaryImage) -> Vec<(usize, Rect)> {
    let (w, h) = (img.width(), img.height());
    let mut seen = vec![false; w * h];
    let mut out = Vec::new();
    let mut stack = Vec::new();
    for start in 0..w * h {
        if seen[start] || img.data()[start] == 0 {
            continue;
        }
        seen[start] = true;
        stack.push(start);
        let (mut x0, mut y0, mut x1, mut y1) = (usize::MAX, usize::MAX, 0, 0);
        let mut count = 0;
        while let Some(i) = stack.pop() {
            let (x, y) = (i % w, i / w);
            count += 1;
            x0 = x0.min(x);
            y0 = y0.min(y);
            x1 = x1.max(x);
            y1 = y1.max(y);
            for ny in y.saturating_sub(1)..=(y + 1).min(h - 1) {
                for nx in x.saturating_sub(1)..=(x + 1).min(w - 1) {
                    let j = ny * w + nx;
                    if !seen[j] && img.data()[j] == 1 {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            }
        }
        out.push((count, Rect::new(x0, y0, x1 - x0 + 1, y1 - y0 + 1)));
    }
    out
}

/// Region `auto_crop` would keep.
pub fn find_crop(img: &GrayImage, cfg: &CropConfig) -> Result<Rect, ImagingError> {
    if img.is_empty() {
        return Err(ImagingError::EmptyImage);
    }
    match cfg.mode {
        CropMode::None => return Ok(img.bounds()),
        CropMode::Manual => {
            let r = cfg.rect.ok_or_else(|| {
                ImagingError::Unsupported("manual crop mode needs a rectangle".into())
            })?;
            if !r.fits_in(img.width(), img.height()) {
                return Err(ImagingError::BadRect(r));
            }
            return Ok(r);
        }
        CropMode::Auto => {}
    }
    let hist = compute_histogram(img)?;
    let bin = match otsu_threshold(&hist) {
        Ok(r) => binarize(img, r.threshold, true),
        // A single grey level: all ink if dark, nothing otherwise.
        Err(ImagingError::DegenerateHistogram(v)) if v < 128 => return Ok(img.bounds()),
        Err(ImagingError::DegenerateHistogram(_)) => return Err(ImagingError::NoContent),
        Err(e) => return Err(e),
    };
    let (_, bbox) = connected_components(&bin)
        .into_iter()
        .fold(None, |best: Option<(usize, Rect)>, c| match best {
            Some(b) if b.0 >= c.0 => Some(b),
            _ => Some(c),
        })
        .ok_or(ImagingError::NoContent)?;
    let m = cfg.margin_px;
    let x0 = bbox.x.saturating_sub(m);
    let y0 = bbox.y.saturating_sub(m);
    let x1 = (bbox.right() + m).min(img.width());
    let y1 = (bbox.bottom() + m).min(img.height());
    Ok(Rect::new(x0, y0, x1 - x0, y1 - y0))
}

/// Crops to the page content (or to the configured rectangle).
pub fn auto_crop(img: &GrayImage, cfg: &CropConfig) -> Result<GrayImage, ImagingError> {
    img.crop(find_crop(img, cfg)?)
}
