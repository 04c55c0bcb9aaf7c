//! Raster types and the binarization / morphology front end.

mod crop;
mod io;
mod morphology;
mod otsu;

pub use crop::{auto_crop, connected_components, find_crop, CropConfig, CropMode};
pub use io::{load_gray, luma, save_gray};
pub use morphology::{
    dilate, erode, extract_line_mask, line_element_length, StructuringElement,
};
pub use otsu::{binarize, class_stats, compute_histogram, otsu_threshold, ClassStats, Histogram, OtsuResult};

use serde::{Deserialize, Serialize};

/// Number of grey levels.
pub const LEVELS: usize = 256;

/// Line elements are `dimension / DEFAULT_KERNEL_DIVISOR` long unless configured.
pub const DEFAULT_KERNEL_DIVISOR: usize = 40;

#[derive(Debug, thiserror::Error)]
pub enum ImagingError {
    #[error("image has no pixels")]
    EmptyImage,
    #[error("all pixels share intensity {0}; no separating threshold exists")]
    DegenerateHistogram(u8),
    #[error("line element length {length} is below 2 (image dimension {dimension}, divisor {divisor})")]
    ElementTooSmall {
        length: usize,
        dimension: usize,
        divisor: usize,
    },
    #[error("no foreground content found")]
    NoContent,
    #[error("pixel buffer holds {actual} values, expected {expected}")]
    BufferSize { expected: usize, actual: usize },
    #[error("binary image value {0} is neither 0 nor 1")]
    NotBinary(u8),
    #[error("structuring element must be at least 1x1")]
    EmptyElement,
    #[error("threshold {0} outside 0..=254")]
    ThresholdRange(u8),
    #[error("crop rectangle {0:?} is empty or outside the image")]
    BadRect(Rect),
    #[error("unsupported raster: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Image(#[from] image::ImageError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Axis-aligned pixel rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rect {
    pub x: usize,
    pub y: usize,
    pub width: usize,
    pub height: usize,
}

impl Rect {
    pub fn new(x: usize, y: usize, width: usize, height: usize) -> Self {
        Rect { x, y, width, height }
    }

    pub fn right(&self) -> usize {
        self.x + self.width
    }

    pub fn bottom(&self) -> usize {
        self.y + self.height
    }

    pub fn is_empty(&self) -> bool {
        self.width == 0 || self.height == 0
    }

    pub fn fits_in(&self, width: usize, height: usize) -> bool {
        !self.is_empty() && self.right() <= width && self.bottom() <= height
    }

    /// Shrinks each side by `margin`, or `None` when nothing would remain.
    pub fn inset(&self, margin: usize) -> Option<Rect> {
        if self.width <= 2 * margin || self.height <= 2 * margin {
            return None;
        }
        Some(Rect::new(
            self.x + margin,
            self.y + margin,
            self.width - 2 * margin,
            self.height - 2 * margin,
        ))
    }
}

/// Row-major 8-bit intensities.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self, ImagingError> {
        if data.len() != width * height {
            return Err(ImagingError::BufferSize {
                expected: width * height,
                actual: data.len(),
            });
        }
        Ok(GrayImage { width, height, data })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        GrayImage {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        GrayImage { width, height, data }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: u8) {
        self.data[y * self.width + x] = v;
    }

    pub fn crop(&self, r: Rect) -> Result<GrayImage, ImagingError> {
        if !r.fits_in(self.width, self.height) {
            return Err(ImagingError::BadRect(r));
        }
        let mut data = Vec::with_capacity(r.width * r.height);
        for y in r.y..r.bottom() {
            data.extend_from_slice(&self.data[y * self.width + r.x..y * self.width + r.right()]);
        }
        Ok(GrayImage {
            width: r.width,
            height: r.height,
            data,
        })
    }

    pub fn bounds(&self) -> Rect {
        Rect::new(0, 0, self.width, self.height)
    }
}

/// Row-major {0, 1} raster; 1 is ink.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl BinaryImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self, ImagingError> {
        if data.len() != width * height {
            return Err(ImagingError::BufferSize {
                expected: width * height,
                actual: data.len(),
            });
        }
        if let Some(&bad) = data.iter().find(|&&v| v > 1) {
            return Err(ImagingError::NotBinary(bad));
        }
        Ok(BinaryImage { width, height, data })
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        BinaryImage {
            width,
            height,
            data: vec![0; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut img = BinaryImage::zeros(width, height);
        for y in 0..height {
            for x in 0..width {
                img.data[y * width + x] = f(x, y) as u8;
            }
        }
        img
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.data[y * self.width + x] == 1
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: bool) {
        self.data[y * self.width + x] = v as u8;
    }

    pub fn count_ones(&self) -> usize {
        self.data.iter().filter(|&&v| v == 1).count()
    }

    pub fn complement(&self) -> BinaryImage {
        BinaryImage {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| 1 - v).collect(),
        }
    }

    /// Ink → 0, background → 255.
    pub fn to_gray(&self) -> GrayImage {
        GrayImage {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| if v == 1 { 0 } else { 255 }).collect(),
        }
    }
}
