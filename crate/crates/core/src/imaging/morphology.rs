//! Binary erosion and dilation with rectangular structuring elements.
//!
//! The element covers offsets `-anchor_x..width-anchor_x` horizontally (and
//! likewise vertically). Erosion keeps a pixel when every covered position is
//! in bounds and set; dilation is its reflection-dual and sets a pixel when the
//! reflected window hits any set pixel. Both run in O(1) per pixel on a
//! summed-area table.

use super::{BinaryImage, ImagingError};
use crate::geometry::Orientation;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StructuringElement {
    width: usize,
    height: usize,
    anchor_x: usize,
    anchor_y: usize,
}

impl StructuringElement {
    /// All-ones rectangle anchored at its center (`width / 2`, `height / 2`).
    pub fn new(width: usize, height: usize) -> Result<Self, ImagingError> {
        if width == 0 || height == 0 {
            return Err(ImagingError::EmptyElement);
        }
        Ok(StructuringElement {
            width,
            height,
            anchor_x: width / 2,
            anchor_y: height / 2,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn anchor(&self) -> (usize, usize) {
        (self.anchor_x, self.anchor_y)
    }

    /// Point reflection through the anchor. Identity for odd sizes.
    pub fn reflect(&self) -> Self {
        StructuringElement {
            anchor_x: self.width - 1 - self.anchor_x,
            anchor_y: self.height - 1 - self.anchor_y,
            ..*self
        }
    }
}

struct SummedArea {
    width: usize,
    sums: Vec<u32>,
}

impl SummedArea {
    fn new(img: &BinaryImage) -> Self {
        let (w, h) = (img.width(), img.height());
        let stride = w + 1;
        let mut sums = vec![0u32; stride * (h + 1)];
        for y in 0..h {
            let mut row = 0u32;
            for x in 0..w {
                row += img.data()[y * w + x] as u32;
                sums[(y + 1) * stride + x + 1] = sums[y * stride + x + 1] + row;
            }
        }
        SummedArea { width: stride, sums }
    }

    /// Sum over the half-open box `[x0, x1) x [y0, y1)`.
    fn sum(&self, x0: usize, y0: usize, x1: usize, y1: usize) -> u32 {
        let s = |x: usize, y: usize| self.sums[y * self.width + x];
        s(x1, y1) + s(x0, y0) - s(x0, y1) - s(x1, y0)
    }
}

pub fn erode(img: &BinaryImage, se: &StructuringElement) -> BinaryImage {
    let (w, h) = (img.width(), img.height());
    let mut out = BinaryImage::zeros(w, h);
    if se.width > w || se.height > h {
        return out;
    }
    let sat = SummedArea::new(img);
    let full = (se.width * se.height) as u32;
    for y in se.anchor_y..h + se.anchor_y + 1 - se.height {
        let y0 = y - se.anchor_y;
        for x in se.anchor_x..w + se.anchor_x + 1 - se.width {
            let x0 = x - se.anchor_x;
            if sat.sum(x0, y0, x0 + se.width, y0 + se.height) == full {
                out.set(x, y, true);
            }
        }
    }
    out
}

pub fn dilate(img: &BinaryImage, se: &StructuringElement) -> BinaryImage {
    let (w, h) = (img.width(), img.height());
    let mut out = BinaryImage::zeros(w, h);
    let sat = SummedArea::new(img);
    // reflected window: offsets -(width-1-anchor_x) ..= anchor_x
    let (left, right) = (se.width - 1 - se.anchor_x, se.anchor_x);
    let (up, down) = (se.height - 1 - se.anchor_y, se.anchor_y);
    for y in 0..h {
        let y0 = y.saturating_sub(up);
        let y1 = (y + down + 1).min(h);
        for x in 0..w {
            let x0 = x.saturating_sub(left);
            let x1 = (x + right + 1).min(w);
            if sat.sum(x0, y0, x1, y1) > 0 {
                out.set(x, y, true);
            }
        }
    }
    out
}

/// Length of the line-extraction element: the relevant dimension over `divisor`.
pub fn line_element_length(
    img: &BinaryImage,
    orientation: Orientation,
    divisor: usize,
) -> Result<usize, ImagingError> {
    let dimension = match orientation {
        Orientation::Vertical => img.height(),
        _ => img.width(),
    };
    let length = dimension / divisor.max(1);
    if length < 2 {
        return Err(ImagingError::ElementTooSmall {
            length,
            dimension,
            divisor,
        });
    }
    Ok(length)
}

/// Opening with a 1-pixel-thick line element: only runs at least
/// `dimension / divisor` long along `orientation` survive.
pub fn extract_line_mask(
    img: &BinaryImage,
    orientation: Orientation,
    divisor: usize,
) -> Result<BinaryImage, ImagingError> {
    let length = line_element_length(img, orientation, divisor)?;
    let se = match orientation {
        Orientation::Vertical => StructuringElement::new(1, length)?,
        _ => StructuringElement::new(length, 1)?,
    };
    Ok(dilate(&erode(img, &se), &se))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn from_rows(rows: &[&str]) -> BinaryImage {
        let h = rows.len();
        let w = rows[0].len();
        BinaryImage::from_fn(w, h, |x, y| rows[y].as_bytes()[x] == b'#')
    }

    fn rows(img: &BinaryImage) -> Vec<String> {
        (0..img.height())
            .map(|y| (0..img.width()).map(|x| if img.get(x, y) { '#' } else { '.' }).collect())
            .collect()
    }

    /// Keeps runs of at least `min` set pixels along each row (or column).
    fn run_length_filter(img: &BinaryImage, min: usize, vertical: bool) -> BinaryImage {
        let (major, minor) = if vertical {
            (img.height(), img.width())
        } else {
            (img.width(), img.height())
        };
        let at = |m: usize, n: usize| if vertical { img.get(n, m) } else { img.get(m, n) };
        let mut out = BinaryImage::zeros(img.width(), img.height());
        for n in 0..minor {
            let mut m = 0;
            while m < major {
                if !at(m, n) {
                    m += 1;
                    continue;
                }
                let start = m;
                while m < major && at(m, n) {
                    m += 1;
                }
                if m - start >= min {
                    for k in start..m {
                        if vertical {
                            out.set(n, k, true)
                        } else {
                            out.set(k, n, true)
                        }
                    }
                }
            }
        }
        out
    }

    fn direct_erode(img: &BinaryImage, se: &StructuringElement) -> BinaryImage {
        let (ax, ay) = se.anchor();
        BinaryImage::from_fn(img.width(), img.height(), |x, y| {
            (0..se.height()).all(|j| {
                (0..se.width()).all(|i| {
                    let xx = x as isize + i as isize - ax as isize;
                    let yy = y as isize + j as isize - ay as isize;
                    xx >= 0
                        && yy >= 0
                        && (xx as usize) < img.width()
                        && (yy as usize) < img.height()
                        && img.get(xx as usize, yy as usize)
                })
            })
        })
    }

    #[test]
    fn dilate_single_pixel_horizontally() {
        let img = from_rows(&[".....", "..#..", "....."]);
        let se = StructuringElement::new(3, 1).unwrap();
        assert_eq!(rows(&dilate(&img, &se)), [".....", ".###.", "....."]);
    }

    #[test]
    fn erode_block_to_center() {
        let img = from_rows(&[".....", ".###.", ".###.", ".###.", "....."]);
        let se = StructuringElement::new(3, 3).unwrap();
        let out = erode(&img, &se);
        assert_eq!(out, direct_erode(&img, &se));
        assert_eq!(rows(&out), [".....", ".....", "..#..", ".....", "....."]);
    }

    #[test]
    fn erode_needs_window_in_bounds() {
        let img = from_rows(&["###", "###", "###"]);
        let se = StructuringElement::new(3, 3).unwrap();
        assert_eq!(rows(&erode(&img, &se)), ["...", ".#.", "..."]);
    }

    #[test]
    fn oversized_element_erodes_to_nothing() {
        let img = from_rows(&["###", "###"]);
        let se = StructuringElement::new(4, 1).unwrap();
        assert_eq!(erode(&img, &se).count_ones(), 0);
    }

    #[test]
    fn zero_sized_element_rejected() {
        assert!(StructuringElement::new(0, 3).is_err());
    }

    #[test]
    fn line_mask_keeps_long_rows() {
        // 100 px wide: divisor 40 gives a 2 px element, which one-pixel-wide
        // strokes cannot contain.
        let mut img = BinaryImage::zeros(100, 30);
        for x in 0..100 {
            img.set(x, 12, true);
        }
        for (x, y) in [(5, 3), (30, 20), (31, 25), (77, 7), (90, 27)] {
            for dy in 0..3 {
                img.set(x, y + dy - 1, true);
            }
        }
        let mask = extract_line_mask(&img, Orientation::Horizontal, 40).unwrap();
        assert_eq!(mask, run_length_filter(&img, 2, false));
        assert_eq!(mask.count_ones(), 100);
        assert!((0..100).all(|x| mask.get(x, 12)));
    }

    #[test]
    fn line_mask_drops_blobs_shorter_than_element() {
        // divisor 4 on 100 px: element of 25 removes blobs up to 24 wide.
        let mut img = BinaryImage::zeros(100, 40);
        for x in 0..100 {
            img.set(x, 20, true);
        }
        for (x0, w, y0) in [(2usize, 24usize, 3usize), (40, 10, 30), (70, 20, 34)] {
            for y in y0..y0 + 4 {
                for x in x0..x0 + w {
                    img.set(x, y, true);
                }
            }
        }
        let mask = extract_line_mask(&img, Orientation::Horizontal, 4).unwrap();
        assert_eq!(mask, run_length_filter(&img, 25, false));
        assert_eq!(mask.count_ones(), 100);
    }

    #[test]
    fn vertical_line_mask() {
        let mut img = BinaryImage::zeros(50, 80);
        for y in 0..80 {
            img.set(17, y, true);
        }
        for x in 0..12 {
            img.set(x + 30, 40, true);
        }
        let mask = extract_line_mask(&img, Orientation::Vertical, 40).unwrap();
        assert_eq!(mask, run_length_filter(&img, 2, true));
        assert_eq!(mask.count_ones(), 80);
        assert!((0..80).all(|y| mask.get(17, y)));
    }

    #[test]
    fn blank_mask() {
        let img = BinaryImage::zeros(120, 120);
        assert_eq!(extract_line_mask(&img, Orientation::Horizontal, 40).unwrap().count_ones(), 0);
    }

    #[test]
    fn tiny_image_rejected() {
        let img = BinaryImage::zeros(60, 60);
        assert!(matches!(
            extract_line_mask(&img, Orientation::Horizontal, 40),
            Err(ImagingError::ElementTooSmall { length: 1, .. })
        ));
    }

    fn random_image() -> impl Strategy<Value = BinaryImage> {
        proptest::collection::vec(any::<bool>(), 32 * 32)
            .prop_map(|v| BinaryImage::from_fn(32, 32, |x, y| v[y * 32 + x]))
    }

    proptest! {
        #[test]
        fn erode_matches_direct_scan(img in random_image(), w in 1usize..6, h in 1usize..6) {
            let se = StructuringElement::new(w, h).unwrap();
            prop_assert_eq!(erode(&img, &se), direct_erode(&img, &se));
        }

        #[test]
        fn dilate_erode_duality(img in random_image(), w in 1usize..6, h in 1usize..6) {
            let se = StructuringElement::new(w, h).unwrap();
            let lhs = dilate(&img, &se);
            let rhs = erode(&img.complement(), &se.reflect()).complement();
            // compare where every window is in bounds
            for y in 5..27 {
                for x in 5..27 {
                    prop_assert_eq!(lhs.get(x, y), rhs.get(x, y));
                }
            }
        }

        #[test]
        fn closing_is_extensive(img in random_image(), w in 1usize..6, h in 1usize..6) {
            let se = StructuringElement::new(w, h).unwrap();
            let closed = erode(&dilate(&img, &se), &se);
            for y in 5..27 {
                for x in 5..27 {
                    if img.get(x, y) {
                        prop_assert!(closed.get(x, y));
                    }
                }
            }
        }

        #[test]
        fn opening_equals_run_length_filter(img in random_image(), len in 2usize..8) {
            let se = StructuringElement::new(len, 1).unwrap();
            prop_assert_eq!(dilate(&erode(&img, &se), &se), run_length_filter(&img, len, false));
        }
    }
}
