use std::path::Path;

use image::{DynamicImage, ImageFormat, ImageReader};

use super::{GrayImage, ImagingError};

/// Integer BT.601 luma, rounded.
#[inline]
pub fn luma(r: u8, g: u8, b: u8) -> u8 {
    ((299 * r as u32 + 587 * g as u32 + 114 * b as u32 + 500) / 1000) as u8
}

/// Reads a PNG or TIFF file as 8-bit grayscale. Colour input goes through
/// [`luma`]; alpha is ignored.
pub fn load_gray(path: impl AsRef<Path>) -> Result<GrayImage, ImagingError> {
    let reader = ImageReader::open(path.as_ref())?.with_guessed_format()?;
    match reader.format() {
        Some(ImageFormat::Png) | Some(ImageFormat::Tiff) => {}
        other => {
            return Err(ImagingError::Unsupported(format!(
                "{}: format {other:?} (PNG or TIFF expected)",
                path.as_ref().display()
            )))
        }
    }
    let (w, h, data) = match reader.decode()? {
        DynamicImage::ImageLuma8(img) => {
            let (w, h) = img.dimensions();
            (w, h, img.into_raw())
        }
        DynamicImage::ImageLumaA8(img) => {
            let (w, h) = img.dimensions();
            (w, h, img.pixels().map(|p| p.0[0]).collect())
        }
        DynamicImage::ImageRgb8(img) => {
            let (w, h) = img.dimensions();
            (w, h, img.pixels().map(|p| luma(p.0[0], p.0[1], p.0[2])).collect())
        }
        DynamicImage::ImageRgba8(img) => {
            let (w, h) = img.dimensions();
            (w, h, img.pixels().map(|p| luma(p.0[0], p.0[1], p.0[2])).collect())
        }
        other => {
            return Err(ImagingError::Unsupported(format!(
                "{}: pixel layout {:?} (8-bit grey or colour expected)",
                path.as_ref().display(),
                other.color()
            )))
        }
    };
    GrayImage::new(w as usize, h as usize, data)
}

pub fn save_gray(img: &GrayImage, path: impl AsRef<Path>) -> Result<(), ImagingError> {
    let buf = image::GrayImage::from_raw(img.width() as u32, img.height() as u32, img.data().to_vec())
        .ok_or(ImagingError::BufferSize {
            expected: img.width() * img.height(),
            actual: img.data().len(),
        })?;
    buf.save_with_format(path, ImageFormat::Png)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn luma_weights() {
        assert_eq!(luma(255, 255, 255), 255);
        assert_eq!(luma(0, 0, 0), 0);
        assert_eq!(luma(255, 0, 0), 76);
        assert_eq!(luma(0, 255, 0), 150);
        assert_eq!(luma(0, 0, 255), 29);
    }

    #[test]
    fn png_round_trip_and_colour_conversion() {
        let dir = tempfile::tempdir().unwrap();
        let img = GrayImage::from_fn(7, 5, |x, y| (x * 30 + y) as u8);
        let p = dir.path().join("g.png");
        save_gray(&img, &p).unwrap();
        assert_eq!(load_gray(&p).unwrap(), img);

        let rgb = image::RgbImage::from_fn(3, 2, |x, _| image::Rgb([x as u8 * 100, 50, 10]));
        let p = dir.path().join("c.tiff");
        rgb.save_with_format(&p, ImageFormat::Tiff).unwrap();
        let g = load_gray(&p).unwrap();
        assert_eq!(g.get(2, 1), luma(200, 50, 10));
    }

    #[test]
    fn other_formats_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.txt");
        std::fs::write(&p, b"not an image").unwrap();
        assert!(load_gray(&p).is_err());
    }
}
