use std::path::Path;

use image::{DynamicImage, ImageFormat, ImageReader};

use crate::error::{Error, Result};
use crate::plane::Plane;

/// An interleaved raster with 1 or 3 channels and samples in [0, 255].
#[derive(Debug, Clone, PartialEq)]
pub struct RasterImage {
    width: usize,
    height: usize,
    channels: usize,
    samples: Vec<f64>,
}

impl RasterImage {
    pub fn new(width: usize, height: usize, channels: usize, samples: Vec<f64>) -> Result<Self> {
        if channels != 1 && channels != 3 {
            return Err(Error::ChannelMismatch {
                expected: 3,
                actual: channels,
            });
        }
        if samples.len() != width * height * channels {
            return Err(Error::DimensionMismatch(format!(
                "image {}x{}x{} needs {} samples, got {}",
                width,
                height,
                channels,
                width * height * channels,
                samples.len()
            )));
        }
        if samples.iter().any(|&s| !s.is_finite() || !(0.0..=255.0).contains(&s)) {
            return Err(Error::InvariantBreach(
                "image sample outside [0, 255]".into(),
            ));
        }
        Ok(Self {
            width,
            height,
            channels,
            samples,
        })
    }

    pub fn from_plane(plane: &Plane) -> Result<Self> {
        let samples = plane
            .samples()
            .iter()
            .map(|&s| s.clamp(0.0, 255.0))
            .collect();
        Self::new(plane.width(), plane.height(), 1, samples)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    #[inline]
    pub fn sample(&self, x: usize, y: usize, c: usize) -> f64 {
        self.samples[(y * self.width + x) * self.channels + c]
    }

    /// Extracts one channel as a plane.
    pub fn channel_plane(&self, c: usize) -> Plane {
        let mut out = Plane::zeros(self.width, self.height);
        for y in 0..self.height {
            for x in 0..self.width {
                out.set(x, y, self.sample(x, y, c));
            }
        }
        out
    }
}

/// Loads an 8/16-bit PNG or binary PPM/PGM, scaling samples to [0, 255].
/// 16-bit inputs are scaled by 255/65535.
pub fn load_image(path: impl AsRef<Path>) -> Result<RasterImage> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|source| Error::Unreadable {
        path: path.into(),
        source,
    })?;
    let reader = ImageReader::new(std::io::Cursor::new(&bytes))
        .with_guessed_format()
        .map_err(|source| Error::Unreadable {
            path: path.into(),
            source,
        })?;
    match reader.format() {
        Some(ImageFormat::Png | ImageFormat::Pnm) => {}
        _ => {
            return Err(Error::UnsupportedFormat { path: path.into() });
        }
    }
    let decoded = reader.decode().map_err(|e| Error::CorruptData {
        path: path.into(),
        detail: e.to_string(),
    })?;
    let width = decoded.width() as usize;
    let height = decoded.height() as usize;
    let (channels, samples): (usize, Vec<f64>) = match decoded {
        DynamicImage::ImageLuma8(img) => (1, img.into_raw().iter().map(|&v| v as f64).collect()),
        DynamicImage::ImageLuma16(img) => (
            1,
            img.into_raw()
                .iter()
                .map(|&v| v as f64 * 255.0 / 65535.0)
                .collect(),
        ),
        DynamicImage::ImageRgb8(img) => (3, img.into_raw().iter().map(|&v| v as f64).collect()),
        DynamicImage::ImageRgb16(img) => (
            3,
            img.into_raw()
                .iter()
                .map(|&v| v as f64 * 255.0 / 65535.0)
                .collect(),
        ),
        other => {
            // Alpha and exotic layouts collapse to RGB8.
            let img = other.into_rgb8();
            (3, img.into_raw().iter().map(|&v| v as f64).collect())
        }
    };
    RasterImage::new(width, height, channels, samples)
}

fn round_half_away(v: f64) -> f64 {
    if v >= 0.0 {
        (v + 0.5).floor()
    } else {
        (v - 0.5).ceil()
    }
}

/// Writes an 8-bit PNG, rounding half away from zero and clamping to [0, 255].
pub fn save_image(image: &RasterImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let quantized: Vec<u8> = image
        .samples
        .iter()
        .map(|&s| round_half_away(s).clamp(0.0, 255.0) as u8)
        .collect();
    let w = image.width as u32;
    let h = image.height as u32;
    let result = match image.channels {
        1 => image::GrayImage::from_raw(w, h, quantized)
            .expect("buffer sized by construction")
            .save_with_format(path, ImageFormat::Png),
        _ => image::RgbImage::from_raw(w, h, quantized)
            .expect("buffer sized by construction")
            .save_with_format(path, ImageFormat::Png),
    };
    result.map_err(|e| Error::WriteFailed {
        path: path.into(),
        source: std::io::Error::other(e.to_string()),
    })
}

/// Crops from the top-left so both dimensions are multiples of `factor`.
pub fn mod_crop(image: &RasterImage, factor: usize) -> Result<RasterImage> {
    if factor == 0 {
        return Err(Error::InvalidParameter("mod_crop factor must be >= 1".into()));
    }
    if image.width < factor || image.height < factor {
        return Err(Error::ImageTooSmall {
            width: image.width,
            height: image.height,
            detail: format!("smaller than crop factor {factor}"),
        });
    }
    let new_w = image.width - image.width % factor;
    let new_h = image.height - image.height % factor;
    if new_w == image.width && new_h == image.height {
        return Ok(image.clone());
    }
    let c = image.channels;
    let mut samples = Vec::with_capacity(new_w * new_h * c);
    for y in 0..new_h {
        let row_start = y * image.width * c;
        samples.extend_from_slice(&image.samples[row_start..row_start + new_w * c]);
    }
    RasterImage::new(new_w, new_h, c, samples)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gray(width: usize, height: usize, value: f64) -> RasterImage {
        RasterImage::new(width, height, 1, vec![value; width * height]).unwrap()
    }

    #[test]
    fn mod_crop_floors_to_multiple() {
        let img = gray(9, 7, 10.0);
        let cropped = mod_crop(&img, 4).unwrap();
        assert_eq!((cropped.width(), cropped.height()), (8, 4));
    }

    #[test]
    fn mod_crop_identity_when_divisible() {
        let img = gray(8, 8, 10.0);
        let cropped = mod_crop(&img, 4).unwrap();
        assert_eq!((cropped.width(), cropped.height()), (8, 8));
    }

    #[test]
    fn mod_crop_rejects_small_image() {
        assert!(mod_crop(&gray(3, 3, 0.0), 4).is_err());
    }

    #[test]
    fn save_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rt.png");
        let img = RasterImage::new(2, 2, 3, vec![255.0; 12]).unwrap();
        save_image(&img, &path).unwrap();
        let loaded = load_image(&path).unwrap();
        assert_eq!(loaded, img);
    }

    #[test]
    fn save_rounds_and_clamps() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("q.png");
        let img = RasterImage::new(2, 1, 1, vec![254.7, 127.5]).unwrap();
        save_image(&img, &path).unwrap();
        let loaded = load_image(&path).unwrap();
        assert_eq!(loaded.samples(), &[255.0, 128.0]);
        // values above 255 are clamped at the save boundary
        assert_eq!(round_half_away(255.7).clamp(0.0, 255.0), 255.0);
    }

    #[test]
    fn load_truncated_png_is_corrupt_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trunc.png");
        let full = dir.path().join("full.png");
        save_image(&gray(8, 8, 100.0), &full).unwrap();
        let bytes = std::fs::read(&full).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() / 2]).unwrap();
        match load_image(&path) {
            Err(Error::CorruptData { .. }) => {}
            other => panic!("expected corrupt-data error, got {other:?}"),
        }
    }

    #[test]
    fn load_missing_file_is_unreadable() {
        match load_image("/nonexistent/nope.png") {
            Err(Error::Unreadable { .. }) => {}
            other => panic!("expected unreadable error, got {other:?}"),
        }
    }

    #[test]
    fn load_pgm_single_black_pixel() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.pgm");
        std::fs::write(&path, b"P5\n1 1\n255\n\x00").unwrap();
        let img = load_image(&path).unwrap();
        assert_eq!((img.width(), img.height(), img.channels()), (1, 1, 1));
        assert_eq!(img.samples(), &[0.0]);
    }

    #[test]
    fn load_ppm_rgb() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.ppm");
        std::fs::write(&path, b"P6\n2 1\n255\n\xff\x00\x00\x00\xff\x00").unwrap();
        let img = load_image(&path).unwrap();
        assert_eq!(img.channels(), 3);
        assert_eq!(img.samples(), &[255.0, 0.0, 0.0, 0.0, 255.0, 0.0]);
    }

    #[test]
    fn load_16bit_png_scales() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("deep.png");
        let img16 =
            image::ImageBuffer::<image::Luma<u16>, Vec<u16>>::from_raw(1, 1, vec![65535]).unwrap();
        img16.save_with_format(&path, ImageFormat::Png).unwrap();
        let img = load_image(&path).unwrap();
        assert!((img.samples()[0] - 255.0).abs() < 1e-12);
    }

    #[test]
    fn unsupported_format_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.gif");
        std::fs::write(&path, b"GIF89a\x01\x00\x01\x00").unwrap();
        match load_image(&path) {
            Err(Error::UnsupportedFormat { .. }) => {}
            other => panic!("expected unsupported-format error, got {other:?}"),
        }
    }
}
