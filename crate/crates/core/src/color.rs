//! BT.601 studio-swing YCbCr conversion, the convention common SR evaluation
//! toolchains use for Y-channel processing.

use crate::error::{Error, Result};
use crate::plane::Plane;
use crate::raster::RasterImage;

/// Converts an RGB image to (Y, Cb, Cr) planes. Y lands in [16, 235] for
/// in-range RGB, chroma is centered at 128.
pub fn rgb_to_ycbcr(image: &RasterImage) -> Result<(Plane, Plane, Plane)> {
    if image.channels() != 3 {
        return Err(Error::ChannelMismatch {
            expected: 3,
            actual: image.channels(),
        });
    }
    let (w, h) = (image.width(), image.height());
    let mut y = Plane::zeros(w, h);
    let mut cb = Plane::zeros(w, h);
    let mut cr = Plane::zeros(w, h);
    for j in 0..h {
        for i in 0..w {
            let r = image.sample(i, j, 0);
            let g = image.sample(i, j, 1);
            let b = image.sample(i, j, 2);
            y.set(i, j, 16.0 + (65.481 * r + 128.553 * g + 24.966 * b) / 255.0);
            cb.set(i, j, 128.0 + (-37.797 * r - 74.203 * g + 112.0 * b) / 255.0);
            cr.set(i, j, 128.0 + (112.0 * r - 93.786 * g - 18.214 * b) / 255.0);
        }
    }
    Ok((y, cb, cr))
}

/// Exact algebraic inverse of [`rgb_to_ycbcr`], clamped to [0, 255].
pub fn ycbcr_to_rgb(y: &Plane, cb: &Plane, cr: &Plane) -> Result<RasterImage> {
    if !y.same_size(cb) || !y.same_size(cr) {
        return Err(Error::DimensionMismatch(
            "Y/Cb/Cr planes differ in size".into(),
        ));
    }
    let (w, h) = (y.width(), y.height());
    let mut samples = Vec::with_capacity(w * h * 3);
    for j in 0..h {
        for i in 0..w {
            let yv = (y.get(i, j) - 16.0) * (255.0 / 219.0);
            let cbv = cb.get(i, j) - 128.0;
            let crv = cr.get(i, j) - 128.0;
            let r = yv + (255.0 / 224.0) * 1.402 * crv;
            let g = yv
                - (255.0 / 224.0) * 1.772 * (0.114 / 0.587) * cbv
                - (255.0 / 224.0) * 1.402 * (0.299 / 0.587) * crv;
            let b = yv + (255.0 / 224.0) * 1.772 * cbv;
            samples.push(r.clamp(0.0, 255.0));
            samples.push(g.clamp(0.0, 255.0));
            samples.push(b.clamp(0.0, 255.0));
        }
    }
    RasterImage::new(w, h, 3, samples)
}

/// Luminance of an image: Y for RGB, the single channel for grayscale.
pub fn luminance(image: &RasterImage) -> Plane {
    if image.channels() == 1 {
        image.channel_plane(0)
    } else {
        rgb_to_ycbcr(image)
            .expect("3-channel checked")
            .0
    }
}

/// Replaces an image's luminance, keeping chroma (grayscale: the plane
/// itself, clamped).
pub fn with_luminance(image: &RasterImage, y: &Plane) -> Result<RasterImage> {
    if y.width() != image.width() || y.height() != image.height() {
        return Err(Error::DimensionMismatch(
            "luminance plane size differs from image".into(),
        ));
    }
    if image.channels() == 1 {
        RasterImage::from_plane(y)
    } else {
        let (_, cb, cr) = rgb_to_ycbcr(image)?;
        ycbcr_to_rgb(y, &cb, &cr)
    }
}
