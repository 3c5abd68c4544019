//! PSNR, single-scale SSIM, and detail-sparsity statistics.

use crate::error::{Error, Result};
use crate::plane::Plane;
use crate::raster::RasterImage;

/// PSNR in dB over all samples, peak 255. Returns +inf when the images are
/// identical.
pub fn psnr(a: &RasterImage, b: &RasterImage) -> Result<f64> {
    if a.width() != b.width() || a.height() != b.height() || a.channels() != b.channels() {
        return Err(Error::DimensionMismatch(
            "psnr inputs differ in shape".into(),
        ));
    }
    let mse: f64 = a
        .samples()
        .iter()
        .zip(b.samples())
        .map(|(&x, &y)| (x - y) * (x - y))
        .sum::<f64>()
        / a.samples().len() as f64;
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (255.0 * 255.0 / mse).log10())
}

const SSIM_WINDOW: usize = 11;
const SSIM_SIGMA: f64 = 1.5;
const SSIM_K1: f64 = 0.01;
const SSIM_K2: f64 = 0.03;
const SSIM_L: f64 = 255.0;

fn gaussian_window() -> Vec<f64> {
    let half = (SSIM_WINDOW / 2) as isize;
    let mut w = Vec::with_capacity(SSIM_WINDOW * SSIM_WINDOW);
    let mut sum = 0.0;
    for y in -half..=half {
        for x in -half..=half {
            let v = (-((x * x + y * y) as f64) / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp();
            w.push(v);
            sum += v;
        }
    }
    for v in &mut w {
        *v /= sum;
    }
    w
}

/// Mean local SSIM over valid (fully interior) 11x11 window positions,
/// Gaussian-weighted with sigma 1.5.
pub fn ssim(a: &Plane, b: &Plane) -> Result<f64> {
    if !a.same_size(b) {
        return Err(Error::DimensionMismatch(
            "ssim inputs differ in size".into(),
        ));
    }
    if a.width() < SSIM_WINDOW || a.height() < SSIM_WINDOW {
        return Err(Error::ImageTooSmall {
            width: a.width(),
            height: a.height(),
            detail: format!("ssim needs at least {SSIM_WINDOW}x{SSIM_WINDOW}"),
        });
    }
    let window = gaussian_window();
    let c1 = (SSIM_K1 * SSIM_L) * (SSIM_K1 * SSIM_L);
    let c2 = (SSIM_K2 * SSIM_L) * (SSIM_K2 * SSIM_L);
    let mut total = 0.0;
    let mut count = 0usize;
    for wy in 0..=a.height() - SSIM_WINDOW {
        for wx in 0..=a.width() - SSIM_WINDOW {
            let mut mu_a = 0.0;
            let mut mu_b = 0.0;
            let mut aa = 0.0;
            let mut bb = 0.0;
            let mut ab = 0.0;
            let mut k = 0;
            for dy in 0..SSIM_WINDOW {
                for dx in 0..SSIM_WINDOW {
                    let w = window[k];
                    k += 1;
                    let va = a.get(wx + dx, wy + dy);
                    let vb = b.get(wx + dx, wy + dy);
                    mu_a += w * va;
                    mu_b += w * vb;
                    aa += w * va * va;
                    bb += w * vb * vb;
                    ab += w * va * vb;
                }
            }
            let var_a = aa - mu_a * mu_a;
            let var_b = bb - mu_b * mu_b;
            let cov = ab - mu_a * mu_b;
            let score = ((2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2))
                / ((mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2));
            total += score;
            count += 1;
        }
    }
    Ok(total / count as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SparsityMode {
    /// Detail is strictly positive; magnitude is |log2(detail)|.
    Multiplicative,
    /// Detail is signed; magnitude is |detail| / (max - min), or raw |detail|
    /// when the plane is constant.
    Additive,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SparsityStats {
    pub l1_mean: f64,
    pub near_zero_fraction: f64,
    pub threshold: f64,
}

pub fn sparsity_stats(detail: &Plane, mode: SparsityMode, threshold: f64) -> Result<SparsityStats> {
    let magnitudes: Vec<f64> = match mode {
        SparsityMode::Multiplicative => {
            if detail.samples().iter().any(|&v| !(v > 0.0)) {
                return Err(Error::InvalidParameter(
                    "multiplicative sparsity needs strictly positive detail".into(),
                ));
            }
            detail.samples().iter().map(|&v| v.log2().abs()).collect()
        }
        SparsityMode::Additive => {
            let (lo, hi) = detail.min_max();
            let span = hi - lo;
            if span > 0.0 {
                detail.samples().iter().map(|&v| v.abs() / span).collect()
            } else {
                detail.samples().iter().map(|&v| v.abs()).collect()
            }
        }
    };
    let n = magnitudes.len() as f64;
    let l1_mean = magnitudes.iter().sum::<f64>() / n;
    let near_zero = magnitudes.iter().filter(|&&m| m < threshold).count() as f64 / n;
    Ok(SparsityStats {
        l1_mean,
        near_zero_fraction: near_zero,
        threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{natural_plane, noise_plane};

    fn as_image(p: &Plane) -> RasterImage {
        RasterImage::from_plane(p).unwrap()
    }

    #[test]
    fn psnr_identical_is_inf() {
        let a = as_image(&noise_plane(8, 8, 1));
        assert!(psnr(&a, &a).unwrap().is_infinite());
    }

    #[test]
    fn psnr_unit_difference() {
        let a = as_image(&Plane::filled(8, 8, 100.0));
        let b = as_image(&Plane::filled(8, 8, 101.0));
        let got = psnr(&a, &b).unwrap();
        assert!((got - 20.0 * 255f64.log10()).abs() < 1e-3);
    }

    #[test]
    fn psnr_full_range_is_zero() {
        let a = as_image(&Plane::filled(4, 4, 0.0));
        let b = as_image(&Plane::filled(4, 4, 255.0));
        assert!(psnr(&a, &b).unwrap().abs() < 1e-12);
    }

    #[test]
    fn psnr_symmetric() {
        let a = as_image(&noise_plane(8, 8, 2));
        let b = as_image(&noise_plane(8, 8, 3));
        assert_eq!(psnr(&a, &b).unwrap(), psnr(&b, &a).unwrap());
    }

    #[test]
    fn ssim_self_is_one() {
        let p = natural_plane(24, 24, 4);
        assert!((ssim(&p, &p).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ssim_constant_pair_is_one() {
        let p = Plane::filled(16, 16, 128.0);
        assert!((ssim(&p, &p.clone()).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ssim_mean_shift_penalized() {
        let p = natural_plane(24, 24, 5);
        let shifted = p.map(|v| (v + 20.0).min(255.0));
        let score = ssim(&p, &shifted).unwrap();
        assert!(score < 1.0);
    }

    #[test]
    fn ssim_symmetric() {
        let a = natural_plane(20, 20, 6);
        let b = natural_plane(20, 20, 7);
        assert!((ssim(&a, &b).unwrap() - ssim(&b, &a).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn ssim_rejects_small_planes() {
        let p = Plane::filled(8, 8, 1.0);
        assert!(ssim(&p, &p.clone()).is_err());
    }

    #[test]
    fn sparsity_identity_detail() {
        let d = Plane::filled(8, 8, 1.0);
        let s = sparsity_stats(&d, SparsityMode::Multiplicative, 0.01).unwrap();
        assert_eq!(s.l1_mean, 0.0);
        assert_eq!(s.near_zero_fraction, 1.0);
    }

    #[test]
    fn sparsity_zero_additive() {
        let d = Plane::zeros(8, 8);
        let s = sparsity_stats(&d, SparsityMode::Additive, 0.01).unwrap();
        assert_eq!(s.near_zero_fraction, 1.0);
    }

    #[test]
    fn sparsity_half_and_half() {
        let mut samples = vec![1.0; 32];
        samples.extend(vec![2.0; 32]);
        let d = Plane::new(8, 8, samples).unwrap();
        let s = sparsity_stats(&d, SparsityMode::Multiplicative, 0.01).unwrap();
        assert_eq!(s.near_zero_fraction, 0.5);
        assert_eq!(s.l1_mean, 0.5);
    }

    #[test]
    fn sparsity_monotone_in_threshold() {
        let d = natural_plane(16, 16, 8).map(|v| v / 255.0 + 0.5);
        let loose = sparsity_stats(&d, SparsityMode::Multiplicative, 0.5).unwrap();
        let strict = sparsity_stats(&d, SparsityMode::Multiplicative, 0.05).unwrap();
        assert!(strict.near_zero_fraction <= loose.near_zero_fraction);
    }

    #[test]
    fn sparsity_multiplicative_rejects_nonpositive() {
        let d = Plane::new(2, 1, vec![1.0, -1.0]).unwrap();
        assert!(sparsity_stats(&d, SparsityMode::Multiplicative, 0.01).is_err());
    }
}
