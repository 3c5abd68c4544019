//! End-to-end multiplicative detail extraction (luminance -> vector field
//! -> solve -> exponential remap) and detail-based enhancement.

use std::path::Path;

use crate::color::{luminance, rgb_to_ycbcr, ycbcr_to_rgb};
use crate::error::{Error, Result};
use crate::plane::Plane;
use crate::raster::RasterImage;
use crate::solver::{
    build_vector_field, fidelity_weights, solve_dense, solve_fast, SolverParams,
};

/// Strictly positive multiplicative detail layer, 2^(log-domain solution).
/// The multiplicative identity is 1; a constant image yields all ones.
#[derive(Debug, Clone, PartialEq)]
pub struct DetailLayer {
    values: Plane,
    params: SolverParams,
}

impl DetailLayer {
    /// Wraps an externally produced plane (e.g. loaded from DPLN),
    /// enforcing strict positivity.
    pub fn from_plane(values: Plane, params: SolverParams) -> Result<Self> {
        if values.samples().iter().any(|&v| !(v > 0.0)) {
            return Err(Error::InvariantBreach(
                "detail layer entry not strictly positive".into(),
            ));
        }
        Ok(Self { values, params })
    }

    fn from_log(log_plane: &Plane, params: SolverParams) -> Self {
        Self {
            values: log_plane.map(f64::exp2),
            params,
        }
    }

    pub fn values(&self) -> &Plane {
        &self.values
    }

    pub fn params(&self) -> &SolverParams {
        &self.params
    }

    pub fn width(&self) -> usize {
        self.values.width()
    }

    pub fn height(&self) -> usize {
        self.values.height()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnhancementConfig {
    /// Log-domain detail multiplier, >= 0; the layer is applied as D^gain.
    pub gain: f64,
}

impl Default for EnhancementConfig {
    fn default() -> Self {
        Self { gain: 1.0 }
    }
}

fn check_extractable(image: &RasterImage) -> Result<()> {
    if image.width() < 2 || image.height() < 2 {
        return Err(Error::ImageTooSmall {
            width: image.width(),
            height: image.height(),
            detail: "detail extraction needs at least 2x2".into(),
        });
    }
    Ok(())
}

/// Extracts the multiplicative detail layer with the fast separable solver.
pub fn extract_detail(image: &RasterImage, params: &SolverParams) -> Result<DetailLayer> {
    check_extractable(image)?;
    params.validate()?;
    let y = luminance(image);
    let field = build_vector_field(&y, params.alpha)?;
    let weights = fidelity_weights(&field, params.gamma, params.epsilon);
    let log_detail = solve_fast(&field, &weights, params)?;
    Ok(DetailLayer::from_log(&log_detail, *params))
}

/// Same pipeline through the dense reference solver. Capped by the dense
/// pixel limit; intended for validation.
pub fn extract_detail_exact(image: &RasterImage, params: &SolverParams) -> Result<DetailLayer> {
    check_extractable(image)?;
    params.validate()?;
    let y = luminance(image);
    let field = build_vector_field(&y, params.alpha)?;
    let weights = fidelity_weights(&field, params.gamma, params.epsilon);
    let log_detail = solve_dense(&field, &weights, params.lambda)?;
    Ok(DetailLayer::from_log(&log_detail, *params))
}

/// Multiplies luminance by detail^gain, clamps to [0, 255], and passes
/// chroma through unchanged.
pub fn enhance(
    image: &RasterImage,
    detail: &DetailLayer,
    config: &EnhancementConfig,
) -> Result<RasterImage> {
    if detail.width() != image.width() || detail.height() != image.height() {
        return Err(Error::DimensionMismatch(
            "detail layer size differs from image".into(),
        ));
    }
    if !(config.gain >= 0.0) {
        return Err(Error::InvalidParameter("gain must be >= 0".into()));
    }
    let apply = |y: &Plane| -> Plane {
        let mut out = y.clone();
        for j in 0..y.height() {
            for i in 0..y.width() {
                let d = detail.values.get(i, j).powf(config.gain);
                out.set(i, j, (y.get(i, j) * d).clamp(0.0, 255.0));
            }
        }
        out
    };
    if image.channels() == 1 {
        let y = image.channel_plane(0);
        RasterImage::from_plane(&apply(&y))
    } else {
        let (y, cb, cr) = rgb_to_ycbcr(image)?;
        ycbcr_to_rgb(&apply(&y), &cb, &cr)
    }
}

/// Multiplicative base layer: Y / detail, so base * detail reconstructs Y.
pub fn base_layer(image: &RasterImage, detail: &DetailLayer) -> Result<Plane> {
    if detail.width() != image.width() || detail.height() != image.height() {
        return Err(Error::DimensionMismatch(
            "detail layer size differs from image".into(),
        ));
    }
    let y = luminance(image);
    let mut out = Plane::zeros(y.width(), y.height());
    for j in 0..y.height() {
        for i in 0..y.width() {
            out.set(i, j, y.get(i, j) / detail.values.get(i, j));
        }
    }
    Ok(out)
}

/// Writes a detail layer as a normalized 16-bit PNG plus a ".range" sidecar
/// holding "min max" so the affine map is invertible.
pub fn save_detail_visualization(detail: &DetailLayer, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let (lo, hi) = detail.values.min_max();
    let span = if hi > lo { hi - lo } else { 1.0 };
    let pixels: Vec<u16> = detail
        .values
        .samples()
        .iter()
        .map(|&v| ((v - lo) / span * 65535.0).round() as u16)
        .collect();
    let img = image::ImageBuffer::<image::Luma<u16>, Vec<u16>>::from_raw(
        detail.width() as u32,
        detail.height() as u32,
        pixels,
    )
    .expect("buffer sized by construction");
    img.save_with_format(path, image::ImageFormat::Png)
        .map_err(|e| Error::WriteFailed {
            path: path.into(),
            source: std::io::Error::other(e.to_string()),
        })?;
    let range_path = path.with_extension("range");
    std::fs::write(&range_path, format!("{lo} {hi}\n")).map_err(|source| Error::WriteFailed {
        path: range_path,
        source,
    })
}
