//! Classical additive decompositions used for comparison: guided image
//! filtering and single-level WLS smoothing (detail = Y - base).

use crate::color::{luminance, rgb_to_ycbcr, ycbcr_to_rgb};
use crate::error::{Error, Result};
use crate::plane::Plane;
use crate::raster::RasterImage;
use crate::solver::{lambda_schedule, solve_line, DENSE_PIXEL_LIMIT};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineMethod {
    GuidedFilter,
    WlsSmooth,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GuidedFilterParams {
    pub radius: usize,
    pub eps: f64,
}

impl Default for GuidedFilterParams {
    fn default() -> Self {
        Self {
            radius: 2,
            eps: 0.3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WlsSmoothParams {
    pub lambda_s: f64,
    pub alpha_exp: f64,
}

impl Default for WlsSmoothParams {
    fn default() -> Self {
        Self {
            lambda_s: 1.0,
            alpha_exp: 1.2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BaselineParams {
    GuidedFilter(GuidedFilterParams),
    WlsSmooth(WlsSmoothParams),
}

/// Base + signed detail such that base + detail = Y exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct AdditiveDecomposition {
    pub base: Plane,
    pub detail: Plane,
    pub method: BaselineMethod,
    pub params: BaselineParams,
}

/// Box sums over windows clipped to the image bounds, normalized by the
/// actual count (shrinking windows at borders). Integral-image backed.
struct BoxFilter {
    integral: Vec<f64>,
    width: usize,
    height: usize,
    radius: usize,
}

impl BoxFilter {
    fn new(plane: &Plane, radius: usize) -> Self {
        let (w, h) = (plane.width(), plane.height());
        let stride = w + 1;
        let mut integral = vec![0.0; (w + 1) * (h + 1)];
        for y in 0..h {
            for x in 0..w {
                integral[(y + 1) * stride + (x + 1)] = plane.get(x, y)
                    + integral[y * stride + (x + 1)]
                    + integral[(y + 1) * stride + x]
                    - integral[y * stride + x];
            }
        }
        Self {
            integral,
            width: w,
            height: h,
            radius,
        }
    }

    fn mean(&self, x: usize, y: usize) -> f64 {
        let x0 = x.saturating_sub(self.radius);
        let y0 = y.saturating_sub(self.radius);
        let x1 = (x + self.radius + 1).min(self.width);
        let y1 = (y + self.radius + 1).min(self.height);
        let stride = self.width + 1;
        let sum = self.integral[y1 * stride + x1] - self.integral[y0 * stride + x1]
            - self.integral[y1 * stride + x0]
            + self.integral[y0 * stride + x0];
        sum / ((x1 - x0) * (y1 - y0)) as f64
    }
}

fn box_mean(plane: &Plane, radius: usize) -> Plane {
    let filter = BoxFilter::new(plane, radius);
    let mut out = Plane::zeros(plane.width(), plane.height());
    for y in 0..plane.height() {
        for x in 0..plane.width() {
            out.set(x, y, filter.mean(x, y));
        }
    }
    out
}

/// Standard guided filter: per-window linear model of p on the guide,
/// coefficients averaged over overlapping windows. Inputs are normalized
/// to [0, 1] internally.
pub fn guided_filter(p: &Plane, guide: &Plane, radius: usize, eps: f64) -> Result<Plane> {
    if !p.same_size(guide) {
        return Err(Error::DimensionMismatch(
            "guided filter input and guide differ in size".into(),
        ));
    }
    if radius < 1 || !(eps > 0.0) {
        return Err(Error::InvalidParameter(
            "guided filter needs radius >= 1, eps > 0".into(),
        ));
    }
    let pn = p.map(|v| v / 255.0);
    let gn = guide.map(|v| v / 255.0);
    let gp = Plane::new(
        p.width(),
        p.height(),
        gn.samples()
            .iter()
            .zip(pn.samples())
            .map(|(&g, &v)| g * v)
            .collect(),
    )?;
    let gg = gn.map(|g| g * g);

    let mean_p = box_mean(&pn, radius);
    let mean_g = box_mean(&gn, radius);
    let mean_gp = box_mean(&gp, radius);
    let mean_gg = box_mean(&gg, radius);

    let mut a = Plane::zeros(p.width(), p.height());
    let mut b = Plane::zeros(p.width(), p.height());
    for y in 0..p.height() {
        for x in 0..p.width() {
            let cov = mean_gp.get(x, y) - mean_g.get(x, y) * mean_p.get(x, y);
            let var = mean_gg.get(x, y) - mean_g.get(x, y) * mean_g.get(x, y);
            let ak = cov / (var + eps);
            a.set(x, y, ak);
            b.set(x, y, mean_p.get(x, y) - ak * mean_g.get(x, y));
        }
    }
    let mean_a = box_mean(&a, radius);
    let mean_b = box_mean(&b, radius);
    let mut out = Plane::zeros(p.width(), p.height());
    for y in 0..p.height() {
        for x in 0..p.width() {
            out.set(
                x,
                y,
                (mean_a.get(x, y) * gn.get(x, y) + mean_b.get(x, y)) * 255.0,
            );
        }
    }
    Ok(out)
}

const WLS_WEIGHT_FLOOR: f64 = 1e-4;
const WLS_LOG_OFFSET: f64 = 1e-4;
const WLS_ITERATIONS: usize = 4;

fn wls_weights(y: &Plane, alpha_exp: f64) -> (Plane, Plane) {
    let log_luma = y.map(|v| (v / 255.0 + WLS_LOG_OFFSET).log10());
    let (w, h) = (y.width(), y.height());
    let mut wh = Plane::zeros(w.saturating_sub(1), h);
    for j in 0..h {
        for i in 0..w.saturating_sub(1) {
            let g = log_luma.get(i + 1, j) - log_luma.get(i, j);
            wh.set(i, j, 1.0 / (g.abs().powf(alpha_exp) + WLS_WEIGHT_FLOOR));
        }
    }
    let mut wv = Plane::zeros(w, h.saturating_sub(1));
    for j in 0..h.saturating_sub(1) {
        for i in 0..w {
            let g = log_luma.get(i, j + 1) - log_luma.get(i, j);
            wv.set(i, j, 1.0 / (g.abs().powf(alpha_exp) + WLS_WEIGHT_FLOOR));
        }
    }
    (wh, wv)
}

fn wls_smooth_dense(y: &Plane, wh: &Plane, wv: &Plane, lambda_s: f64) -> Result<Plane> {
    use nalgebra::{DMatrix, DVector};
    let (w, h) = (y.width(), y.height());
    let n = w * h;
    let mut m = DMatrix::<f64>::identity(n, n);
    let b = DVector::<f64>::from_column_slice(y.samples());
    let mut couple = |p: usize, q: usize, weight: f64| {
        let lw = lambda_s * weight;
        m[(p, p)] += lw;
        m[(q, q)] += lw;
        m[(p, q)] -= lw;
        m[(q, p)] -= lw;
    };
    for j in 0..h {
        for i in 0..w.saturating_sub(1) {
            couple(j * w + i, j * w + i + 1, wh.get(i, j));
        }
    }
    for j in 0..h.saturating_sub(1) {
        for i in 0..w {
            couple(j * w + i, (j + 1) * w + i, wv.get(i, j));
        }
    }
    let chol = m
        .cholesky()
        .ok_or_else(|| Error::InvariantBreach("WLS system not SPD".into()))?;
    let x = chol.solve(&b);
    Plane::new(w, h, x.iter().copied().collect())
}

fn wls_smooth_fast(y: &Plane, wh: &Plane, wv: &Plane, lambda_s: f64) -> Result<Plane> {
    let (w, h) = (y.width(), y.height());
    let mut u = y.clone();
    let zeros_h = vec![0.0; w.saturating_sub(1)];
    let zeros_v = vec![0.0; h.saturating_sub(1)];
    for lambda_t in lambda_schedule(lambda_s, WLS_ITERATIONS) {
        if w >= 2 {
            for j in 0..h {
                let solved = solve_line(u.row(j), &zeros_h, wh.row(j), lambda_t)?;
                u.samples_mut()[j * w..(j + 1) * w].copy_from_slice(&solved);
            }
        }
        if h >= 2 {
            for i in 0..w {
                let solved = solve_line(&u.column(i), &zeros_v, &wv.column(i), lambda_t)?;
                for (j, &val) in solved.iter().enumerate() {
                    u.set(i, j, val);
                }
            }
        }
    }
    Ok(u)
}

/// Edge-aware WLS smoothing of a luminance plane: minimizes
/// (u - y)^2 + lambda_s * sum w |grad u|^2 with weights from log10
/// luminance gradients. Exact dense solve for small planes, the separable
/// scheme otherwise.
pub fn wls_smooth(y: &Plane, lambda_s: f64, alpha_exp: f64) -> Result<Plane> {
    if !(lambda_s >= 0.0) || !(alpha_exp > 0.0) {
        return Err(Error::InvalidParameter(
            "wls_smooth needs lambda_s >= 0, alpha_exp > 0".into(),
        ));
    }
    if lambda_s == 0.0 {
        return Ok(y.clone());
    }
    let (wh, wv) = wls_weights(y, alpha_exp);
    if y.len() <= DENSE_PIXEL_LIMIT {
        wls_smooth_dense(y, &wh, &wv, lambda_s)
    } else {
        wls_smooth_fast(y, &wh, &wv, lambda_s)
    }
}

/// Smooths Y with the chosen method and returns base + (Y - base).
pub fn additive_decompose(
    image: &RasterImage,
    params: &BaselineParams,
) -> Result<AdditiveDecomposition> {
    let y = luminance(image);
    let (base, method) = match params {
        BaselineParams::GuidedFilter(p) => {
            (guided_filter(&y, &y, p.radius, p.eps)?, BaselineMethod::GuidedFilter)
        }
        BaselineParams::WlsSmooth(p) => {
            (wls_smooth(&y, p.lambda_s, p.alpha_exp)?, BaselineMethod::WlsSmooth)
        }
    };
    let detail = Plane::new(
        y.width(),
        y.height(),
        y.samples()
            .iter()
            .zip(base.samples())
            .map(|(&yv, &bv)| yv - bv)
            .collect(),
    )?;
    Ok(AdditiveDecomposition {
        base,
        detail,
        method,
        params: *params,
    })
}

/// Y' = clamp(Y + gain * detail); chroma passthrough.
pub fn additive_merge(image: &RasterImage, detail: &Plane, gain: f64) -> Result<RasterImage> {
    if detail.width() != image.width() || detail.height() != image.height() {
        return Err(Error::DimensionMismatch(
            "detail size differs from image".into(),
        ));
    }
    let apply = |y: &Plane| -> Plane {
        let mut out = y.clone();
        for j in 0..y.height() {
            for i in 0..y.width() {
                out.set(i, j, (y.get(i, j) + gain * detail.get(i, j)).clamp(0.0, 255.0));
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
