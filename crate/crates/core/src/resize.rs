//! Cubic-convolution resampling (Keys kernel, a = -0.5) with the kernel
//! support widened by the scale factor on downscale, so downscaling is
//! antialiased. Borders replicate the edge sample.

use crate::error::{Error, Result};
use crate::plane::Plane;

const KERNEL_A: f64 = -0.5;

fn cubic(x: f64) -> f64 {
    let x = x.abs();
    if x < 1.0 {
        (KERNEL_A + 2.0) * x * x * x - (KERNEL_A + 3.0) * x * x + 1.0
    } else if x < 2.0 {
        KERNEL_A * x * x * x - 5.0 * KERNEL_A * x * x + 8.0 * KERNEL_A * x - 4.0 * KERNEL_A
    } else {
        0.0
    }
}

/// Per-output-sample tap list over one axis: source indices (clamped) and
/// normalized weights.
fn build_taps(in_len: usize, out_len: usize) -> Vec<(usize, Vec<f64>)> {
    let scale = in_len as f64 / out_len as f64;
    // Widen the kernel when minifying.
    let filter_scale = scale.max(1.0);
    let support = 2.0 * filter_scale;
    let mut taps = Vec::with_capacity(out_len);
    for o in 0..out_len {
        let center = (o as f64 + 0.5) * scale - 0.5;
        let lo = (center - support).ceil() as isize;
        let hi = (center + support).floor() as isize;
        let mut weights = Vec::with_capacity((hi - lo + 1) as usize);
        let mut sum = 0.0;
        for i in lo..=hi {
            let w = cubic((center - i as f64) / filter_scale);
            weights.push(w);
            sum += w;
        }
        for w in &mut weights {
            *w /= sum;
        }
        let start = lo;
        // Fold clamped border taps into a dense run over valid indices.
        let first = start.clamp(0, in_len as isize - 1) as usize;
        let last = hi.clamp(0, in_len as isize - 1) as usize;
        let mut folded = vec![0.0; last - first + 1];
        for (k, w) in weights.iter().enumerate() {
            let src = (start + k as isize).clamp(0, in_len as isize - 1) as usize;
            folded[src - first] += w;
        }
        taps.push((first, folded));
    }
    taps
}

fn resample_rows(plane: &Plane, out_width: usize) -> Plane {
    let taps = build_taps(plane.width(), out_width);
    let mut out = Plane::zeros(out_width, plane.height());
    for y in 0..plane.height() {
        let row = plane.row(y);
        for (o, (first, weights)) in taps.iter().enumerate() {
            let mut acc = 0.0;
            for (k, w) in weights.iter().enumerate() {
                acc += w * row[first + k];
            }
            out.set(o, y, acc);
        }
    }
    out
}

fn resample_cols(plane: &Plane, out_height: usize) -> Plane {
    let taps = build_taps(plane.height(), out_height);
    let mut out = Plane::zeros(plane.width(), out_height);
    for (o, (first, weights)) in taps.iter().enumerate() {
        for x in 0..plane.width() {
            let mut acc = 0.0;
            for (k, w) in weights.iter().enumerate() {
                acc += w * plane.get(x, first + k);
            }
            out.set(x, o, acc);
        }
    }
    out
}

pub fn bicubic_resize(plane: &Plane, out_width: usize, out_height: usize) -> Result<Plane> {
    if out_width == 0 || out_height == 0 {
        return Err(Error::InvalidParameter("zero-sized resize output".into()));
    }
    let horizontal = resample_rows(plane, out_width);
    Ok(resample_cols(&horizontal, out_height))
}
