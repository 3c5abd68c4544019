//! Detail-extraction solver: amplified log-domain vector field, edge-aware
//! fidelity weights, the exact dense solve of the quadratic objective, and
//! the fast separable approximation built from per-scanline tridiagonal
//! solves.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::plane::Plane;

/// Pixel cap for the dense reference solver; it is O(n^3).
pub const DENSE_PIXEL_LIMIT: usize = 4096;

/// The five extraction knobs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverParams {
    /// Detail amplification, >= 0. Larger pulls more (and noisier) detail.
    pub alpha: f64,
    /// Fidelity weight, > 0. Trades sparsity against detail preservation.
    pub lambda: f64,
    /// Sensitivity exponent in (0, 2].
    pub gamma: f64,
    /// Noise-exclusion floor, > 0. Larger excludes more noise.
    pub epsilon: f64,
    /// Number of alternating-direction iterations, >= 1.
    pub iterations: usize,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self {
            alpha: 4.0,
            lambda: 1.0,
            gamma: 0.75,
            epsilon: 2.0,
            iterations: 4,
        }
    }
}

impl SolverParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha >= 0.0) {
            return Err(Error::InvalidParameter("alpha must be >= 0".into()));
        }
        if !(self.lambda > 0.0) {
            return Err(Error::InvalidParameter("lambda must be > 0".into()));
        }
        if !(self.gamma > 0.0 && self.gamma <= 2.0) {
            return Err(Error::InvalidParameter("gamma must be in (0, 2]".into()));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidParameter("epsilon must be > 0".into()));
        }
        if self.iterations < 1 {
            return Err(Error::InvalidParameter("iterations must be >= 1".into()));
        }
        Ok(())
    }
}

/// Amplified log2 gradient pair of a luminance plane.
/// `vh` has size (W-1)xH, `vv` has size Wx(H-1).
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    vh: Plane,
    vv: Plane,
}

impl VectorField {
    pub fn new(vh: Plane, vv: Plane) -> Result<Self> {
        if vh.height() != vv.height() + 1 || vh.width() + 1 != vv.width() {
            return Err(Error::DimensionMismatch(format!(
                "vector field planes inconsistent: vh {}x{}, vv {}x{}",
                vh.width(),
                vh.height(),
                vv.width(),
                vv.height()
            )));
        }
        Ok(Self { vh, vv })
    }

    pub fn vh(&self) -> &Plane {
        &self.vh
    }

    pub fn vv(&self) -> &Plane {
        &self.vv
    }

    /// Width of the source plane.
    pub fn width(&self) -> usize {
        self.vv.width()
    }

    /// Height of the source plane.
    pub fn height(&self) -> usize {
        self.vh.height()
    }

    pub fn negated(&self) -> Self {
        Self {
            vh: self.vh.map(|z| -z),
            vv: self.vv.map(|z| -z),
        }
    }
}

/// Builds the amplified log-domain gradient field:
/// vh(i,j) = (1+alpha) * log2((Y(i+1,j)+1) / (Y(i,j)+1)), vv analogous.
pub fn build_vector_field(y: &Plane, alpha: f64) -> Result<VectorField> {
    if y.width() < 2 || y.height() < 2 {
        return Err(Error::ImageTooSmall {
            width: y.width(),
            height: y.height(),
            detail: "vector field needs at least 2x2".into(),
        });
    }
    if y.samples().iter().any(|&s| s < 0.0) {
        return Err(Error::InvalidParameter("negative luminance".into()));
    }
    let (w, h) = (y.width(), y.height());
    let gain = 1.0 + alpha;
    let mut vh = Plane::zeros(w - 1, h);
    for j in 0..h {
        for i in 0..w - 1 {
            let ratio = (y.get(i + 1, j) + 1.0) / (y.get(i, j) + 1.0);
            vh.set(i, j, gain * ratio.log2());
        }
    }
    let mut vv = Plane::zeros(w, h - 1);
    for j in 0..h - 1 {
        for i in 0..w {
            let ratio = (y.get(i, j + 1) + 1.0) / (y.get(i, j) + 1.0);
            vv.set(i, j, gain * ratio.log2());
        }
    }
    VectorField::new(vh, vv)
}

/// psi(z) = sqrt(|z|^gamma + epsilon). Even in z, bounded below by sqrt(eps).
pub fn psi(z: f64, gamma: f64, epsilon: f64) -> f64 {
    (z.abs().powf(gamma) + epsilon).sqrt()
}

/// Elementwise 1/psi^2 over both gradient planes; entries lie in (0, 1/eps].
#[derive(Debug, Clone, PartialEq)]
pub struct FidelityWeights {
    ah: Plane,
    av: Plane,
}

impl FidelityWeights {
    pub fn ah(&self) -> &Plane {
        &self.ah
    }

    pub fn av(&self) -> &Plane {
        &self.av
    }
}

pub fn fidelity_weights(field: &VectorField, gamma: f64, epsilon: f64) -> FidelityWeights {
    let weight = |z: f64| 1.0 / (z.abs().powf(gamma) + epsilon);
    FidelityWeights {
        ah: field.vh().map(weight),
        av: field.vv().map(weight),
    }
}

/// Per-iteration fidelity weights: lambda_t = (3/2) * 4^(T-t) / (4^T - 1) * lambda,
/// t = 1..=T. Strictly decreasing; the sequence sums to lambda/2.
pub fn lambda_schedule(lambda: f64, iterations: usize) -> Vec<f64> {
    let t_total = iterations as i32;
    let denom = 4f64.powi(t_total) - 1.0;
    (1..=t_total)
        .map(|t| 1.5 * 4f64.powi(t_total - t) / denom * lambda)
        .collect()
}

/// Exact minimizer of
///   sum_i (x_i - prev_i)^2 + lambda_t * sum_i w_i (v_i - (x_{i+1} - x_i))^2
/// via the Thomas algorithm on the tridiagonal normal equations
///   (E + lambda_t D'WD) x = prev + lambda_t D'W v.
pub fn solve_line(prev: &[f64], v: &[f64], w: &[f64], lambda_t: f64) -> Result<Vec<f64>> {
    let n = prev.len();
    if n < 2 {
        return Err(Error::InvalidParameter("line solve needs N >= 2".into()));
    }
    if v.len() != n - 1 || w.len() != n - 1 {
        return Err(Error::DimensionMismatch(format!(
            "line solve: N={} but v has {} and w has {}",
            n,
            v.len(),
            w.len()
        )));
    }
    if w.iter().any(|&wi| !(wi > 0.0)) {
        return Err(Error::InvalidParameter("nonpositive line weight".into()));
    }

    // Assemble diag, off-diag, rhs.
    let mut diag = vec![1.0; n];
    let mut off = vec![0.0; n - 1];
    let mut rhs = prev.to_vec();
    for i in 0..n - 1 {
        let lw = lambda_t * w[i];
        diag[i] += lw;
        diag[i + 1] += lw;
        off[i] = -lw;
        let lwv = lw * v[i];
        rhs[i] -= lwv;
        rhs[i + 1] += lwv;
    }

    // Thomas forward sweep (symmetric system, sub == super == off).
    let mut c_prime = vec![0.0; n - 1];
    let mut d_prime = vec![0.0; n];
    c_prime[0] = off[0] / diag[0];
    d_prime[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - off[i - 1] * c_prime[i - 1];
        if i < n - 1 {
            c_prime[i] = off[i] / m;
        }
        d_prime[i] = (rhs[i] - off[i - 1] * d_prime[i - 1]) / m;
    }
    let mut x = d_prime;
    for i in (0..n - 1).rev() {
        x[i] -= c_prime[i] * x[i + 1];
    }
    Ok(x)
}

fn check_consistent(field: &VectorField, weights: &FidelityWeights) -> Result<()> {
    if !field.vh().same_size(weights.ah()) || !field.vv().same_size(weights.av()) {
        return Err(Error::DimensionMismatch(
            "weights inconsistent with vector field".into(),
        ));
    }
    Ok(())
}

fn transpose(plane: &Plane) -> Plane {
    let (w, h) = (plane.width(), plane.height());
    let mut out = Plane::zeros(h, w);
    // blocked for cache locality on large planes
    const BLOCK: usize = 32;
    let src = plane.samples();
    let dst = out.samples_mut();
    for by in (0..h).step_by(BLOCK) {
        for bx in (0..w).step_by(BLOCK) {
            for y in by..(by + BLOCK).min(h) {
                for x in bx..(bx + BLOCK).min(w) {
                    dst[x * h + y] = src[y * w + x];
                }
            }
        }
    }
    out
}

fn row_pass(u: &mut Plane, v: &Plane, w_plane: &Plane, lambda_t: f64) -> Result<()> {
    let width = u.width();
    u.samples_mut()
        .par_chunks_mut(width)
        .enumerate()
        .try_for_each(|(y, row)| -> Result<()> {
            let solved = solve_line(row, v.row(y), w_plane.row(y), lambda_t)?;
            row.copy_from_slice(&solved);
            Ok(())
        })
}

/// Fast separable solver: T alternating-direction sweeps of per-row and
/// per-column tridiagonal solves, warm-started from the running estimate.
/// O(T*H*W) total. Output is bit-identical regardless of thread count.
pub fn solve_fast(
    field: &VectorField,
    weights: &FidelityWeights,
    params: &SolverParams,
) -> Result<Plane> {
    params.validate()?;
    check_consistent(field, weights)?;
    let (w, h) = (field.width(), field.height());
    let mut u = Plane::zeros(w, h);
    // the vertical pass runs on transposed planes so every solve is a
    // contiguous row solve
    let (vv_t, av_t) = if h >= 2 {
        (transpose(field.vv()), transpose(weights.av()))
    } else {
        (Plane::zeros(0, 0), Plane::zeros(0, 0))
    };
    let schedule = lambda_schedule(params.lambda, params.iterations);
    for &lambda_t in &schedule {
        if w >= 2 {
            row_pass(&mut u, field.vh(), weights.ah(), lambda_t)?;
        }
        if h >= 2 {
            let mut ut = transpose(&u);
            row_pass(&mut ut, &vv_t, &av_t, lambda_t)?;
            u = transpose(&ut);
        }
    }
    Ok(u)
}

fn linear_index(x: usize, y: usize, width: usize) -> usize {
    y * width + x
}

/// Dense reference solver: assembles the full N x N normal equations
/// (E + lambda (Dh'A(Vh)Dh + Dv'A(Vv)Dv)) x = lambda (Dh'A(Vh)Vh + Dv'A(Vv)Vv)
/// and solves by Cholesky. Capped at [`DENSE_PIXEL_LIMIT`] pixels.
pub fn solve_dense(field: &VectorField, weights: &FidelityWeights, lambda: f64) -> Result<Plane> {
    check_consistent(field, weights)?;
    let (w, h) = (field.width(), field.height());
    let n = w * h;
    if n > DENSE_PIXEL_LIMIT {
        return Err(Error::PlaneTooLarge {
            pixels: n,
            limit: DENSE_PIXEL_LIMIT,
        });
    }
    let mut m = DMatrix::<f64>::identity(n, n);
    let mut b = DVector::<f64>::zeros(n);
    let mut couple = |p: usize, q: usize, a: f64, v: f64| {
        let la = lambda * a;
        m[(p, p)] += la;
        m[(q, q)] += la;
        m[(p, q)] -= la;
        m[(q, p)] -= la;
        let lav = la * v;
        b[p] -= lav;
        b[q] += lav;
    };
    for y in 0..h {
        for x in 0..w.saturating_sub(1) {
            couple(
                linear_index(x, y, w),
                linear_index(x + 1, y, w),
                weights.ah().get(x, y),
                field.vh().get(x, y),
            );
        }
    }
    for y in 0..h.saturating_sub(1) {
        for x in 0..w {
            couple(
                linear_index(x, y, w),
                linear_index(x, y + 1, w),
                weights.av().get(x, y),
                field.vv().get(x, y),
            );
        }
    }
    let b_norm = b.norm();
    let chol = m
        .clone()
        .cholesky()
        .ok_or_else(|| Error::InvariantBreach("normal equations not SPD".into()))?;
    let x = chol.solve(&b);
    let residual = (&m * &x - &b).norm() / b_norm.max(1e-30);
    if residual > 1e-8 {
        return Err(Error::InvariantBreach(format!(
            "dense solve residual {residual:.3e} exceeds 1e-8"
        )));
    }
    Plane::new(w, h, x.iter().copied().collect())
}

/// The extraction objective:
///   sum u^2 + lambda * [sum ah (vh - dh u)^2 + sum av (vv - dv u)^2]
/// with forward differences.
pub fn objective_value(
    solution: &Plane,
    field: &VectorField,
    weights: &FidelityWeights,
    lambda: f64,
) -> Result<f64> {
    check_consistent(field, weights)?;
    if solution.width() != field.width() || solution.height() != field.height() {
        return Err(Error::DimensionMismatch(
            "solution size differs from field".into(),
        ));
    }
    let mut total: f64 = solution.samples().iter().map(|&s| s * s).sum();
    let (w, h) = (solution.width(), solution.height());
    let mut fidelity = 0.0;
    for y in 0..h {
        for x in 0..w.saturating_sub(1) {
            let r = field.vh().get(x, y) - (solution.get(x + 1, y) - solution.get(x, y));
            fidelity += weights.ah().get(x, y) * r * r;
        }
    }
    for y in 0..h.saturating_sub(1) {
        for x in 0..w {
            let r = field.vv().get(x, y) - (solution.get(x, y + 1) - solution.get(x, y));
            fidelity += weights.av().get(x, y) * r * r;
        }
    }
    total += lambda * fidelity;
    Ok(total)
}
