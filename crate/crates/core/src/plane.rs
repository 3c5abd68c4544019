use crate::error::{Error, Result};

/// A 2-D grid of real-valued samples, row-major. The universal raster for
/// luminance, chroma, gradients, weights, and detail layers.
#[derive(Debug, Clone, PartialEq)]
pub struct Plane {
    width: usize,
    height: usize,
    samples: Vec<f64>,
}

impl Plane {
    pub fn new(width: usize, height: usize, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != width * height {
            return Err(Error::DimensionMismatch(format!(
                "plane {}x{} needs {} samples, got {}",
                width,
                height,
                width * height,
                samples.len()
            )));
        }
        if samples.iter().any(|s| !s.is_finite()) {
            return Err(Error::InvariantBreach("non-finite plane sample".into()));
        }
        Ok(Self {
            width,
            height,
            samples,
        })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        Self {
            width,
            height,
            samples: vec![value; width * height],
        }
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self::filled(width, height, 0.0)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.samples[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: f64) {
        self.samples[y * self.width + x] = v;
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [f64] {
        &mut self.samples
    }

    pub fn row(&self, y: usize) -> &[f64] {
        &self.samples[y * self.width..(y + 1) * self.width]
    }

    pub fn column(&self, x: usize) -> Vec<f64> {
        (0..self.height).map(|y| self.get(x, y)).collect()
    }

    /// Elementwise map, preserving dimensions.
    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> Plane {
        Plane {
            width: self.width,
            height: self.height,
            samples: self.samples.iter().map(|&s| f(s)).collect(),
        }
    }

    pub fn same_size(&self, other: &Plane) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub fn min_max(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &s in &self.samples {
            if s < lo {
                lo = s;
            }
            if s > hi {
                hi = s;
            }
        }
        (lo, hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn new_rejects_wrong_sample_count() {
        assert!(Plane::new(2, 2, vec![0.0; 3]).is_err());
    }

    #[test]
    fn new_rejects_non_finite() {
        assert!(Plane::new(1, 2, vec![0.0, f64::NAN]).is_err());
    }

    #[test]
    fn row_and_column_access() {
        let p = Plane::new(2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(p.row(1), &[3.0, 4.0]);
        assert_eq!(p.column(0), vec![1.0, 3.0]);
        assert_eq!(p.get(1, 0), 2.0);
    }
}
