use crate::error::{FbsError, Result};

/// Single-channel intensity raster.
///
/// Samples are stored row-major as `f64` in `[0, 255]` so block statistics and
/// correlation arithmetic run in one numeric type regardless of the source
/// encoding. Immutable after construction; safe to share across workers.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl GrayImage {
    /// Builds an image from row-major samples, validating length and range.
    pub fn from_raw(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != width * height {
            return Err(FbsError::DimensionMismatch {
                context: "GrayImage::from_raw",
                expected: format!("{} samples ({width}x{height})", width * height),
                actual: format!("{} samples", data.len()),
            });
        }
        if let Some(&bad) = data
            .iter()
            .find(|v| !v.is_finite() || **v < 0.0 || **v > 255.0)
        {
            return Err(FbsError::InvalidIntensity(bad));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    /// Builds an image by evaluating `f(u, v)` at every pixel.
    pub fn from_fn<F: FnMut(usize, usize) -> f64>(
        width: usize,
        height: usize,
        mut f: F,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height);
        for v in 0..height {
            for u in 0..width {
                data.push(f(u, v));
            }
        }
        Self::from_raw(width, height, data)
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn dimensions(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn get(&self, u: usize, v: usize) -> f64 {
        debug_assert!(u < self.width && v < self.height);
        self.data[v * self.width + u]
    }

    /// Row `v` as a contiguous slice.
    #[inline]
    pub fn row(&self, v: usize) -> &[f64] {
        let start = v * self.width;
        &self.data[start..start + self.width]
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}
