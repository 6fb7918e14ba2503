/// Per-pixel mean and standard deviation over `(2r+1)^2` windows.
///
/// Border pixels where the full window does not fit are undefined and hold
/// NaN in both rasters. `stddev` is non-negative wherever defined.
#[derive(Debug, Clone)]
pub struct BlockStats {
    width: usize,
    height: usize,
    radius: usize,
    mean: Vec<f64>,
    stddev: Vec<f64>,
}

impl BlockStats {
    pub(crate) fn from_parts(
        width: usize,
        height: usize,
        radius: usize,
        mean: Vec<f64>,
        stddev: Vec<f64>,
    ) -> Self {
        debug_assert_eq!(mean.len(), width * height);
        debug_assert_eq!(stddev.len(), width * height);
        Self {
            width,
            height,
            radius,
            mean,
            stddev,
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    /// Window half-width these statistics were computed with.
    #[inline]
    pub fn radius(&self) -> usize {
        self.radius
    }

    #[inline]
    pub fn mean(&self, u: usize, v: usize) -> f64 {
        self.mean[v * self.width + u]
    }

    #[inline]
    pub fn stddev(&self, u: usize, v: usize) -> f64 {
        self.stddev[v * self.width + u]
    }

    /// True where the full window fits inside the image.
    #[inline]
    pub fn is_defined(&self, u: usize, v: usize) -> bool {
        self.mean[v * self.width + u].is_finite()
    }
}
