use crate::error::{FbsError, Result};

/// Per-pixel real-valued disparity raster.
///
/// Rejected or undefined pixels hold NaN (`INVALID`), which is
/// distinguishable from every legal disparity. Integer winner-take-all
/// output is represented exactly; subpixel refinement may add at most 0.5.
#[derive(Debug, Clone)]
pub struct DisparityMap {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

/// Bitwise equality, so maps agree on their invalid pixels too.
impl PartialEq for DisparityMap {
    fn eq(&self, other: &Self) -> bool {
        self.width == other.width
            && self.height == other.height
            && self
                .data
                .iter()
                .zip(&other.data)
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

impl DisparityMap {
    pub const INVALID: f64 = f64::NAN;

    /// Allocates a map with every pixel invalid.
    pub fn new_invalid(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![Self::INVALID; width * height],
        }
    }

    pub fn from_raw(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != width * height {
            return Err(FbsError::DimensionMismatch {
                context: "DisparityMap::from_raw",
                expected: format!("{} pixels", width * height),
                actual: format!("{} pixels", data.len()),
            });
        }
        Ok(Self {
            width,
            height,
            data,
        })
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

    #[inline]
    pub fn set(&mut self, u: usize, v: usize, d: f64) {
        debug_assert!(u < self.width && v < self.height);
        self.data[v * self.width + u] = d;
    }

    #[inline]
    pub fn is_valid(&self, u: usize, v: usize) -> bool {
        self.get(u, v).is_finite()
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub(crate) fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn valid_count(&self) -> usize {
        self.data.iter().filter(|d| d.is_finite()).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn invalid_is_distinguishable() {
        let mut map = DisparityMap::new_invalid(2, 2);
        assert!(!map.is_valid(0, 0));
        map.set(0, 0, 0.0);
        assert!(map.is_valid(0, 0));
        assert_eq!(map.valid_count(), 1);
    }
}
