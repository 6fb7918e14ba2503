use crate::error::{FbsError, Result};

/// Marker for cost-volume entries that hold no correlation cost (border
/// blocks, textureless blocks, right block out of image). Strictly below the
/// NCC range `[-1, 1]`, so winner-take-all never selects it.
pub const COST_SENTINEL: f64 = -2.0;

/// Dense 3-D array of correlation costs over `(u, v, d)`.
///
/// Layout is contiguous in `d` for a fixed pixel, so disparity scans
/// (winner-take-all, subpixel) read one cache-local slice per pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct CostVolume {
    width: usize,
    height: usize,
    d_min: usize,
    d_max: usize,
    costs: Vec<f64>,
}

impl CostVolume {
    /// Allocates a volume with every entry set to [`COST_SENTINEL`].
    pub fn new_sentinel(width: usize, height: usize, d_min: usize, d_max: usize) -> Self {
        assert!(d_max > d_min, "d_max must exceed d_min");
        let depth = d_max - d_min + 1;
        Self {
            width,
            height,
            d_min,
            d_max,
            costs: vec![COST_SENTINEL; width * height * depth],
        }
    }

    /// Builds a volume from raw costs, validating length and range.
    pub fn from_raw(
        width: usize,
        height: usize,
        d_min: usize,
        d_max: usize,
        costs: Vec<f64>,
    ) -> Result<Self> {
        if d_max <= d_min {
            return Err(FbsError::InvalidParameter {
                name: "d_max",
                value: d_max as f64,
                reason: "must exceed d_min",
            });
        }
        let depth = d_max - d_min + 1;
        if costs.len() != width * height * depth {
            return Err(FbsError::DimensionMismatch {
                context: "CostVolume::from_raw",
                expected: format!("{} entries", width * height * depth),
                actual: format!("{} entries", costs.len()),
            });
        }
        if costs
            .iter()
            .any(|&c| c != COST_SENTINEL && !(-1.0..=1.0).contains(&c))
        {
            return Err(FbsError::InvalidParameter {
                name: "cost",
                value: f64::NAN,
                reason: "defined costs must lie in [-1, 1]",
            });
        }
        Ok(Self {
            width,
            height,
            d_min,
            d_max,
            costs,
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
    pub fn d_min(&self) -> usize {
        self.d_min
    }

    #[inline]
    pub fn d_max(&self) -> usize {
        self.d_max
    }

    /// Number of disparity hypotheses per pixel.
    #[inline]
    pub fn depth(&self) -> usize {
        self.d_max - self.d_min + 1
    }

    /// Flat index of `(u, v, d)`. Out-of-range coordinates are a contract
    /// violation, checked in debug builds only.
    #[inline]
    pub fn index(&self, u: usize, v: usize, d: usize) -> usize {
        debug_assert!(u < self.width && v < self.height);
        debug_assert!(d >= self.d_min && d <= self.d_max);
        (v * self.width + u) * self.depth() + (d - self.d_min)
    }

    /// Inverse of [`CostVolume::index`].
    #[inline]
    pub fn decode_index(&self, idx: usize) -> (usize, usize, usize) {
        let depth = self.depth();
        let d = idx % depth + self.d_min;
        let pixel = idx / depth;
        (pixel % self.width, pixel / self.width, d)
    }

    #[inline]
    pub fn get(&self, u: usize, v: usize, d: usize) -> f64 {
        self.costs[self.index(u, v, d)]
    }

    #[inline]
    pub fn is_defined(&self, u: usize, v: usize, d: usize) -> bool {
        self.get(u, v, d) != COST_SENTINEL
    }

    /// The `d`-contiguous cost slice for pixel `(u, v)`, ordered
    /// `d_min..=d_max`.
    #[inline]
    pub fn column(&self, u: usize, v: usize) -> &[f64] {
        let depth = self.depth();
        let start = (v * self.width + u) * depth;
        &self.costs[start..start + depth]
    }

    #[inline]
    pub fn costs(&self) -> &[f64] {
        &self.costs
    }

    #[inline]
    pub(crate) fn costs_mut(&mut self) -> &mut [f64] {
        &mut self.costs
    }

    /// Number of entries that hold a defined cost.
    pub fn defined_count(&self) -> usize {
        self.costs.iter().filter(|&&c| c != COST_SENTINEL).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn origin_maps_to_first_slot() {
        let vol = CostVolume::new_sentinel(4, 3, 2, 7);
        assert_eq!(vol.index(0, 0, 2), 0);
        assert_eq!(vol.index(0, 0, 3), 1);
    }

    #[test]
    fn d_contiguous_layout() {
        // depth 60: stepping one pixel in u skips one full disparity column.
        let vol = CostVolume::new_sentinel(8, 8, 0, 59);
        assert_eq!(vol.index(1, 0, 0), 60);
    }

    #[test]
    fn from_raw_rejects_out_of_range_cost() {
        let costs = vec![1.5; 2 * 2 * 2];
        assert!(CostVolume::from_raw(2, 2, 0, 1, costs).is_err());
    }

    proptest! {
        #[test]
        fn index_round_trip(
            w in 1usize..32, h in 1usize..32, d_min in 0usize..8, span in 1usize..16,
            u_f in 0.0f64..1.0, v_f in 0.0f64..1.0, d_f in 0.0f64..1.0,
        ) {
            let d_max = d_min + span;
            let vol = CostVolume::new_sentinel(w, h, d_min, d_max);
            let u = ((w as f64 - 1.0) * u_f) as usize;
            let v = ((h as f64 - 1.0) * v_f) as usize;
            let d = d_min + ((span as f64) * d_f) as usize;
            prop_assert_eq!(vol.decode_index(vol.index(u, v, d)), (u, v, d));
        }
    }
}
