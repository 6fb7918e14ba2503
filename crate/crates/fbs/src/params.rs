use crate::error::{FbsError, Result};

/// All tunables of the matcher.
///
/// `gamma_d`/`gamma_r` default to the minima of the committed parameter sweep
/// on the Motorcycle dataset (see `datasets/TUNING.md`); the remaining
/// defaults are the recommended operating point (3x3 correlation blocks,
/// aggregation half-width 6, error threshold 2, LRC tolerance 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FbsParams {
    /// Correlation block half-width (blocks are `(2r+1)^2`).
    pub block_radius: usize,
    /// Aggregation window half-width.
    pub agg_radius: usize,
    /// Spatial falloff of the aggregation weights.
    pub gamma_d: f64,
    /// Intensity-difference falloff of the aggregation weights.
    pub gamma_r: f64,
    /// Smallest disparity hypothesis (inclusive).
    pub d_min: usize,
    /// Largest disparity hypothesis (inclusive).
    pub d_max: usize,
    /// Error threshold for the percentage-of-error-pixels metric.
    pub epsilon_d: f64,
    /// Maximum |left - right| disparity mismatch the LRC check accepts.
    pub lrc_tolerance: f64,
}

impl Default for FbsParams {
    fn default() -> Self {
        Self {
            block_radius: 1,
            agg_radius: 6,
            gamma_d: 9.0,
            gamma_r: 64.0,
            d_min: 0,
            d_max: 60,
            epsilon_d: 2.0,
            lrc_tolerance: 1.0,
        }
    }
}

impl FbsParams {
    pub fn validate(&self) -> Result<()> {
        if self.block_radius < 1 {
            return Err(FbsError::InvalidParameter {
                name: "block_radius",
                value: self.block_radius as f64,
                reason: "must be at least 1",
            });
        }
        if !self.gamma_d.is_finite() || self.gamma_d <= 0.0 {
            return Err(FbsError::InvalidParameter {
                name: "gamma_d",
                value: self.gamma_d,
                reason: "must be positive",
            });
        }
        if !self.gamma_r.is_finite() || self.gamma_r <= 0.0 {
            return Err(FbsError::InvalidParameter {
                name: "gamma_r",
                value: self.gamma_r,
                reason: "must be positive",
            });
        }
        if self.d_min >= self.d_max {
            return Err(FbsError::InvalidParameter {
                name: "d_max",
                value: self.d_max as f64,
                reason: "must exceed d_min",
            });
        }
        if !self.epsilon_d.is_finite() || self.epsilon_d < 0.0 {
            return Err(FbsError::InvalidParameter {
                name: "epsilon_d",
                value: self.epsilon_d,
                reason: "must be non-negative",
            });
        }
        if !self.lrc_tolerance.is_finite() || self.lrc_tolerance < 0.0 {
            return Err(FbsError::InvalidParameter {
                name: "lrc_tolerance",
                value: self.lrc_tolerance,
                reason: "must be non-negative",
            });
        }
        Ok(())
    }

    /// Correlation block side length `2r+1`.
    #[inline]
    pub fn block_side(&self) -> usize {
        2 * self.block_radius + 1
    }

    /// Pixels per correlation block, `n = (2r+1)^2`.
    #[inline]
    pub fn block_len(&self) -> usize {
        self.block_side() * self.block_side()
    }

    /// Number of disparity hypotheses, `d_max - d_min + 1`.
    #[inline]
    pub fn disparity_count(&self) -> usize {
        self.d_max - self.d_min + 1
    }
}
