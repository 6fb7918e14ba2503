//! Bilateral cost aggregation.
//!
//! Each disparity slice is filtered with weights that decay with spatial
//! distance and with intensity difference in the guide image. Both weight
//! factors are precomputed into lookup tables once per run and shared
//! read-only by all workers.

use crate::error::{FbsError, Result};
use crate::exec;
use crate::image::GrayImage;
use crate::volume::{CostVolume, COST_SENTINEL};

/// Precomputed spatial weights `exp(-(dx^2+dy^2)/gamma_d^2)` over a
/// `(2r+1) x (2r+1)` window.
#[derive(Debug, Clone)]
pub struct SpatialWeightTable {
    radius: usize,
    weights: Vec<f64>,
}

impl SpatialWeightTable {
    #[inline]
    pub fn radius(&self) -> usize {
        self.radius
    }

    /// Weight for the offset `(dx, dy)`, both in `[-radius, radius]`.
    #[inline]
    pub fn get(&self, dx: isize, dy: isize) -> f64 {
        let side = 2 * self.radius + 1;
        let ix = (dx + self.radius as isize) as usize;
        let iy = (dy + self.radius as isize) as usize;
        debug_assert!(ix < side && iy < side);
        self.weights[iy * side + ix]
    }
}

/// Precomputed range weights `exp(-delta^2/gamma_r^2)` for integer intensity
/// differences `delta` in `[0, 255]`.
#[derive(Debug, Clone)]
pub struct RangeWeightTable {
    weights: Vec<f64>,
}

impl RangeWeightTable {
    /// Weight for two guide intensities; their absolute difference is
    /// quantized to the nearest integer for the table lookup.
    #[inline]
    pub fn weight_between(&self, a: f64, b: f64) -> f64 {
        let delta = (a - b).abs().round() as usize;
        debug_assert!(delta < 256);
        self.weights[delta]
    }

    #[inline]
    pub fn entry(&self, delta: usize) -> f64 {
        self.weights[delta]
    }
}

/// Builds the spatial weight table for a window half-width and falloff.
pub fn build_spatial_weights(agg_radius: usize, gamma_d: f64) -> Result<SpatialWeightTable> {
    if !gamma_d.is_finite() || gamma_d <= 0.0 {
        return Err(FbsError::InvalidParameter {
            name: "gamma_d",
            value: gamma_d,
            reason: "must be positive",
        });
    }
    let side = 2 * agg_radius + 1;
    let inv_g2 = 1.0 / (gamma_d * gamma_d);
    let mut weights = Vec::with_capacity(side * side);
    for dy in -(agg_radius as isize)..=(agg_radius as isize) {
        for dx in -(agg_radius as isize)..=(agg_radius as isize) {
            let dist_sq = (dx * dx + dy * dy) as f64;
            weights.push((-dist_sq * inv_g2).exp());
        }
    }
    Ok(SpatialWeightTable {
        radius: agg_radius,
        weights,
    })
}

/// Builds the 256-entry range weight table for an intensity falloff.
pub fn build_range_weights(gamma_r: f64) -> Result<RangeWeightTable> {
    if !gamma_r.is_finite() || gamma_r <= 0.0 {
        return Err(FbsError::InvalidParameter {
            name: "gamma_r",
            value: gamma_r,
            reason: "must be positive",
        });
    }
    let inv_g2 = 1.0 / (gamma_r * gamma_r);
    let weights = (0..256)
        .map(|delta| {
            let d = delta as f64;
            (-d * d * inv_g2).exp()
        })
        .collect();
    Ok(RangeWeightTable { weights })
}

/// Bilaterally filters every disparity slice of `volume`, guided by the
/// same-side intensity image.
///
/// Per pixel and disparity the output is the weighted average of the defined
/// in-window costs; sentinel neighbors contribute to neither numerator nor
/// denominator, and windows are truncated at image edges. A window whose
/// costs are all sentinel yields the sentinel.
pub fn bilateral_aggregate(
    volume: &CostVolume,
    guide: &GrayImage,
    spatial: &SpatialWeightTable,
    range: &RangeWeightTable,
) -> Result<CostVolume> {
    if guide.dimensions() != (volume.width(), volume.height()) {
        return Err(FbsError::DimensionMismatch {
            context: "bilateral_aggregate",
            expected: format!("({}, {})", volume.width(), volume.height()),
            actual: format!("{:?}", guide.dimensions()),
        });
    }

    let (w, h) = guide.dimensions();
    let r = spatial.radius();
    let depth = volume.depth();
    let mut out = CostVolume::new_sentinel(w, h, volume.d_min(), volume.d_max());
    let row_len = w * depth;

    exec::rows_mut(out.costs_mut(), row_len, |v, out_row| {
        let mut num = vec![0.0f64; depth];
        let mut den = vec![0.0f64; depth];
        let y_lo = v.saturating_sub(r);
        let y_hi = (v + r).min(h - 1);
        for u in 0..w {
            num.fill(0.0);
            den.fill(0.0);
            let center = guide.get(u, v);
            let x_lo = u.saturating_sub(r);
            let x_hi = (u + r).min(w - 1);
            for y in y_lo..=y_hi {
                let dy = y as isize - v as isize;
                for x in x_lo..=x_hi {
                    let dx = x as isize - u as isize;
                    let weight =
                        spatial.get(dx, dy) * range.weight_between(guide.get(x, y), center);
                    for (k, &c) in volume.column(x, y).iter().enumerate() {
                        if c != COST_SENTINEL {
                            num[k] += weight * c;
                            den[k] += weight;
                        }
                    }
                }
            }
            let out_col = &mut out_row[u * depth..(u + 1) * depth];
            for k in 0..depth {
                if den[k] > 0.0 {
                    out_col[k] = (num[k] / den[k]).clamp(-1.0, 1.0);
                }
            }
        }
    });

    Ok(out)
}
