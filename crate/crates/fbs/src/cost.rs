//! Correlation cost computation.
//!
//! Block means and standard deviations are precomputed once per image so the
//! per-hypothesis work reduces to a single dot product. Each computed cost is
//! written simultaneously to the left volume at `(u, v, d)` and to the right
//! volume at `(u-d, v, d)`, halving the matching work for the two views.

use crate::error::{FbsError, Result};
use crate::exec;
use crate::image::GrayImage;
use crate::params::FbsParams;
use crate::stats::BlockStats;
use crate::volume::CostVolume;

/// Blocks with standard deviation below this are treated as textureless:
/// the correlation is numerically undefined there, so the cost stays the
/// sentinel.
pub const SIGMA_FLOOR: f64 = 1e-6;

/// Computes per-pixel block mean and standard deviation over
/// `(2*block_radius+1)^2` windows.
///
/// Border pixels where the window does not fit are left undefined. The
/// standard deviation uses the one-pass form `sqrt(sum(i^2)/n - mean^2)`;
/// intensities are bounded by 255, which keeps the subtraction safe in f64.
pub fn compute_block_stats(img: &GrayImage, block_radius: usize) -> Result<BlockStats> {
    let (w, h) = img.dimensions();
    if w <= 2 * block_radius || h <= 2 * block_radius {
        return Err(FbsError::ImageTooSmall {
            width: w,
            height: h,
            radius: block_radius,
        });
    }

    let side = 2 * block_radius + 1;
    let n = (side * side) as f64;
    let mut mean = vec![f64::NAN; w * h];
    let mut stddev = vec![f64::NAN; w * h];

    exec::rows_zip_mut(&mut mean, &mut stddev, w, |v, mean_row, sd_row| {
        if v < block_radius || v + block_radius >= h {
            return;
        }
        for u in block_radius..(w - block_radius) {
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            for y in (v - block_radius)..=(v + block_radius) {
                let row = &img.row(y)[(u - block_radius)..=(u + block_radius)];
                for &i in row {
                    sum += i;
                    sum_sq += i * i;
                }
            }
            let mu = sum / n;
            let var = sum_sq / n - mu * mu;
            mean_row[u] = mu;
            // var can round to a tiny negative on constant blocks
            sd_row[u] = if var > 0.0 { var.sqrt() } else { 0.0 };
        }
    });

    Ok(BlockStats::from_parts(w, h, block_radius, mean, stddev))
}

/// Fills the left and right cost volumes with normalized cross-correlation
/// costs in a single pass.
///
/// For each `(u, v, d)` the reference block is centered at `(u, v)` in the
/// left image and the candidate at `(u-d, v)` in the right image. Entries
/// where either block is a border block, the right block falls outside the
/// image, or either standard deviation is below [`SIGMA_FLOOR`] keep the
/// sentinel. Defined costs are clamped to `[-1, 1]`.
pub fn compute_cost_volumes(
    left: &GrayImage,
    right: &GrayImage,
    stats_left: &BlockStats,
    stats_right: &BlockStats,
    params: &FbsParams,
) -> Result<(CostVolume, CostVolume)> {
    let (left_vol, right_vol, _) =
        fill_cost_volumes(left, right, stats_left, stats_right, params)?;
    Ok((left_vol, right_vol))
}

/// Internal variant that also reports how many dot products were evaluated.
/// Exactly one evaluation happens per defined left-volume entry even though
/// two volumes are filled.
pub(crate) fn fill_cost_volumes(
    left: &GrayImage,
    right: &GrayImage,
    stats_left: &BlockStats,
    stats_right: &BlockStats,
    params: &FbsParams,
) -> Result<(CostVolume, CostVolume, u64)> {
    if left.dimensions() != right.dimensions() {
        return Err(FbsError::DimensionMismatch {
            context: "compute_cost_volumes",
            expected: format!("{:?}", left.dimensions()),
            actual: format!("{:?}", right.dimensions()),
        });
    }
    if stats_left.radius() != params.block_radius || stats_right.radius() != params.block_radius {
        return Err(FbsError::DimensionMismatch {
            context: "compute_cost_volumes: block statistics radius",
            expected: format!("{}", params.block_radius),
            actual: format!("{}/{}", stats_left.radius(), stats_right.radius()),
        });
    }
    if (stats_left.width(), stats_left.height()) != left.dimensions()
        || (stats_right.width(), stats_right.height()) != right.dimensions()
    {
        return Err(FbsError::DimensionMismatch {
            context: "compute_cost_volumes: block statistics",
            expected: format!("{:?}", left.dimensions()),
            actual: format!(
                "({}, {})/({}, {})",
                stats_left.width(),
                stats_left.height(),
                stats_right.width(),
                stats_right.height()
            ),
        });
    }
    params.validate()?;

    let (w, h) = left.dimensions();
    let r = params.block_radius;
    if w <= 2 * r || h <= 2 * r {
        return Err(FbsError::ImageTooSmall {
            width: w,
            height: h,
            radius: r,
        });
    }

    let n = params.block_len() as f64;
    let depth = params.disparity_count();
    let d_min = params.d_min;
    let mut left_vol = CostVolume::new_sentinel(w, h, d_min, params.d_max);
    let mut right_vol = CostVolume::new_sentinel(w, h, d_min, params.d_max);
    let row_len = w * depth;

    let evaluations = exec::rows_zip_map_sum(
        left_vol.costs_mut(),
        right_vol.costs_mut(),
        row_len,
        |v, left_row, right_row| {
            if v < r || v + r >= h {
                return 0;
            }
            let mut count = 0u64;
            for u in r..(w - r) {
                let mu_l = stats_left.mean(u, v);
                let sigma_l = stats_left.stddev(u, v);
                if sigma_l < SIGMA_FLOOR {
                    continue;
                }
                // The right block needs u - d >= r, so d <= u - r.
                let d_hi = params.d_max.min(u - r);
                for d in d_min..=d_hi {
                    let ur = u - d;
                    let mu_r = stats_right.mean(ur, v);
                    let sigma_r = stats_right.stddev(ur, v);
                    if sigma_r < SIGMA_FLOOR {
                        continue;
                    }
                    let dot = block_dot(left, right, u, ur, v, r);
                    let cost = ((dot - n * mu_l * mu_r) / (n * sigma_l * sigma_r)).clamp(-1.0, 1.0);
                    left_row[u * depth + (d - d_min)] = cost;
                    right_row[ur * depth + (d - d_min)] = cost;
                    count += 1;
                }
            }
            count
        },
    );

    Ok((left_vol, right_vol, evaluations))
}

/// Dot product of the two intensity blocks centered at `(u, v)` and `(ur, v)`.
#[inline]
fn block_dot(left: &GrayImage, right: &GrayImage, u: usize, ur: usize, v: usize, r: usize) -> f64 {
    let mut dot = 0.0;
    for y in (v - r)..=(v + r) {
        let lrow = &left.row(y)[(u - r)..=(u + r)];
        let rrow = &right.row(y)[(ur - r)..=(ur + r)];
        for (a, b) in lrow.iter().zip(rrow) {
            dot += a * b;
        }
    }
    dot
}
