//! Disparity optimization and refinement: winner-take-all selection,
//! left-right consistency filtering, and parabola subpixel refinement.

use crate::disparity::DisparityMap;
use crate::error::{FbsError, Result};
use crate::exec;
use crate::volume::{CostVolume, COST_SENTINEL};

/// Guard against division by a flat parabola in subpixel refinement.
const SUBPIXEL_DENOM_FLOOR: f64 = 1e-9;

/// Selects, per pixel, the disparity with the highest cost.
///
/// Ties break toward the smaller disparity. Pixels whose whole column is
/// sentinel become invalid.
pub fn wta_disparity(volume: &CostVolume) -> DisparityMap {
    let (w, h) = (volume.width(), volume.height());
    let d_min = volume.d_min();
    let mut out = DisparityMap::new_invalid(w, h);

    exec::rows_mut(out.data_mut(), w, |v, row| {
        for (u, out_px) in row.iter_mut().enumerate() {
            let mut best: Option<(f64, usize)> = None;
            for (k, &c) in volume.column(u, v).iter().enumerate() {
                if c == COST_SENTINEL {
                    continue;
                }
                match best {
                    Some((best_cost, _)) if c <= best_cost => {}
                    _ => best = Some((c, k)),
                }
            }
            if let Some((_, k)) = best {
                *out_px = (d_min + k) as f64;
            }
        }
    });

    out
}

/// Left-right consistency check.
///
/// A left pixel survives when its correspondence in the right map is valid
/// and the two disparities agree within `tolerance`; everything else,
/// including lookups falling outside the image, becomes invalid.
pub fn lrc_check(
    left: &DisparityMap,
    right: &DisparityMap,
    tolerance: f64,
) -> Result<DisparityMap> {
    if left.dimensions() != right.dimensions() {
        return Err(FbsError::DimensionMismatch {
            context: "lrc_check",
            expected: format!("{:?}", left.dimensions()),
            actual: format!("{:?}", right.dimensions()),
        });
    }

    let (w, h) = left.dimensions();
    let mut out = DisparityMap::new_invalid(w, h);

    exec::rows_mut(out.data_mut(), w, |v, row| {
        for (u, out_px) in row.iter_mut().enumerate() {
            let dl = left.get(u, v);
            if !dl.is_finite() {
                continue;
            }
            let ur = u as isize - dl.round() as isize;
            if ur < 0 || ur >= w as isize {
                continue;
            }
            let dr = right.get(ur as usize, v);
            if dr.is_finite() && (dl - dr).abs() <= tolerance {
                *out_px = dl;
            }
        }
    });

    Ok(out)
}

/// Refines integer disparities by fitting a parabola to the three costs
/// around each winner.
///
/// Only pixels whose disparity lies strictly inside `(d_min, d_max)` with
/// both neighbor costs defined are moved; the result is clamped to
/// `[d - 0.5, d + 0.5]`. Near-zero parabola curvature keeps the integer
/// disparity.
pub fn subpixel_refine(disp: &DisparityMap, volume: &CostVolume) -> DisparityMap {
    debug_assert_eq!(disp.dimensions(), (volume.width(), volume.height()));
    let w = disp.width();
    let d_min = volume.d_min();
    let d_max = volume.d_max();
    let mut out = disp.clone();

    exec::rows_mut(out.data_mut(), w, |v, row| {
        for (u, out_px) in row.iter_mut().enumerate() {
            let dl = *out_px;
            if !dl.is_finite() {
                continue;
            }
            let d = dl.round() as usize;
            debug_assert!((dl - d as f64).abs() < 1e-9, "expected integer disparity");
            if d <= d_min || d >= d_max {
                continue;
            }
            let col = volume.column(u, v);
            let k = d - d_min;
            let (prev, center, next) = (col[k - 1], col[k], col[k + 1]);
            if prev == COST_SENTINEL || center == COST_SENTINEL || next == COST_SENTINEL {
                continue;
            }
            let denom = 2.0 * prev + 2.0 * next - 4.0 * center;
            if denom.abs() < SUBPIXEL_DENOM_FLOOR {
                continue;
            }
            let refined = dl + (prev - next) / denom;
            *out_px = refined.clamp(dl - 0.5, dl + 0.5);
        }
    });

    out
}
