//! Accuracy and throughput metrics: percentage of error pixels over
//! region-of-interest masks, and millions of disparity evaluations per
//! second.

use std::fmt;
use std::path::Path;

use crate::disparity::DisparityMap;
use crate::error::{FbsError, Result};
use crate::image::GrayImage;
use crate::params::FbsParams;
use crate::pnm;

/// Region of interest an evaluation is restricted to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    All,
    NonOcc,
    NonOccTextureless,
    NonOccDiscontinuity,
}

impl Region {
    pub fn label(self) -> &'static str {
        match self {
            Region::All => "all",
            Region::NonOcc => "non_occ",
            Region::NonOccTextureless => "non_occ_textl",
            Region::NonOccDiscontinuity => "non_occ_discont",
        }
    }

    pub fn from_label(label: &str) -> Option<Region> {
        match label {
            "all" => Some(Region::All),
            "non_occ" => Some(Region::NonOcc),
            "non_occ_textl" => Some(Region::NonOccTextureless),
            "non_occ_discont" => Some(Region::NonOccDiscontinuity),
            _ => None,
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Per-pixel inclusion mask for one region of interest.
#[derive(Debug, Clone)]
pub struct RegionMask {
    width: usize,
    height: usize,
    region: Region,
    include: Vec<bool>,
}

impl RegionMask {
    /// Mask that includes every pixel.
    pub fn full(width: usize, height: usize, region: Region) -> Self {
        Self {
            width,
            height,
            region,
            include: vec![true; width * height],
        }
    }

    /// Nonzero mask pixels are included.
    pub fn from_image(img: &GrayImage, region: Region) -> Self {
        Self {
            width: img.width(),
            height: img.height(),
            region,
            include: img.as_slice().iter().map(|&p| p != 0.0).collect(),
        }
    }

    #[inline]
    pub fn included(&self, u: usize, v: usize) -> bool {
        self.include[v * self.width + u]
    }

    #[inline]
    pub fn dimensions(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn region(&self) -> Region {
        self.region
    }
}

/// Loads a region mask raster (8-bit, nonzero = included) and checks its
/// dimensions against the evaluated maps.
pub fn load_region_mask(
    path: &Path,
    region: Region,
    expected: (usize, usize),
) -> Result<RegionMask> {
    let img = pnm::load_image(path)?;
    if img.dimensions() != expected {
        return Err(FbsError::DimensionMismatch {
            context: "load_region_mask",
            expected: format!("{expected:?}"),
            actual: format!("{:?}", img.dimensions()),
        });
    }
    Ok(RegionMask::from_image(&img, region))
}

/// Outcome of one percentage-of-error-pixels evaluation.
#[derive(Debug, Clone, Copy)]
pub struct PepScore {
    /// Percentage of evaluated pixels whose error exceeds the threshold.
    pub e_pep: f64,
    /// Number of pixels evaluated (N).
    pub evaluated: usize,
    /// Number of erroneous pixels.
    pub errors: usize,
}

/// Full per-region evaluation record for one pipeline run.
#[derive(Debug, Clone)]
pub struct EvalReport {
    pub region: Region,
    pub e_pep: f64,
    /// Number of pixels evaluated (N).
    pub evaluated: usize,
    pub params: FbsParams,
    pub runtime_seconds: f64,
    pub mde_per_s: f64,
}

/// Percentage of error pixels: the share of mask-included pixels whose
/// estimate deviates from ground truth by strictly more than `epsilon_d`.
///
/// Pixels with invalid ground truth are always excluded. Invalid estimates
/// count as errors when `count_invalid_as_error` is set, and are excluded
/// from the evaluation otherwise.
pub fn compute_pep(
    est: &DisparityMap,
    gt: &DisparityMap,
    mask: &RegionMask,
    epsilon_d: f64,
    count_invalid_as_error: bool,
) -> Result<PepScore> {
    if est.dimensions() != gt.dimensions() || mask.dimensions() != gt.dimensions() {
        return Err(FbsError::DimensionMismatch {
            context: "compute_pep",
            expected: format!("{:?}", gt.dimensions()),
            actual: format!("est {:?}, mask {:?}", est.dimensions(), mask.dimensions()),
        });
    }

    let (w, h) = gt.dimensions();
    let mut evaluated = 0usize;
    let mut errors = 0usize;
    for v in 0..h {
        for u in 0..w {
            if !mask.included(u, v) {
                continue;
            }
            let truth = gt.get(u, v);
            if !truth.is_finite() {
                continue;
            }
            let estimate = est.get(u, v);
            if !estimate.is_finite() {
                if count_invalid_as_error {
                    evaluated += 1;
                    errors += 1;
                }
                continue;
            }
            evaluated += 1;
            if (estimate - truth).abs() > epsilon_d {
                errors += 1;
            }
        }
    }

    if evaluated == 0 {
        return Err(FbsError::EmptyMask);
    }
    Ok(PepScore {
        e_pep: 100.0 * errors as f64 / evaluated as f64,
        evaluated,
        errors,
    })
}

/// Millions of disparity evaluations per second:
/// `width * height * d_max / t * 1e-6`.
pub fn compute_mde_s(width: usize, height: usize, d_max: usize, t_seconds: f64) -> Result<f64> {
    if !t_seconds.is_finite() || t_seconds <= 0.0 {
        return Err(FbsError::InvalidParameter {
            name: "t_seconds",
            value: t_seconds,
            reason: "must be positive",
        });
    }
    Ok(width as f64 * height as f64 * d_max as f64 / t_seconds * 1e-6)
}
