//! Fast bilateral stereo.
//!
//! Disparity estimation for rectified stereo pairs: normalized
//! cross-correlation block matching fills twin left/right cost volumes in a
//! single pass, bilateral filtering aggregates each volume guided by its own
//! intensity image, winner-take-all picks per-pixel disparities, a
//! left-right consistency check removes occluded matches, and parabola
//! fitting refines the winners to subpixel precision.
//!
//! The crate ships the pipeline as a library plus evaluation tooling
//! (percentage-of-error-pixels over region masks, Mde/s throughput) and
//! Middlebury-style dataset I/O. Every stage is data-parallel over rows via
//! rayon (`parallel` feature, on by default) with a sequential fallback, and
//! produces bit-identical output for any worker count.

pub mod aggregation;
pub mod cost;
pub mod dataset;
pub mod disparity;
pub mod error;
pub mod evaluation;
pub mod image;
pub mod optimization;
pub mod params;
pub mod pipeline;
pub mod pnm;
pub mod stats;
pub mod volume;

mod exec;

pub use crate::dataset::{DatasetSpec, DisparityEncoding};
pub use crate::disparity::DisparityMap;
pub use crate::error::{FbsError, Result};
pub use crate::evaluation::{EvalReport, Region, RegionMask};
pub use crate::image::GrayImage;
pub use crate::params::FbsParams;
pub use crate::pipeline::{run_pipeline, run_sweep, RunConfig, StageToggles, SweepAxis, SweepSpec};
pub use crate::stats::BlockStats;
pub use crate::volume::{CostVolume, COST_SENTINEL};
