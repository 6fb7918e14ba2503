//! Dataset manifests, ground-truth loading, and disparity map writers.
//!
//! A manifest is a plain `key = value` file:
//!
//! ```text
//! name = cones
//! left = cones/im2.ppm
//! right = cones/im6.ppm
//! gt = cones/disp2.pgm
//! gt_scale = 4
//! d_min = 0
//! d_max = 60
//! masks.non_occ = cones/nonocc.pgm
//! ```
//!
//! Relative paths resolve against the manifest's directory. `#` starts a
//! comment.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use crate::disparity::DisparityMap;
use crate::error::{FbsError, Result};
use crate::evaluation::Region;
use crate::pnm;

/// One stereo dataset: image pair, ground truth, and optional region masks.
#[derive(Debug, Clone)]
pub struct DatasetSpec {
    pub name: String,
    pub left: PathBuf,
    pub right: PathBuf,
    pub gt: PathBuf,
    /// Divisor mapping stored gray levels to true disparities.
    pub gt_scale: f64,
    pub d_min: usize,
    pub d_max: usize,
    pub masks: Vec<(Region, PathBuf)>,
}

impl DatasetSpec {
    pub fn from_manifest(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| FbsError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        let fail = |message: String| FbsError::Format {
            path: path.to_path_buf(),
            message,
        };

        let mut fields = HashMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| fail(format!("line {}: expected `key = value`", lineno + 1)))?;
            fields.insert(key.trim().to_string(), value.trim().to_string());
        }

        let take = |key: &str| -> Result<String> {
            fields
                .get(key)
                .cloned()
                .ok_or_else(|| fail(format!("missing required key `{key}`")))
        };
        let resolve = |rel: &str| base.join(rel);

        let gt_scale: f64 = match fields.get("gt_scale") {
            Some(s) => s
                .parse()
                .map_err(|_| fail(format!("gt_scale `{s}` is not a number")))?,
            None => 1.0,
        };
        if !gt_scale.is_finite() || gt_scale <= 0.0 {
            return Err(fail(format!("gt_scale must be positive, got {gt_scale}")));
        }
        let d_min: usize = match fields.get("d_min") {
            Some(s) => s
                .parse()
                .map_err(|_| fail(format!("d_min `{s}` is not an integer")))?,
            None => 0,
        };
        let d_max: usize = take("d_max")?
            .parse()
            .map_err(|_| fail("d_max is not an integer".to_string()))?;
        if d_max <= d_min {
            return Err(fail(format!("d_max {d_max} must exceed d_min {d_min}")));
        }

        let mut masks = Vec::new();
        for (key, value) in &fields {
            if let Some(label) = key.strip_prefix("masks.") {
                let region = Region::from_label(label)
                    .ok_or_else(|| fail(format!("unknown mask region `{label}`")))?;
                masks.push((region, resolve(value)));
            }
        }
        masks.sort_by_key(|(region, _)| region.label());

        let spec = DatasetSpec {
            name: take("name")?,
            left: resolve(&take("left")?),
            right: resolve(&take("right")?),
            gt: resolve(&take("gt")?),
            gt_scale,
            d_min,
            d_max,
            masks,
        };

        for p in [&spec.left, &spec.right, &spec.gt]
            .into_iter()
            .chain(spec.masks.iter().map(|(_, p)| p))
        {
            if !p.exists() {
                return Err(fail(format!("referenced file does not exist: {}", p.display())));
            }
        }
        Ok(spec)
    }
}

/// Loads ground truth.
///
/// PGM rasters hold `disparity * gt_scale` with gray 0 as the unknown
/// marker; PFM rasters hold raw float disparities with non-finite entries as
/// the unknown marker (no scale division).
pub fn load_ground_truth(path: &Path, gt_scale: f64) -> Result<DisparityMap> {
    if !gt_scale.is_finite() || gt_scale <= 0.0 {
        return Err(FbsError::InvalidParameter {
            name: "gt_scale",
            value: gt_scale,
            reason: "must be positive",
        });
    }
    if path.extension().and_then(|e| e.to_str()) == Some("pfm") {
        let (w, h, samples) = pnm::load_pfm(path)?;
        let data = samples
            .iter()
            .map(|&s| {
                if s.is_finite() {
                    s as f64
                } else {
                    DisparityMap::INVALID
                }
            })
            .collect();
        return DisparityMap::from_raw(w, h, data);
    }

    let img = pnm::load_image(path)?;
    let data = img
        .as_slice()
        .iter()
        .map(|&gray| {
            if gray == 0.0 {
                DisparityMap::INVALID
            } else {
                gray / gt_scale
            }
        })
        .collect();
    DisparityMap::from_raw(img.width(), img.height(), data)
}

/// On-disk encodings for disparity maps.
#[derive(Debug, Clone, Copy)]
pub enum DisparityEncoding {
    /// 8-bit PGM holding `round(d * scale)` clamped to `[0, 255]`;
    /// invalid pixels become gray 0.
    GrayScaled { scale: f64 },
    /// 32-bit float PFM; invalid pixels become +inf.
    Pfm,
}

pub fn write_disparity(
    disp: &DisparityMap,
    path: &Path,
    encoding: DisparityEncoding,
) -> Result<()> {
    let (w, h) = disp.dimensions();
    match encoding {
        DisparityEncoding::GrayScaled { scale } => {
            let bytes: Vec<u8> = disp
                .data()
                .iter()
                .map(|&d| {
                    if d.is_finite() {
                        (d * scale).round().clamp(0.0, 255.0) as u8
                    } else {
                        0
                    }
                })
                .collect();
            pnm::write_pgm(path, w, h, &bytes)
        }
        DisparityEncoding::Pfm => {
            let samples: Vec<f32> = disp
                .data()
                .iter()
                .map(|&d| if d.is_finite() { d as f32 } else { f32::INFINITY })
                .collect();
            pnm::write_pfm(path, w, h, &samples)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;
    use std::io::Write as _;

    #[test]
    fn gt_gray_divides_by_scale() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("gt.pgm");
        pnm::write_pgm(&path, 3, 1, &[64, 0, 120]).unwrap();

        let gt = load_ground_truth(&path, 8.0).unwrap();
        assert_eq!(gt.get(0, 0), 8.0);
        assert!(!gt.is_valid(1, 0)); // gray 0 is the unknown marker

        let gt = load_ground_truth(&path, 4.0).unwrap();
        assert_eq!(gt.get(2, 0), 30.0);
    }

    #[test]
    fn gt_pfm_loads_floats_without_scaling() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("gt.pfm");
        pnm::write_pfm(&path, 2, 1, &[13.25, f32::INFINITY]).unwrap();
        let gt = load_ground_truth(&path, 4.0).unwrap();
        assert_eq!(gt.get(0, 0), 13.25);
        assert!(!gt.is_valid(1, 0));
    }

    #[test]
    fn gray_write_is_the_inverse_of_load() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.pgm");
        let mut disp = DisparityMap::new_invalid(2, 1);
        disp.set(0, 0, 8.0);
        write_disparity(&disp, &path, DisparityEncoding::GrayScaled { scale: 8.0 }).unwrap();
        let img = pnm::load_image(&path).unwrap();
        assert_eq!(img.get(0, 0), 64.0);
        assert_eq!(img.get(1, 0), 0.0); // invalid marker round-trip
    }

    #[test]
    fn integer_disparities_round_trip_through_gray() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let scale = 4.0;
        let (w, h) = (9, 5);
        let data: Vec<f64> = (0..w * h)
            .map(|_| {
                if rng.random_range(0..8) == 0 {
                    DisparityMap::INVALID
                } else {
                    rng.random_range(1..=60) as f64
                }
            })
            .collect();
        let disp = DisparityMap::from_raw(w, h, data).unwrap();

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rt.pgm");
        write_disparity(&disp, &path, DisparityEncoding::GrayScaled { scale }).unwrap();
        let loaded = load_ground_truth(&path, scale).unwrap();
        for v in 0..h {
            for u in 0..w {
                match disp.is_valid(u, v) {
                    true => assert_eq!(loaded.get(u, v), disp.get(u, v)),
                    false => assert!(!loaded.is_valid(u, v)),
                }
            }
        }
    }

    #[test]
    fn pfm_write_round_trips_all_reals() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let (w, h) = (7, 4);
        let data: Vec<f64> = (0..w * h)
            .map(|_| {
                if rng.random_range(0..6) == 0 {
                    DisparityMap::INVALID
                } else {
                    // arbitrary f32-representable reals
                    rng.random_range(0.0f32..64.0) as f64
                }
            })
            .collect();
        let disp = DisparityMap::from_raw(w, h, data).unwrap();

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rt.pfm");
        write_disparity(&disp, &path, DisparityEncoding::Pfm).unwrap();
        let loaded = load_ground_truth(&path, 1.0).unwrap();
        for v in 0..h {
            for u in 0..w {
                match disp.is_valid(u, v) {
                    true => assert_eq!(loaded.get(u, v), disp.get(u, v)),
                    false => assert!(!loaded.is_valid(u, v)),
                }
            }
        }
    }

    #[test]
    fn manifest_parses_and_validates_paths() {
        let dir = tempfile::tempdir().unwrap();
        pnm::write_pgm(&dir.path().join("l.pgm"), 2, 2, &[0, 1, 2, 3]).unwrap();
        pnm::write_pgm(&dir.path().join("r.pgm"), 2, 2, &[0, 1, 2, 3]).unwrap();
        pnm::write_pgm(&dir.path().join("gt.pgm"), 2, 2, &[0, 1, 2, 3]).unwrap();
        pnm::write_pgm(&dir.path().join("nonocc.pgm"), 2, 2, &[255; 4]).unwrap();

        let manifest = dir.path().join("toy.manifest");
        let mut f = fs::File::create(&manifest).unwrap();
        writeln!(f, "# toy dataset").unwrap();
        writeln!(f, "name = toy").unwrap();
        writeln!(f, "left = l.pgm").unwrap();
        writeln!(f, "right = r.pgm").unwrap();
        writeln!(f, "gt = gt.pgm").unwrap();
        writeln!(f, "gt_scale = 8").unwrap();
        writeln!(f, "d_min = 0").unwrap();
        writeln!(f, "d_max = 16").unwrap();
        writeln!(f, "masks.non_occ = nonocc.pgm").unwrap();
        drop(f);

        let spec = DatasetSpec::from_manifest(&manifest).unwrap();
        assert_eq!(spec.name, "toy");
        assert_eq!(spec.gt_scale, 8.0);
        assert_eq!(spec.d_max, 16);
        assert_eq!(spec.masks.len(), 1);
        assert_eq!(spec.masks[0].0, Region::NonOcc);
    }

    #[test]
    fn manifest_missing_file_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = dir.path().join("bad.manifest");
        fs::write(
            &manifest,
            "name = bad\nleft = missing.pgm\nright = missing.pgm\ngt = missing.pgm\nd_max = 8\n",
        )
        .unwrap();
        assert!(matches!(
            DatasetSpec::from_manifest(&manifest),
            Err(FbsError::Format { .. })
        ));
    }
}
