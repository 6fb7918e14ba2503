//! Shared helpers for the integration and acceptance suites.
#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use fbs::dataset::{write_disparity, DisparityEncoding};
use fbs::{DatasetSpec, DisparityMap, GrayImage};

/// Root of the checked-in dataset manifests (`<repo>/datasets`).
pub fn datasets_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../datasets")
        .canonicalize()
        .unwrap_or_else(|_| PathBuf::from("datasets"))
}

/// Loads a named dataset if its files have been prepared, else `None`.
pub fn try_load_dataset(name: &str) -> Option<DatasetSpec> {
    DatasetSpec::from_manifest(&datasets_dir().join(format!("{name}.manifest"))).ok()
}

/// Random integer-valued image, like 8-bit camera input.
pub fn random_image(rng: &mut ChaCha8Rng, w: usize, h: usize) -> GrayImage {
    GrayImage::from_fn(w, h, |_, _| rng.random_range(0..=255u8) as f64).unwrap()
}

/// A synthetic fronto-parallel scene: a rectangle at disparity `fg` floating
/// over a background at disparity `bg`, both textured from one random world
/// image so every visible pixel has an exact correspondence.
pub struct SyntheticScene {
    pub left: GrayImage,
    pub right: GrayImage,
    /// Exact disparities; invalid at the analytic occlusion band and where
    /// the correspondence leaves the image.
    pub gt: DisparityMap,
}

pub fn synthetic_scene(seed: u64, w: usize, h: usize, bg: usize, fg: usize) -> SyntheticScene {
    assert!(fg > bg);
    let (x0, x1) = (w / 3 + fg, 2 * w / 3 + fg.min(w / 6));
    let (y0, y1) = (h / 4, 3 * h / 4);
    assert!(x1 < w && x0 > fg);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let right = random_image(&mut rng, w, h);

    let disparity_of = |x: usize, y: usize| {
        if (x0..x1).contains(&x) && (y0..y1).contains(&y) {
            fg
        } else {
            bg
        }
    };

    let left = GrayImage::from_fn(w, h, |x, y| {
        let d = disparity_of(x, y);
        if x >= d {
            right.get(x - d, y)
        } else {
            right.get(x, y)
        }
    })
    .unwrap();

    let occ_lo = x0 - (fg - bg);
    let mut gt = DisparityMap::new_invalid(w, h);
    for y in 0..h {
        for x in 0..w {
            let d = disparity_of(x, y);
            let occluded = (occ_lo..x0).contains(&x) && (y0..y1).contains(&y);
            if x >= d && !occluded {
                gt.set(x, y, d as f64);
            }
        }
    }

    SyntheticScene { left, right, gt }
}

/// Writes a synthetic scene to `dir` as PGM files plus a manifest, so the
/// file-driven pipeline can run on it.
pub fn write_scene_dataset(dir: &Path, scene: &SyntheticScene, d_max: usize) -> PathBuf {
    fs::create_dir_all(dir).unwrap();
    let to_bytes = |img: &GrayImage| -> Vec<u8> {
        img.as_slice().iter().map(|&f| f.round() as u8).collect()
    };
    fbs::pnm::write_pgm(
        &dir.join("left.pgm"),
        scene.left.width(),
        scene.left.height(),
        &to_bytes(&scene.left),
    )
    .unwrap();
    fbs::pnm::write_pgm(
        &dir.join("right.pgm"),
        scene.right.width(),
        scene.right.height(),
        &to_bytes(&scene.right),
    )
    .unwrap();
    write_disparity(
        &scene.gt,
        &dir.join("gt.pfm"),
        DisparityEncoding::Pfm,
    )
    .unwrap();

    let manifest = dir.join("scene.manifest");
    fs::write(
        &manifest,
        format!(
            "name = synthetic\nleft = left.pgm\nright = right.pgm\ngt = gt.pfm\n\
             gt_scale = 4\nd_min = 0\nd_max = {d_max}\n"
        ),
    )
    .unwrap();
    manifest
}
