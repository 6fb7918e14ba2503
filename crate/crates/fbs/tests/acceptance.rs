//! Acceptance suite.
//!
//! One test per criterion, each printing a `PASS`/`SKIP` line (visible with
//! `cargo test --test acceptance -- --nocapture`). Criteria 5-7 need the
//! Middlebury scenes fetched by `scripts/prepare_datasets.py`; when the
//! files are absent those tests report `SKIP` with the reason instead of
//! failing, since the data cannot be vendored.

mod common;

use std::fs;
use std::time::Instant;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use fbs::aggregation::{bilateral_aggregate, build_range_weights, build_spatial_weights};
use fbs::cost::{compute_block_stats, compute_cost_volumes};
use fbs::evaluation::{compute_pep, RegionMask};
use fbs::optimization::subpixel_refine;
use fbs::pipeline::{self, run_pipeline, run_sweep, RunConfig, SweepAxis, SweepSpec};
use fbs::{CostVolume, DatasetSpec, DisparityMap, FbsParams, GrayImage, Region, COST_SENTINEL};

/// Reference non-occluded error percentages for the Middlebury scenes, and
/// the allowed deviation (the published tables omit the exact gamma/rho
/// settings, so only approximate reproduction is possible).
const REFERENCE_PEP: &[(&str, f64)] = &[
    ("cones", 8.2264),
    ("teddy", 10.9244),
    ("venus", 2.8573),
    ("sawtooth", 7.3800),
];
const REFERENCE_PEP_TOLERANCE_PP: f64 = 3.0;
const DATASET_RUNTIME_LIMIT_S: f64 = 60.0;

/// Committed sweep grids (same grids as datasets/TUNING.md).
const GAMMA_D_GRID: [f64; 10] = [0.5, 1.0, 2.0, 3.0, 4.0, 6.0, 9.0, 14.0, 20.0, 32.0];
const GAMMA_R_GRID: [f64; 10] = [1.0, 2.0, 4.0, 7.0, 10.0, 15.0, 22.0, 32.0, 64.0, 128.0];

const ORACLE_TOLERANCE: f64 = 1e-6;

// ---------------------------------------------------------------------------
// independent brute-force oracles (literal formula evaluation)
// ---------------------------------------------------------------------------

/// Literal block mean/stddev at `(u, v)`; `None` where the window does not
/// fit.
fn oracle_block_stats(img: &GrayImage, r: usize, u: usize, v: usize) -> Option<(f64, f64)> {
    let (w, h) = img.dimensions();
    if u < r || v < r || u + r >= w || v + r >= h {
        return None;
    }
    let n = ((2 * r + 1) * (2 * r + 1)) as f64;
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for y in (v - r)..=(v + r) {
        for x in (u - r)..=(u + r) {
            let i = img.get(x, y);
            sum += i;
            sum_sq += i * i;
        }
    }
    let mu = sum / n;
    let sigma = (sum_sq / n - mu * mu).max(0.0).sqrt();
    Some((mu, sigma))
}

/// Literal normalized cross-correlation; `None` where undefined (border
/// block, right block out of image, or near-zero deviation).
fn oracle_ncc(
    left: &GrayImage,
    right: &GrayImage,
    r: usize,
    u: usize,
    v: usize,
    d: usize,
) -> Option<f64> {
    let ur = u.checked_sub(d)?;
    let (mu_l, sigma_l) = oracle_block_stats(left, r, u, v)?;
    let (mu_r, sigma_r) = oracle_block_stats(right, r, ur, v)?;
    if sigma_l < 1e-6 || sigma_r < 1e-6 {
        return None;
    }
    let n = ((2 * r + 1) * (2 * r + 1)) as f64;
    let mut dot = 0.0;
    for y in (v - r)..=(v + r) {
        for x in (u - r)..=(u + r) {
            dot += left.get(x, y) * right.get(x - d, y);
        }
    }
    Some((dot - n * mu_l * mu_r) / (n * sigma_l * sigma_r))
}

/// Literal bilateral aggregation of one `(u, v, d)` entry: Gaussian spatial
/// and intensity weights over the truncated window, sentinel neighbors
/// excluded from numerator and denominator.
#[allow(clippy::too_many_arguments)]
fn oracle_bilateral(
    volume: &CostVolume,
    guide: &GrayImage,
    rho: usize,
    gamma_d: f64,
    gamma_r: f64,
    u: usize,
    v: usize,
    d: usize,
) -> f64 {
    let (w, h) = guide.dimensions();
    let center = guide.get(u, v);
    let mut num = 0.0;
    let mut den = 0.0;
    for y in v.saturating_sub(rho)..=(v + rho).min(h - 1) {
        for x in u.saturating_sub(rho)..=(u + rho).min(w - 1) {
            let c = volume.get(x, y, d);
            if c == COST_SENTINEL {
                continue;
            }
            let dx = x as f64 - u as f64;
            let dy = y as f64 - v as f64;
            let w_d = (-(dx * dx + dy * dy) / (gamma_d * gamma_d)).exp();
            let di = guide.get(x, y) - center;
            let w_r = (-(di * di) / (gamma_r * gamma_r)).exp();
            num += w_d * w_r * c;
            den += w_d * w_r;
        }
    }
    if den > 0.0 {
        num / den
    } else {
        COST_SENTINEL
    }
}

fn random_volume(rng: &mut ChaCha8Rng, w: usize, h: usize, depth: usize) -> CostVolume {
    let costs: Vec<f64> = (0..w * h * depth)
        .map(|_| {
            if rng.random_range(0..8) == 0 {
                COST_SENTINEL
            } else {
                rng.random_range(-1.0..=1.0)
            }
        })
        .collect();
    CostVolume::from_raw(w, h, 0, depth - 1, costs).unwrap()
}

// ---------------------------------------------------------------------------
// criteria
// ---------------------------------------------------------------------------

#[test]
fn criterion_1_cost_volumes_match_brute_force_oracle() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0_57);
    let pairs = 120usize;
    let mut checked_entries = 0u64;

    for case in 0..pairs {
        let w = rng.random_range(5..=16);
        let h = rng.random_range(5..=16);
        let d_max = rng.random_range(1..=5usize);
        let right = common::random_image(&mut rng, w, h);
        // half the cases hold a real constant-shift correspondence
        let left = if case % 2 == 0 {
            common::random_image(&mut rng, w, h)
        } else {
            let shift = rng.random_range(0..=d_max.min(w - 1));
            GrayImage::from_fn(w, h, |x, y| right.get(x.saturating_sub(shift).min(x), y)).unwrap()
        };

        let params = FbsParams {
            d_min: 0,
            d_max,
            ..FbsParams::default()
        };
        let stats_l = compute_block_stats(&left, params.block_radius).unwrap();
        let stats_r = compute_block_stats(&right, params.block_radius).unwrap();
        let (left_vol, right_vol) =
            compute_cost_volumes(&left, &right, &stats_l, &stats_r, &params).unwrap();

        for v in 0..h {
            for u in 0..w {
                for d in 0..=d_max {
                    let got = left_vol.get(u, v, d);
                    match oracle_ncc(&left, &right, params.block_radius, u, v, d) {
                        Some(expected) => {
                            assert!(
                                (got - expected).abs() <= ORACLE_TOLERANCE,
                                "case {case}: ({u},{v},{d}) impl {got} vs oracle {expected}"
                            );
                            // twin write must be bit-exact
                            assert_eq!(
                                right_vol.get(u - d, v, d).to_bits(),
                                got.to_bits(),
                                "case {case}: twin volume mismatch at ({u},{v},{d})"
                            );
                            checked_entries += 1;
                        }
                        None => assert_eq!(
                            got, COST_SENTINEL,
                            "case {case}: ({u},{v},{d}) defined but oracle undefined"
                        ),
                    }
                }
            }
        }
    }

    let elapsed = started.elapsed().as_secs_f64();
    assert!(elapsed < 10.0, "criterion 1 took {elapsed:.2}s (limit 10s)");
    println!(
        "ACCEPTANCE criterion 1 (cost oracle, {pairs} pairs, {checked_entries} defined entries, \
         {elapsed:.2}s): PASS"
    );
}

#[test]
fn criterion_2_aggregation_matches_brute_force_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xA6_62);
    let volumes = 60usize;

    for case in 0..volumes {
        let w = rng.random_range(3..=9);
        let h = rng.random_range(3..=9);
        let depth = rng.random_range(2..=6);
        let rho = rng.random_range(0..=3usize);
        let gamma_d = rng.random_range(0.7..=8.0);
        let gamma_r = rng.random_range(3.0..=90.0);

        let volume = random_volume(&mut rng, w, h, depth);
        let guide = common::random_image(&mut rng, w, h);
        let spatial = build_spatial_weights(rho, gamma_d).unwrap();
        let range = build_range_weights(gamma_r).unwrap();
        let out = bilateral_aggregate(&volume, &guide, &spatial, &range).unwrap();

        for v in 0..h {
            for u in 0..w {
                for d in 0..depth {
                    let got = out.get(u, v, d);
                    let expected =
                        oracle_bilateral(&volume, &guide, rho, gamma_d, gamma_r, u, v, d);
                    if expected == COST_SENTINEL {
                        assert_eq!(got, COST_SENTINEL, "case {case}: ({u},{v},{d})");
                    } else {
                        assert!(
                            (got - expected).abs() <= ORACLE_TOLERANCE,
                            "case {case}: ({u},{v},{d}) impl {got} vs oracle {expected}"
                        );
                    }
                }
            }
        }

        // radius 0 is the identity
        if case < 10 {
            let identity = bilateral_aggregate(
                &volume,
                &guide,
                &build_spatial_weights(0, gamma_d).unwrap(),
                &range,
            )
            .unwrap();
            assert_eq!(identity, volume, "case {case}: rho=0 must be the identity");
        }

        // gamma -> infinity approaches the box average of defined neighbors
        if case < 10 {
            let boxed = bilateral_aggregate(
                &volume,
                &guide,
                &build_spatial_weights(rho, 1e9).unwrap(),
                &build_range_weights(1e9).unwrap(),
            )
            .unwrap();
            for v in 0..h {
                for u in 0..w {
                    for d in 0..depth {
                        let mut sum = 0.0;
                        let mut count = 0.0;
                        for y in v.saturating_sub(rho)..=(v + rho).min(h - 1) {
                            for x in u.saturating_sub(rho)..=(u + rho).min(w - 1) {
                                let c = volume.get(x, y, d);
                                if c != COST_SENTINEL {
                                    sum += c;
                                    count += 1.0;
                                }
                            }
                        }
                        let got = boxed.get(u, v, d);
                        if count > 0.0 {
                            assert!(
                                (got - sum / count).abs() <= ORACLE_TOLERANCE,
                                "case {case}: box average at ({u},{v},{d})"
                            );
                        } else {
                            assert_eq!(got, COST_SENTINEL);
                        }
                    }
                }
            }
        }
    }

    println!("ACCEPTANCE criterion 2 (aggregation oracle, {volumes} volumes): PASS");
}

#[test]
fn criterion_3_subpixel_unit_suite() {
    let refine_one = |costs: [f64; 3]| -> f64 {
        let mut vol = CostVolume::from_raw(1, 1, 0, 2, costs.to_vec()).unwrap();
        let _ = &mut vol;
        let mut disp = DisparityMap::new_invalid(1, 1);
        disp.set(0, 0, 1.0);
        subpixel_refine(&disp, &vol).get(0, 0)
    };

    // symmetric peak stays exactly on the integer
    assert_eq!(refine_one([0.5, 1.0, 0.5]), 1.0);
    // direct evaluation: offset (0.2-0.6)/(0.4+1.2-4.0) = 1/6
    assert!((refine_one([0.2, 1.0, 0.6]) - (1.0 + 1.0 / 6.0)).abs() < 1e-12);
    // flat column: guarded division keeps the integer
    assert_eq!(refine_one([0.7, 0.7, 0.7]), 1.0);

    // locality on random strict-max triples
    let mut rng = ChaCha8Rng::seed_from_u64(0x5B_91);
    let mut refined = 0usize;
    for _ in 0..10_000 {
        let center: f64 = rng.random_range(-0.8..=1.0);
        let prev = (center - rng.random_range(1e-9..=1.0)).max(-1.0);
        let next = (center - rng.random_range(1e-9..=1.0)).max(-1.0);
        let result = refine_one([prev, center, next]);
        assert!(
            (result - 1.0).abs() <= 0.5,
            "({prev}, {center}, {next}) -> {result}"
        );
        if result != 1.0 {
            refined += 1;
        }
    }
    assert!(refined > 9_000, "refinement should move most strict maxima");

    // symmetric triples refine exactly to the integer
    for _ in 0..1_000 {
        let center: f64 = rng.random_range(-0.8..=1.0);
        let side = (center - rng.random_range(1e-6..=1.0)).max(-1.0);
        assert_eq!(refine_one([side, center, side]), 1.0);
    }

    println!("ACCEPTANCE criterion 3 (subpixel unit suite, 10000 triples): PASS");
}

#[test]
fn criterion_4_pep_metric() {
    let gt = DisparityMap::from_raw(10, 1, vec![5.0; 10]).unwrap();
    let mask = RegionMask::full(10, 1, Region::All);

    // exact estimate -> 0%
    let score = compute_pep(&gt.clone(), &gt, &mask, 2.0, true).unwrap();
    assert_eq!(score.e_pep, 0.0);

    // |est - gt| == epsilon_d counts as correct (strict inequality)
    let boundary = DisparityMap::from_raw(1, 1, vec![7.0]).unwrap();
    let single_gt = DisparityMap::from_raw(1, 1, vec![5.0]).unwrap();
    let single_mask = RegionMask::full(1, 1, Region::All);
    let score = compute_pep(&boundary, &single_gt, &single_mask, 2.0, true).unwrap();
    assert_eq!(score.e_pep, 0.0);

    // 3 of 10 pixels off by epsilon_d + 1 -> 30%
    let mut est = gt.clone();
    for u in 0..3 {
        est.set(u, 0, 8.0);
    }
    let score = compute_pep(&est, &gt, &mask, 2.0, true).unwrap();
    assert_eq!(score.e_pep, 30.0);
    assert_eq!(score.evaluated, 10);

    println!("ACCEPTANCE criterion 4 (PEP metric): PASS");
}

fn non_occ_pep(run: &pipeline::PipelineRun) -> f64 {
    run.reports
        .iter()
        .find(|r| r.region == Region::NonOcc)
        .expect("non_occ report")
        .e_pep
}

#[test]
fn criterion_5_reference_accuracy_on_middlebury() {
    let mut ran = Vec::new();
    let mut missing = Vec::new();

    for &(name, reference) in REFERENCE_PEP {
        let Some(dataset) = common::try_load_dataset(name) else {
            missing.push(name);
            continue;
        };
        let cfg = RunConfig::new(dataset);
        let run = run_pipeline(&cfg).unwrap();
        let pep = non_occ_pep(&run);
        println!(
            "criterion 5 [{name}]: e_PEP(non_occ) {pep:.4} vs reference {reference:.4} \
             (tolerance +-{REFERENCE_PEP_TOLERANCE_PP}), total {:.2}s",
            run.times.total
        );
        assert!(
            (pep - reference).abs() <= REFERENCE_PEP_TOLERANCE_PP,
            "{name}: e_PEP {pep:.4} outside +-{REFERENCE_PEP_TOLERANCE_PP} of {reference:.4}"
        );
        assert!(
            run.times.total < DATASET_RUNTIME_LIMIT_S,
            "{name}: {:.2}s exceeds {DATASET_RUNTIME_LIMIT_S}s",
            run.times.total
        );
        ran.push(name);
    }

    if ran.is_empty() {
        println!(
            "ACCEPTANCE criterion 5 (reference accuracy): SKIP - datasets not prepared \
             ({}); run scripts/prepare_datasets.py",
            missing.join(", ")
        );
    } else if missing.is_empty() {
        println!("ACCEPTANCE criterion 5 (reference accuracy, 4 datasets): PASS");
    } else {
        println!(
            "ACCEPTANCE criterion 5 (reference accuracy): PASS on {} / SKIP on {} (not prepared)",
            ran.join(", "),
            missing.join(", ")
        );
    }
}

/// Runs a sweep and extracts the non-occluded error percentage per value.
fn sweep_pep(dataset: &DatasetSpec, axis: SweepAxis, values: &[f64]) -> Vec<f64> {
    let mut cfg = RunConfig::new(dataset.clone());
    cfg.sweep = Some(SweepSpec {
        axis,
        values: values.to_vec(),
    });
    run_sweep(&cfg)
        .unwrap()
        .into_iter()
        .map(|row| {
            let (reports, _) = row.outcome.expect("sweep point failed");
            reports
                .into_iter()
                .find(|r| r.region == Region::NonOcc)
                .expect("non_occ report")
                .e_pep
        })
        .collect()
}

fn argmin(values: &[f64]) -> usize {
    values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .unwrap()
        .0
}

#[test]
fn criterion_6_sweep_shapes_on_cones() {
    let Some(dataset) = common::try_load_dataset("cones") else {
        println!(
            "ACCEPTANCE criterion 6 (sweep shapes): SKIP - cones not prepared; \
             run scripts/prepare_datasets.py --only cones"
        );
        return;
    };

    // aggregation-radius sweep: non-increasing to a minimum in rho 5..=9,
    // never lower afterwards
    let rho_values: Vec<f64> = (1..=10).map(|v| v as f64).collect();
    let rho_pep = sweep_pep(&dataset, SweepAxis::RhoAgg, &rho_values);
    let best = argmin(&rho_pep);
    let best_rho = rho_values[best];
    println!("criterion 6 rho sweep: {rho_pep:.4?} (min at rho={best_rho})");
    assert!(
        (5.0..=9.0).contains(&best_rho),
        "rho minimum at {best_rho}, expected within [5, 9]"
    );
    for k in 0..best {
        assert!(
            rho_pep[k] + 1e-9 >= rho_pep[k + 1],
            "e_PEP must be non-increasing up to the minimum (rho {} -> {})",
            rho_values[k],
            rho_values[k + 1]
        );
    }
    for k in best + 1..rho_pep.len() {
        assert!(
            rho_pep[k] + 1e-9 >= rho_pep[best],
            "e_PEP after the minimum must not drop below it (rho {})",
            rho_values[k]
        );
    }

    // both gamma sweeps attain an interior minimum on the committed grids
    for (axis, grid) in [
        (SweepAxis::GammaD, &GAMMA_D_GRID[..]),
        (SweepAxis::GammaR, &GAMMA_R_GRID[..]),
    ] {
        let pep = sweep_pep(&dataset, axis, grid);
        let best = argmin(&pep);
        println!("criterion 6 {} sweep: {pep:.4?} (min at {})", axis.key(), grid[best]);
        assert!(
            best != 0 && best != grid.len() - 1,
            "{} sweep minimum must be interior, found at {}",
            axis.key(),
            grid[best]
        );
    }

    println!("ACCEPTANCE criterion 6 (sweep shapes on cones): PASS");
}

#[test]
fn criterion_7_throughput_and_worker_scaling_on_cones() {
    let Some(dataset) = common::try_load_dataset("cones") else {
        println!(
            "ACCEPTANCE criterion 7 (throughput/scaling): SKIP - cones not prepared; \
             run scripts/prepare_datasets.py --only cones"
        );
        return;
    };

    // throughput at the operating point (median of 5)
    let mut cfg = RunConfig::new(dataset.clone());
    cfg.repeat = 5;
    let run = run_pipeline(&cfg).unwrap();
    let mde = run.reports[0].mde_per_s;
    println!(
        "criterion 7: {:.2} Mde/s at rho=6 (median total {:.3}s, {} workers)",
        mde, run.times.total, cfg.workers
    );

    // runtime is monotonically non-decreasing in the aggregation radius
    let mut medians = Vec::new();
    for rho in [1usize, 2, 4, 6, 8, 10] {
        let mut sub = RunConfig::new(dataset.clone());
        sub.params.agg_radius = rho;
        sub.repeat = 5;
        let run = run_pipeline(&sub).unwrap();
        medians.push((rho, run.times.total));
    }
    println!("criterion 7 rho/runtime medians: {medians:?}");
    for pair in medians.windows(2) {
        assert!(
            pair[1].1 >= pair[0].1,
            "median runtime decreased from rho={} ({:.3}s) to rho={} ({:.3}s)",
            pair[0].0,
            pair[0].1,
            pair[1].0,
            pair[1].1
        );
    }

    // >= 2x speedup from 1 to 8 workers at rho=6
    let timed = |workers: usize| {
        let mut sub = RunConfig::new(dataset.clone());
        sub.workers = workers;
        sub.repeat = 5;
        run_pipeline(&sub).unwrap().times.total
    };
    let t1 = timed(1);
    let t8 = timed(8);
    let speedup = t1 / t8;
    println!("criterion 7 worker scaling: 1 worker {t1:.3}s, 8 workers {t8:.3}s, speedup {speedup:.2}x");
    assert!(
        speedup >= 2.0,
        "speedup {speedup:.2}x below the required 2.0x (needs >= 8 hardware threads)"
    );

    println!("ACCEPTANCE criterion 7 (throughput and worker scaling): PASS");
}

#[test]
fn criterion_8_determinism_across_worker_counts() {
    let scene = common::synthetic_scene(0xD1CE, 64, 48, 2, 7);
    let tmp = tempfile::tempdir().unwrap();
    let manifest = common::write_scene_dataset(&tmp.path().join("data"), &scene, 12);

    let worker_counts = [1, 2, pipeline::default_workers().max(4)];
    let mut digests = Vec::new();
    for workers in worker_counts {
        let dataset = DatasetSpec::from_manifest(&manifest).unwrap();
        let mut cfg = RunConfig::new(dataset);
        cfg.workers = workers;
        let out = tmp.path().join(format!("out_w{workers}"));
        cfg.output_dir = Some(out.clone());
        run_pipeline(&cfg).unwrap();
        let digest = Sha256::digest(fs::read(out.join("disp_left.pfm")).unwrap());
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        digests.push(hex);
    }
    assert_eq!(digests[0], digests[1], "workers 1 vs 2");
    assert_eq!(digests[0], digests[2], "workers 1 vs max");

    println!(
        "ACCEPTANCE criterion 8 (determinism across workers {:?}, sha256 {}): PASS",
        worker_counts,
        &digests[0][..16]
    );
}
