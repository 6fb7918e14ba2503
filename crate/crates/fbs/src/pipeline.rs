//! Pipeline runner and parameter-sweep driver.
//!
//! A run executes cost computation, bilateral aggregation, winner-take-all
//! on both volumes, the left-right consistency check, and subpixel
//! refinement, in that order, then evaluates the result against ground truth
//! per region of interest. Wall-clock timing covers the compute stages only,
//! never file I/O; with `repeat > 1` the reported times are medians.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::aggregation::{build_range_weights, build_spatial_weights, bilateral_aggregate};
use crate::cost::{compute_block_stats, compute_cost_volumes};
use crate::dataset::{load_ground_truth, write_disparity, DatasetSpec, DisparityEncoding};
use crate::disparity::DisparityMap;
use crate::error::{FbsError, Result};
use crate::evaluation::{
    compute_mde_s, compute_pep, load_region_mask, EvalReport, Region, RegionMask,
};
use crate::image::GrayImage;
use crate::optimization::{lrc_check, subpixel_refine, wta_disparity};
use crate::params::FbsParams;
use crate::pnm;
use crate::volume::CostVolume;

/// Which optional stages run.
#[derive(Debug, Clone, Copy)]
pub struct StageToggles {
    pub aggregation: bool,
    pub lrc: bool,
    pub subpixel: bool,
}

impl Default for StageToggles {
    fn default() -> Self {
        Self {
            aggregation: true,
            lrc: true,
            subpixel: true,
        }
    }
}

/// Parameter a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    GammaD,
    GammaR,
    RhoAgg,
}

impl SweepAxis {
    pub fn key(self) -> &'static str {
        match self {
            SweepAxis::GammaD => "gamma_d",
            SweepAxis::GammaR => "gamma_r",
            SweepAxis::RhoAgg => "rho_agg",
        }
    }

    pub fn from_key(key: &str) -> Option<Self> {
        match key {
            "gamma_d" => Some(SweepAxis::GammaD),
            "gamma_r" => Some(SweepAxis::GammaR),
            "rho_agg" | "rho" => Some(SweepAxis::RhoAgg),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

/// Everything one invocation needs: dataset, tunables, stage toggles,
/// worker count, timing repetitions, and output destination.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub dataset: DatasetSpec,
    /// Manifest the dataset came from, recorded in `config.txt`.
    pub manifest: Option<PathBuf>,
    pub params: FbsParams,
    pub stages: StageToggles,
    pub workers: usize,
    /// Timing repetitions; reported times are medians across them.
    pub repeat: usize,
    pub count_invalid_as_error: bool,
    pub output_dir: Option<PathBuf>,
    pub sweep: Option<SweepSpec>,
}

impl RunConfig {
    /// Config with library defaults and the dataset's disparity range.
    pub fn new(dataset: DatasetSpec) -> Self {
        let params = FbsParams {
            d_min: dataset.d_min,
            d_max: dataset.d_max,
            ..FbsParams::default()
        };
        Self {
            dataset,
            manifest: None,
            params,
            stages: StageToggles::default(),
            workers: default_workers(),
            repeat: 1,
            count_invalid_as_error: true,
            output_dir: None,
            sweep: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.workers < 1 {
            return Err(FbsError::InvalidParameter {
                name: "workers",
                value: self.workers as f64,
                reason: "must be at least 1",
            });
        }
        if self.repeat < 1 {
            return Err(FbsError::InvalidParameter {
                name: "repeat",
                value: self.repeat as f64,
                reason: "must be at least 1",
            });
        }
        if let Some(sweep) = &self.sweep {
            if sweep.values.is_empty() {
                return Err(FbsError::InvalidParameter {
                    name: "sweep",
                    value: 0.0,
                    reason: "value list is empty",
                });
            }
            for pair in sweep.values.windows(2) {
                if pair[0] >= pair[1] {
                    return Err(FbsError::InvalidParameter {
                        name: "sweep",
                        value: pair[1],
                        reason: "values must be strictly increasing",
                    });
                }
            }
            if !sweep.values[0].is_finite() || sweep.values[0] <= 0.0 {
                return Err(FbsError::InvalidParameter {
                    name: "sweep",
                    value: sweep.values[0],
                    reason: "values must be positive",
                });
            }
        }
        Ok(())
    }
}

pub fn default_workers() -> usize {
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}

/// Per-stage wall-clock seconds.
#[derive(Debug, Clone, Copy, Default)]
pub struct StageTimes {
    pub cost: f64,
    pub aggregation: f64,
    pub wta: f64,
    pub lrc: f64,
    pub subpixel: f64,
    pub total: f64,
}

/// Result of one pipeline invocation.
#[derive(Debug)]
pub struct PipelineRun {
    pub reports: Vec<EvalReport>,
    pub times: StageTimes,
    /// Final left disparity map (after the enabled refinement stages).
    pub disparity: DisparityMap,
}

/// One entry of a sweep: either the per-region reports and times for this
/// value, or the error that run produced.
#[derive(Debug)]
pub struct SweepRow {
    pub value: f64,
    pub outcome: std::result::Result<(Vec<EvalReport>, StageTimes), String>,
}

/// Runs the full pipeline for one configuration.
pub fn run_pipeline(cfg: &RunConfig) -> Result<PipelineRun> {
    cfg.validate()?;
    let ds = &cfg.dataset;

    let left = pnm::load_image(&ds.left).map_err(|e| e.in_stage("load"))?;
    let right = pnm::load_image(&ds.right).map_err(|e| e.in_stage("load"))?;
    if left.dimensions() != right.dimensions() {
        return Err(FbsError::DimensionMismatch {
            context: "run_pipeline: stereo pair",
            expected: format!("{:?}", left.dimensions()),
            actual: format!("{:?}", right.dimensions()),
        }
        .in_stage("load"));
    }
    let gt = load_ground_truth(&ds.gt, ds.gt_scale).map_err(|e| e.in_stage("load"))?;
    if gt.dimensions() != left.dimensions() {
        return Err(FbsError::DimensionMismatch {
            context: "run_pipeline: ground truth",
            expected: format!("{:?}", left.dimensions()),
            actual: format!("{:?}", gt.dimensions()),
        }
        .in_stage("load"));
    }

    let (w, h) = left.dimensions();
    let mut masks = vec![RegionMask::full(w, h, Region::All)];
    let mut have_non_occ = false;
    for (region, path) in &ds.masks {
        masks.push(
            load_region_mask(path, *region, (w, h)).map_err(|e| e.in_stage("evaluation"))?,
        );
        have_non_occ |= *region == Region::NonOcc;
    }
    if !have_non_occ {
        // With no occlusion mask on file, the gt-invalid exclusion is the
        // non-occlusion region (Middlebury 2003-style ground truth).
        masks.insert(1, RegionMask::full(w, h, Region::NonOcc));
    }

    let mut sampled_times = Vec::with_capacity(cfg.repeat);
    let mut disparity = None;
    for _ in 0..cfg.repeat {
        let out = with_pool(cfg.workers, || {
            execute_stages(&left, &right, &cfg.params, &cfg.stages)
        })?;
        sampled_times.push(out.1);
        disparity = Some(out.0);
    }
    let disparity = disparity.expect("repeat >= 1");
    let times = median_times(&sampled_times);

    let mde_per_s =
        compute_mde_s(w, h, cfg.params.d_max, times.total).map_err(|e| e.in_stage("evaluation"))?;
    let mut reports = Vec::with_capacity(masks.len());
    for mask in &masks {
        let score = compute_pep(
            &disparity,
            &gt,
            mask,
            cfg.params.epsilon_d,
            cfg.count_invalid_as_error,
        )
        .map_err(|e| e.in_stage("evaluation"))?;
        reports.push(EvalReport {
            region: mask.region(),
            e_pep: score.e_pep,
            evaluated: score.evaluated,
            params: cfg.params,
            runtime_seconds: times.total,
            mde_per_s,
        });
    }

    if let Some(dir) = &cfg.output_dir {
        write_run_artifacts(cfg, dir, &disparity, &reports, &times)?;
    }

    Ok(PipelineRun {
        reports,
        times,
        disparity,
    })
}

/// Runs the pipeline once per sweep value, everything else held constant.
/// A failing value contributes an error row and the sweep continues.
pub fn run_sweep(cfg: &RunConfig) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let sweep = cfg.sweep.clone().ok_or(FbsError::InvalidParameter {
        name: "sweep",
        value: 0.0,
        reason: "sweep axis not set",
    })?;

    let mut rows = Vec::with_capacity(sweep.values.len());
    for &value in &sweep.values {
        let mut sub = cfg.clone();
        sub.sweep = None;
        sub.output_dir = None;
        let outcome = apply_axis(&mut sub.params, sweep.axis, value)
            .and_then(|()| run_pipeline(&sub))
            .map(|run| (run.reports, run.times))
            .map_err(|e| e.to_string());
        rows.push(SweepRow { value, outcome });
    }

    if let Some(dir) = &cfg.output_dir {
        create_dir(dir)?;
        let mut csv = String::from(METRICS_HEADER);
        for row in &rows {
            match &row.outcome {
                Ok((reports, times)) => {
                    for report in reports {
                        csv.push_str(&metrics_row(
                            cfg,
                            Some((sweep.axis, row.value)),
                            Some(report),
                            Some(times),
                            None,
                        ));
                    }
                }
                Err(message) => {
                    csv.push_str(&metrics_row(
                        cfg,
                        Some((sweep.axis, row.value)),
                        None,
                        None,
                        Some(message),
                    ));
                }
            }
        }
        write_file(&dir.join("metrics.csv"), csv.as_bytes())?;
        write_file(&dir.join("config.txt"), render_config(cfg).as_bytes())?;
    }

    Ok(rows)
}

fn apply_axis(params: &mut FbsParams, axis: SweepAxis, value: f64) -> Result<()> {
    match axis {
        SweepAxis::GammaD => params.gamma_d = value,
        SweepAxis::GammaR => params.gamma_r = value,
        SweepAxis::RhoAgg => {
            if value < 0.0 || value.fract() != 0.0 {
                return Err(FbsError::InvalidParameter {
                    name: "rho_agg",
                    value,
                    reason: "must be a non-negative integer",
                });
            }
            params.agg_radius = value as usize;
        }
    }
    Ok(())
}

/// Runs the staged computation inside a worker pool of the requested size.
/// Without the `parallel` feature the worker count is ignored.
fn with_pool<T, F>(workers: usize, work: F) -> Result<T>
where
    T: Send,
    F: FnOnce() -> Result<T> + Send,
{
    #[cfg(feature = "parallel")]
    {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| FbsError::WorkerPool(e.to_string()))?;
        pool.install(work)
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = workers;
        work()
    }
}

fn execute_stages(
    left: &GrayImage,
    right: &GrayImage,
    params: &FbsParams,
    stages: &StageToggles,
) -> Result<(DisparityMap, StageTimes)> {
    let start = Instant::now();
    let mut times = StageTimes::default();

    let t = Instant::now();
    let stats_left =
        compute_block_stats(left, params.block_radius).map_err(|e| e.in_stage("cost"))?;
    let stats_right =
        compute_block_stats(right, params.block_radius).map_err(|e| e.in_stage("cost"))?;
    let (left_vol, right_vol) =
        compute_cost_volumes(left, right, &stats_left, &stats_right, params)
            .map_err(|e| e.in_stage("cost"))?;
    times.cost = t.elapsed().as_secs_f64();

    let (left_vol, right_vol) = if stages.aggregation {
        let t = Instant::now();
        let pair = aggregate_pair(left_vol, right_vol, left, right, params)
            .map_err(|e| e.in_stage("aggregation"))?;
        times.aggregation = t.elapsed().as_secs_f64();
        pair
    } else {
        (left_vol, right_vol)
    };

    let t = Instant::now();
    let left_disp = wta_disparity(&left_vol);
    let right_disp = wta_disparity(&right_vol);
    drop(right_vol);
    times.wta = t.elapsed().as_secs_f64();

    let filtered = if stages.lrc {
        let t = Instant::now();
        let filtered = lrc_check(&left_disp, &right_disp, params.lrc_tolerance)
            .map_err(|e| e.in_stage("lrc"))?;
        times.lrc = t.elapsed().as_secs_f64();
        filtered
    } else {
        left_disp
    };

    let refined = if stages.subpixel {
        let t = Instant::now();
        let refined = subpixel_refine(&filtered, &left_vol);
        times.subpixel = t.elapsed().as_secs_f64();
        refined
    } else {
        filtered
    };

    times.total = start.elapsed().as_secs_f64();
    Ok((refined, times))
}

/// Aggregates both volumes, consuming the raw ones as soon as each side is
/// filtered to bound peak memory.
fn aggregate_pair(
    left_vol: CostVolume,
    right_vol: CostVolume,
    left: &GrayImage,
    right: &GrayImage,
    params: &FbsParams,
) -> Result<(CostVolume, CostVolume)> {
    let spatial = build_spatial_weights(params.agg_radius, params.gamma_d)?;
    let range = build_range_weights(params.gamma_r)?;
    let left_agg = bilateral_aggregate(&left_vol, left, &spatial, &range)?;
    drop(left_vol);
    let right_agg = bilateral_aggregate(&right_vol, right, &spatial, &range)?;
    Ok((left_agg, right_agg))
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(|a, b| a.partial_cmp(b).expect("finite times"));
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

fn median_times(samples: &[StageTimes]) -> StageTimes {
    let pick = |f: fn(&StageTimes) -> f64| median(samples.iter().map(f).collect());
    StageTimes {
        cost: pick(|t| t.cost),
        aggregation: pick(|t| t.aggregation),
        wta: pick(|t| t.wta),
        lrc: pick(|t| t.lrc),
        subpixel: pick(|t| t.subpixel),
        total: pick(|t| t.total),
    }
}

const METRICS_HEADER: &str = "dataset,region,sweep_axis,sweep_value,rho_ncc,rho_agg,gamma_d,\
                              gamma_r,d_min,d_max,epsilon_d,lrc_tolerance,workers,e_pep,evaluated,\
                              t_cost_s,t_agg_s,t_wta_s,t_lrc_s,t_subpixel_s,t_total_s,mde_per_s,error\n";

fn metrics_row(
    cfg: &RunConfig,
    sweep: Option<(SweepAxis, f64)>,
    report: Option<&EvalReport>,
    times: Option<&StageTimes>,
    error: Option<&str>,
) -> String {
    let params = report.map(|r| r.params).unwrap_or(cfg.params);
    let (axis, value) = match sweep {
        Some((axis, value)) => (axis.key().to_string(), format!("{value}")),
        None => (String::new(), String::new()),
    };
    let (region, e_pep, evaluated, mde) = match report {
        Some(r) => (
            r.region.label().to_string(),
            format!("{:.4}", r.e_pep),
            r.evaluated.to_string(),
            format!("{:.2}", r.mde_per_s),
        ),
        None => (String::new(), String::new(), String::new(), String::new()),
    };
    let fmt_t = |t: f64| format!("{t:.6}");
    let (tc, ta, tw, tl, ts, tt) = match times {
        Some(t) => (
            fmt_t(t.cost),
            fmt_t(t.aggregation),
            fmt_t(t.wta),
            fmt_t(t.lrc),
            fmt_t(t.subpixel),
            fmt_t(t.total),
        ),
        None => Default::default(),
    };
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
        cfg.dataset.name,
        region,
        axis,
        value,
        params.block_radius,
        params.agg_radius,
        params.gamma_d,
        params.gamma_r,
        params.d_min,
        params.d_max,
        params.epsilon_d,
        params.lrc_tolerance,
        cfg.workers,
        e_pep,
        evaluated,
        tc,
        ta,
        tw,
        tl,
        ts,
        tt,
        mde,
        error.unwrap_or("").replace(',', ";"),
    )
}

/// Serializes the resolved configuration as `key = value` lines so a run can
/// be reproduced from its output directory.
fn render_config(cfg: &RunConfig) -> String {
    let mut out = String::new();
    let mut kv = |k: &str, v: String| {
        out.push_str(k);
        out.push_str(" = ");
        out.push_str(&v);
        out.push('\n');
    };
    kv("name", cfg.dataset.name.clone());
    if let Some(manifest) = &cfg.manifest {
        kv("manifest", manifest.display().to_string());
    }
    kv("left", cfg.dataset.left.display().to_string());
    kv("right", cfg.dataset.right.display().to_string());
    kv("gt", cfg.dataset.gt.display().to_string());
    kv("gt_scale", format!("{}", cfg.dataset.gt_scale));
    kv("rho_ncc", format!("{}", cfg.params.block_radius));
    kv("rho_agg", format!("{}", cfg.params.agg_radius));
    kv("gamma_d", format!("{}", cfg.params.gamma_d));
    kv("gamma_r", format!("{}", cfg.params.gamma_r));
    kv("d_min", format!("{}", cfg.params.d_min));
    kv("d_max", format!("{}", cfg.params.d_max));
    kv("epsilon_d", format!("{}", cfg.params.epsilon_d));
    kv("lrc_tolerance", format!("{}", cfg.params.lrc_tolerance));
    kv("aggregation", format!("{}", cfg.stages.aggregation));
    kv("lrc", format!("{}", cfg.stages.lrc));
    kv("subpixel", format!("{}", cfg.stages.subpixel));
    kv("workers", format!("{}", cfg.workers));
    kv("repeat", format!("{}", cfg.repeat));
    kv(
        "count_invalid_as_error",
        format!("{}", cfg.count_invalid_as_error),
    );
    if let Some(sweep) = &cfg.sweep {
        let values: Vec<String> = sweep.values.iter().map(|v| v.to_string()).collect();
        kv("sweep", format!("{}={}", sweep.axis.key(), values.join(",")));
    }
    out
}

fn write_run_artifacts(
    cfg: &RunConfig,
    dir: &Path,
    disparity: &DisparityMap,
    reports: &[EvalReport],
    times: &StageTimes,
) -> Result<()> {
    create_dir(dir)?;
    write_disparity(
        disparity,
        &dir.join("disp_left.pgm"),
        DisparityEncoding::GrayScaled {
            scale: cfg.dataset.gt_scale,
        },
    )?;
    write_disparity(disparity, &dir.join("disp_left.pfm"), DisparityEncoding::Pfm)?;

    let (w, h) = disparity.dimensions();
    let mask_bytes: Vec<u8> = disparity
        .data()
        .iter()
        .map(|d| if d.is_finite() { 255 } else { 0 })
        .collect();
    pnm::write_pgm(&dir.join("lrc_mask.pgm"), w, h, &mask_bytes)?;

    let mut csv = String::from(METRICS_HEADER);
    for report in reports {
        csv.push_str(&metrics_row(cfg, None, Some(report), Some(times), None));
    }
    write_file(&dir.join("metrics.csv"), csv.as_bytes())?;
    write_file(&dir.join("config.txt"), render_config(cfg).as_bytes())?;
    Ok(())
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|source| FbsError::Io {
        path: dir.to_path_buf(),
        source,
    })
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut file = fs::File::create(path).map_err(|source| FbsError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    file.write_all(bytes).map_err(|source| FbsError::Io {
        path: path.to_path_buf(),
        source,
    })
}
