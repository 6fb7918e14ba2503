//! Benchmark runner for the fast bilateral stereo pipeline.
//!
//! One invocation runs the full pipeline on a dataset manifest and prints
//! per-region accuracy plus stage timings; `--sweep` runs it once per
//! parameter value instead. With `--out` the run writes `disp_left.pgm`,
//! `disp_left.pfm`, `lrc_mask.pgm`, `metrics.csv`, and `config.txt`.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{ArgAction, Parser};

use fbs::pipeline::{self, RunConfig, StageToggles, SweepAxis, SweepSpec};
use fbs::{DatasetSpec, EvalReport};

#[derive(Parser, Debug)]
#[command(name = "fbs", version, about = "Fast bilateral stereo benchmark runner")]
struct Args {
    /// Dataset manifest (`key = value` lines; see datasets/*.manifest)
    #[arg(long)]
    dataset: PathBuf,

    /// Correlation block half-width
    #[arg(long)]
    rho_ncc: Option<usize>,

    /// Aggregation window half-width
    #[arg(long)]
    rho: Option<usize>,

    /// Spatial falloff of the aggregation weights
    #[arg(long)]
    gamma_d: Option<f64>,

    /// Intensity falloff of the aggregation weights
    #[arg(long)]
    gamma_r: Option<f64>,

    /// Smallest disparity hypothesis (default: manifest value)
    #[arg(long)]
    dmin: Option<usize>,

    /// Largest disparity hypothesis (default: manifest value)
    #[arg(long)]
    dmax: Option<usize>,

    /// Error threshold of the PEP metric
    #[arg(long)]
    epsilon_d: Option<f64>,

    /// Left-right consistency tolerance in pixels
    #[arg(long)]
    lrc_tol: Option<f64>,

    /// Skip bilateral aggregation (pure NCC + WTA baseline)
    #[arg(long)]
    no_agg: bool,

    /// Skip the left-right consistency check
    #[arg(long)]
    no_lrc: bool,

    /// Skip subpixel refinement
    #[arg(long)]
    no_subpixel: bool,

    /// Worker threads (default: all cores; ignored in sequential builds)
    #[arg(long)]
    workers: Option<usize>,

    /// Sweep one parameter: gamma_d=v1,v2,... | gamma_r=... | rho=...
    #[arg(long)]
    sweep: Option<String>,

    /// Output directory for disparity maps, metrics.csv, and config.txt
    #[arg(long)]
    out: Option<PathBuf>,

    /// Timing repetitions; reported times are medians
    #[arg(long, default_value_t = 1)]
    repeat: usize,

    /// Count invalid (LRC-rejected) estimates as errors in the PEP metric
    #[arg(long, default_value_t = true, action = ArgAction::Set)]
    count_invalid_as_error: bool,
}

fn main() -> Result<()> {
    let args = Args::parse();

    let dataset = DatasetSpec::from_manifest(&args.dataset)
        .with_context(|| format!("loading dataset manifest {}", args.dataset.display()))?;

    let mut cfg = RunConfig::new(dataset);
    cfg.manifest = Some(args.dataset.clone());
    if let Some(v) = args.rho_ncc {
        cfg.params.block_radius = v;
    }
    if let Some(v) = args.rho {
        cfg.params.agg_radius = v;
    }
    if let Some(v) = args.gamma_d {
        cfg.params.gamma_d = v;
    }
    if let Some(v) = args.gamma_r {
        cfg.params.gamma_r = v;
    }
    if let Some(v) = args.dmin {
        cfg.params.d_min = v;
    }
    if let Some(v) = args.dmax {
        cfg.params.d_max = v;
    }
    if let Some(v) = args.epsilon_d {
        cfg.params.epsilon_d = v;
    }
    if let Some(v) = args.lrc_tol {
        cfg.params.lrc_tolerance = v;
    }
    cfg.stages = StageToggles {
        aggregation: !args.no_agg,
        lrc: !args.no_lrc,
        subpixel: !args.no_subpixel,
    };
    if let Some(v) = args.workers {
        cfg.workers = v;
    }
    cfg.repeat = args.repeat;
    cfg.count_invalid_as_error = args.count_invalid_as_error;
    cfg.output_dir = args.out.clone();
    cfg.sweep = args.sweep.as_deref().map(parse_sweep).transpose()?;

    println!(
        "{}: {} d=[{},{}] rho_ncc={} rho={} gamma_d={} gamma_r={} workers={} repeat={}",
        cfg.dataset.name,
        cfg.dataset.left.display(),
        cfg.params.d_min,
        cfg.params.d_max,
        cfg.params.block_radius,
        cfg.params.agg_radius,
        cfg.params.gamma_d,
        cfg.params.gamma_r,
        cfg.workers,
        cfg.repeat,
    );

    if cfg.sweep.is_some() {
        run_sweep(&cfg)
    } else {
        run_single(&cfg)
    }
}

fn run_single(cfg: &RunConfig) -> Result<()> {
    let run = pipeline::run_pipeline(cfg)?;
    let t = &run.times;
    println!(
        "stage times (s): cost {:.3}  agg {:.3}  wta {:.3}  lrc {:.3}  subpixel {:.3}  total {:.3}",
        t.cost, t.aggregation, t.wta, t.lrc, t.subpixel, t.total
    );
    if let Some(report) = run.reports.first() {
        println!("throughput: {:.2} Mde/s", report.mde_per_s);
    }
    print_reports(&run.reports);
    if let Some(dir) = &cfg.output_dir {
        println!("artifacts written to {}", dir.display());
    }
    Ok(())
}

fn run_sweep(cfg: &RunConfig) -> Result<()> {
    let axis = cfg.sweep.as_ref().expect("sweep set").axis;
    let rows = pipeline::run_sweep(cfg)?;
    println!("{:>12}  {:>15}  {:>9}  {:>10}  {:>9}", axis.key(), "region", "e_PEP", "t_total_s", "Mde/s");
    for row in &rows {
        match &row.outcome {
            Ok((reports, times)) => {
                for report in reports {
                    println!(
                        "{:>12}  {:>15}  {:>8.4}%  {:>10.3}  {:>9.2}",
                        row.value,
                        report.region.label(),
                        report.e_pep,
                        times.total,
                        report.mde_per_s
                    );
                }
            }
            Err(message) => println!("{:>12}  error: {}", row.value, message),
        }
    }
    if let Some(dir) = &cfg.output_dir {
        println!("sweep table written to {}", dir.join("metrics.csv").display());
    }
    Ok(())
}

fn print_reports(reports: &[EvalReport]) {
    println!("{:>15}  {:>9}  {:>9}", "region", "e_PEP", "N");
    for report in reports {
        println!(
            "{:>15}  {:>8.4}%  {:>9}",
            report.region.label(),
            report.e_pep,
            report.evaluated
        );
    }
}

fn parse_sweep(text: &str) -> Result<SweepSpec> {
    let Some((axis_key, values_text)) = text.split_once('=') else {
        bail!("--sweep expects `axis=v1,v2,...`, got `{text}`");
    };
    let Some(axis) = SweepAxis::from_key(axis_key.trim()) else {
        bail!("unknown sweep axis `{axis_key}` (expected gamma_d, gamma_r, or rho)");
    };
    let values = values_text
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .with_context(|| format!("bad sweep value `{v}`"))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(SweepSpec { axis, values })
}
