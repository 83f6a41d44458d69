//! Command-line front end: `detect`, `multi`, `generate` and `bench`
//! subcommands over the library pipeline.
//!
//! Exit codes: 0 when at least one circle was found (or the command
//! completed), 2 for the legitimate "no circle detected" reply, 1 for any
//! error including bad flags. Reports are single-line JSON records with a
//! fixed field order and contain no timing, so a repeated invocation with
//! the same seed writes byte-identical files.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::bench::{run_trials, Method, RunRecord, SceneSpec, TrialStats};
use crate::detector::{
    detect_multiple, detect_one, DetectionResult, DetectorConfig, RadiusMaxRule,
};
use crate::edgemap::{canny, load_edge_map, load_gray, save_edge_map, save_pgm, EdgeMap, GrayImage};
use crate::error::{Error, Result};
use crate::ga::{self, GaConfig};
use crate::geometry::rasterize_circle;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_NO_CIRCLE: i32 = 2;

/// Environment variable consulted for the seed when no `--seed`/`--base-seed`
/// flag is given.
pub const SEED_ENV_VAR: &str = "LA_CIRCLES_SEED";

#[derive(Parser)]
#[command(
    name = "la-circles",
    version,
    about = "Circle detection on edge images with a learning automaton"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Detect a single circle in an image or edge map
    Detect(DetectArgs),
    /// Extract multiple circles by repeated detection and masking
    Multi(MultiArgs),
    /// Render a scene spec into an edge map plus a ground-truth sidecar
    Generate(GenerateArgs),
    /// Run seeded trials of one method over a scene and summarize
    Bench(BenchArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    La,
    Ga,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RmaxRuleArg {
    /// max(width, height) / 2
    Max,
    /// min(width, height) / 2
    Min,
}

#[derive(Args, Clone, Copy, Serialize)]
struct EdgeFlags {
    /// Gaussian smoothing sigma (pixels) for the Canny stage
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    /// Canny low hysteresis threshold, as a fraction of the max gradient
    #[arg(long, default_value_t = 0.1)]
    canny_low: f64,
    /// Canny high hysteresis threshold, as a fraction of the max gradient
    #[arg(long, default_value_t = 0.3)]
    canny_high: f64,
}

#[derive(Args, Clone, Copy)]
struct DetectorFlags {
    /// Learning rate of the reward/inaction update
    #[arg(long, default_value_t = 0.003)]
    theta: f64,
    /// Learning cycles as a fraction of the candidate count
    #[arg(long, default_value_t = 0.5)]
    kmax_factor: f64,
    /// Fraction of edge pixels sampled into the working vector
    #[arg(long, default_value_t = 0.05)]
    sample_fraction: f64,
    /// Cap on the candidate action count
    #[arg(long, default_value_t = 5000)]
    max_candidates: usize,
    /// Minimum acceptable match score; below it the reply is "no circle"
    #[arg(long, default_value_t = 0.1)]
    mth: f64,
    /// Early-stop match score; >= 1 disables the early stop
    #[arg(long, default_value_t = 0.95)]
    beta_stop: f64,
    /// Minimum candidate radius (exclusive)
    #[arg(long, default_value_t = 8.0)]
    r_min: f64,
    /// Radius cap rule
    #[arg(long, value_enum, default_value_t = RmaxRuleArg::Max)]
    rmax_rule: RmaxRuleArg,
    /// Half-width of the band masked around an accepted circle
    #[arg(long, default_value_t = 2.0)]
    mask_width: f64,
    /// Minimum contiguous-arc fraction for a detection to be accepted
    #[arg(long, default_value_t = 0.25)]
    continuity_min: f64,
}

impl DetectorFlags {
    fn to_config(self) -> DetectorConfig {
        DetectorConfig {
            theta: self.theta,
            kmax_factor: self.kmax_factor,
            sample_fraction: self.sample_fraction,
            r_min: self.r_min,
            r_max_rule: match self.rmax_rule {
                RmaxRuleArg::Max => RadiusMaxRule::HalfMaxDim,
                RmaxRuleArg::Min => RadiusMaxRule::HalfMinDim,
            },
            max_candidates: self.max_candidates,
            m_th: self.mth,
            beta_stop: self.beta_stop,
            mask_width: self.mask_width,
            continuity_min: self.continuity_min,
        }
    }
}

#[derive(Args)]
struct DetectArgs {
    /// Input image (PGM P2/P5 or PNG)
    input: PathBuf,
    /// Treat the input as a precomputed edge map (nonzero = edge)
    #[arg(long)]
    edges: bool,
    /// Detection method
    #[arg(long, value_enum, default_value_t = MethodArg::La)]
    method: MethodArg,
    #[command(flatten)]
    edge_flags: EdgeFlags,
    #[command(flatten)]
    det: DetectorFlags,
    /// RNG seed (falls back to $LA_CIRCLES_SEED, then 0)
    #[arg(long)]
    seed: Option<u64>,
    /// Write a PNG with the detected circles drawn over the source
    #[arg(long)]
    overlay: Option<PathBuf>,
    /// Write a single-line JSON report here
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct MultiArgs {
    #[command(flatten)]
    base: DetectArgs,
    /// Stop after this many accepted circles
    #[arg(long, default_value_t = 8)]
    max_circles: usize,
}

#[derive(Args)]
struct GenerateArgs {
    /// Scene spec file
    spec: PathBuf,
    /// Output edge map (P5 PGM)
    #[arg(long)]
    out: PathBuf,
    /// Optional grayscale rendering of the scene outlines
    #[arg(long)]
    render: Option<PathBuf>,
    /// Ground-truth sidecar path (default: <out>.truth.jsonl)
    #[arg(long)]
    truth: Option<PathBuf>,
    /// RNG seed (falls back to $LA_CIRCLES_SEED, then 0)
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct BenchArgs {
    /// Scene spec file
    spec: PathBuf,
    /// Detection method
    #[arg(long, value_enum, default_value_t = MethodArg::La)]
    method: MethodArg,
    /// Number of seeded runs
    #[arg(long, default_value_t = 65)]
    runs: usize,
    /// First seed; run i uses base_seed + i
    #[arg(long)]
    base_seed: Option<u64>,
    /// Generate the scene once instead of fresh noise per run
    #[arg(long)]
    reuse_scene: bool,
    #[command(flatten)]
    det: DetectorFlags,
    /// Write per-run records plus a summary as JSON lines (no timing)
    #[arg(long)]
    report: Option<PathBuf>,
}

/// Parses the process arguments, dispatches, and returns the exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_ERROR,
            };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Detect(args) => cmd_detect(args, None),
        Command::Multi(args) => {
            let max = args.max_circles;
            cmd_detect(args.base, Some(max))
        }
        Command::Generate(args) => cmd_generate(args),
        Command::Bench(args) => cmd_bench(args),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

fn resolve_seed(flag: Option<u64>) -> u64 {
    flag.or_else(|| {
        std::env::var(SEED_ENV_VAR)
            .ok()
            .and_then(|v| v.parse().ok())
    })
    .unwrap_or(0)
}

#[derive(Serialize)]
struct CircleRecord {
    x0: f64,
    y0: f64,
    r: f64,
    beta: f64,
    probability: f64,
}

#[derive(Serialize)]
struct ConfigEcho {
    edges: bool,
    sigma: f64,
    canny_low: f64,
    canny_high: f64,
    theta: f64,
    kmax_factor: f64,
    sample_fraction: f64,
    max_candidates: usize,
    mth: f64,
    beta_stop: f64,
    r_min: f64,
    rmax_rule: &'static str,
    mask_width: f64,
    continuity_min: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_circles: Option<usize>,
}

/// One-line JSON detection report. Timing is deliberately not part of the
/// file so reruns with the same seed are byte-identical; elapsed time goes
/// to stdout.
#[derive(Serialize)]
struct CliReport {
    input: String,
    method: &'static str,
    seed: u64,
    config: ConfigEcho,
    circles: Vec<CircleRecord>,
}

fn load_input_map(input: &Path, edges: bool, ef: &EdgeFlags) -> Result<(EdgeMap, Option<GrayImage>)> {
    if edges {
        Ok((load_edge_map(input)?, None))
    } else {
        let gray = load_gray(input)?;
        let em = canny(&gray, ef.sigma, ef.canny_low, ef.canny_high)?;
        Ok((em, Some(gray)))
    }
}

fn cmd_detect(args: DetectArgs, max_circles: Option<usize>) -> Result<i32> {
    let seed = resolve_seed(args.seed);
    let cfg = args.det.to_config();
    cfg.validate()?;
    let (em, gray) = load_input_map(&args.input, args.edges, &args.edge_flags)?;

    let start = Instant::now();
    let detections: Vec<DetectionResult> = match (max_circles, args.method) {
        (Some(max), _) => detect_multiple(&em, &cfg, seed, max),
        (None, MethodArg::La) => match detect_one(&em, &cfg, seed) {
            Ok(r) if r.beta >= cfg.m_th => vec![r],
            Ok(_) => vec![],
            Err(Error::NoCandidates) | Err(Error::InsufficientData(_)) => vec![],
            Err(e) => return Err(e),
        },
        (None, MethodArg::Ga) => match ga::detect(&em, &GaConfig::default(), &cfg, seed) {
            Ok(r) if r.beta >= cfg.m_th => vec![r],
            Ok(_) => vec![],
            Err(Error::NoCandidates) | Err(Error::InsufficientData(_)) => vec![],
            Err(e) => return Err(e),
        },
    };
    let elapsed = start.elapsed().as_secs_f64();

    let method = match args.method {
        MethodArg::La => "la",
        MethodArg::Ga => "ga",
    };
    let report = CliReport {
        input: args.input.display().to_string(),
        method,
        seed,
        config: ConfigEcho {
            edges: args.edges,
            sigma: args.edge_flags.sigma,
            canny_low: args.edge_flags.canny_low,
            canny_high: args.edge_flags.canny_high,
            theta: cfg.theta,
            kmax_factor: cfg.kmax_factor,
            sample_fraction: cfg.sample_fraction,
            max_candidates: cfg.max_candidates,
            mth: cfg.m_th,
            beta_stop: cfg.beta_stop,
            r_min: cfg.r_min,
            rmax_rule: match cfg.r_max_rule {
                RadiusMaxRule::HalfMaxDim => "max",
                RadiusMaxRule::HalfMinDim => "min",
            },
            mask_width: cfg.mask_width,
            continuity_min: cfg.continuity_min,
            max_circles,
        },
        circles: detections
            .iter()
            .map(|d| CircleRecord {
                x0: d.circle.x0,
                y0: d.circle.y0,
                r: d.circle.r,
                beta: d.beta,
                probability: d.probability,
            })
            .collect(),
    };

    if let Some(path) = &args.report {
        write_json_line(path, &report)?;
    }
    if let Some(path) = &args.overlay {
        write_overlay(path, &em, gray.as_ref(), &detections)?;
    }

    if detections.is_empty() {
        println!("no circle detected (elapsed {elapsed:.3}s, seed {seed})");
        return Ok(EXIT_NO_CIRCLE);
    }
    for d in &detections {
        println!(
            "circle x0={:.3} y0={:.3} r={:.3} beta={:.4} probability={:.6} iterations={} candidates={}",
            d.circle.x0, d.circle.y0, d.circle.r, d.beta, d.probability, d.iterations, d.n_candidates
        );
    }
    println!(
        "{} circle(s) found by {method} in {elapsed:.3}s (seed {seed})",
        detections.len()
    );
    Ok(EXIT_OK)
}

fn write_json_line<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut line = serde_json::to_string(value).expect("report serialization");
    line.push('\n');
    fs::write(path, line).map_err(|e| Error::Io {
        path: path.into(),
        source: e,
    })
}

/// Draws each detected circle in red at one-pixel width over the source
/// image (or over a rendering of the edge map when the input was one).
fn write_overlay(
    path: &Path,
    em: &EdgeMap,
    gray: Option<&GrayImage>,
    detections: &[DetectionResult],
) -> Result<()> {
    let (w, h) = (em.width(), em.height());
    let mut rgb = image::RgbImage::new(w as u32, h as u32);
    for y in 0..h {
        for x in 0..w {
            let v = match gray {
                Some(g) => g.get(x, y),
                None => {
                    if em.get(x, y) {
                        255
                    } else {
                        0
                    }
                }
            };
            rgb.put_pixel(x as u32, y as u32, image::Rgb([v, v, v]));
        }
    }
    for d in detections {
        if let Ok(ts) = rasterize_circle(&d.circle, w, h) {
            for (x, y) in ts.points {
                rgb.put_pixel(x as u32, y as u32, image::Rgb([255, 0, 0]));
            }
        }
    }
    rgb.save_with_format(path, image::ImageFormat::Png)
        .map_err(|e| Error::Format {
            path: path.into(),
            detail: format!("overlay: {e}"),
        })
}

#[derive(Serialize)]
struct TruthRecord {
    x: f64,
    y: f64,
    r: f64,
}

fn cmd_generate(args: GenerateArgs) -> Result<i32> {
    let seed = resolve_seed(args.seed);
    let text = fs::read_to_string(&args.spec).map_err(|e| Error::Io {
        path: args.spec.clone(),
        source: e,
    })?;
    let spec = SceneSpec::parse(&text)?;
    let (em, truths) = crate::bench::generate_scene(&spec, seed)?;

    save_edge_map(&em, &args.out)?;
    if let Some(render) = &args.render {
        let pixels = (0..em.height())
            .flat_map(|y| (0..em.width()).map(move |x| (x, y)))
            .map(|(x, y)| if em.get(x, y) { 255 } else { 0 })
            .collect();
        save_pgm(&GrayImage::new(em.width(), em.height(), pixels)?, render)?;
    }

    let truth_path = args
        .truth
        .unwrap_or_else(|| PathBuf::from(format!("{}.truth.jsonl", args.out.display())));
    let mut lines = String::new();
    for t in &truths {
        let record = TruthRecord {
            x: t.x,
            y: t.y,
            r: t.r,
        };
        lines.push_str(&serde_json::to_string(&record).expect("truth serialization"));
        lines.push('\n');
    }
    fs::write(&truth_path, lines).map_err(|e| Error::Io {
        path: truth_path.clone(),
        source: e,
    })?;

    println!(
        "wrote {} ({} edge pixels) and {} ({} ground truths), seed {seed}",
        args.out.display(),
        em.edge_count(),
        truth_path.display(),
        truths.len()
    );
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct BenchRunRecord {
    record: &'static str,
    run: usize,
    seed: u64,
    method: &'static str,
    circles: Vec<CircleRecord>,
    es: Option<f64>,
    success: bool,
}

#[derive(Serialize)]
struct BenchSummaryRecord {
    record: &'static str,
    method: &'static str,
    #[serde(flatten)]
    stats: TrialStatsSansTiming,
}

#[derive(Serialize)]
struct TrialStatsSansTiming {
    runs: usize,
    success_rate: f64,
    mean_es: f64,
    std_es: f64,
}

fn cmd_bench(args: BenchArgs) -> Result<i32> {
    let base_seed = resolve_seed(args.base_seed);
    let text = fs::read_to_string(&args.spec).map_err(|e| Error::Io {
        path: args.spec.clone(),
        source: e,
    })?;
    let spec = SceneSpec::parse(&text)?;
    let cfg = args.det.to_config();
    cfg.validate()?;
    let method = match args.method {
        MethodArg::La => Method::La,
        MethodArg::Ga => Method::Ga,
    };

    let (stats, records) = run_trials(
        &spec,
        method,
        args.runs,
        base_seed,
        &cfg,
        &GaConfig::default(),
        args.reuse_scene,
    )?;

    // Per-run detail log, timing included, always on stdout.
    for r in &records {
        print_run_record(r);
    }
    print_summary(method, &stats);

    if let Some(path) = &args.report {
        let mut out = String::new();
        for r in &records {
            let record = BenchRunRecord {
                record: "run",
                run: r.run,
                seed: r.seed,
                method: r.method.name(),
                circles: r
                    .detections
                    .iter()
                    .map(|d| CircleRecord {
                        x0: d.circle.x0,
                        y0: d.circle.y0,
                        r: d.circle.r,
                        beta: d.beta,
                        probability: d.probability,
                    })
                    .collect(),
                es: r.es,
                success: r.success,
            };
            out.push_str(&serde_json::to_string(&record).expect("record serialization"));
            out.push('\n');
        }
        let summary = BenchSummaryRecord {
            record: "summary",
            method: method.name(),
            stats: TrialStatsSansTiming {
                runs: stats.runs,
                success_rate: stats.success_rate,
                mean_es: stats.mean_es,
                std_es: stats.std_es,
            },
        };
        out.push_str(&serde_json::to_string(&summary).expect("summary serialization"));
        out.push('\n');
        fs::write(path, out).map_err(|e| Error::Io {
            path: path.into(),
            source: e,
        })?;
    }
    Ok(EXIT_OK)
}

fn print_run_record(r: &RunRecord) {
    let (x, y, rad, beta) = r
        .detections
        .first()
        .map(|d| (d.circle.x0, d.circle.y0, d.circle.r, d.beta))
        .unwrap_or((f64::NAN, f64::NAN, f64::NAN, 0.0));
    println!(
        "run={} seed={} method={} x={:.3} y={:.3} r={:.3} beta={:.4} es={} time_s={:.4}",
        r.run,
        r.seed,
        r.method.name(),
        x,
        y,
        rad,
        beta,
        r.es.map_or("none".to_string(), |v| format!("{v:.4}")),
        r.time_s
    );
}

fn print_summary(method: Method, stats: &TrialStats) {
    println!(
        "summary method={} runs={} time_s={:.4}±{:.4} sr={:.1}% es={:.4}±{:.4}",
        method.name(),
        stats.runs,
        stats.mean_time_s,
        stats.std_time_s,
        stats.success_rate,
        stats.mean_es,
        stats.std_es
    );
}
