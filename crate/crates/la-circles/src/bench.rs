//! Synthetic scene generation, the weighted center/radius error score, and
//! seeded multi-trial statistics for method comparison.
//!
//! Scene specs are declarative text, one directive per line (`#` comments):
//!
//! ```text
//! size 200 200
//! noise 0.02
//! circle 100 100 40            # cx cy r [arc_span_deg] [thickness]
//! ellipse 100 100 42 38 15     # cx cy a b angle_deg
//! polygon 20,20 60,20 40,55    # closed vertex chain
//! line 0,0 199,120
//! occlude 80 80 30 30          # x y w h: erase edges inside the rectangle
//! ```

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::detector::{detect_multiple, DetectionResult, DetectorConfig};
use crate::edgemap::EdgeMap;
use crate::error::{Error, Result};
use crate::ga::{self, GaConfig};
use crate::geometry::{rasterize_circle, Circle};

/// Error-score weight on the center shift.
pub const ES_ETA: f64 = 0.05;
/// Error-score weight on the radius difference.
pub const ES_MU: f64 = 0.1;

/// An ellipse drawn this close to circular contributes a circle ground truth
/// of radius (a + b) / 2.
pub const IMPERFECT_CIRCLE_ECCENTRICITY: f64 = 0.15;

#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Circle {
        cx: f64,
        cy: f64,
        r: f64,
        /// Degrees of arc drawn counterclockwise from the +x axis; 360 is a
        /// full circle.
        arc_span_deg: f64,
        /// Number of consecutive integer radii drawn around `r`.
        thickness: u32,
    },
    Ellipse {
        cx: f64,
        cy: f64,
        a: f64,
        b: f64,
        angle_deg: f64,
    },
    Polygon {
        vertices: Vec<(f64, f64)>,
    },
    Line {
        p1: (f64, f64),
        p2: (f64, f64),
    },
}

/// Axis-aligned occlusion rectangle; drawn edges inside it are erased.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

/// Declarative description of a synthetic test scene.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneSpec {
    pub width: usize,
    pub height: usize,
    pub shapes: Vec<Shape>,
    pub noise_fraction: f64,
    pub occlusions: Vec<Rect>,
}

/// Known circle parameters a detection is scored against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundTruthCircle {
    pub x: f64,
    pub y: f64,
    pub r: f64,
}

/// Aggregates over a batch of seeded runs.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct TrialStats {
    pub runs: usize,
    /// Percentage of runs whose every ground truth was matched with ES < 1.
    pub success_rate: f64,
    pub mean_es: f64,
    pub std_es: f64,
    pub mean_time_s: f64,
    pub std_time_s: f64,
}

/// Detection method under benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    La,
    Ga,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::La => "la",
            Method::Ga => "ga",
        }
    }
}

/// Outcome of one seeded run: detected circles, the per-run error score (the
/// worst matched-pair ES; `None` when some ground truth went unmatched) and
/// the detection wall time.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub run: usize,
    pub seed: u64,
    pub method: Method,
    pub detections: Vec<DetectionResult>,
    pub es: Option<f64>,
    pub success: bool,
    pub time_s: f64,
}

impl SceneSpec {
    /// Parses the line-oriented scene format. Malformed input reports the
    /// offending line number.
    pub fn parse(text: &str) -> Result<Self> {
        let mut width = None;
        let mut height = None;
        let mut shapes = Vec::new();
        let mut noise_fraction = 0.0;
        let mut occlusions = Vec::new();

        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let bad = |detail: String| Error::SceneSpec {
                line: line_no,
                detail,
            };
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut tok = line.split_whitespace();
            let key = tok.next().unwrap();
            let rest: Vec<&str> = tok.collect();
            let floats = |args: &[&str]| -> Result<Vec<f64>> {
                args.iter()
                    .map(|a| {
                        a.parse::<f64>()
                            .map_err(|_| bad(format!("expected a number, got '{a}'")))
                    })
                    .collect()
            };
            match key {
                "size" => {
                    let v = floats(&rest)?;
                    if v.len() != 2 || v[0] < 1.0 || v[1] < 1.0 {
                        return Err(bad("size takes two positive integers".into()));
                    }
                    width = Some(v[0] as usize);
                    height = Some(v[1] as usize);
                }
                "noise" => {
                    let v = floats(&rest)?;
                    if v.len() != 1 || !(0.0..1.0).contains(&v[0]) {
                        return Err(bad("noise takes one fraction in [0, 1)".into()));
                    }
                    noise_fraction = v[0];
                }
                "circle" => {
                    let v = floats(&rest)?;
                    if !(3..=5).contains(&v.len()) {
                        return Err(bad("circle takes cx cy r [arc_span_deg] [thickness]".into()));
                    }
                    shapes.push(Shape::Circle {
                        cx: v[0],
                        cy: v[1],
                        r: v[2],
                        arc_span_deg: v.get(3).copied().unwrap_or(360.0),
                        thickness: v.get(4).copied().unwrap_or(1.0).max(1.0) as u32,
                    });
                }
                "ellipse" => {
                    let v = floats(&rest)?;
                    if v.len() != 5 {
                        return Err(bad("ellipse takes cx cy a b angle_deg".into()));
                    }
                    shapes.push(Shape::Ellipse {
                        cx: v[0],
                        cy: v[1],
                        a: v[2],
                        b: v[3],
                        angle_deg: v[4],
                    });
                }
                "polygon" => {
                    let vertices = parse_point_list(&rest)
                        .map_err(|d| bad(d))?;
                    if vertices.len() < 3 {
                        return Err(bad("polygon needs at least 3 vertices".into()));
                    }
                    shapes.push(Shape::Polygon { vertices });
                }
                "line" => {
                    let pts = parse_point_list(&rest).map_err(|d| bad(d))?;
                    if pts.len() != 2 {
                        return Err(bad("line takes exactly two x,y points".into()));
                    }
                    shapes.push(Shape::Line {
                        p1: pts[0],
                        p2: pts[1],
                    });
                }
                "occlude" => {
                    let v = floats(&rest)?;
                    if v.len() != 4 {
                        return Err(bad("occlude takes x y w h".into()));
                    }
                    occlusions.push(Rect {
                        x: v[0],
                        y: v[1],
                        w: v[2],
                        h: v[3],
                    });
                }
                other => return Err(bad(format!("unknown directive '{other}'"))),
            }
        }

        let (width, height) = match (width, height) {
            (Some(w), Some(h)) => (w, h),
            _ => {
                return Err(Error::SceneSpec {
                    line: 0,
                    detail: "missing 'size W H' directive".into(),
                })
            }
        };
        Ok(Self {
            width,
            height,
            shapes,
            noise_fraction,
            occlusions,
        })
    }

    /// Convenience constructor for a plain scene: full circles plus noise.
    pub fn circles(width: usize, height: usize, circles: &[(f64, f64, f64)], noise: f64) -> Self {
        Self {
            width,
            height,
            shapes: circles
                .iter()
                .map(|&(cx, cy, r)| Shape::Circle {
                    cx,
                    cy,
                    r,
                    arc_span_deg: 360.0,
                    thickness: 1,
                })
                .collect(),
            noise_fraction: noise,
            occlusions: Vec::new(),
        }
    }
}

fn parse_point_list(args: &[&str]) -> std::result::Result<Vec<(f64, f64)>, String> {
    args.iter()
        .map(|a| {
            let (x, y) = a
                .split_once(',')
                .ok_or_else(|| format!("expected x,y pair, got '{a}'"))?;
            let x: f64 = x.trim().parse().map_err(|_| format!("bad x in '{a}'"))?;
            let y: f64 = y.trim().parse().map_err(|_| format!("bad y in '{a}'"))?;
            Ok((x, y))
        })
        .collect()
}

/// Rasterizes the scene into an edge map and reports the circle ground
/// truths (full or arc circles always; an ellipse only when close enough to
/// circular). Noise sets `round(noise_fraction * w * h)` distinct, seeded,
/// previously dark pixels to edge.
pub fn generate_scene(spec: &SceneSpec, seed: u64) -> Result<(EdgeMap, Vec<GroundTruthCircle>)> {
    if spec.width == 0 || spec.height == 0 {
        return Err(Error::Dimension("scene needs a positive size".into()));
    }
    if !(0.0..1.0).contains(&spec.noise_fraction) {
        return Err(Error::InvalidParameter(format!(
            "noise fraction must lie in [0, 1), got {}",
            spec.noise_fraction
        )));
    }
    let (w, h) = (spec.width, spec.height);
    let mut em = EdgeMap::new(w, h);
    let mut truths = Vec::new();

    for (i, shape) in spec.shapes.iter().enumerate() {
        let before = em.edge_count();
        match shape {
            Shape::Circle {
                cx,
                cy,
                r,
                arc_span_deg,
                thickness,
            } => {
                draw_circle_shape(&mut em, *cx, *cy, *r, *arc_span_deg, *thickness)?;
                truths.push(GroundTruthCircle {
                    x: *cx,
                    y: *cy,
                    r: *r,
                });
            }
            Shape::Ellipse {
                cx,
                cy,
                a,
                b,
                angle_deg,
            } => {
                draw_ellipse(&mut em, *cx, *cy, *a, *b, *angle_deg);
                if (a - b).abs() / a.max(*b) <= IMPERFECT_CIRCLE_ECCENTRICITY {
                    truths.push(GroundTruthCircle {
                        x: *cx,
                        y: *cy,
                        r: (a + b) / 2.0,
                    });
                }
            }
            Shape::Polygon { vertices } => {
                for k in 0..vertices.len() {
                    draw_segment(&mut em, vertices[k], vertices[(k + 1) % vertices.len()]);
                }
            }
            Shape::Line { p1, p2 } => draw_segment(&mut em, *p1, *p2),
        }
        if em.edge_count() == before {
            return Err(Error::SceneSpec {
                line: 0,
                detail: format!("shape {} lies fully outside the image bounds", i + 1),
            });
        }
    }

    for rect in &spec.occlusions {
        let x_lo = rect.x.max(0.0) as usize;
        let y_lo = rect.y.max(0.0) as usize;
        let x_hi = ((rect.x + rect.w).min(w as f64 - 1.0)).max(0.0) as usize;
        let y_hi = ((rect.y + rect.h).min(h as f64 - 1.0)).max(0.0) as usize;
        for y in y_lo..=y_hi {
            for x in x_lo..=x_hi {
                em.set(x, y, false);
            }
        }
    }

    let flips = (spec.noise_fraction * (w * h) as f64).round() as usize;
    if flips > 0 {
        let mut dark: Vec<(usize, usize)> = Vec::with_capacity(w * h - em.edge_count());
        for y in 0..h {
            for x in 0..w {
                if !em.get(x, y) {
                    dark.push((x, y));
                }
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = flips.min(dark.len());
        for i in 0..k {
            let j = rng.gen_range(i..dark.len());
            dark.swap(i, j);
            let (x, y) = dark[i];
            em.set(x, y, true);
        }
    }

    Ok((em, truths))
}

fn draw_circle_shape(
    em: &mut EdgeMap,
    cx: f64,
    cy: f64,
    r: f64,
    arc_span_deg: f64,
    thickness: u32,
) -> Result<()> {
    let base = r.round() as i64;
    let t = thickness.max(1) as i64;
    for radius in (base - (t - 1) / 2)..=(base + t / 2) {
        if radius < 1 {
            continue;
        }
        let ts = rasterize_circle(&Circle::new(cx, cy, radius as f64), em.width(), em.height())?;
        for (x, y) in ts.points {
            if arc_span_deg < 360.0 {
                let mut angle = (y as f64 - cy).atan2(x as f64 - cx).to_degrees();
                if angle < 0.0 {
                    angle += 360.0;
                }
                if angle > arc_span_deg {
                    continue;
                }
            }
            em.set(x, y, true);
        }
    }
    Ok(())
}

/// Parametric per-degree stepping with rounding; duplicates collapse into
/// the bitmap.
fn draw_ellipse(em: &mut EdgeMap, cx: f64, cy: f64, a: f64, b: f64, angle_deg: f64) {
    let phi = angle_deg.to_radians();
    let (sin_p, cos_p) = phi.sin_cos();
    for deg in 0..360 {
        let t = (deg as f64).to_radians();
        let (ex, ey) = (a * t.cos(), b * t.sin());
        let x = (cx + ex * cos_p - ey * sin_p).round();
        let y = (cy + ex * sin_p + ey * cos_p).round();
        if x >= 0.0 && y >= 0.0 && (x as usize) < em.width() && (y as usize) < em.height() {
            em.set(x as usize, y as usize, true);
        }
    }
}

/// Integer line stepping between two rounded endpoints.
fn draw_segment(em: &mut EdgeMap, p1: (f64, f64), p2: (f64, f64)) {
    let (mut x, mut y) = (p1.0.round() as i64, p1.1.round() as i64);
    let (x1, y1) = (p2.0.round() as i64, p2.1.round() as i64);
    let dx = (x1 - x).abs();
    let dy = -(y1 - y).abs();
    let sx = if x < x1 { 1 } else { -1 };
    let sy = if y < y1 { 1 } else { -1 };
    let mut err = dx + dy;
    loop {
        if x >= 0 && y >= 0 && (x as usize) < em.width() && (y as usize) < em.height() {
            em.set(x as usize, y as usize, true);
        }
        if x == x1 && y == y1 {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x += sx;
        }
        if e2 <= dx {
            err += dx;
            y += sy;
        }
    }
}

/// Weighted mismatch between a ground truth and a detected circle:
/// `eta * (|dx| + |dy|) + mu * |dr|`. Detection succeeds when the score is
/// below 1.
pub fn error_score(truth: &GroundTruthCircle, det: &Circle, eta: f64, mu: f64) -> f64 {
    debug_assert!(eta > 0.0 && mu > 0.0);
    eta * ((truth.x - det.x0).abs() + (truth.y - det.y0).abs()) + mu * (truth.r - det.r).abs()
}

/// Greedy nearest-center assignment of detections to ground truths (each
/// truth used at most once); returns the worst matched ES, or `None` when
/// some truth went unmatched.
pub fn score_detections(truths: &[GroundTruthCircle], detections: &[Circle]) -> Option<f64> {
    if truths.is_empty() {
        return Some(0.0);
    }
    let mut used = vec![false; truths.len()];
    let mut matched = 0;
    let mut worst: f64 = 0.0;
    for det in detections {
        let mut best: Option<(usize, f64)> = None;
        for (t, truth) in truths.iter().enumerate() {
            if used[t] {
                continue;
            }
            let d = (truth.x - det.x0).hypot(truth.y - det.y0);
            if best.map_or(true, |(_, bd)| d < bd) {
                best = Some((t, d));
            }
        }
        if let Some((t, _)) = best {
            used[t] = true;
            matched += 1;
            worst = worst.max(error_score(&truths[t], det, ES_ETA, ES_MU));
        }
    }
    (matched == truths.len()).then_some(worst)
}

/// Runs `runs` seeded trials of one method over a scene and aggregates
/// success rate, error score and detection wall time.
///
/// Run `i` uses seed `base_seed + i` for both the scene noise (fresh scene
/// per run unless `reuse_scene`) and the detector. The LA method extracts up
/// to one circle per ground truth via masking; the GA baseline detects a
/// single circle.
pub fn run_trials(
    spec: &SceneSpec,
    method: Method,
    runs: usize,
    base_seed: u64,
    det_cfg: &DetectorConfig,
    ga_cfg: &GaConfig,
    reuse_scene: bool,
) -> Result<(TrialStats, Vec<RunRecord>)> {
    if runs == 0 {
        return Err(Error::InvalidParameter("runs must be at least 1".into()));
    }
    let base_scene = if reuse_scene {
        Some(generate_scene(spec, base_seed)?)
    } else {
        None
    };

    let mut records = Vec::with_capacity(runs);
    for run in 0..runs {
        let seed = base_seed + run as u64;
        let (em, truths) = match &base_scene {
            Some(s) => s.clone(),
            None => generate_scene(spec, seed)?,
        };
        let start = Instant::now();
        let detections: Vec<DetectionResult> = match method {
            Method::La => detect_multiple(&em, det_cfg, seed, truths.len().max(1)),
            Method::Ga => ga::detect(&em, ga_cfg, det_cfg, seed).into_iter().collect(),
        };
        let time_s = start.elapsed().as_secs_f64();
        let circles: Vec<Circle> = detections.iter().map(|d| d.circle).collect();
        let es = score_detections(&truths, &circles);
        let success = es.map_or(false, |v| v < 1.0);
        records.push(RunRecord {
            run,
            seed,
            method,
            detections,
            es,
            success,
            time_s,
        });
    }

    Ok((aggregate(&records), records))
}

fn aggregate(records: &[RunRecord]) -> TrialStats {
    let runs = records.len();
    let successes = records.iter().filter(|r| r.success).count();
    let es_values: Vec<f64> = records.iter().filter_map(|r| r.es).collect();
    let times: Vec<f64> = records.iter().map(|r| r.time_s).collect();
    let (mean_es, std_es) = mean_std(&es_values);
    let (mean_time_s, std_time_s) = mean_std(&times);
    TrialStats {
        runs,
        success_rate: 100.0 * successes as f64 / runs as f64,
        mean_es,
        std_es,
        mean_time_s,
        std_time_s,
    }
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}
