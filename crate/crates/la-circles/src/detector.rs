//! The learning-automaton circle detector: candidate actions from edge-point
//! triples, the edge-match reinforcement signal, the learning loop and
//! multi-circle extraction by masking.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::automaton::{ProbabilityVector, Reinforcement};
use crate::edgemap::{sample_edge_points, EdgeMap, EdgePointVector, DEFAULT_SAMPLE_FLOOR};
use crate::error::{Error, Result};
use crate::geometry::{circle_from_three_points, rasterize_circle, Circle};
use crate::seeding::derive_seed;

/// Above this triple-space size, distinct random draws go through rejection
/// sampling instead of a materialized shuffled enumeration.
const PERMUTATION_LIMIT: u128 = 1 << 20;

/// Upper bound on the allowed candidate radius.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RadiusMaxRule {
    /// `max(width, height) / 2` — admits circles larger than the short image
    /// dimension.
    HalfMaxDim,
    /// `min(width, height) / 2`.
    HalfMinDim,
}

/// Tuning knobs for the detector. Defaults: learning rate 0.003 with a cycle
/// budget of half the action count, 5% edge sampling, radii in
/// (8, max(w, h)/2), at most 5000 candidate actions, multi-circle stop at
/// beta < 0.1 and early stop at beta >= 0.95.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorConfig {
    /// Learning rate of the reward/inaction update, in (0, 1).
    pub theta: f64,
    /// Learning cycles as a fraction of the candidate count, in (0, 1].
    pub kmax_factor: f64,
    /// Fraction of edge pixels sampled into the working vector, in (0, 1].
    pub sample_fraction: f64,
    /// Candidates with radius <= r_min are discarded.
    pub r_min: f64,
    /// Rule for the maximum admissible radius.
    pub r_max_rule: RadiusMaxRule,
    /// Cap on the candidate action count; the triple space is enumerated
    /// exhaustively when it fits under the cap.
    pub max_candidates: usize,
    /// Multi-circle extraction stops once the best match drops below this.
    pub m_th: f64,
    /// A learning cycle that evaluates a match at or above this value stops
    /// early; values >= 1 disable the early stop.
    pub beta_stop: f64,
    /// Half-width in pixels of the band cleared around a detected circle.
    pub mask_width: f64,
    /// Minimum fraction of the circumference covered by the longest
    /// contiguous matched arc for a detection to be accepted.
    pub continuity_min: f64,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            theta: 0.003,
            kmax_factor: 0.5,
            sample_fraction: 0.05,
            r_min: 8.0,
            r_max_rule: RadiusMaxRule::HalfMaxDim,
            max_candidates: 5000,
            m_th: 0.1,
            beta_stop: 0.95,
            mask_width: 2.0,
            continuity_min: 0.25,
        }
    }
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(0.0 < self.theta && self.theta < 1.0) {
            return bad(format!("theta must lie in (0, 1), got {}", self.theta));
        }
        if !(0.0 < self.kmax_factor && self.kmax_factor <= 1.0) {
            return bad(format!(
                "kmax_factor must lie in (0, 1], got {}",
                self.kmax_factor
            ));
        }
        if !(0.0 < self.sample_fraction && self.sample_fraction <= 1.0) {
            return bad(format!(
                "sample_fraction must lie in (0, 1], got {}",
                self.sample_fraction
            ));
        }
        if !(0.0 < self.m_th && self.m_th < 1.0) {
            return bad(format!("m_th must lie in (0, 1), got {}", self.m_th));
        }
        if !(self.beta_stop > 0.0) {
            return bad(format!("beta_stop must be positive, got {}", self.beta_stop));
        }
        if self.max_candidates == 0 {
            return bad("max_candidates must be at least 1".into());
        }
        if !(self.r_min >= 0.0) {
            return bad(format!("r_min must be non-negative, got {}", self.r_min));
        }
        if !(self.mask_width >= 0.0) {
            return bad(format!(
                "mask_width must be non-negative, got {}",
                self.mask_width
            ));
        }
        if !(0.0 < self.continuity_min && self.continuity_min <= 1.0) {
            return bad(format!(
                "continuity_min must lie in (0, 1], got {}",
                self.continuity_min
            ));
        }
        Ok(())
    }

    fn r_max(&self, width: usize, height: usize) -> f64 {
        match self.r_max_rule {
            RadiusMaxRule::HalfMaxDim => width.max(height) as f64 / 2.0,
            RadiusMaxRule::HalfMinDim => width.min(height) as f64 / 2.0,
        }
    }
}

/// One automaton action: a canonical triple of edge-point indices and the
/// circle those points determine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CandidateAction {
    pub i1: usize,
    pub i2: usize,
    pub i3: usize,
    pub circle: Circle,
}

/// The surviving actions after the radius filter and duplicate elimination.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSet {
    pub actions: Vec<CandidateAction>,
}

/// A detected circle with its match score, winning probability and run
/// provenance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionResult {
    pub circle: Circle,
    pub beta: f64,
    pub probability: f64,
    pub iterations: usize,
    pub n_candidates: usize,
    pub seed: u64,
}

/// Builds the candidate action set from triples of sampled edge points.
///
/// When the triple space fits under `cfg.max_candidates` every combination is
/// tried; otherwise distinct triples are drawn uniformly at random with the
/// given seed, replacing discarded draws, until the cap is reached or the
/// space is exhausted. A triple is discarded when its points are collinear,
/// its radius falls outside (r_min, r_max) or its circle quantizes to an
/// already-kept (x0, y0, r).
pub fn generate_candidates(
    pts: &EdgePointVector,
    width: usize,
    height: usize,
    cfg: &DetectorConfig,
    seed: u64,
) -> Result<CandidateSet> {
    let n = pts.len();
    if n < 3 {
        return Err(Error::InsufficientData(format!(
            "{n} edge points cannot form a triple"
        )));
    }
    let r_max = cfg.r_max(width, height);
    let total = n_choose_3(n);

    let mut seen_circles: HashSet<(i64, i64, i64)> = HashSet::new();
    let mut actions: Vec<CandidateAction> = Vec::new();

    if total <= cfg.max_candidates as u128 {
        for i1 in 0..n {
            for i2 in i1 + 1..n {
                for i3 in i2 + 1..n {
                    try_triple(pts, i1, i2, i3, cfg.r_min, r_max, &mut seen_circles, &mut actions);
                }
            }
        }
    } else if total <= PERMUTATION_LIMIT {
        // Distinct uniform draws == a random permutation prefix.
        let mut triples = Vec::with_capacity(total as usize);
        for i1 in 0..n {
            for i2 in i1 + 1..n {
                for i3 in i2 + 1..n {
                    triples.push((i1, i2, i3));
                }
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let len = triples.len();
        for i in 0..len {
            let j = rng.gen_range(i..len);
            triples.swap(i, j);
            let (i1, i2, i3) = triples[i];
            try_triple(pts, i1, i2, i3, cfg.r_min, r_max, &mut seen_circles, &mut actions);
            if actions.len() >= cfg.max_candidates {
                break;
            }
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut seen_triples: HashSet<(usize, usize, usize)> = HashSet::new();
        while actions.len() < cfg.max_candidates && (seen_triples.len() as u128) < total {
            let mut idx = [0usize; 3];
            idx[0] = rng.gen_range(0..n);
            loop {
                idx[1] = rng.gen_range(0..n);
                if idx[1] != idx[0] {
                    break;
                }
            }
            loop {
                idx[2] = rng.gen_range(0..n);
                if idx[2] != idx[0] && idx[2] != idx[1] {
                    break;
                }
            }
            idx.sort_unstable();
            if seen_triples.insert((idx[0], idx[1], idx[2])) {
                try_triple(pts, idx[0], idx[1], idx[2], cfg.r_min, r_max, &mut seen_circles, &mut actions);
            }
        }
    }

    if actions.is_empty() {
        return Err(Error::NoCandidates);
    }
    Ok(CandidateSet { actions })
}

fn n_choose_3(n: usize) -> u128 {
    let n = n as u128;
    n * (n - 1) * (n - 2) / 6
}

fn make_candidate(
    pts: &EdgePointVector,
    i1: usize,
    i2: usize,
    i3: usize,
    r_min: f64,
    r_max: f64,
) -> Option<CandidateAction> {
    let circle = circle_from_three_points(
        pts.points[i1].as_f64(),
        pts.points[i2].as_f64(),
        pts.points[i3].as_f64(),
    )
    .ok()?;
    (circle.r > r_min && circle.r < r_max).then_some(CandidateAction { i1, i2, i3, circle })
}

/// Filters one triple and appends it unless its quantized circle repeats an
/// earlier candidate.
#[allow(clippy::too_many_arguments)]
fn try_triple(
    pts: &EdgePointVector,
    i1: usize,
    i2: usize,
    i3: usize,
    r_min: f64,
    r_max: f64,
    seen_circles: &mut HashSet<(i64, i64, i64)>,
    actions: &mut Vec<CandidateAction>,
) {
    if let Some(action) = make_candidate(pts, i1, i2, i3, r_min, r_max) {
        let key = (
            action.circle.x0.round() as i64,
            action.circle.y0.round() as i64,
            action.circle.r.round() as i64,
        );
        if seen_circles.insert(key) {
            actions.push(action);
        }
    }
}

/// Match score in [0, 1]: the fraction of the circle's in-bounds rasterized
/// test points that land on edge pixels.
pub fn match_score(c: &Circle, em: &EdgeMap) -> Result<f64> {
    let ts = rasterize_circle(c, em.width(), em.height())?;
    if ts.n_total == 0 {
        return Err(Error::ZeroSupport);
    }
    let hits = ts.points.iter().filter(|&&(x, y)| em.get(x, y)).count();
    Ok(hits as f64 / ts.n_total as f64)
}

/// Runs one full detection: sample edge points, build the action set, learn
/// for `ceil(kmax_factor * n_c)` cycles and return the winning circle.
///
/// Each cycle selects an action by roulette, scores it against the edge map
/// (scores are memoized; the signal is a pure function of the action) and
/// applies the reward/inaction update. A score at or above `beta_stop` ends
/// the run with that action as the solution; otherwise the highest-probability
/// action wins at the cycle limit.
pub fn detect_one(em: &EdgeMap, cfg: &DetectorConfig, seed: u64) -> Result<DetectionResult> {
    detect_one_inner(em, cfg, seed, true)
}

fn detect_one_inner(
    em: &EdgeMap,
    cfg: &DetectorConfig,
    seed: u64,
    memoize: bool,
) -> Result<DetectionResult> {
    cfg.validate()?;
    let pts = sample_edge_points(em, cfg.sample_fraction, DEFAULT_SAMPLE_FLOOR, derive_seed(seed, 0))?;
    let candidates = generate_candidates(&pts, em.width(), em.height(), cfg, derive_seed(seed, 1))?;
    let n_c = candidates.actions.len();

    let mut memo: Vec<Option<f64>> = vec![None; n_c];
    let score = |a: usize, memo: &mut Vec<Option<f64>>| -> f64 {
        if memoize {
            if let Some(b) = memo[a] {
                return b;
            }
        }
        // A candidate whose rounded ring falls entirely outside the image has
        // no support; it simply never earns a reward.
        let beta = match_score(&candidates.actions[a].circle, em).unwrap_or(0.0);
        memo[a] = Some(beta);
        beta
    };

    let mut p = ProbabilityVector::uniform(n_c)?;
    let kmax = ((cfg.kmax_factor * n_c as f64).ceil() as usize).max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 2));
    let mut iterations = 0;
    let mut early_winner = None;
    for k in 0..kmax {
        let z: f64 = rng.gen();
        let action = p.select_action(z);
        let beta = score(action, &mut memo);
        p = p.lri_update(action, Reinforcement::new(beta)?, cfg.theta)?;
        iterations = k + 1;
        if cfg.beta_stop < 1.0 && beta >= cfg.beta_stop {
            early_winner = Some(action);
            break;
        }
    }

    let winner = early_winner.unwrap_or_else(|| p.best_action());
    let beta = score(winner, &mut memo);
    Ok(DetectionResult {
        circle: candidates.actions[winner].circle,
        beta,
        probability: p.get(winner),
        iterations,
        n_candidates: n_c,
        seed,
    })
}

/// Copy of `em` with every edge pixel within `mask_width` of the circle's
/// circumference cleared.
pub fn mask_circle(em: &EdgeMap, c: &Circle, mask_width: f64) -> EdgeMap {
    let mut out = em.clone();
    let reach = c.r + mask_width + 1.0;
    let x_lo = ((c.x0 - reach).floor().max(0.0)) as usize;
    let y_lo = ((c.y0 - reach).floor().max(0.0)) as usize;
    let x_hi = ((c.x0 + reach).ceil().min(em.width() as f64 - 1.0)).max(0.0) as usize;
    let y_hi = ((c.y0 + reach).ceil().min(em.height() as f64 - 1.0)).max(0.0) as usize;
    for y in y_lo..=y_hi.min(em.height().saturating_sub(1)) {
        for x in x_lo..=x_hi.min(em.width().saturating_sub(1)) {
            if !out.get(x, y) {
                continue;
            }
            let d = (x as f64 - c.x0).hypot(y as f64 - c.y0);
            if (d - c.r).abs() <= mask_width {
                out.set(x, y, false);
            }
        }
    }
    out
}

/// Validates that the matched circumference pixels form a sufficiently long
/// contiguous arc rather than scattered coincidences.
///
/// Test points are ordered by angle around the center; a run may bridge up to
/// two consecutive missing points. Accepts when the longest run covers at
/// least `continuity_min` of the rasterized circumference.
pub fn continuity_check(c: &Circle, em: &EdgeMap, continuity_min: f64) -> bool {
    let ts = match rasterize_circle(c, em.width(), em.height()) {
        Ok(ts) if ts.n_total > 0 => ts,
        _ => return false,
    };
    let mut pts: Vec<(f64, bool)> = ts
        .points
        .iter()
        .map(|&(x, y)| {
            let angle = (y as f64 - c.y0).atan2(x as f64 - c.x0);
            (angle, em.get(x, y))
        })
        .collect();
    pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let hits: Vec<bool> = pts.iter().map(|&(_, h)| h).collect();
    let n = hits.len();

    let longest = longest_cyclic_run(&hits, 2);
    longest as f64 / n as f64 >= continuity_min
}

/// Longest cyclic run of hits, tolerating up to `max_gap` consecutive misses
/// inside a run. Run length counts hits only.
fn longest_cyclic_run(hits: &[bool], max_gap: usize) -> usize {
    let n = hits.len();
    let total_hits = hits.iter().filter(|&&h| h).count();
    if total_hits == 0 {
        return 0;
    }
    // A run breaks only at > max_gap consecutive misses. If no such gap
    // exists anywhere, the whole circumference is one cyclic run.
    let start = (0..n).find(|&i| (0..=max_gap).all(|d| !hits[(i + n - d) % n]));
    let start = match start {
        Some(s) => s,
        None => return total_hits,
    };

    let mut best = 0usize;
    let mut current = 0usize;
    let mut in_run = false;
    let mut miss_streak = 0usize;
    for k in 0..n {
        if hits[(start + k) % n] {
            current = if in_run { current + 1 } else { 1 };
            in_run = true;
            miss_streak = 0;
            best = best.max(current);
        } else {
            miss_streak += 1;
            if miss_streak > max_gap {
                in_run = false;
                current = 0;
            }
        }
    }
    best
}

/// Extracts circles one at a time, masking each detection off the edge map.
///
/// Stops when the best match drops below `cfg.m_th`, when `max_circles` have
/// been accepted, or when fewer than 3 edge pixels remain. A detection that
/// fails the continuity check is masked (so it cannot be re-detected) but not
/// reported. The empty vector is the "no circle detected" reply.
pub fn detect_multiple(
    em: &EdgeMap,
    cfg: &DetectorConfig,
    seed: u64,
    max_circles: usize,
) -> Vec<DetectionResult> {
    let mut current = em.clone();
    let mut results = Vec::new();
    let mut round = 0u64;
    while results.len() < max_circles && current.edge_count() >= 3 {
        let before = current.edge_count();
        let res = match detect_one(&current, cfg, derive_seed(seed, 0x100 + round)) {
            Ok(r) => r,
            Err(_) => break,
        };
        round += 1;
        if res.beta < cfg.m_th {
            break;
        }
        let continuous = continuity_check(&res.circle, &current, cfg.continuity_min);
        current = mask_circle(&current, &res.circle, cfg.mask_width);
        if continuous {
            results.push(res);
        }
        if current.edge_count() >= before {
            break; // mask made no progress; avoid re-detecting forever
        }
    }
    results
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::edgemap::EdgePoint;
    use crate::geometry::rasterize_circle;

    fn points_on_circle(cx: f64, cy: f64, r: f64, n: usize) -> EdgePointVector {
        let points = (0..n)
            .map(|i| {
                let a = std::f64::consts::TAU * i as f64 / n as f64;
                EdgePoint {
                    x: (cx + r * a.cos()).round() as usize,
                    y: (cy + r * a.sin()).round() as usize,
                }
            })
            .collect();
        EdgePointVector { points }
    }

    fn draw_circle(em: &mut EdgeMap, cx: f64, cy: f64, r: f64) {
        let ts = rasterize_circle(&Circle::new(cx, cy, r), em.width(), em.height()).unwrap();
        for (x, y) in ts.points {
            em.set(x, y, true);
        }
    }

    #[test]
    fn single_triple_yields_one_candidate() {
        let pts = points_on_circle(100.0, 100.0, 50.0, 3);
        let set = generate_candidates(&pts, 200, 200, &DetectorConfig::default(), 1).unwrap();
        assert_eq!(set.actions.len(), 1);
        let c = set.actions[0].circle;
        assert!((c.r - 50.0).abs() < 2.0);
    }

    #[test]
    fn collinear_triple_yields_no_candidates() {
        let pts = EdgePointVector {
            points: vec![
                EdgePoint { x: 10, y: 10 },
                EdgePoint { x: 20, y: 20 },
                EdgePoint { x: 30, y: 30 },
            ],
        };
        assert!(matches!(
            generate_candidates(&pts, 200, 200, &DetectorConfig::default(), 1),
            Err(Error::NoCandidates)
        ));
    }

    #[test]
    fn coincident_circles_deduplicate() {
        // All 36 integer lattice points of the radius-65 circle: every triple
        // determines exactly the same circle, so dedup collapses the whole
        // enumeration to a single candidate.
        let mut points = Vec::new();
        for &(dx, dy) in &[(65i64, 0i64), (16, 63), (25, 60), (33, 56), (39, 52)] {
            for &(sx, sy) in &[(1i64, 1i64), (-1, 1), (1, -1), (-1, -1)] {
                points.push(EdgePoint {
                    x: (100 + sx * dx) as usize,
                    y: (100 + sy * dy) as usize,
                });
                points.push(EdgePoint {
                    x: (100 + sx * dy) as usize,
                    y: (100 + sy * dx) as usize,
                });
            }
        }
        points.sort_by_key(|p| (p.x, p.y));
        points.dedup();
        assert_eq!(points.len(), 36);
        let pts = EdgePointVector { points };
        let mut cfg = DetectorConfig::default();
        cfg.max_candidates = 10_000; // C(36,3) = 7140: exhaustive enumeration
        let set = generate_candidates(&pts, 200, 200, &cfg, 1).unwrap();
        assert_eq!(set.actions.len(), 1, "dedup left {}", set.actions.len());
        let c = set.actions[0].circle;
        assert_eq!((c.x0, c.y0, c.r), (100.0, 100.0, 65.0));
    }

    #[test]
    fn radius_filter_applies() {
        let pts = points_on_circle(100.0, 100.0, 4.0, 8); // r below the default floor of 8
        assert!(matches!(
            generate_candidates(&pts, 200, 200, &DetectorConfig::default(), 1),
            Err(Error::NoCandidates)
        ));
    }

    #[test]
    fn random_mode_respects_cap_and_determinism() {
        let mut pts = points_on_circle(100.0, 100.0, 70.0, 40).points;
        pts.extend(points_on_circle(60.0, 120.0, 35.0, 40).points);
        let pts = EdgePointVector { points: pts };
        let mut cfg = DetectorConfig::default();
        cfg.max_candidates = 500; // C(80,3) = 82160 >> 500
        let a = generate_candidates(&pts, 200, 200, &cfg, 9).unwrap();
        let b = generate_candidates(&pts, 200, 200, &cfg, 9).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.actions.len(), 500);
        let c = generate_candidates(&pts, 200, 200, &cfg, 10).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn match_score_extremes() {
        let mut em = EdgeMap::new(200, 200);
        let circle = Circle::new(100.0, 100.0, 40.0);
        assert_eq!(match_score(&circle, &em).unwrap(), 0.0);
        draw_circle(&mut em, 100.0, 100.0, 40.0);
        assert_eq!(match_score(&circle, &em).unwrap(), 1.0);
    }

    #[test]
    fn match_score_partial_fraction() {
        // Mark exactly 18 of the rasterized points as edges.
        let circle = Circle::new(100.0, 100.0, 10.0);
        let ts = rasterize_circle(&circle, 200, 200).unwrap();
        let mut em = EdgeMap::new(200, 200);
        for &(x, y) in ts.points.iter().take(18) {
            em.set(x, y, true);
        }
        let beta = match_score(&circle, &em).unwrap();
        assert_eq!(beta, 18.0 / ts.n_total as f64);
    }

    #[test]
    fn zero_support_circle_errors() {
        let em = EdgeMap::new(50, 50);
        let far = Circle::new(500.0, 500.0, 20.0);
        assert!(matches!(match_score(&far, &em), Err(Error::ZeroSupport)));
    }

    #[test]
    fn detects_clean_circle() {
        let mut em = EdgeMap::new(200, 200);
        draw_circle(&mut em, 100.0, 100.0, 40.0);
        let res = detect_one(&em, &DetectorConfig::default(), 7).unwrap();
        assert!((res.circle.x0 - 100.0).abs() <= 2.0, "x0 {}", res.circle.x0);
        assert!((res.circle.y0 - 100.0).abs() <= 2.0, "y0 {}", res.circle.y0);
        assert!((res.circle.r - 40.0).abs() <= 2.0, "r {}", res.circle.r);
        assert!(res.beta > 0.9);
    }

    #[test]
    fn detection_is_deterministic() {
        let mut em = EdgeMap::new(200, 200);
        draw_circle(&mut em, 80.0, 120.0, 35.0);
        let a = detect_one(&em, &DetectorConfig::default(), 3).unwrap();
        let b = detect_one(&em, &DetectorConfig::default(), 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn memoization_is_transparent() {
        let mut em = EdgeMap::new(200, 200);
        draw_circle(&mut em, 100.0, 100.0, 40.0);
        // Scatter some clutter so multiple actions exist.
        for i in 0..60usize {
            em.set((i * 17) % 200, (i * 41) % 200, true);
        }
        let cfg = DetectorConfig::default();
        for seed in [1u64, 2, 3] {
            let with = detect_one_inner(&em, &cfg, seed, true).unwrap();
            let without = detect_one_inner(&em, &cfg, seed, false).unwrap();
            assert_eq!(with, without);
        }
    }

    #[test]
    fn reported_beta_matches_recomputed_score() {
        let mut em = EdgeMap::new(200, 200);
        draw_circle(&mut em, 100.0, 100.0, 40.0);
        for i in 0..40usize {
            em.set((i * 29) % 200, (i * 13) % 200, true);
        }
        let res = detect_one(&em, &DetectorConfig::default(), 11).unwrap();
        assert_eq!(res.beta, match_score(&res.circle, &em).unwrap());
    }

    #[test]
    fn masking_clears_the_detected_circle() {
        let mut em = EdgeMap::new(200, 200);
        draw_circle(&mut em, 100.0, 100.0, 40.0);
        let drawn = em.edge_count();
        let masked = mask_circle(&em, &Circle::new(100.0, 100.0, 40.0), 2.0);
        let remaining = masked.edge_count();
        assert!(
            (drawn - remaining) as f64 >= 0.9 * drawn as f64,
            "cleared only {} of {}",
            drawn - remaining,
            drawn
        );
    }

    #[test]
    fn masking_far_circle_is_identity() {
        let mut em = EdgeMap::new(200, 200);
        draw_circle(&mut em, 50.0, 50.0, 20.0);
        let masked = mask_circle(&em, &Circle::new(150.0, 150.0, 20.0), 2.0);
        assert_eq!(masked, em);
    }

    #[test]
    fn zero_width_mask_clears_only_exact_band() {
        let mut em = EdgeMap::new(40, 40);
        let c = Circle::new(20.0, 20.0, 5.0);
        // Pixels at exactly radius 5 plus one pixel off the band.
        em.set(25, 20, true);
        em.set(20, 25, true);
        em.set(26, 20, true);
        let masked = mask_circle(&em, &c, 0.0);
        assert!(!masked.get(25, 20));
        assert!(!masked.get(20, 25));
        assert!(masked.get(26, 20));
    }

    #[test]
    fn continuity_full_circle_passes() {
        let mut em = EdgeMap::new(200, 200);
        draw_circle(&mut em, 100.0, 100.0, 40.0);
        let c = Circle::new(100.0, 100.0, 40.0);
        assert!(continuity_check(&c, &em, 0.25));
        assert!(continuity_check(&c, &em, 1.0));
    }

    #[test]
    fn continuity_scattered_matches_fail() {
        let c = Circle::new(100.0, 100.0, 40.0);
        let ts = rasterize_circle(&c, 200, 200).unwrap();
        let mut em = EdgeMap::new(200, 200);
        // Every 5th circumference pixel: beta = 0.2 but no contiguous arc.
        for (i, &(x, y)) in ts.points.iter().enumerate() {
            if i % 5 == 0 {
                em.set(x, y, true);
            }
        }
        assert!(!continuity_check(&c, &em, 0.25));
    }

    #[test]
    fn continuity_semicircle_passes() {
        let c = Circle::new(100.0, 100.0, 40.0);
        let ts = rasterize_circle(&c, 200, 200).unwrap();
        let mut em = EdgeMap::new(200, 200);
        for &(x, y) in &ts.points {
            if x as f64 >= 100.0 {
                em.set(x, y, true);
            }
        }
        assert!(continuity_check(&c, &em, 0.25));
        assert!(!continuity_check(&c, &em, 0.8));
    }

    #[test]
    fn longest_run_gap_tolerance() {
        // Cyclic: the tail run wraps into the head. With 2-miss tolerance the
        // first gap is bridged (10 hits); with 1-miss tolerance it breaks
        // (wrap run of 8).
        let hits = vec![
            true, true, true, false, false, true, true, false, false, false, true, true, true,
            true, true,
        ];
        assert_eq!(longest_cyclic_run(&hits, 2), 10);
        assert_eq!(longest_cyclic_run(&hits, 1), 8);
        assert_eq!(longest_cyclic_run(&[false, true, true, false, true, false, false, false], 1), 3);
        assert_eq!(longest_cyclic_run(&[false, true, true, false, true, false, false, false], 0), 2);
        assert_eq!(longest_cyclic_run(&[false; 8], 2), 0);
        assert_eq!(longest_cyclic_run(&[true; 8], 2), 8);
    }

    #[test]
    fn detect_multiple_finds_disjoint_circles() {
        let mut em = EdgeMap::new(200, 200);
        draw_circle(&mut em, 50.0, 50.0, 20.0);
        draw_circle(&mut em, 140.0, 60.0, 35.0);
        draw_circle(&mut em, 80.0, 140.0, 50.0);
        let results = detect_multiple(&em, &DetectorConfig::default(), 5, 6);
        assert_eq!(results.len(), 3);
        let mut found = [false; 3];
        let truths = [(50.0, 50.0, 20.0), (140.0, 60.0, 35.0), (80.0, 140.0, 50.0)];
        for r in &results {
            for (i, &(tx, ty, tr)) in truths.iter().enumerate() {
                if (r.circle.x0 - tx).abs() < 3.0
                    && (r.circle.y0 - ty).abs() < 3.0
                    && (r.circle.r - tr).abs() < 3.0
                {
                    found[i] = true;
                }
            }
        }
        assert_eq!(found, [true; 3], "results: {results:?}");
    }

    #[test]
    fn blank_map_yields_empty_reply() {
        let em = EdgeMap::new(100, 100);
        assert!(detect_multiple(&em, &DetectorConfig::default(), 1, 4).is_empty());
    }

    #[test]
    fn square_is_not_a_circle() {
        let mut em = EdgeMap::new(200, 200);
        draw_circle(&mut em, 60.0, 60.0, 30.0);
        for i in 110..=170 {
            em.set(i, 110, true);
            em.set(i, 170, true);
            em.set(110, i, true);
            em.set(170, i, true);
        }
        let results = detect_multiple(&em, &DetectorConfig::default(), 21, 4);
        assert_eq!(results.len(), 1, "results: {results:?}");
        let c = results[0].circle;
        assert!((c.x0 - 60.0).abs() < 3.0 && (c.y0 - 60.0).abs() < 3.0 && (c.r - 30.0).abs() < 3.0);
    }
}
