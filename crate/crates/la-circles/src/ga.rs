//! Genetic-algorithm baseline detector for the benchmark comparison.
//!
//! Chromosomes encode three edge-point indices as packed binary fields;
//! fitness is the fraction of uniformly sampled circumference points that
//! land on edge pixels. Roulette selection, single-point crossover on the
//! concatenated genome, per-individual single-bit mutation and elitism.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::detector::{DetectionResult, DetectorConfig};
use crate::edgemap::{sample_edge_points, EdgeMap, EdgePointVector, DEFAULT_SAMPLE_FLOOR};
use crate::error::{Error, Result};
use crate::geometry::{circle_from_three_points, Circle};
use crate::seeding::derive_seed;

/// GA parameters. Defaults: 70 individuals, crossover 0.55, mutation 0.10,
/// two elites, 200 generations, 100 fitness test points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaConfig {
    pub population: usize,
    pub crossover_prob: f64,
    /// Probability that an individual has one uniformly chosen genome bit
    /// inverted.
    pub mutation_prob: f64,
    pub elite: usize,
    pub generations: usize,
    /// Number of uniform boundary samples used by the fitness function.
    pub ns_test_points: usize,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population: 70,
            crossover_prob: 0.55,
            mutation_prob: 0.10,
            elite: 2,
            generations: 200,
            ns_test_points: 100,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.population < 2 {
            return bad("population must be at least 2".into());
        }
        if !(0.0..=1.0).contains(&self.crossover_prob) {
            return bad(format!(
                "crossover_prob must lie in [0, 1], got {}",
                self.crossover_prob
            ));
        }
        if !(0.0..=1.0).contains(&self.mutation_prob) {
            return bad(format!(
                "mutation_prob must lie in [0, 1], got {}",
                self.mutation_prob
            ));
        }
        if self.elite >= self.population {
            return bad(format!(
                "elite count {} must be below the population size {}",
                self.elite, self.population
            ));
        }
        if self.ns_test_points < 4 {
            return bad("ns_test_points must be at least 4".into());
        }
        if self.generations == 0 {
            return bad("generations must be at least 1".into());
        }
        Ok(())
    }
}

/// One chromosome: three packed indices plus its evaluated fitness. An
/// individual that decodes to out-of-range, repeated or collinear points, or
/// to a radius outside the allowed range, is infeasible and scores 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Individual {
    pub genes: u64,
    pub fitness: f64,
}

/// `ns` equally spaced circumference samples of a circle, rounded to integer
/// pixels. Duplicates after rounding are retained and no clipping happens
/// here; the fitness function counts out-of-bounds samples as misses and
/// divides by `ns`.
pub fn uniform_test_points(c: &Circle, ns: usize) -> Vec<(i64, i64)> {
    (0..ns)
        .map(|i| {
            let a = std::f64::consts::TAU * i as f64 / ns as f64;
            (
                (c.x0 + c.r * a.cos()).round() as i64,
                (c.y0 + c.r * a.sin()).round() as i64,
            )
        })
        .collect()
}

struct Genome {
    bits_per_index: u32,
    n_points: usize,
}

impl Genome {
    fn new(n_points: usize) -> Self {
        let bits_per_index = (usize::BITS - (n_points - 1).leading_zeros()).max(1);
        Self {
            bits_per_index,
            n_points,
        }
    }

    fn total_bits(&self) -> u32 {
        3 * self.bits_per_index
    }

    fn encode(&self, idx: [usize; 3]) -> u64 {
        let b = self.bits_per_index;
        (idx[0] as u64) | ((idx[1] as u64) << b) | ((idx[2] as u64) << (2 * b))
    }

    fn decode(&self, genes: u64) -> Option<[usize; 3]> {
        let b = self.bits_per_index;
        let mask = (1u64 << b) - 1;
        let idx = [
            (genes & mask) as usize,
            ((genes >> b) & mask) as usize,
            ((genes >> (2 * b)) & mask) as usize,
        ];
        let in_range = idx.iter().all(|&i| i < self.n_points);
        let distinct = idx[0] != idx[1] && idx[0] != idx[2] && idx[1] != idx[2];
        (in_range && distinct).then_some(idx)
    }
}

fn evaluate(
    genes: u64,
    genome: &Genome,
    pts: &EdgePointVector,
    em: &EdgeMap,
    r_min: f64,
    r_max: f64,
    ns: usize,
) -> (f64, Option<Circle>) {
    let Some(idx) = genome.decode(genes) else {
        return (0.0, None);
    };
    let Ok(circle) = circle_from_three_points(
        pts.points[idx[0]].as_f64(),
        pts.points[idx[1]].as_f64(),
        pts.points[idx[2]].as_f64(),
    ) else {
        return (0.0, None);
    };
    if !(circle.r > r_min && circle.r < r_max) {
        return (0.0, None);
    }
    let (w, h) = (em.width() as i64, em.height() as i64);
    let hits = uniform_test_points(&circle, ns)
        .into_iter()
        .filter(|&(x, y)| x >= 0 && y >= 0 && x < w && y < h && em.get(x as usize, y as usize))
        .count();
    (hits as f64 / ns as f64, Some(circle))
}

/// Fitness-proportional pick; falls back to a uniform pick when the whole
/// population has zero fitness.
fn roulette_pick<R: Rng>(fitness: &[f64], total: f64, rng: &mut R) -> usize {
    if total <= 0.0 {
        return rng.gen_range(0..fitness.len());
    }
    let z = rng.gen::<f64>() * total;
    let mut cum = 0.0;
    for (i, &f) in fitness.iter().enumerate() {
        cum += f;
        if cum > z {
            return i;
        }
    }
    fitness.len() - 1
}

/// Runs the GA detector and reports the best individual's circle, with its
/// fitness as the match score and its roulette share as the probability.
pub fn detect(
    em: &EdgeMap,
    cfg: &GaConfig,
    detector_cfg: &DetectorConfig,
    seed: u64,
) -> Result<DetectionResult> {
    cfg.validate()?;
    detector_cfg.validate()?;
    let pts = sample_edge_points(
        em,
        detector_cfg.sample_fraction,
        DEFAULT_SAMPLE_FLOOR,
        derive_seed(seed, 0x6A_0),
    )?;
    let genome = Genome::new(pts.len());
    let r_min = detector_cfg.r_min;
    let r_max = match detector_cfg.r_max_rule {
        crate::detector::RadiusMaxRule::HalfMaxDim => em.width().max(em.height()) as f64 / 2.0,
        crate::detector::RadiusMaxRule::HalfMinDim => em.width().min(em.height()) as f64 / 2.0,
    };
    let ns = cfg.ns_test_points;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0x6A_1));

    // Random distinct index triples keep the initial population decodable.
    let mut population: Vec<Individual> = (0..cfg.population)
        .map(|_| {
            let mut idx = [0usize; 3];
            idx[0] = rng.gen_range(0..pts.len());
            loop {
                idx[1] = rng.gen_range(0..pts.len());
                if idx[1] != idx[0] {
                    break;
                }
            }
            loop {
                idx[2] = rng.gen_range(0..pts.len());
                if idx[2] != idx[0] && idx[2] != idx[1] {
                    break;
                }
            }
            Individual {
                genes: genome.encode(idx),
                fitness: 0.0,
            }
        })
        .collect();
    for ind in &mut population {
        ind.fitness = evaluate(ind.genes, &genome, &pts, em, r_min, r_max, ns).0;
    }

    let genome_bits = genome.total_bits();
    for _ in 0..cfg.generations {
        // Elites: best `elite` individuals, ties broken by position.
        let mut order: Vec<usize> = (0..cfg.population).collect();
        order.sort_by(|&a, &b| {
            population[b]
                .fitness
                .partial_cmp(&population[a].fitness)
                .unwrap()
                .then(a.cmp(&b))
        });
        let mut next: Vec<u64> = order[..cfg.elite]
            .iter()
            .map(|&i| population[i].genes)
            .collect();

        let fitness: Vec<f64> = population.iter().map(|i| i.fitness).collect();
        let total: f64 = fitness.iter().sum();
        while next.len() < cfg.population {
            let p1 = population[roulette_pick(&fitness, total, &mut rng)].genes;
            let p2 = population[roulette_pick(&fitness, total, &mut rng)].genes;
            let (mut c1, mut c2) = if rng.gen::<f64>() < cfg.crossover_prob {
                let cut = rng.gen_range(1..genome_bits);
                let mask = (1u64 << cut) - 1;
                ((p1 & !mask) | (p2 & mask), (p2 & !mask) | (p1 & mask))
            } else {
                (p1, p2)
            };
            for child in [&mut c1, &mut c2] {
                if rng.gen::<f64>() < cfg.mutation_prob {
                    *child ^= 1u64 << rng.gen_range(0..genome_bits);
                }
            }
            next.push(c1);
            if next.len() < cfg.population {
                next.push(c2);
            }
        }
        population = next
            .into_iter()
            .map(|genes| Individual {
                genes,
                fitness: evaluate(genes, &genome, &pts, em, r_min, r_max, ns).0,
            })
            .collect();
    }

    let mut best = 0;
    for i in 1..cfg.population {
        if population[i].fitness > population[best].fitness {
            best = i;
        }
    }
    let (beta, circle) = evaluate(population[best].genes, &genome, &pts, em, r_min, r_max, ns);
    let circle = circle.ok_or(Error::NoCandidates)?;
    let total: f64 = population.iter().map(|i| i.fitness).sum();
    Ok(DetectionResult {
        circle,
        beta,
        probability: if total > 0.0 { beta / total } else { 0.0 },
        iterations: cfg.generations,
        n_candidates: cfg.population,
        seed,
    })
}
