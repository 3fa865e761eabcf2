//! Particle swarm search over conversion matrices.
//!
//! The cost of a matrix is the number of feature-matrix pixels whose
//! two-class K-medoids label changes once the pixels are converted by it.
//! Cost evaluations within an iteration run in parallel; every random draw
//! comes from one seeded stream, drawn serially before the parallel section,
//! so the result does not depend on the thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::feature::{FeatureMatrix, HALF};
use super::matrix::{convert_pixels, ConversionMatrix};
use crate::clustering::{align_labels, kmedoids_two, mismatches, Assignment, PixelSet};
use crate::error::{Error, Result};

pub type Matrix3 = [[f64; 3]; 3];

/// Medoid seeds used for every clustering during training: the first fire
/// pixel and the first background pixel.
pub const CANONICAL_INIT: (usize, usize) = (0, HALF);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PsoConfig {
    pub swarm_size: usize,
    pub max_iterations: usize,
    pub omega: f64,
    pub c1: f64,
    pub c2: f64,
    /// Closed interval initial matrix entries are drawn from.
    pub init_range: [f64; 2],
    pub velocity_clamp: f64,
    pub seed: u64,
}

impl Default for PsoConfig {
    fn default() -> Self {
        Self {
            swarm_size: 50,
            max_iterations: 200,
            omega: 0.7298,
            c1: 1.4962,
            c2: 1.4962,
            init_range: [-5.0, 5.0],
            velocity_clamp: 2.0,
            seed: 0,
        }
    }
}

impl PsoConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if self.swarm_size < 2 {
            return fail("swarm_size must be at least 2");
        }
        if self.max_iterations < 1 {
            return fail("max_iterations must be at least 1");
        }
        // NaN fails this comparison too.
        if self.velocity_clamp.is_nan() || self.velocity_clamp <= 0.0 {
            return fail("velocity_clamp must be positive");
        }
        let [lo, hi] = self.init_range;
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return fail("init_range must be a finite interval with lo <= hi");
        }
        if ![self.omega, self.c1, self.c2].iter().all(|v| v.is_finite()) {
            return fail("omega, c1 and c2 must be finite");
        }
        Ok(())
    }
}

/// One candidate matrix with its velocity and personal best.
#[derive(Clone, Debug, PartialEq)]
pub struct Particle {
    pub position: ConversionMatrix,
    pub velocity: Matrix3,
    pub personal_best_position: ConversionMatrix,
    pub personal_best_cost: usize,
}

impl Particle {
    /// A freshly evaluated particle at rest.
    pub fn at_rest(position: ConversionMatrix, cost: usize) -> Self {
        Self {
            position,
            velocity: [[0.0; 3]; 3],
            personal_best_position: position,
            personal_best_cost: cost,
        }
    }
}

/// One velocity/position step. Personal-best fields are carried over
/// unchanged; they are refreshed after the new position is evaluated.
pub fn update_particle(
    p: &Particle,
    global_best: &ConversionMatrix,
    cfg: &PsoConfig,
    r1: &Matrix3,
    r2: &Matrix3,
) -> Particle {
    let pos = p.position.to_flat();
    let best = p.personal_best_position.to_flat();
    let global = global_best.to_flat();
    let limit = cfg.velocity_clamp;
    let mut velocity = p.velocity;
    let mut next = pos;
    for k in 0..9 {
        let (row, col) = (k / 3, k % 3);
        let v = cfg.omega * p.velocity[row][col]
            + cfg.c1 * r1[row][col] * (best[k] - pos[k])
            + cfg.c2 * r2[row][col] * (global[k] - pos[k]);
        let v = v.clamp(-limit, limit);
        velocity[row][col] = v;
        next[k] = pos[k] + v;
    }
    Particle {
        position: ConversionMatrix::from_flat(next),
        velocity,
        personal_best_position: p.personal_best_position,
        personal_best_cost: p.personal_best_cost,
    }
}

/// Clusters the unconverted feature matrix with the canonical init.
pub fn reference_assignment(feature: &FeatureMatrix) -> Result<Assignment> {
    kmedoids_two(&PixelSet::new(feature.pixels().to_vec())?, CANONICAL_INIT)
}

/// Count of feature pixels whose cluster changes after conversion by `w`,
/// with class names matched to `reference` in the better orientation.
pub fn conversion_cost(w: &ConversionMatrix, feature: &FeatureMatrix, reference: &Assignment) -> Result<usize> {
    let converted = PixelSet::new(convert_pixels(feature.pixels(), w))?;
    let clustered = kmedoids_two(&converted, CANONICAL_INIT)?;
    let aligned = align_labels(reference, &clustered)?;
    Ok(mismatches(reference.labels(), aligned.labels()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct PsoOutcome {
    pub matrix: ConversionMatrix,
    pub cost: usize,
    /// Update rounds performed after the initial evaluation.
    pub iterations_used: usize,
    /// Global-best cost after the initial evaluation and after each round.
    pub cost_trace: Vec<usize>,
}

/// Searches for the matrix with the lowest [`conversion_cost`]. Stops early
/// once the global best reaches zero.
pub fn pso_search(feature: &FeatureMatrix, cfg: &PsoConfig) -> Result<PsoOutcome> {
    cfg.validate()?;
    let reference = reference_assignment(feature)?;
    let evaluate = |w: &ConversionMatrix| conversion_cost(w, feature, &reference);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let [lo, hi] = cfg.init_range;
    let starts: Vec<ConversionMatrix> = (0..cfg.swarm_size)
        .map(|_| ConversionMatrix::from_flat(std::array::from_fn(|_| lo + (hi - lo) * rng.gen::<f64>())))
        .collect();
    let costs = starts.par_iter().map(evaluate).collect::<Result<Vec<_>>>()?;
    let mut swarm: Vec<Particle> = starts
        .into_iter()
        .zip(costs)
        .map(|(w, c)| Particle::at_rest(w, c))
        .collect();

    let mut best = 0;
    for (i, p) in swarm.iter().enumerate() {
        if p.personal_best_cost < swarm[best].personal_best_cost {
            best = i;
        }
    }
    let mut global = swarm[best].personal_best_position;
    let mut global_cost = swarm[best].personal_best_cost;
    let mut trace = vec![global_cost];
    let mut iterations = 0;

    while global_cost > 0 && iterations < cfg.max_iterations {
        iterations += 1;
        let draws: Vec<(Matrix3, Matrix3)> = (0..swarm.len())
            .map(|_| (random_matrix(&mut rng), random_matrix(&mut rng)))
            .collect();
        let moved: Vec<(Particle, Result<usize>)> = swarm
            .par_iter()
            .zip(draws.par_iter())
            .map(|(p, (r1, r2))| {
                let next = update_particle(p, &global, cfg, r1, r2);
                let cost = evaluate(&next.position);
                (next, cost)
            })
            .collect();

        swarm.clear();
        for (mut p, cost) in moved {
            let cost = cost?;
            if cost < p.personal_best_cost {
                p.personal_best_position = p.position;
                p.personal_best_cost = cost;
            }
            if p.personal_best_cost < global_cost {
                global = p.personal_best_position;
                global_cost = p.personal_best_cost;
            }
            swarm.push(p);
        }
        trace.push(global_cost);
    }

    Ok(PsoOutcome {
        matrix: global,
        cost: global_cost,
        iterations_used: iterations,
        cost_trace: trace,
    })
}

fn random_matrix(rng: &mut ChaCha8Rng) -> Matrix3 {
    std::array::from_fn(|_| std::array::from_fn(|_| rng.gen::<f64>()))
}
