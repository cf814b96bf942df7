//! Quantum-behaved PSO, with optional elitist breeding.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    argmin_pbest, finish, transposon_operator, CeMode, Evaluator, OptimizeResult, Particle,
    SearchSpace, SwarmConfig, SwarmSnapshot,
};
use crate::error::{Error, Result};

/// Coordinate-wise mean of the personal best positions.
pub fn compute_mbest(pbests: &[Vec<f64>]) -> Result<Vec<f64>> {
    let first = pbests
        .first()
        .ok_or_else(|| Error::invalid("cannot average an empty swarm"))?;
    let d = first.len();
    if pbests.iter().any(|p| p.len() != d) {
        return Err(Error::invalid("personal bests differ in dimension"));
    }
    let m = pbests.len() as f64;
    Ok((0..d)
        .map(|j| pbests.iter().map(|p| p[j]).sum::<f64>() / m)
        .collect())
}

/// Contraction-expansion coefficient at iteration `t` of `max_iter`.
pub fn ce_coefficient(t: usize, max_iter: usize, mode: CeMode) -> Result<f64> {
    if t > max_iter {
        return Err(Error::invalid(format!(
            "iteration {t} exceeds the maximum {max_iter}"
        )));
    }
    Ok(match mode {
        CeMode::Scheduled => 0.5 + 0.5 * (max_iter - t) as f64 / max_iter as f64,
        CeMode::Fixed(alpha) => alpha,
    })
}

/// Random numbers consumed by one coordinate of a QPSO position update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QpsoDraw {
    /// Weight of the personal best in the local attractor, in `[0, 1)`.
    pub phi: f64,
    /// Spread variate in `(0, 1]`; enters as `ln(1/u)`.
    pub u: f64,
    /// `true` adds the spread term, `false` subtracts it.
    pub positive: bool,
}

impl QpsoDraw {
    /// Draws `phi`, then `u = 1 - U[0,1)`, then the sign, in that order.
    pub fn sample<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let phi = rng.random::<f64>();
        let u = 1.0 - rng.random::<f64>();
        let positive = rng.random::<bool>();
        Self { phi, u, positive }
    }

    /// New (unclamped) coordinate from the current one and the attractors.
    pub fn apply(&self, x: f64, pbest: f64, gbest: f64, mbest: f64, alpha: f64) -> f64 {
        // gbest + phi (pbest - gbest) equals phi pbest + (1 - phi) gbest, and
        // is exactly gbest when both bests coincide.
        let attractor = gbest + self.phi * (pbest - gbest);
        let spread = alpha * (mbest - x).abs() * (1.0 / self.u).ln();
        if self.positive {
            attractor + spread
        } else {
            attractor - spread
        }
    }
}

/// Samples a particle's next position and clamps it to `space`.
#[allow(clippy::too_many_arguments)]
pub fn qpso_update_position<R: Rng + ?Sized>(
    position: &[f64],
    pbest: &[f64],
    gbest: &[f64],
    mbest: &[f64],
    alpha: f64,
    space: &SearchSpace,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let d = space.dim();
    if [position.len(), pbest.len(), gbest.len(), mbest.len()]
        .iter()
        .any(|&n| n != d)
    {
        return Err(Error::invalid(format!(
            "position update vectors must all have dimension {d}"
        )));
    }
    let mut next: Vec<f64> = (0..d)
        .map(|j| QpsoDraw::sample(rng).apply(position[j], pbest[j], gbest[j], mbest[j], alpha))
        .collect();
    space.clamp(&mut next);
    Ok(next)
}

pub(super) fn run<F, O>(
    fitness: &F,
    space: &SearchSpace,
    config: &SwarmConfig,
    breeding: bool,
    mut observer: O,
) -> OptimizeResult
where
    F: Fn(&[f64]) -> f64 + Sync,
    O: FnMut(&SwarmSnapshot<'_>),
{
    let d = space.dim();
    let m = config.population;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut eval = Evaluator::new(fitness);

    let init: Vec<Vec<f64>> = (0..m)
        .map(|_| {
            (0..d)
                .map(|j| space.lower()[j] + space.width(j) * rng.random::<f64>())
                .collect()
        })
        .collect();
    let refs: Vec<&[f64]> = init.iter().map(Vec::as_slice).collect();
    let fit = eval.evaluate(&refs);
    let mut particles: Vec<Particle> = init
        .into_iter()
        .zip(fit)
        .map(|(x, f)| Particle {
            pbest_position: x.clone(),
            pbest_fitness: f,
            velocity: vec![0.0; d],
            position: x,
        })
        .collect();

    let mut history = Vec::with_capacity(config.max_iter);
    for t in 1..=config.max_iter {
        let mut g = argmin_pbest(&particles);
        let pbests: Vec<Vec<f64>> = particles.iter().map(|p| p.pbest_position.clone()).collect();
        let mbest = compute_mbest(&pbests).expect("population is non-empty");

        let bred = breeding && t % config.lambda == 0;
        if bred {
            let mut pool = pbests;
            pool.push(particles[g].pbest_position.clone());
            let offspring = transposon_operator(&pool, config, space, &mut rng)
                .expect("pool rows match the search space");
            // Only rows the operator touched can differ from the pbest they came from.
            let changed: Vec<usize> = (0..m).filter(|&i| offspring[i] != pool[i]).collect();
            let refs: Vec<&[f64]> = changed.iter().map(|&i| offspring[i].as_slice()).collect();
            let fit = eval.evaluate(&refs);
            for (&i, f) in changed.iter().zip(fit) {
                if f < particles[i].pbest_fitness {
                    particles[i].pbest_position = offspring[i].clone();
                    particles[i].pbest_fitness = f;
                }
            }
            g = argmin_pbest(&particles);
        }

        let alpha = ce_coefficient(t, config.max_iter, config.ce_mode).expect("t <= max_iter");
        let gbest = particles[g].pbest_position.clone();
        let next: Vec<Vec<f64>> = particles
            .iter()
            .map(|p| {
                qpso_update_position(
                    &p.position,
                    &p.pbest_position,
                    &gbest,
                    &mbest,
                    alpha,
                    space,
                    &mut rng,
                )
                .expect("dimensions checked")
            })
            .collect();
        let refs: Vec<&[f64]> = next.iter().map(Vec::as_slice).collect();
        let fit = eval.evaluate(&refs);
        for ((p, x), f) in particles.iter_mut().zip(next).zip(fit) {
            if f < p.pbest_fitness {
                p.pbest_position = x.clone();
                p.pbest_fitness = f;
            }
            p.position = x;
        }

        let g = argmin_pbest(&particles);
        history.push(particles[g].pbest_fitness);
        observer(&SwarmSnapshot {
            iteration: t,
            particles: &particles,
            gbest_index: g,
            bred,
        });
    }
    finish(&particles, history, &eval)
}
