//! Global-best PSO with constriction coefficients.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    argmin_pbest, finish, Evaluator, OptimizeResult, Particle, SearchSpace, SwarmConfig,
    SwarmSnapshot,
};

pub const INERTIA: f64 = 0.729;
pub const COGNITIVE: f64 = 1.49445;
pub const SOCIAL: f64 = 1.49445;
/// Velocity limit as a fraction of each dimension's width.
pub const VELOCITY_FRACTION: f64 = 0.5;

pub(super) fn run<F, O>(
    fitness: &F,
    space: &SearchSpace,
    config: &SwarmConfig,
    mut observer: O,
) -> OptimizeResult
where
    F: Fn(&[f64]) -> f64 + Sync,
    O: FnMut(&SwarmSnapshot<'_>),
{
    let d = space.dim();
    let m = config.population;
    let vmax: Vec<f64> = (0..d).map(|j| VELOCITY_FRACTION * space.width(j)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut eval = Evaluator::new(fitness);

    let init: Vec<Vec<f64>> = (0..m)
        .map(|_| {
            (0..d)
                .map(|j| space.lower()[j] + space.width(j) * rng.random::<f64>())
                .collect()
        })
        .collect();
    let velocities: Vec<Vec<f64>> = (0..m)
        .map(|_| {
            (0..d)
                .map(|j| (2.0 * rng.random::<f64>() - 1.0) * vmax[j])
                .collect()
        })
        .collect();
    let refs: Vec<&[f64]> = init.iter().map(Vec::as_slice).collect();
    let fit = eval.evaluate(&refs);
    let mut particles: Vec<Particle> = init
        .into_iter()
        .zip(velocities)
        .zip(fit)
        .map(|((x, v), f)| Particle {
            pbest_position: x.clone(),
            pbest_fitness: f,
            velocity: v,
            position: x,
        })
        .collect();

    let mut history = Vec::with_capacity(config.max_iter);
    for t in 1..=config.max_iter {
        let g = argmin_pbest(&particles);
        let gbest = particles[g].pbest_position.clone();
        for p in particles.iter_mut() {
            for j in 0..d {
                let r1 = rng.random::<f64>();
                let r2 = rng.random::<f64>();
                let x = p.position[j];
                let v = INERTIA * p.velocity[j]
                    + COGNITIVE * r1 * (p.pbest_position[j] - x)
                    + SOCIAL * r2 * (gbest[j] - x);
                p.velocity[j] = v.clamp(-vmax[j], vmax[j]);
                p.position[j] = x + p.velocity[j];
            }
            space.clamp(&mut p.position);
        }
        let refs: Vec<&[f64]> = particles.iter().map(|p| p.position.as_slice()).collect();
        let fit = eval.evaluate(&refs);
        for (p, f) in particles.iter_mut().zip(fit) {
            if f < p.pbest_fitness {
                p.pbest_position = p.position.clone();
                p.pbest_fitness = f;
            }
        }

        let g = argmin_pbest(&particles);
        history.push(particles[g].pbest_fitness);
        observer(&SwarmSnapshot {
            iteration: t,
            particles: &particles,
            gbest_index: g,
            bred: false,
        });
    }
    finish(&particles, history, &eval)
}
