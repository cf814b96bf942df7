//! Box-constrained black-box minimization with particle swarms.
//!
//! Three strategies share one driver:
//!
//! * [`Strategy::Pso`]: global-best PSO with constriction constants.
//! * [`Strategy::Qpso`]: quantum-behaved PSO (mean-best attractor, logarithmic
//!   spread, contraction-expansion coefficient).
//! * [`Strategy::Ebqpso`]: QPSO where, every `lambda` iterations, the elitist
//!   pool (all personal bests plus the global best) is bred with transposon
//!   operators and better offspring replace personal bests.
//!
//! # Random draw order
//!
//! Every run owns a single `ChaCha8Rng` seeded from [`SwarmConfig::seed`] and
//! consumes it in this fixed order, independent of how fitness calls are
//! scheduled:
//!
//! 1. initial positions, particle by particle, coordinate by coordinate;
//! 2. (PSO only) initial velocities, same order;
//! 3. per iteration `t = 1..=T`:
//!    * (EBQPSO, when `t % lambda == 0`) the transposon pass, see
//!      [`transposon_operator`];
//!    * per particle, per coordinate: QPSO draws `phi`, `u`, sign
//!      ([`QpsoDraw::sample`]); PSO draws `r1`, `r2`.
//!
//! Fitness values for a batch (initial swarm, bred pool, updated swarm) are
//! computed in parallel and committed in particle order, so results are
//! bit-identical for a given seed.

pub mod benchmarks;
mod pso;
mod qpso;
mod transposon;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use qpso::{ce_coefficient, compute_mbest, qpso_update_position, QpsoDraw};
pub use transposon::{
    copy_and_paste, cut_and_paste, denormalize, normalize, transposon_operator, Transposon,
};

/// Axis-aligned search box.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchSpace {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl SearchSpace {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() || lower.len() != upper.len() {
            return Err(Error::invalid(format!(
                "search space bounds must be non-empty and equally long ({} vs {})",
                lower.len(),
                upper.len()
            )));
        }
        for (j, (lo, hi)) in lower.iter().zip(&upper).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::invalid(format!(
                    "dimension {j}: need finite lower < upper, got [{lo}, {hi}]"
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    /// The same interval in every dimension.
    pub fn uniform(dimension: usize, lower: f64, upper: f64) -> Result<Self> {
        Self::new(vec![lower; dimension], vec![upper; dimension])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn width(&self, j: usize) -> f64 {
        self.upper[j] - self.lower[j]
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (lo, hi))| *lo <= *v && *v <= *hi)
    }

    pub fn clamp(&self, x: &mut [f64]) {
        for (v, (lo, hi)) in x.iter_mut().zip(self.lower.iter().zip(&self.upper)) {
            *v = v.clamp(*lo, *hi);
        }
    }
}

/// How the contraction-expansion coefficient evolves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CeMode {
    /// `0.5 + 0.5 (T - t) / T`: 1.0 at the start, 0.5 at the last iteration.
    Scheduled,
    /// A constant coefficient.
    Fixed(f64),
}

/// Swarm and breeding parameters. Defaults follow the reference settings:
/// 20 particles, 2 dimensions, 50 iterations, jumping rate 0.2, jumping
/// percentage 1, one transposon, breeding every 3 iterations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SwarmConfig {
    pub population: usize,
    pub dimension: usize,
    pub max_iter: usize,
    pub jumping_rate: f64,
    /// Accepted for completeness; transposons always carry a single gene.
    pub jumping_percentage: f64,
    pub n_transposons: usize,
    pub lambda: usize,
    #[serde(skip)]
    pub seed: u64,
    pub ce_mode: CeMode,
}

impl Default for SwarmConfig {
    fn default() -> Self {
        Self {
            population: 20,
            dimension: 2,
            max_iter: 50,
            jumping_rate: 0.2,
            jumping_percentage: 1.0,
            n_transposons: 1,
            lambda: 3,
            seed: 0,
            ce_mode: CeMode::Scheduled,
        }
    }
}

impl SwarmConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self, space: &SearchSpace) -> Result<()> {
        let fail = |m: String| Err(Error::invalid(m));
        if self.population == 0 {
            return fail("population must be positive".into());
        }
        if self.max_iter == 0 {
            return fail("max_iter must be positive".into());
        }
        if self.dimension != space.dim() {
            return fail(format!(
                "config dimension {} does not match search space dimension {}",
                self.dimension,
                space.dim()
            ));
        }
        if !(0.0..=1.0).contains(&self.jumping_rate) {
            return fail(format!(
                "jumping_rate must lie in [0, 1], got {}",
                self.jumping_rate
            ));
        }
        if !(self.jumping_percentage > 0.0 && self.jumping_percentage <= 1.0) {
            return fail(format!(
                "jumping_percentage must lie in (0, 1], got {}",
                self.jumping_percentage
            ));
        }
        if self.n_transposons == 0 {
            return fail("n_transposons must be positive".into());
        }
        if self.lambda == 0 {
            return fail("lambda must be positive".into());
        }
        if let CeMode::Fixed(alpha) = self.ce_mode {
            if !(alpha.is_finite() && alpha > 0.0) {
                return fail(format!(
                    "fixed CE coefficient must be positive, got {alpha}"
                ));
            }
        }
        Ok(())
    }
}

/// Which optimizer drives the search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Pso,
    Qpso,
    Ebqpso,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::Pso, Strategy::Qpso, Strategy::Ebqpso];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Pso => "pso",
            Strategy::Qpso => "qpso",
            Strategy::Ebqpso => "ebqpso",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pso" => Ok(Strategy::Pso),
            "qpso" => Ok(Strategy::Qpso),
            "ebqpso" => Ok(Strategy::Ebqpso),
            other => Err(Error::invalid(format!(
                "unknown strategy '{other}' (expected pso, qpso or ebqpso)"
            ))),
        }
    }
}

/// One member of the swarm.
#[derive(Debug, Clone, PartialEq)]
pub struct Particle {
    pub position: Vec<f64>,
    pub pbest_position: Vec<f64>,
    pub pbest_fitness: f64,
    /// Only used by PSO; stays zero for the quantum variants.
    pub velocity: Vec<f64>,
}

/// State handed to an observer after every iteration.
#[derive(Debug)]
pub struct SwarmSnapshot<'a> {
    /// 1-based iteration index.
    pub iteration: usize,
    pub particles: &'a [Particle],
    pub gbest_index: usize,
    /// Whether elitist breeding ran during this iteration.
    pub bred: bool,
}

/// Outcome of one optimizer run.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeResult {
    pub best_position: Vec<f64>,
    pub best_fitness: f64,
    /// Best fitness after each iteration; non-increasing.
    pub history: Vec<f64>,
    /// Number of fitness calls actually made (cache hits excluded).
    pub evaluations: usize,
    /// Calls that returned a non-finite value and were scored as `+inf`.
    pub rejected_evaluations: usize,
}

/// Runs `strategy` on `fitness` over `space`.
pub fn optimize<F>(
    strategy: Strategy,
    fitness: &F,
    space: &SearchSpace,
    config: &SwarmConfig,
) -> Result<OptimizeResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    optimize_observed(strategy, fitness, space, config, |_| {})
}

/// [`optimize`] with a callback invoked after every iteration.
pub fn optimize_observed<F, O>(
    strategy: Strategy,
    fitness: &F,
    space: &SearchSpace,
    config: &SwarmConfig,
    observer: O,
) -> Result<OptimizeResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
    O: FnMut(&SwarmSnapshot<'_>),
{
    config.validate(space)?;
    Ok(match strategy {
        Strategy::Pso => pso::run(fitness, space, config, observer),
        Strategy::Qpso => qpso::run(fitness, space, config, false, observer),
        Strategy::Ebqpso => qpso::run(fitness, space, config, true, observer),
    })
}

pub fn optimize_pso<F>(
    fitness: &F,
    space: &SearchSpace,
    config: &SwarmConfig,
) -> Result<OptimizeResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    optimize(Strategy::Pso, fitness, space, config)
}

pub fn optimize_qpso<F>(
    fitness: &F,
    space: &SearchSpace,
    config: &SwarmConfig,
) -> Result<OptimizeResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    optimize(Strategy::Qpso, fitness, space, config)
}

pub fn optimize_ebqpso<F>(
    fitness: &F,
    space: &SearchSpace,
    config: &SwarmConfig,
) -> Result<OptimizeResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    optimize(Strategy::Ebqpso, fitness, space, config)
}

/// Memoizing, order-preserving batch evaluator.
struct Evaluator<'f, F> {
    fitness: &'f F,
    cache: HashMap<Vec<u64>, f64>,
    evaluations: usize,
    rejected: usize,
}

fn cache_key(x: &[f64]) -> Vec<u64> {
    x.iter().map(|v| v.to_bits()).collect()
}

impl<'f, F> Evaluator<'f, F>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    fn new(fitness: &'f F) -> Self {
        Self {
            fitness,
            cache: HashMap::new(),
            evaluations: 0,
            rejected: 0,
        }
    }

    fn evaluate(&mut self, positions: &[&[f64]]) -> Vec<f64> {
        let mut pending: Vec<&[f64]> = Vec::new();
        let mut seen = std::collections::HashSet::new();
        for p in positions {
            let key = cache_key(p);
            if !self.cache.contains_key(&key) && seen.insert(key) {
                pending.push(p);
            }
        }
        let fitness = self.fitness;
        let values: Vec<f64> = pending.par_iter().map(|p| fitness(p)).collect();
        for (p, v) in pending.iter().zip(values) {
            self.evaluations += 1;
            let v = if v.is_finite() {
                v
            } else {
                self.rejected += 1;
                f64::INFINITY
            };
            self.cache.insert(cache_key(p), v);
        }
        positions
            .iter()
            .map(|p| self.cache[&cache_key(p)])
            .collect()
    }
}

/// Index of the smallest personal-best fitness; ties go to the lower index.
fn argmin_pbest(particles: &[Particle]) -> usize {
    let mut best = 0;
    for (i, p) in particles.iter().enumerate().skip(1) {
        if p.pbest_fitness < particles[best].pbest_fitness {
            best = i;
        }
    }
    best
}

fn finish<F>(particles: &[Particle], history: Vec<f64>, eval: &Evaluator<'_, F>) -> OptimizeResult {
    let g = argmin_pbest(particles);
    OptimizeResult {
        best_position: particles[g].pbest_position.clone(),
        best_fitness: particles[g].pbest_fitness,
        history,
        evaluations: eval.evaluations,
        rejected_evaluations: eval.rejected,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn search_space_validation() {
        assert!(SearchSpace::new(vec![0.0], vec![0.0]).is_err());
        assert!(SearchSpace::new(vec![1.0], vec![0.0]).is_err());
        assert!(SearchSpace::new(vec![0.0, 0.0], vec![1.0]).is_err());
        assert!(SearchSpace::new(vec![], vec![]).is_err());
        assert!(SearchSpace::new(vec![f64::NEG_INFINITY], vec![0.0]).is_err());
        let s = SearchSpace::new(vec![-1.0, 0.0], vec![1.0, 5.0]).unwrap();
        let mut x = [3.0, -2.0];
        s.clamp(&mut x);
        assert_eq!(x, [1.0, 0.0]);
        assert!(s.contains(&x));
    }

    #[test]
    fn defaults_match_reference_settings() {
        let c = SwarmConfig::default();
        assert_eq!(c.population, 20);
        assert_eq!(c.dimension, 2);
        assert_eq!(c.max_iter, 50);
        assert_eq!(c.jumping_rate, 0.2);
        assert_eq!(c.jumping_percentage, 1.0);
        assert_eq!(c.n_transposons, 1);
        assert_eq!(c.lambda, 3);
    }

    #[test]
    fn config_validation() {
        let space = SearchSpace::uniform(2, 0.0, 1.0).unwrap();
        assert!(SwarmConfig::default().validate(&space).is_ok());
        let bad = [
            SwarmConfig {
                population: 0,
                ..Default::default()
            },
            SwarmConfig {
                max_iter: 0,
                ..Default::default()
            },
            SwarmConfig {
                dimension: 3,
                ..Default::default()
            },
            SwarmConfig {
                jumping_rate: 1.5,
                ..Default::default()
            },
            SwarmConfig {
                jumping_percentage: 0.0,
                ..Default::default()
            },
            SwarmConfig {
                lambda: 0,
                ..Default::default()
            },
            SwarmConfig {
                n_transposons: 0,
                ..Default::default()
            },
            SwarmConfig {
                ce_mode: CeMode::Fixed(-1.0),
                ..Default::default()
            },
        ];
        for c in bad {
            assert!(c.validate(&space).is_err(), "{c:?}");
        }
    }

    #[test]
    fn strategy_names_round_trip() {
        for s in Strategy::ALL {
            assert_eq!(s.name().parse::<Strategy>().unwrap(), s);
        }
        assert!("gwo".parse::<Strategy>().is_err());
    }

    #[test]
    fn evaluator_caches_and_rejects() {
        let calls = std::sync::atomic::AtomicUsize::new(0);
        let f = |x: &[f64]| {
            calls.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
            if x[0] < 0.0 {
                f64::NAN
            } else {
                x[0]
            }
        };
        let mut e = Evaluator::new(&f);
        let a = [1.0];
        let b = [-1.0];
        let v = e.evaluate(&[&a, &b, &a]);
        assert_eq!(v, vec![1.0, f64::INFINITY, 1.0]);
        assert_eq!(e.evaluations, 2);
        assert_eq!(e.rejected, 1);
        e.evaluate(&[&a]);
        assert_eq!(calls.load(std::sync::atomic::Ordering::Relaxed), 2);
    }
}
