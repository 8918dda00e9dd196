//! Global-best particle swarm with inertia weight and synchronous best
//! updates: the swarm moves, every particle is evaluated, then the global
//! best is refreshed.

use rand::Rng;

use super::{argmin, OptimizerConfig, SearchDomain};
use crate::objective::PathObjective;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsoParams {
    pub omega: f64,
    pub c1: f64,
    pub c2: f64,
}

impl From<&OptimizerConfig> for PsoParams {
    fn from(cfg: &OptimizerConfig) -> Self {
        Self { omega: cfg.omega, c1: cfg.c1, c2: cfg.c2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Particle {
    pub position: f64,
    pub velocity: f64,
    pub fitness: f64,
    pub best_position: f64,
    pub best_fitness: f64,
}

impl Particle {
    /// Zero initial velocity.
    pub fn new(position: f64, fitness: f64) -> Self {
        Self { position, velocity: 0.0, fitness, best_position: position, best_fitness: fitness }
    }
}

/// `v' = omega v + c1 r1 (pbest - x) + c2 r2 (gbest - x)`
pub fn velocity_update(v: f64, x: f64, pbest: f64, gbest: f64, r1: f64, r2: f64, p: &PsoParams) -> f64 {
    p.omega * v + p.c1 * r1 * (pbest - x) + p.c2 * r2 * (gbest - x)
}

/// Moves every particle once; positions are clamped into `domain`.
pub fn pso_step<R: Rng + ?Sized>(
    swarm: &mut [Particle],
    global_best: f64,
    rng: &mut R,
    params: &PsoParams,
    domain: &SearchDomain,
) {
    for p in swarm.iter_mut() {
        let r1: f64 = rng.random();
        let r2: f64 = rng.random();
        p.velocity = velocity_update(p.velocity, p.position, p.best_position, global_best, r1, r2, params);
        p.position = domain.clamp(p.position + p.velocity);
    }
}

pub(crate) fn run<R: Rng + ?Sized>(cfg: &OptimizerConfig, obj: &mut PathObjective<'_>, rng: &mut R) {
    let params = PsoParams::from(cfg);
    let mut swarm = Vec::with_capacity(cfg.population);
    for _ in 0..cfg.population {
        let x = cfg.domain.sample(rng);
        let Ok(f) = obj.evaluate(x) else { return };
        swarm.push(Particle::new(x, f));
    }
    let bests: Vec<f64> = swarm.iter().map(|p| p.best_fitness).collect();
    let mut gbest = swarm[argmin(&bests)];
    loop {
        pso_step(&mut swarm, gbest.best_position, rng, &params, &cfg.domain);
        let mut exhausted = false;
        for p in swarm.iter_mut() {
            match obj.evaluate(p.position) {
                Ok(f) => {
                    p.fitness = f;
                    if f < p.best_fitness {
                        p.best_fitness = f;
                        p.best_position = p.position;
                    }
                }
                Err(_) => {
                    exhausted = true;
                    break;
                }
            }
        }
        for p in &swarm {
            if p.best_fitness < gbest.best_fitness {
                gbest = *p;
            }
        }
        if exhausted {
            return;
        }
    }
}
