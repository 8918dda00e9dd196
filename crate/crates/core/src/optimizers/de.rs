//! Classic differential evolution, DE/rand/1/bin and DE/best/1/bin.
//!
//! Generations are synchronous: mutants are built from the population as it
//! stood at the start of the generation. With a single decision variable the
//! binomial crossover's forced index always picks the mutant, so `CR` never
//! changes the trial; the crossover is still carried out for the record.

use rand::Rng;

use super::{argmin, distinct_indices, OptimizerConfig, SearchDomain};
use crate::objective::{EvalError, PathObjective};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeVariant {
    Rand,
    Best,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Individual {
    pub position: f64,
    pub fitness: f64,
}

/// `base + f * (a - b)`
#[inline]
pub fn differential(base: f64, a: f64, b: f64, f: f64) -> f64 {
    base + f * (a - b)
}

/// Builds a mutant for `target`: rand uses three distinct donors, best uses
/// the best individual plus two distinct donors. Donors never include the
/// target. Result is clamped into `domain`.
pub fn de_mutate<R: Rng + ?Sized>(
    variant: DeVariant,
    population: &[Individual],
    target: usize,
    f: f64,
    rng: &mut R,
    domain: &SearchDomain,
) -> f64 {
    let x = |i: usize| population[i].position;
    let v = match variant {
        DeVariant::Rand => {
            let r = distinct_indices(rng, population.len(), &[target], 3);
            differential(x(r[0]), x(r[1]), x(r[2]), f)
        }
        DeVariant::Best => {
            let fits: Vec<f64> = population.iter().map(|p| p.fitness).collect();
            let best = argmin(&fits);
            let r = distinct_indices(rng, population.len(), &[target], 2);
            differential(x(best), x(r[0]), x(r[1]), f)
        }
    };
    domain.clamp(v)
}

/// Binomial crossover: each coordinate comes from the mutant with
/// probability `cr`, and coordinate `j_rand` always does.
pub fn binomial_crossover<R: Rng + ?Sized>(target: &[f64], mutant: &[f64], cr: f64, rng: &mut R) -> Vec<f64> {
    debug_assert_eq!(target.len(), mutant.len());
    let j_rand = rng.random_range(0..target.len());
    target
        .iter()
        .zip(mutant)
        .enumerate()
        .map(|(j, (&t, &m))| if j == j_rand || rng.random::<f64>() < cr { m } else { t })
        .collect()
}

/// Greedy selection; the trial wins ties.
#[inline]
pub fn trial_survives(trial_fitness: f64, target_fitness: f64) -> bool {
    trial_fitness <= target_fitness
}

/// Crossover, one evaluation of the trial, then greedy selection.
pub fn de_crossover_select<R: Rng + ?Sized>(
    target: Individual,
    mutant: f64,
    cr: f64,
    rng: &mut R,
    obj: &mut PathObjective<'_>,
) -> Result<(Individual, bool), EvalError> {
    let trial = binomial_crossover(&[target.position], &[mutant], cr, rng)[0];
    let fitness = obj.evaluate(trial)?;
    if trial_survives(fitness, target.fitness) {
        Ok((Individual { position: trial, fitness }, true))
    } else {
        Ok((target, false))
    }
}

/// Evaluates `cfg.population` uniform samples; `None` if the budget runs out
/// first.
pub(crate) fn init_population<R: Rng + ?Sized>(
    cfg: &OptimizerConfig,
    obj: &mut PathObjective<'_>,
    rng: &mut R,
) -> Option<Vec<Individual>> {
    let mut pop = Vec::with_capacity(cfg.population);
    for _ in 0..cfg.population {
        let position = cfg.domain.sample(rng);
        let fitness = obj.evaluate(position).ok()?;
        pop.push(Individual { position, fitness });
    }
    Some(pop)
}

pub(crate) fn run<R: Rng + ?Sized>(
    variant: DeVariant,
    cfg: &OptimizerConfig,
    obj: &mut PathObjective<'_>,
    rng: &mut R,
) {
    let Some(mut pop) = init_population(cfg, obj, rng) else { return };
    loop {
        let mut next = pop.clone();
        for i in 0..pop.len() {
            let mutant = de_mutate(variant, &pop, i, cfg.f, rng, &cfg.domain);
            match de_crossover_select(pop[i], mutant, cfg.cr, rng, obj) {
                Ok((survivor, _)) => next[i] = survivor,
                Err(_) => return,
            }
        }
        pop = next;
    }
}
