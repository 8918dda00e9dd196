//! Rank-based differential evolution: DE/rand/1/bin whose donors are drawn
//! with Whitley's linear rank bias instead of uniformly.

use rand::Rng;

use super::de::{de_crossover_select, differential, init_population, Individual};
use super::{distinct_indices, OptimizerConfig};
use crate::objective::PathObjective;

/// Attempts at drawing a fresh biased index before falling back to uniform.
const MAX_REDRAWS: usize = 1000;

/// Whitley's bias transform: rank `floor(N / (2(b-1)) * (b - sqrt(b^2 - 4(b-1)u)))`
/// for `u` in `[0, 1)`, clamped to `[0, N-1]`. Rank 0 is the best.
pub fn whitley_index(n: usize, beta: f64, u: f64) -> usize {
    let disc = (beta * beta - 4.0 * (beta - 1.0) * u).max(0.0);
    let raw = n as f64 / (2.0 * (beta - 1.0)) * (beta - disc.sqrt());
    (raw.floor().max(0.0) as usize).min(n - 1)
}

/// Ranks best-first; ties keep their population order.
pub fn rank_order(population: &[Individual]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..population.len()).collect();
    order.sort_by(|&a, &b| population[a].fitness.total_cmp(&population[b].fitness));
    order
}

/// Three distinct donor indices (population indices, not ranks), none equal
/// to `target`, each drawn through the rank bias.
pub fn rbde_select_indices<R: Rng + ?Sized>(
    ranked: &[usize],
    target: usize,
    beta: f64,
    rng: &mut R,
) -> [usize; 3] {
    let n = ranked.len();
    let mut picked: Vec<usize> = Vec::with_capacity(3);
    let mut tries = 0;
    while picked.len() < 3 && tries < MAX_REDRAWS {
        tries += 1;
        let idx = ranked[whitley_index(n, beta, rng.random::<f64>())];
        if idx != target && !picked.contains(&idx) {
            picked.push(idx);
        }
    }
    if picked.len() < 3 {
        let mut exclude = picked.clone();
        exclude.push(target);
        picked.extend(distinct_indices(rng, n, &exclude, 3 - picked.len()));
    }
    [picked[0], picked[1], picked[2]]
}

pub(crate) fn run<R: Rng + ?Sized>(cfg: &OptimizerConfig, obj: &mut PathObjective<'_>, rng: &mut R) {
    let Some(mut pop) = init_population(cfg, obj, rng) else { return };
    loop {
        let ranked = rank_order(&pop);
        let mut next = pop.clone();
        for i in 0..pop.len() {
            let [r1, r2, r3] = rbde_select_indices(&ranked, i, cfg.beta, rng);
            let mutant =
                cfg.domain.clamp(differential(pop[r1].position, pop[r2].position, pop[r3].position, cfg.f));
            match de_crossover_select(pop[i], mutant, cfg.cr, rng, obj) {
                Ok((survivor, _)) => next[i] = survivor,
                Err(_) => return,
            }
        }
        pop = next;
    }
}
