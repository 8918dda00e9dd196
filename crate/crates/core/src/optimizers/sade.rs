//! Self-adaptive differential evolution (SaDE).
//!
//! Every individual picks one of four trial-generation strategies by roulette
//! over learned probabilities. `F` is drawn per individual from
//! `N(f_mean, f_sd)`. `CR` is drawn per individual from
//! `N(CRm_k, cr_sd)` for its strategy `k`, redrawn until it lands in `[0, 1]`.
//! At the end of every learning period, each strategy's probability becomes
//! its success rate plus `epsilon`, normalized, and `CRm_k` becomes the median
//! of the CR values that produced surviving trials.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::de::{binomial_crossover, init_population, trial_survives, Individual};
use super::{argmin, distinct_indices, OptimizerConfig, SadeParams, SearchDomain};
use crate::objective::{EvalError, PathObjective};

/// Redraws allowed for a CR sample before clamping.
const MAX_CR_DRAWS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SadeStrategy {
    /// `x_r1 + F (x_r2 - x_r3)`, binomial crossover.
    Rand1Bin,
    /// `x_i + F (x_best - x_i) + F (x_r1 - x_r2) + F (x_r3 - x_r4)`, binomial crossover.
    RandToBest2Bin,
    /// `x_r1 + F (x_r2 - x_r3) + F (x_r4 - x_r5)`, binomial crossover.
    Rand2Bin,
    /// `x_i + K (x_r1 - x_i) + F (x_r2 - x_r3)` with `K ~ U[0, 1]`, no crossover.
    CurrentToRand1,
}

impl SadeStrategy {
    pub const ALL: [SadeStrategy; 4] = [
        SadeStrategy::Rand1Bin,
        SadeStrategy::RandToBest2Bin,
        SadeStrategy::Rand2Bin,
        SadeStrategy::CurrentToRand1,
    ];
}

const K: usize = SadeStrategy::ALL.len();

/// Learned strategy probabilities and CR means plus the current period's
/// success and failure memories.
#[derive(Debug, Clone, PartialEq)]
pub struct SadeState {
    pub params: SadeParams,
    pub probabilities: [f64; K],
    pub cr_means: [f64; K],
    successes: [usize; K],
    failures: [usize; K],
    success_crs: [Vec<f64>; K],
    generation_in_period: usize,
}

impl SadeState {
    pub fn new(params: SadeParams) -> Self {
        Self {
            params,
            probabilities: [1.0 / K as f64; K],
            cr_means: [params.cr_init; K],
            successes: [0; K],
            failures: [0; K],
            success_crs: Default::default(),
            generation_in_period: 0,
        }
    }

    /// Roulette-wheel pick for `u` in `[0, 1)`.
    pub fn choose_strategy(&self, u: f64) -> usize {
        let mut acc = 0.0;
        for (k, p) in self.probabilities.iter().enumerate() {
            acc += p;
            if u < acc {
                return k;
            }
        }
        K - 1
    }

    pub fn sample_f<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        Normal::new(self.params.f_mean, self.params.f_sd).expect("validated sd").sample(rng)
    }

    pub fn sample_cr<R: Rng + ?Sized>(&self, strategy: usize, rng: &mut R) -> f64 {
        let law = Normal::new(self.cr_means[strategy], self.params.cr_sd).expect("validated sd");
        for _ in 0..MAX_CR_DRAWS {
            let cr = law.sample(rng);
            if (0.0..=1.0).contains(&cr) {
                return cr;
            }
        }
        self.cr_means[strategy].clamp(0.0, 1.0)
    }

    pub fn record(&mut self, strategy: usize, cr: f64, success: bool) {
        if success {
            self.successes[strategy] += 1;
            self.success_crs[strategy].push(cr);
        } else {
            self.failures[strategy] += 1;
        }
    }

    /// Closes a generation; at a period boundary adapts and clears the
    /// memories. Returns whether adaptation happened.
    pub fn end_generation(&mut self) -> bool {
        self.generation_in_period += 1;
        if self.generation_in_period < self.params.learning_period {
            return false;
        }
        self.adapt();
        self.generation_in_period = 0;
        self.successes = [0; K];
        self.failures = [0; K];
        self.success_crs = Default::default();
        true
    }

    /// Probabilities from success rates (untried strategies count as rate 0)
    /// and CR means from success medians. A period with no trials at all
    /// leaves everything unchanged.
    fn adapt(&mut self) {
        let trials: usize = self.successes.iter().zip(&self.failures).map(|(s, f)| s + f).sum();
        if trials == 0 {
            return;
        }
        let rates: [f64; K] = std::array::from_fn(|k| {
            let t = self.successes[k] + self.failures[k];
            let rate = if t == 0 { 0.0 } else { self.successes[k] as f64 / t as f64 };
            rate + self.params.epsilon
        });
        let total: f64 = rates.iter().sum();
        if total > 0.0 {
            for (p, r) in self.probabilities.iter_mut().zip(rates) {
                *p = r / total;
            }
        }
        for k in 0..K {
            if let Some(m) = median(&self.success_crs[k]) {
                self.cr_means[k] = m;
            }
        }
    }
}

fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[m] } else { 0.5 * (v[m - 1] + v[m]) })
}

/// Trial position for `target` under `strategy`, clamped into `domain`.
pub fn sade_trial<R: Rng + ?Sized>(
    strategy: SadeStrategy,
    population: &[Individual],
    target: usize,
    f: f64,
    cr: f64,
    rng: &mut R,
    domain: &SearchDomain,
) -> f64 {
    let x = |i: usize| population[i].position;
    let xi = x(target);
    let n = population.len();
    let raw = match strategy {
        SadeStrategy::Rand1Bin => {
            let r = distinct_indices(rng, n, &[target], 3);
            let v = x(r[0]) + f * (x(r[1]) - x(r[2]));
            binomial_crossover(&[xi], &[v], cr, rng)[0]
        }
        SadeStrategy::RandToBest2Bin => {
            let fits: Vec<f64> = population.iter().map(|p| p.fitness).collect();
            let best = argmin(&fits);
            let r = distinct_indices(rng, n, &[target], 4);
            let v = xi + f * (x(best) - xi) + f * (x(r[0]) - x(r[1])) + f * (x(r[2]) - x(r[3]));
            binomial_crossover(&[xi], &[v], cr, rng)[0]
        }
        SadeStrategy::Rand2Bin => {
            let r = distinct_indices(rng, n, &[target], 5);
            let v = x(r[0]) + f * (x(r[1]) - x(r[2])) + f * (x(r[3]) - x(r[4]));
            binomial_crossover(&[xi], &[v], cr, rng)[0]
        }
        SadeStrategy::CurrentToRand1 => {
            let r = distinct_indices(rng, n, &[target], 3);
            let k: f64 = rng.random();
            xi + k * (x(r[0]) - xi) + f * (x(r[1]) - x(r[2]))
        }
    };
    domain.clamp(raw)
}

/// One synchronous generation: strategy choice, trial, evaluation, greedy
/// selection, memory update.
pub fn sade_step<R: Rng + ?Sized>(
    state: &mut SadeState,
    population: &mut Vec<Individual>,
    obj: &mut PathObjective<'_>,
    rng: &mut R,
    domain: &SearchDomain,
) -> Result<(), EvalError> {
    let mut next = population.clone();
    for i in 0..population.len() {
        let k = state.choose_strategy(rng.random());
        let f = state.sample_f(rng);
        let cr = state.sample_cr(k, rng);
        let trial = sade_trial(SadeStrategy::ALL[k], population, i, f, cr, rng, domain);
        let fitness = obj.evaluate(trial)?;
        let success = trial_survives(fitness, population[i].fitness);
        if success {
            next[i] = Individual { position: trial, fitness };
        }
        state.record(k, cr, success);
    }
    *population = next;
    state.end_generation();
    Ok(())
}

pub(crate) fn run<R: Rng + ?Sized>(cfg: &OptimizerConfig, obj: &mut PathObjective<'_>, rng: &mut R) {
    let Some(mut pop) = init_population(cfg, obj, rng) else { return };
    let mut state = SadeState::new(cfg.sade);
    while sade_step(&mut state, &mut pop, obj, rng, &cfg.domain).is_ok() {}
}
