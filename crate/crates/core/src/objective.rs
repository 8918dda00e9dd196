//! Fitness of a curvature preference: sample one path and measure it.

use thiserror::Error;

use crate::codec::{LatticePath, Side, TreeTuple};
use crate::gridmap::OccupancyGrid;
use crate::rng::RandomStream;
use crate::sampler::{generate_path, SamplerConfig};

/// Arc length of the node polyline: `t_1 + sum_{i>=2} sqrt(1 + t_i^2)`.
pub fn path_length(p: &LatticePath) -> f64 {
    p.nodes()
        .windows(2)
        .map(|w| {
            let dx = w[1].0 as f64 - w[0].0 as f64;
            let dy = w[1].1 as f64 - w[0].1 as f64;
            dx.hypot(dy)
        })
        .sum()
}

/// Same value computed from the tuple.
pub fn tuple_length(t: &TreeTuple) -> f64 {
    let e = t.entries();
    e[0] as f64 + e[1..].iter().map(|&v| (1.0 + (v * v) as f64).sqrt()).sum::<f64>()
}

/// Default infeasible fitness, `10 n`.
pub fn default_penalty(n: usize) -> f64 {
    10.0 * n as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvaluationBudget {
    pub max_evals: usize,
    pub used: usize,
}

impl EvaluationBudget {
    pub fn new(max_evals: usize) -> Self {
        Self { max_evals, used: 0 }
    }

    pub fn remaining(&self) -> usize {
        self.max_evals - self.used
    }

    pub fn exhausted(&self) -> bool {
        self.used >= self.max_evals
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum EvalError {
    #[error("evaluation budget of {0} exhausted")]
    BudgetExhausted(usize),
    #[error("alpha must be finite and non-negative, got {0}")]
    InvalidAlpha(f64),
}

/// Best feasible sample seen so far.
#[derive(Debug, Clone, PartialEq)]
pub struct Incumbent {
    pub alpha: f64,
    pub length: f64,
    pub tuple: TreeTuple,
    pub path: LatticePath,
    /// 1-based evaluation index that produced it.
    pub evaluation: usize,
}

/// Noisy objective over `alpha`: every call draws a fresh path from the run's
/// stream, returns its length, or the penalty if the draw collides.
///
/// Also records the best-so-far fitness after every evaluation.
#[derive(Debug, Clone)]
pub struct PathObjective<'g> {
    grid: &'g OccupancyGrid,
    side: Side,
    strict_collision: bool,
    penalty: f64,
    rng: RandomStream,
    budget: EvaluationBudget,
    incumbent: Option<Incumbent>,
    best_fitness: f64,
    best_alpha: Option<f64>,
    trace: Vec<f64>,
}

impl<'g> PathObjective<'g> {
    pub fn new(grid: &'g OccupancyGrid, side: Side, rng: RandomStream, max_evals: usize) -> Self {
        let penalty = default_penalty(grid.size());
        Self {
            grid,
            side,
            strict_collision: true,
            penalty,
            rng,
            budget: EvaluationBudget::new(max_evals),
            incumbent: None,
            best_fitness: f64::INFINITY,
            best_alpha: None,
            trace: Vec::with_capacity(max_evals),
        }
    }

    pub fn with_strict_collision(mut self, strict: bool) -> Self {
        self.strict_collision = strict;
        self
    }

    /// Panics unless the penalty exceeds the longest feasible path `2 (n - 1)`.
    pub fn with_penalty(mut self, penalty: f64) -> Self {
        let max_feasible = 2.0 * (self.grid.size() - 1) as f64;
        assert!(penalty > max_feasible, "penalty {penalty} must exceed {max_feasible}");
        self.penalty = penalty;
        self
    }

    pub fn grid(&self) -> &'g OccupancyGrid {
        self.grid
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn penalty(&self) -> f64 {
        self.penalty
    }

    pub fn budget(&self) -> EvaluationBudget {
        self.budget
    }

    pub fn incumbent(&self) -> Option<&Incumbent> {
        self.incumbent.as_ref()
    }

    /// Best fitness seen, `None` before the first evaluation.
    pub fn best_fitness(&self) -> Option<f64> {
        self.best_alpha.map(|_| self.best_fitness)
    }

    pub fn best_alpha(&self) -> Option<f64> {
        self.best_alpha
    }

    /// Best-so-far fitness after each evaluation.
    pub fn trace(&self) -> &[f64] {
        &self.trace
    }

    pub fn evaluate(&mut self, alpha: f64) -> Result<f64, EvalError> {
        if self.budget.exhausted() {
            return Err(EvalError::BudgetExhausted(self.budget.max_evals));
        }
        if !alpha.is_finite() || alpha < 0.0 {
            return Err(EvalError::InvalidAlpha(alpha));
        }
        self.budget.used += 1;
        let cfg = SamplerConfig {
            alpha,
            side: self.side,
            rng_seed: 0,
            strict_collision: self.strict_collision,
        };
        let fitness = match generate_path(self.grid, &cfg, &mut self.rng) {
            Ok(sample) => {
                let length = path_length(&sample.path);
                let improves = self.incumbent.as_ref().is_none_or(|inc| length < inc.length);
                if improves {
                    self.incumbent = Some(Incumbent {
                        alpha,
                        length,
                        tuple: sample.tuple,
                        path: sample.path,
                        evaluation: self.budget.used,
                    });
                }
                length
            }
            Err(_) => self.penalty,
        };
        if fitness < self.best_fitness {
            self.best_fitness = fitness;
            self.best_alpha = Some(alpha);
        }
        self.trace.push(self.best_fitness);
        Ok(fitness)
    }

    pub fn into_parts(self) -> (Option<Incumbent>, Vec<f64>, Option<f64>) {
        (self.incumbent, self.trace, self.best_alpha)
    }
}
