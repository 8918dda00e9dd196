//! Population heuristics over the scalar curvature preference.
//!
//! All optimizers share one contract: they draw candidates from
//! [`SearchDomain`], spend the objective's budget exactly, and stop when the
//! objective refuses further evaluations.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codec::Side;
use crate::gridmap::OccupancyGrid;
use crate::objective::{Incumbent, PathObjective};
use crate::rng::{streams, RandomStream};

pub mod de;
pub mod pso;
pub mod rbde;
pub mod sade;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[derive(clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    Pso,
    #[value(name = "debest")]
    DeBest,
    #[value(name = "derand")]
    DeRand,
    Sade,
    Rbde,
}

impl OptimizerKind {
    pub const ALL: [OptimizerKind; 5] =
        [OptimizerKind::Pso, OptimizerKind::DeBest, OptimizerKind::DeRand, OptimizerKind::Sade, OptimizerKind::Rbde];

    pub fn as_str(self) -> &'static str {
        match self {
            OptimizerKind::Pso => "pso",
            OptimizerKind::DeBest => "debest",
            OptimizerKind::DeRand => "derand",
            OptimizerKind::Sade => "sade",
            OptimizerKind::Rbde => "rbde",
        }
    }

    /// Smallest population the variation operators can work with.
    pub fn min_population(self) -> usize {
        match self {
            // rand/2 needs five donors besides the target
            OptimizerKind::Sade => 6,
            _ => 4,
        }
    }
}

impl fmt::Display for OptimizerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for OptimizerKind {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        OptimizerKind::ALL
            .into_iter()
            .find(|k| k.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| ConfigError::UnknownKind(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("unknown optimizer `{0}` (valid: pso, debest, derand, sade, rbde)")]
    UnknownKind(String),
    #[error("{kind} needs a population of at least {min}, got {got}")]
    PopulationTooSmall { kind: OptimizerKind, min: usize, got: usize },
    #[error("invalid search domain [{0}, {1}]")]
    Domain(f64, f64),
    #[error("invalid parameter {name} = {value}")]
    Parameter { name: &'static str, value: f64 },
}

/// Box for alpha; candidates outside are clamped onto the nearest bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchDomain {
    pub min: f64,
    pub max: f64,
}

impl Default for SearchDomain {
    fn default() -> Self {
        Self { min: 0.0, max: 10.0 }
    }
}

impl SearchDomain {
    pub fn clamp(&self, x: f64) -> f64 {
        if x.is_nan() {
            return self.min;
        }
        x.clamp(self.min, self.max)
    }

    pub fn width(&self) -> f64 {
        self.max - self.min
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.min + rng.random::<f64>() * self.width()
    }

    pub fn contains(&self, x: f64) -> bool {
        (self.min..=self.max).contains(&x)
    }
}

/// Constants of the SaDE strategy adaptation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SadeParams {
    /// Generations per learning period.
    pub learning_period: usize,
    pub f_mean: f64,
    pub f_sd: f64,
    /// Initial mean of every strategy's CR law.
    pub cr_init: f64,
    pub cr_sd: f64,
    /// Added to every success rate so no strategy's probability reaches 0.
    pub epsilon: f64,
}

impl Default for SadeParams {
    fn default() -> Self {
        Self { learning_period: 50, f_mean: 0.5, f_sd: 0.3, cr_init: 0.5, cr_sd: 0.1, epsilon: 0.01 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    pub kind: OptimizerKind,
    pub population: usize,
    pub omega: f64,
    pub c1: f64,
    pub c2: f64,
    pub cr: f64,
    pub f: f64,
    pub beta: f64,
    pub sade: SadeParams,
    pub domain: SearchDomain,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            kind: OptimizerKind::Pso,
            population: 10,
            omega: 0.7,
            c1: 2.05,
            c2: 2.05,
            cr: 0.5,
            f: 0.7,
            beta: 2.0,
            sade: SadeParams::default(),
            domain: SearchDomain::default(),
            seed: 0,
        }
    }
}

impl OptimizerConfig {
    pub fn new(kind: OptimizerKind) -> Self {
        Self { kind, ..Self::default() }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let min = self.kind.min_population();
        if self.population < min {
            return Err(ConfigError::PopulationTooSmall { kind: self.kind, min, got: self.population });
        }
        let d = self.domain;
        if !(d.min.is_finite() && d.max.is_finite()) || d.min < 0.0 || d.min >= d.max {
            return Err(ConfigError::Domain(d.min, d.max));
        }
        let checks: [(&'static str, f64, bool); 9] = [
            ("omega", self.omega, self.omega.is_finite()),
            ("c1", self.c1, self.c1.is_finite() && self.c1 >= 0.0),
            ("c2", self.c2, self.c2.is_finite() && self.c2 >= 0.0),
            ("cr", self.cr, (0.0..=1.0).contains(&self.cr)),
            ("f", self.f, self.f.is_finite() && self.f >= 0.0),
            ("beta", self.beta, self.beta.is_finite() && self.beta > 1.0 && self.beta <= 2.0),
            ("sade.learning_period", self.sade.learning_period as f64, self.sade.learning_period > 0),
            ("sade.cr_sd", self.sade.cr_sd, self.sade.cr_sd.is_finite() && self.sade.cr_sd >= 0.0),
            ("sade.f_sd", self.sade.f_sd, self.sade.f_sd.is_finite() && self.sade.f_sd >= 0.0),
        ];
        for (name, value, ok) in checks {
            if !ok {
                return Err(ConfigError::Parameter { name, value });
            }
        }
        Ok(())
    }
}

/// Best-so-far fitness after each evaluation (index `i` holds evaluation
/// `i + 1`).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ConvergenceTrace(pub Vec<f64>);

impl ConvergenceTrace {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn last(&self) -> Option<f64> {
        self.0.last().copied()
    }

    pub fn is_monotone(&self) -> bool {
        self.0.windows(2).all(|w| w[1] <= w[0])
    }

    /// `evaluation_index,best_fitness` rows, 1-based.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("evaluation_index,best_fitness\n");
        for (i, v) in self.0.iter().enumerate() {
            out.push_str(&format!("{},{}\n", i + 1, v));
        }
        out
    }

    /// Pads with the last value up to `len` evaluations.
    pub fn extended(&self, len: usize) -> Vec<f64> {
        let mut v = self.0.clone();
        if let Some(&last) = v.last() {
            v.resize(len.max(v.len()), last);
        }
        v
    }
}

#[derive(Debug, Clone)]
pub struct OptimizeResult {
    pub kind: OptimizerKind,
    pub best_alpha: Option<f64>,
    /// `None` only when the budget was zero.
    pub best_fitness: Option<f64>,
    pub incumbent: Option<Incumbent>,
    pub trace: ConvergenceTrace,
    pub evaluations: usize,
}

/// Runs `cfg.kind` until `obj` refuses further evaluations.
pub fn optimize(cfg: &OptimizerConfig, mut obj: PathObjective<'_>) -> Result<OptimizeResult, ConfigError> {
    cfg.validate()?;
    let mut rng = RandomStream::substream(cfg.seed, streams::OPTIMIZER);
    match cfg.kind {
        OptimizerKind::Pso => pso::run(cfg, &mut obj, &mut rng),
        OptimizerKind::DeBest => de::run(de::DeVariant::Best, cfg, &mut obj, &mut rng),
        OptimizerKind::DeRand => de::run(de::DeVariant::Rand, cfg, &mut obj, &mut rng),
        OptimizerKind::Sade => sade::run(cfg, &mut obj, &mut rng),
        OptimizerKind::Rbde => rbde::run(cfg, &mut obj, &mut rng),
    }
    let evaluations = obj.budget().used;
    let (incumbent, trace, best_alpha) = obj.into_parts();
    let best_fitness = trace.last().copied();
    let best_alpha = incumbent.as_ref().map(|i| i.alpha).or(best_alpha);
    Ok(OptimizeResult { kind: cfg.kind, best_alpha, best_fitness, incumbent, trace: ConvergenceTrace(trace), evaluations })
}

/// Builds the objective for one run (stream [`streams::OBJECTIVE`] of
/// `cfg.seed`) and optimizes it.
pub fn run_on_grid(
    grid: &OccupancyGrid,
    side: Side,
    strict_collision: bool,
    cfg: &OptimizerConfig,
    max_evals: usize,
) -> Result<OptimizeResult, ConfigError> {
    let obj = PathObjective::new(grid, side, RandomStream::substream(cfg.seed, streams::OBJECTIVE), max_evals)
        .with_strict_collision(strict_collision);
    optimize(cfg, obj)
}

/// `k` distinct indices in `0..n`, none in `exclude`. Requires
/// `n >= k + exclude.len()`.
pub(crate) fn distinct_indices<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    exclude: &[usize],
    k: usize,
) -> Vec<usize> {
    debug_assert!(n >= k + exclude.len());
    let mut picked = Vec::with_capacity(k);
    while picked.len() < k {
        let c = rng.random_range(0..n);
        if !exclude.contains(&c) && !picked.contains(&c) {
            picked.push(c);
        }
    }
    picked
}

/// Index of the lowest fitness; the first one on ties.
pub(crate) fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v < values[best] {
            best = i;
        }
    }
    best
}
