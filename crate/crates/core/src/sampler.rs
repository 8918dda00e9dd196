//! Stochastic, collision-aware lattice path generator.
//!
//! Each tuple entry is drawn inside its admissible range `[L_i, U_i]`, with the
//! position inside the range set by `lambda = r * (i / n)^alpha`. Small `alpha`
//! front-loads the rise (L-shaped paths); large `alpha` keeps every entry at
//! its lower bound (paths hugging the diagonal).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codec::{tuple_to_path, LatticePath, Side, TreeTuple};
use crate::gridmap::OccupancyGrid;
use crate::rng::{streams, RandomStream, UniformSource};

/// Exponents above this behave as "diagonal-hugging" and are clamped.
pub const MAX_ALPHA: f64 = 1.0e6;

/// Bounds for the next tuple entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bounds {
    pub lower: usize,
    pub upper: usize,
    pub slack: i64,
}

/// One step of the bounds recursion, from `(t_{i-1}, S_{i-1}, U_{i-1})` to
/// `(L_i, U_i, S_i)`.
///
/// `L_i = 1 - sgn(t_{i-1} + S_{i-1} - 1)` with `sgn(0) = 0`; a negative
/// argument (impossible for valid prefixes) is clamped to `L_i = 1`.
pub fn next_bounds(prev_t: usize, prev_slack: i64, prev_upper: usize) -> Bounds {
    let arg = prev_t as i64 + prev_slack - 1;
    let lower = if arg > 0 { 0 } else { 1 };
    Bounds {
        lower,
        upper: prev_upper.saturating_sub(prev_t),
        slack: prev_slack + prev_t as i64 - 1,
    }
}

/// `L_i` from the entries alone: `1 - sgn(sum_{j<i} (t_j - 1))`, where the
/// implicit `t_0 = 1` contributes nothing.
pub fn lower_bound_from_prefix(prefix: &[usize]) -> usize {
    let s: i64 = prefix.iter().map(|&t| t as i64 - 1).sum();
    if s > 0 {
        0
    } else {
        1
    }
}

/// `round(L + lambda * (U - L))`, ties away from zero, kept in `[L, U]`.
pub fn quantize(lower: usize, upper: usize, lambda: f64) -> usize {
    debug_assert!(lower <= upper);
    let raw = lower as f64 + lambda * (upper - lower) as f64;
    (raw.round() as usize).clamp(lower, upper)
}

/// `lambda = r * (x / n)^alpha` for the 1-based column index `x`.
pub fn lambda_of(x: usize, n: usize, alpha: f64, r: f64) -> f64 {
    let alpha = alpha.min(MAX_ALPHA);
    let lambda = r * (x as f64 / n as f64).powf(alpha);
    lambda.clamp(0.0, 1.0)
}

/// Recursion state between two emitted entries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplerState {
    pub lower: usize,
    pub upper: usize,
    pub slack: i64,
    /// Entries still to emit.
    pub remaining: usize,
    /// 0-based grid column of the next entry.
    pub x: usize,
    /// Current path height.
    pub y: usize,
    /// Normalization factor used for the most recent entry.
    pub lambda: f64,
}

impl SamplerState {
    /// State before the first entry: `t_0 = 1, S_0 = 0, U_0 = n`.
    pub fn initial(n: usize) -> Self {
        let b = next_bounds(1, 0, n);
        Self { lower: b.lower, upper: b.upper, slack: b.slack, remaining: n, x: 0, y: 0, lambda: 0.0 }
    }

    /// 1-based index of the next entry.
    pub fn index(&self) -> usize {
        self.x + 1
    }

    /// The recursion gives `L_n = 1` whenever the path touches the diagonal
    /// right before the last column, while `U_n = 0` always; the last entry is
    /// forced to zero.
    pub fn effective_lower(&self) -> usize {
        self.lower.min(self.upper)
    }

    pub fn advance(&mut self, t: usize) {
        let b = next_bounds(t, self.slack, self.upper);
        self.lower = b.lower;
        self.upper = b.upper;
        self.slack = b.slack;
        self.remaining -= 1;
        self.x += 1;
        self.y += t;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub alpha: f64,
    #[serde(default)]
    pub side: Side,
    #[serde(default)]
    pub rng_seed: u64,
    /// Check every node of the vertical rise and horizontal step (default),
    /// or only the column-top node.
    #[serde(default = "default_strict")]
    pub strict_collision: bool,
}

fn default_strict() -> bool {
    true
}

impl SamplerConfig {
    pub fn new(alpha: f64) -> Self {
        Self { alpha, side: Side::Above, rng_seed: 0, strict_collision: true }
    }

    pub fn with_side(mut self, side: Side) -> Self {
        self.side = side;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.rng_seed = seed;
        self
    }

    pub fn with_strict(mut self, strict: bool) -> Self {
        self.strict_collision = strict;
        self
    }

    pub fn validate(&self) -> Result<(), SamplerError> {
        if !self.alpha.is_finite() || self.alpha < 0.0 {
            return Err(SamplerError::InvalidAlpha(self.alpha));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum SamplerError {
    #[error("alpha must be finite and non-negative, got {0}")]
    InvalidAlpha(f64),
}

/// Why a generation stopped. Not an error: infeasible samples are expected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Blocked {
    /// 0-based column (above-diagonal orientation) of the collision.
    pub column: usize,
    /// Height the column would have reached.
    pub height: usize,
    /// Entries emitted before the collision.
    pub prefix: Vec<usize>,
}

/// A successful generation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Generated {
    pub tuple: TreeTuple,
    pub path: LatticePath,
}

fn rise_clear(grid: &OccupancyGrid, side: Side, column: usize, from: usize, to: usize) -> bool {
    match side {
        Side::Above => grid.column_clear(column, from, to),
        Side::Below => grid.row_clear(column, from, to),
    }
}

/// Draws one path, one fresh `r` per entry. Stops at the first collision.
pub fn generate_path<R: UniformSource + ?Sized>(
    grid: &OccupancyGrid,
    cfg: &SamplerConfig,
    rng: &mut R,
) -> Result<Generated, Blocked> {
    let n = grid.size();
    let mut state = SamplerState::initial(n);
    let mut entries = Vec::with_capacity(n);
    while state.remaining > 0 {
        let r = rng.next_uniform();
        state.lambda = lambda_of(state.index(), n, cfg.alpha, r);
        let t = quantize(state.effective_lower(), state.upper, state.lambda);
        let column = state.x;
        let top = state.y + t;
        let clear = if cfg.strict_collision {
            rise_clear(grid, cfg.side, column, state.y, top)
        } else {
            let (gx, gy) = cfg.side.orient(column, top);
            !grid.occupied_at(gx, gy)
        };
        if !clear {
            return Err(Blocked { column, height: top, prefix: entries });
        }
        entries.push(t);
        state.advance(t);
    }
    let tuple = TreeTuple::from_trusted(entries);
    let path = tuple_to_path(&tuple, cfg.side);
    Ok(Generated { tuple, path })
}

/// Convenience wrapper seeding a fresh stream from `cfg.rng_seed`.
pub fn sample(grid: &OccupancyGrid, cfg: &SamplerConfig) -> Result<Generated, Blocked> {
    let mut rng = RandomStream::new(cfg.rng_seed);
    generate_path(grid, cfg, &mut rng)
}

/// Above- and below-diagonal generations from one root seed, on the
/// substreams [`streams::ABOVE`] and [`streams::BELOW`]. Both run in
/// parallel; neither result depends on the other.
pub fn generate_both_sides(
    grid: &OccupancyGrid,
    alpha_above: f64,
    alpha_below: f64,
    seed: u64,
    strict_collision: bool,
) -> (Result<Generated, Blocked>, Result<Generated, Blocked>) {
    let run = |alpha: f64, side: Side, stream: u64| {
        let cfg = SamplerConfig { alpha, side, rng_seed: seed, strict_collision };
        let mut rng = RandomStream::substream(seed, stream);
        generate_path(grid, &cfg, &mut rng)
    };
    rayon::join(
        || run(alpha_above, Side::Above, streams::ABOVE),
        || run(alpha_below, Side::Below, streams::BELOW),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::validate_tuple;
    use crate::rng::PinnedUniform;

    #[test]
    fn next_bounds_examples() {
        assert_eq!(next_bounds(1, 0, 5), Bounds { lower: 1, upper: 4, slack: 0 });
        assert_eq!(next_bounds(4, 0, 4), Bounds { lower: 0, upper: 0, slack: 3 });
        assert_eq!(next_bounds(1, 0, 4), Bounds { lower: 1, upper: 3, slack: 0 });
        // negative argument clamps to 1
        assert_eq!(next_bounds(0, 0, 4).lower, 1);
    }

    #[test]
    fn quantize_examples() {
        assert_eq!(quantize(0, 3, 0.5), 2);
        assert_eq!(quantize(1, 1, 0.0), 1);
        assert_eq!(quantize(1, 1, 0.99), 1);
        assert_eq!(quantize(0, 4, 1.0), 4);
        assert_eq!(quantize(0, 4, 0.0), 0);
        assert_eq!(quantize(0, 1, 0.5), 1);
        assert_eq!(quantize(0, 1, 0.4999), 0);
    }

    #[test]
    fn lambda_examples() {
        assert_eq!(lambda_of(50, 50, 3.7, 1.0), 1.0);
        assert_eq!(lambda_of(7, 50, 0.0, 0.3), 0.3);
        assert!((lambda_of(25, 50, 2.0, 1.0) - 0.25).abs() < 1e-15);
        assert_eq!(lambda_of(49, 50, 1e300, 1.0), 0.0);
    }

    #[test]
    fn initial_state() {
        let s = SamplerState::initial(50);
        assert_eq!((s.lower, s.upper, s.slack, s.remaining), (1, 49, 0, 50));
    }

    #[test]
    fn empty_grid_always_succeeds() {
        let g = OccupancyGrid::empty(50, "e");
        for seed in 0..50 {
            for &alpha in &[0.0, 0.3, 1.2, 2.5, 10.0] {
                let out = sample(&g, &SamplerConfig::new(alpha).with_seed(seed)).unwrap();
                assert_eq!(out.path.endpoint(), (49, 49));
                assert!(validate_tuple(out.tuple.entries()).is_ok());
            }
        }
    }

    #[test]
    fn pinned_r_extremes() {
        let g = OccupancyGrid::empty(50, "e");
        let l = generate_path(&g, &SamplerConfig::new(0.0), &mut PinnedUniform(1.0)).unwrap();
        assert_eq!(l.tuple, TreeTuple::l_shape(50));
        let s = generate_path(&g, &SamplerConfig::new(64.0), &mut PinnedUniform(1.0)).unwrap();
        assert_eq!(s.tuple, TreeTuple::staircase(50));
        // r = 0 always yields the lower bounds
        let z = generate_path(&g, &SamplerConfig::new(0.0), &mut PinnedUniform(0.0)).unwrap();
        assert_eq!(z.tuple, TreeTuple::staircase(50));
    }

    #[test]
    fn staircase_corridor() {
        // only the nodes on and one above the diagonal are free
        let g = OccupancyGrid::from_fn(50, "corridor", |x, y| !(y == x || y == x + 1)).unwrap();
        let out = generate_path(&g, &SamplerConfig::new(1.0e6), &mut RandomStream::new(3)).unwrap();
        assert_eq!(out.tuple, TreeTuple::staircase(50));
    }

    #[test]
    fn wall_near_destination_blocks_every_seed() {
        // row 48 blocked for every above-diagonal column
        let g = OccupancyGrid::from_fn(50, "wall", |x, y| y == 48 && x <= 48).unwrap();
        assert!(!g.has_monotone_path(Side::Above));
        for seed in 0..200 {
            let cfg = SamplerConfig::new(seed as f64 / 20.0).with_seed(seed);
            assert!(sample(&g, &cfg).is_err());
        }
    }

    #[test]
    fn strict_mode_catches_rise_through_obstacle() {
        // an obstacle inside column 0 that an L-shaped rise passes through
        let g = OccupancyGrid::from_fn(10, "dot", |x, y| (x, y) == (0, 4)).unwrap();
        let l = SamplerConfig::new(0.0);
        assert!(generate_path(&g, &l, &mut PinnedUniform(1.0)).is_err());
        let faithful = l.with_strict(false);
        assert!(generate_path(&g, &faithful, &mut PinnedUniform(1.0)).is_ok());
    }

    #[test]
    fn below_side_swaps() {
        let g = OccupancyGrid::empty(6, "e");
        let out =
            generate_path(&g, &SamplerConfig::new(0.0).with_side(Side::Below), &mut PinnedUniform(1.0))
                .unwrap();
        assert_eq!(out.path.nodes()[1], (5, 0));
        assert_eq!(out.path.endpoint(), (5, 5));
    }

    #[test]
    fn both_sides() {
        let g = OccupancyGrid::empty(20, "e");
        let (a, b) = generate_both_sides(&g, 1.2, 2.5, 11, true);
        assert!(a.is_ok() && b.is_ok());
        assert_eq!(b.unwrap().path.side(), Side::Below);

        // block the whole strict upper triangle
        let g = OccupancyGrid::from_fn(20, "upper", |x, y| y > x && y >= 2).unwrap();
        let (a, b) = generate_both_sides(&g, 1.2, 2.5, 11, true);
        assert!(a.is_err());
        assert!(b.is_ok());
    }

    #[test]
    fn both_sides_match_individual_substreams() {
        let g = OccupancyGrid::empty(30, "e");
        let (a, b) = generate_both_sides(&g, 1.5, 0.7, 99, true);
        let below = SamplerConfig::new(0.7).with_side(Side::Below);
        let b_alone = generate_path(&g, &below, &mut RandomStream::substream(99, streams::BELOW));
        let above = SamplerConfig::new(1.5);
        let a_alone = generate_path(&g, &above, &mut RandomStream::substream(99, streams::ABOVE));
        assert_eq!(b, b_alone);
        assert_eq!(a, a_alone);
    }

    #[test]
    fn config_validation() {
        assert!(SamplerConfig::new(f64::NAN).validate().is_err());
        assert!(SamplerConfig::new(-1.0).validate().is_err());
        assert!(SamplerConfig::new(0.0).validate().is_ok());
    }
}
