//! Sampling-based path planning on occupancy grids.
//!
//! Collision-free monotone lattice paths are encoded as ordered trees (child
//! counts in preorder), generated one column at a time under a curvature
//! preference `alpha`, and `alpha` is tuned by population metaheuristics
//! against a noisy path-length objective.

pub mod bench;
pub mod cli;
pub mod codec;
pub mod gridmap;
pub mod objective;
pub mod optimizers;
pub mod render;
pub mod rng;
pub mod sampler;
pub mod stats;

pub use codec::{
    enumerate_tuples, path_to_tuple, tree_to_tuple, tuple_to_path, tuple_to_tree, validate_tuple, CodecError,
    LatticePath, OrderedTree, Side, TreeTuple, TupleViolation,
};
pub use gridmap::{generate_map, load_map, save_map, MapError, MapRecipe, OccupancyGrid, RecipeError};
pub use objective::{default_penalty, path_length, EvalError, PathObjective};
pub use optimizers::{optimize, run_on_grid, ConvergenceTrace, OptimizeResult, OptimizerConfig, OptimizerKind};
pub use render::{render_svg, RenderSpec};
pub use rng::RandomStream;
pub use sampler::{generate_path, sample, Blocked, Generated, SamplerConfig};
pub use stats::{mean_convergence, min_convergence, rank_sum_test, RankSumResult};
