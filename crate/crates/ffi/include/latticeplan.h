#ifndef LATTICEPLAN_H
#define LATTICEPLAN_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define LP_SIDE_ABOVE 0

#define LP_SIDE_BELOW 1

#define LP_OPTIMIZER_PSO 0

#define LP_OPTIMIZER_DEBEST 1

#define LP_OPTIMIZER_DERAND 2

#define LP_OPTIMIZER_SADE 3

#define LP_OPTIMIZER_RBDE 4

/**
 * Result code of every fallible call.
 */
typedef enum {
  LP_STATUS_OK = 0,
  /**
   * Generation or optimization found no collision-free path.
   */
  LP_STATUS_NO_PATH = 1,
  LP_STATUS_INVALID_ARGUMENT = 2,
  LP_STATUS_NULL_POINTER = 3,
  LP_STATUS_PARSE_ERROR = 4,
  /**
   * Output buffer too small; the required size was still written.
   */
  LP_STATUS_BUFFER_TOO_SMALL = 5,
  LP_STATUS_PANIC = 6,
} LpStatus;

/**
 * Opaque occupancy grid.
 */
typedef struct LpGrid LpGrid;

/**
 * Opaque lattice path together with its tuple.
 */
typedef struct LpPath LpPath;

typedef struct {
  /**
   * NaN when no evaluation ran.
   */
  double best_alpha;
  /**
   * Best feasible length, or the penalty `10 n` when nothing was feasible.
   */
  double best_fitness;
  size_t evaluations;
  bool success;
} LpOptimizeSummary;

typedef struct {
  double u;
  double p_value;
  bool exact;
} LpRankSum;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL. Owned by the
 * library; valid until the next call on the same thread.
 */
const char *lp_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *lp_version(void);

/**
 * Obstacle-free `n x n` grid.
 *
 * # Safety
 * `out` must be valid for writes.
 */
LpStatus lp_grid_new_empty(size_t n, LpGrid **out);

/**
 * Parses a map in the text format (`.` free, `#` occupied, top row first).
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be valid for writes.
 */
LpStatus lp_grid_load(const char *text, LpGrid **out);

/**
 * Builds a grid from a JSON map recipe.
 *
 * # Safety
 * `recipe_json` must be a NUL-terminated string; `out` must be valid for writes.
 */
LpStatus lp_grid_generate(const char *recipe_json, LpGrid **out);

/**
 * # Safety
 * `grid` must be NULL or a handle from this library not yet freed.
 */
void lp_grid_free(LpGrid *grid);

/**
 * Side length of the grid, 0 for NULL.
 *
 * # Safety
 * `grid` must be NULL or a live handle.
 */
size_t lp_grid_size(const LpGrid *grid);

/**
 * Occupancy of cell `(x, y)` with the origin at the bottom-left. Cells
 * outside the grid report occupied.
 *
 * # Safety
 * `grid` must be a live handle; `out` must be valid for writes.
 */
LpStatus lp_grid_is_occupied(const LpGrid *grid, int64_t x, int64_t y, bool *out);

/**
 * Draws one path. Returns `NoPath` (with `*out` set to NULL) when the
 * draw collides.
 *
 * # Safety
 * `grid` must be a live handle; `out` must be valid for writes.
 */
LpStatus lp_sample(const LpGrid *grid,
                   double alpha,
                   uint64_t seed,
                   uint32_t side,
                   bool strict_collision,
                   LpPath **out);

/**
 * # Safety
 * `path` must be NULL or a handle from this library not yet freed.
 */
void lp_path_free(LpPath *path);

/**
 * Tuple length `n` (the polyline has `n + 1` nodes), 0 for NULL.
 *
 * # Safety
 * `path` must be NULL or a live handle.
 */
size_t lp_path_len(const LpPath *path);

/**
 * Euclidean length of the polyline, NaN for NULL.
 *
 * # Safety
 * `path` must be NULL or a live handle.
 */
double lp_path_length(const LpPath *path);

/**
 * Copies the tuple into `buf`. `*written` receives `n`; if `cap < n` the
 * buffer is untouched and `BufferTooSmall` is returned.
 *
 * # Safety
 * `path` must be a live handle; `buf` must hold `cap` elements; `written`
 * must be valid for writes.
 */
LpStatus lp_path_tuple(const LpPath *path, size_t *buf, size_t cap, size_t *written);

/**
 * Copies the polyline nodes into `xs` and `ys` (grid coordinates, origin at
 * the bottom-left). Same size protocol as `lp_path_tuple` with `n + 1` nodes.
 *
 * # Safety
 * `path` must be a live handle; `xs` and `ys` must hold `cap` elements;
 * `written` must be valid for writes.
 */
LpStatus lp_path_nodes(const LpPath *path, size_t *xs, size_t *ys, size_t cap, size_t *written);

/**
 * Path as a JSON array of `[x, y]` pairs; free with `lp_string_free`.
 *
 * # Safety
 * `path` must be a live handle; `out` must be valid for writes.
 */
LpStatus lp_path_to_json(const LpPath *path, char **out);

/**
 * # Safety
 * `s` must be NULL or a string returned by this library not yet freed.
 */
void lp_string_free(char *s);

/**
 * One optimization run with default parameters for `kind`
 * (`LP_OPTIMIZER_*`). A run that finds nothing feasible still fills
 * `out` and returns `NoPath`.
 *
 * # Safety
 * `grid` must be a live handle; `out` must be valid for writes.
 */
LpStatus lp_optimize(const LpGrid *grid,
                     uint32_t kind,
                     uint64_t seed,
                     size_t evals,
                     uint32_t side,
                     bool strict_collision,
                     LpOptimizeSummary *out);

/**
 * Two-sided Wilcoxon rank-sum test of `a` against `b`.
 *
 * # Safety
 * `a` and `b` must hold `na` and `nb` elements; `out` must be valid for writes.
 */
LpStatus lp_rank_sum(const double *a, size_t na, const double *b, size_t nb, LpRankSum *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LATTICEPLAN_H */
