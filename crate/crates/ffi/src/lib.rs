//! C ABI over `latticeplan`.
//!
//! Objects cross the boundary as opaque handles (`LpGrid`, `LpPath`) created
//! and released by this library. Every fallible call returns an `LpStatus`;
//! on failure `lp_last_error_message` describes the error for the calling
//! thread. Strings returned by the library are freed with `lp_string_free`.
//! Panics never unwind into C: they become `LP_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use latticeplan::codec::{LatticePath, Side, TreeTuple};
use latticeplan::gridmap::{generate_map, load_map, MapRecipe, OccupancyGrid};
use latticeplan::objective::{default_penalty, path_length};
use latticeplan::optimizers::{run_on_grid, OptimizerConfig, OptimizerKind};
use latticeplan::sampler::{sample, SamplerConfig};
use latticeplan::stats::rank_sum_test;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Ok = 0,
    /// Generation or optimization found no collision-free path.
    NoPath = 1,
    InvalidArgument = 2,
    NullPointer = 3,
    ParseError = 4,
    /// Output buffer too small; the required size was still written.
    BufferTooSmall = 5,
    Panic = 6,
}

pub const LP_SIDE_ABOVE: u32 = 0;
pub const LP_SIDE_BELOW: u32 = 1;

pub const LP_OPTIMIZER_PSO: u32 = 0;
pub const LP_OPTIMIZER_DEBEST: u32 = 1;
pub const LP_OPTIMIZER_DERAND: u32 = 2;
pub const LP_OPTIMIZER_SADE: u32 = 3;
pub const LP_OPTIMIZER_RBDE: u32 = 4;

/// Opaque occupancy grid.
pub struct LpGrid(OccupancyGrid);

/// Opaque lattice path together with its tuple.
pub struct LpPath {
    tuple: TreeTuple,
    path: LatticePath,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LpOptimizeSummary {
    /// NaN when no evaluation ran.
    pub best_alpha: f64,
    /// Best feasible length, or the penalty `10 n` when nothing was feasible.
    pub best_fitness: f64,
    pub evaluations: usize,
    pub success: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LpRankSum {
    pub u: f64,
    pub p_value: f64,
    pub exact: bool,
}

struct Failure(LpStatus, String);

impl Failure {
    fn null(what: &str) -> Self {
        Failure(LpStatus::NullPointer, format!("{what} is null"))
    }

    fn invalid(msg: impl Into<String>) -> Self {
        Failure(LpStatus::InvalidArgument, msg.into())
    }

    fn parse(msg: impl Into<String>) -> Self {
        Failure(LpStatus::ParseError, msg.into())
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_last_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> LpStatus {
    clear_last_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => LpStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_last_error(&format!("internal panic: {msg}"));
            LpStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Failure::parse(format!("{what} is not valid UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| Failure::null(what))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| Failure::null(what))
}

unsafe fn slice_arg<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

fn side_of(side: u32) -> Result<Side, Failure> {
    match side {
        LP_SIDE_ABOVE => Ok(Side::Above),
        LP_SIDE_BELOW => Ok(Side::Below),
        s => Err(Failure::invalid(format!("unknown side {s}"))),
    }
}

fn kind_of(kind: u32) -> Result<OptimizerKind, Failure> {
    OptimizerKind::ALL.get(kind as usize).copied().ok_or_else(|| Failure::invalid(format!("unknown optimizer {kind}")))
}

fn into_handle<T>(value: T) -> *mut T {
    Box::into_raw(Box::new(value))
}

/// Message for the last failed call on this thread, or NULL. Owned by the
/// library; valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn lp_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn lp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Obstacle-free `n x n` grid.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lp_grid_new_empty(n: usize, out: *mut *mut LpGrid) -> LpStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        if n < 2 {
            return Err(Failure::invalid("grid size must be at least 2"));
        }
        *out = into_handle(LpGrid(OccupancyGrid::empty(n, "empty")));
        Ok(())
    })
}

/// Parses a map in the text format (`.` free, `#` occupied, top row first).
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lp_grid_load(text: *const c_char, out: *mut *mut LpGrid) -> LpStatus {
    guard(|| {
        let text = str_arg(text, "text")?;
        let out = out_arg(out, "out")?;
        let g = load_map(text, "map").map_err(|e| Failure::parse(e.to_string()))?;
        *out = into_handle(LpGrid(g));
        Ok(())
    })
}

/// Builds a grid from a JSON map recipe.
///
/// # Safety
/// `recipe_json` must be a NUL-terminated string; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lp_grid_generate(recipe_json: *const c_char, out: *mut *mut LpGrid) -> LpStatus {
    guard(|| {
        let text = str_arg(recipe_json, "recipe_json")?;
        let out = out_arg(out, "out")?;
        let recipe: MapRecipe = serde_json::from_str(text).map_err(|e| Failure::parse(e.to_string()))?;
        let g = generate_map(&recipe).map_err(|e| Failure::invalid(e.to_string()))?;
        *out = into_handle(LpGrid(g));
        Ok(())
    })
}

/// # Safety
/// `grid` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lp_grid_free(grid: *mut LpGrid) {
    if !grid.is_null() {
        drop(Box::from_raw(grid));
    }
}

/// Side length of the grid, 0 for NULL.
///
/// # Safety
/// `grid` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lp_grid_size(grid: *const LpGrid) -> usize {
    grid.as_ref().map_or(0, |g| g.0.size())
}

/// Occupancy of cell `(x, y)` with the origin at the bottom-left. Cells
/// outside the grid report occupied.
///
/// # Safety
/// `grid` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lp_grid_is_occupied(grid: *const LpGrid, x: i64, y: i64, out: *mut bool) -> LpStatus {
    guard(|| {
        let g = ref_arg(grid, "grid")?;
        *out_arg(out, "out")? = g.0.is_occupied(x, y);
        Ok(())
    })
}

/// Draws one path. Returns `NoPath` (with `*out` set to NULL) when the
/// draw collides.
///
/// # Safety
/// `grid` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lp_sample(
    grid: *const LpGrid,
    alpha: f64,
    seed: u64,
    side: u32,
    strict_collision: bool,
    out: *mut *mut LpPath,
) -> LpStatus {
    guard(|| {
        let g = ref_arg(grid, "grid")?;
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let cfg = SamplerConfig::new(alpha).with_side(side_of(side)?).with_seed(seed).with_strict(strict_collision);
        cfg.validate().map_err(|e| Failure::invalid(e.to_string()))?;
        match sample(&g.0, &cfg) {
            Ok(gen) => {
                *out = into_handle(LpPath { tuple: gen.tuple, path: gen.path });
                Ok(())
            }
            Err(b) => Err(Failure(
                LpStatus::NoPath,
                format!("collision in column {} at height {}", b.column, b.height),
            )),
        }
    })
}

/// # Safety
/// `path` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lp_path_free(path: *mut LpPath) {
    if !path.is_null() {
        drop(Box::from_raw(path));
    }
}

/// Tuple length `n` (the polyline has `n + 1` nodes), 0 for NULL.
///
/// # Safety
/// `path` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lp_path_len(path: *const LpPath) -> usize {
    path.as_ref().map_or(0, |p| p.tuple.len())
}

/// Euclidean length of the polyline, NaN for NULL.
///
/// # Safety
/// `path` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lp_path_length(path: *const LpPath) -> f64 {
    path.as_ref().map_or(f64::NAN, |p| path_length(&p.path))
}

/// Copies the tuple into `buf`. `*written` receives `n`; if `cap < n` the
/// buffer is untouched and `BufferTooSmall` is returned.
///
/// # Safety
/// `path` must be a live handle; `buf` must hold `cap` elements; `written`
/// must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lp_path_tuple(path: *const LpPath, buf: *mut usize, cap: usize, written: *mut usize) -> LpStatus {
    guard(|| {
        let p = ref_arg(path, "path")?;
        let written = out_arg(written, "written")?;
        let t = p.tuple.entries();
        *written = t.len();
        if cap < t.len() {
            return Err(Failure(LpStatus::BufferTooSmall, format!("need {} entries", t.len())));
        }
        if buf.is_null() {
            return Err(Failure::null("buf"));
        }
        ptr::copy_nonoverlapping(t.as_ptr(), buf, t.len());
        Ok(())
    })
}

/// Copies the polyline nodes into `xs` and `ys` (grid coordinates, origin at
/// the bottom-left). Same size protocol as `lp_path_tuple` with `n + 1` nodes.
///
/// # Safety
/// `path` must be a live handle; `xs` and `ys` must hold `cap` elements;
/// `written` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lp_path_nodes(
    path: *const LpPath,
    xs: *mut usize,
    ys: *mut usize,
    cap: usize,
    written: *mut usize,
) -> LpStatus {
    guard(|| {
        let p = ref_arg(path, "path")?;
        let written = out_arg(written, "written")?;
        let nodes = p.path.nodes();
        *written = nodes.len();
        if cap < nodes.len() {
            return Err(Failure(LpStatus::BufferTooSmall, format!("need {} nodes", nodes.len())));
        }
        if xs.is_null() || ys.is_null() {
            return Err(Failure::null("xs/ys"));
        }
        for (i, &(x, y)) in nodes.iter().enumerate() {
            *xs.add(i) = x;
            *ys.add(i) = y;
        }
        Ok(())
    })
}

/// Path as a JSON array of `[x, y]` pairs; free with `lp_string_free`.
///
/// # Safety
/// `path` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lp_path_to_json(path: *const LpPath, out: *mut *mut c_char) -> LpStatus {
    guard(|| {
        let p = ref_arg(path, "path")?;
        let out = out_arg(out, "out")?;
        *out = CString::new(p.path.to_json()).expect("JSON has no NUL").into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must be NULL or a string returned by this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// One optimization run with default parameters for `kind`
/// (`LP_OPTIMIZER_*`). A run that finds nothing feasible still fills
/// `out` and returns `NoPath`.
///
/// # Safety
/// `grid` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lp_optimize(
    grid: *const LpGrid,
    kind: u32,
    seed: u64,
    evals: usize,
    side: u32,
    strict_collision: bool,
    out: *mut LpOptimizeSummary,
) -> LpStatus {
    guard(|| {
        let g = ref_arg(grid, "grid")?;
        let out = out_arg(out, "out")?;
        let cfg = OptimizerConfig::new(kind_of(kind)?).with_seed(seed);
        let r = run_on_grid(&g.0, side_of(side)?, strict_collision, &cfg, evals)
            .map_err(|e| Failure::invalid(e.to_string()))?;
        let penalty = default_penalty(g.0.size());
        let best_fitness = r.best_fitness.unwrap_or(penalty);
        let success = best_fitness < penalty;
        *out = LpOptimizeSummary {
            best_alpha: r.best_alpha.unwrap_or(f64::NAN),
            best_fitness,
            evaluations: r.evaluations,
            success,
        };
        if success {
            Ok(())
        } else {
            Err(Failure(LpStatus::NoPath, "no feasible path within the budget".into()))
        }
    })
}

/// Two-sided Wilcoxon rank-sum test of `a` against `b`.
///
/// # Safety
/// `a` and `b` must hold `na` and `nb` elements; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lp_rank_sum(a: *const f64, na: usize, b: *const f64, nb: usize, out: *mut LpRankSum) -> LpStatus {
    guard(|| {
        let a = slice_arg(a, na, "a")?;
        let b = slice_arg(b, nb, "b")?;
        let out = out_arg(out, "out")?;
        let r = rank_sum_test(a, b).map_err(|e| Failure::invalid(e.to_string()))?;
        *out = LpRankSum { u: r.u, p_value: r.p_value, exact: r.exact };
        Ok(())
    })
}
