//! Occupancy grids, the `.map` text format, and seeded obstacle generators.
//!
//! Coordinates are node indices `0..n` on both axes with the origin at the
//! bottom-left. In the text format the first line is the top row (`y = n-1`),
//! `'.'` is free and `'#'` is occupied.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codec::Side;
use crate::rng::RandomStream;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MapError {
    #[error("map is empty")]
    Empty,
    #[error("map must be at least 2x2, got {0}x{0}")]
    TooSmall(usize),
    #[error("line {line} has {found} characters, expected {expected}")]
    Ragged { line: usize, found: usize, expected: usize },
    #[error("illegal character {ch:?} at line {line}, column {column}")]
    IllegalChar { line: usize, column: usize, ch: char },
    #[error("origin (0, 0) is occupied")]
    OccupiedOrigin,
    #[error("destination ({0}, {0}) is occupied")]
    OccupiedDestination(usize),
    #[error("cell vector has {found} entries, expected {expected}")]
    CellCount { found: usize, expected: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RecipeError {
    #[error("grid size must be at least 2, got {0}")]
    TooSmall(usize),
    #[error("layer {layer}: {message}")]
    OutOfGrid { layer: usize, message: String },
    #[error("layer {layer}: {message}")]
    BadShape { layer: usize, message: String },
}

/// Square boolean occupancy field; `true` marks a blocked node.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct OccupancyGrid {
    n: usize,
    cells: Vec<bool>,
    name: String,
}

impl fmt::Debug for OccupancyGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OccupancyGrid")
            .field("name", &self.name)
            .field("n", &self.n)
            .field("occupied", &self.occupied_count())
            .finish()
    }
}

impl OccupancyGrid {
    pub fn empty(n: usize, name: impl Into<String>) -> Self {
        assert!(n >= 2, "grid size must be at least 2");
        Self { n, cells: vec![false; n * n], name: name.into() }
    }

    /// Row-major cells, row `y` at `cells[y * n .. (y + 1) * n]`.
    pub fn from_cells(n: usize, name: impl Into<String>, cells: Vec<bool>) -> Result<Self, MapError> {
        if n < 2 {
            return Err(MapError::TooSmall(n));
        }
        if cells.len() != n * n {
            return Err(MapError::CellCount { found: cells.len(), expected: n * n });
        }
        let grid = Self { n, cells, name: name.into() };
        grid.check_endpoints()?;
        Ok(grid)
    }

    pub fn from_fn(
        n: usize,
        name: impl Into<String>,
        mut occupied: impl FnMut(usize, usize) -> bool,
    ) -> Result<Self, MapError> {
        let mut cells = vec![false; n * n];
        for y in 0..n {
            for x in 0..n {
                cells[y * n + x] = occupied(x, y);
            }
        }
        Self::from_cells(n, name, cells)
    }

    fn check_endpoints(&self) -> Result<(), MapError> {
        if self.cells[0] {
            return Err(MapError::OccupiedOrigin);
        }
        if self.cells[self.n * self.n - 1] {
            return Err(MapError::OccupiedDestination(self.n - 1));
        }
        Ok(())
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn set_name(&mut self, name: impl Into<String>) {
        self.name = name.into();
    }

    pub fn cells(&self) -> &[bool] {
        &self.cells
    }

    pub fn occupied_count(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }

    /// Cell state; anything outside the grid counts as occupied.
    #[inline]
    pub fn is_occupied(&self, x: i64, y: i64) -> bool {
        let n = self.n as i64;
        if x < 0 || y < 0 || x >= n || y >= n {
            return true;
        }
        self.cells[y as usize * self.n + x as usize]
    }

    #[inline]
    pub(crate) fn occupied_at(&self, x: usize, y: usize) -> bool {
        x >= self.n || y >= self.n || self.cells[y * self.n + x]
    }

    /// True iff every node `(x, y)` with `y` between `y_from` and `y_to`
    /// (inclusive, either order) is free.
    pub fn column_clear(&self, x: usize, y_from: usize, y_to: usize) -> bool {
        let (lo, hi) = if y_from <= y_to { (y_from, y_to) } else { (y_to, y_from) };
        (lo..=hi).all(|y| !self.occupied_at(x, y))
    }

    /// Same as [`column_clear`](Self::column_clear) along a row.
    pub fn row_clear(&self, y: usize, x_from: usize, x_to: usize) -> bool {
        let (lo, hi) = if x_from <= x_to { (x_from, x_to) } else { (x_to, x_from) };
        (lo..=hi).all(|x| !self.occupied_at(x, y))
    }

    /// Whether some monotone up/right lattice walk from the origin to the
    /// destination stays on `side` of the diagonal and only visits free
    /// nodes. Dynamic program over the `n * n` nodes.
    pub fn has_monotone_path(&self, side: Side) -> bool {
        let n = self.n;
        // reach[x][y] in above-diagonal orientation
        let mut reach = vec![false; n * n];
        let free = |x: usize, y: usize| {
            let (gx, gy) = side.orient(x, y);
            !self.occupied_at(gx, gy)
        };
        for x in 0..n {
            for y in x..n {
                if !free(x, y) {
                    continue;
                }
                let origin = x == 0 && y == 0;
                let from_below = y > x && reach[x * n + y - 1];
                let from_left = x > 0 && reach[(x - 1) * n + y];
                reach[x * n + y] = origin || from_below || from_left;
            }
        }
        reach[(n - 1) * n + n - 1]
    }

    fn fill(&mut self, x: usize, y: usize) {
        if x < self.n && y < self.n {
            self.cells[y * self.n + x] = true;
        }
    }

    fn clear_endpoints(&mut self) {
        let last = self.n * self.n - 1;
        self.cells[0] = false;
        self.cells[last] = false;
    }
}

/// Parses the `.map` text format.
pub fn load_map(text: &str, name: impl Into<String>) -> Result<OccupancyGrid, MapError> {
    let body = text.strip_suffix('\n').unwrap_or(text);
    if body.is_empty() {
        return Err(MapError::Empty);
    }
    let lines: Vec<&str> = body.split('\n').collect();
    let n = lines.len();
    if n < 2 {
        return Err(MapError::TooSmall(n));
    }
    let mut cells = vec![false; n * n];
    for (line_no, line) in lines.iter().enumerate() {
        let y = n - 1 - line_no;
        let mut count = 0;
        for (column, ch) in line.chars().enumerate() {
            let occupied = match ch {
                '.' => false,
                '#' => true,
                _ => return Err(MapError::IllegalChar { line: line_no + 1, column: column + 1, ch }),
            };
            if column < n {
                cells[y * n + column] = occupied;
            }
            count += 1;
        }
        if count != n {
            return Err(MapError::Ragged { line: line_no + 1, found: count, expected: n });
        }
    }
    OccupancyGrid::from_cells(n, name, cells)
}

/// Writes the `.map` text format; every line ends with `'\n'`.
pub fn save_map(grid: &OccupancyGrid) -> String {
    let n = grid.n;
    let mut out = String::with_capacity(n * (n + 1));
    for y in (0..n).rev() {
        for x in 0..n {
            out.push(if grid.cells[y * n + x] { '#' } else { '.' });
        }
        out.push('\n');
    }
    out
}

/// Inclusive axis-aligned block of nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: usize,
    pub y0: usize,
    pub x1: usize,
    pub y1: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Corner {
    BottomLeft,
    BottomRight,
    TopRight,
    TopLeft,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Opening {
    Up,
    Down,
    Left,
    Right,
}

/// Non-convex bar shapes inside the box `[x, x+width) x [y, y+height)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "lowercase")]
pub enum NonConvexShape {
    /// Two bars meeting at `corner`.
    L { x: usize, y: usize, width: usize, height: usize, thickness: usize, corner: Corner },
    /// Three bars, open towards `opening`.
    U { x: usize, y: usize, width: usize, height: usize, thickness: usize, opening: Opening },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Horizontal,
    Vertical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gap {
    pub start: usize,
    pub width: usize,
}

/// A straight wall of `thickness` rows (horizontal) or columns (vertical)
/// starting at `at`, spanning `from..=to` along its length, with free gaps.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Wall {
    pub orientation: Orientation,
    pub at: usize,
    #[serde(default = "one")]
    pub thickness: usize,
    pub from: usize,
    pub to: usize,
    #[serde(default)]
    pub gaps: Vec<Gap>,
}

fn one() -> usize {
    1
}

/// One obstacle layer of a recipe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Layer {
    Rectangles {
        rects: Vec<Rect>,
    },
    /// Filled polygons (even-odd rule); vertices in node coordinates.
    Polygon {
        polygons: Vec<Vec<[f64; 2]>>,
    },
    NonConvex {
        shapes: Vec<NonConvexShape>,
    },
    NarrowPassage {
        walls: Vec<Wall>,
    },
    /// `count` seeded obstacles: convex polygons inscribed in a circle, or
    /// L/U shapes with probability `non_convex_fraction`. Centers keep
    /// `margin` nodes away from the grid border.
    RandomBlobs {
        count: usize,
        min_radius: f64,
        max_radius: f64,
        #[serde(default)]
        non_convex_fraction: f64,
        #[serde(default)]
        margin: usize,
    },
}

/// Everything needed to rebuild a grid bit-for-bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapRecipe {
    pub name: String,
    pub n: usize,
    pub seed: u64,
    #[serde(default)]
    pub layers: Vec<Layer>,
}

impl MapRecipe {
    pub fn new(name: impl Into<String>, n: usize, seed: u64) -> Self {
        Self { name: name.into(), n, seed, layers: Vec::new() }
    }

    pub fn with_layer(mut self, layer: Layer) -> Self {
        self.layers.push(layer);
        self
    }

    pub fn validate(&self) -> Result<(), RecipeError> {
        let n = self.n;
        if n < 2 {
            return Err(RecipeError::TooSmall(n));
        }
        for (li, layer) in self.layers.iter().enumerate() {
            let out = |message: String| RecipeError::OutOfGrid { layer: li, message };
            let bad = |message: String| RecipeError::BadShape { layer: li, message };
            match layer {
                Layer::Rectangles { rects } => {
                    for r in rects {
                        if r.x0 > r.x1 || r.y0 > r.y1 {
                            return Err(bad(format!("inverted rectangle {r:?}")));
                        }
                        if r.x1 >= n || r.y1 >= n {
                            return Err(out(format!("rectangle {r:?} exceeds {n}x{n}")));
                        }
                    }
                }
                Layer::Polygon { polygons } => {
                    for poly in polygons {
                        if poly.len() < 3 {
                            return Err(bad(format!("polygon with {} vertices", poly.len())));
                        }
                        for &[x, y] in poly {
                            let inside = |v: f64| v.is_finite() && v >= 0.0 && v <= (n - 1) as f64;
                            if !inside(x) || !inside(y) {
                                return Err(out(format!("vertex ({x}, {y}) outside the grid")));
                            }
                        }
                    }
                }
                Layer::NonConvex { shapes } => {
                    for s in shapes {
                        let (x, y, w, h, th) = match *s {
                            NonConvexShape::L { x, y, width, height, thickness, .. }
                            | NonConvexShape::U { x, y, width, height, thickness, .. } => {
                                (x, y, width, height, thickness)
                            }
                        };
                        if w == 0 || h == 0 || th == 0 || th > w.min(h) {
                            return Err(bad(format!("degenerate shape {s:?}")));
                        }
                        if x + w > n || y + h > n {
                            return Err(out(format!("shape {s:?} exceeds {n}x{n}")));
                        }
                    }
                }
                Layer::NarrowPassage { walls } => {
                    for w in walls {
                        if w.thickness == 0 || w.from > w.to {
                            return Err(bad(format!("degenerate wall {w:?}")));
                        }
                        if w.at + w.thickness > n || w.to >= n {
                            return Err(out(format!("wall {w:?} exceeds {n}x{n}")));
                        }
                        for g in &w.gaps {
                            if g.width == 0 {
                                return Err(bad("gap width must be at least 1".into()));
                            }
                            if g.start < w.from || g.start + g.width - 1 > w.to {
                                return Err(out(format!("gap {g:?} outside wall span")));
                            }
                        }
                    }
                }
                Layer::RandomBlobs { min_radius, max_radius, non_convex_fraction, margin, .. } => {
                    if !(min_radius.is_finite() && max_radius.is_finite())
                        || *min_radius <= 0.0
                        || min_radius > max_radius
                    {
                        return Err(bad(format!("radius range [{min_radius}, {max_radius}]")));
                    }
                    if !(0.0..=1.0).contains(non_convex_fraction) {
                        return Err(bad(format!("non_convex_fraction {non_convex_fraction}")));
                    }
                    if 2 * margin >= n {
                        return Err(out(format!("margin {margin} leaves no room in {n}x{n}")));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Rasterizes a recipe. Origin and destination are always cleared, so a
/// recipe may block every path but never the endpoints themselves.
pub fn generate_map(recipe: &MapRecipe) -> Result<OccupancyGrid, RecipeError> {
    recipe.validate()?;
    let mut grid = OccupancyGrid::empty(recipe.n, recipe.name.clone());
    for (li, layer) in recipe.layers.iter().enumerate() {
        match layer {
            Layer::Rectangles { rects } => rects.iter().for_each(|r| fill_rect(&mut grid, r)),
            Layer::Polygon { polygons } => polygons.iter().for_each(|p| fill_polygon(&mut grid, p)),
            Layer::NonConvex { shapes } => shapes.iter().for_each(|s| fill_non_convex(&mut grid, s)),
            Layer::NarrowPassage { walls } => walls.iter().for_each(|w| fill_wall(&mut grid, w)),
            &Layer::RandomBlobs { count, min_radius, max_radius, non_convex_fraction, margin } => {
                let mut rng = RandomStream::substream(recipe.seed, li as u64);
                for _ in 0..count {
                    random_blob(&mut grid, &mut rng, min_radius, max_radius, non_convex_fraction, margin);
                }
            }
        }
    }
    grid.clear_endpoints();
    Ok(grid)
}

fn fill_rect(grid: &mut OccupancyGrid, r: &Rect) {
    for y in r.y0..=r.y1 {
        for x in r.x0..=r.x1 {
            grid.fill(x, y);
        }
    }
}

fn point_in_polygon(px: f64, py: f64, poly: &[[f64; 2]]) -> bool {
    let mut inside = false;
    let mut j = poly.len() - 1;
    for i in 0..poly.len() {
        let [xi, yi] = poly[i];
        let [xj, yj] = poly[j];
        // boundary counts as inside
        let cross = (xj - xi) * (py - yi) - (yj - yi) * (px - xi);
        let within = px >= xi.min(xj) - 1e-9
            && px <= xi.max(xj) + 1e-9
            && py >= yi.min(yj) - 1e-9
            && py <= yi.max(yj) + 1e-9;
        if cross.abs() < 1e-9 && within {
            return true;
        }
        if (yi > py) != (yj > py) && px < (xj - xi) * (py - yi) / (yj - yi) + xi {
            inside = !inside;
        }
        j = i;
    }
    inside
}

fn fill_polygon(grid: &mut OccupancyGrid, poly: &[[f64; 2]]) {
    let n = grid.n;
    let (mut x_lo, mut x_hi, mut y_lo, mut y_hi) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for &[x, y] in poly {
        x_lo = x_lo.min(x);
        x_hi = x_hi.max(x);
        y_lo = y_lo.min(y);
        y_hi = y_hi.max(y);
    }
    let clamp = |v: f64| v.max(0.0).min((n - 1) as f64) as usize;
    for y in clamp(y_lo.floor())..=clamp(y_hi.ceil()) {
        for x in clamp(x_lo.floor())..=clamp(x_hi.ceil()) {
            if point_in_polygon(x as f64, y as f64, poly) {
                grid.fill(x, y);
            }
        }
    }
}

fn fill_non_convex(grid: &mut OccupancyGrid, shape: &NonConvexShape) {
    let mut bars: Vec<Rect> = Vec::with_capacity(3);
    match *shape {
        NonConvexShape::L { x, y, width, height, thickness: t, corner } => {
            let (x1, y1) = (x + width - 1, y + height - 1);
            let left = Rect { x0: x, y0: y, x1: x + t - 1, y1 };
            let right = Rect { x0: x1 + 1 - t, y0: y, x1, y1 };
            let bottom = Rect { x0: x, y0: y, x1, y1: y + t - 1 };
            let top = Rect { x0: x, y0: y1 + 1 - t, x1, y1 };
            match corner {
                Corner::BottomLeft => bars.extend([left, bottom]),
                Corner::BottomRight => bars.extend([right, bottom]),
                Corner::TopRight => bars.extend([right, top]),
                Corner::TopLeft => bars.extend([left, top]),
            }
        }
        NonConvexShape::U { x, y, width, height, thickness: t, opening } => {
            let (x1, y1) = (x + width - 1, y + height - 1);
            let left = Rect { x0: x, y0: y, x1: x + t - 1, y1 };
            let right = Rect { x0: x1 + 1 - t, y0: y, x1, y1 };
            let bottom = Rect { x0: x, y0: y, x1, y1: y + t - 1 };
            let top = Rect { x0: x, y0: y1 + 1 - t, x1, y1 };
            match opening {
                Opening::Up => bars.extend([left, right, bottom]),
                Opening::Down => bars.extend([left, right, top]),
                Opening::Left => bars.extend([top, bottom, right]),
                Opening::Right => bars.extend([top, bottom, left]),
            }
        }
    }
    bars.iter().for_each(|r| fill_rect(grid, r));
}

fn fill_wall(grid: &mut OccupancyGrid, wall: &Wall) {
    for along in wall.from..=wall.to {
        if wall.gaps.iter().any(|g| along >= g.start && along < g.start + g.width) {
            continue;
        }
        for across in wall.at..wall.at + wall.thickness {
            match wall.orientation {
                Orientation::Horizontal => grid.fill(along, across),
                Orientation::Vertical => grid.fill(across, along),
            }
        }
    }
}

fn random_blob(
    grid: &mut OccupancyGrid,
    rng: &mut RandomStream,
    min_radius: f64,
    max_radius: f64,
    non_convex_fraction: f64,
    margin: usize,
) {
    let n = grid.n;
    let span = (n - 1 - 2 * margin) as f64;
    let cx = margin as f64 + rng.uniform() * span;
    let cy = margin as f64 + rng.uniform() * span;
    let radius = min_radius + rng.uniform() * (max_radius - min_radius);
    if rng.uniform() < non_convex_fraction {
        let size = ((2.0 * radius).round() as usize).clamp(2, n);
        let thickness = ((radius / 3.0).round() as usize).clamp(1, size);
        let x = ((cx - radius).round().max(0.0) as usize).min(n - size);
        let y = ((cy - radius).round().max(0.0) as usize).min(n - size);
        let pick = (rng.uniform() * 8.0) as usize;
        let shape = if pick < 4 {
            let corner = [Corner::BottomLeft, Corner::BottomRight, Corner::TopRight, Corner::TopLeft][pick];
            NonConvexShape::L { x, y, width: size, height: size, thickness, corner }
        } else {
            let opening = [Opening::Up, Opening::Down, Opening::Left, Opening::Right][pick - 4];
            NonConvexShape::U { x, y, width: size, height: size, thickness, opening }
        };
        fill_non_convex(grid, &shape);
    } else {
        let vertices = 5 + (rng.uniform() * 4.0) as usize;
        let mut angles: Vec<f64> =
            (0..vertices).map(|_| rng.uniform() * std::f64::consts::TAU).collect();
        angles.sort_by(f64::total_cmp);
        let hi = (n - 1) as f64;
        let poly: Vec<[f64; 2]> = angles
            .iter()
            .map(|a| [(cx + radius * a.cos()).clamp(0.0, hi), (cy + radius * a.sin()).clamp(0.0, hi)])
            .collect();
        fill_polygon(grid, &poly);
    }
}
