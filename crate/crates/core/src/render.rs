//! SVG 1.1 rendering of an occupancy grid with overlaid lattice paths.
//!
//! The grid origin sits at the bottom-left: cell `(x, y)` is drawn at
//! `(x * cell, (n - 1 - y) * cell)`. Path nodes are drawn at cell centres.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::codec::LatticePath;
use crate::gridmap::OccupancyGrid;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RenderSpec {
    pub cell_size: u32,
    pub background: String,
    pub obstacle_fill: String,
    pub path_stroke: String,
    /// Opacity of each path; overlaid paths stack, so shared corridors darken.
    pub path_opacity: f64,
    pub stroke_width: f64,
    pub grid_lines: bool,
}

impl Default for RenderSpec {
    fn default() -> Self {
        Self {
            cell_size: 10,
            background: "#ffffff".into(),
            obstacle_fill: "#202020".into(),
            path_stroke: "#c0392b".into(),
            path_opacity: 0.15,
            stroke_width: 2.0,
            grid_lines: false,
        }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Centre of node `(x, y)` in image coordinates, doubled so it stays integral.
fn centre2(n: usize, cell: u32, (x, y): (usize, usize)) -> (u64, u64) {
    let c = cell as u64;
    (2 * x as u64 * c + c, 2 * (n - 1 - y) as u64 * c + c)
}

fn fmt_half(v: u64) -> String {
    if v.is_multiple_of(2) {
        (v / 2).to_string()
    } else {
        format!("{}.5", v / 2)
    }
}

/// Renders `grid` with one `<polyline>` per path.
pub fn render_svg(grid: &OccupancyGrid, paths: &[LatticePath], spec: &RenderSpec) -> String {
    let n = grid.size();
    let cs = spec.cell_size.max(1);
    let side = n as u64 * cs as u64;
    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"no\"?>\n");
    s.push_str(
        "<!DOCTYPE svg PUBLIC \"-//W3C//DTD SVG 1.1//EN\" \
         \"http://www.w3.org/Graphics/SVG/1.1/DTD/svg11.dtd\">\n",
    );
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{side}\" height=\"{side}\" viewBox=\"0 0 {side} {side}\">"
    );
    let _ = writeln!(s, "<title>{}</title>", escape(grid.name()));
    let _ = writeln!(s, "<rect x=\"0\" y=\"0\" width=\"{side}\" height=\"{side}\" fill=\"{}\"/>", escape(&spec.background));

    let _ = writeln!(s, "<g id=\"obstacles\" fill=\"{}\" stroke=\"none\">", escape(&spec.obstacle_fill));
    for y in 0..n {
        // merge horizontal runs into one rect
        let mut x = 0;
        while x < n {
            if !grid.is_occupied(x as i64, y as i64) {
                x += 1;
                continue;
            }
            let start = x;
            while x < n && grid.is_occupied(x as i64, y as i64) {
                x += 1;
            }
            let _ = writeln!(
                s,
                "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{cs}\"/>",
                start as u64 * cs as u64,
                (n - 1 - y) as u64 * cs as u64,
                (x - start) as u64 * cs as u64
            );
        }
    }
    s.push_str("</g>\n");

    if spec.grid_lines {
        s.push_str("<g id=\"grid\" stroke=\"#d0d0d0\" stroke-width=\"0.5\">\n");
        for i in 0..=n as u64 {
            let p = i * cs as u64;
            let _ = writeln!(s, "<line x1=\"{p}\" y1=\"0\" x2=\"{p}\" y2=\"{side}\"/>");
            let _ = writeln!(s, "<line x1=\"0\" y1=\"{p}\" x2=\"{side}\" y2=\"{p}\"/>");
        }
        s.push_str("</g>\n");
    }

    if !paths.is_empty() {
        let _ = writeln!(
            s,
            "<g id=\"paths\" fill=\"none\" stroke=\"{}\" stroke-width=\"{}\" stroke-linejoin=\"round\">",
            escape(&spec.path_stroke),
            spec.stroke_width
        );
        for p in paths {
            let points: Vec<String> = p
                .nodes()
                .iter()
                .map(|&node| {
                    let (x2, y2) = centre2(n, cs, node);
                    format!("{},{}", fmt_half(x2), fmt_half(y2))
                })
                .collect();
            let _ = writeln!(
                s,
                "<polyline stroke-opacity=\"{}\" points=\"{}\"/>",
                spec.path_opacity,
                points.join(" ")
            );
        }
        s.push_str("</g>\n");
    }
    s.push_str("</svg>\n");
    s
}
