use latticeplan::codec::{tuple_to_path, LatticePath, Side, TreeTuple};
use latticeplan::gridmap::OccupancyGrid;
use latticeplan::render::{render_svg, RenderSpec};
use latticeplan::sampler::{sample, SamplerConfig};

fn parse_points(attr: &str) -> Vec<(f64, f64)> {
    attr.split_whitespace()
        .map(|pair| {
            let (x, y) = pair.split_once(',').unwrap();
            (x.parse().unwrap(), y.parse().unwrap())
        })
        .collect()
}

/// Grid node from an image-space cell centre.
fn to_node(n: usize, cell: f64, (px, py): (f64, f64)) -> (usize, usize) {
    let x = (px - cell / 2.0) / cell;
    let y = (n as f64 - 1.0) - (py - cell / 2.0) / cell;
    assert_eq!(x.fract(), 0.0);
    assert_eq!(y.fract(), 0.0);
    (x as usize, y as usize)
}

fn polylines(doc: &roxmltree::Document) -> Vec<Vec<(f64, f64)>> {
    doc.descendants()
        .filter(|n| n.has_tag_name("polyline"))
        .map(|n| parse_points(n.attribute("points").unwrap()))
        .collect()
}

#[test]
fn well_formed_svg_11() {
    let g = OccupancyGrid::from_fn(12, "blocks", |x, y| (3..6).contains(&x) && (5..8).contains(&y)).unwrap();
    let svg = render_svg(&g, &[], &RenderSpec::default());
    let doc = roxmltree::Document::parse_with_options(
        &svg,
        roxmltree::ParsingOptions { allow_dtd: true, ..Default::default() },
    )
    .unwrap();
    let root = doc.root_element();
    assert_eq!(root.tag_name().name(), "svg");
    assert_eq!(root.tag_name().namespace(), Some("http://www.w3.org/2000/svg"));
    assert_eq!(root.attribute("version"), Some("1.1"));
    assert_eq!(root.attribute("width"), Some("120"));
    assert!(polylines(&doc).is_empty());
    // obstacle cells covered by the rects, origin at bottom-left
    let mut covered = [false; 144];
    for r in doc.descendants().filter(|n| n.has_tag_name("rect") && n.parent().unwrap().attribute("id") == Some("obstacles")) {
        let f = |a: &str| r.attribute(a).unwrap().parse::<usize>().unwrap() / 10;
        let (x0, row, w) = (f("x"), f("y"), f("width"));
        for x in x0..x0 + w {
            covered[(11 - row) * 12 + x] = true;
        }
    }
    for y in 0..12 {
        for x in 0..12 {
            assert_eq!(covered[y * 12 + x], g.is_occupied(x as i64, y as i64), "({x},{y})");
        }
    }
}

#[test]
fn coordinates_roundtrip_exactly() {
    let g = OccupancyGrid::empty(30, "e");
    let paths: Vec<LatticePath> = (0..5)
        .map(|seed| sample(&g, &SamplerConfig::new(1.5).with_seed(seed).with_side(if seed % 2 == 0 { Side::Above } else { Side::Below })).unwrap().path)
        .collect();
    for cell in [1u32, 7, 10] {
        let spec = RenderSpec { cell_size: cell, ..RenderSpec::default() };
        let svg = render_svg(&g, &paths, &spec);
        let doc = roxmltree::Document::parse_with_options(&svg, roxmltree::ParsingOptions { allow_dtd: true, ..Default::default() }).unwrap();
        let lines = polylines(&doc);
        assert_eq!(lines.len(), paths.len());
        for (line, path) in lines.iter().zip(&paths) {
            let nodes: Vec<(usize, usize)> = line.iter().map(|&pt| to_node(30, cell as f64, pt)).collect();
            assert_eq!(&nodes[..], path.nodes());
        }
    }
}

#[test]
fn overlaid_identical_paths_stack_opacity() {
    let g = OccupancyGrid::empty(50, "e");
    let p = tuple_to_path(&TreeTuple::staircase(50), Side::Above);
    let paths = vec![p; 20];
    let spec = RenderSpec::default();
    let svg = render_svg(&g, &paths, &spec);
    let doc = roxmltree::Document::parse_with_options(&svg, roxmltree::ParsingOptions { allow_dtd: true, ..Default::default() }).unwrap();
    let lines: Vec<_> = doc.descendants().filter(|n| n.has_tag_name("polyline")).collect();
    assert_eq!(lines.len(), 20);
    let first = lines[0].attribute("points").unwrap();
    let mut transmitted = 1.0;
    for l in &lines {
        assert_eq!(l.attribute("points").unwrap(), first);
        let a: f64 = l.attribute("stroke-opacity").unwrap().parse().unwrap();
        assert!(a > 0.0 && a < 1.0);
        transmitted *= 1.0 - a;
    }
    // a single stroke is faint, the stacked corridor is nearly opaque
    assert!(1.0 - transmitted > 0.95);
    assert!(spec.path_opacity < 0.5);
}
