//! A small SVG writer for shape overlays and species rasters.

use std::fmt::Write;

use fpplab_core::convex::{ConvexShape, Point};
use fpplab_core::growth::OccupancyMap;

const PALETTE: [&str; 12] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
    "#aec7e8", "#ffbb78",
];

pub struct Svg {
    body: String,
    width: f64,
    height: f64,
    /// Maps plane coordinates to pixels: `(scale, x offset, y offset)`.
    view: (f64, f64, f64),
}

impl Svg {
    /// Canvas showing the square `[-extent, extent]²` with y pointing up.
    pub fn new(size: f64, extent: f64) -> Svg {
        let scale = size / (2.0 * extent);
        Svg { body: String::new(), width: size, height: size, view: (scale, extent, extent) }
    }

    fn px(&self, p: Point) -> (f64, f64) {
        let (s, ox, oy) = self.view;
        ((p.0 + ox) * s, (oy - p.1) * s)
    }

    pub fn polygon(&mut self, pts: &[Point], stroke: &str, fill: &str, width: f64) {
        let coords: Vec<String> = pts
            .iter()
            .map(|&p| {
                let (x, y) = self.px(p);
                format!("{x:.3},{y:.3}")
            })
            .collect();
        let _ = writeln!(
            self.body,
            r#"<polygon points="{}" stroke="{stroke}" fill="{fill}" stroke-width="{width}"/>"#,
            coords.join(" ")
        );
    }

    pub fn line(&mut self, a: Point, b: Point, stroke: &str, width: f64) {
        let ((x1, y1), (x2, y2)) = (self.px(a), self.px(b));
        let _ = writeln!(
            self.body,
            r#"<line x1="{x1:.3}" y1="{y1:.3}" x2="{x2:.3}" y2="{y2:.3}" stroke="{stroke}" stroke-width="{width}"/>"#
        );
    }

    pub fn rect(&mut self, min: Point, w: f64, h: f64, fill: &str) {
        let s = self.view.0;
        let (x, y) = self.px((min.0, min.1 + h));
        let _ = writeln!(
            self.body,
            r#"<rect x="{x:.3}" y="{y:.3}" width="{:.3}" height="{:.3}" fill="{fill}"/>"#,
            w * s,
            h * s
        );
    }

    pub fn text(&mut self, at: (f64, f64), size: f64, s: &str) {
        let _ = writeln!(self.body, r#"<text x="{:.1}" y="{:.1}" font-size="{size}" font-family="sans-serif">{s}</text>"#, at.0, at.1);
    }

    pub fn finish(self) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{}</svg>\n",
            self.body,
            w = self.width,
            h = self.height
        )
    }
}

/// Empirical shape over the ℓ¹ unit ball, with the predicted flat edge and
/// its images under the lattice symmetries.
pub fn shape_overlay(shape: &ConvexShape, predicted: Option<(Point, Point)>) -> String {
    let extent = shape.max_l1_norm().max(1.0) * 1.1;
    let mut svg = Svg::new(600.0, extent);
    svg.polygon(ConvexShape::l1_ball(1.0).vertices(), "#999999", "none", 1.0);
    svg.polygon(shape.vertices(), "#1f77b4", "#1f77b433", 1.5);
    if let Some((a, b)) = predicted {
        for (sx, sy) in [(1.0, 1.0), (-1.0, 1.0), (1.0, -1.0), (-1.0, -1.0)] {
            svg.line((sx * a.0, sy * a.1), (sx * b.0, sy * b.1), "#d62728", 2.5);
        }
    }
    svg.text((10.0, 20.0), 14.0, "empirical shape (blue), l1 unit ball (grey), predicted flat edge (red)");
    svg.finish()
}

/// Species regions as run-length encoded rows; uncolonized sites in black.
pub fn species_raster(occ: &OccupancyMap) -> String {
    let w = occ.window();
    let extent = (w.x1 - w.x0 + 1).max(w.y1 - w.y0 + 1) as f64 / 2.0;
    let cx = (w.x0 + w.x1) as f64 / 2.0;
    let cy = (w.y0 + w.y1) as f64 / 2.0;
    let mut svg = Svg::new(600.0, extent);
    let colour = |o: Option<usize>| o.map_or("#000000", |i| PALETTE[i % PALETTE.len()]);
    for y in w.y0..=w.y1 {
        let mut x = w.x0;
        while x <= w.x1 {
            let o = occ.owner(fpplab_core::lattice::Site::new(x, y));
            let start = x;
            while x <= w.x1 && occ.owner(fpplab_core::lattice::Site::new(x, y)) == o {
                x += 1;
            }
            svg.rect((start as f64 - 0.5 - cx, y as f64 - 0.5 - cy), (x - start) as f64, 1.0, colour(o));
        }
    }
    svg.finish()
}
