//! Planar convex geometry in the ℓ¹ metric.

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point = (f64, f64);

/// Default collinearity tolerance for exact inputs, in radians.
pub const THETA_TOL: f64 = 1e-9;

#[inline]
fn sub(a: Point, b: Point) -> Point {
    (a.0 - b.0, a.1 - b.1)
}

#[inline]
fn cross(a: Point, b: Point) -> f64 {
    a.0 * b.1 - a.1 * b.0
}

#[inline]
fn dot(a: Point, b: Point) -> f64 {
    a.0 * b.0 + a.1 * b.1
}

#[inline]
pub fn l1_norm(p: Point) -> f64 {
    p.0.abs() + p.1.abs()
}

#[inline]
pub fn l1_dist(a: Point, b: Point) -> f64 {
    l1_norm(sub(a, b))
}

/// Exterior angle at `b` when walking `a → b → c`.
fn turning_angle(a: Point, b: Point, c: Point) -> f64 {
    let (u, v) = (sub(b, a), sub(c, b));
    cross(u, v).atan2(dot(u, v))
}

/// Repeatedly drops the vertex with the smallest turning angle while that
/// angle is at most `theta`; never goes below a triangle.
fn prune(mut vs: Vec<Point>, theta: f64) -> Vec<Point> {
    loop {
        let n = vs.len();
        if n <= 3 {
            return vs;
        }
        let (k, ang) = (0..n)
            .map(|i| (i, turning_angle(vs[(i + n - 1) % n], vs[i], vs[(i + 1) % n])))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        if ang > theta {
            return vs;
        }
        vs.remove(k);
    }
}

/// Rotates a ccw vertex cycle to start at the lowest, then leftmost vertex.
fn canonical_start(mut vs: Vec<Point>) -> Vec<Point> {
    if let Some(k) = (0..vs.len()).min_by(|&i, &j| vs[i].1.total_cmp(&vs[j].1).then(vs[i].0.total_cmp(&vs[j].0))) {
        vs.rotate_left(k);
    }
    vs
}

/// Convex polygon, counterclockwise from its lowest-then-leftmost vertex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ShapeRepr", into = "ShapeRepr")]
pub struct ConvexShape {
    vertices: Vec<Point>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ShapeRepr {
    vertices: Vec<Point>,
}

impl TryFrom<ShapeRepr> for ConvexShape {
    type Error = Error;

    fn try_from(r: ShapeRepr) -> Result<Self> {
        hull(&r.vertices)
    }
}

impl From<ConvexShape> for ShapeRepr {
    fn from(s: ConvexShape) -> Self {
        ShapeRepr { vertices: s.vertices }
    }
}

/// Convex hull with collinear vertices (turning angle ≤ [`THETA_TOL`]) removed.
pub fn hull(points: &[Point]) -> Result<ConvexShape> {
    hull_with(points, THETA_TOL)
}

pub fn hull_with(points: &[Point], theta_tol: f64) -> Result<ConvexShape> {
    let mut pts: Vec<Point> = points.iter().copied().filter(|p| p.0.is_finite() && p.1.is_finite()).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    pts.dedup();
    if pts.len() < 3 {
        return Err(Error::Degenerate(format!("{} distinct points", pts.len())));
    }
    let mut lower: Vec<Point> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(sub(lower[lower.len() - 1], lower[lower.len() - 2]), sub(p, lower[lower.len() - 2])) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Point> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(sub(upper[upper.len() - 1], upper[upper.len() - 2]), sub(p, upper[upper.len() - 2])) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    if lower.len() < 3 {
        return Err(Error::Degenerate("all points are collinear".into()));
    }
    let vs = prune(lower, theta_tol);
    let area2: f64 = (0..vs.len()).map(|i| cross(vs[i], vs[(i + 1) % vs.len()])).sum();
    if area2.abs() <= 1e-12 * vs.iter().map(|p| l1_norm(*p)).fold(0.0, f64::max).powi(2) {
        return Err(Error::Degenerate("zero-area hull".into()));
    }
    Ok(ConvexShape { vertices: canonical_start(vs) })
}

impl ConvexShape {
    /// Accepts a counterclockwise convex cycle as given, collinear vertices
    /// included.
    pub fn from_ccw_polygon(vertices: Vec<Point>) -> Result<ConvexShape> {
        let n = vertices.len();
        if n < 3 {
            return Err(Error::Degenerate(format!("{n} vertices")));
        }
        for i in 0..n {
            let (a, b, c) = (vertices[i], vertices[(i + 1) % n], vertices[(i + 2) % n]);
            if a == b || cross(sub(b, a), sub(c, b)) < -1e-12 {
                return Err(Error::Degenerate(format!("not a ccw convex polygon at vertex {}", (i + 1) % n)));
            }
        }
        Ok(ConvexShape { vertices: canonical_start(vertices) })
    }

    /// The ℓ¹ ball of radius `r`.
    pub fn l1_ball(r: f64) -> ConvexShape {
        ConvexShape { vertices: vec![(0.0, -r), (r, 0.0), (0.0, r), (-r, 0.0)] }
    }

    /// Regular `k`-gon with circumradius `r`, first vertex at angle `phase`.
    pub fn regular(k: usize, r: f64, phase: f64) -> Result<ConvexShape> {
        let pts: Vec<Point> = (0..k)
            .map(|i| {
                let a = phase + std::f64::consts::TAU * i as f64 / k as f64;
                (r * a.cos(), r * a.sin())
            })
            .collect();
        hull(&pts)
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn scaled(&self, c: f64) -> ConvexShape {
        ConvexShape { vertices: canonical_start(self.vertices.iter().map(|&(x, y)| (c * x, c * y)).collect()) }
    }

    pub fn translated(&self, d: Point) -> ConvexShape {
        ConvexShape { vertices: self.vertices.iter().map(|&(x, y)| (x + d.0, y + d.1)).collect() }
    }

    fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn contains(&self, p: Point) -> bool {
        self.edges().all(|(a, b)| cross(sub(b, a), sub(p, a)) >= -1e-12)
    }

    /// ℓ¹ distance from `p` to the polygon (zero inside).
    pub fn l1_distance_to(&self, p: Point) -> f64 {
        if self.contains(p) {
            return 0.0;
        }
        self.edges().map(|(a, b)| l1_point_segment(p, a, b)).fold(f64::INFINITY, f64::min)
    }

    /// Minkowski gauge `inf{t ≥ 0 : p ∈ t·C}`; requires the origin inside.
    pub fn gauge(&self, p: Point) -> f64 {
        self.edges()
            .map(|(a, b)| {
                let n = (b.1 - a.1, a.0 - b.0);
                dot(n, p) / dot(n, a)
            })
            .fold(0.0, f64::max)
    }

    /// Boundary point on the ray from the origin at `angle`.
    pub fn boundary_point(&self, angle: f64) -> Point {
        let d = (angle.cos(), angle.sin());
        let g = self.gauge(d);
        (d.0 / g, d.1 / g)
    }

    /// Unit tangent (ccw orientation) at a boundary point. At a vertex the
    /// two adjacent edge directions are averaged.
    pub fn tangent_at(&self, p: Point) -> Point {
        let n = self.vertices.len();
        let unit = |v: Point| {
            let l = dot(v, v).sqrt();
            (v.0 / l, v.1 / l)
        };
        let (k, _) = self
            .edges()
            .enumerate()
            .map(|(i, (a, b))| (i, l1_point_segment(p, a, b)))
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .unwrap();
        let (a, b) = (self.vertices[k], self.vertices[(k + 1) % n]);
        let scale = l1_norm(sub(b, a));
        if l1_dist(p, a) < 1e-9 * scale {
            let prev = self.vertices[(k + n - 1) % n];
            let (u, v) = (unit(sub(a, prev)), unit(sub(b, a)));
            return unit((u.0 + v.0, u.1 + v.1));
        }
        if l1_dist(p, b) < 1e-9 * scale {
            let next = self.vertices[(k + 2) % n];
            let (u, v) = (unit(sub(b, a)), unit(sub(next, b)));
            return unit((u.0 + v.0, u.1 + v.1));
        }
        unit(sub(b, a))
    }

    pub fn max_l1_norm(&self) -> f64 {
        self.vertices.iter().map(|&p| l1_norm(p)).fold(0.0, f64::max)
    }

    /// Images under the dihedral group of the square lattice.
    pub fn symmetrize_points(points: &[Point]) -> Vec<Point> {
        points
            .iter()
            .flat_map(|&(x, y)| [(x, y), (-x, y), (x, -y), (-x, -y), (y, x), (-y, x), (y, -x), (-y, -x)])
            .collect()
    }
}

/// ℓ¹ distance from `p` to the segment `[a, b]`. The objective is piecewise
/// linear in the segment parameter, so its minimum sits at an endpoint or
/// where one coordinate difference vanishes.
pub fn l1_point_segment(p: Point, a: Point, b: Point) -> f64 {
    let d = sub(b, a);
    let at = |t: f64| l1_dist(p, (a.0 + t * d.0, a.1 + t * d.1));
    let mut best = at(0.0).min(at(1.0));
    if d.0 != 0.0 {
        best = best.min(at(((p.0 - a.0) / d.0).clamp(0.0, 1.0)));
    }
    if d.1 != 0.0 {
        best = best.min(at(((p.1 - a.1) / d.1).clamp(0.0, 1.0)));
    }
    best
}

/// Extreme points: vertices whose turning angle exceeds `theta`, after
/// merging away smaller turns.
pub fn extreme_points(shape: &ConvexShape, theta: f64) -> Vec<Point> {
    prune(shape.vertices.clone(), theta)
}

pub fn sides(shape: &ConvexShape, theta: f64) -> usize {
    extreme_points(shape, theta).len()
}

/// Hausdorff distance under the ℓ¹ norm. Distance to a convex set is a
/// convex function, so each one-sided supremum is attained at a vertex.
pub fn hausdorff(a: &ConvexShape, b: &ConvexShape) -> f64 {
    let one = |x: &ConvexShape, y: &ConvexShape| x.vertices.iter().map(|&p| y.l1_distance_to(p)).fold(0.0, f64::max);
    one(a, b).max(one(b, a))
}

/// Endpoints `(w_p, w'_p)` of the flat edge for a rotated-frame speed.
pub fn predicted_flat_edge(alpha_rot: f64) -> Result<(Point, Point)> {
    if !(0.0..=FRAC_1_SQRT_2 + 1e-15).contains(&alpha_rot) {
        return Err(Error::OutOfRange(format!("edge speed {alpha_rot} outside [0, sqrt(2)/2]")));
    }
    let half = (alpha_rot / SQRT_2).min(0.5);
    let wx = 0.5 + half;
    // 1 - wx is exact for wx in [1/2, 1], so both points sit exactly on x + y = 1.
    let wy = 1.0 - wx;
    Ok(((wx, wy), (wy, wx)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlatEdgeReport {
    pub intersects: bool,
    /// Endpoints on `x + y = 1`, larger x first.
    pub segment: Option<(Point, Point)>,
    pub predicted: Option<(Point, Point)>,
    /// Largest ℓ¹ distance between matching detected and predicted endpoints.
    pub discrepancy: Option<f64>,
}

impl FlatEdgeReport {
    pub fn with_prediction(mut self, predicted: (Point, Point)) -> Self {
        self.discrepancy = self
            .segment
            .map(|(a, b)| l1_dist(a, predicted.0).max(l1_dist(b, predicted.1)));
        self.predicted = Some(predicted);
        self
    }
}

/// Sutherland–Hodgman clip of a polygon to `{p : f(p) ≥ 0}` for affine `f`.
fn clip(poly: &[Point], f: impl Fn(Point) -> f64) -> Vec<Point> {
    let n = poly.len();
    let mut out = Vec::with_capacity(n + 2);
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        let (fa, fb) = (f(a), f(b));
        if fa >= 0.0 {
            out.push(a);
        }
        if (fa >= 0.0) != (fb >= 0.0) {
            let t = fa / (fa - fb);
            out.push((a.0 + t * (b.0 - a.0), a.1 + t * (b.1 - a.1)));
        }
    }
    out
}

/// Part of the boundary within `tol` of the line `x + y = 1` in the first
/// quadrant, projected onto that line.
pub fn flat_edge_intersection(shape: &ConvexShape, tol: f64) -> Result<FlatEdgeReport> {
    let excess = shape.max_l1_norm() - 1.0;
    if excess > tol {
        return Err(Error::ExceedsUnitBall { excess, tol });
    }
    let mut region = clip(shape.vertices(), |p| p.0 + p.1 - (1.0 - tol));
    region = clip(&region, |p| p.0);
    region = clip(&region, |p| p.1);
    if region.is_empty() {
        return Ok(FlatEdgeReport { intersects: false, segment: None, predicted: None, discrepancy: None });
    }
    let (lo, hi) = region
        .iter()
        .map(|p| p.0 - p.1)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| (lo.min(s), hi.max(s)));
    let on_line = |s: f64| ((1.0 + s) / 2.0, (1.0 - s) / 2.0);
    Ok(FlatEdgeReport { intersects: true, segment: Some((on_line(hi), on_line(lo))), predicted: None, discrepancy: None })
}

/// `true` iff every extreme point of `a` has an extreme point of `a2` within
/// ℓ¹ distance `eps`.
pub fn semicontinuity_probe(a: &ConvexShape, a2: &ConvexShape, eps: f64) -> bool {
    let ext2 = extreme_points(a2, THETA_TOL);
    extreme_points(a, THETA_TOL)
        .iter()
        .all(|&x| ext2.iter().any(|&y| l1_dist(x, y) < eps))
}

/// Coefficient `a` of `x = a·v + b·w`.
pub fn project(v: Point, w: Point, x: Point) -> Result<f64> {
    let det = cross(v, w);
    if det.abs() < 1e-12 * l1_norm(v) * l1_norm(w) {
        return Err(Error::Degenerate("tangent is parallel to the direction".into()));
    }
    Ok(cross(x, w) / det)
}

/// Every boundary point (sampled at ℓ¹ spacing `eps/10`) lies within `eps`
/// of one of `ext`.
pub fn eps_dense(shape: &ConvexShape, ext: &[Point], eps: f64) -> bool {
    let step = eps / 10.0;
    shape.edges().all(|(a, b)| {
        let k = (l1_dist(a, b) / step).ceil().max(1.0) as usize;
        (0..=k).all(|i| {
            let t = i as f64 / k as f64;
            let p = (a.0 + t * (b.0 - a.0), a.1 + t * (b.1 - a.1));
            ext.iter().any(|&e| l1_dist(p, e) < eps)
        })
    })
}
