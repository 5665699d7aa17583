//! Infection graph, ends, Busemann functions and disjoint-geodesic
//! diagnostics.

use std::collections::VecDeque;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::convex::{self, ConvexShape, Point};
use crate::error::{Error, Result};
use crate::lattice::{round_site, solve_from, Dir, Edge, EdgeField, EdgeWeights, PassageTimeMap, Site, Stop, Window};
use crate::measure::WeightDistribution;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraphEdge {
    pub edge: Edge,
    pub weight: f64,
    /// Weight lies in the continuous part of the distribution.
    pub q_member: bool,
}

/// Union of all geodesics from the origin to in-window sites.
#[derive(Debug, Clone, PartialEq)]
pub struct InfectionGraph {
    pub window: Window,
    pub root: Site,
    pub edges: Vec<GraphEdge>,
    pub reached: usize,
}

impl InfectionGraph {
    /// Graph from an explicit edge list, for testing the ends count.
    pub fn from_edges(window: Window, root: Site, edges: &[Edge]) -> InfectionGraph {
        let mut es: Vec<GraphEdge> = edges.iter().map(|&edge| GraphEdge { edge, weight: 1.0, q_member: false }).collect();
        es.sort_by_key(|e| e.edge);
        es.dedup_by(|a, b| a.edge == b.edge);
        let mut sites: Vec<Site> = es.iter().flat_map(|e| [e.edge.u, e.edge.v]).chain([root]).collect();
        sites.sort_unstable();
        sites.dedup();
        InfectionGraph { window, root, edges: es, reached: sites.len() }
    }

    /// Every optimal incoming edge of every settled site of `map`.
    pub fn from_map<W: EdgeWeights + ?Sized>(map: &PassageTimeMap, weights: &W, dist: &WeightDistribution) -> InfectionGraph {
        let mut edges = Vec::new();
        for s in map.settled_order() {
            for dir in map.pred_dirs(s) {
                let weight = weights.weight(s, dir);
                edges.push(GraphEdge { edge: Edge::from_step(s, dir), weight, q_member: dist.in_q(weight) });
            }
        }
        edges.sort_by_key(|e| e.edge);
        InfectionGraph { window: map.window(), root: map.source(), edges, reached: map.settled_count() }
    }

    pub fn is_tree(&self) -> bool {
        self.edges.len() + 1 == self.reached
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "ux,uy,vx,vy,weight,q_member")?;
        for e in &self.edges {
            let (u, v) = (e.edge.u, e.edge.v);
            writeln!(out, "{},{},{},{},{},{}", u.x, u.y, v.x, v.y, e.weight, e.q_member)?;
        }
        Ok(())
    }
}

pub fn infection_graph(field: &EdgeField, window: Window) -> Result<InfectionGraph> {
    let map = solve_from(field, &[Site::ORIGIN], window, Stop::Exhaust)?;
    Ok(InfectionGraph::from_map(&map, field, &field.dist))
}

/// Components of the graph with the ℓ¹ ball of radius `m` about the root
/// removed that reach the window boundary.
pub fn ends_estimate(g: &InfectionGraph, m: f64) -> usize {
    let w = g.window;
    let removed = |s: Site| (s.l1_to(g.root) as f64) <= m;
    let mut adj: Vec<Vec<u32>> = vec![Vec::new(); w.len()];
    for e in &g.edges {
        let (u, v) = (e.edge.u, e.edge.v);
        if removed(u) || removed(v) {
            continue;
        }
        let (a, b) = (w.index(u), w.index(v));
        adj[a].push(b as u32);
        adj[b].push(a as u32);
    }
    let mut seen = vec![false; w.len()];
    let mut count = 0;
    for start in 0..w.len() {
        if seen[start] || adj[start].is_empty() {
            continue;
        }
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        let mut boundary = false;
        while let Some(i) = queue.pop_front() {
            boundary |= w.is_boundary(w.site(i));
            for &j in &adj[i] {
                if !seen[j as usize] {
                    seen[j as usize] = true;
                    queue.push_back(j as usize);
                }
            }
        }
        if boundary {
            count += 1;
        }
    }
    count
}

/// Largest ends count over removal radii, with the first radius attaining it.
pub fn ends_sweep(g: &InfectionGraph, radii: &[f64]) -> (usize, f64) {
    let mut best = (0, radii.first().copied().unwrap_or(0.0));
    for &m in radii {
        let e = ends_estimate(g, m);
        if e > best.0 {
            best = (e, m);
        }
    }
    best
}

/// `4⌊(s − 4)/12⌋`: geodesics guaranteed by a shape with `s` sides.
pub fn k_lower_bound(s: u64) -> Result<u64> {
    if s < 4 {
        return Err(Error::OutOfRange(format!("a convex shape symmetric under the lattice has at least 4 sides, got {s}")));
    }
    Ok(4 * ((s - 4) / 12))
}

/// The line `{n·v + t·w : t ∈ R}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BusemannSpec {
    pub v: Point,
    pub w: Point,
    pub n: i32,
}

impl BusemannSpec {
    /// Sites nearest to the line, inside the window, without repeats.
    pub fn sites(&self, window: Window) -> Result<Vec<Site>> {
        let (v, w) = (self.v, self.w);
        let det = v.0 * w.1 - v.1 * w.0;
        let wmax = w.0.abs().max(w.1.abs());
        if wmax == 0.0 || det.abs() <= 1e-12 * convex::l1_norm(v) * convex::l1_norm(w) {
            return Err(Error::Degenerate("line direction is zero or parallel to v".into()));
        }
        let base = (self.n as f64 * v.0, self.n as f64 * v.1);
        let span = [window.x0, window.x1, window.y0, window.y1].iter().map(|c| (*c as f64).abs()).sum::<f64>()
            + convex::l1_norm(base)
            + 2.0;
        let t_max = span / wmax;
        let dt = 0.25 / wmax;
        let steps = (2.0 * t_max / dt).ceil() as i64;
        let mut out: Vec<Site> = (0..=steps)
            .map(|k| {
                let t = -t_max + k as f64 * dt;
                round_site((base.0 + t * w.0, base.1 + t * w.1))
            })
            .filter(|s| window.contains(*s))
            .collect();
        out.sort_unstable();
        out.dedup();
        if out.is_empty() {
            return Err(Error::EmptyTarget);
        }
        Ok(out)
    }
}

/// Distance to a line, from one multi-source solve.
#[derive(Debug, Clone)]
pub struct BusemannField {
    pub spec: BusemannSpec,
    map: PassageTimeMap,
}

impl BusemannField {
    pub fn new<W: EdgeWeights + ?Sized>(weights: &W, spec: BusemannSpec, window: Window) -> Result<BusemannField> {
        let sites = spec.sites(window)?;
        Ok(BusemannField { spec, map: solve_from(weights, &sites, window, Stop::Exhaust)? })
    }

    /// `inf_{z ∈ S} τ(x, z)`.
    pub fn distance(&self, x: Site) -> Result<f64> {
        if !self.map.window().contains(x) {
            return Err(Error::OutsideWindow(x));
        }
        Ok(self.map.time(x))
    }

    /// `B_S(x, y)`.
    pub fn value(&self, x: Site, y: Site) -> Result<f64> {
        Ok(self.distance(x)? - self.distance(y)?)
    }

    pub fn map(&self) -> &PassageTimeMap {
        &self.map
    }
}

fn distance_to_set<W: EdgeWeights + ?Sized>(weights: &W, x: Site, set: &[Site], window: Window) -> Result<f64> {
    let map = solve_from(weights, &[x], window, Stop::Targets(set.to_vec()))?;
    Ok(set.iter().map(|&z| map.time(z)).fold(f64::INFINITY, f64::min))
}

/// `B_S(x, y)` from two single-source solves minimized over the line sites.
pub fn busemann<W: EdgeWeights + ?Sized>(weights: &W, spec: &BusemannSpec, x: Site, y: Site, window: Window) -> Result<f64> {
    let set = spec.sites(window)?;
    for s in [x, y] {
        if !window.contains(s) {
            return Err(Error::OutsideWindow(s));
        }
    }
    Ok(distance_to_set(weights, x, &set, window)? - distance_to_set(weights, y, &set, window)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparationReport {
    /// Entry `[i][j]` is `B_{S_i}(x_j, x_i)`.
    pub busemann: Vec<Vec<f64>>,
    /// Entry `[i][j]` is `π_{v_i}(x_i − x_j)`.
    pub projection: Vec<Vec<f64>>,
    /// Half the smallest off-diagonal projection.
    pub alpha: f64,
    /// Every off-diagonal Busemann entry is positive.
    pub all_positive: bool,
}

/// Busemann matrix for one line per seed, next to the projection references.
pub fn busemann_separation<W: EdgeWeights + ?Sized>(
    weights: &W,
    specs: &[BusemannSpec],
    seeds: &[Site],
    window: Window,
) -> Result<SeparationReport> {
    let k = seeds.len();
    if specs.len() != k || k == 0 {
        return Err(Error::InvalidSeeds(format!("{} lines for {k} seeds", specs.len())));
    }
    for &s in seeds {
        if !window.contains(s) {
            return Err(Error::OutsideWindow(s));
        }
    }
    let mut busemann = vec![vec![0.0; k]; k];
    let mut projection = vec![vec![0.0; k]; k];
    let mut alpha = f64::INFINITY;
    let mut all_positive = true;
    for i in 0..k {
        let f = BusemannField::new(weights, specs[i], window)?;
        for j in 0..k {
            busemann[i][j] = f.value(seeds[j], seeds[i])?;
            let (xi, xj) = (seeds[i].to_f64(), seeds[j].to_f64());
            projection[i][j] = convex::project(specs[i].v, specs[i].w, (xi.0 - xj.0, xi.1 - xj.1))?;
            if i != j {
                alpha = alpha.min(projection[i][j] / 2.0);
                all_positive &= busemann[i][j] > 0.0;
            }
        }
    }
    if k == 1 {
        alpha = 0.0;
    }
    Ok(SeparationReport { busemann, projection, alpha, all_positive })
}

/// Fraction of line offsets `n` at which every off-diagonal separation entry
/// is positive.
pub fn separation_frequency<W: EdgeWeights + ?Sized>(
    weights: &W,
    specs: &[BusemannSpec],
    seeds: &[Site],
    ns: &[i32],
    window: Window,
) -> Result<f64> {
    if ns.is_empty() {
        return Err(Error::OutOfRange("no line offsets".into()));
    }
    let mut hits = 0;
    for &n in ns {
        let shifted: Vec<BusemannSpec> = specs.iter().map(|s| BusemannSpec { n, ..*s }).collect();
        if busemann_separation(weights, &shifted, seeds, window)?.all_positive {
            hits += 1;
        }
    }
    Ok(hits as f64 / ns.len() as f64)
}

/// A far line `S = L + n·v` with `L` tangent to the shape at `v`, and the
/// arc of boundary directions (radians, increasing) its geodesic should use.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticTarget {
    pub v: Point,
    pub arc: (f64, f64),
    pub n: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticReport {
    /// `[i][j]`: geodesics `i` and `j` share no site outside `m·B`.
    pub disjoint: Vec<Vec<bool>>,
    pub n_q: Vec<usize>,
    pub rho_hat: Vec<f64>,
    pub alpha: f64,
    pub event_a: bool,
    pub event_b: bool,
    pub event_c: bool,
    pub event_d: bool,
    pub event_e: bool,
    pub geodesic_lengths: Vec<usize>,
}

fn angle_in(arc: (f64, f64), p: Point) -> bool {
    let a = p.1.atan2(p.0);
    let tau = std::f64::consts::TAU;
    (-1..=1).any(|k| {
        let b = a + k as f64 * tau;
        b > arc.0 && b < arc.1
    })
}

/// Sites of `m·D_i`: boundary points at `per_arc` interior arc angles,
/// scaled by `m` and rounded.
fn arc_samples(shape: &ConvexShape, arc: (f64, f64), m: f64, per_arc: usize) -> Vec<(Point, Site)> {
    (1..=per_arc)
        .map(|q| {
            let a = arc.0 + (arc.1 - arc.0) * q as f64 / (per_arc + 1) as f64;
            let b = shape.boundary_point(a);
            (b, round_site((m * b.0, m * b.1)))
        })
        .collect()
}

/// Evaluates the disjointness, Q-edge and concentration events for one
/// geodesic per target. Gauge balls `m·B`, `M·B` use `shape`.
pub fn disjointness_diagnostic(
    field: &EdgeField,
    shape: &ConvexShape,
    targets: &[DiagnosticTarget],
    m: f64,
    big_m: f64,
    window: Window,
) -> Result<DiagnosticReport> {
    if !(m > 0.0 && m < big_m && big_m < window.half_width() as f64) {
        return Err(Error::OutOfRange(format!("need 0 < m < M < half-width; got m={m}, M={big_m}")));
    }
    if targets.is_empty() {
        return Err(Error::EmptyTarget);
    }
    let gauge = |s: Site| shape.gauge(s.to_f64());
    let k = targets.len();
    let specs: Vec<BusemannSpec> =
        targets.iter().map(|t| BusemannSpec { v: t.v, w: shape.tangent_at(t.v), n: t.n }).collect();
    let fields: Vec<BusemannField> =
        specs.iter().map(|s| BusemannField::new(field, *s, window)).collect::<Result<_>>()?;

    let mut paths = Vec::with_capacity(k);
    for (i, f) in fields.iter().enumerate() {
        // Walked back from the origin, so the path ends on the line.
        let mut sites = f.map().geodesic_path(Site::ORIGIN)?.sites;
        sites.reverse();
        if sites[..sites.len() - 1].iter().any(|&s| window.is_boundary(s)) {
            return Err(Error::GeodesicClipped(i));
        }
        paths.push(sites);
    }

    let outside: Vec<Vec<Site>> = paths
        .iter()
        .map(|p| {
            let mut v: Vec<Site> = p.iter().copied().filter(|&s| gauge(s) > m).collect();
            v.sort_unstable();
            v
        })
        .collect();
    let disjoint: Vec<Vec<bool>> = (0..k)
        .map(|i| (0..k).map(|j| i == j || outside[i].iter().all(|s| outside[j].binary_search(s).is_err())).collect())
        .collect();

    let n_q: Vec<usize> = paths
        .iter()
        .map(|p| {
            p.windows(2)
                .filter(|w| {
                    let (gu, gv) = (gauge(w[0]), gauge(w[1]));
                    gu > m && gu <= big_m && gv > m && gv <= big_m
                })
                .filter(|w| field.dist.in_q(field.edge_weight(Edge::new(w[0], w[1]).unwrap())))
                .count()
        })
        .collect();
    let rho_hat = n_q.iter().map(|&q| q as f64 / big_m).collect();

    // (B): first exits through m∂B and M∂B happen inside the arc.
    let event_b = paths.iter().zip(targets).all(|(p, t)| {
        [m, big_m].iter().all(|&r| {
            p.iter().find(|&&s| gauge(s) >= r).is_some_and(|s| angle_in(t.arc, s.to_f64()))
        })
    });

    let per_arc = 3;
    let samples: Vec<Vec<(Point, Site)>> = targets.iter().map(|t| arc_samples(shape, t.arc, m, per_arc)).collect();
    let mut alpha = f64::INFINITY;
    for i in 0..k {
        for j in 0..k {
            if i == j {
                continue;
            }
            for &(xi, _) in &samples[i] {
                for &(xj, _) in &samples[j] {
                    alpha = alpha.min(0.5 * convex::project(specs[i].v, specs[i].w, (xi.0 - xj.0, xi.1 - xj.1))?);
                }
            }
        }
    }
    if k == 1 {
        alpha = 0.0;
    }

    // (A): Busemann separation of the arc samples.
    let mut event_a = true;
    for i in 0..k {
        for j in 0..k {
            if i == j {
                continue;
            }
            for &(_, xi) in &samples[i] {
                for &(_, xj) in &samples[j] {
                    event_a &= fields[i].value(xj, xi)? >= m * alpha;
                }
            }
        }
    }

    // (C) and (D) from one bounded solve around each sample.
    let all_samples: Vec<Site> = samples.iter().flatten().map(|p| p.1).collect();
    let origin_map = solve_from(field, &[Site::ORIGIN], window, Stop::Targets(all_samples))?;
    let radius = m * alpha / 10.0;
    let mut event_c = true;
    let mut event_d = true;
    for (_, x) in samples.iter().flatten() {
        let t0 = origin_map.time(*x);
        event_c &= (t0 - m).abs() < m * alpha / 10.0;
        let local = solve_from(field, &[*x], window, Stop::TimeLimit(m * alpha / 5.0))?;
        for d in Dir::ALL {
            let (dx, dy) = d.offset();
            let step = (radius / shape.gauge((dx as f64, dy as f64)).max(1e-12)).floor() as i32;
            let y = Site::new(x.x + dx * step, x.y + dy * step);
            event_d &= window.contains(y) && local.time(y) < m * alpha / 5.0;
        }
    }
    let event_e = n_q.iter().all(|&q| q >= 1);
    Ok(DiagnosticReport {
        disjoint,
        n_q,
        rho_hat,
        alpha,
        event_a,
        event_b,
        event_c,
        event_d,
        event_e,
        geodesic_lengths: paths.iter().map(|p| p.len() - 1).collect(),
    })
}

/// Whether the geodesics from the origin to the lines at offsets `n1` and
/// `n2` coincide inside `[−r, r]²`.
pub fn nested_agreement(
    field: &EdgeField,
    shape: &ConvexShape,
    target: &DiagnosticTarget,
    n1: i32,
    n2: i32,
    r: i32,
    window: Window,
) -> Result<bool> {
    let inside = |n: i32| -> Result<Vec<Site>> {
        let spec = BusemannSpec { v: target.v, w: shape.tangent_at(target.v), n };
        let f = BusemannField::new(field, spec, window)?;
        let mut s: Vec<Site> = f
            .map()
            .geodesic_path(Site::ORIGIN)?
            .sites
            .into_iter()
            .filter(|s| s.x.abs() <= r && s.y.abs() <= r)
            .collect();
        s.sort_unstable();
        Ok(s)
    };
    Ok(inside(n1)? == inside(n2)?)
}
