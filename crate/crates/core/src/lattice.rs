//! Seeded edge-weight fields on Z² and exact passage times on finite windows.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::WeightDistribution;
use crate::rng::{keyed_hash, unit_f64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "[i32; 2]", into = "[i32; 2]")]
pub struct Site {
    pub x: i32,
    pub y: i32,
}

impl From<[i32; 2]> for Site {
    fn from([x, y]: [i32; 2]) -> Self {
        Site { x, y }
    }
}

impl From<Site> for [i32; 2] {
    fn from(s: Site) -> Self {
        [s.x, s.y]
    }
}

impl Site {
    pub const ORIGIN: Site = Site { x: 0, y: 0 };

    pub const fn new(x: i32, y: i32) -> Self {
        Site { x, y }
    }

    #[inline]
    pub fn step(self, dir: Dir) -> Site {
        let (dx, dy) = dir.offset();
        Site { x: self.x + dx, y: self.y + dy }
    }

    pub fn l1(self) -> i64 {
        self.x.unsigned_abs() as i64 + self.y.unsigned_abs() as i64
    }

    pub fn l1_to(self, other: Site) -> i64 {
        (self.x - other.x).unsigned_abs() as i64 + (self.y - other.y).unsigned_abs() as i64
    }

    pub fn to_f64(self) -> (f64, f64) {
        (self.x as f64, self.y as f64)
    }
}

/// The lattice point `s` with `p ∈ s + [-1/2, 1/2)²`.
pub fn round_site(p: (f64, f64)) -> Site {
    Site { x: (p.0 + 0.5).floor() as i32, y: (p.1 + 0.5).floor() as i32 }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Dir {
    East = 0,
    North = 1,
    West = 2,
    South = 3,
}

impl Dir {
    pub const ALL: [Dir; 4] = [Dir::East, Dir::North, Dir::West, Dir::South];

    #[inline]
    pub const fn offset(self) -> (i32, i32) {
        match self {
            Dir::East => (1, 0),
            Dir::North => (0, 1),
            Dir::West => (-1, 0),
            Dir::South => (0, -1),
        }
    }

    #[inline]
    pub const fn opposite(self) -> Dir {
        match self {
            Dir::East => Dir::West,
            Dir::North => Dir::South,
            Dir::West => Dir::East,
            Dir::South => Dir::North,
        }
    }

    #[inline]
    const fn bit(self) -> u8 {
        1 << (self as u8)
    }
}

/// Nearest-neighbour edge stored with its lexicographically smaller endpoint
/// first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge {
    pub u: Site,
    pub v: Site,
}

impl Edge {
    pub fn new(a: Site, b: Site) -> Option<Edge> {
        if a.l1_to(b) != 1 {
            return None;
        }
        Some(if a < b { Edge { u: a, v: b } } else { Edge { u: b, v: a } })
    }

    #[inline]
    pub fn from_step(s: Site, dir: Dir) -> Edge {
        match dir {
            Dir::East | Dir::North => Edge { u: s, v: s.step(dir) },
            Dir::West | Dir::South => Edge { u: s.step(dir), v: s },
        }
    }

    /// `true` for horizontal edges.
    pub fn is_horizontal(&self) -> bool {
        self.u.y == self.v.y
    }
}

/// Edge-weight oracle used by the solvers.
pub trait EdgeWeights: Sync {
    /// Weight of the edge joining `s` and `s.step(dir)`.
    fn weight(&self, s: Site, dir: Dir) -> f64;

    fn edge(&self, e: Edge) -> f64 {
        let dir = if e.is_horizontal() { Dir::East } else { Dir::North };
        self.weight(e.u, dir)
    }
}

/// i.i.d. weights as a pure function of `(seed, canonical edge)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeField {
    pub seed: u64,
    pub dist: WeightDistribution,
}

impl EdgeField {
    pub fn new(seed: u64, dist: WeightDistribution) -> Self {
        EdgeField { seed, dist }
    }

    /// Uniform variate attached to the canonical edge `(base, base + e_k)`.
    #[inline]
    pub fn uniform(&self, base: Site, horizontal: bool) -> f64 {
        let packed = ((base.x as u32 as u64) << 32) | base.y as u32 as u64;
        unit_f64(keyed_hash(self.seed, &[packed, horizontal as u64]))
    }

    pub fn edge_weight(&self, e: Edge) -> f64 {
        self.edge(e)
    }
}

impl EdgeWeights for EdgeField {
    #[inline]
    fn weight(&self, s: Site, dir: Dir) -> f64 {
        let (base, horizontal) = match dir {
            Dir::East => (s, true),
            Dir::North => (s, false),
            Dir::West => (s.step(Dir::West), true),
            Dir::South => (s.step(Dir::South), false),
        };
        self.dist.quantile_unchecked(self.uniform(base, horizontal))
    }
}

/// Rectangle of sites `[x0, x1] × [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub x0: i32,
    pub y0: i32,
    pub x1: i32,
    pub y1: i32,
}

impl Window {
    /// `[-w, w]²`.
    pub fn centered(w: i32) -> Result<Window> {
        if w < 1 {
            return Err(Error::InvalidWindow(format!("half-width {w} must be at least 1")));
        }
        Ok(Window { x0: -w, y0: -w, x1: w, y1: w })
    }

    pub fn rect(min: Site, max: Site) -> Result<Window> {
        if max.x < min.x || max.y < min.y || (max.x == min.x && max.y == min.y) {
            return Err(Error::InvalidWindow(format!("empty or single-site rectangle {min:?}..{max:?}")));
        }
        Ok(Window { x0: min.x, y0: min.y, x1: max.x, y1: max.y })
    }

    #[inline]
    pub fn width(&self) -> usize {
        (self.x1 - self.x0 + 1) as usize
    }

    #[inline]
    pub fn height(&self) -> usize {
        (self.y1 - self.y0 + 1) as usize
    }

    pub fn len(&self) -> usize {
        self.width() * self.height()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Half-width when centered; otherwise the smallest distance from the
    /// origin to a side.
    pub fn half_width(&self) -> i32 {
        (-self.x0).min(self.x1).min(-self.y0).min(self.y1)
    }

    #[inline]
    pub fn contains(&self, s: Site) -> bool {
        s.x >= self.x0 && s.x <= self.x1 && s.y >= self.y0 && s.y <= self.y1
    }

    #[inline]
    pub fn is_boundary(&self, s: Site) -> bool {
        s.x == self.x0 || s.x == self.x1 || s.y == self.y0 || s.y == self.y1
    }

    #[inline]
    pub fn index(&self, s: Site) -> usize {
        (s.y - self.y0) as usize * self.width() + (s.x - self.x0) as usize
    }

    #[inline]
    pub fn site(&self, idx: usize) -> Site {
        let w = self.width();
        Site { x: self.x0 + (idx % w) as i32, y: self.y0 + (idx / w) as i32 }
    }

    pub fn sites(&self) -> impl Iterator<Item = Site> + '_ {
        (self.y0..=self.y1).flat_map(move |y| (self.x0..=self.x1).map(move |x| Site { x, y }))
    }

    /// In-window edges, each once.
    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.sites().flat_map(move |s| {
            [Dir::East, Dir::North]
                .into_iter()
                .map(move |d| (s, d))
                .filter(move |(s, d)| self.contains(s.step(*d)))
                .map(|(s, d)| Edge::from_step(s, d))
        })
    }
}

/// Weights of one window evaluated once, for repeated solves on the same
/// field.
#[derive(Debug, Clone)]
pub struct WeightGrid {
    window: Window,
    east: Vec<f64>,
    north: Vec<f64>,
    dist: WeightDistribution,
}

impl WeightGrid {
    pub fn new(field: &EdgeField, window: Window) -> Self {
        let mut east = vec![f64::NAN; window.len()];
        let mut north = vec![f64::NAN; window.len()];
        for s in window.sites() {
            let i = window.index(s);
            if s.x < window.x1 {
                east[i] = field.weight(s, Dir::East);
            }
            if s.y < window.y1 {
                north[i] = field.weight(s, Dir::North);
            }
        }
        WeightGrid { window, east, north, dist: field.dist.clone() }
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn dist(&self) -> &WeightDistribution {
        &self.dist
    }
}

impl EdgeWeights for WeightGrid {
    #[inline]
    fn weight(&self, s: Site, dir: Dir) -> f64 {
        let w = &self.window;
        match dir {
            Dir::East => self.east[w.index(s)],
            Dir::North => self.north[w.index(s)],
            Dir::West => self.east[w.index(s.step(Dir::West))],
            Dir::South => self.north[w.index(s.step(Dir::South))],
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct HeapItem {
    t: f64,
    idx: u32,
}

impl PartialEq for HeapItem {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for HeapItem {}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapItem {
    // Min-heap on (time, index).
    fn cmp(&self, other: &Self) -> Ordering {
        other.t.total_cmp(&self.t).then_with(|| other.idx.cmp(&self.idx))
    }
}

const SETTLED: u8 = 0x80;
const PRED_MASK: u8 = 0x0f;

/// When a solve may stop early.
#[derive(Debug, Clone)]
pub enum Stop {
    /// Settle the whole window.
    Exhaust,
    /// Settle every site with time at most the bound.
    TimeLimit(f64),
    /// Settle the listed sites and everything tied with the slowest of them.
    Targets(Vec<Site>),
}

/// Passage times from a source (or a set of sources at time 0), restricted
/// to paths inside a window.
#[derive(Debug, Clone, PartialEq)]
pub struct PassageTimeMap {
    sources: Vec<Site>,
    window: Window,
    time: Vec<f64>,
    flags: Vec<u8>,
    depth: Vec<u32>,
    order: Vec<u32>,
    horizon: f64,
    boundary_time: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeRow {
    pub x: i32,
    pub y: i32,
    pub time: f64,
}

/// Dijkstra with lazy deletion; zero weights allowed.
pub fn solve_from<W: EdgeWeights + ?Sized>(
    weights: &W,
    sources: &[Site],
    window: Window,
    stop: Stop,
) -> Result<PassageTimeMap> {
    if sources.is_empty() {
        return Err(Error::EmptyTarget);
    }
    for &s in sources {
        if !window.contains(s) {
            return Err(Error::OutsideWindow(s));
        }
    }
    let n = window.len();
    let mut time = vec![f64::INFINITY; n];
    let mut flags = vec![0u8; n];
    let mut depth = vec![0u32; n];
    let mut order = Vec::new();
    let mut heap = BinaryHeap::new();
    for &s in sources {
        let i = window.index(s);
        time[i] = 0.0;
        heap.push(HeapItem { t: 0.0, idx: i as u32 });
    }

    let (mut targets_left, target_idx): (usize, Vec<usize>) = match &stop {
        Stop::Targets(ts) => {
            let mut idx = Vec::with_capacity(ts.len());
            for &t in ts {
                if !window.contains(t) {
                    return Err(Error::OutsideWindow(t));
                }
                idx.push(window.index(t));
            }
            idx.sort_unstable();
            idx.dedup();
            (idx.len(), idx)
        }
        _ => (0, Vec::new()),
    };
    let mut is_target = vec![false; if target_idx.is_empty() { 0 } else { n }];
    for &i in &target_idx {
        is_target[i] = true;
    }
    let mut limit = match stop {
        Stop::TimeLimit(t) => t,
        _ => f64::INFINITY,
    };

    let mut horizon = f64::INFINITY;
    let mut boundary_time = f64::INFINITY;
    while let Some(HeapItem { t, idx }) = heap.pop() {
        let i = idx as usize;
        if flags[i] & SETTLED != 0 || t > time[i] {
            continue;
        }
        if t > limit {
            horizon = limit;
            break;
        }
        flags[i] |= SETTLED;
        order.push(idx);
        let s = window.site(i);
        if boundary_time.is_infinite() && window.is_boundary(s) {
            boundary_time = t;
        }
        if targets_left > 0 && is_target[i] {
            targets_left -= 1;
            if targets_left == 0 {
                limit = t;
            }
        }
        for dir in Dir::ALL {
            let nb = s.step(dir);
            if !window.contains(nb) {
                continue;
            }
            let j = window.index(nb);
            if flags[j] & SETTLED != 0 {
                continue;
            }
            let cand = t + weights.weight(s, dir);
            if cand < time[j] {
                time[j] = cand;
                depth[j] = depth[i] + 1;
                heap.push(HeapItem { t: cand, idx: j as u32 });
            }
        }
    }
    if horizon.is_infinite() {
        if let Some(&last) = order.last() {
            if order.len() < n {
                horizon = time[last as usize];
            }
        }
    }
    // Unsettled tentative values are not passage times.
    for i in 0..n {
        if flags[i] & SETTLED == 0 {
            time[i] = f64::INFINITY;
        }
    }
    // Record every tight incoming edge, ties included.
    for &idx in &order {
        let i = idx as usize;
        if time[i] == 0.0 && sources.contains(&window.site(i)) {
            continue;
        }
        let s = window.site(i);
        let mut mask = 0u8;
        for dir in Dir::ALL {
            let nb = s.step(dir);
            if !window.contains(nb) {
                continue;
            }
            let tn = time[window.index(nb)];
            if tn.is_finite() && tn + weights.weight(s, dir) == time[i] {
                mask |= dir.bit();
            }
        }
        flags[i] |= mask;
    }
    Ok(PassageTimeMap { sources: sources.to_vec(), window, time, flags, depth, order, horizon, boundary_time })
}

/// Single-source passage times on the whole window.
pub fn solve(field: &EdgeField, source: Site, window: Window) -> Result<PassageTimeMap> {
    solve_from(field, &[source], window, Stop::Exhaust)
}

/// Which geodesic(s) to report when several are optimal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TiePolicy {
    Lexicographic,
    All,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticePath {
    pub sites: Vec<Site>,
}

impl LatticePath {
    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.sites.windows(2).map(|w| Edge::new(w[0], w[1]).expect("path sites are adjacent"))
    }

    pub fn passage_time<W: EdgeWeights + ?Sized>(&self, weights: &W) -> f64 {
        self.edges().map(|e| weights.edge(e)).sum()
    }

    pub fn len(&self) -> usize {
        self.sites.len().saturating_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        self.sites.len() <= 1
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Geodesic {
    Path(LatticePath),
    /// Every edge lying on some optimal path to the target.
    Edges(Vec<Edge>),
}

/// Boundary-contact report for a ball `B(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ball {
    pub sites: Vec<Site>,
    pub touches_boundary: bool,
}

impl PassageTimeMap {
    pub fn source(&self) -> Site {
        self.sources[0]
    }

    pub fn sources(&self) -> &[Site] {
        &self.sources
    }

    pub fn window(&self) -> Window {
        self.window
    }

    /// Passage time, `INFINITY` when the site was not settled.
    #[inline]
    pub fn time(&self, s: Site) -> f64 {
        if self.window.contains(s) {
            self.time[self.window.index(s)]
        } else {
            f64::INFINITY
        }
    }

    pub fn times(&self) -> &[f64] {
        &self.time
    }

    /// Sites are final up to this time; `INFINITY` for exhaustive solves.
    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Earliest time at which the window boundary was reached.
    pub fn boundary_time(&self) -> f64 {
        self.boundary_time
    }

    /// `true` when a path leaving the window might beat the in-window time:
    /// the boundary was reached strictly before `s`.
    pub fn clipped(&self, s: Site) -> bool {
        self.time(s) > self.boundary_time
    }

    /// Directions (from `s`) of all optimal incoming edges.
    pub fn pred_dirs(&self, s: Site) -> impl Iterator<Item = Dir> {
        let mask = self.flags[self.window.index(s)] & PRED_MASK;
        Dir::ALL.into_iter().filter(move |d| mask & d.bit() != 0)
    }

    pub fn is_settled(&self, s: Site) -> bool {
        self.window.contains(s) && self.flags[self.window.index(s)] & SETTLED != 0
    }

    /// Sites in the order they were settled (nondecreasing time).
    pub fn settled_order(&self) -> impl Iterator<Item = Site> + '_ {
        self.order.iter().map(|&i| self.window.site(i as usize))
    }

    pub fn settled_count(&self) -> usize {
        self.order.len()
    }

    pub fn geodesic(&self, target: Site, policy: TiePolicy) -> Result<Geodesic> {
        Ok(match policy {
            TiePolicy::Lexicographic => Geodesic::Path(self.geodesic_path(target)?),
            TiePolicy::All => Geodesic::Edges(self.geodesic_edges(target)?),
        })
    }

    fn check_target(&self, target: Site) -> Result<usize> {
        if !self.window.contains(target) || !self.is_settled(target) {
            return Err(Error::OutsideWindow(target));
        }
        Ok(self.window.index(target))
    }

    /// Walks optimal predecessors back to a source, taking the
    /// lexicographically smallest candidate each step. Equal-time steps
    /// (zero weights) must also reduce the tree depth, so the walk ends.
    pub fn geodesic_path(&self, target: Site) -> Result<LatticePath> {
        let mut i = self.check_target(target)?;
        let mut rev = vec![target];
        while !(self.time[i] == 0.0 && self.sources.contains(&self.window.site(i))) {
            let s = self.window.site(i);
            let (t, d) = (self.time[i], self.depth[i]);
            let next = self
                .pred_dirs(s)
                .map(|dir| s.step(dir))
                .filter(|nb| {
                    let j = self.window.index(*nb);
                    self.time[j] < t || self.depth[j] < d
                })
                .min()
                .expect("every settled non-source site has a tight predecessor");
            rev.push(next);
            i = self.window.index(next);
        }
        rev.reverse();
        Ok(LatticePath { sites: rev })
    }

    /// Union of the edges of all geodesics to `target`, sorted.
    pub fn geodesic_edges(&self, target: Site) -> Result<Vec<Edge>> {
        let start = self.check_target(target)?;
        let mut seen = vec![false; self.window.len()];
        let mut stack = vec![start];
        seen[start] = true;
        let mut edges = Vec::new();
        while let Some(i) = stack.pop() {
            let s = self.window.site(i);
            for dir in self.pred_dirs(s) {
                let nb = s.step(dir);
                edges.push(Edge::from_step(s, dir));
                let j = self.window.index(nb);
                if !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        edges.sort_unstable();
        edges.dedup();
        Ok(edges)
    }

    /// `B(t)`: settled sites with time at most `t`.
    pub fn ball(&self, t: f64) -> Result<Ball> {
        if t.is_nan() || t < 0.0 {
            return Err(Error::OutOfRange(format!("ball radius {t} must be nonnegative")));
        }
        if t > self.horizon {
            return Err(Error::OutOfRange(format!("ball radius {t} beyond solved horizon {}", self.horizon)));
        }
        let sites: Vec<Site> = self.settled_order().filter(|&s| self.time(s) <= t).collect();
        let touches_boundary = self.boundary_time <= t;
        if touches_boundary {
            log::warn!("B({t}) touches the window boundary; sizes are truncated");
        }
        Ok(Ball { sites, touches_boundary })
    }

    /// Settled `(site, time)` rows in row-major order.
    pub fn rows(&self) -> Vec<TimeRow> {
        self.window
            .sites()
            .filter(|&s| self.is_settled(s))
            .map(|s| TimeRow { x: s.x, y: s.y, time: self.time(s) })
            .collect()
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "x,y,time")?;
        for r in self.rows() {
            writeln!(out, "{},{},{}", r.x, r.y, r.time)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_field() -> EdgeField {
        EdgeField::new(1, WeightDistribution::dirac(1.0).unwrap())
    }

    #[test]
    fn round_site_half_open() {
        assert_eq!(round_site((0.4, -0.5)), Site::new(0, 0));
        assert_eq!(round_site((0.5, 0.5)), Site::new(1, 1));
        assert_eq!(round_site((0.0, 0.0)), Site::new(0, 0));
        assert_eq!(round_site((-0.51, 2.49)), Site::new(-1, 2));
    }

    #[test]
    fn canonical_edges() {
        let a = Site::new(2, 3);
        let e = Edge::new(a, Site::new(1, 3)).unwrap();
        assert_eq!(e.u, Site::new(1, 3));
        assert_eq!(Edge::from_step(a, Dir::West), e);
        assert!(Edge::new(a, Site::new(3, 4)).is_none());
    }

    #[test]
    fn weights_are_pure() {
        let f = EdgeField::new(9, WeightDistribution::uniform(1.0, 2.0).unwrap());
        let e = Edge::new(Site::new(4, -2), Site::new(4, -1)).unwrap();
        assert_eq!(f.edge_weight(e), f.edge_weight(e));
        assert_eq!(f.weight(Site::new(4, -1), Dir::South), f.edge_weight(e));
        assert_ne!(f.edge_weight(e), EdgeField::new(10, f.dist.clone()).edge_weight(e));
    }

    #[test]
    fn unit_weights_give_l1() {
        let w = Window::centered(6).unwrap();
        let ptm = solve(&unit_field(), Site::ORIGIN, w).unwrap();
        assert_eq!(ptm.time(Site::new(3, 4)), 7.0);
        for s in w.sites() {
            assert_eq!(ptm.time(s), s.l1() as f64);
        }
    }

    #[test]
    fn source_outside_window() {
        let w = Window::centered(2).unwrap();
        assert!(matches!(solve(&unit_field(), Site::new(3, 0), w), Err(Error::OutsideWindow(_))));
    }

    #[test]
    fn zero_atom_is_fine() {
        let d = WeightDistribution::atomic(&[(0.0, 0.3), (1.0, 0.7)]).unwrap();
        let f = EdgeField::new(5, d);
        let w = Window::centered(10).unwrap();
        let ptm = solve(&f, Site::ORIGIN, w).unwrap();
        for s in w.sites() {
            let t = ptm.time(s);
            assert!(t.is_finite() && t <= s.l1() as f64);
            let g = ptm.geodesic_path(s).unwrap();
            assert_eq!(g.passage_time(&f), t);
        }
    }

    #[test]
    fn trivial_geodesics() {
        let w = Window::centered(4).unwrap();
        let ptm = solve(&unit_field(), Site::ORIGIN, w).unwrap();
        let g = ptm.geodesic_path(Site::ORIGIN).unwrap();
        assert_eq!(g.sites, vec![Site::ORIGIN]);
        let g = ptm.geodesic_path(Site::new(2, 0)).unwrap();
        assert_eq!(g.sites, vec![Site::new(0, 0), Site::new(1, 0), Site::new(2, 0)]);
        match ptm.geodesic(Site::new(1, 1), TiePolicy::All).unwrap() {
            Geodesic::Edges(e) => assert_eq!(e.len(), 4),
            other => panic!("{other:?}"),
        }
        assert!(ptm.geodesic_path(Site::new(9, 0)).is_err());
    }

    #[test]
    fn ball_counts() {
        let w = Window::centered(8).unwrap();
        let ptm = solve(&unit_field(), Site::ORIGIN, w).unwrap();
        assert_eq!(ptm.ball(2.0).unwrap().sites.len(), 13);
        assert!(!ptm.ball(2.0).unwrap().touches_boundary);
        assert!(ptm.ball(8.0).unwrap().touches_boundary);
        let cont = EdgeField::new(3, WeightDistribution::uniform(1.0, 2.0).unwrap());
        let ptm = solve(&cont, Site::ORIGIN, w).unwrap();
        assert_eq!(ptm.ball(0.0).unwrap().sites, vec![Site::ORIGIN]);
        assert!(ptm.ball(-1.0).is_err());
    }

    #[test]
    fn early_stop_matches_full_solve() {
        let f = EdgeField::new(11, WeightDistribution::atomic(&[(1.0, 0.6), (3.0, 0.4)]).unwrap());
        let w = Window::centered(30).unwrap();
        let full = solve(&f, Site::ORIGIN, w).unwrap();
        let target = Site::new(7, -5);
        let part = solve_from(&f, &[Site::ORIGIN], w, Stop::Targets(vec![target])).unwrap();
        assert_eq!(part.time(target), full.time(target));
        assert!(part.horizon() >= part.time(target));
        for s in part.settled_order() {
            assert_eq!(part.time(s), full.time(s));
            assert_eq!(part.pred_dirs(s).collect::<Vec<_>>(), full.pred_dirs(s).collect::<Vec<_>>());
        }
        let lim = solve_from(&f, &[Site::ORIGIN], w, Stop::TimeLimit(6.0)).unwrap();
        for s in w.sites() {
            if full.time(s) <= 6.0 {
                assert_eq!(lim.time(s), full.time(s));
            } else {
                assert!(!lim.is_settled(s));
            }
        }
    }

    #[test]
    fn csv_dump() {
        let w = Window::centered(1).unwrap();
        let ptm = solve(&unit_field(), Site::ORIGIN, w).unwrap();
        let mut buf = Vec::new();
        ptm.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 10);
        assert!(text.contains("\n0,0,0\n"));
    }
}
