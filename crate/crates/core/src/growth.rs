//! Competing first-passage growth of several species.

use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::convex::{self, ConvexShape, Point};
use crate::error::{Error, Result};
use crate::lattice::{round_site, solve, solve_from, Dir, EdgeField, EdgeWeights, Site, Stop, Window};
use crate::measure::WeightDistribution;
use crate::rng::{keyed_hash, trial_seed};

pub const MAX_SPECIES: usize = 128;

/// What happens at a site reached first by several species at once.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TieRule {
    /// The site is never colonized.
    #[default]
    Strict,
    /// The smallest tied species index wins.
    Lexicographic,
    /// A tied species chosen by a keyed hash of the site.
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompetitionConfig {
    pub dist: WeightDistribution,
    pub seeds: Vec<Site>,
    pub window: Window,
    #[serde(default)]
    pub tie_policy: TieRule,
    pub seed: u64,
}

impl CompetitionConfig {
    pub fn validate(&self) -> Result<()> {
        let k = self.seeds.len();
        if k == 0 || k > MAX_SPECIES {
            return Err(Error::InvalidSeeds(format!("need 1..={MAX_SPECIES} seeds, got {k}")));
        }
        for (i, s) in self.seeds.iter().enumerate() {
            if !self.window.contains(*s) {
                return Err(Error::OutsideWindow(*s));
            }
            if self.seeds[..i].contains(s) {
                return Err(Error::InvalidSeeds(format!("seed ({}, {}) listed twice", s.x, s.y)));
            }
        }
        Ok(())
    }

    pub fn field(&self) -> EdgeField {
        EdgeField::new(self.seed, self.dist.clone())
    }
}

/// Final colonization of a window.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyMap {
    window: Window,
    species: usize,
    owner: Vec<Option<u8>>,
    reach_time: Vec<f64>,
    /// Bitset of the species attaining the minimal arrival time.
    argmin: Vec<u128>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OccupancyRow {
    pub x: i32,
    pub y: i32,
    /// Species index, or −1 when uncolonized.
    pub owner: i32,
    pub reach_time: f64,
}

impl OccupancyMap {
    pub fn window(&self) -> Window {
        self.window
    }

    pub fn species(&self) -> usize {
        self.species
    }

    pub fn owner(&self, s: Site) -> Option<usize> {
        self.owner[self.window.index(s)].map(usize::from)
    }

    pub fn reach_time(&self, s: Site) -> f64 {
        self.reach_time[self.window.index(s)]
    }

    /// Species whose passage time to `s` is minimal.
    pub fn first_arrivals(&self, s: Site) -> Vec<usize> {
        let m = self.argmin[self.window.index(s)];
        (0..self.species).filter(|&i| m >> i & 1 == 1).collect()
    }

    pub fn is_tie(&self, s: Site) -> bool {
        self.argmin[self.window.index(s)].count_ones() > 1
    }

    pub fn tie_set(&self) -> Vec<Site> {
        self.window.sites().filter(|&s| self.is_tie(s)).collect()
    }

    /// `C_i` as a list of sites in row-major order.
    pub fn colony(&self, i: usize) -> Vec<Site> {
        self.window.sites().filter(|&s| self.owner(s) == Some(i)).collect()
    }

    pub fn colony_sizes(&self) -> Vec<usize> {
        let mut n = vec![0; self.species];
        for o in self.owner.iter().flatten() {
            n[*o as usize] += 1;
        }
        n
    }

    /// Which species own at least one window-boundary site.
    pub fn touches_boundary(&self) -> Vec<bool> {
        let mut t = vec![false; self.species];
        for s in self.window.sites().filter(|&s| self.window.is_boundary(s)) {
            if let Some(o) = self.owner(s) {
                t[o] = true;
            }
        }
        t
    }

    pub fn rows(&self) -> Vec<OccupancyRow> {
        self.window
            .sites()
            .map(|s| OccupancyRow {
                x: s.x,
                y: s.y,
                owner: self.owner(s).map_or(-1, |o| o as i32),
                reach_time: self.reach_time(s),
            })
            .collect()
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "x,y,owner,reach_time")?;
        for r in self.rows() {
            writeln!(out, "{},{},{},{}", r.x, r.y, r.owner, r.reach_time)?;
        }
        Ok(())
    }
}

/// One multi-source solve; the set of fastest species is pushed along
/// optimal predecessor edges in settle order.
pub fn compete(config: &CompetitionConfig) -> Result<OccupancyMap> {
    config.validate()?;
    compete_on(&config.field(), config)
}

pub fn compete_on<W: EdgeWeights + ?Sized>(weights: &W, config: &CompetitionConfig) -> Result<OccupancyMap> {
    config.validate()?;
    let window = config.window;
    let map = solve_from(weights, &config.seeds, window, Stop::Exhaust)?;
    let n = window.len();
    let mut argmin = vec![0u128; n];
    for (i, s) in config.seeds.iter().enumerate() {
        argmin[window.index(*s)] = 1u128 << i;
    }
    let order: Vec<Site> = map.settled_order().collect();
    let has_zero_step = order.iter().any(|&s| map.pred_dirs(s).any(|d| map.time(s.step(d)) == map.time(s)));
    let sweep = |argmin: &mut Vec<u128>| {
        let mut changed = false;
        for &s in &order {
            let i = window.index(s);
            if config.seeds.contains(&s) {
                continue;
            }
            let mut m = argmin[i];
            for dir in map.pred_dirs(s) {
                m |= argmin[window.index(s.step(dir))];
            }
            if m != argmin[i] {
                argmin[i] = m;
                changed = true;
            }
        }
        changed
    };
    sweep(&mut argmin);
    // Zero-weight predecessors may settle after their successor; iterate to a
    // fixed point in that case.
    if has_zero_step {
        while sweep(&mut argmin) {}
    }
    let owner = (0..n)
        .map(|i| {
            let m = argmin[i];
            match m.count_ones() {
                0 => None,
                1 => Some(m.trailing_zeros() as u8),
                c => match config.tie_policy {
                    TieRule::Strict => None,
                    TieRule::Lexicographic => Some(m.trailing_zeros() as u8),
                    TieRule::Random => {
                        let s = window.site(i);
                        let pick = keyed_hash(config.seed ^ 0x7469_6573, &[s.x as u64, s.y as u64]) % c as u64;
                        let mut rest = m;
                        for _ in 0..pick {
                            rest &= rest - 1;
                        }
                        Some(rest.trailing_zeros() as u8)
                    }
                },
            }
        })
        .collect();
    Ok(OccupancyMap { window, species: config.seeds.len(), owner, reach_time: map.times().to_vec(), argmin })
}

/// Argmin over species recomputed from one single-source solve per seed.
/// `None` marks a tie.
pub fn independent_owners(config: &CompetitionConfig, sites: &[Site]) -> Result<Vec<Option<usize>>> {
    config.validate()?;
    let field = config.field();
    let maps = config
        .seeds
        .iter()
        .map(|&s| solve(&field, s, config.window))
        .collect::<Result<Vec<_>>>()?;
    Ok(sites
        .iter()
        .map(|&y| {
            let times: Vec<f64> = maps.iter().map(|m| m.time(y)).collect();
            let best = times.iter().copied().fold(f64::INFINITY, f64::min);
            let winners: Vec<usize> = (0..times.len()).filter(|&i| times[i] == best).collect();
            (winners.len() == 1).then(|| winners[0])
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoexistenceSummary {
    pub trials: usize,
    pub threshold: usize,
    /// Fraction of trials in which every species survives.
    pub fraction: f64,
    /// Per species, the number of trials it survived.
    pub survival_counts: Vec<usize>,
}

/// Survival means `|C_i| ≥ threshold` and `C_i` reaches the window boundary.
pub fn coexistence_stats(config: &CompetitionConfig, trials: usize, threshold: usize) -> Result<CoexistenceSummary> {
    config.validate()?;
    if threshold == 0 || trials == 0 {
        return Err(Error::OutOfRange("threshold and trials must be positive".into()));
    }
    let outcomes: Vec<Vec<bool>> = (0..trials as u64)
        .into_par_iter()
        .map(|i| -> Result<Vec<bool>> {
            let cfg = CompetitionConfig { seed: trial_seed(config.seed, i), ..config.clone() };
            let occ = compete(&cfg)?;
            let sizes = occ.colony_sizes();
            Ok(occ.touches_boundary().into_iter().zip(sizes).map(|(b, n)| b && n >= threshold).collect())
        })
        .collect::<Result<_>>()?;
    let k = config.seeds.len();
    let survival_counts = (0..k).map(|i| outcomes.iter().filter(|o| o[i]).count()).collect();
    let all = outcomes.iter().filter(|o| o.iter().all(|&b| b)).count();
    Ok(CoexistenceSummary { trials, threshold, fraction: all as f64 / trials as f64, survival_counts })
}

/// Seeds `x_1 = R_1 v_1`, `x_{i+1} = x_i + R_i (v_{i+1} − v_i)`, computed in
/// the plane and then rounded to sites. The `v_i` must be distinct extreme
/// points of `shape` listed in boundary order.
pub fn place_seeds(shape: &ConvexShape, dirs: &[Point], radii: &[f64]) -> Result<Vec<Site>> {
    let k = dirs.len();
    if k == 0 {
        return Err(Error::InvalidSeeds("no directions".into()));
    }
    if radii.len() < k.saturating_sub(1).max(1) {
        return Err(Error::InvalidSeeds(format!("{k} directions need at least {} radii", k.saturating_sub(1).max(1))));
    }
    if let Some(r) = radii.iter().find(|r| !(**r > 0.0 && r.is_finite())) {
        return Err(Error::OutOfRange(format!("radius {r} must be positive")));
    }
    let ext = convex::extreme_points(shape, convex::THETA_TOL);
    let scale = shape.max_l1_norm();
    let position = |v: Point| ext.iter().position(|&e| convex::l1_dist(e, v) <= 1e-9 * scale);
    let mut idx = Vec::with_capacity(k);
    for &v in dirs {
        match position(v) {
            Some(p) if !idx.contains(&p) => idx.push(p),
            Some(_) => return Err(Error::InvalidSeeds(format!("direction {v:?} repeated"))),
            None => return Err(Error::InvalidSeeds(format!("direction {v:?} is not an extreme point of the shape"))),
        }
    }
    if k >= 3 {
        let m = ext.len();
        let steps: Vec<usize> = idx.windows(2).map(|w| (w[1] + m - w[0]) % m).collect();
        let ccw = steps.iter().sum::<usize>() < m;
        let cw = steps.iter().map(|s| m - s).sum::<usize>() < m;
        if !(ccw || cw) {
            return Err(Error::InvalidSeeds("directions are not in boundary order".into()));
        }
    }
    let mut x = (radii[0] * dirs[0].0, radii[0] * dirs[0].1);
    let mut out = vec![round_site(x)];
    for i in 1..k {
        let r = radii[i - 1];
        x = (x.0 + r * (dirs[i].0 - dirs[i - 1].0), x.1 + r * (dirs[i].1 - dirs[i - 1].1));
        out.push(round_site(x));
    }
    let mut uniq = out.clone();
    uniq.sort_unstable();
    uniq.dedup();
    if uniq.len() != out.len() {
        return Err(Error::InvalidSeeds("radii too small: rounded seeds coincide".into()));
    }
    Ok(out)
}

/// `π_{v_i}(x_i − x_j)` for all ordered pairs, with `w_i` the boundary
/// tangent at `v_i`.
pub fn projection_margins(shape: &ConvexShape, dirs: &[Point], seeds: &[Site]) -> Result<Vec<Vec<f64>>> {
    let k = dirs.len().min(seeds.len());
    let mut out = vec![vec![0.0; k]; k];
    for i in 0..k {
        let w = shape.tangent_at(dirs[i]);
        for j in 0..k {
            let (xi, xj) = (seeds[i].to_f64(), seeds[j].to_f64());
            out[i][j] = convex::project(dirs[i], w, (xi.0 - xj.0, xi.1 - xj.1))?;
        }
    }
    Ok(out)
}

/// Largest violation of `|T(u) − T(v)| ≤ w(u, v)` over in-window edges.
pub fn lipschitz_violation<W: EdgeWeights + ?Sized>(weights: &W, occ: &OccupancyMap) -> f64 {
    let window = occ.window();
    window
        .sites()
        .flat_map(|s| [Dir::East, Dir::North].map(|d| (s, d)))
        .filter(|(s, d)| window.contains(s.step(*d)))
        .map(|(s, d)| (occ.reach_time(s) - occ.reach_time(s.step(d))).abs() - weights.weight(s, d))
        .fold(0.0, f64::max)
}
