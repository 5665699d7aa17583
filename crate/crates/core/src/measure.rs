//! Edge-weight distributions and the constructive measure sequence.
//!
//! A [`WeightDistribution`] is an exact finite mixture of point masses and
//! uniform pieces on `[0, ∞)`. All distribution arithmetic happens on the
//! mixture representation; nothing is ever binned.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oriented::REFERENCE_PC;

/// Critical probability of bond percolation on Z². Mass at zero must stay
/// strictly below it.
pub const BOND_PC: f64 = 0.5;

const MASS_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub loc: f64,
    pub mass: f64,
}

/// Uniform mass on the half-open interval `[lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Piece {
    pub lo: f64,
    pub hi: f64,
    pub mass: f64,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DistributionRepr {
    #[serde(default)]
    atoms: Vec<[f64; 2]>,
    #[serde(default)]
    pieces: Vec<[f64; 3]>,
}

/// Breakpoints of the CDF with its left limits and values there. Between
/// consecutive breakpoints the CDF is affine.
#[derive(Debug, Clone, Default)]
struct CdfTable {
    xs: Vec<f64>,
    left: Vec<f64>,
    right: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "DistributionRepr", into = "DistributionRepr")]
pub struct WeightDistribution {
    atoms: Vec<Atom>,
    pieces: Vec<Piece>,
    table: CdfTable,
}

impl PartialEq for WeightDistribution {
    fn eq(&self, other: &Self) -> bool {
        self.atoms == other.atoms && self.pieces == other.pieces
    }
}

impl TryFrom<DistributionRepr> for WeightDistribution {
    type Error = Error;

    fn try_from(raw: DistributionRepr) -> Result<Self> {
        WeightDistribution::new(
            raw.atoms.iter().map(|&[loc, mass]| Atom { loc, mass }).collect(),
            raw.pieces.iter().map(|&[lo, hi, mass]| Piece { lo, hi, mass }).collect(),
        )
    }
}

impl From<WeightDistribution> for DistributionRepr {
    fn from(d: WeightDistribution) -> Self {
        DistributionRepr {
            atoms: d.atoms.iter().map(|a| [a.loc, a.mass]).collect(),
            pieces: d.pieces.iter().map(|p| [p.lo, p.hi, p.mass]).collect(),
        }
    }
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidDistribution(msg.into())
}

impl WeightDistribution {
    /// Validates and canonicalizes a mixture (components sorted by location).
    pub fn new(mut atoms: Vec<Atom>, mut pieces: Vec<Piece>) -> Result<Self> {
        if atoms.is_empty() && pieces.is_empty() {
            return Err(invalid("no components"));
        }
        for a in &atoms {
            if !a.loc.is_finite() || a.loc < 0.0 {
                return Err(invalid(format!("atom location {} is not a nonnegative real", a.loc)));
            }
            if !(a.mass > 0.0 && a.mass <= 1.0) {
                return Err(invalid(format!("atom mass {} outside (0, 1]", a.mass)));
            }
        }
        for p in &pieces {
            if !(p.lo.is_finite() && p.hi.is_finite()) || p.lo < 0.0 || p.lo >= p.hi {
                return Err(invalid(format!("piece [{}, {}) is not an interval in [0, inf)", p.lo, p.hi)));
            }
            if !(p.mass > 0.0 && p.mass <= 1.0) {
                return Err(invalid(format!("piece mass {} outside (0, 1]", p.mass)));
            }
        }
        atoms.sort_by(|a, b| a.loc.total_cmp(&b.loc));
        pieces.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        if let Some(w) = atoms.windows(2).find(|w| w[0].loc == w[1].loc) {
            return Err(invalid(format!("duplicate atom at {}", w[0].loc)));
        }
        if let Some(w) = pieces.windows(2).find(|w| w[0].hi > w[1].lo) {
            return Err(invalid(format!(
                "pieces [{}, {}) and [{}, {}) overlap",
                w[0].lo, w[0].hi, w[1].lo, w[1].hi
            )));
        }
        let total: f64 = atoms.iter().map(|a| a.mass).sum::<f64>() + pieces.iter().map(|p| p.mass).sum::<f64>();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(invalid(format!("total mass {total} differs from 1")));
        }
        let zero = atoms.iter().find(|a| a.loc == 0.0).map_or(0.0, |a| a.mass);
        if zero >= BOND_PC {
            return Err(invalid(format!("mass at zero {zero} is not below {BOND_PC}")));
        }
        let mut d = WeightDistribution { atoms, pieces, table: CdfTable::default() };
        d.table = d.build_table();
        Ok(d)
    }

    pub fn dirac(loc: f64) -> Result<Self> {
        Self::new(vec![Atom { loc, mass: 1.0 }], vec![])
    }

    pub fn atomic(pairs: &[(f64, f64)]) -> Result<Self> {
        Self::new(pairs.iter().map(|&(loc, mass)| Atom { loc, mass }).collect(), vec![])
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![], vec![Piece { lo, hi, mass: 1.0 }])
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    fn build_table(&self) -> CdfTable {
        let mut xs: Vec<f64> = self
            .atoms
            .iter()
            .map(|a| a.loc)
            .chain(self.pieces.iter().flat_map(|p| [p.lo, p.hi]))
            .collect();
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        let left = xs.iter().map(|&x| self.cdf_left(x)).collect();
        let right = xs.iter().map(|&x| self.cdf(x)).collect();
        CdfTable { xs, left, right }
    }

    fn continuous_part(&self, x: f64) -> f64 {
        self.pieces
            .iter()
            .map(|p| p.mass * ((x - p.lo) / (p.hi - p.lo)).clamp(0.0, 1.0))
            .sum()
    }

    /// `F(x) = μ((-∞, x])`.
    pub fn cdf(&self, x: f64) -> f64 {
        self.atoms.iter().filter(|a| a.loc <= x).map(|a| a.mass).sum::<f64>() + self.continuous_part(x)
    }

    /// Left limit `F(x-) = μ((-∞, x))`.
    pub fn cdf_left(&self, x: f64) -> f64 {
        self.atoms.iter().filter(|a| a.loc < x).map(|a| a.mass).sum::<f64>() + self.continuous_part(x)
    }

    /// Mass of the atom at `x`, zero if there is none.
    pub fn mass_at(&self, x: f64) -> f64 {
        self.atoms.iter().find(|a| a.loc == x).map_or(0.0, |a| a.mass)
    }

    pub fn mean(&self) -> f64 {
        self.atoms.iter().map(|a| a.loc * a.mass).sum::<f64>()
            + self.pieces.iter().map(|p| p.mass * 0.5 * (p.lo + p.hi)).sum::<f64>()
    }

    pub fn support_min(&self) -> f64 {
        self.table.xs[0]
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.table.xs
    }

    /// Generalized inverse `inf{x : F(x) > u}`.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&u) {
            return Err(Error::QuantileDomain(u));
        }
        Ok(self.quantile_unchecked(u))
    }

    /// Inverse CDF without the domain check; `u` must lie in `[0, 1)`.
    #[inline]
    pub fn quantile_unchecked(&self, u: f64) -> f64 {
        let t = &self.table;
        let k = t.right.partition_point(|&f| f <= u);
        if k >= t.xs.len() {
            return *t.xs.last().unwrap();
        }
        if k > 0 && t.left[k] > u {
            let (x0, f0) = (t.xs[k - 1], t.right[k - 1]);
            let frac = (u - f0) / (t.left[k] - f0);
            return x0 + frac * (t.xs[k] - x0);
        }
        t.xs[k]
    }

    /// Intervals carrying the continuous part of the law.
    pub fn q_support(&self) -> Vec<(f64, f64)> {
        self.pieces.iter().map(|p| (p.lo, p.hi)).collect()
    }

    /// Whether weight `w` falls in the continuous support (and is not an atom).
    #[inline]
    pub fn in_q(&self, w: f64) -> bool {
        self.pieces.iter().any(|p| p.lo <= w && w < p.hi) && !self.atoms.iter().any(|a| a.loc == w)
    }

    pub fn is_purely_atomic(&self) -> bool {
        self.pieces.is_empty()
    }

    /// Membership in `M_p`: an atom of mass `p` at 1 and nothing to its left.
    pub fn flat_edge_mass(&self) -> Option<f64> {
        let p = self.mass_at(1.0);
        let below = self.atoms.iter().any(|a| a.loc < 1.0) || self.pieces.iter().any(|p| p.lo < 1.0);
        (p > 0.0 && !below).then_some(p)
    }

    /// `F(x + slack)`: tolerant evaluation used when `x` was produced by
    /// floating-point shifts of breakpoints.
    fn cdf_slack(&self, x: f64) -> f64 {
        self.cdf(x + 1e-14 * x.abs().max(1.0))
    }

    fn cdf_left_slack(&self, x: f64) -> f64 {
        self.cdf_left(x + 1e-14 * x.abs().max(1.0))
    }
}

/// Largest violation `sup_x [G(x) - F(x+ε)]`, evaluated on the finite set
/// of points where the supremum can be attained.
fn excess(g: &WeightDistribution, f: &WeightDistribution, eps: f64) -> f64 {
    let mut worst = 0.0f64;
    for &x in g.breakpoints() {
        worst = worst.max(g.cdf(x) - f.cdf_slack(x + eps));
    }
    for &y in f.breakpoints() {
        worst = worst.max(g.cdf_left(y - eps) - f.cdf_left_slack(y));
    }
    worst
}

fn levy_holds(f: &WeightDistribution, g: &WeightDistribution, eps: f64) -> bool {
    excess(g, f, eps) <= eps && excess(f, g, eps) <= eps
}

/// Lévy distance between two mixtures.
///
/// The defining inequalities only change shape when a shifted breakpoint of
/// one CDF crosses a breakpoint of the other, so the infimum is located
/// between consecutive candidate shifts `|f_i - g_j|` and then solved in
/// closed form on that interval, where every constraint is affine in ε.
pub fn levy_distance(f: &WeightDistribution, g: &WeightDistribution) -> f64 {
    let mut cands = vec![0.0, 1.0];
    for &a in f.breakpoints() {
        for &b in g.breakpoints() {
            let d = (a - b).abs();
            if d < 1.0 {
                cands.push(d);
            }
        }
    }
    cands.sort_by(f64::total_cmp);
    cands.dedup();
    let hi = cands.partition_point(|&e| !levy_holds(f, g, e));
    if hi == 0 {
        return 0.0;
    }
    let hi = hi.min(cands.len() - 1);
    let (lo_e, hi_e) = (cands[hi - 1], cands[hi]);
    // Constraint values are affine on (lo_e, hi_e); recover each line from
    // two interior samples and intersect with the diagonal.
    let e1 = lo_e + (hi_e - lo_e) / 3.0;
    let e2 = lo_e + 2.0 * (hi_e - lo_e) / 3.0;
    let mut root = lo_e;
    for (a, b) in [(f, g), (g, f)] {
        let terms = |eps: f64| -> Vec<f64> {
            let mut v: Vec<f64> = b.breakpoints().iter().map(|&x| b.cdf(x) - a.cdf(x + eps)).collect();
            v.extend(a.breakpoints().iter().map(|&y| b.cdf_left(y - eps) - a.cdf_left(y)));
            v
        };
        let (t1, t2) = (terms(e1), terms(e2));
        for (v1, v2) in t1.into_iter().zip(t2) {
            let slope = (v2 - v1) / (e2 - e1);
            let icpt = v1 - slope * e1;
            if icpt > 0.0 {
                root = root.max(icpt / (1.0 - slope));
            }
        }
    }
    root.clamp(lo_e, hi_e)
}

/// Schedule driving the constructive sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstructionSchedule {
    pub p0: f64,
    pub p_seq: Vec<f64>,
    pub y_seq: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stages: Option<usize>,
    #[serde(default)]
    pub spread: f64,
}

impl ConstructionSchedule {
    pub fn stages(&self) -> usize {
        self.stages.unwrap_or(self.p_seq.len())
    }

    /// `p_0, p_1, …, p_N`.
    pub fn levels(&self) -> Vec<f64> {
        std::iter::once(self.p0).chain(self.p_seq.iter().copied().take(self.stages())).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSchedule(m));
        if !(self.p0 > REFERENCE_PC && self.p0 <= 1.0) {
            return bad(format!("p0 = {} outside ({REFERENCE_PC}, 1]", self.p0));
        }
        let n = self.stages();
        if self.p_seq.len() < n || self.y_seq.len() < n {
            return bad(format!("{n} stages need p_seq and y_seq of length >= {n}"));
        }
        let mut prev = self.p0;
        for &p in &self.p_seq[..n] {
            if !(p > REFERENCE_PC && p < prev) {
                return bad(format!("p_seq must decrease strictly within ({REFERENCE_PC}, p0); got {p} after {prev}"));
            }
            prev = p;
        }
        let mut prev_y = f64::INFINITY;
        for &y in &self.y_seq[..n] {
            if !(y > 1.0 && y < prev_y) {
                return bad(format!("y_seq must decrease strictly and stay above 1; got {y}"));
            }
            prev_y = y;
        }
        if !(self.spread >= 0.0 && self.spread.is_finite()) {
            return bad(format!("spread {} must be a nonnegative real", self.spread));
        }
        Ok(())
    }
}

/// Builds `μ_0, …, μ_N`, moving mass `r_n = p_{n-1} - p_n` from the atom at 1
/// to `y_n` (a point mass, or a uniform piece of half-width `spread`).
pub fn construct_sequence(
    base: &WeightDistribution,
    schedule: &ConstructionSchedule,
) -> Result<Vec<WeightDistribution>> {
    schedule.validate()?;
    match base.flat_edge_mass() {
        Some(p) if (p - schedule.p0).abs() <= MASS_TOL => {}
        Some(p) => {
            return Err(Error::Construction { step: 0, reason: format!("base atom at 1 has mass {p}, schedule p0 = {}", schedule.p0) })
        }
        None => {
            return Err(Error::Construction { step: 0, reason: "base needs an atom at 1 and no mass below 1".into() })
        }
    }
    let levels = schedule.levels();
    let h = schedule.spread;
    let mut out = vec![base.clone()];
    for step in 1..levels.len() {
        let cur = &out[step - 1];
        let fail = |reason: String| Error::Construction { step, reason };
        let (p_prev, p_next) = (levels[step - 1], levels[step]);
        let r = p_prev - p_next;
        let at_one = cur.mass_at(1.0);
        if r > at_one + MASS_TOL {
            return Err(fail(format!("moving {r} exceeds the mass {at_one} at 1")));
        }
        let y = schedule.y_seq[step - 1];
        if y <= 1.0 {
            return Err(fail(format!("target location {y} must exceed 1")));
        }
        let mut atoms: Vec<Atom> = cur
            .atoms()
            .iter()
            .map(|a| if a.loc == 1.0 { Atom { loc: 1.0, mass: p_next } } else { *a })
            .collect();
        let mut pieces = cur.pieces().to_vec();
        if h > 0.0 {
            if y - h < 1.0 {
                return Err(fail(format!("piece [{}, {}) would put mass below 1", y - h, y + h)));
            }
            pieces.push(Piece { lo: y - h, hi: y + h, mass: r });
        } else if let Some(a) = atoms.iter_mut().find(|a| a.loc == y) {
            a.mass += r;
        } else {
            atoms.push(Atom { loc: y, mass: r });
        }
        let next = WeightDistribution::new(atoms, pieces).map_err(|e| fail(e.to_string()))?;
        out.push(next);
    }
    Ok(out)
}
