//! Time constants and empirical limit shapes.

use std::f64::consts::FRAC_PI_2;
use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::convex::{self, hull, ConvexShape, Point};
use crate::error::{Error, Result};
use crate::lattice::{round_site, solve_from, EdgeField, Site, Stop, Window};
use crate::measure::{levy_distance, WeightDistribution};
use crate::oriented::mean_stderr;
use crate::rng::trial_seed;

/// First-quadrant sampling directions, scale and trial count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DirectionPlan {
    /// Angles in `[0, π/2]`.
    pub angles: Vec<f64>,
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
}

impl DirectionPlan {
    /// `d` equally spaced angles from the x-axis to the y-axis inclusive.
    pub fn uniform(d: usize, n: usize, trials: usize, seed: u64) -> Result<DirectionPlan> {
        let angles = (0..d).map(|k| FRAC_PI_2 * k as f64 / (d.max(2) - 1) as f64).collect();
        let plan = DirectionPlan { angles, n, trials, seed };
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        if self.angles.len() < 3 {
            return Err(Error::OutOfRange(format!("need at least 3 directions, got {}", self.angles.len())));
        }
        if self.angles.iter().any(|a| !(0.0..=FRAC_PI_2 + 1e-12).contains(a)) {
            return Err(Error::OutOfRange("direction angles must lie in [0, pi/2]".into()));
        }
        if self.n < 16 {
            return Err(Error::OutOfRange(format!("scale n = {} below 16", self.n)));
        }
        if self.trials == 0 {
            return Err(Error::OutOfRange("trials must be positive".into()));
        }
        Ok(())
    }

    /// Lattice target for each direction at scale `n`.
    pub fn targets(&self) -> Vec<Site> {
        self.angles
            .iter()
            .map(|&a| round_site((self.n as f64 * a.cos(), self.n as f64 * a.sin())))
            .collect()
    }
}

/// Half-width of a window large enough that geodesics to `n·direction`
/// rarely leave it.
pub fn window_for(n: usize, l1: f64) -> Result<Window> {
    Window::centered((1.6 * n as f64 * l1).ceil().max(2.0) as i32)
}

/// The eight images of a site under the symmetries of the square lattice.
pub fn orbit(s: Site) -> [Site; 8] {
    let (x, y) = (s.x, s.y);
    [
        Site::new(x, y),
        Site::new(-x, y),
        Site::new(x, -y),
        Site::new(-x, -y),
        Site::new(y, x),
        Site::new(-y, x),
        Site::new(y, -x),
        Site::new(-y, -x),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeConstant {
    pub m_hat: f64,
    pub stderr: f64,
    pub used: usize,
    pub clipped: usize,
}

/// `τ(0, round(n·direction)) / n` averaged over independent fields.
pub fn time_constant(
    dist: &WeightDistribution,
    direction: Point,
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<TimeConstant> {
    let l1 = convex::l1_norm(direction);
    if l1 == 0.0 || !l1.is_finite() {
        return Err(Error::OutOfRange("direction must be a nonzero finite vector".into()));
    }
    if n == 0 || trials == 0 {
        return Err(Error::OutOfRange("n and trials must be positive".into()));
    }
    let target = round_site((n as f64 * direction.0, n as f64 * direction.1));
    let window = window_for(n, l1)?;
    let samples: Vec<Option<f64>> = (0..trials as u64)
        .into_par_iter()
        .map(|i| -> Result<Option<f64>> {
            let field = EdgeField::new(trial_seed(seed, i), dist.clone());
            let map = solve_from(&field, &[Site::ORIGIN], window, Stop::Targets(vec![target]))?;
            Ok((!map.clipped(target)).then(|| map.time(target) / n as f64))
        })
        .collect::<Result<_>>()?;
    let used: Vec<f64> = samples.iter().flatten().copied().collect();
    if used.is_empty() {
        return Err(Error::AllClipped(trials));
    }
    let (m_hat, stderr) = mean_stderr(&used);
    Ok(TimeConstant { m_hat, stderr, used: used.len(), clipped: trials - used.len() })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionEstimate {
    pub theta: f64,
    pub target: Site,
    /// Orbit- and trial-averaged passage time to `target`, divided by `n`.
    pub m_hat: f64,
    pub stderr: f64,
    pub used: usize,
    pub clipped: usize,
    /// `target / (n·m_hat)`, a point on the estimated boundary.
    pub boundary: Point,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeEstimate {
    pub shape: ConvexShape,
    pub directions: Vec<DirectionEstimate>,
    pub dist: WeightDistribution,
    pub n: usize,
    pub trials: usize,
}

impl ShapeEstimate {
    pub fn any_clipped(&self) -> bool {
        self.directions.iter().any(|d| d.clipped > 0)
    }

    /// Largest relative standard error over directions.
    pub fn max_rel_stderr(&self) -> f64 {
        self.directions.iter().map(|d| d.stderr / d.m_hat).fold(0.0, f64::max)
    }

    /// Turning-angle threshold above the noise level: four relative standard
    /// errors per unit of angular spacing between sampled directions.
    pub fn calibrated_theta(&self) -> f64 {
        let mut th: Vec<f64> = self.directions.iter().map(|d| d.theta).collect();
        th.sort_by(f64::total_cmp);
        let spacing = th.windows(2).map(|w| w[1] - w[0]).filter(|d| *d > 0.0).fold(f64::INFINITY, f64::min);
        (4.0 * self.max_rel_stderr() / spacing).max(convex::THETA_TOL)
    }

    /// Distance below `x + y = 1` still counted as touching the flat edge:
    /// four relative standard errors of the noisiest direction.
    pub fn flat_edge_tolerance(&self) -> f64 {
        4.0 * self.max_rel_stderr()
    }

    pub fn flat_edge(&self) -> Result<convex::FlatEdgeReport> {
        convex::flat_edge_intersection(&self.shape, self.flat_edge_tolerance().max(convex::THETA_TOL))
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "theta,n,trials,m_hat,stderr,clipped")?;
        for d in &self.directions {
            writeln!(out, "{},{},{},{},{},{}", d.theta, self.n, self.trials, d.m_hat, d.stderr, d.clipped)?;
        }
        Ok(())
    }
}

/// Estimates the limit shape from time constants in the plan's directions.
///
/// Each trial draws one field and solves once from the origin; every
/// direction and its eight lattice images share that solve. Times are
/// averaged over each orbit before inversion, and the boundary points are
/// replicated under the same symmetries before taking the hull.
pub fn empirical_shape(dist: &WeightDistribution, plan: &DirectionPlan) -> Result<ShapeEstimate> {
    plan.validate()?;
    let targets = plan.targets();
    let max_l1 = plan.angles.iter().map(|a| a.cos().abs() + a.sin().abs()).fold(0.0, f64::max);
    let window = window_for(plan.n, max_l1)?;
    let all: Vec<Site> = targets.iter().flat_map(|&t| orbit(t)).collect();
    let per_trial: Vec<Vec<Option<f64>>> = (0..plan.trials as u64)
        .into_par_iter()
        .map(|i| -> Result<Vec<Option<f64>>> {
            let field = EdgeField::new(trial_seed(plan.seed, i), dist.clone());
            let map = solve_from(&field, &[Site::ORIGIN], window, Stop::Targets(all.clone()))?;
            Ok(targets
                .iter()
                .map(|&t| {
                    let imgs = orbit(t);
                    if imgs.iter().any(|&s| map.clipped(s)) {
                        None
                    } else {
                        Some(imgs.iter().map(|&s| map.time(s)).sum::<f64>() / 8.0)
                    }
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    let n = plan.n as f64;
    let mut directions = Vec::with_capacity(targets.len());
    for (k, (&theta, &target)) in plan.angles.iter().zip(&targets).enumerate() {
        let used: Vec<f64> = per_trial.iter().filter_map(|row| row[k]).collect();
        if used.is_empty() {
            return Err(Error::AllClipped(plan.trials));
        }
        let (mean, stderr) = mean_stderr(&used);
        let (tx, ty) = target.to_f64();
        directions.push(DirectionEstimate {
            theta,
            target,
            m_hat: mean / n,
            stderr: stderr / n,
            used: used.len(),
            clipped: plan.trials - used.len(),
            boundary: (tx / mean, ty / mean),
        });
    }
    let pts: Vec<Point> = directions.iter().map(|d| d.boundary).collect();
    let shape = hull(&ConvexShape::symmetrize_points(&pts))?;
    Ok(ShapeEstimate { shape, directions, dist: dist.clone(), n: plan.n, trials: plan.trials })
}

/// Hull vertices whose turning angle exceeds `theta_stat`.
pub fn sides_estimate(est: &ShapeEstimate, theta_stat: f64) -> usize {
    convex::sides(&est.shape, theta_stat)
}

/// Counted extreme points within `radius` (ℓ¹) of any of `predicted`.
pub fn near_predicted(est: &ShapeEstimate, theta_stat: f64, predicted: &[Point], radius: f64) -> usize {
    convex::extreme_points(&est.shape, theta_stat)
        .iter()
        .filter(|&&e| predicted.iter().any(|&p| convex::l1_dist(e, p) < radius))
        .count()
}

/// Whether the counted extreme points are `eps`-dense in the boundary.
pub fn eps_density(est: &ShapeEstimate, eps: f64, theta_stat: f64) -> bool {
    let ext = convex::extreme_points(&est.shape, theta_stat);
    convex::eps_dense(&est.shape, &ext, eps)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuityReport {
    pub hausdorff: Vec<Vec<f64>>,
    pub levy: Vec<Vec<f64>>,
    /// Kendall-style agreement between the two matrices over pairs of
    /// off-diagonal entries: +1 fully concordant, −1 fully discordant.
    pub concordance: f64,
}

/// Pairwise shape distances next to pairwise distribution distances.
pub fn continuity_probe(dists: &[WeightDistribution], plan: &DirectionPlan) -> Result<ContinuityReport> {
    if dists.len() < 2 {
        return Err(Error::OutOfRange("continuity probe needs at least 2 distributions".into()));
    }
    let shapes: Vec<ShapeEstimate> = dists.iter().map(|d| empirical_shape(d, plan)).collect::<Result<_>>()?;
    let k = dists.len();
    let mut hausdorff = vec![vec![0.0; k]; k];
    let mut levy = vec![vec![0.0; k]; k];
    let mut pairs = Vec::new();
    for i in 0..k {
        for j in i + 1..k {
            let h = convex::hausdorff(&shapes[i].shape, &shapes[j].shape);
            let l = levy_distance(&dists[i], &dists[j]);
            hausdorff[i][j] = h;
            hausdorff[j][i] = h;
            levy[i][j] = l;
            levy[j][i] = l;
            pairs.push((h, l));
        }
    }
    let (mut score, mut total) = (0.0, 0.0);
    for a in 0..pairs.len() {
        for b in a + 1..pairs.len() {
            let s = (pairs[a].0 - pairs[b].0).signum() * (pairs[a].1 - pairs[b].1).signum();
            score += s;
            total += 1.0;
        }
    }
    Ok(ContinuityReport { hausdorff, levy, concordance: if total > 0.0 { score / total } else { 0.0 } })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plan_validation() {
        assert!(DirectionPlan::uniform(2, 100, 5, 0).is_err());
        assert!(DirectionPlan::uniform(5, 8, 5, 0).is_err());
        let p = DirectionPlan::uniform(5, 100, 5, 0).unwrap();
        assert_eq!(p.targets()[0], Site::new(100, 0));
        assert_eq!(p.targets()[2], Site::new(71, 71));
        assert_eq!(p.targets()[4], Site::new(0, 100));
    }

    #[test]
    fn unit_weights_give_exact_constants() {
        let d = WeightDistribution::dirac(1.0).unwrap();
        let tc = time_constant(&d, (1.0, 0.0), 40, 2, 1).unwrap();
        assert_eq!((tc.m_hat, tc.stderr, tc.clipped), (1.0, 0.0, 0));
        let tc = time_constant(&d, (1.0, 1.0), 40, 2, 1).unwrap();
        assert_eq!(tc.m_hat, 2.0);
        let tc3 = time_constant(&WeightDistribution::dirac(3.0).unwrap(), (1.0, 1.0), 40, 2, 1).unwrap();
        assert_eq!(tc3.m_hat, 3.0 * tc.m_hat);
    }

    #[test]
    fn unit_weights_shape_is_the_l1_ball() {
        let d = WeightDistribution::dirac(1.0).unwrap();
        let est = empirical_shape(&d, &DirectionPlan::uniform(5, 30, 2, 9).unwrap()).unwrap();
        assert!(!est.any_clipped());
        assert!(convex::hausdorff(&est.shape, &ConvexShape::l1_ball(1.0)) < 1e-12);
        assert_eq!(sides_estimate(&est, 0.1), 4);
    }

    #[test]
    fn orbit_images() {
        let o = orbit(Site::new(2, 1));
        let mut v: Vec<(i32, i32)> = o.iter().map(|s| (s.x, s.y)).collect();
        v.sort_unstable();
        v.dedup();
        assert_eq!(v.len(), 8);
    }

    #[test]
    fn continuity_needs_two() {
        let d = WeightDistribution::dirac(1.0).unwrap();
        assert!(continuity_probe(&[d], &DirectionPlan::uniform(3, 16, 1, 0).unwrap()).is_err());
    }
}
