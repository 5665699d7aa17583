//! Oriented bond percolation on Z² from the origin.
//!
//! Sites are `(x, n)` with `x + n` even; each site has two open-with-prob-`p`
//! bonds to `(x - 1, n + 1)` and `(x + 1, n + 1)`. Bond states are keyed by
//! `(seed, n, j)`, so runs at different `p` with the same seed are coupled
//! monotonically: the cluster at `p` is contained in the cluster at `p' > p`.

use std::f64::consts::FRAC_1_SQRT_2;
use std::io::{self, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{keyed_hash, trial_seed};

/// Literature value of the critical parameter for oriented bond percolation
/// on Z², used to validate schedules before any estimate is available.
pub const REFERENCE_PC: f64 = 0.6447;

/// Survival exponent δ of directed percolation in 1+1 dimensions.
pub const SURVIVAL_EXPONENT: f64 = 0.1595;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrientedRun {
    pub p: f64,
    pub levels: usize,
    /// Rightmost occupied `x` at each level reached, starting with `r_0 = 0`.
    pub rightmost: Vec<i64>,
    pub survived: bool,
}

impl OrientedRun {
    /// Last level with an occupied site.
    pub fn depth(&self) -> usize {
        self.rightmost.len() - 1
    }

    pub fn alive_at(&self, n: usize) -> bool {
        n < self.rightmost.len()
    }
}

fn threshold(p: f64) -> u64 {
    (p.clamp(0.0, 1.0) * 4_294_967_296.0) as u64
}

/// Runs the cluster of the origin for `t` levels.
pub fn oriented_cluster(p: f64, t: usize, seed: u64) -> OrientedRun {
    let thr = threshold(p);
    // Index j = (x + n) / 2 runs over 0..=n at level n.
    let mut cur = vec![false; t + 2];
    let mut next = vec![false; t + 2];
    cur[0] = true;
    let (mut lo, mut hi) = (0usize, 0usize);
    let mut rightmost = Vec::with_capacity(t + 1);
    rightmost.push(0i64);
    for n in 0..t {
        next[lo..=hi + 1].fill(false);
        for j in lo..=hi {
            if cur[j] {
                let h = keyed_hash(seed, &[n as u64, j as u64]);
                if (h & 0xffff_ffff) < thr {
                    next[j] = true;
                }
                if (h >> 32) < thr {
                    next[j + 1] = true;
                }
            }
        }
        let Some(new_lo) = (lo..=hi + 1).find(|&j| next[j]) else {
            return OrientedRun { p, levels: t, rightmost, survived: false };
        };
        let new_hi = (lo..=hi + 1).rev().find(|&j| next[j]).unwrap();
        std::mem::swap(&mut cur, &mut next);
        lo = new_lo;
        hi = new_hi;
        let level = n as i64 + 1;
        rightmost.push(2 * hi as i64 - level);
    }
    OrientedRun { p, levels: t, rightmost, survived: true }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaEstimate {
    pub p: f64,
    pub levels: usize,
    pub trials: usize,
    pub seed: u64,
    pub survivors: usize,
    pub alpha: f64,
    pub stderr: f64,
}

impl AlphaEstimate {
    pub fn survival_rate(&self) -> f64 {
        self.survivors as f64 / self.trials as f64
    }
}

/// Mean and standard error of a sample (zero error for fewer than two values).
pub(crate) fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Edge speed `r_T / T` averaged over surviving runs.
pub fn estimate_alpha(p: f64, t: usize, trials: usize, seed: u64) -> Result<AlphaEstimate> {
    if !(p > 0.0 && p <= 1.0) || t == 0 || trials == 0 {
        return Err(Error::OutOfRange(format!("need p in (0, 1], T >= 1, trials >= 1; got p={p}, T={t}, trials={trials}")));
    }
    let runs: Vec<Option<f64>> = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let run = oriented_cluster(p, t, trial_seed(seed, i));
            run.survived.then(|| run.rightmost[t] as f64 / t as f64)
        })
        .collect();
    let speeds: Vec<f64> = runs.into_iter().flatten().collect();
    if speeds.is_empty() {
        return Err(Error::AllRunsDied(trials));
    }
    let (mean, stderr) = mean_stderr(&speeds);
    Ok(AlphaEstimate { p, levels: t, trials, seed, survivors: speeds.len(), alpha: mean.clamp(0.0, 1.0), stderr })
}

/// Converts the speed measured in the diagonal frame to the lattice-axis
/// frame, normalized so that `p = 1` gives the full flat edge.
pub fn alpha_rotated(alpha_durrett: f64) -> f64 {
    alpha_durrett * FRAC_1_SQRT_2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurvivalRow {
    pub p: f64,
    pub survival_t: f64,
    pub survival_2t: f64,
    /// `P(alive at 2T) / P(alive at T)`, zero when nothing survives to `T`.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcEstimate {
    pub levels: usize,
    pub trials: usize,
    pub rows: Vec<SurvivalRow>,
    /// Where survival to `T` crosses one half.
    pub half_crossing_t: Option<f64>,
    /// Where survival to `2T` crosses one half.
    pub half_crossing_2t: Option<f64>,
    /// Where the two-horizon ratio crosses its critical power-law value.
    pub scaling_crossing: f64,
    pub pc: f64,
}

/// Pool-adjacent-violators fit making `ys` nondecreasing.
fn isotonic(ys: &[f64]) -> Vec<f64> {
    let mut blocks: Vec<(f64, usize)> = Vec::new();
    for &y in ys {
        blocks.push((y, 1));
        while blocks.len() >= 2 {
            let (b, nb) = blocks[blocks.len() - 1];
            let (a, na) = blocks[blocks.len() - 2];
            if a <= b {
                break;
            }
            blocks.pop();
            let n = na + nb;
            *blocks.last_mut().unwrap() = ((a * na as f64 + b * nb as f64) / n as f64, n);
        }
    }
    blocks.into_iter().flat_map(|(v, n)| std::iter::repeat_n(v, n)).collect()
}

/// First upward crossing of `level` by the monotone fit of `ys` over `xs`,
/// interpolated linearly.
fn crossing(xs: &[f64], ys: &[f64], level: f64) -> Option<f64> {
    let fit = isotonic(ys);
    if fit[0] >= level || *fit.last()? < level {
        return None;
    }
    let k = fit.iter().position(|&y| y >= level)?;
    let (x0, x1, y0, y1) = (xs[k - 1], xs[k], fit[k - 1], fit[k]);
    Some(x0 + (level - y0) / (y1 - y0) * (x1 - x0))
}

/// Survival curve at horizons `T` and `2T` over a grid of `p`.
///
/// At criticality survival decays as a power law, so `P(2T)/P(T)` tends to
/// `2^-δ`; it tends to 1 above and to 0 below. The crossing of that ratio is
/// the estimate. Half-survival crossings at both horizons are reported too.
pub fn estimate_pc(p_grid: &[f64], t: usize, trials: usize, seed: u64) -> Result<PcEstimate> {
    if p_grid.len() < 2 || p_grid.iter().any(|p| !(*p > 0.0 && *p < 1.0)) || p_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::OutOfRange("p grid must be increasing, inside (0, 1), with at least 2 points".into()));
    }
    if t == 0 || trials == 0 {
        return Err(Error::OutOfRange("T and trials must be positive".into()));
    }
    let rows: Vec<SurvivalRow> = p_grid
        .iter()
        .map(|&p| {
            let depths: Vec<usize> = (0..trials as u64)
                .into_par_iter()
                .map(|i| oriented_cluster(p, 2 * t, trial_seed(seed, i)).depth())
                .collect();
            let alive = |h: usize| depths.iter().filter(|&&d| d >= h).count() as f64;
            let (at, a2t) = (alive(t), alive(2 * t));
            SurvivalRow {
                p,
                survival_t: at / trials as f64,
                survival_2t: a2t / trials as f64,
                ratio: if at > 0.0 { a2t / at } else { 0.0 },
            }
        })
        .collect();
    let ps: Vec<f64> = rows.iter().map(|r| r.p).collect();
    let ratio: Vec<f64> = rows.iter().map(|r| r.ratio).collect();
    let level = 2f64.powf(-SURVIVAL_EXPONENT);
    let fit = isotonic(&ratio);
    if fit[0] >= level {
        return Err(Error::NotBracketed(format!("survival ratio {:.3} already above {level:.3} at p = {}", fit[0], ps[0])));
    }
    if *fit.last().unwrap() < level {
        return Err(Error::NotBracketed(format!(
            "survival ratio {:.3} still below {level:.3} at p = {}",
            fit.last().unwrap(),
            ps.last().unwrap()
        )));
    }
    let scaling_crossing = crossing(&ps, &ratio, level).unwrap();
    let st: Vec<f64> = rows.iter().map(|r| r.survival_t).collect();
    let s2t: Vec<f64> = rows.iter().map(|r| r.survival_2t).collect();
    Ok(PcEstimate {
        levels: t,
        trials,
        half_crossing_t: crossing(&ps, &st, 0.5),
        half_crossing_2t: crossing(&ps, &s2t, 0.5),
        rows,
        scaling_crossing,
        pc: scaling_crossing,
    })
}

/// Cache of speed estimates keyed by `(p, T)`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AlphaTable {
    pub entries: Vec<AlphaEstimate>,
}

impl AlphaTable {
    pub fn get(&self, p: f64, t: usize) -> Option<&AlphaEstimate> {
        self.entries.iter().find(|e| e.p == p && e.levels == t)
    }

    pub fn get_or_estimate(&mut self, p: f64, t: usize, trials: usize, seed: u64) -> Result<AlphaEstimate> {
        if let Some(e) = self.get(p, t) {
            return Ok(e.clone());
        }
        let e = estimate_alpha(p, t, trials, seed)?;
        self.entries.push(e.clone());
        self.entries.sort_by(|a, b| a.p.total_cmp(&b.p).then(a.levels.cmp(&b.levels)));
        Ok(e)
    }

    pub fn load(path: &Path) -> io::Result<AlphaTable> {
        match std::fs::read(path) {
            Ok(bytes) => serde_json::from_slice(&bytes).map_err(io::Error::other),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(AlphaTable::default()),
            Err(e) => Err(e),
        }
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "p,T,trials,survival_rate,alpha_durrett,stderr")?;
        for e in &self.entries {
            writeln!(out, "{},{},{},{},{},{}", e.p, e.levels, e.trials, e.survival_rate(), e.alpha, e.stderr)?;
        }
        Ok(())
    }
}
