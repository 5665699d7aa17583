//! One function per experiment kind. Each returns its files as bytes; the
//! runner decides where they go.

use std::fmt::Write as _;

use fpplab_core::convex::{self, ConvexShape, Point};
use fpplab_core::geograph::{
    busemann_separation, disjointness_diagnostic, ends_sweep, infection_graph, k_lower_bound, BusemannSpec,
    DiagnosticTarget,
};
use fpplab_core::growth::{compete, place_seeds, CompetitionConfig, TieRule};
use fpplab_core::lattice::{EdgeField, Site, Window};
use fpplab_core::measure::{construct_sequence, levy_distance, ConstructionSchedule, WeightDistribution};
use fpplab_core::oriented::{alpha_rotated, estimate_alpha, estimate_pc, AlphaEstimate};
use fpplab_core::rng::trial_seed;
use fpplab_core::shapeest::{empirical_shape, near_predicted, DirectionPlan};
use fpplab_core::Error as CoreError;
use rayon::prelude::*;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::config::{ExperimentConfig, Kind};
use crate::error::{Context, ExpError};
use crate::svg;

/// Files produced by one experiment, in write order.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub payloads: Vec<(String, Vec<u8>)>,
    pub figures: Vec<(String, Vec<u8>)>,
    /// Name of the payload holding the main table.
    pub table: String,
    pub summary: Value,
}

impl Outcome {
    fn new(table: &str, summary: Value) -> Outcome {
        Outcome { payloads: Vec::new(), figures: Vec::new(), table: table.into(), summary }
    }

    fn csv(&mut self, name: &str, text: String) {
        self.payloads.push((name.into(), text.into_bytes()));
    }

    fn json<T: serde::Serialize>(&mut self, name: &str, v: &T) {
        let mut bytes = serde_json::to_vec_pretty(v).expect("payload serializes");
        bytes.push(b'\n');
        self.payloads.push((name.into(), bytes));
    }

    fn svg(&mut self, name: &str, text: String) {
        self.figures.push((name.into(), text.into_bytes()));
    }

    pub fn table_bytes(&self) -> Option<&[u8]> {
        self.payloads.iter().find(|(n, _)| *n == self.table).map(|(_, b)| b.as_slice())
    }
}

/// Seed for auxiliary computations that sit beside the trial sequence.
fn aux_seed(master: u64, tag: u64) -> u64 {
    trial_seed(master, u64::MAX - tag)
}

fn median(xs: &mut [f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

fn window(half_width: i32) -> Result<Window, ExpError> {
    Window::centered(half_width).context("window")
}

/// Checks the parameter block against the kind's schema without running.
pub fn check_params(cfg: &ExperimentConfig) -> Result<(), ExpError> {
    match cfg.kind {
        Kind::Shape => cfg.params::<ShapeParams>().map(drop),
        Kind::Construct => cfg.params::<ConstructParams>().map(drop),
        Kind::Oriented => cfg.params::<OrientedParams>().map(drop),
        Kind::Compete => cfg.params::<CompeteParams>().map(drop),
        Kind::Ends => cfg.params::<EndsParams>().map(drop),
        Kind::Busemann => cfg.params::<BusemannParams>().map(drop),
        Kind::Diagnose => cfg.params::<DiagnoseParams>().map(drop),
    }
}

pub fn run_kind(cfg: &ExperimentConfig) -> Result<Outcome, ExpError> {
    match cfg.kind {
        Kind::Shape => shape(cfg),
        Kind::Construct => construct(cfg),
        Kind::Oriented => oriented(cfg),
        Kind::Compete => competition(cfg),
        Kind::Ends => ends(cfg),
        Kind::Busemann => busemann(cfg),
        Kind::Diagnose => diagnose(cfg),
    }
}

fn d17() -> usize {
    17
}
fn n200() -> usize {
    200
}
fn t2000() -> usize {
    2000
}
fn tr200() -> usize {
    200
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AlphaParams {
    /// Defaults to the mass of the atom at 1.
    #[serde(default)]
    p: Option<f64>,
    #[serde(default = "t2000")]
    levels: usize,
    #[serde(default = "tr200")]
    trials: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ShapeParams {
    dist: WeightDistribution,
    #[serde(default = "d17")]
    directions: usize,
    #[serde(default)]
    angles: Option<Vec<f64>>,
    #[serde(default = "n200")]
    n: usize,
    #[serde(default)]
    theta_stat: Option<f64>,
    #[serde(default)]
    flat_edge: Option<AlphaParams>,
}

fn shape(cfg: &ExperimentConfig) -> Result<Outcome, ExpError> {
    let p: ShapeParams = cfg.params()?;
    let plan = match p.angles {
        Some(angles) => {
            let plan = DirectionPlan { angles, n: p.n, trials: cfg.trials, seed: cfg.master_seed };
            plan.validate().map_err(|e| ExpError::Config(e.to_string()))?;
            plan
        }
        None => DirectionPlan::uniform(p.directions, p.n, cfg.trials, cfg.master_seed)
            .map_err(|e| ExpError::Config(e.to_string()))?,
    };
    let est = empirical_shape(&p.dist, &plan).context("empirical shape")?;
    let theta = p.theta_stat.unwrap_or_else(|| est.calibrated_theta());
    let sides = convex::sides(&est.shape, theta);

    let (mut flat, flat_error) = match est.flat_edge() {
        Ok(r) => (Some(r), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let mut alpha: Option<AlphaEstimate> = None;
    let mut predicted = None;
    let mut near = None;
    if let Some(a) = p.flat_edge {
        let pp = a
            .p
            .or_else(|| p.dist.flat_edge_mass())
            .ok_or_else(|| ExpError::Config("flat_edge.p missing and the distribution has no atom at 1".into()))?;
        let e = estimate_alpha(pp, a.levels, a.trials, aux_seed(cfg.master_seed, 1)).context("edge speed")?;
        let pred = convex::predicted_flat_edge(alpha_rotated(e.alpha)).context("flat edge prediction")?;
        let images: Vec<Point> = ConvexShape::symmetrize_points(&[pred.0]);
        near = Some(near_predicted(&est, theta, &images, 0.05));
        flat = flat.map(|r| r.with_prediction(pred));
        predicted = Some(pred);
        alpha = Some(e);
    }

    let mut out = Outcome::new(
        "directions.csv",
        json!({
            "sides": sides,
            "theta_stat": theta,
            "k_lower_bound": k_lower_bound(sides as u64).ok(),
            "max_rel_stderr": est.max_rel_stderr(),
            "hausdorff_to_l1_ball": convex::hausdorff(&est.shape, &ConvexShape::l1_ball(1.0)),
            "max_l1_norm": est.shape.max_l1_norm(),
            "any_clipped": est.any_clipped(),
            "flat_edge_tolerance": est.flat_edge_tolerance(),
            "flat_edge": flat,
            "flat_edge_error": flat_error,
            "alpha": alpha,
            "extreme_points_near_prediction": near,
        }),
    );
    let mut csv = Vec::new();
    est.write_csv(&mut csv).expect("in-memory write");
    out.csv("directions.csv", String::from_utf8(csv).expect("ascii"));
    out.json("shape.json", &est.shape);
    out.svg("shape.svg", svg::shape_overlay(&est.shape, predicted));
    Ok(out)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SpeedParams {
    #[serde(default = "t2000")]
    levels: usize,
    #[serde(default)]
    trials: Option<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConstructParams {
    base: WeightDistribution,
    schedule: ConstructionSchedule,
    #[serde(default)]
    alpha: Option<SpeedParams>,
}

fn construct(cfg: &ExperimentConfig) -> Result<Outcome, ExpError> {
    let p: ConstructParams = cfg.params()?;
    let seq = construct_sequence(&p.base, &p.schedule).context("construction")?;
    let levels = p.schedule.levels();
    // Common seeds across levels couple the runs monotonically in p.
    let seed = aux_seed(cfg.master_seed, 2);
    let speeds: Option<Vec<AlphaEstimate>> = match &p.alpha {
        Some(a) => Some(
            levels
                .iter()
                .map(|&pn| estimate_alpha(pn, a.levels, a.trials.unwrap_or(cfg.trials), seed))
                .collect::<Result<_, _>>()
                .context("edge speed")?,
        ),
        None => None,
    };
    let mut csv = String::from("stage,p,y,alpha_durrett,stderr,w_x,w_y,levy_to_previous\n");
    let mut segments = Vec::new();
    for (n, mu) in seq.iter().enumerate() {
        let y = if n == 0 { String::new() } else { p.schedule.y_seq[n - 1].to_string() };
        let levy = if n == 0 { String::new() } else { levy_distance(&seq[n - 1], mu).to_string() };
        let (a, se, wx, wy) = match &speeds {
            Some(s) => {
                let (w, _) = convex::predicted_flat_edge(alpha_rotated(s[n].alpha)).context("flat edge prediction")?;
                segments.push(w);
                (s[n].alpha.to_string(), s[n].stderr.to_string(), w.0.to_string(), w.1.to_string())
            }
            None => Default::default(),
        };
        let _ = writeln!(csv, "{n},{},{y},{a},{se},{wx},{wy},{levy}", levels[n]);
    }
    let nested = speeds.as_ref().map(|s| {
        s.windows(2).zip(segments.windows(2)).all(|(a, w)| {
            let gap = a[0].alpha - a[1].alpha;
            gap > 3.0 * (a[0].stderr.powi(2) + a[1].stderr.powi(2)).sqrt() && w[1].0 < w[0].0
        })
    });
    let mut out = Outcome::new(
        "stages.csv",
        json!({ "stages": seq.len() - 1, "levels": levels, "nested": nested, "alpha": speeds }),
    );
    out.csv("stages.csv", csv);
    for (n, mu) in seq.iter().enumerate() {
        out.json(&format!("mu_{n}.json"), mu);
    }
    Ok(out)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PcParams {
    grid: Vec<f64>,
    #[serde(default)]
    levels: Option<usize>,
    #[serde(default)]
    trials: Option<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct OrientedParams {
    p: Vec<f64>,
    #[serde(default = "t2000")]
    levels: usize,
    #[serde(default)]
    pc: Option<PcParams>,
}

fn oriented(cfg: &ExperimentConfig) -> Result<Outcome, ExpError> {
    let p: OrientedParams = cfg.params()?;
    if p.p.is_empty() {
        return Err(ExpError::Config("oriented params need at least one p".into()));
    }
    let mut csv = String::from("p,T,trials,survival_rate,alpha_durrett,stderr\n");
    let mut estimates = Vec::new();
    for &pp in &p.p {
        match estimate_alpha(pp, p.levels, cfg.trials, cfg.master_seed) {
            Ok(e) => {
                let _ = writeln!(csv, "{},{},{},{},{},{}", pp, p.levels, cfg.trials, e.survival_rate(), e.alpha, e.stderr);
                estimates.push(Some(e));
            }
            Err(CoreError::AllRunsDied(_)) => {
                let _ = writeln!(csv, "{},{},{},0,,", pp, p.levels, cfg.trials);
                estimates.push(None);
            }
            Err(e) => return Err(ExpError::Module { context: format!("edge speed at p={pp}"), source: e }),
        }
    }
    let pairs: Vec<(&AlphaEstimate, &AlphaEstimate)> = estimates
        .windows(2)
        .filter_map(|w| match (&w[0], &w[1]) {
            (Some(a), Some(b)) if a.p < b.p => Some((a, b)),
            _ => None,
        })
        .collect();
    let monotone = pairs
        .iter()
        .all(|(a, b)| b.alpha - a.alpha > 3.0 * (a.stderr.powi(2) + b.stderr.powi(2)).sqrt());
    let pc = match &p.pc {
        Some(pc) => Some(
            estimate_pc(&pc.grid, pc.levels.unwrap_or(p.levels), pc.trials.unwrap_or(cfg.trials), aux_seed(cfg.master_seed, 3))
                .context("critical point")?,
        ),
        None => None,
    };
    let mut out = Outcome::new(
        "alpha.csv",
        json!({
            "alpha": estimates,
            "alpha_rotated": estimates.iter().map(|e| e.as_ref().map(|e| alpha_rotated(e.alpha))).collect::<Vec<_>>(),
            "strictly_increasing_beyond_3se": monotone,
            "pc": pc.as_ref().map(|x| x.pc),
        }),
    );
    out.csv("alpha.csv", csv);
    if let Some(pc) = pc {
        out.json("pc.json", &pc);
    }
    Ok(out)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Placement {
    /// Defaults to the regular octagon with a vertex on the x-axis.
    #[serde(default)]
    shape: Option<ConvexShape>,
    dirs: Vec<Point>,
    radii: Vec<f64>,
}

fn s200() -> usize {
    200
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CompeteParams {
    dist: WeightDistribution,
    #[serde(default)]
    seeds: Option<Vec<Site>>,
    #[serde(default)]
    placement: Option<Placement>,
    half_width: i32,
    #[serde(default)]
    tie_policy: TieRule,
    #[serde(default = "s200")]
    survival_threshold: usize,
}

fn competition(cfg: &ExperimentConfig) -> Result<Outcome, ExpError> {
    let p: CompeteParams = cfg.params()?;
    let seeds = match (p.seeds, p.placement) {
        (Some(s), None) => s,
        (None, Some(pl)) => {
            let shape = match pl.shape {
                Some(s) => s,
                None => ConvexShape::regular(8, 1.0, 0.0).context("octagon")?,
            };
            place_seeds(&shape, &pl.dirs, &pl.radii).context("seed placement")?
        }
        _ => return Err(ExpError::Config("give exactly one of `seeds` and `placement`".into())),
    };
    let base = CompetitionConfig { dist: p.dist, seeds, window: window(p.half_width)?, tie_policy: p.tie_policy, seed: 0 };
    base.validate().context("competition")?;
    if p.survival_threshold == 0 {
        return Err(ExpError::Config("survival_threshold must be positive".into()));
    }
    let k = base.seeds.len();
    let per_trial: Vec<(Vec<usize>, Vec<bool>, usize)> = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|i| {
            let occ = compete(&CompetitionConfig { seed: trial_seed(cfg.master_seed, i), ..base.clone() })?;
            Ok((occ.colony_sizes(), occ.touches_boundary(), occ.tie_set().len()))
        })
        .collect::<Result<_, CoreError>>()
        .context("competition")?;
    let mut csv = String::from("trial,species,size,touches_boundary,survived\n");
    let mut counts = vec![0usize; k];
    let mut all = 0;
    for (t, (sizes, touch, _)) in per_trial.iter().enumerate() {
        let mut every = true;
        for i in 0..k {
            let survived = touch[i] && sizes[i] >= p.survival_threshold;
            counts[i] += survived as usize;
            every &= survived;
            let _ = writeln!(csv, "{t},{i},{},{},{survived}", sizes[i], touch[i]);
        }
        all += every as usize;
    }
    let ties: Vec<usize> = per_trial.iter().map(|x| x.2).collect();
    let first = compete(&CompetitionConfig { seed: trial_seed(cfg.master_seed, 0), ..base.clone() }).context("competition")?;
    let mut occ_csv = Vec::new();
    first.write_csv(&mut occ_csv).expect("in-memory write");
    let mut out = Outcome::new(
        "survival.csv",
        json!({
            "trials": cfg.trials,
            "seeds": base.seeds,
            "threshold": p.survival_threshold,
            "fraction": all as f64 / cfg.trials as f64,
            "survival_counts": counts,
            "tie_sites_per_trial": ties,
        }),
    );
    out.csv("survival.csv", csv);
    out.csv("occupancy.csv", String::from_utf8(occ_csv).expect("ascii"));
    out.svg("species.svg", svg::species_raster(&first));
    Ok(out)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EndsParams {
    dist: WeightDistribution,
    half_width: i32,
    #[serde(default)]
    radii: Option<Vec<f64>>,
    #[serde(default)]
    export_edges: bool,
}

fn ends(cfg: &ExperimentConfig) -> Result<Outcome, ExpError> {
    let p: EndsParams = cfg.params()?;
    let w = window(p.half_width)?;
    let radii = p
        .radii
        .unwrap_or_else(|| (1..).map(|k| 10.0 * k as f64).take_while(|m| *m < p.half_width as f64 / 2.0).collect());
    if radii.is_empty() || radii.iter().any(|m| !(*m >= 0.0 && *m < p.half_width as f64 / 2.0)) {
        return Err(ExpError::Config("removal radii must lie in [0, half_width / 2)".into()));
    }
    let rows: Vec<(usize, f64, usize, usize, bool)> = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|i| {
            let g = infection_graph(&EdgeField::new(trial_seed(cfg.master_seed, i), p.dist.clone()), w)?;
            let (e, m) = ends_sweep(&g, &radii);
            Ok((e, m, g.edges.len(), g.reached, g.is_tree()))
        })
        .collect::<Result<_, CoreError>>()
        .context("infection graph")?;
    let mut csv = String::from("trial,ends,m,edges,reached,tree\n");
    for (t, r) in rows.iter().enumerate() {
        let _ = writeln!(csv, "{t},{},{},{},{},{}", r.0, r.1, r.2, r.3, r.4);
    }
    let mut counts: Vec<f64> = rows.iter().map(|r| r.0 as f64).collect();
    let at_least_4 = rows.iter().filter(|r| r.0 >= 4).count();
    let mut out = Outcome::new(
        "ends.csv",
        json!({
            "trials": cfg.trials,
            "radii": radii,
            "fraction_at_least_4": at_least_4 as f64 / cfg.trials as f64,
            "median_ends": median(&mut counts),
            "all_trees": rows.iter().all(|r| r.4),
        }),
    );
    out.csv("ends.csv", csv);
    if p.export_edges {
        let g = infection_graph(&EdgeField::new(trial_seed(cfg.master_seed, 0), p.dist.clone()), w).context("infection graph")?;
        let mut buf = Vec::new();
        g.write_csv(&mut buf).expect("in-memory write");
        out.csv("infection_edges.csv", String::from_utf8(buf).expect("ascii"));
    }
    Ok(out)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BusemannParams {
    dist: WeightDistribution,
    half_width: i32,
    lines: Vec<BusemannSpec>,
    seeds: Vec<Site>,
    #[serde(default)]
    ns: Option<Vec<i32>>,
}

fn busemann(cfg: &ExperimentConfig) -> Result<Outcome, ExpError> {
    let p: BusemannParams = cfg.params()?;
    let w = window(p.half_width)?;
    if p.lines.len() != p.seeds.len() || p.seeds.is_empty() {
        return Err(ExpError::Config("need one line per seed".into()));
    }
    let ns: Vec<Option<i32>> = match &p.ns {
        Some(v) if !v.is_empty() => v.iter().map(|&n| Some(n)).collect(),
        Some(_) => return Err(ExpError::Config("ns must not be empty".into())),
        None => vec![None],
    };
    let reports: Vec<Vec<_>> = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|i| {
            let field = EdgeField::new(trial_seed(cfg.master_seed, i), p.dist.clone());
            ns.iter()
                .map(|n| {
                    let specs: Vec<BusemannSpec> =
                        p.lines.iter().map(|s| BusemannSpec { n: n.unwrap_or(s.n), ..*s }).collect();
                    busemann_separation(&field, &specs, &p.seeds, w)
                })
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<_, CoreError>>()
        .context("busemann separation")?;
    let mut csv = String::from("trial,n,i,j,busemann,projection\n");
    let k = p.seeds.len();
    let mut positive = 0;
    for (t, per_n) in reports.iter().enumerate() {
        for (r, n) in per_n.iter().zip(&ns) {
            positive += r.all_positive as usize;
            for i in 0..k {
                for j in 0..k {
                    let nn = n.unwrap_or(p.lines[i].n);
                    let _ = writeln!(csv, "{t},{nn},{i},{j},{},{}", r.busemann[i][j], r.projection[i][j]);
                }
            }
        }
    }
    let alpha = reports.first().and_then(|r| r.first()).map(|r| r.alpha);
    let mut out = Outcome::new(
        "separation.csv",
        json!({
            "trials": cfg.trials,
            "offsets": ns.len(),
            "fraction_all_positive": positive as f64 / (cfg.trials * ns.len()) as f64,
            "alpha": alpha,
        }),
    );
    out.csv("separation.csv", csv);
    Ok(out)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DiagnoseParams {
    dist: WeightDistribution,
    half_width: i32,
    m: f64,
    #[serde(rename = "M")]
    big_m: f64,
    targets: Vec<DiagnosticTarget>,
    /// Gauge for `m·B` and `M·B`; the ℓ¹ unit ball when absent.
    #[serde(default)]
    shape: Option<ConvexShape>,
}

fn diagnose(cfg: &ExperimentConfig) -> Result<Outcome, ExpError> {
    let p: DiagnoseParams = cfg.params()?;
    let w = window(p.half_width)?;
    if p.targets.is_empty() {
        return Err(ExpError::Config("no targets".into()));
    }
    let shape = p.shape.clone().unwrap_or_else(|| ConvexShape::l1_ball(1.0));
    let reports: Vec<Result<_, CoreError>> = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|i| {
            let field = EdgeField::new(trial_seed(cfg.master_seed, i), p.dist.clone());
            disjointness_diagnostic(&field, &shape, &p.targets, p.m, p.big_m, w)
        })
        .collect();
    let mut geo = String::from("trial,target,n_q,rho_hat,length\n");
    let mut ev = String::from("trial,status,alpha,a,b,c,d,e,disjoint\n");
    let (mut ok, mut e_hits) = (0usize, 0usize);
    let mut rhos = Vec::new();
    let mut evs = [0usize; 4];
    for (t, r) in reports.iter().enumerate() {
        match r {
            Ok(r) => {
                ok += 1;
                e_hits += r.event_e as usize;
                for (i, ((q, rho), len)) in r.n_q.iter().zip(&r.rho_hat).zip(&r.geodesic_lengths).enumerate() {
                    let _ = writeln!(geo, "{t},{i},{q},{rho},{len}");
                    rhos.push(*rho);
                }
                for (c, b) in evs.iter_mut().zip([r.event_a, r.event_b, r.event_c, r.event_d]) {
                    *c += b as usize;
                }
                let disjoint = r.disjoint.iter().flatten().all(|&b| b);
                let _ = writeln!(
                    ev,
                    "{t},ok,{},{},{},{},{},{},{disjoint}",
                    r.alpha, r.event_a, r.event_b, r.event_c, r.event_d, r.event_e
                );
            }
            Err(CoreError::GeodesicClipped(i)) => {
                let _ = writeln!(ev, "{t},clipped target {i},,,,,,,");
            }
            Err(e) => return Err(ExpError::Module { context: format!("diagnostic trial {t}"), source: e.clone() }),
        }
    }
    let frac = |c: usize| if ok > 0 { c as f64 / ok as f64 } else { f64::NAN };
    let mut out = Outcome::new(
        "geodesics.csv",
        json!({
            "trials": cfg.trials,
            "completed": ok,
            "fraction_event_e": frac(e_hits),
            "fraction_event_a": frac(evs[0]),
            "fraction_event_b": frac(evs[1]),
            "fraction_event_c": frac(evs[2]),
            "fraction_event_d": frac(evs[3]),
            "median_rho_hat": median(&mut rhos),
        }),
    );
    out.csv("geodesics.csv", geo);
    out.csv("events.csv", ev);
    Ok(out)
}
