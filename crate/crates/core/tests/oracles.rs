//! Independent reference computations checked against the solvers.

use fpplab_core::geograph::{busemann, BusemannField, BusemannSpec};
use fpplab_core::lattice::{solve, solve_from, Dir, EdgeField, EdgeWeights, Site, Stop, Window};
use fpplab_core::measure::{levy_distance, Atom, Piece, WeightDistribution};
use fpplab_core::rng::{keyed_hash, unit_f64};

const DIRS: [Dir; 4] = [Dir::East, Dir::North, Dir::West, Dir::South];

/// Minimum weight over every self-avoiding path from `src`, by DFS.
fn enumerate_paths<W: EdgeWeights>(w: &W, window: Window, src: Site) -> Vec<f64> {
    fn go<W: EdgeWeights>(w: &W, win: Window, s: Site, acc: f64, seen: &mut [bool], best: &mut [f64]) {
        let i = win.index(s);
        if acc < best[i] {
            best[i] = acc;
        }
        for d in DIRS {
            let nb = s.step(d);
            if win.contains(nb) && !seen[win.index(nb)] {
                seen[win.index(nb)] = true;
                go(w, win, nb, acc + w.weight(s, d), seen, best);
                seen[win.index(nb)] = false;
            }
        }
    }
    let mut seen = vec![false; window.len()];
    let mut best = vec![f64::INFINITY; window.len()];
    seen[window.index(src)] = true;
    go(w, window, src, 0.0, &mut seen, &mut best);
    best
}

/// All-pairs distances inside the window.
fn floyd_warshall<W: EdgeWeights>(w: &W, window: Window) -> Vec<Vec<f64>> {
    let n = window.len();
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for s in window.sites() {
        let i = window.index(s);
        d[i][i] = 0.0;
        for dir in DIRS {
            let nb = s.step(dir);
            if window.contains(nb) {
                let j = window.index(nb);
                d[i][j] = d[i][j].min(w.weight(s, dir));
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d
}

fn mixtures() -> Vec<WeightDistribution> {
    vec![
        WeightDistribution::uniform(1.0, 2.0).unwrap(),
        WeightDistribution::atomic(&[(1.0, 0.5), (3.0, 0.5)]).unwrap(),
        WeightDistribution::new(vec![Atom { loc: 0.0, mass: 0.3 }], vec![Piece { lo: 0.5, hi: 4.0, mass: 0.7 }]).unwrap(),
        WeightDistribution::atomic(&[(1.0, 0.8), (2.0, 0.2)]).unwrap(),
    ]
}

#[test]
fn solve_matches_path_enumeration_on_4x4() {
    let window = Window::rect(Site::new(0, 0), Site::new(3, 3)).unwrap();
    let dists = mixtures();
    for trial in 0..120u64 {
        let field = EdgeField::new(trial, dists[trial as usize % dists.len()].clone());
        let h = keyed_hash(trial, &[7]);
        let src = Site::new((h % 4) as i32, ((h >> 8) % 4) as i32);
        let map = solve(&field, src, window).unwrap();
        let oracle = enumerate_paths(&field, window, src);
        for s in window.sites() {
            let got = map.time(s);
            let want = oracle[window.index(s)];
            assert!((got - want).abs() <= 1e-12, "trial {trial}, site {s:?}: {got} vs {want}");
            let path = map.geodesic_path(s).unwrap();
            assert!((path.passage_time(&field) - want).abs() <= 1e-12);
        }
    }
}

#[test]
fn multi_source_matches_floyd_warshall_on_5x5() {
    let window = Window::centered(2).unwrap();
    for trial in 0..40u64 {
        let field = EdgeField::new(100 + trial, mixtures()[trial as usize % 4].clone());
        let fw = floyd_warshall(&field, window);
        let sources: Vec<Site> =
            (0..3).map(|k| window.site((keyed_hash(trial, &[k]) % window.len() as u64) as usize)).collect();
        let map = solve_from(&field, &sources, window, Stop::Exhaust).unwrap();
        for s in window.sites() {
            let want = sources.iter().map(|&z| fw[window.index(z)][window.index(s)]).fold(f64::INFINITY, f64::min);
            assert!((map.time(s) - want).abs() <= 1e-12);
        }
    }
}

#[test]
fn busemann_matches_brute_force_on_5x5() {
    let window = Window::centered(2).unwrap();
    let specs = [
        BusemannSpec { v: (1.0, 0.0), w: (0.0, 1.0), n: 2 },
        BusemannSpec { v: (0.0, -1.0), w: (1.0, 0.0), n: 1 },
        BusemannSpec { v: (1.0, 1.0), w: (1.0, -1.0), n: 1 },
    ];
    for trial in 0..40u64 {
        let field = EdgeField::new(500 + trial, mixtures()[trial as usize % 4].clone());
        let fw = floyd_warshall(&field, window);
        for spec in &specs {
            let line = spec.sites(window).unwrap();
            let dist = |x: Site| line.iter().map(|&z| fw[window.index(x)][window.index(z)]).fold(f64::INFINITY, f64::min);
            let bf = BusemannField::new(&field, *spec, window).unwrap();
            for x in window.sites() {
                for y in [Site::new(0, 0), Site::new(-2, 1), Site::new(1, -2)] {
                    let want = dist(x) - dist(y);
                    assert!((bf.value(x, y).unwrap() - want).abs() <= 1e-12, "field value, trial {trial}");
                    assert!((busemann(&field, spec, x, y, window).unwrap() - want).abs() <= 1e-12);
                }
            }
        }
    }
}

/// Lévy distance by grid search over ε, checking the defining inequalities
/// on a dense x-grid plus the breakpoints.
fn levy_grid(f: &WeightDistribution, g: &WeightDistribution, step: f64) -> f64 {
    let mut xs: Vec<f64> = (0..=2000).map(|i| -1.0 + i as f64 * 0.005).collect();
    for b in f.breakpoints().iter().chain(g.breakpoints()) {
        for d in [-1e-9, 0.0, 1e-9] {
            xs.push(b + d);
        }
    }
    let ok = |e: f64| {
        xs.iter().all(|&x| {
            let (fx, gx) = (f.cdf(x), g.cdf(x));
            f.cdf(x - e) - e <= gx + 1e-12
                && gx <= f.cdf(x + e) + e + 1e-12
                && g.cdf(x - e) - e <= fx + 1e-12
                && fx <= g.cdf(x + e) + e + 1e-12
        })
    };
    let mut e = 0.0;
    while !ok(e) {
        e += step;
    }
    e
}

#[test]
fn levy_distance_matches_grid_search() {
    let cases = [
        (WeightDistribution::dirac(1.0).unwrap(), WeightDistribution::dirac(1.3).unwrap()),
        (WeightDistribution::dirac(1.0).unwrap(), WeightDistribution::uniform(1.0, 2.0).unwrap()),
        (
            WeightDistribution::atomic(&[(1.0, 0.8), (3.0, 0.2)]).unwrap(),
            WeightDistribution::atomic(&[(1.0, 0.7), (2.5, 0.1), (3.0, 0.2)]).unwrap(),
        ),
        (mixtures()[2].clone(), mixtures()[0].clone()),
        (
            WeightDistribution::new(vec![Atom { loc: 1.0, mass: 0.6 }], vec![Piece { lo: 1.9, hi: 2.1, mass: 0.4 }]).unwrap(),
            WeightDistribution::atomic(&[(1.0, 0.6), (2.0, 0.4)]).unwrap(),
        ),
    ];
    for (f, g) in &cases {
        let exact = levy_distance(f, g);
        let grid = levy_grid(f, g, 1e-4);
        assert!((exact - grid).abs() <= 2e-4, "{exact} vs {grid}");
        assert!((levy_distance(g, f) - exact).abs() <= 1e-12);
    }
}

#[test]
fn sampled_weights_pass_ks() {
    for dist in mixtures() {
        let field = EdgeField::new(77, dist.clone());
        let mut xs: Vec<f64> = (0..1_000_000)
            .map(|k: i32| field.weight(Site::new(k % 1000, k / 1000), Dir::East))
            .collect();
        xs.sort_by(f64::total_cmp);
        let n = xs.len() as f64;
        let mut d: f64 = 0.0;
        let mut i = 0;
        while i < xs.len() {
            let x = xs[i];
            let mut j = i;
            while j < xs.len() && xs[j] == x {
                j += 1;
            }
            d = d.max((dist.cdf_left(x) - i as f64 / n).abs()).max((dist.cdf(x) - j as f64 / n).abs());
            i = j;
        }
        assert!(d <= 0.005, "KS distance {d}");
    }
}

#[test]
fn keyed_uniforms_are_spread_evenly() {
    let mut bins = [0usize; 10];
    for k in 0..100_000u64 {
        bins[(unit_f64(keyed_hash(3, &[k])) * 10.0) as usize] += 1;
    }
    for b in bins {
        assert!((b as f64 - 10_000.0).abs() < 500.0);
    }
}
