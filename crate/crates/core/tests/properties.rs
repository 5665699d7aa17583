use fpplab_core::convex::{extreme_points, hausdorff, hull, sides, ConvexShape, Point};
use fpplab_core::geograph::{BusemannField, BusemannSpec};
use fpplab_core::growth::{compete, independent_owners, lipschitz_violation, CompetitionConfig, TieRule};
use fpplab_core::lattice::{solve, EdgeField, Site, Window};
use fpplab_core::measure::WeightDistribution;
use fpplab_core::oriented::oriented_cluster;
use proptest::prelude::*;

fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

fn points() -> impl Strategy<Value = Vec<Point>> {
    prop::collection::vec((-10.0..10.0f64, -10.0..10.0f64), 3..40)
}

fn shape() -> impl Strategy<Value = ConvexShape> {
    points().prop_filter_map("degenerate", |p| hull(&p).ok())
}

fn dist() -> impl Strategy<Value = WeightDistribution> {
    prop_oneof![
        Just(WeightDistribution::uniform(1.0, 2.0).unwrap()),
        Just(WeightDistribution::atomic(&[(1.0, 0.5), (2.0, 0.5)]).unwrap()),
        Just(WeightDistribution::atomic(&[(1.0, 0.85), (1.2, 0.15)]).unwrap()),
        Just(WeightDistribution::dirac(1.0).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hull_is_convex_and_covers_inputs(pts in points()) {
        if let Ok(h) = hull(&pts) {
            let v = h.vertices();
            for i in 0..v.len() {
                let (a, b, c) = (v[i], v[(i + 1) % v.len()], v[(i + 2) % v.len()]);
                prop_assert!(cross(a, b, c) > 0.0);
            }
            for p in &pts {
                prop_assert!(h.l1_distance_to(*p) <= 1e-9);
            }
            for q in v {
                prop_assert!(pts.contains(q));
            }
        }
    }

    #[test]
    fn hausdorff_is_a_metric(a in shape(), b in shape(), c in shape()) {
        prop_assert_eq!(hausdorff(&a, &a), 0.0);
        prop_assert!((hausdorff(&a, &b) - hausdorff(&b, &a)).abs() <= 1e-12);
        prop_assert!(hausdorff(&a, &c) <= hausdorff(&a, &b) + hausdorff(&b, &c) + 1e-9);
        prop_assert!((hausdorff(&a.scaled(2.0), &b.scaled(2.0)) - 2.0 * hausdorff(&a, &b)).abs() <= 1e-9);
    }

    #[test]
    fn extreme_points_are_vertices(s in shape(), theta in 0.0..0.5f64) {
        let ext = extreme_points(&s, theta);
        prop_assert!(ext.len() <= s.vertices().len());
        for p in &ext {
            prop_assert!(s.vertices().contains(p));
        }
        prop_assert!(sides(&s, theta) >= sides(&s, theta + 0.3));
    }

    #[test]
    fn regular_polygons_have_k_sides(k in 3usize..40, r in 0.5..5.0f64, phase in 0.0..1.0f64) {
        let s = ConvexShape::regular(k, r, phase).unwrap();
        let theta = std::f64::consts::TAU / k as f64 / 2.0;
        prop_assert_eq!(sides(&s, theta), k);
    }

    #[test]
    fn passage_times_obey_triangle_inequality(d in dist(), seed in any::<u64>(), a in (-5i32..=5, -5i32..=5), b in (-5i32..=5, -5i32..=5)) {
        let w = Window::centered(6).unwrap();
        let field = EdgeField::new(seed, d);
        let (a, b) = (Site::new(a.0, a.1), Site::new(b.0, b.1));
        let (ma, mb) = (solve(&field, a, w).unwrap(), solve(&field, b, w).unwrap());
        prop_assert!((ma.time(b) - mb.time(a)).abs() <= 1e-12);
        for c in w.sites() {
            prop_assert!(ma.time(c) <= ma.time(b) + mb.time(c) + 1e-12);
        }
    }

    #[test]
    fn growth_partitions_the_window(d in dist(), seed in any::<u64>(), raw in prop::collection::btree_set((-7i32..=7, -7i32..=7), 1..6), tie in prop_oneof![Just(TieRule::Strict), Just(TieRule::Lexicographic), Just(TieRule::Random)]) {
        let seeds: Vec<Site> = raw.into_iter().map(|(x, y)| Site::new(x, y)).collect();
        let cfg = CompetitionConfig { dist: d, seeds, window: Window::centered(8).unwrap(), tie_policy: tie, seed };
        let occ = compete(&cfg).unwrap();
        let w = cfg.window;
        let mut claimed = vec![0usize; w.len()];
        for i in 0..cfg.seeds.len() {
            for s in occ.colony(i) {
                claimed[w.index(s)] += 1;
                prop_assert_eq!(occ.owner(s), Some(i));
            }
        }
        prop_assert!(claimed.iter().all(|&c| c <= 1));
        let uncolonized = claimed.iter().filter(|&&c| c == 0).count();
        if tie == TieRule::Strict {
            prop_assert_eq!(uncolonized, occ.tie_set().len());
        } else {
            prop_assert_eq!(uncolonized, 0);
        }
        let all: Vec<Site> = w.sites().collect();
        let direct = independent_owners(&cfg, &all).unwrap();
        for (s, o) in all.iter().zip(direct) {
            match o {
                Some(i) => prop_assert_eq!(occ.owner(*s), Some(i)),
                None => prop_assert!(occ.is_tie(*s)),
            }
        }
        prop_assert!(lipschitz_violation(&cfg.field(), &occ) <= 1e-12);
    }

    #[test]
    fn busemann_cocycle_and_bounds(d in dist(), seed in any::<u64>(), n in 2i32..6, dir in 0usize..4, pts in prop::collection::vec((-8i32..=8, -8i32..=8), 3)) {
        let w = Window::centered(9).unwrap();
        let (v, t) = [((1.0, 0.0), (0.0, 1.0)), ((0.0, 1.0), (1.0, 0.0)), ((1.0, 1.0), (1.0, -1.0)), ((-1.0, 2.0), (2.0, 1.0))][dir];
        let field = EdgeField::new(seed, d);
        let b = BusemannField::new(&field, BusemannSpec { v, w: t, n }, w).unwrap();
        let [x, y, z] = [0, 1, 2].map(|i| Site::new(pts[i].0, pts[i].1));
        let bxy = b.value(x, y).unwrap();
        prop_assert!((bxy + b.value(y, x).unwrap()).abs() <= 1e-9);
        prop_assert!((bxy + b.value(y, z).unwrap() - b.value(x, z).unwrap()).abs() <= 1e-9);
        prop_assert!(bxy.abs() <= solve(&field, x, w).unwrap().time(y) + 1e-9);
    }

    #[test]
    fn oriented_front_moves_by_parity_steps(p in 0.5..1.0f64, seed in any::<u64>()) {
        let run = oriented_cluster(p, 200, seed);
        prop_assert_eq!(run.rightmost[0], 0);
        for (n, w) in run.rightmost.windows(2).enumerate() {
            prop_assert!(w[1] - w[0] <= 1);
            prop_assert_eq!((w[1] - (n as i64 + 1)).rem_euclid(2), 0);
        }
        // Monotone coupling in p.
        let more = oriented_cluster((p + 0.1).min(1.0), 200, seed);
        if run.survived {
            prop_assert!(more.survived);
            for (a, b) in run.rightmost.iter().zip(&more.rightmost) {
                prop_assert!(b >= a);
            }
        }
    }
}
