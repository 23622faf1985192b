//! Property-based invariants across modules.

use proptest::prelude::*;

use pplab::bounds::{self, Mode, MomentPair, Provenance};
use pplab::experiments::{self, OutputFormat, ResultRow};
use pplab::geometry::Coords;
use pplab::metrics::{self, EmpiricalDistribution};
use pplab::process::{Configuration, SpaceTag};
use pplab::transform;

fn coords(d: usize, max: usize) -> impl Strategy<Value = Vec<Coords>> {
    prop::collection::vec(prop::collection::vec(0.0..1.0f64, d), 0..max)
        .prop_map(|v| v.into_iter().map(|p| p.into_iter().collect()).collect())
}

fn sorted_pairs(points: &[Coords], cutoff: f64, grid: bool) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let push = |i: usize, j: usize, _: f64| out.push((i.min(j), i.max(j)));
    if grid {
        transform::for_each_pair_within(points, cutoff, push);
    } else {
        transform::brute_pairs(points, cutoff, push);
    }
    out.sort_unstable();
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn grid_pairs_match_brute_force(pts in coords(2, 60), cutoff in 0.01..0.5f64) {
        prop_assert_eq!(sorted_pairs(&pts, cutoff, true), sorted_pairs(&pts, cutoff, false));
    }

    #[test]
    fn grid_pairs_match_brute_force_3d(pts in coords(3, 40), cutoff in 0.05..0.6f64) {
        prop_assert_eq!(sorted_pairs(&pts, cutoff, true), sorted_pairs(&pts, cutoff, false));
    }

    #[test]
    fn merge_adds_counts(a in prop::collection::vec(0i64..5, 0..20), b in prop::collection::vec(0i64..5, 0..20)) {
        let ca = Configuration::from_points(SpaceTag::Real, a.iter().map(|&x| x as f64));
        let cb = Configuration::from_points(SpaceTag::Real, b.iter().map(|&x| x as f64));
        let m = ca.merge(&cb).unwrap();
        prop_assert_eq!(m.total_count(), (a.len() + b.len()) as u64);
        for v in 0..5 {
            let v = v as f64;
            prop_assert_eq!(m.count_in(|x| *x == v), ca.count_in(|x| *x == v) + cb.count_in(|x| *x == v));
        }
    }

    #[test]
    fn config_tv_is_a_metric(
        a in prop::collection::vec(0i64..4, 0..12),
        b in prop::collection::vec(0i64..4, 0..12),
        c in prop::collection::vec(0i64..4, 0..12),
    ) {
        let cfg = |v: &[i64]| Configuration::from_points(SpaceTag::Named("g".into()), v.iter().copied());
        let (x, y, z) = (cfg(&a), cfg(&b), cfg(&c));
        let d = |p: &Configuration<i64>, q: &Configuration<i64>| metrics::config_tv_cost(p, q).unwrap();
        prop_assert_eq!(d(&x, &x), 0.0);
        prop_assert_eq!(d(&x, &y), d(&y, &x));
        prop_assert!(d(&x, &z) <= d(&x, &y) + d(&y, &z) + 1e-12);
    }

    #[test]
    fn ot_matches_vertex_enumeration(
        n in 1usize..4,
        m in 1usize..4,
        seed_cost in prop::collection::vec(0.0..5.0f64, 9),
        mu_raw in prop::collection::vec(0.05..1.0f64, 3),
        nu_raw in prop::collection::vec(0.05..1.0f64, 3),
    ) {
        let cost = &seed_cost[..n * m];
        let mu = &mu_raw[..n];
        let s = mu.iter().sum::<f64>() / nu_raw[..m].iter().sum::<f64>();
        let nu: Vec<f64> = nu_raw[..m].iter().map(|x| x * s).collect();
        let plan = metrics::ot_exact(cost, mu, &nu).unwrap();
        let brute = metrics::ot_vertex_enumeration(cost, mu, &nu).unwrap();
        prop_assert!((plan.cost - brute).abs() < 1e-9);
        prop_assert!(plan.duality_gap.abs() < 1e-8);
        for i in 0..n {
            let row: f64 = (0..m).map(|j| plan.at(i, j)).sum();
            prop_assert!((row - mu[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn distances_are_bounded_and_symmetric(
        a in prop::collection::vec(0u64..10, 1..50),
        b in prop::collection::vec(0u64..10, 1..50),
    ) {
        let (p, q) = (EmpiricalDistribution::from_counts(&a).unwrap(), EmpiricalDistribution::from_counts(&b).unwrap());
        let k = metrics::kolmogorov_between(&p, &q);
        prop_assert!((0.0..=1.0).contains(&k));
        prop_assert_eq!(k, metrics::kolmogorov_between(&q, &p));
        let (pp, qp) = (p.to_pmf().unwrap(), q.to_pmf().unwrap());
        let tv = metrics::tv_integer(&pp, &qp);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&tv));
        prop_assert!((tv - metrics::tv_integer(&qp, &pp)).abs() < 1e-15);
        // Kolmogorov ≤ TV ≤ W1 for integer-valued laws.
        prop_assert!(k <= tv + 1e-12);
        prop_assert!(tv <= metrics::wasserstein1(&p, &q) + 1e-12);
    }

    #[test]
    fn bound_is_monotone_in_r(dtv in 0.0..1.0f64, r in 0.0..1.0f64, extra in 0.0..1.0f64, mass in 0.1..20.0f64) {
        let lo = bounds::thm_main_bound(dtv, r, 2, Mode::Poisson, mass).unwrap().bound;
        let hi = bounds::thm_main_bound(dtv, r + extra, 2, Mode::Poisson, mass).unwrap().bound;
        prop_assert!(lo <= hi);
        prop_assert!(lo >= dtv);
    }

    #[test]
    fn moment_excess_is_nonnegative(mean in 0.0..50.0f64, var in 0.0..100.0f64, n in 2u64..500) {
        let m = MomentPair::exact(mean, var + mean * mean, Provenance::MonteCarlo);
        prop_assert!(bounds::moment_excess(&m, 2, Mode::Poisson) >= 0.0);
        let binomial = Mode::Binomial { n };
        prop_assert!(bounds::moment_excess(&m, 2, binomial) >= 0.0);
    }

    #[test]
    fn falling_factorial_recursion(n in 0u64..60, k in 1usize..6) {
        let lhs = bounds::falling(n, k);
        let rhs = bounds::falling(n, k - 1) * (n as f64 - (k as f64 - 1.0)).max(0.0);
        prop_assert!((lhs - rhs).abs() <= 1e-9 * lhs.abs().max(1.0));
    }

    #[test]
    fn csv_round_trip(distance in -1e6..1e6f64, stderr in prop::option::of(0.0..10.0f64), t in 1.0..1e4f64, seed in any::<u64>()) {
        let row = ResultRow {
            scenario: "polytope".into(),
            d: 3,
            t,
            statistic: "s".into(),
            distance_name: "x".into(),
            distance,
            stderr,
            bound: None,
            bound_form: None,
            rate_pred: Some(-1.0),
            seed,
            wall_seconds: 0.0,
        };
        let text = experiments::render(std::slice::from_ref(&row), OutputFormat::Csv).unwrap();
        let back = experiments::parse_csv(&text).unwrap();
        prop_assert_eq!(&back[0], &row);
        let json = experiments::render(&back, OutputFormat::Json).unwrap();
        prop_assert_eq!(&experiments::parse_json(&json).unwrap()[0], &row);
    }

    #[test]
    fn log_log_slope_recovers_exponent(c in 0.01..100.0f64, e in -3.0..1.0f64) {
        let pts: Vec<(f64, f64)> = [5.0, 10.0, 40.0, 90.0].iter().map(|&t: &f64| (t, c * t.powf(e))).collect();
        prop_assert!((experiments::log_log_slope(&pts).unwrap() - e).abs() < 1e-9);
    }
}
