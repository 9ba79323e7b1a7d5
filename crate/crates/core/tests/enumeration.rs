mod common;

use std::collections::BTreeSet;

use privroute::search::{dominates, unconstrained_route_count};
use privroute::{
    enumerate_routes, evaluate, generate, min_avg_risk, pareto_front, posterior_matrix, privacy_risks,
    risks_from_posterior, DroneSpec, GeneratorConfig, Rational, RiskObjective, Route, RouteSpace, Scenario, Topology,
};

use common::{naive_count, naive_routes};

#[test]
fn stream_matches_naive_filter() {
    for n in 1..=3 {
        for decoys in 0..=2 {
            for budget in 0..=decoys {
                for c in 1..=n {
                    let scenario = Scenario::abstract_orders(n, decoys).unwrap();
                    let stream: Vec<Route> = enumerate_routes(&scenario, &DroneSpec::new(c), budget)
                        .unwrap()
                        .collect();
                    let sorted = stream.windows(2).all(|w| w[0] < w[1]);
                    assert!(sorted, "n={n} d={decoys} b={budget} c={c}");
                    let got: BTreeSet<Route> = stream.into_iter().collect();
                    assert_eq!(
                        got,
                        naive_routes(n, decoys, budget, c),
                        "n={n} d={decoys} b={budget} c={c}"
                    );
                }
            }
        }
    }
}

#[test]
fn counts_match_naive_filter_at_four_orders() {
    for c in 1..=4 {
        let scenario = Scenario::abstract_orders(4, 1).unwrap();
        let space = RouteSpace::new(&scenario, &DroneSpec::new(c), 1).unwrap();
        assert_eq!(space.count(), naive_count(4, 1, 1, c), "c={c}");
    }
}

#[test]
fn closed_count_when_capacity_is_slack() {
    for n in 1..=5 {
        for decoys in 0..=2 {
            let scenario = Scenario::abstract_orders(n, decoys).unwrap();
            let space = RouteSpace::new(&scenario, &DroneSpec::new(n), decoys).unwrap();
            assert_eq!(space.count() as f64, unconstrained_route_count(n, decoys, decoys));
        }
    }
}

#[test]
fn engine_matches_observer_on_every_small_route() {
    for n in 1..=3 {
        for decoys in 0..=1 {
            let scenario = Scenario::abstract_orders(n, decoys).unwrap();
            for route in enumerate_routes(&scenario, &DroneSpec::new(n), decoys).unwrap() {
                let p = posterior_matrix(&route, &scenario).unwrap();
                assert_eq!(
                    risks_from_posterior(&p),
                    privacy_risks(&route, &scenario).unwrap().risks,
                    "{route}"
                );
            }
        }
    }
}

#[test]
fn front_matches_brute_force() {
    for seed in 0..3 {
        let scenario = generate(&GeneratorConfig::new(Topology::Uniform, 3, 1, seed)).unwrap();
        let drone = DroneSpec::new(2);
        for objective in [RiskObjective::Average, RiskObjective::Worst] {
            let front = pareto_front(&scenario, &drone, objective, 1).unwrap();

            let all: Vec<_> = enumerate_routes(&scenario, &drone, 1)
                .unwrap()
                .map(|r| evaluate(&r, &scenario, &drone).unwrap())
                .collect();
            assert_eq!(front.routes_evaluated, all.len() as u64);
            let key = |e: &privroute::Evaluation| (front.objective_of(e).0, front.objective_of(e).1);
            let mut expected: Vec<(Rational, f64, u64, Route)> = Vec::new();
            for e in &all {
                let k = key(e);
                if all.iter().any(|o| dominates(key(o), k)) {
                    continue;
                }
                match expected.iter_mut().find(|x| x.0 == k.0 && x.1 == k.1) {
                    Some(x) => {
                        x.2 += 1;
                        if e.route < x.3 {
                            x.3 = e.route.clone();
                        }
                    }
                    None => expected.push((k.0, k.1, 1, e.route.clone())),
                }
            }
            expected.sort_by(|a, b| a.1.total_cmp(&b.1));
            let got: Vec<(Rational, f64, u64, Route)> = front
                .points
                .iter()
                .map(|p| {
                    let k = key(&p.evaluation);
                    (k.0, k.1, p.multiplicity, p.evaluation.route.clone())
                })
                .collect();
            assert_eq!(got, expected, "seed {seed} {}", objective.name());
        }
    }
}

#[test]
fn sweep_cells_match_brute_force() {
    for (n, c, d) in [(2, 1, 0), (2, 2, 1), (3, 1, 1), (3, 2, 0), (3, 3, 2)] {
        let cell = min_avg_risk(n, c, d).unwrap();
        let scenario = Scenario::abstract_orders(n, d).unwrap();
        let values: Vec<(Rational, Route)> = naive_routes(n, d, d, c)
            .into_iter()
            .map(|r| (privacy_risks(&r, &scenario).unwrap().average, r))
            .collect();
        let best = values.iter().map(|v| v.0).min().unwrap();
        let hits: Vec<&Route> = values.iter().filter(|v| v.0 == best).map(|v| &v.1).collect();
        assert_eq!(cell.min_avg_risk, best);
        assert_eq!(cell.multiplicity, hits.len() as u64);
        assert_eq!(&cell.route, hits[0]);
        assert_eq!(cell.routes_evaluated, values.len() as u64);
    }
}
