mod common;

use causalnav::planner::{decide_task, plan_path, Decision, DecisionPolicy, HeuristicWeights};
use rand::Rng;

#[test]
fn optimal_against_exhaustive_search() {
    let mut rng = common::rng(3);
    for _ in 0..60 {
        let n = rng.random_range(2..=9);
        let g = common::random_graph(&mut rng, n);
        let est = common::random_estimates(&mut rng, &g);
        let w = HeuristicWeights::new(rng.random_range(0.1..10.0), rng.random_range(0.0..100.0), rng.random_range(0.0..50.0));
        let (a, b) = (rng.random_range(0..n), rng.random_range(0..n));
        let plan = plan_path(&g, a, b, &est, &w).unwrap();
        let (best, _) = common::brute_force_path(&g, a, b, &est, &w).unwrap();
        assert_eq!(plan.total_cost, best);
        assert_eq!(plan.path.first(), Some(&a));
        assert_eq!(plan.path.last(), Some(&b));
    }
}

#[test]
fn distance_only_weights_reproduce_dijkstra() {
    let mut rng = common::rng(8);
    for _ in 0..40 {
        let n = rng.random_range(2..=10);
        let g = common::random_graph(&mut rng, n);
        let est = common::random_estimates(&mut rng, &g);
        let (a, b) = (rng.random_range(0..n), rng.random_range(0..n));
        let plan = plan_path(&g, a, b, &est, &HeuristicWeights::shortest()).unwrap();
        let (path, len) = g.shortest_path(a, b).unwrap();
        assert_eq!(plan.path, path);
        assert!((plan.length - len).abs() < 1e-9);
    }
}

#[test]
fn refusal_is_the_threshold_rule_on_the_planned_drain() {
    let mut rng = common::rng(12);
    let g = common::random_graph(&mut rng, 8);
    let est = common::random_estimates(&mut rng, &g);
    let plan = plan_path(&g, 0, 7, &est, &HeuristicWeights::new(1.0, 10.0, 5.0)).unwrap();
    let policy = DecisionPolicy {
        b_min: 20.0,
        query_velocity: 0.5,
    };
    assert!(plan.c_l > 0.0);
    assert_eq!(decide_task(&plan, 20.0 + plan.c_l, &policy), Decision::Proceed);
    assert_eq!(decide_task(&plan, 20.0 + plan.c_l * 0.5, &policy), Decision::Abort);
}
