mod common;

use causalnav::inference::{do_query, QuerySpec};
use rand::seq::SliceRandom;
use rand::Rng;

fn max_gap(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn random_networks_match_enumeration() {
    let mut rng = common::rng(21);
    for _ in 0..30 {
        let m = common::random_network(&mut rng, 6, 4);
        let n = m.variables.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        let target = order[0];
        let n_do = rng.random_range(0..=2.min(n - 1));
        let n_given = rng.random_range(0..=2.min(n - 1 - n_do));
        let fix = |i: usize, rng: &mut rand_chacha::ChaCha8Rng| (i, rng.random_range(0..m.variables[i].card));
        let dos: Vec<(usize, usize)> = order[1..1 + n_do].iter().map(|&i| fix(i, &mut rng)).collect();
        let givens: Vec<(usize, usize)> = order[1 + n_do..1 + n_do + n_given].iter().map(|&i| fix(i, &mut rng)).collect();
        let mut q = QuerySpec::new(&m.variables[target].name);
        for &(i, v) in &dos {
            q = q.intervene(&m.variables[i].name, v);
        }
        for &(i, v) in &givens {
            q = q.given(&m.variables[i].name, v);
        }
        let oracle = common::enumerate_query(&m, &dos, &givens, target).expect("positive tables");
        let got = do_query(&m, &q).unwrap();
        assert!(max_gap(&got, &oracle) <= 1e-9, "{q:?}: {got:?} vs {oracle:?}");
    }
}

#[test]
fn confounded_speed_uses_adjustment() {
    let mut rng = common::rng(4);
    for _ in 0..5 {
        let m = common::backdoor_network(&mut rng);
        for v in 0..3 {
            let got = do_query(&m, &QuerySpec::new("L").intervene("V", v)).unwrap();
            assert!(max_gap(&got, &common::backdoor_oracle(&m, v)) <= 1e-12);
            // observing V is not the same as setting it
            let seen = do_query(&m, &QuerySpec::new("L").given("V", v)).unwrap();
            assert!(max_gap(&got, &seen) > 1e-6);
        }
    }
}

#[test]
fn intervening_on_a_root_equals_conditioning() {
    let mut rng = common::rng(9);
    let m = common::density_network(&mut rng);
    for s in 0..4 {
        for w in 0..3 {
            let a = do_query(&m, &QuerySpec::new("D").intervene("S", s).given("W", w)).unwrap();
            let b = do_query(&m, &QuerySpec::new("D").given("S", s).given("W", w)).unwrap();
            assert!(max_gap(&a, &b) <= 1e-12);
            assert!(max_gap(&a, m.cpds[2].row(&[s, w])) <= 1e-12);
        }
    }
}
