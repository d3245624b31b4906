mod common;

use causalnav::causal::ground_truth_model;
use causalnav::env::bundled_scenario;
use causalnav::inference::{fit_mle, CausalInferenceModel};
use causalnav::params::Params;
use causalnav::pipeline::{build_dataset, elbow_bins, nyquist_subsample, quantile_discretize};
use causalnav::planner::estimate_arcs;
use causalnav::sim::{collect_training_log, TimeSeriesLog};
use causalnav::Error;

#[test]
fn desk_log_to_model_and_back() {
    let sc = bundled_scenario("desk20").unwrap();
    let p = Params::default();
    let log = collect_training_log(&sc, &p, 7).unwrap();

    let mut text = Vec::new();
    log.write_csv(&mut text).unwrap();
    let back = TimeSeriesLog::read_csv(text.as_slice(), &sc.name, 7).unwrap();
    assert_eq!(back.rows.len(), log.rows.len());

    let (data, schema) = build_dataset(&log, &sc.graph, &p.learning).unwrap();
    let model = fit_mle(&ground_truth_model(), &data, &schema).unwrap();
    for cpd in &model.cpds {
        for r in 0..cpd.rows() {
            let s: f64 = cpd.table[r * cpd.card..(r + 1) * cpd.card].iter().sum();
            assert!((s - 1.0).abs() <= 1e-12, "{} row {r} sums to {s}", cpd.node);
        }
    }
    let reloaded = CausalInferenceModel::from_json(&model.to_json().unwrap()).unwrap();
    assert_eq!(reloaded, model);

    // the busy aisle of the first working slot must look busier than the quiet ones
    let est = estimate_arcs(&sc.graph, &model, "S2", false, p.query_velocity()).unwrap();
    let d = |id: &str| est.d_hat[sc.graph.index_of(id).unwrap()];
    assert!(d("A1") > d("B1") + 0.1, "A1 {} B1 {}", d("A1"), d("B1"));
    assert!(d("A2") > d("C2") + 0.1);
    assert!(est.l_hat < 0.0);

    // nobody is around in the coverage slot
    let empty = estimate_arcs(&sc.graph, &model, "S11", false, p.query_velocity()).unwrap();
    assert!(empty.d_hat.iter().all(|&x| x < 0.05), "{:?}", empty.d_hat);
}

#[test]
fn quantile_bins_balance_on_distinct_values() {
    let mut r = common::rng(2);
    for n in [97usize, 500, 1001] {
        let v: Vec<f64> = (0..n).map(|i| i as f64 + rand::Rng::random::<f64>(&mut r) * 0.5).collect();
        for k in 2..=7 {
            let (codes, schema) = quantile_discretize(&v, k).unwrap();
            assert_eq!(schema.bins(), k);
            let mut counts = vec![0usize; k];
            for c in codes {
                counts[c] += 1;
            }
            let (lo, hi) = (counts.iter().min().unwrap(), counts.iter().max().unwrap());
            assert!(hi - lo <= 1, "n {n} k {k}: {counts:?}");
        }
    }
}

#[test]
fn elbow_and_nyquist_fixtures() {
    assert_eq!(elbow_bins(&common::two_cluster_fixture(), 8), 2);
    let rate = 10.0;
    let wave: Vec<f64> = (0..2000).map(|i| (2.0 * std::f64::consts::PI * 1.5 * i as f64 / rate).sin()).collect();
    assert!(matches!(
        nyquist_subsample(&[wave.clone()], rate, 2.9),
        Err(Error::BelowNyquist { .. })
    ));
    let ok = nyquist_subsample(&[wave], rate, 3.4).unwrap();
    assert_eq!(ok.factor, 3);
}
