use causalnav::causal::{discover_structure, edge_f1, ground_truth_model, synthetic_dataset, DiscoveryConfig, NodeKind};

fn run(seed: u64, alpha: f64) -> causalnav::causal::LaggedDag {
    let data = synthetic_dataset(100_000, seed);
    let cfg = DiscoveryConfig {
        seed,
        alpha,
        ..DiscoveryConfig::default()
    };
    discover_structure(&data, &cfg).unwrap().dag
}

#[test]
fn recovers_the_reference_structure() {
    let truth = ground_truth_model();
    for seed in [0, 1, 3] {
        let dag = run(seed, 0.05);
        let f1 = edge_f1(&dag, &truth);
        assert!(f1 >= 0.9, "seed {seed}: F1 {f1}, edges {:?}", dag.edges);
        assert!(dag.validate().is_ok());
    }
}

#[test]
fn edges_only_grow_with_alpha() {
    for seed in 0..4 {
        let strict = run(seed, 0.01);
        let loose = run(seed, 0.1);
        assert!(strict.edge_set().is_subset(&loose.edge_set()), "seed {seed}");
        let kind = |n: &str| loose.nodes.iter().find(|x| x.name == n).unwrap().kind;
        for e in &loose.edges {
            assert!(!(kind(&e.src) == NodeKind::System && kind(&e.dst) == NodeKind::Context), "{e:?}");
        }
    }
}
