mod support;

use beliefnet_core::analysis::degree_distribution;
use beliefnet_core::engine::{
    run_cycle, run_simulation, FitnessSource, PointOverride, SignCountsSource, SimConfig,
};
use beliefnet_core::{seeded_rng, EdgeSign, SignCounts, SignedNetwork, VertexAttrs, VertexId};
use proptest::prelude::*;

fn config_strategy() -> impl Strategy<Value = SimConfig> {
    (
        0.0..=1.0f64,
        1u32..=4,
        1u32..=25,
        0u32..=3,
        1u32..=50,
        prop::option::of(0.05..2.0f64),
        prop::option::of((0.01..1.0f64, 0.0..1.0f64, 0.0..1.0f64)),
        any::<u64>(),
    )
        .prop_map(
            |(h, u, e, f_forget, n_points, fitness, counts, seed)| SimConfig {
                h,
                u,
                e,
                f_forget,
                n_points,
                fitness: fitness.map_or(FitnessSource::Uniform, FitnessSource::Constant),
                sign_counts: counts.map_or(SignCountsSource::Uniform, |(a, b, c)| {
                    SignCountsSource::Constant(SignCounts::new(a, b, c))
                }),
                overrides: Vec::new(),
                seed,
            },
        )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn runs_keep_the_graph_simple_and_symmetric(config in config_strategy()) {
        let mut net = SignedNetwork::new(config.h).unwrap();
        let mut rng = seeded_rng(config.seed);
        for ordinal in 0..config.n_points {
            let report = run_cycle(&mut net, &config, ordinal, &mut rng);
            prop_assert!(report.time_used <= config.e);
            prop_assert!(report.forgotten <= config.f_forget);
            prop_assert!(net.check_invariants().is_ok(), "{:?}", net.check_invariants());
            if net.vertex_count() >= 2 {
                prop_assert!(net.vertex_ids().all(|v| net.degree(v) > 0));
            }
            // A rejected input leaves nothing behind.
            if !report.attached {
                prop_assert!(!net.contains(report.input));
            }
            prop_assert_eq!(report.n_vertices, net.vertex_count());
            prop_assert_eq!(report.n_edges, net.edge_count());
        }
    }

    #[test]
    fn equal_seeds_reproduce_runs(config in config_strategy()) {
        let a = run_simulation(&config).unwrap();
        let b = run_simulation(&config).unwrap();
        prop_assert_eq!(&a.trace, &b.trace);
        let ea: Vec<_> = a.network.edges().collect();
        let eb: Vec<_> = b.network.edges().collect();
        prop_assert_eq!(ea, eb);
    }

    #[test]
    fn tolerant_positive_growth_keeps_every_input(
        u in 1u32..=4, e in 1u32..=20, n in 1u32..=80, seed in any::<u64>(),
    ) {
        let config = SimConfig {
            h: 1.0,
            u,
            e,
            f_forget: 0,
            n_points: n,
            fitness: FitnessSource::Uniform,
            sign_counts: SignCountsSource::Constant(SignCounts::new(1.0, 0.0, 0.0)),
            overrides: Vec::new(),
            seed,
        };
        let run = run_simulation(&config).unwrap();
        prop_assert_eq!(run.network.vertex_count(), n as usize);
        prop_assert!(run.trace.iter().all(|c| c.attached && c.removed.is_empty()));
        prop_assert!(run.trace.iter().all(|c| c.first_link_attempts == 1));
    }

    #[test]
    fn attachment_weights_are_a_distribution(seed in any::<u64>(), density in 0.0..1.0f64) {
        let mut rng = seeded_rng(seed);
        let dense = support::random_dense(&mut rng, 6, density);
        let net = dense.to_network();
        for v in net.vertex_ids() {
            let w = net.attachment_weights(v);
            let non_adjacent = net.vertex_ids().filter(|&t| t != v && !net.has_edge(v, t)).count();
            prop_assert_eq!(w.len(), non_adjacent);
            if !w.is_empty() {
                let total: f64 = w.iter().map(|(_, p)| p).sum();
                prop_assert!((total - 1.0).abs() < 1e-12);
                prop_assert!(w.iter().all(|(_, p)| *p >= 0.0));
                prop_assert!(w.windows(2).all(|p| p[0].0 < p[1].0));
            }
        }
    }

    #[test]
    fn killing_is_monotone_in_link_signs(
        tolerance in 0.0..=1.0f64, negatives in 0usize..6, others in 0usize..6,
    ) {
        // A hub with `negatives` negative and `others` positive links; one
        // more negative link can only turn NO into YES, one more positive
        // link only YES into NO.
        let build = |extra: Option<EdgeSign>| {
            let mut net = SignedNetwork::new(tolerance).unwrap();
            let a = VertexAttrs::new(1.0, 0.5, 0.5, 0).unwrap();
            let hub = net.add_vertex(a);
            let signs = std::iter::repeat_n(EdgeSign::Negative, negatives)
                .chain(std::iter::repeat_n(EdgeSign::Positive, others))
                .chain(extra);
            for s in signs {
                let leaf = net.add_vertex(a);
                net.add_edge(hub, leaf, s).unwrap();
            }
            net.killing(hub)
        };
        let base = build(None);
        if base {
            prop_assert!(build(Some(EdgeSign::Negative)));
        } else {
            prop_assert!(!build(Some(EdgeSign::Positive)));
        }
        let degree = negatives + others;
        let expected = degree > 0 && negatives as f64 / degree as f64 > tolerance;
        prop_assert_eq!(base, expected);
    }

    #[test]
    fn forgetting_removes_min_of_count_and_edges(
        seed in any::<u64>(), density in 0.1..1.0f64, count in 0usize..20,
    ) {
        let mut rng = seeded_rng(seed);
        let dense = support::random_dense(&mut rng, 6, density);
        let mut net = dense.to_network();
        let before = net.edge_count();
        let removed = net.forget_edges(count, &mut rng);
        prop_assert_eq!(removed, count.min(before));
        prop_assert_eq!(net.edge_count(), before - removed);
        prop_assert!(net.check_invariants().is_ok());
    }

    #[test]
    fn histogram_reproduces_vertex_count(config in config_strategy()) {
        let run = run_simulation(&config).unwrap();
        if run.network.is_empty() {
            return Ok(());
        }
        let hist = degree_distribution(&run.network).unwrap();
        let recount: f64 = hist.probs.values().map(|p| p * hist.n_vertices as f64).sum();
        prop_assert!((recount - run.network.vertex_count() as f64).abs() < 1e-9);
        prop_assert!((hist.total() - 1.0).abs() < 1e-9);
    }
}

#[test]
fn special_time_override_is_honoured() {
    let config = SimConfig {
        h: 0.5,
        u: 1,
        e: 10,
        f_forget: 1,
        n_points: 200,
        fitness: FitnessSource::Constant(1.0),
        sign_counts: SignCountsSource::Uniform,
        overrides: vec![PointOverride {
            ordinal: 199,
            e: Some(400),
            ..Default::default()
        }],
        seed: 3,
    };
    let run = run_simulation(&config).unwrap();
    assert!(run.trace[..199].iter().all(|c| c.time_used <= 10));
    assert!(run.trace[199].time_used > 10 && run.trace[199].time_used <= 400);
}

#[test]
fn ids_are_never_reused() {
    let config = SimConfig {
        h: 0.3,
        u: 2,
        e: 10,
        f_forget: 2,
        n_points: 300,
        fitness: FitnessSource::Uniform,
        sign_counts: SignCountsSource::Uniform,
        overrides: Vec::new(),
        seed: 11,
    };
    let run = run_simulation(&config).unwrap();
    let inputs: Vec<VertexId> = run.trace.iter().map(|c| c.input).collect();
    let mut sorted = inputs.clone();
    sorted.dedup();
    assert_eq!(sorted.len(), inputs.len());
    for (v, a) in run.network.vertices() {
        assert_eq!(inputs[a.ordinal as usize], v);
    }
}
