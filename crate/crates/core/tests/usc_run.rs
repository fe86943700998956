use usc_core::{
    build_expert_pool, generate_stream, AlgorithmId, AlgorithmSpec, ExpertContext, FeasibleSet, Loss, PooledExpert,
    RoundRecord, StreamClass, StreamConfig, SyntheticLoss, UscLearner, Vector,
};

const G: f64 = 2.0;

fn full_pool(set: &FeasibleSet, horizon: usize) -> Vec<PooledExpert> {
    let ctx = ExpertContext::new(set.clone(), G);
    let ids = |xs: &[AlgorithmId]| xs.iter().map(|&a| AlgorithmSpec::from(a)).collect::<Vec<_>>();
    build_expert_pool(
        &ids(&[AlgorithmId::OgdStrong, AlgorithmId::OegdStrong]),
        &ids(&[AlgorithmId::Ons]),
        &ids(&[AlgorithmId::OgdConvex, AlgorithmId::Sogd]),
        horizon,
        &ctx,
    )
    .unwrap()
}

fn run(class: StreamClass, param: f64, horizon: usize, seed: u64, anchor: Option<Vector>) -> (Vec<SyntheticLoss>, Vec<RoundRecord>) {
    let set = FeasibleSet::unit_ball(2);
    let cfg = StreamConfig::new(class, 2, horizon, seed, param, G);
    let stream = generate_stream(&cfg, &set).unwrap();
    let pool = full_pool(&set, horizon);
    let mut usc = match anchor {
        Some(a) => UscLearner::with_anchor(pool, set, G, a).unwrap(),
        None => UscLearner::new(pool, set, G).unwrap(),
    };
    let recs = usc.run(&stream).unwrap();
    (stream, recs)
}

#[test]
fn records_are_consistent() {
    let set = FeasibleSet::unit_ball(2);
    for class in [StreamClass::Strong, StreamClass::ExpConcave, StreamClass::Convex] {
        let (stream, recs) = run(class, 0.5, 300, 11, None);
        assert_eq!(recs.len(), 300);
        for (f, r) in stream.iter().zip(&recs) {
            assert!(set.contains(&r.x_t, 1e-12));
            assert_eq!(r.loss_value, f.value(&r.x_t));
            let total: f64 = r.weights.iter().sum();
            assert!((total - 1.0).abs() <= 1e-12);
            assert!(r.per_expert_linloss.iter().all(|l| (0.0..=1.0).contains(l)));
            let mixed: f64 = r.weights.iter().zip(&r.per_expert_linloss).map(|(p, l)| p * l).sum();
            assert!((mixed - r.meta_linloss).abs() <= 1e-10);
            for p in &r.expert_points {
                assert!(set.contains(p, 1e-12));
            }
            assert_eq!(r.gradient_queries, 1 + r.expert_points.len());
        }
    }
}

#[test]
fn reruns_are_bitwise_identical() {
    let (_, a) = run(StreamClass::Strong, 0.25, 100, 5, None);
    let (_, b) = run(StreamClass::Strong, 0.25, 100, 5, None);
    assert_eq!(a, b);
}

#[test]
fn weight_trajectory_ignores_anchor() {
    let (_, a) = run(StreamClass::Convex, 0.0, 400, 3, None);
    let (_, b) = run(StreamClass::Convex, 0.0, 400, 3, Some(Vector::new(vec![0.6, -0.3]).unwrap()));
    let mut worst: f64 = 0.0;
    for (ra, rb) in a.iter().zip(&b) {
        for (pa, pb) in ra.weights.iter().zip(&rb.weights) {
            worst = worst.max((pa - pb).abs());
        }
    }
    assert!(worst <= 1e-10, "{worst}");
}

#[test]
fn pool_size_is_logarithmic_in_horizon() {
    let set = FeasibleSet::unit_ball(2);
    for exp in 1..=20 {
        let t = 1usize << exp;
        // 3 grid-based algorithms × (log₂T + 1) + 2 convex experts
        let n = full_pool(&set, t).len();
        assert_eq!(n, 3 * (exp + 1) + 2);
    }
}
