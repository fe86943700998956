use nalgebra::DMatrix;
use proptest::prelude::*;
use usc_core::meta::second_order_bound;
use usc_core::{gamma_constant, generalized_project, AdaptMlProd, FeasibleSet, Vector};

fn point(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-5.0f64..5.0, dim)
}

fn sets() -> Vec<FeasibleSet> {
    vec![
        FeasibleSet::unit_ball(3),
        FeasibleSet::ball(Vector::new(vec![0.5, -1.0, 2.0]).unwrap(), 1.7).unwrap(),
        FeasibleSet::box_set(Vector::new(vec![-1.0, 0.0, 0.5]).unwrap(), Vector::new(vec![1.0, 0.3, 2.0]).unwrap())
            .unwrap(),
    ]
}

proptest! {
    #[test]
    fn projection_is_nonexpansive(p in point(3), q in point(3)) {
        let (p, q) = (Vector::new(p).unwrap(), Vector::new(q).unwrap());
        for set in sets() {
            let (pp, pq) = (set.project(&p).unwrap(), set.project(&q).unwrap());
            prop_assert!(pp.distance(&pq).unwrap() <= p.distance(&q).unwrap() + 1e-12);
        }
    }

    #[test]
    fn projection_is_idempotent(p in point(3)) {
        let p = Vector::new(p).unwrap();
        for set in sets() {
            let once = set.project(&p).unwrap();
            prop_assert!(set.contains(&once, 1e-12));
            prop_assert_eq!(set.project(&once).unwrap(), once);
        }
    }

    #[test]
    fn identity_metric_matches_euclidean(p in point(3)) {
        let p = Vector::new(p).unwrap();
        let eye = DMatrix::<f64>::identity(3, 3);
        for set in sets() {
            let a = set.project(&p).unwrap();
            let b = generalized_project(&set, &p, &eye).unwrap();
            prop_assert!(a.distance(&b).unwrap() <= 1e-9);
        }
    }

    #[test]
    fn meta_state_invariants(
        n in 2usize..8,
        rounds in prop::collection::vec(prop::collection::vec(0.0f64..=1.0, 8), 1..200),
    ) {
        let mut m = AdaptMlProd::new(n).unwrap();
        let mut regret = vec![0.0; n];
        let mut last_rates = m.rates().to_vec();
        let mut last_sq = vec![0.0; n];
        for (k, losses) in rounds.iter().enumerate() {
            let losses = &losses[..n];
            let p = m.weights();
            let total: f64 = p.iter().sum();
            prop_assert!((total - 1.0).abs() <= 1e-12);
            prop_assert!(p.iter().all(|x| *x >= 0.0));
            let mixed = m.update(losses).unwrap();
            prop_assert!((0.0..=1.0).contains(&mixed));
            let gamma = gamma_constant(n, k + 1).unwrap();
            for i in 0..n {
                regret[i] += mixed - losses[i];
                prop_assert!(m.rates()[i] <= last_rates[i]);
                prop_assert!(m.rates()[i] > 0.0 && m.rates()[i] <= 0.5);
                prop_assert!(m.cum_sq_excess()[i] >= last_sq[i]);
                prop_assert!(regret[i] <= second_order_bound(gamma, n, m.cum_sq_excess()[i]));
            }
            last_rates = m.rates().to_vec();
            last_sq = m.cum_sq_excess().to_vec();
        }
    }
}
