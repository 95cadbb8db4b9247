use std::sync::Arc;

use martingale::fixtures::{random_filtration, random_martingale, random_predictable, random_space, random_with_drift};
use martingale::montecarlo::RngStream;
use martingale::process::{classify, make_binary_tree_space, martingale_transform, Filtration, ProcessKind};
use martingale::{Partition, Rational, Scalar};
use proptest::prelude::*;

fn q(n: i64, d: i64) -> Rational {
    Rational::from_ratio(n, d)
}

fn zero() -> Rational {
    q(0, 1)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn transform_of_martingale_is_martingale(seed in any::<u64>(), n in 2usize..=10, steps in 1usize..=4) {
        let mut rng = RngStream::new(seed, 0);
        let space = random_space::<Rational, _>(&mut rng, n);
        let f = random_filtration(&mut rng, space, steps);
        let x = random_martingale(&mut rng, &f);
        let c = random_predictable(&mut rng, &f, -3, 3).unwrap();
        let y = martingale_transform(&c, &x).unwrap();
        prop_assert_eq!(classify(&y, 0.0).kind, ProcessKind::Martingale);
        // (C·X)_0 = 0.
        prop_assert!(y.at(0).values().iter().all(|v| *v == zero()));
    }

    #[test]
    fn nonnegative_bets_keep_the_drift_sign(seed in any::<u64>(), n in 2usize..=10, steps in 1usize..=4, drift in prop::sample::select(vec![-1i64, 1])) {
        let mut rng = RngStream::new(seed, 1);
        let space = random_space::<Rational, _>(&mut rng, n);
        let f = random_filtration(&mut rng, space, steps);
        let x = random_with_drift(&mut rng, &f, drift);
        let c = random_predictable(&mut rng, &f, 0, 3).unwrap();
        let y = martingale_transform(&c, &x).unwrap();
        for d in classify(&y, 0.0).all_defects() {
            if drift > 0 {
                prop_assert!(d.defect >= zero());
            } else {
                prop_assert!(d.defect <= zero());
            }
        }
    }

    #[test]
    fn tree_walk_class_follows_the_drift(depth in 1usize..=6, up in 1i64..=5, su in 1i64..=3, sd in 1i64..=3) {
        let p = q(up, 6);
        let tree = make_binary_tree_space(depth, p.clone(), q(su, 1), q(-sd, 1)).unwrap();
        let drift = p.clone() * q(su, 1) - (q(1, 1) - p) * q(sd, 1);
        let expected = if drift == zero() {
            ProcessKind::Martingale
        } else if drift > zero() {
            ProcessKind::Submartingale
        } else {
            ProcessKind::Supermartingale
        };
        let class = classify(&tree.walk, 0.0);
        prop_assert_eq!(class.kind, expected);
        prop_assert!(class.all_defects().all(|d| d.defect == drift));
    }

    #[test]
    fn martingale_expectation_is_constant(seed in any::<u64>(), n in 2usize..=10) {
        let mut rng = RngStream::new(seed, 2);
        let space = random_space::<Rational, _>(&mut rng, n);
        let f = random_filtration(&mut rng, space, 3);
        let x = random_martingale(&mut rng, &f);
        let e0 = x.at(0).expectation();
        prop_assert!(x.vars().iter().all(|v| v.expectation() == e0));
    }
}

#[test]
fn filtration_must_refine() {
    let space = Arc::new(martingale::FiniteSpace::<Rational>::uniform(4).unwrap());
    let fine = Partition::new(4, vec![vec![0, 1], vec![2, 3]]).unwrap();
    let cross = Partition::new(4, vec![vec![0, 2], vec![1, 3]]).unwrap();
    assert!(Filtration::new(space.clone(), vec![Partition::trivial(4), fine.clone()]).is_ok());
    assert!(Filtration::new(space, vec![Partition::trivial(4), fine, cross]).is_err());
}

#[test]
fn floating_classification_uses_tolerance() {
    let tree = make_binary_tree_space(4, 0.5, 1.0, -1.0).unwrap();
    assert_eq!(classify(&tree.walk, 1e-12).kind, ProcessKind::Martingale);
    let tilted = make_binary_tree_space(4, 0.5 + 1e-14, 1.0, -1.0).unwrap();
    assert_eq!(classify(&tilted.walk, 1e-12).kind, ProcessKind::Martingale);
    assert_eq!(classify(&tilted.walk, 0.0).kind, ProcessKind::Submartingale);
    assert!(tilted.walk.at(0).values()[0].to_f64() == 0.0);
}
