mod common;

use proptest::prelude::*;
use replicable::domain::{all_hypotheses, exact_error, tuple_distance, wrap_distance};
use replicable::HypothesisIndex;

const PRIMES: [u32; 6] = [3, 5, 7, 11, 13, 29];

fn pair_strategy() -> impl Strategy<Value = (HypothesisIndex, HypothesisIndex, HypothesisIndex)> {
    (1usize..6, prop::sample::select(PRIMES.to_vec())).prop_flat_map(|(d, k)| {
        let coords = prop::collection::vec(0..k, d);
        (coords.clone(), coords.clone(), coords).prop_map(move |(a, b, c)| {
            (
                HypothesisIndex::new(a, k).unwrap(),
                HypothesisIndex::new(b, k).unwrap(),
                HypothesisIndex::new(c, k).unwrap(),
            )
        })
    })
}

proptest! {
    #[test]
    fn distance_is_a_metric((u, v, w) in pair_strategy()) {
        let d = |a: &HypothesisIndex, b: &HypothesisIndex| tuple_distance(a, b).unwrap();
        prop_assert_eq!(d(&u, &v), d(&v, &u));
        prop_assert_eq!(d(&u, &v) == 0, u == v);
        prop_assert!(d(&u, &w) <= d(&u, &v) + d(&v, &w));
        prop_assert!(d(&u, &v) <= u.d() as u64 * (u.k() / 2) as u64);
    }

    #[test]
    fn distance_matches_walk((u, v, _w) in pair_strategy()) {
        prop_assert_eq!(tuple_distance(&u, &v).unwrap(), common::nu(u.coords(), v.coords(), u.k()));
    }

    #[test]
    fn error_is_disagreement_mass((u, v, _w) in pair_strategy()) {
        let brute = common::disagreements(&u, &v) as f64 / (u.d() as f64 * u.k() as f64);
        prop_assert_eq!(exact_error(&u, &v).unwrap(), brute);
    }

    #[test]
    fn shifts_are_isometries((u, v, _w) in pair_strategy(), s in prop::collection::vec(-40i64..40, 5)) {
        let off = &s[..u.d()];
        prop_assert_eq!(tuple_distance(&u.shifted(off), &v.shifted(off)).unwrap(), tuple_distance(&u, &v).unwrap());
    }

    #[test]
    fn linear_index_round_trips((u, _v, _w) in pair_strategy()) {
        prop_assert_eq!(HypothesisIndex::from_linear(u.to_linear(), u.d(), u.k()), u);
    }
}

#[test]
fn exhaustive_error_small_instances() {
    for d in 1..=2 {
        for k in [3, 5, 7] {
            for u in all_hypotheses(d, k) {
                for v in all_hypotheses(d, k) {
                    let brute = common::disagreements(&u, &v) as f64 / (d as f64 * k as f64);
                    assert_eq!(exact_error(&u, &v).unwrap(), brute, "{u} {v}");
                }
            }
        }
    }
}

#[test]
fn wrap_distance_table() {
    for k in [3, 5, 7, 11] {
        for x in 0..k {
            for y in 0..k {
                assert_eq!(wrap_distance(x, y, k), common::walk_distance(x, y, k));
            }
        }
    }
}

#[test]
fn mismatched_shapes_are_rejected() {
    let a = HypothesisIndex::new(vec![1, 2], 5).unwrap();
    let b = HypothesisIndex::new(vec![1, 2], 7).unwrap();
    let c = HypothesisIndex::new(vec![1], 5).unwrap();
    assert!(tuple_distance(&a, &b).is_err());
    assert!(exact_error(&a, &c).is_err());
}
