mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use replicable::domain::{sample_training_set, tuple_distance};
use replicable::learner::{build_mode_classes, estimate_transitions, exact_mode, Learner};
use replicable::{HypothesisIndex, LabeledSample, Params, Point, SharedKey};

fn params(d: usize, k: u32, eps: f64, n: usize) -> Params {
    Params::new(d, k, eps, 0.1, 0.1, n).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn transitions_match_reference(seed in any::<u64>(), d in 1usize..4, n in 0usize..30) {
        let p = params(d, 11, 0.3, n);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let target = HypothesisIndex::random(d, 11, &mut rng);
        let s = sample_training_set(&p, &target, &mut rng);
        let got = estimate_transitions(&s, &p).unwrap();
        let want = common::transitions(s.points(), d, 11);
        prop_assert_eq!(got.coords(), want.as_slice());
    }

    #[test]
    fn selection_matches_brute_force(seed in any::<u64>(), d in 1usize..3, eps in 0.05f64..0.9) {
        let p = params(d, 13, eps, 0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let center = HypothesisIndex::random(d, 13, &mut rng);
        let key = SharedKey::random(&mut rng);
        let learner = Learner::new(&p).unwrap();
        let got = learner.select(&center, &key);
        let want = common::select(center.coords(), p.radius(), d, 13, key.0);
        prop_assert_eq!(got.coords(), want.as_slice());
    }

    #[test]
    fn output_is_permutation_invariant(seed in any::<u64>()) {
        let p = params(3, 17, 0.3, 40);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let target = HypothesisIndex::random(3, 17, &mut rng);
        let s = sample_training_set(&p, &target, &mut rng);
        let mut pts = s.points().to_vec();
        pts.reverse();
        let t = LabeledSample::new(&target, pts).unwrap();
        let key = SharedKey::random(&mut rng);
        let learner = Learner::new(&p).unwrap();
        prop_assert_eq!(learner.learn(&s, &key).unwrap(), learner.learn(&t, &key).unwrap());
    }
}

#[test]
fn mutual_acceptance_forces_agreement() {
    let p = params(3, 13, 0.3, 15);
    let learner = Learner::new(&p).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut mutual = 0;
    for _ in 0..20_000 {
        let target = HypothesisIndex::random(3, 13, &mut rng);
        let key = SharedKey::random(&mut rng);
        let (s1, s2) = (sample_training_set(&p, &target, &mut rng), sample_training_set(&p, &target, &mut rng));
        let (c1, c2) = (estimate_transitions(&s1, &p).unwrap(), estimate_transitions(&s2, &p).unwrap());
        let (o1, o2) = (learner.select(&c1, &key), learner.select(&c2, &key));
        let r = learner.radius();
        if tuple_distance(&o1, &c2).unwrap() <= r && tuple_distance(&o2, &c1).unwrap() <= r {
            mutual += 1;
            assert_eq!(o1, o2);
        }
    }
    assert!(mutual > 1000, "only {mutual} mutual acceptances");
}

#[test]
fn exact_mode_matches_tabulation() {
    for (d, n) in [(1, 2), (2, 2), (1, 3)] {
        let p = params(d, 3, 0.3, n);
        for seed in 0..3u64 {
            let key = SharedKey(replicable::prf::derive_key(seed, 0));
            for target in replicable::domain::all_hypotheses(d, 3) {
                let got = exact_mode(&p, &target, &key).unwrap();
                let want = common::tabulate(&p, &target, key.0);
                assert_eq!(got.total, want.total);
                assert_eq!(got.mode.coords(), want.mode.as_slice(), "d={d} n={n} target={target}");
                assert_eq!(got.mode_count, want.mode_count);
                for (h, c) in &got.distribution {
                    assert_eq!(want.counts[&h.coords().to_vec()], *c);
                }
                assert_eq!(got.distribution.len(), want.counts.len());
            }
        }
    }
}

#[test]
fn mode_classes_partition_retained() {
    for (d, eps) in [(1, 0.3), (2, 0.3), (2, 0.6)] {
        let p = params(d, 3, eps, 2);
        let report = build_mode_classes(&p, &SharedKey(7)).unwrap();
        assert!(report.is_partition(&p));
        for (f, members) in &report.classes {
            for h in members {
                let e = report.entries.iter().find(|e| &e.target == h).unwrap();
                assert_eq!(&e.mode_labeling, f);
                assert!(e.mode_error <= eps);
            }
        }
    }
}

#[test]
fn corrupted_labels_are_accepted_raw() {
    let p = params(1, 7, 0.3, 0);
    let pts = vec![(Point::new(0, 1), true), (Point::new(0, 2), false), (Point::new(0, 4), true)];
    let s = LabeledSample::from_raw(1, 7, pts.clone()).unwrap();
    assert_eq!(estimate_transitions(&s, &p).unwrap().coords(), common::transitions(&pts, 1, 7).as_slice());
}
