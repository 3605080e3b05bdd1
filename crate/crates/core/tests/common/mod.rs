//! Independent reference implementations used by the integration tests.
#![allow(dead_code)]

use std::collections::HashMap;

use replicable::domain::{all_hypotheses, evaluate_hypothesis};
use replicable::prf::priority;
use replicable::{HypothesisIndex, Params, Point};

/// Number of domain points where `h_u` and `h_v` differ, by evaluation.
pub fn disagreements(u: &HypothesisIndex, v: &HypothesisIndex) -> u64 {
    let (d, k) = (u.d() as u32, u.k());
    (0..d)
        .flat_map(|a| (0..k).map(move |b| Point::new(a, b)))
        .filter(|&p| evaluate_hypothesis(u, p) != evaluate_hypothesis(v, p))
        .count() as u64
}

/// Cyclic distance by walking forward from `x`.
pub fn walk_distance(x: u32, y: u32, k: u32) -> u32 {
    let fwd = (0..k).find(|&s| (x + s) % k == y).unwrap();
    fwd.min(k - fwd)
}

pub fn nu(u: &[u32], v: &[u32], k: u32) -> u64 {
    u.iter().zip(v).map(|(&a, &b)| walk_distance(a, b, k) as u64).sum()
}

/// `b^S` by walking backwards from every observed 1 to the previous observed
/// position; the smallest 1 preceded by a 0 wins, otherwise 0.
pub fn transitions(points: &[(Point, bool)], d: usize, k: u32) -> Vec<u32> {
    let mut label: HashMap<(u32, u32), bool> = HashMap::new();
    for &(p, l) in points {
        label.entry((p.axis, p.position)).or_insert(l);
    }
    (0..d as u32)
        .map(|a| {
            let mut best: Option<u32> = None;
            for b in 0..k {
                if label.get(&(a, b)) != Some(&true) {
                    continue;
                }
                let prev = (1..k)
                    .map(|s| (b + k - s) % k)
                    .find(|&c| label.contains_key(&(a, c)));
                if let Some(c) = prev {
                    if !label[&(a, c)] {
                        best = Some(best.map_or(b, |x: u32| x.min(b)));
                    }
                }
            }
            best.unwrap_or(0)
        })
        .collect()
}

/// The minimum of `(priority, coords)` over every hypothesis within
/// `radius` of `center`.
pub fn select(center: &[u32], radius: u64, d: usize, k: u32, key: u128) -> Vec<u32> {
    all_hypotheses(d, k)
        .filter(|h| nu(h.coords(), center, k) <= radius)
        .map(|h| (priority(key, h.coords()), h.coords().to_vec()))
        .min()
        .unwrap()
        .1
}

/// Learner output on `points` by the two reference routines above.
pub fn learn(points: &[(Point, bool)], params: &Params, key: u128) -> Vec<u32> {
    let center = transitions(points, params.d(), params.k());
    select(&center, params.radius(), params.d(), params.k(), key)
}

/// Full truth table of `h`, axis-major.
pub fn truth_table(h: &[u32], k: u32) -> Vec<bool> {
    h.iter()
        .flat_map(|&s| (0..k).map(move |b| (b + k - s) % k < k / 2))
        .collect()
}

/// Exhaustive tabulation of learner outputs over all `(dk)^n` ordered samples
/// labeled by `target`, and its mode (ties to the smallest truth table).
pub struct Tabulation {
    pub counts: HashMap<Vec<u32>, u64>,
    pub mode: Vec<u32>,
    pub mode_count: u64,
    pub total: u64,
}

pub fn tabulate(params: &Params, target: &HypothesisIndex, key: u128) -> Tabulation {
    let (d, k, n) = (params.d(), params.k(), params.n());
    let dk = d as u64 * k as u64;
    let total = dk.pow(n as u32);
    let mut counts: HashMap<Vec<u32>, u64> = HashMap::new();
    for code in 0..total {
        let mut c = code;
        let mut pts = Vec::with_capacity(n);
        for _ in 0..n {
            let x = (c % dk) as u32;
            c /= dk;
            let p = Point::new(x / k, x % k);
            pts.push((p, evaluate_hypothesis(target, p)));
        }
        *counts.entry(learn(&pts, params, key)).or_insert(0) += 1;
    }
    let (mode, mode_count) = counts
        .iter()
        .map(|(h, &c)| (h.clone(), c))
        .max_by(|a, b| a.1.cmp(&b.1).then_with(|| truth_table(&b.0, k).cmp(&truth_table(&a.0, k))))
        .unwrap();
    Tabulation { counts, mode, mode_count, total }
}

/// Size of `{x ∈ Z^d : ‖x‖₁ ≤ r}` (or wrap-around with modulus `k`) by
/// enumeration of the cube.
pub fn brute_ball(d: usize, r: u64, k: Option<u32>) -> u64 {
    match k {
        Some(k) => all_hypotheses(d, k)
            .filter(|h| nu(h.coords(), &vec![0; d], k) <= r)
            .count() as u64,
        None => {
            let side = 2 * r as i64 + 1;
            let mut count = 0;
            for code in 0..side.pow(d as u32) {
                let mut c = code;
                let mut norm = 0;
                for _ in 0..d {
                    norm += (c % side - r as i64).abs();
                    c /= side;
                }
                if norm <= r as i64 {
                    count += 1;
                }
            }
            count
        }
    }
}
