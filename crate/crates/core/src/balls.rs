//! Exact counting, enumeration and uniform sampling of ℓ1 balls in `Z^d` and
//! wrap-around balls in `Z_k^d`.
//!
//! A ball is described by the per-coordinate shell weights: one point at
//! distance 0 and two at every positive distance (for odd `k`, `x − y` and
//! `y − x` are different residues whenever `x ≠ y`). The wrap-around ball caps
//! the per-coordinate distance at `⌊k/2⌋`. Counts are the `d`-fold convolution
//! of the weights, truncated at the radius.

use std::fmt::Write as _;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use serde::Serialize;

use crate::domain::{HypothesisIndex, Params};
use crate::error::{Error, Result};
use crate::stats::wilson_interval;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BallSpec {
    pub d: usize,
    pub radius: u64,
    /// `None` for the unbounded ball in `Z^d`.
    pub modulus: Option<u32>,
}

impl BallSpec {
    pub fn unbounded(d: usize, radius: u64) -> Self {
        BallSpec { d, radius, modulus: None }
    }

    pub fn wrapped(d: usize, radius: u64, k: u32) -> Self {
        BallSpec { d, radius, modulus: Some(k) }
    }

    /// Largest per-coordinate distance, if any.
    pub fn coordinate_cap(&self) -> Option<u64> {
        self.modulus.map(|k| (k / 2) as u64)
    }

    fn weight(&self, t: u64) -> u64 {
        match (t, self.coordinate_cap()) {
            (0, _) => 1,
            (t, Some(cap)) if t > cap => 0,
            _ => 2,
        }
    }

    /// Radius beyond which nothing changes.
    fn effective_radius(&self) -> u64 {
        match self.coordinate_cap() {
            Some(cap) => self.radius.min(cap * self.d as u64),
            None => self.radius,
        }
    }
}

/// Exact shell counts `counts[t]` = number of points at distance exactly `t`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BallTable {
    pub spec: BallSpec,
    pub counts: Vec<BigUint>,
    pub cumulative: Vec<BigUint>,
}

impl BallTable {
    pub fn new(spec: BallSpec) -> Self {
        let r = spec.effective_radius() as usize;
        let mut poly: Vec<BigUint> = vec![BigUint::zero(); r + 1];
        poly[0] = BigUint::one();
        for _ in 0..spec.d {
            let mut next = vec![BigUint::zero(); r + 1];
            for (s, c) in poly.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                for t in 0..=(r - s) {
                    let w = spec.weight(t as u64);
                    if w == 0 {
                        break;
                    }
                    next[s + t] += c * w;
                }
            }
            poly = next;
        }
        let mut cumulative = Vec::with_capacity(poly.len());
        let mut acc = BigUint::zero();
        for c in &poly {
            acc += c;
            cumulative.push(acc.clone());
        }
        BallTable { spec, counts: poly, cumulative }
    }

    pub fn volume(&self) -> BigUint {
        self.cumulative.last().cloned().unwrap_or_default()
    }

    /// `t,count,cumulative` rows, one per distance.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,count,cumulative\n");
        for (t, (c, cum)) in self.counts.iter().zip(&self.cumulative).enumerate() {
            let _ = writeln!(out, "{t},{c},{cum}");
        }
        out
    }
}

pub fn binomial(n: u64, r: u64) -> BigUint {
    if r > n {
        return BigUint::zero();
    }
    let r = r.min(n - r);
    let mut acc = BigUint::one();
    for i in 0..r {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// `|{u ∈ Z^d : ‖u‖₁ ≤ r}| = Σ_i 2^i C(d,i) C(r,i)`.
pub fn l1_ball_count(d: usize, r: u64) -> BigUint {
    (0..=d as u64)
        .map(|i| (BigUint::one() << i as usize) * binomial(d as u64, i) * binomial(r, i))
        .sum()
}

/// `|{v ∈ Z_k^d : ν(0, v) ≤ r}|`.
pub fn wrap_ball_count(d: usize, r: u64, k: u32) -> BigUint {
    BallTable::new(BallSpec::wrapped(d, r, k)).volume()
}

/// `6^d r²`, the volume bound for unbounded ℓ1 balls with `r ≥ 1`.
pub fn l1_volume_bound(d: usize, r: u64) -> BigUint {
    BigUint::from(6u32).pow(d as u32) * BigUint::from(r) * BigUint::from(r)
}

/// Points of `Z^d` at ℓ1 norm exactly `t` with exactly `z` zero entries:
/// `2^{d−z} C(d,z) C(t−1, d−z−1)`.
pub fn shell_count_with_zeros(d: usize, z: usize, t: u64) -> BigUint {
    let nonzero = d - z;
    if t == 0 {
        return if nonzero == 0 { BigUint::one() } else { BigUint::zero() };
    }
    if nonzero == 0 {
        return BigUint::zero();
    }
    (BigUint::one() << nonzero) * binomial(d as u64, z as u64) * binomial(t - 1, nonzero as u64 - 1)
}

/// Exact uniform sampler over a wrap-around (or unbounded) ball, using
/// `ways[m][s]`: the number of ways `m` coordinates reach total distance `s`.
#[derive(Debug, Clone)]
pub struct BallSampler {
    spec: BallSpec,
    ways: Vec<Vec<u128>>,
    cumulative: Vec<u128>,
}

impl BallSampler {
    pub fn new(spec: BallSpec) -> Result<Self> {
        let r = spec.effective_radius() as usize;
        let overflow = || Error::resource("ball sampler table", format!("d={}, radius={}", spec.d, spec.radius), "volume < 2^128");
        let mut ways = vec![vec![0u128; r + 1]];
        ways[0][0] = 1;
        for m in 1..=spec.d {
            let prev = &ways[m - 1];
            let mut row = vec![0u128; r + 1];
            for (s, slot) in row.iter_mut().enumerate() {
                let mut acc = 0u128;
                for t in 0..=s {
                    let w = spec.weight(t as u64) as u128;
                    if w == 0 {
                        break;
                    }
                    let term = w.checked_mul(prev[s - t]).ok_or_else(overflow)?;
                    acc = acc.checked_add(term).ok_or_else(overflow)?;
                }
                *slot = acc;
            }
            ways.push(row);
        }
        let mut cumulative = Vec::with_capacity(r + 1);
        let mut acc = 0u128;
        for &c in &ways[spec.d] {
            acc = acc.checked_add(c).ok_or_else(overflow)?;
            cumulative.push(acc);
        }
        Ok(BallSampler { spec, ways, cumulative })
    }

    pub fn volume(&self) -> u128 {
        *self.cumulative.last().expect("nonempty")
    }

    /// Number of points at distance exactly `t`.
    pub fn count_at(&self, t: usize) -> u128 {
        self.ways[self.spec.d][t]
    }

    /// A uniformly random offset vector `Δ` with per-coordinate distances
    /// inside the ball.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<i64> {
        let d = self.spec.d;
        let x = rng.random_range(0..self.volume());
        let mut remaining = self.cumulative.partition_point(|&c| c <= x);
        let mut offset = Vec::with_capacity(d);
        for j in 0..d {
            let m = d - j;
            let mut y = rng.random_range(0..self.ways[m][remaining]);
            let mut chosen = 0;
            for t in 0..=remaining {
                let w = self.spec.weight(t as u64) as u128;
                let mass = w * self.ways[m - 1][remaining - t];
                if y < mass {
                    chosen = t;
                    break;
                }
                y -= mass;
            }
            let signed = if chosen > 0 && rng.random_bool(0.5) {
                -(chosen as i64)
            } else {
                chosen as i64
            };
            offset.push(signed);
            remaining -= chosen;
        }
        offset
    }
}

/// Uniform `Δ` with `center + Δ` in the wrap-around ball of radius `radius`.
pub fn sample_uniform_wrap_ball<R: Rng + ?Sized>(
    center: &HypothesisIndex,
    radius: u64,
    rng: &mut R,
) -> Result<Vec<i64>> {
    let sampler = BallSampler::new(BallSpec::wrapped(center.d(), radius, center.k()))?;
    Ok(sampler.sample(rng))
}

#[derive(Debug, Clone, Serialize)]
pub struct InteriorReport {
    pub radius: u64,
    pub gamma: f64,
    pub beta: f64,
    /// `⌈εγk/96⌉`.
    pub q: u64,
    /// `Pr[‖Δ‖₁ ≤ R − q]` from the exact table.
    pub within_exact: f64,
    pub within_mc: f64,
    pub within_ci: (f64, f64),
    /// `βk/2`; coordinates with `|Δ_a|` strictly below count as small.
    pub small_threshold: f64,
    /// `small_histogram[c]` = trials with exactly `c` small coordinates.
    pub small_histogram: Vec<u64>,
    /// `2304 dβ/ε + 3 ln(4/ρ)`.
    pub fewsmall_bound: f64,
    pub fewsmall_exceed: f64,
    pub fewsmall_exceed_ci: (f64, f64),
    /// Whether `k ≥ 384/(ερ)`, `β ≥ 2/k` and `ρ/4 ≤ γ ≤ 1/2` all hold.
    pub preconditions_hold: bool,
    /// `Some(pass)` only when the preconditions hold.
    pub smallnorm_ok: Option<bool>,
    pub fewsmall_ok: Option<bool>,
    pub trials: usize,
}

/// Monte Carlo statistics of a uniform `Δ` in the wrap-around ball: the
/// interior mass `Pr[‖Δ‖₁ ≤ R − q]` and the number of small coordinates.
pub fn interior_statistics<R: Rng + ?Sized>(
    params: &Params,
    radius: u64,
    gamma: f64,
    beta: f64,
    trials: usize,
    rng: &mut R,
) -> Result<InteriorReport> {
    if trials == 0 {
        return Err(Error::usage("trials must be positive"));
    }
    let (d, k, eps, rho) = (params.d(), params.k(), params.epsilon(), params.rho());
    let kf = k as f64;
    let sampler = BallSampler::new(BallSpec::wrapped(d, radius, k))?;
    let q = (eps * gamma * kf / 96.0 - 1e-12).ceil().max(0.0) as u64;
    let eff_r = radius.min(params.max_distance());
    let within_exact = if radius < q {
        0.0
    } else {
        let limit = (radius - q).min(eff_r) as usize;
        ratio_u128(sampler.cumulative[limit], sampler.volume())
    };
    let threshold = beta * kf / 2.0;
    let bound = 2304.0 * d as f64 * beta / eps + 3.0 * (4.0 / rho).ln();

    let mut within = 0u64;
    let mut exceed = 0u64;
    let mut hist = vec![0u64; d + 1];
    for _ in 0..trials {
        let delta = sampler.sample(rng);
        let norm: u64 = delta.iter().map(|x| x.unsigned_abs()).sum();
        if radius >= q && norm <= radius - q {
            within += 1;
        }
        let small = delta.iter().filter(|x| (x.unsigned_abs() as f64) < threshold).count();
        hist[small] += 1;
        if small as f64 > bound {
            exceed += 1;
        }
    }
    let within_ci = wilson_interval(within, trials as u64);
    let exceed_ci = wilson_interval(exceed, trials as u64);
    let preconditions_hold = kf >= 384.0 / (eps * rho)
        && beta >= 2.0 / kf
        && gamma >= rho / 4.0
        && gamma <= 0.5;
    let (smallnorm_ok, fewsmall_ok) = if preconditions_hold {
        (Some(within_ci.1 >= 1.0 - gamma), Some(exceed_ci.0 <= rho / 4.0))
    } else {
        (None, None)
    };
    Ok(InteriorReport {
        radius,
        gamma,
        beta,
        q,
        within_exact,
        within_mc: within as f64 / trials as f64,
        within_ci,
        small_threshold: threshold,
        small_histogram: hist,
        fewsmall_bound: bound,
        fewsmall_exceed: exceed as f64 / trials as f64,
        fewsmall_exceed_ci: exceed_ci,
        preconditions_hold,
        smallnorm_ok,
        fewsmall_ok,
        trials,
    })
}

fn ratio_u128(num: u128, den: u128) -> f64 {
    // shift both into f64 range without losing the leading bits
    let shift = (128 - den.leading_zeros()).saturating_sub(100);
    (num >> shift) as f64 / (den >> shift) as f64
}

/// `counts[t] / volume` as a float, for reporting.
pub fn big_ratio(num: &BigUint, den: &BigUint) -> f64 {
    let bits = den.bits().max(num.bits());
    let shift = bits.saturating_sub(1000);
    let n = (num >> shift).to_f64().unwrap_or(f64::INFINITY);
    let d = (den >> shift).to_f64().unwrap_or(f64::INFINITY);
    n / d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{all_hypotheses, tuple_distance};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn brute_l1(d: usize, r: i64) -> u64 {
        fn rec(d: usize, budget: i64) -> u64 {
            if d == 0 {
                return 1;
            }
            (-budget..=budget).map(|x| rec(d - 1, budget - x.abs())).sum()
        }
        rec(d, r)
    }

    #[test]
    fn l1_counts() {
        assert_eq!(l1_ball_count(1, 2), BigUint::from(5u32));
        assert_eq!(l1_ball_count(2, 2), BigUint::from(13u32));
        assert!(l1_ball_count(2, 2) <= l1_volume_bound(2, 2));
        assert_eq!(l1_volume_bound(2, 2), BigUint::from(144u32));
        for d in 1..=4 {
            for r in 0..=6 {
                assert_eq!(l1_ball_count(d, r), BigUint::from(brute_l1(d, r as i64)));
                assert_eq!(BallTable::new(BallSpec::unbounded(d, r)).volume(), l1_ball_count(d, r));
            }
        }
    }

    #[test]
    fn wrap_counts() {
        assert_eq!(wrap_ball_count(1, 2, 5), BigUint::from(5u32));
        assert_eq!(wrap_ball_count(1, 9, 5), BigUint::from(5u32));
        assert_eq!(wrap_ball_count(2, 2, 5), BigUint::from(13u32));
        let origin = HypothesisIndex::zero(2, 5);
        let brute = all_hypotheses(2, 5)
            .filter(|v| tuple_distance(&origin, v).unwrap() <= 2)
            .count();
        assert_eq!(brute, 13);
    }

    #[test]
    fn zero_pattern_shells_sum_to_table() {
        for d in 1..=5usize {
            let table = BallTable::new(BallSpec::unbounded(d, 12));
            for t in 0..=12u64 {
                let s: BigUint = (0..=d).map(|z| shell_count_with_zeros(d, z, t)).sum();
                assert_eq!(s, table.counts[t as usize], "d={d} t={t}");
            }
        }
    }

    #[test]
    fn shell_ratio_monotone_beyond_2d() {
        for d in 1..=5usize {
            for z in 0..d {
                for t in (2 * d as u64).max(1)..40 {
                    assert!(shell_count_with_zeros(d, z, t + 1) >= shell_count_with_zeros(d, z, t));
                }
            }
        }
    }

    #[test]
    fn sampler_zero_radius_and_containment() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let c = HypothesisIndex::new(vec![1, 4, 2], 7).unwrap();
        for _ in 0..100 {
            assert_eq!(sample_uniform_wrap_ball(&c, 0, &mut rng).unwrap(), vec![0, 0, 0]);
        }
        let s = BallSampler::new(BallSpec::wrapped(3, 5, 7)).unwrap();
        for _ in 0..2000 {
            let delta = s.sample(&mut rng);
            let v = c.shifted(&delta);
            assert!(tuple_distance(&c, &v).unwrap() <= 5);
            assert!(delta.iter().all(|x| x.unsigned_abs() <= 3));
        }
    }

    #[test]
    fn sampler_d1_is_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let s = BallSampler::new(BallSpec::wrapped(1, 1, 7)).unwrap();
        let mut counts = [0u64; 3];
        let n = 100_000;
        for _ in 0..n {
            counts[(s.sample(&mut rng)[0] + 1) as usize] += 1;
        }
        let p = crate::stats::chi_square_gof(&counts, &[1.0 / 3.0; 3]).p_value;
        assert!(p > 1e-3, "{counts:?}");
    }

    #[test]
    fn interior_trivial_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let p = Params::new(3, 11, 0.3, 0.2, 0.1, 10).unwrap();
        // gamma tiny enough that q = 0
        let r = interior_statistics(&p, 5, 0.0, 0.2, 500, &mut rng).unwrap();
        assert_eq!(r.q, 0);
        assert_eq!(r.within_exact, 1.0);
        assert_eq!(r.within_mc, 1.0);
        let r0 = interior_statistics(&p, 0, 0.1, 0.5, 200, &mut rng).unwrap();
        assert_eq!(r0.small_histogram[3], 200);
        assert!(!r0.preconditions_hold);
        assert!(r0.smallnorm_ok.is_none());
    }

    #[test]
    fn to_csv_layout() {
        let t = BallTable::new(BallSpec::unbounded(2, 2));
        assert_eq!(t.to_csv(), "t,count,cumulative\n0,1,1\n1,4,5\n2,8,13\n");
    }
}
