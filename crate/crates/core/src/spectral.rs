//! The Cayley graph `G` on `Z_k^d` generated by `Z = {−1, 0, 1}^d`.
//!
//! `Z` contains the zero vector, so every node carries one self-loop and has
//! degree `|Z| = 3^d`. The characters `χ_v(w) = k^{-d/2} exp(2πi⟨v,w⟩/k)`
//! diagonalize the adjacency matrix with eigenvalues
//! `λ_v = |Z| − 2 Σ_z sin²(π⟨v,z⟩/k)`. Because `Z` is a product set this also
//! factors as `Π_i (1 + 2 cos(2π v_i / k))`.
//!
//! The module also carries the tail indicators `X_z`, rank computations over
//! `F_k`, and Littlewood–Offord estimates used to study the spectrum.

use std::collections::{HashMap, HashSet};
use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use serde::Serialize;

use crate::domain::{all_hypotheses, HypothesisIndex};
use crate::error::{Error, Result};
use crate::stats::{pairwise_sum, wilson_interval};

/// Limit on `k^d` for the dense eigendecomposition.
pub const DENSE_LIMIT: u64 = 2000;
/// Limit on `k^d` for the character Gram and eigenvector residual checks.
pub const CHARACTER_CHECK_LIMIT: u64 = 500;
/// Limit on `3^d` for per-node neighbor enumeration.
pub const NEIGHBOR_LIMIT: u64 = 1_000_000;
/// Limit on `k^d` for exact independence tabulation.
pub const INDEPENDENCE_LIMIT: u64 = 100_000;
/// Littlewood–Offord probabilities are computed exactly while `3^s` stays below this.
pub const LO_EXACT_LIMIT: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CayleyInstance {
    pub d: usize,
    pub k: u32,
}

impl CayleyInstance {
    pub fn new(d: usize, k: u32) -> Result<Self> {
        if d == 0 || k < 2 {
            return Err(Error::usage("Cayley instance needs d >= 1 and k >= 2"));
        }
        Ok(CayleyInstance { d, k })
    }

    pub fn generator_count(&self) -> u64 {
        3u64.pow(self.d as u32)
    }

    pub fn node_count(&self) -> Option<u64> {
        (self.k as u64).checked_pow(self.d as u32)
    }

    /// Generators in balanced ternary order (lexicographic with −1 < 0 < 1).
    pub fn generators(&self) -> impl Iterator<Item = Vec<i8>> + '_ {
        (0..self.generator_count()).map(move |mut t| {
            let mut z = vec![0i8; self.d];
            for slot in z.iter_mut().rev() {
                *slot = (t % 3) as i8 - 1;
                t /= 3;
            }
            z
        })
    }

    fn node_limit(&self, limit: u64, what: &'static str) -> Result<u64> {
        self.node_count()
            .filter(|&n| n <= limit)
            .ok_or_else(|| Error::resource(what, format!("{}^{} nodes", self.k, self.d), limit))
    }
}

/// `⟨v, z⟩ mod k` as a representative in `[0, k)`.
pub fn inner_product_mod(v: &[u32], z: &[i8], k: u32) -> u32 {
    let s: i64 = v.iter().zip(z).map(|(&a, &b)| a as i64 * b as i64).sum();
    s.rem_euclid(k as i64) as u32
}

/// `λ_v = |Z| − 2 Σ_{z∈Z} sin²(π⟨v,z⟩/k)`, summed over all generators.
pub fn analytic_eigenvalue(v: &[u32], d: usize, k: u32) -> f64 {
    let inst = CayleyInstance { d, k };
    let terms: Vec<f64> = inst
        .generators()
        .map(|z| {
            let s = (PI * inner_product_mod(v, &z, k) as f64 / k as f64).sin();
            s * s
        })
        .collect();
    inst.generator_count() as f64 - 2.0 * pairwise_sum(&terms)
}

/// `λ_v` via the product form `Π_i (1 + 2cos(2πv_i/k))`.
pub fn eigenvalue_product_form(v: &[u32], k: u32) -> f64 {
    v.iter()
        .map(|&x| 1.0 + 2.0 * (2.0 * PI * x as f64 / k as f64).cos())
        .product()
}

/// All `k^d` eigenvalues indexed by the lexicographic rank of `v`.
pub fn all_eigenvalues(d: usize, k: u32) -> Vec<f64> {
    all_hypotheses(d, k)
        .map(|v| eigenvalue_product_form(v.coords(), k))
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumReport {
    pub d: usize,
    pub k: u32,
    pub generator_count: u64,
    /// Analytic eigenvalues, sorted ascending.
    pub eigenvalues: Vec<f64>,
    /// Dense eigenvalues, sorted ascending.
    pub dense: Vec<f64>,
    /// Largest |analytic − dense| after sorting both.
    pub max_deviation: f64,
    pub trace: f64,
    /// Largest entry of |Gram(χ) − I|, when the instance is small enough.
    pub gram_deviation: Option<f64>,
    /// Largest |Aχ_v − λ_v χ_v| entry, when small enough.
    pub eigenvector_residual: Option<f64>,
    /// `(lower edge, upper edge, count)` over 20 equal-width buckets.
    pub histogram: Vec<(f64, f64, usize)>,
}

impl SpectrumReport {
    /// `rank,eigenvalue,dense` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("rank,eigenvalue,dense\n");
        for (i, (a, b)) in self.eigenvalues.iter().zip(&self.dense).enumerate() {
            out.push_str(&format!("{i},{},{}\n", crate::harness::fmt_g17(*a), crate::harness::fmt_g17(*b)));
        }
        out
    }
}

fn linear(coords: &[u32], k: u32) -> usize {
    coords.iter().fold(0usize, |acc, &c| acc * k as usize + c as usize)
}

fn shifted(u: &[u32], z: &[i8], k: u32) -> Vec<u32> {
    u.iter()
        .zip(z)
        .map(|(&a, &b)| (a as i64 + b as i64).rem_euclid(k as i64) as u32)
        .collect()
}

/// Dense adjacency matrix of `G` (rows and columns in lexicographic order).
pub fn adjacency_matrix(d: usize, k: u32) -> Result<DMatrix<f64>> {
    let inst = CayleyInstance::new(d, k)?;
    let n = inst.node_limit(DENSE_LIMIT, "dense adjacency matrix")? as usize;
    let gens: Vec<Vec<i8>> = inst.generators().collect();
    let mut a = DMatrix::<f64>::zeros(n, n);
    for u in all_hypotheses(d, k) {
        let i = linear(u.coords(), k);
        for z in &gens {
            a[(i, linear(&shifted(u.coords(), z, k), k))] += 1.0;
        }
    }
    Ok(a)
}

/// Compares the analytic spectrum with a dense eigendecomposition and checks
/// that the characters form an orthonormal eigenbasis.
pub fn eigen_check(d: usize, k: u32) -> Result<SpectrumReport> {
    let inst = CayleyInstance::new(d, k)?;
    let n = inst.node_limit(DENSE_LIMIT, "dense eigendecomposition")? as usize;
    let a = adjacency_matrix(d, k)?;
    let mut dense: Vec<f64> = SymmetricEigen::new(a.clone()).eigenvalues.iter().copied().collect();
    dense.sort_by(f64::total_cmp);
    let unsorted = all_eigenvalues(d, k);
    let trace = pairwise_sum(&unsorted);
    let mut eigenvalues = unsorted.clone();
    eigenvalues.sort_by(f64::total_cmp);
    let max_deviation = eigenvalues
        .iter()
        .zip(&dense)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);

    let (gram_deviation, eigenvector_residual) = if n as u64 <= CHARACTER_CHECK_LIMIT {
        let chars = character_table(d, k);
        (Some(gram_deviation(&chars)), Some(eigen_residual(&a, &chars, &unsorted)))
    } else {
        (None, None)
    };

    Ok(SpectrumReport {
        d,
        k,
        generator_count: inst.generator_count(),
        histogram: histogram(&eigenvalues, 20),
        eigenvalues,
        dense,
        max_deviation,
        trace,
        gram_deviation,
        eigenvector_residual,
    })
}

/// `chars[v][w] = (re, im)` of `χ_v(w)`.
fn character_table(d: usize, k: u32) -> Vec<Vec<(f64, f64)>> {
    let nodes: Vec<HypothesisIndex> = all_hypotheses(d, k).collect();
    let scale = (k as f64).powf(-(d as f64) / 2.0);
    nodes
        .iter()
        .map(|v| {
            nodes
                .iter()
                .map(|w| {
                    let ip: u64 = v.coords().iter().zip(w.coords()).map(|(&a, &b)| a as u64 * b as u64).sum();
                    let theta = 2.0 * PI * (ip % k as u64) as f64 / k as f64;
                    (scale * theta.cos(), scale * theta.sin())
                })
                .collect()
        })
        .collect()
}

fn gram_deviation(chars: &[Vec<(f64, f64)>]) -> f64 {
    let mut worst = 0.0f64;
    for (i, a) in chars.iter().enumerate() {
        for (j, b) in chars.iter().enumerate() {
            // ⟨a, b⟩ = Σ a(w) conj(b(w))
            let (mut re, mut im) = (0.0, 0.0);
            for (&(ar, ai), &(br, bi)) in a.iter().zip(b) {
                re += ar * br + ai * bi;
                im += ai * br - ar * bi;
            }
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((re - target).abs()).max(im.abs());
        }
    }
    worst
}

fn eigen_residual(a: &DMatrix<f64>, chars: &[Vec<(f64, f64)>], lambdas: &[f64]) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0f64;
    for (chi, &lambda) in chars.iter().zip(lambdas) {
        for w in 0..n {
            let (mut re, mut im) = (0.0, 0.0);
            for x in 0..n {
                let m = a[(w, x)];
                if m != 0.0 {
                    re += m * chi[x].0;
                    im += m * chi[x].1;
                }
            }
            worst = worst
                .max((re - lambda * chi[w].0).abs())
                .max((im - lambda * chi[w].1).abs());
        }
    }
    worst
}

fn histogram(sorted: &[f64], buckets: usize) -> Vec<(f64, f64, usize)> {
    let (lo, hi) = (sorted[0], sorted[sorted.len() - 1]);
    let width = ((hi - lo) / buckets as f64).max(f64::MIN_POSITIVE);
    let mut counts = vec![0usize; buckets];
    for &x in sorted {
        let b = (((x - lo) / width) as usize).min(buckets - 1);
        counts[b] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(i, c)| (lo + i as f64 * width, lo + (i + 1) as f64 * width, c))
        .collect()
}

fn node_set(t: &[HypothesisIndex], d: usize, k: u32) -> Result<HashSet<Vec<u32>>> {
    if t.is_empty() {
        return Err(Error::usage("node set must be nonempty"));
    }
    if let Some(bad) = t.iter().find(|u| u.d() != d || u.k() != k) {
        return Err(Error::usage(format!("node {bad} is not in Z_{k}^{d}")));
    }
    let inst = CayleyInstance::new(d, k)?;
    if inst.generator_count() > NEIGHBOR_LIMIT {
        return Err(Error::resource("neighbor enumeration", format!("3^{d}"), NEIGHBOR_LIMIT));
    }
    Ok(t.iter().map(|u| u.coords().to_vec()).collect())
}

/// Directed pairs `(u, v)` with `u, v ∈ T` and `v − u ∈ Z`; `⟨A 1_T, 1_T⟩`.
pub fn internal_edge_count(t: &[HypothesisIndex], d: usize, k: u32) -> Result<u64> {
    let set = node_set(t, d, k)?;
    let inst = CayleyInstance { d, k };
    let gens: Vec<Vec<i8>> = inst.generators().collect();
    Ok(set
        .iter()
        .map(|u| gens.iter().filter(|z| set.contains(&shifted(u, z, k))).count() as u64)
        .sum())
}

/// Directed edges leaving `T`.
pub fn escaping_edge_count(t: &[HypothesisIndex], d: usize, k: u32) -> Result<u64> {
    let set = node_set(t, d, k)?;
    let inst = CayleyInstance { d, k };
    let gens: Vec<Vec<i8>> = inst.generators().collect();
    Ok(set
        .iter()
        .map(|u| gens.iter().filter(|z| !set.contains(&shifted(u, z, k))).count() as u64)
        .sum())
}

/// Internal fraction `internal_edge_count(T) / (|T||Z|)`.
pub fn expansion_ratio(t: &[HypothesisIndex], d: usize, k: u32) -> Result<f64> {
    let internal = internal_edge_count(t, d, k)?;
    let size = node_set(t, d, k)?.len() as f64;
    Ok(internal as f64 / (size * 3f64.powi(d as i32)))
}

/// The middle interval `I = {⌊k/4⌋+1, …, ⌊k/4⌋+⌊k/2⌋}`.
pub fn tail_interval(k: u32) -> std::ops::RangeInclusive<u32> {
    (k / 4 + 1)..=(k / 4 + k / 2)
}

/// `counts[r]` = number of `z ∈ Z` with `⟨u, z⟩ ≡ r (mod k)`.
pub fn inner_product_histogram(u: &[u32], k: u32) -> Vec<u64> {
    let kk = k as usize;
    let mut counts = vec![0u64; kk];
    counts[0] = 1;
    for &c in u {
        let c = c as usize % kk;
        let mut next = vec![0u64; kk];
        for (r, &n) in counts.iter().enumerate() {
            if n == 0 {
                continue;
            }
            next[r] += n;
            next[(r + c) % kk] += n;
            next[(r + kk - c) % kk] += n;
        }
        counts = next;
    }
    counts
}

/// `Σ_{z∈Z} X_z` with `X_z = 1` iff `⟨u,z⟩ mod k ∉ I`.
pub fn indicator_sum(u: &[u32], k: u32) -> u64 {
    let interval = tail_interval(k);
    inner_product_histogram(u, k)
        .iter()
        .enumerate()
        .filter(|(r, _)| !interval.contains(&(*r as u32)))
        .map(|(_, &n)| n)
        .sum()
}

/// `λ_u` from the inner-product histogram: `Σ_r counts[r] cos(2πr/k)`.
pub fn eigenvalue_from_histogram(counts: &[u64], k: u32) -> f64 {
    let terms: Vec<f64> = counts
        .iter()
        .enumerate()
        .map(|(r, &n)| n as f64 * (2.0 * PI * r as f64 / k as f64).cos())
        .collect();
    pairwise_sum(&terms)
}

#[derive(Debug, Clone, Serialize)]
pub struct TailReport {
    pub d: usize,
    pub k: u32,
    pub r: u32,
    pub trials: usize,
    /// Estimate of `p = Pr[Σ X_z ≥ (42/50)|Z|]`.
    pub p_hat: f64,
    pub p_ci: (f64, f64),
    /// `E[Σ X_z]`, exact.
    pub mean: f64,
    /// Estimate of `E[|Σ X_z − E Σ X_z|^r]`.
    pub central_moment: f64,
    /// Sampled `u` with `λ_u > (46/50)|Z|` but `Σ X_z < (42/50)|Z|`.
    pub violations: u64,
    /// Sampled `u` with `λ_u > (46/50)|Z|`.
    pub large_eigenvalues: u64,
}

impl TailReport {
    pub fn to_csv(&self) -> String {
        use crate::harness::fmt_g17 as g;
        format!(
            "d,k,r,trials,p_hat,p_lo,p_hi,mean,central_moment,violations,large_eigenvalues\n{},{},{},{},{},{},{},{},{},{},{}\n",
            self.d,
            self.k,
            self.r,
            self.trials,
            g(self.p_hat),
            g(self.p_ci.0),
            g(self.p_ci.1),
            g(self.mean),
            g(self.central_moment),
            self.violations,
            self.large_eigenvalues
        )
    }
}

/// Exact `E[Σ_z X_z]` over uniform `u`: the zero generator always counts and
/// every other `⟨u, z⟩` is uniform on `F_k`.
pub fn indicator_mean(d: usize, k: u32) -> f64 {
    let outside = 1.0 - (k / 2) as f64 / k as f64;
    1.0 + (3f64.powi(d as i32) - 1.0) * outside
}

/// Monte Carlo estimates of the tail probability `p` and the `r`-th central
/// moment of `Σ X_z` over uniform `u`, plus a pointwise check that
/// `λ_u > (46/50)|Z|` implies `Σ X_z ≥ (42/50)|Z|`.
pub fn tail_and_moment_estimate<R: Rng + ?Sized>(
    d: usize,
    k: u32,
    r: u32,
    trials: usize,
    rng: &mut R,
) -> Result<TailReport> {
    if r == 0 || r % 2 == 1 {
        return Err(Error::usage(format!("moment order must be a positive even integer, got {r}")));
    }
    if trials == 0 {
        return Err(Error::usage("trials must be positive"));
    }
    let inst = CayleyInstance::new(d, k)?;
    let z = inst.generator_count();
    let mean = indicator_mean(d, k);
    let interval = tail_interval(k);
    let mut tail_hits = 0u64;
    let mut violations = 0u64;
    let mut large = 0u64;
    let mut powers = Vec::with_capacity(trials);
    let mut u = vec![0u32; d];
    for _ in 0..trials {
        for c in u.iter_mut() {
            *c = rng.random_range(0..k);
        }
        let hist = inner_product_histogram(&u, k);
        let sum: u64 = hist
            .iter()
            .enumerate()
            .filter(|(r, _)| !interval.contains(&(*r as u32)))
            .map(|(_, &n)| n)
            .sum();
        let in_tail = 50 * sum >= 42 * z;
        if in_tail {
            tail_hits += 1;
        }
        if eigenvalue_from_histogram(&hist, k) > 46.0 / 50.0 * z as f64 {
            large += 1;
            if !in_tail {
                violations += 1;
            }
        }
        powers.push((sum as f64 - mean).abs().powi(r as i32));
    }
    Ok(TailReport {
        d,
        k,
        r,
        trials,
        p_hat: tail_hits as f64 / trials as f64,
        p_ci: wilson_interval(tail_hits, trials as u64),
        mean,
        central_moment: pairwise_sum(&powers) / trials as f64,
        violations,
        large_eigenvalues: large,
    })
}

fn inv_mod(a: u64, k: u64) -> u64 {
    // Fermat: a^(k-2) mod k for prime k
    let (mut base, mut exp, mut acc) = (a % k, k - 2, 1u64);
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % k;
        }
        base = base * base % k;
        exp >>= 1;
    }
    acc
}

/// Rank over `F_k` (prime `k`) by Gaussian elimination. Entries are reduced
/// mod `k` first.
pub fn rank_mod_k(rows: &[Vec<i64>], k: u32) -> usize {
    let kk = k as u64;
    let mut m: Vec<Vec<u64>> = rows
        .iter()
        .map(|r| r.iter().map(|&x| x.rem_euclid(k as i64) as u64).collect())
        .collect();
    let ncols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..ncols {
        let Some(pivot) = (rank..m.len()).find(|&i| m[i][col] != 0) else {
            continue;
        };
        m.swap(rank, pivot);
        let inv = inv_mod(m[rank][col], kk);
        for x in m[rank].iter_mut() {
            *x = *x * inv % kk;
        }
        let pivot_row = m[rank].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i == rank || row[col] == 0 {
                continue;
            }
            let f = row[col];
            for (x, &p) in row.iter_mut().zip(&pivot_row) {
                *x = (*x + kk * kk - f * p) % kk;
            }
        }
        rank += 1;
        if rank == m.len() {
            break;
        }
    }
    rank
}

#[derive(Debug, Clone, Serialize)]
pub struct LowRankReport {
    pub d: usize,
    pub r: usize,
    pub k: u32,
    pub trials: usize,
    /// `r − log₃ d`.
    pub threshold: f64,
    pub low_rank: u64,
    pub fraction: f64,
    pub ci: (f64, f64),
    /// `d^{−d/2}/d`, the claimed fraction bound (meaningful for `r ≤ d/2`).
    pub bound: f64,
    pub bound_applicable: bool,
    /// `rank_histogram[q]` = trials with rank `q`.
    pub rank_histogram: Vec<u64>,
}

/// Draws `Y ∈ Z^r` (columns uniform on `{−1,0,1}^d`) and estimates the fraction
/// with `rank(Y) ≤ r − log₃ d` over `F_k`.
pub fn low_rank_fraction_estimate<R: Rng + ?Sized>(
    d: usize,
    r: usize,
    k: u32,
    trials: usize,
    rng: &mut R,
) -> Result<LowRankReport> {
    if r == 0 || r > d {
        return Err(Error::usage(format!("need 1 <= r <= d, got r={r}, d={d}")));
    }
    if trials == 0 {
        return Err(Error::usage("trials must be positive"));
    }
    if !crate::domain::is_prime(k as u64) {
        return Err(Error::usage(format!("k must be prime, got {k}")));
    }
    let threshold = r as f64 - (d as f64).ln() / 3f64.ln();
    let mut hist = vec![0u64; r.min(d) + 1];
    let mut low = 0u64;
    for _ in 0..trials {
        let rows: Vec<Vec<i64>> = (0..d)
            .map(|_| (0..r).map(|_| rng.random_range(-1i64..=1)).collect())
            .collect();
        let rank = rank_mod_k(&rows, k);
        hist[rank] += 1;
        if rank as f64 <= threshold + 1e-12 {
            low += 1;
        }
    }
    let df = d as f64;
    Ok(LowRankReport {
        d,
        r,
        k,
        trials,
        threshold,
        low_rank: low,
        fraction: low as f64 / trials as f64,
        ci: wilson_interval(low, trials as u64),
        bound: df.powf(-df / 2.0) / df,
        bound_applicable: 2 * r <= d,
        rank_histogram: hist,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct LittlewoodOffordReport {
    pub s: usize,
    pub k: u32,
    pub target: u32,
    pub estimate: f64,
    /// Standard error of the estimate (0 when exact).
    pub sigma: f64,
    pub exact: bool,
    /// `min{1/2, 1/k + e^{−s/8} + √(32/s)}`.
    pub bound: f64,
    /// `estimate ≤ bound + 3σ`.
    pub within_bound: bool,
}

pub fn littlewood_offord_bound(s: usize, k: u32) -> f64 {
    let s = s as f64;
    (1.0 / k as f64 + (-s / 8.0).exp() + (32.0 / s).sqrt()).min(0.5)
}

/// `Pr[Σ ε_i x_i = y]` over `ε_i` uniform on `{−1, 0, 1}`, exactly (by
/// convolution over `F_k`) while `3^s ≤ 10^6`, otherwise by Monte Carlo.
pub fn littlewood_offord_estimate<R: Rng + ?Sized>(
    x: &[u32],
    y: u32,
    k: u32,
    trials: usize,
    rng: &mut R,
) -> Result<LittlewoodOffordReport> {
    if x.is_empty() {
        return Err(Error::usage("need at least one coefficient"));
    }
    if let Some(i) = x.iter().position(|&c| c % k == 0) {
        return Err(Error::usage(format!("coefficient x_{i} is zero mod {k}")));
    }
    let s = x.len();
    let y = y % k;
    let bound = littlewood_offord_bound(s, k);
    let exact = 3f64.powi(s as i32) <= LO_EXACT_LIMIT as f64;
    let (estimate, sigma) = if exact {
        let counts = inner_product_histogram(x, k);
        let total: u64 = counts.iter().sum();
        (counts[y as usize] as f64 / total as f64, 0.0)
    } else {
        if trials == 0 {
            return Err(Error::usage("trials must be positive for the Monte Carlo path"));
        }
        let kk = k as i64;
        let hits = (0..trials)
            .filter(|_| {
                let sum: i64 = x.iter().map(|&c| c as i64 * rng.random_range(-1i64..=1)).sum();
                sum.rem_euclid(kk) as u32 == y
            })
            .count();
        let p = hits as f64 / trials as f64;
        (p, (p * (1.0 - p) / trials as f64).sqrt())
    };
    Ok(LittlewoodOffordReport {
        s,
        k,
        target: y,
        estimate,
        sigma,
        exact,
        bound,
        within_bound: estimate <= bound + 3.0 * sigma,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum IndependenceVerdict {
    /// `y_1 ∉ span(y_2, …)` and the joint law factorizes exactly.
    Independent { first_marginal_uniform: bool, rest_support: usize },
    /// `y_1 ∉ span(y_2, …)` but the tabulated law does not factorize.
    Dependent { worst_cell: (u32, Vec<u32>) },
    /// `y_1 ∈ span(y_2, …)`: independence is not claimed.
    InSpan,
}

/// Enumerates all `v ∈ F_k^d` and tests whether `⟨y_1, v⟩` is independent of
/// `(⟨y_2, v⟩, …)` by exact factorization of the joint counts.
pub fn inner_product_independence_check(ys: &[Vec<u32>], k: u32) -> Result<IndependenceVerdict> {
    let Some(first) = ys.first() else {
        return Err(Error::usage("need at least one vector"));
    };
    let d = first.len();
    if d == 0 || ys.iter().any(|y| y.len() != d) {
        return Err(Error::usage("vectors must share a positive dimension"));
    }
    if !crate::domain::is_prime(k as u64) {
        return Err(Error::usage(format!("k must be prime, got {k}")));
    }
    let inst = CayleyInstance::new(d, k)?;
    inst.node_limit(INDEPENDENCE_LIMIT, "independence tabulation")?;
    let to_rows = |vs: &[Vec<u32>]| -> Vec<Vec<i64>> { vs.iter().map(|v| v.iter().map(|&x| x as i64).collect()).collect() };
    let rest = &ys[1..];
    let rank_rest = if rest.is_empty() { 0 } else { rank_mod_k(&to_rows(rest), k) };
    if rank_mod_k(&to_rows(ys), k) != rank_rest + 1 {
        return Ok(IndependenceVerdict::InSpan);
    }
    let dot = |y: &[u32], v: &[u32]| -> u32 {
        (y.iter().zip(v).map(|(&a, &b)| a as u64 * b as u64).sum::<u64>() % k as u64) as u32
    };
    let mut joint: HashMap<(u32, Vec<u32>), u64> = HashMap::new();
    let mut first_marg = vec![0u64; k as usize];
    let mut rest_marg: HashMap<Vec<u32>, u64> = HashMap::new();
    let mut total = 0u64;
    for v in all_hypotheses(d, k) {
        let a = dot(first, v.coords());
        let b: Vec<u32> = rest.iter().map(|y| dot(y, v.coords())).collect();
        first_marg[a as usize] += 1;
        *rest_marg.entry(b.clone()).or_insert(0) += 1;
        *joint.entry((a, b)).or_insert(0) += 1;
        total += 1;
    }
    for a in 0..k {
        for (b, &mb) in &rest_marg {
            let j = joint.get(&(a, b.clone())).copied().unwrap_or(0);
            if j as u128 * total as u128 != first_marg[a as usize] as u128 * mb as u128 {
                return Ok(IndependenceVerdict::Dependent { worst_cell: (a, b.clone()) });
            }
        }
    }
    let uniform = first_marg.iter().all(|&c| c * k as u64 == total);
    Ok(IndependenceVerdict::Independent { first_marginal_uniform: uniform, rest_support: rest_marg.len() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigenvalue_examples() {
        assert_eq!(analytic_eigenvalue(&[0, 0, 0], 3, 5), 27.0);
        assert!(analytic_eigenvalue(&[1], 1, 3).abs() < 1e-12);
        let golden = 3.0 - 4.0 * (PI / 5.0).sin().powi(2);
        assert!((analytic_eigenvalue(&[1], 1, 5) - golden).abs() < 1e-12);
        assert!((golden - 1.618_033_988_7).abs() < 1e-9);
        assert!((golden - (1.0 + 2.0 * (2.0 * PI / 5.0).cos())).abs() < 1e-12);
    }

    #[test]
    fn product_form_matches_sum_form() {
        for (d, k) in [(1, 3), (2, 5), (3, 7), (2, 11)] {
            for v in all_hypotheses(d, k) {
                let a = analytic_eigenvalue(v.coords(), d, k);
                let b = eigenvalue_product_form(v.coords(), k);
                assert!((a - b).abs() < 1e-9, "{v}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn generators_balanced_ternary() {
        let inst = CayleyInstance::new(2, 5).unwrap();
        let g: Vec<Vec<i8>> = inst.generators().collect();
        assert_eq!(g.len(), 9);
        assert_eq!(g[0], vec![-1, -1]);
        assert_eq!(g[4], vec![0, 0]);
        assert_eq!(g[8], vec![1, 1]);
    }

    #[test]
    fn small_spectrum_check() {
        let r = eigen_check(1, 3).unwrap();
        assert!(r.max_deviation < 1e-9);
        assert!((r.eigenvalues[2] - 3.0).abs() < 1e-12);
        assert!(r.eigenvalues[0].abs() < 1e-12 && r.eigenvalues[1].abs() < 1e-12);
        let r = eigen_check(2, 3).unwrap();
        assert!((r.trace - 9.0).abs() < 1e-9);
        let r = eigen_check(1, 5).unwrap();
        assert!(r.gram_deviation.unwrap() < 1e-9);
        assert!(r.eigenvector_residual.unwrap() < 1e-9);
        assert!(matches!(eigen_check(4, 11), Err(Error::Resource { .. })));
    }

    #[test]
    fn edge_counts() {
        let all: Vec<HypothesisIndex> = all_hypotheses(2, 5).collect();
        assert_eq!(internal_edge_count(&all, 2, 5).unwrap(), 25 * 9);
        assert_eq!(expansion_ratio(&all, 2, 5).unwrap(), 1.0);
        let single = vec![HypothesisIndex::new(vec![2, 3], 5).unwrap()];
        assert_eq!(internal_edge_count(&single, 2, 5).unwrap(), 1);
        assert!((expansion_ratio(&single, 2, 5).unwrap() - 1.0 / 9.0).abs() < 1e-15);
        let pair = vec![HypothesisIndex::new(vec![0], 5).unwrap(), HypothesisIndex::new(vec![1], 5).unwrap()];
        assert_eq!(internal_edge_count(&pair, 1, 5).unwrap(), 4);
        assert!(internal_edge_count(&[], 1, 5).is_err());
    }

    #[test]
    fn indicator_examples() {
        assert_eq!(indicator_sum(&[0, 0, 0], 7), 27);
        assert_eq!(tail_interval(5), 2..=3);
        assert_eq!(indicator_sum(&[1], 5), 3);
        assert_eq!(indicator_sum(&[2], 5), 1);
    }

    #[test]
    fn odd_moment_rejected() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        assert!(tail_and_moment_estimate(2, 5, 3, 10, &mut rng).is_err());
    }

    #[test]
    fn rank_examples() {
        let id: Vec<Vec<i64>> = (0..4).map(|i| (0..4).map(|j| (i == j) as i64).collect()).collect();
        assert_eq!(rank_mod_k(&id, 5), 4);
        assert_eq!(rank_mod_k(&[vec![1, 1], vec![2, 2]], 3), 1);
        assert_eq!(rank_mod_k(&[vec![0, 0], vec![0, 0]], 3), 0);
        // (1,1) and (1,-1) are independent mod 3 but (1,2) ≡ (1,-1)
        assert_eq!(rank_mod_k(&[vec![1, 1], vec![1, -1]], 3), 2);
        assert_eq!(rank_mod_k(&[vec![1, 2], vec![1, -1]], 3), 1);
    }

    #[test]
    fn littlewood_offord_examples() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let r = littlewood_offord_estimate(&[4], 0, 7, 0, &mut rng).unwrap();
        assert!(r.exact);
        assert!((r.estimate - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(r.bound, 0.5);
        let r = littlewood_offord_estimate(&[1, 1], 0, 5, 0, &mut rng).unwrap();
        assert!((r.estimate - 1.0 / 3.0).abs() < 1e-15);
        assert!(littlewood_offord_estimate(&[1, 5], 0, 5, 0, &mut rng).is_err());
    }

    #[test]
    fn independence_examples() {
        let v = inner_product_independence_check(&[vec![1, 0], vec![0, 1]], 3).unwrap();
        assert_eq!(v, IndependenceVerdict::Independent { first_marginal_uniform: true, rest_support: 3 });
        let v = inner_product_independence_check(&[vec![1, 1], vec![1, 1]], 3).unwrap();
        assert_eq!(v, IndependenceVerdict::InSpan);
        // det = 1 - 6 = -5
        let v = inner_product_independence_check(&[vec![1, 2], vec![3, 1]], 5).unwrap();
        assert_eq!(v, IndependenceVerdict::InSpan);
        let v = inner_product_independence_check(&[vec![1, 2], vec![3, 2]], 5).unwrap();
        assert!(matches!(v, IndependenceVerdict::Independent { .. }));
    }

    use rand::SeedableRng;
}
