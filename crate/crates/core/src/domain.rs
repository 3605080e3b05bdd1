//! The hard instance: domain `[d] × Z_k`, the wrap-around interval hypotheses
//! `h_i`, the metric `ν`, exact errors and uniform sampling.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Instance parameters plus the tuning constants the learner and harness use.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Params {
    d: usize,
    k: u32,
    epsilon: f64,
    rho: f64,
    delta: f64,
    n: usize,
    beta_constant: f64,
    radius_fraction: f64,
    ball_cap: u64,
}

pub const DEFAULT_RADIUS_FRACTION: f64 = 0.25;
pub const DEFAULT_BETA_CONSTANT: f64 = 0.1;
pub const DEFAULT_BALL_CAP: u64 = 100_000_000;

fn open_unit(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x < 1.0 {
        Ok(())
    } else {
        Err(Error::usage(format!("{name} must lie strictly inside (0,1), got {x}")))
    }
}

impl Params {
    pub fn new(d: usize, k: u32, epsilon: f64, rho: f64, delta: f64, n: usize) -> Result<Self> {
        let p = Params {
            d,
            k,
            epsilon,
            rho,
            delta,
            n,
            beta_constant: DEFAULT_BETA_CONSTANT,
            radius_fraction: DEFAULT_RADIUS_FRACTION,
            ball_cap: DEFAULT_BALL_CAP,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::usage("d must be at least 1"));
        }
        if self.k < 3 || !is_prime(self.k as u64) {
            return Err(Error::usage(format!("k must be a prime >= 3, got {}", self.k)));
        }
        open_unit("epsilon", self.epsilon)?;
        open_unit("rho", self.rho)?;
        open_unit("delta", self.delta)?;
        if !(self.beta_constant > 0.0 && self.beta_constant.is_finite()) {
            return Err(Error::usage("beta_constant must be positive"));
        }
        if !(self.radius_fraction > 0.0 && self.radius_fraction.is_finite()) {
            return Err(Error::usage("radius_fraction must be positive"));
        }
        if self.ball_cap == 0 {
            return Err(Error::usage("ball_cap must be positive"));
        }
        Ok(())
    }

    pub fn with_n(mut self, n: usize) -> Self {
        self.n = n;
        self
    }

    pub fn with_radius_fraction(mut self, f: f64) -> Result<Self> {
        self.radius_fraction = f;
        self.validate()?;
        Ok(self)
    }

    pub fn with_beta_constant(mut self, c: f64) -> Result<Self> {
        self.beta_constant = c;
        self.validate()?;
        Ok(self)
    }

    pub fn with_ball_cap(mut self, cap: u64) -> Result<Self> {
        self.ball_cap = cap;
        self.validate()?;
        Ok(self)
    }

    pub fn d(&self) -> usize {
        self.d
    }
    pub fn k(&self) -> u32 {
        self.k
    }
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
    pub fn rho(&self) -> f64 {
        self.rho
    }
    pub fn delta(&self) -> f64 {
        self.delta
    }
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn beta_constant(&self) -> f64 {
        self.beta_constant
    }
    pub fn radius_fraction(&self) -> f64 {
        self.radius_fraction
    }
    pub fn ball_cap(&self) -> u64 {
        self.ball_cap
    }

    /// `⌊k/2⌋`, the interval length and the largest per-coordinate distance.
    pub fn half(&self) -> u32 {
        self.k / 2
    }

    /// Number of domain points `d·k`.
    pub fn domain_size(&self) -> usize {
        self.d * self.k as usize
    }

    /// Acceptance radius `⌊ε·k·d·radius_fraction⌋`.
    pub fn radius(&self) -> u64 {
        let raw = self.epsilon * self.k as f64 * self.d as f64 * self.radius_fraction;
        // absorb representation error such as 0.3*10*4*0.25 = 2.9999999999999996
        (raw * (1.0 + 1e-12)).floor() as u64
    }

    /// Largest value `ν` can take on `Z_k^d`.
    pub fn max_distance(&self) -> u64 {
        self.d as u64 * self.half() as u64
    }

    /// `β = c · min{ερ/√(d ln(2/ρ)), ερ/ln(4/ρ)}` with `c = beta_constant`.
    pub fn beta(&self) -> f64 {
        let (e, r, d) = (self.epsilon, self.rho, self.d as f64);
        let a = e * r / (d * (2.0 / r).ln()).sqrt();
        let b = e * r / (4.0 / r).ln();
        self.beta_constant * a.min(b)
    }
}

/// Smallest prime `>= target`.
pub fn choose_prime_k(target: u64) -> u64 {
    let mut c = target.max(2);
    while !is_prime(c) {
        c += 1;
    }
    c
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut f = 3u64;
    while f.saturating_mul(f) <= n {
        if n.is_multiple_of(f) {
            return false;
        }
        f += 2;
    }
    true
}

/// Cyclic distance `min((x−y) mod k, (y−x) mod k)` between representatives.
#[inline]
pub fn wrap_distance(x: u32, y: u32, k: u32) -> u32 {
    debug_assert!(x < k && y < k);
    let diff = x.abs_diff(y);
    diff.min(k - diff)
}

/// A `d`-tuple over `Z_k` naming the hypothesis `h_i`. Coordinates are kept
/// as canonical representatives in `[0, k)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct HypothesisIndex {
    coords: Vec<u32>,
    k: u32,
}

impl HypothesisIndex {
    pub fn new(coords: Vec<u32>, k: u32) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::usage("hypothesis index needs at least one coordinate"));
        }
        if let Some(c) = coords.iter().find(|&&c| c >= k) {
            return Err(Error::usage(format!("coordinate {c} is not a representative mod {k}")));
        }
        Ok(HypothesisIndex { coords, k })
    }

    /// Builds an index from arbitrary integers, reducing each mod `k`.
    pub fn reduced(coords: &[i64], k: u32) -> Self {
        let coords = coords
            .iter()
            .map(|&c| c.rem_euclid(k as i64) as u32)
            .collect();
        HypothesisIndex { coords, k }
    }

    pub fn zero(d: usize, k: u32) -> Self {
        HypothesisIndex { coords: vec![0; d], k }
    }

    pub fn coords(&self) -> &[u32] {
        &self.coords
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn d(&self) -> usize {
        self.coords.len()
    }

    /// Mixed-radix rank with coordinate 0 most significant (lexicographic order).
    pub fn to_linear(&self) -> u64 {
        self.coords
            .iter()
            .fold(0u64, |acc, &c| acc * self.k as u64 + c as u64)
    }

    pub fn from_linear(mut idx: u64, d: usize, k: u32) -> Self {
        let mut coords = vec![0u32; d];
        for slot in coords.iter_mut().rev() {
            *slot = (idx % k as u64) as u32;
            idx /= k as u64;
        }
        HypothesisIndex { coords, k }
    }

    /// `self + offset (mod k)` coordinatewise.
    pub fn shifted(&self, offset: &[i64]) -> Self {
        assert_eq!(offset.len(), self.coords.len(), "offset length mismatch");
        let k = self.k as i64;
        let coords = self
            .coords
            .iter()
            .zip(offset)
            .map(|(&c, &o)| (c as i64 + o).rem_euclid(k) as u32)
            .collect();
        HypothesisIndex { coords, k: self.k }
    }

    pub fn random<R: Rng + ?Sized>(d: usize, k: u32, rng: &mut R) -> Self {
        let coords = (0..d).map(|_| rng.random_range(0..k)).collect();
        HypothesisIndex { coords, k }
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.k != other.k || self.coords.len() != other.coords.len() {
            return Err(Error::usage(format!(
                "incompatible tuples: (d={}, k={}) vs (d={}, k={})",
                self.coords.len(),
                self.k,
                other.coords.len(),
                other.k
            )));
        }
        Ok(())
    }
}

impl fmt::Display for HypothesisIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Every tuple of `Z_k^d` in lexicographic order.
pub fn all_hypotheses(d: usize, k: u32) -> impl Iterator<Item = HypothesisIndex> {
    let total = (k as u64).pow(d as u32);
    (0..total).map(move |i| HypothesisIndex::from_linear(i, d, k))
}

/// Wrap-around ℓ1 distance `ν(u, v) = Σ_a wrap_distance(u_a, v_a)`.
pub fn tuple_distance(u: &HypothesisIndex, v: &HypothesisIndex) -> Result<u64> {
    u.check_compatible(v)?;
    Ok(tuple_distance_unchecked(&u.coords, &v.coords, u.k))
}

#[inline]
pub fn tuple_distance_unchecked(u: &[u32], v: &[u32], k: u32) -> u64 {
    u.iter()
        .zip(v)
        .map(|(&a, &b)| wrap_distance(a, b, k) as u64)
        .sum()
}

/// A point `(a, b)` of the domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Point {
    pub axis: u32,
    pub position: u32,
}

impl Point {
    pub fn new(axis: u32, position: u32) -> Self {
        Point { axis, position }
    }
}

/// `h_i((a, b)) = 1` iff `(b − i_a) mod k < ⌊k/2⌋`.
#[inline]
pub fn evaluate_hypothesis(i: &HypothesisIndex, p: Point) -> bool {
    label_at(i.coords[p.axis as usize], p.position, i.k)
}

#[inline]
pub(crate) fn label_at(start: u32, position: u32, k: u32) -> bool {
    (position + k - start) % k < k / 2
}

/// A full labeling of the domain, stored at `a·k + b`. Orders as a bit string.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Labeling {
    d: usize,
    k: u32,
    bits: Vec<bool>,
}

impl Labeling {
    pub fn new(d: usize, k: u32, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != d * k as usize {
            return Err(Error::usage(format!(
                "labeling has {} entries, domain has {}",
                bits.len(),
                d * k as usize
            )));
        }
        Ok(Labeling { d, k, bits })
    }

    pub fn of(h: &HypothesisIndex) -> Self {
        let k = h.k;
        let bits = h
            .coords
            .iter()
            .flat_map(|&start| (0..k).map(move |b| label_at(start, b, k)))
            .collect();
        Labeling { d: h.d(), k, bits }
    }

    pub fn complement(&self) -> Self {
        Labeling {
            d: self.d,
            k: self.k,
            bits: self.bits.iter().map(|b| !b).collect(),
        }
    }

    pub fn get(&self, p: Point) -> bool {
        self.bits[p.axis as usize * self.k as usize + p.position as usize]
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn to_bit_string(&self) -> String {
        self.bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }
}

/// `er_{h_u}(h_v) = 2ν(u, v)/(kd)`: the disagreement mass under the uniform law.
pub fn exact_error(u: &HypothesisIndex, v: &HypothesisIndex) -> Result<f64> {
    let nu = tuple_distance(u, v)?;
    Ok(2.0 * nu as f64 / (u.k as f64 * u.d() as f64))
}

/// Fraction of domain points where `f` disagrees with `h_u`.
pub fn error_vs_labeling(f: &Labeling, u: &HypothesisIndex) -> Result<f64> {
    if f.d != u.d() || f.k != u.k {
        return Err(Error::usage(format!(
            "labeling shape (d={}, k={}) does not match hypothesis (d={}, k={})",
            f.d,
            f.k,
            u.d(),
            u.k
        )));
    }
    let own = Labeling::of(u);
    let wrong = own.bits.iter().zip(&f.bits).filter(|(a, b)| a != b).count();
    Ok(wrong as f64 / f.bits.len() as f64)
}

/// A multiset of labeled points, in draw order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledSample {
    d: usize,
    k: u32,
    points: Vec<(Point, bool)>,
}

impl LabeledSample {
    /// Checked constructor: every label must equal `h_target(point)`.
    pub fn new(target: &HypothesisIndex, points: Vec<(Point, bool)>) -> Result<Self> {
        let s = Self::from_raw(target.d(), target.k, points)?;
        if let Some((p, l)) = s.points.iter().find(|(p, l)| evaluate_hypothesis(target, *p) != *l) {
            return Err(Error::usage(format!(
                "label {} at ({}, {}) disagrees with target {target}",
                *l as u8, p.axis, p.position
            )));
        }
        Ok(s)
    }

    /// Labels each point with `h_target`.
    pub fn labeled_by(target: &HypothesisIndex, points: &[Point]) -> Result<Self> {
        let labeled = points
            .iter()
            .map(|&p| (p, evaluate_hypothesis(target, p)))
            .collect();
        Self::from_raw(target.d(), target.k, labeled)
    }

    /// Accepts arbitrary labels (for corrupted or externally supplied data);
    /// only the point ranges are checked.
    pub fn from_raw(d: usize, k: u32, points: Vec<(Point, bool)>) -> Result<Self> {
        if let Some((p, _)) = points
            .iter()
            .find(|(p, _)| p.axis as usize >= d || p.position >= k)
        {
            return Err(Error::usage(format!(
                "point ({}, {}) outside [{d}] x Z_{k}",
                p.axis, p.position
            )));
        }
        Ok(LabeledSample { d, k, points })
    }

    pub fn empty(d: usize, k: u32) -> Self {
        LabeledSample { d, k, points: Vec::new() }
    }

    pub fn points(&self) -> &[(Point, bool)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// Presence table over the domain, indexed `a·k + b`.
    pub fn coverage(&self) -> Vec<bool> {
        let mut seen = vec![false; self.d * self.k as usize];
        for (p, _) in &self.points {
            seen[p.axis as usize * self.k as usize + p.position as usize] = true;
        }
        seen
    }
}

/// Draws `n` i.i.d. uniform points of `[d] × Z_k` labeled by `h_target`.
pub fn sample_training_set<R: Rng + ?Sized>(
    params: &Params,
    target: &HypothesisIndex,
    rng: &mut R,
) -> LabeledSample {
    sample_n(params.d, params.k, params.n, target, rng)
}

pub(crate) fn sample_n<R: Rng + ?Sized>(
    d: usize,
    k: u32,
    n: usize,
    target: &HypothesisIndex,
    rng: &mut R,
) -> LabeledSample {
    let size = d as u32 * k;
    let points = (0..n)
        .map(|_| {
            let x = rng.random_range(0..size);
            let p = Point::new(x / k, x % k);
            (p, evaluate_hypothesis(target, p))
        })
        .collect();
    LabeledSample { d, k, points }
}
