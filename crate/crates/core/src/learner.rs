//! The replicable learner: estimate the interval starts from the sample, then
//! return the first hypothesis of a shared random shuffle that lies within the
//! acceptance radius of the estimate.
//!
//! The shuffle is never materialized. Each hypothesis gets a keyed 64-bit
//! priority (see [`crate::prf`]) and the shuffle order is ascending
//! `(priority, coords)`, so "first accepted" is the priority minimum over the
//! acceptance ball.

use std::collections::{BTreeMap, HashMap};

use num_traits::ToPrimitive;
use rand::Rng;
use serde::Serialize;

use crate::balls::wrap_ball_count;
use crate::domain::{
    all_hypotheses, error_vs_labeling, exact_error, HypothesisIndex, LabeledSample, Labeling, Params, Point,
};
use crate::error::{Error, Result};
use crate::prf::{self, mix64, GAMMA};

/// Shared randomness `r`: a 128-bit key for the priority function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct SharedKey(pub u128);

impl SharedKey {
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        SharedKey(rng.random())
    }

    pub fn priority(&self, h: &HypothesisIndex) -> u64 {
        prf::priority(self.0, h.coords())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TransitionEstimate {
    /// `b^S`.
    pub center: HypothesisIndex,
    /// Axes without both labels; their estimate falls back to 0.
    pub degenerate_axes: Vec<usize>,
    /// Axes with more than one observed 0→1 transition (only possible for
    /// corrupted labels); the first one in sorted order was used.
    pub ambiguous_axes: Vec<usize>,
}

fn check_sample(sample: &LabeledSample, params: &Params) -> Result<()> {
    if sample.d() != params.d() || sample.k() != params.k() {
        return Err(Error::usage(format!(
            "sample is over d={}, k={} but params say d={}, k={}",
            sample.d(),
            sample.k(),
            params.d(),
            params.k()
        )));
    }
    Ok(())
}

/// Estimates `b^S`: on every axis, the smallest observed position with label 1
/// whose cyclic predecessor among the observed positions has label 0.
pub fn estimate_transitions_detailed(sample: &LabeledSample, params: &Params) -> Result<TransitionEstimate> {
    check_sample(sample, params)?;
    let (d, k) = (params.d(), params.k() as usize);
    // first label seen at each (axis, position)
    let mut seen: Vec<Option<bool>> = vec![None; d * k];
    for &(p, label) in sample.points() {
        let slot = &mut seen[p.axis as usize * k + p.position as usize];
        if slot.is_none() {
            *slot = Some(label);
        }
    }
    let mut center = vec![0u32; d];
    let mut degenerate_axes = Vec::new();
    let mut ambiguous_axes = Vec::new();
    for (a, c) in center.iter_mut().enumerate() {
        let observed: Vec<(u32, bool)> = seen[a * k..(a + 1) * k]
            .iter()
            .enumerate()
            .filter_map(|(b, l)| l.map(|l| (b as u32, l)))
            .collect();
        let has_one = observed.iter().any(|&(_, l)| l);
        let has_zero = observed.iter().any(|&(_, l)| !l);
        if !(has_one && has_zero) {
            degenerate_axes.push(a);
            continue;
        }
        let m = observed.len();
        let mut hits = (0..m).filter(|&j| observed[j].1 && !observed[(j + m - 1) % m].1);
        let first = hits.next().expect("mixed labels imply a 0->1 transition");
        if hits.next().is_some() {
            ambiguous_axes.push(a);
        }
        *c = observed[first].0;
    }
    Ok(TransitionEstimate {
        center: HypothesisIndex::new(center, params.k())?,
        degenerate_axes,
        ambiguous_axes,
    })
}

pub fn estimate_transitions(sample: &LabeledSample, params: &Params) -> Result<HypothesisIndex> {
    estimate_transitions_detailed(sample, params).map(|e| e.center)
}

/// In-place walk over the wrap-around ball `{i : ν(center, i) ≤ radius}` in
/// lexicographic order of the offset vectors in `[-⌊k/2⌋, ⌊k/2⌋]^d`.
#[derive(Debug, Clone)]
pub struct BallWalker {
    center: Vec<u32>,
    k: u32,
    half: i64,
    radius: i64,
    offset: Vec<i64>,
    // prefix[j] = Σ_{i<j} |offset_i|
    prefix: Vec<i64>,
    coords: Vec<u32>,
    started: bool,
}

impl BallWalker {
    pub fn new(center: &HypothesisIndex, radius: u64) -> Self {
        let d = center.d();
        let k = center.k();
        let half = (k / 2) as i64;
        let radius = radius.min(half as u64 * d as u64) as i64;
        let mut w = BallWalker {
            center: center.coords().to_vec(),
            k,
            half,
            radius,
            offset: vec![0; d],
            prefix: vec![0; d + 1],
            coords: center.coords().to_vec(),
            started: false,
        };
        w.reset_from(0);
        w
    }

    fn reset_from(&mut self, j: usize) {
        for i in j..self.offset.len() {
            let allowed = self.half.min(self.radius - self.prefix[i]);
            self.offset[i] = -allowed;
            self.prefix[i + 1] = self.prefix[i] + allowed;
            self.coords[i] = self.wrap(i);
        }
    }

    fn wrap(&self, i: usize) -> u32 {
        (self.center[i] as i64 + self.offset[i]).rem_euclid(self.k as i64) as u32
    }

    /// Moves to the next tuple. Returns the first coordinate index that
    /// changed, or `None` once the ball is exhausted. The first call yields
    /// the first tuple and reports index 0.
    pub fn advance(&mut self) -> Option<usize> {
        if !self.started {
            self.started = true;
            return Some(0);
        }
        for j in (0..self.offset.len()).rev() {
            let allowed = self.half.min(self.radius - self.prefix[j]);
            if self.offset[j] < allowed {
                self.offset[j] += 1;
                self.prefix[j + 1] = self.prefix[j] + self.offset[j].abs();
                self.coords[j] = self.wrap(j);
                self.reset_from(j + 1);
                return Some(j);
            }
        }
        None
    }

    pub fn coords(&self) -> &[u32] {
        &self.coords
    }

    pub fn offset(&self) -> &[i64] {
        &self.offset
    }
}

/// Stream of the acceptance ball's members.
pub struct AcceptanceBall {
    walker: BallWalker,
    k: u32,
}

impl Iterator for AcceptanceBall {
    type Item = HypothesisIndex;

    fn next(&mut self) -> Option<HypothesisIndex> {
        self.walker.advance()?;
        Some(HypothesisIndex::new(self.walker.coords().to_vec(), self.k).expect("walker stays in range"))
    }
}

/// Checks the ball size against the configured cap and returns it.
pub fn check_ball_size(d: usize, radius: u64, k: u32, cap: u64) -> Result<u64> {
    let size = wrap_ball_count(d, radius, k);
    match size.to_u64() {
        Some(s) if s <= cap => Ok(s),
        _ => Err(Error::resource("acceptance ball", format!("{size} hypotheses (raise the cap to at least this)"), cap)),
    }
}

pub fn enumerate_acceptance_ball(center: &HypothesisIndex, radius: u64, params: &Params) -> Result<AcceptanceBall> {
    if center.d() != params.d() || center.k() != params.k() {
        return Err(Error::usage("center does not match params"));
    }
    check_ball_size(params.d(), radius, params.k(), params.ball_cap())?;
    Ok(AcceptanceBall { walker: BallWalker::new(center, radius), k: center.k() })
}

/// A learner bound to fixed parameters; the ball size check runs once.
#[derive(Debug, Clone)]
pub struct Learner {
    params: Params,
    radius: u64,
    ball_size: u64,
}

impl Learner {
    pub fn new(params: &Params) -> Result<Self> {
        Self::with_radius(params, params.radius())
    }

    pub fn with_radius(params: &Params, radius: u64) -> Result<Self> {
        let ball_size = check_ball_size(params.d(), radius, params.k(), params.ball_cap())?;
        Ok(Learner { params: params.clone(), radius, ball_size })
    }

    pub fn radius(&self) -> u64 {
        self.radius
    }

    pub fn ball_size(&self) -> u64 {
        self.ball_size
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn learn(&self, sample: &LabeledSample, key: &SharedKey) -> Result<HypothesisIndex> {
        let center = estimate_transitions(sample, &self.params)?;
        Ok(self.select(&center, key))
    }

    /// Priority minimum over the acceptance ball around `center`, ties broken
    /// by the lexicographically smallest tuple.
    pub fn select(&self, center: &HypothesisIndex, key: &SharedKey) -> HypothesisIndex {
        let d = center.d();
        let mut walker = BallWalker::new(center, self.radius);
        // partial[j] = hash state after absorbing coords[..j]
        let mut partial = vec![0u64; d + 1];
        partial[0] = prf::key_prefix(key.0, d);
        let mut best: Option<(u64, Vec<u32>)> = None;
        while let Some(changed) = walker.advance() {
            let coords = walker.coords();
            for j in changed..d {
                partial[j + 1] = mix64(partial[j].wrapping_add(GAMMA) ^ coords[j] as u64);
            }
            let p = partial[d];
            let better = match &best {
                None => true,
                Some((bp, bc)) => p < *bp || (p == *bp && coords < bc.as_slice()),
            };
            if better {
                best = Some((p, coords.to_vec()));
            }
        }
        let (_, coords) = best.expect("ball contains its center");
        HypothesisIndex::new(coords, center.k()).expect("in range")
    }
}

/// Runs the replicable learner on `sample` with shared key `key`.
pub fn replicable_learn(sample: &LabeledSample, params: &Params, key: &SharedKey) -> Result<HypothesisIndex> {
    Learner::new(params)?.learn(sample, key)
}

/// Limit on `(dk)^n` for exhaustive mode computation.
pub const MODE_SAMPLE_LIMIT: u64 = 10_000_000;
/// Limit on `k^d` for building all mode classes.
pub const MODE_CLASS_LIMIT: u64 = 10_000;

#[derive(Debug, Clone, Serialize)]
pub struct ModeEntry {
    pub target: HypothesisIndex,
    pub mode: HypothesisIndex,
    pub mode_labeling: Labeling,
    pub mode_count: u64,
    /// Number of equiprobable ordered samples, `(dk)^n`.
    pub total: u64,
    pub mode_probability: f64,
    /// `er_{h_target}(mode)`.
    pub mode_error: f64,
    /// Output counts, ordered by labeling.
    pub distribution: Vec<(HypothesisIndex, u64)>,
}

fn sample_space_size(params: &Params) -> Result<u64> {
    let dk = params.domain_size() as u64;
    let total = u32::try_from(params.n())
        .ok()
        .and_then(|n| dk.checked_pow(n))
        .filter(|&t| t <= MODE_SAMPLE_LIMIT);
    total.ok_or_else(|| Error::resource("exhaustive sample enumeration", format!("({dk})^{}", params.n()), MODE_SAMPLE_LIMIT))
}

fn exact_mode_with(learner: &Learner, target: &HypothesisIndex, key: &SharedKey, total: u64) -> Result<ModeEntry> {
    let params = learner.params();
    let (n, k) = (params.n(), params.k());
    let dk = params.domain_size() as u32;
    let mut cache: HashMap<HypothesisIndex, HypothesisIndex> = HashMap::new();
    let mut counts: HashMap<HypothesisIndex, u64> = HashMap::new();
    let mut digits = vec![0u32; n];
    let mut points = vec![Point::new(0, 0); n];
    for _ in 0..total {
        for (p, &x) in points.iter_mut().zip(&digits) {
            *p = Point::new(x / k, x % k);
        }
        let sample = LabeledSample::labeled_by(target, &points)?;
        let center = estimate_transitions(&sample, params)?;
        let out = cache
            .entry(center)
            .or_insert_with_key(|c| learner.select(c, key))
            .clone();
        *counts.entry(out).or_insert(0) += 1;
        // odometer
        for x in digits.iter_mut().rev() {
            *x += 1;
            if *x < dk {
                break;
            }
            *x = 0;
        }
    }
    let by_labeling: BTreeMap<Labeling, (HypothesisIndex, u64)> =
        counts.into_iter().map(|(h, c)| (Labeling::of(&h), (h, c))).collect();
    let mut best: Option<(&Labeling, &HypothesisIndex, u64)> = None;
    for (f, (h, c)) in &by_labeling {
        if best.is_none_or(|(_, _, bc)| *c > bc) {
            best = Some((f, h, *c));
        }
    }
    let (f, h, c) = best.expect("at least one output");
    Ok(ModeEntry {
        target: target.clone(),
        mode: h.clone(),
        mode_labeling: f.clone(),
        mode_count: c,
        total,
        mode_probability: c as f64 / total as f64,
        mode_error: error_vs_labeling(f, target)?,
        distribution: by_labeling.values().cloned().collect(),
    })
}

/// Exact output distribution of the learner (fixed key) over all `(dk)^n`
/// equiprobable ordered samples labeled by `target`, and its mode. Ties go to
/// the lexicographically smallest labeling.
pub fn exact_mode(params: &Params, target: &HypothesisIndex, key: &SharedKey) -> Result<ModeEntry> {
    let total = sample_space_size(params)?;
    let learner = Learner::new(params)?;
    exact_mode_with(&learner, target, key, total)
}

#[derive(Debug, Clone, Serialize)]
pub struct ModeReport {
    pub entries: Vec<ModeEntry>,
    /// `C_f`: hypotheses whose mode is `f` and with `er_{h_u}(f) ≤ ε`.
    pub classes: BTreeMap<Labeling, Vec<HypothesisIndex>>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ClassSizeCheck {
    pub largest_class: usize,
    /// `(6εk)^d`.
    pub bound: f64,
    /// `εk ≥ 2` and `d ≥ 8`.
    pub applicable: bool,
    pub holds: bool,
}

impl ModeReport {
    pub fn retained(&self) -> usize {
        self.classes.values().map(Vec::len).sum()
    }

    /// Whether every retained hypothesis lies in exactly one class and
    /// exactly the retained hypotheses appear.
    pub fn is_partition(&self, params: &Params) -> bool {
        let mut seen = std::collections::HashSet::new();
        for members in self.classes.values() {
            for h in members {
                if !seen.insert(h.clone()) {
                    return false;
                }
            }
        }
        let expected: std::collections::HashSet<_> = self
            .entries
            .iter()
            .filter(|e| e.mode_error <= params.epsilon())
            .map(|e| e.target.clone())
            .collect();
        seen == expected
    }

    pub fn class_size_check(&self, params: &Params) -> ClassSizeCheck {
        let ek = params.epsilon() * params.k() as f64;
        let bound = (6.0 * ek).powi(params.d() as i32);
        let largest_class = self.classes.values().map(Vec::len).max().unwrap_or(0);
        ClassSizeCheck {
            largest_class,
            bound,
            applicable: ek >= 2.0 && params.d() >= 8,
            holds: largest_class as f64 <= bound,
        }
    }
}

/// Computes `mode(h_u)` for every `u ∈ Z_k^d` and groups them into classes.
pub fn build_mode_classes(params: &Params, key: &SharedKey) -> Result<ModeReport> {
    let hyps = (params.k() as u64)
        .checked_pow(params.d() as u32)
        .filter(|&h| h <= MODE_CLASS_LIMIT)
        .ok_or_else(|| Error::resource("mode classes", format!("{}^{}", params.k(), params.d()), MODE_CLASS_LIMIT))?;
    let total = sample_space_size(params)?;
    let learner = Learner::new(params)?;
    let mut entries = Vec::with_capacity(hyps as usize);
    let mut classes: BTreeMap<Labeling, Vec<HypothesisIndex>> = BTreeMap::new();
    for u in all_hypotheses(params.d(), params.k()) {
        let e = exact_mode_with(&learner, &u, key, total)?;
        if e.mode_error <= params.epsilon() {
            classes.entry(e.mode_labeling.clone()).or_default().push(u.clone());
        }
        entries.push(e);
    }
    Ok(ModeReport { entries, classes })
}

/// Error of the learner's output against the target, `er_{h*}(h_S)`.
pub fn output_error(target: &HypothesisIndex, output: &HypothesisIndex) -> Result<f64> {
    exact_error(target, output)
}
