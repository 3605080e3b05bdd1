//! Majorization couplings and the label-preserving random step.
//!
//! Given laws `x` and `y` on `{0, …, d}` where `x` stochastically dominates
//! `y` (every prefix sum of `x` is at most the matching prefix sum of `y`), a
//! [`CouplingMatrix`] is a lower-triangular transport `p[i][j]`, `j ≤ i`, with
//!
//! 1. `0 ≤ p[i][j] ≤ 1`,
//! 2. `Σ_{j≤i} p[i][j] = 1` for every row,
//! 3. `Σ_{i≥j} x_i p[i][j] = y_j` for every column.
//!
//! It is built greedily from the top row down. Drawing `i ~ x` and then
//! `j ~ p[i][·]` yields `j ~ y` while never increasing the size.
//!
//! The random step moves a hypothesis `u` to a neighbor `v = u + z′` with
//! `z′ ∈ {−1,0,1}^d` such that `h_u` and `h_v` agree on a sample `S`. It draws
//! signs `σ`, keeps the axes `P` where the step `σ_i e_i` changes no label on
//! `S`, shrinks `P` to `P′` with the coupling from the law of `|P|` to
//! `Binomial(d, 2/3)`, and moves along `P′`.

use rand::seq::index::sample as sample_indices;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::domain::{evaluate_hypothesis, sample_n, HypothesisIndex, LabeledSample, Params};
use crate::error::{Error, Result};
use crate::prf::{mix64, substream, StreamRole};
use crate::stats::{binomial_pmf, chi_square_gof, chi_square_independence, tv_distance, ChiSquareResult};

const INPUT_TOL: f64 = 1e-12;

/// Pre-pass size used to estimate the law of `|P|`.
pub const DEFAULT_PREPASS: usize = 100_000;
/// Confidence parameter of the DKW band around the empirical law of `|P|`.
pub const DKW_ALPHA: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CouplingMatrix {
    /// `p[i]` has `i + 1` entries, `p[i][j]` for `j ≤ i`.
    p: Vec<Vec<f64>>,
}

impl CouplingMatrix {
    /// Largest index `d` (laws live on `0..=d`).
    pub fn d(&self) -> usize {
        self.p.len() - 1
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j > i {
            0.0
        } else {
            self.p[i][j]
        }
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.p[i]
    }

    /// Largest violation of the three defining properties against `(x, y)`.
    pub fn max_violation(&self, x: &[f64], y: &[f64]) -> f64 {
        let d = self.d();
        let mut worst = 0.0f64;
        for row in &self.p {
            for &v in row {
                worst = worst.max(-v).max(v - 1.0);
            }
            worst = worst.max((row.iter().sum::<f64>() - 1.0).abs());
        }
        for (j, &yj) in y.iter().enumerate().take(d + 1) {
            let col: f64 = (j..=d).map(|i| x[i] * self.p[i][j]).sum();
            worst = worst.max((col - yj).abs());
        }
        worst
    }

    /// Draws `j ~ p[i][·]`.
    pub fn sample_row<R: Rng + ?Sized>(&self, i: usize, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (j, &w) in self.p[i].iter().enumerate() {
            acc += w;
            if u < acc {
                return j;
            }
        }
        // rounding left a sliver above the last positive entry
        self.p[i].iter().rposition(|&w| w > 0.0).unwrap_or(i)
    }
}

fn check_laws(x: &[f64], y: &[f64]) -> Result<()> {
    if x.is_empty() || x.len() != y.len() {
        return Err(Error::usage(format!(
            "laws must be nonempty and of equal length, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    if let Some(v) = x.iter().chain(y).find(|v| !v.is_finite() || **v < 0.0) {
        return Err(Error::usage(format!("nonnegativity violated: entry {v}")));
    }
    let (sx, sy): (f64, f64) = (x.iter().sum(), y.iter().sum());
    let scale = sx.max(sy).max(1.0);
    if (sx - sy).abs() > INPUT_TOL * scale {
        return Err(Error::usage(format!("equal mass violated: sum x = {sx}, sum y = {sy}")));
    }
    let (mut px, mut py) = (0.0, 0.0);
    for t in 0..x.len() {
        px += x[t];
        py += y[t];
        if px > py + INPUT_TOL * scale {
            return Err(Error::usage(format!(
                "prefix dominance violated at t = {t}: {px} > {py}"
            )));
        }
    }
    Ok(())
}

/// Greedy top-down construction of a coupling from `x` to `y`.
///
/// Row `m` is filled from its diagonal leftwards with
/// `p[m][m] = y_m / x_m` and `p[m][j] = min{y_j / x_m, 1 − Σ_{l>j} p[m][l]}`;
/// the transported mass is removed from `y` before moving to row `m − 1`.
/// A row with `x_m = 0` carries no mass and is set uniform.
pub fn majorization_coupling(x: &[f64], y: &[f64]) -> Result<CouplingMatrix> {
    check_laws(x, y)?;
    let d = x.len() - 1;
    let mut rest: Vec<f64> = y.to_vec();
    let mut p: Vec<Vec<f64>> = (0..=d).map(|i| vec![0.0; i + 1]).collect();
    for m in (1..=d).rev() {
        let xm = x[m];
        if xm <= 0.0 {
            p[m].fill(1.0 / (m + 1) as f64);
            continue;
        }
        let mut used = 0.0;
        for j in (0..=m).rev() {
            let share = if j == m {
                (rest[m] / xm).min(1.0)
            } else {
                (rest[j] / xm).min(1.0 - used)
            };
            let share = share.clamp(0.0, 1.0);
            p[m][j] = share;
            used += share;
            rest[j] = (rest[j] - xm * share).max(0.0);
        }
    }
    p[0][0] = 1.0;
    Ok(CouplingMatrix { p })
}

/// The two points of axis `i` whose label flips when the start of interval
/// `i` moves from `u_i` to `u_i + σ`.
pub fn boundary_points(start: u32, sigma: i8, k: u32) -> [u32; 2] {
    let half = k / 2;
    if sigma > 0 {
        [start, (start + half) % k]
    } else {
        let prev = (start + k - 1) % k;
        [prev, (prev + half) % k]
    }
}

/// Axes `i` where `h_u` and `h_{u + σ_i e_i}` agree on every point of `S`.
pub fn candidate_direction_set(u: &HypothesisIndex, sigma: &[i8], sample: &LabeledSample) -> Result<Vec<usize>> {
    if sigma.len() != u.d() || sample.d() != u.d() || sample.k() != u.k() {
        return Err(Error::usage("sign vector, hypothesis and sample must share d and k"));
    }
    let k = u.k();
    let coverage = sample.coverage();
    Ok((0..u.d())
        .filter(|&i| {
            boundary_points(u.coords()[i], sigma[i], k)
                .iter()
                .all(|&b| !coverage[i * k as usize + b as usize])
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepOutcome {
    pub u: HypothesisIndex,
    pub v: HypothesisIndex,
    /// `v − u` with entries in `{−1, 0, 1}`.
    pub direction: Vec<i8>,
    /// `P`, sorted.
    pub candidate_set: Vec<usize>,
    /// `P′ ⊆ P`, sorted.
    pub kept: Vec<usize>,
    pub signs: Vec<i8>,
}

/// The law of `|P|`, its target `Binomial(d, 2/3)`, and the coupling between
/// them, shared read-only by all steps.
#[derive(Debug, Clone, Serialize)]
pub struct StepPlan {
    d: usize,
    size_law: Vec<f64>,
    target_law: Vec<f64>,
    coupling: CouplingMatrix,
    /// `max_t (F_P(t) − F_Q(t))` before projection.
    pub dominance_gap: f64,
    /// DKW half-width used to tolerate sampling noise (0 for exact laws).
    pub margin: f64,
    /// Whether the empirical CDF was clipped to `F_Q` inside the margin.
    pub projected: bool,
}

fn cdf(law: &[f64]) -> Vec<f64> {
    law.iter()
        .scan(0.0, |acc, &p| {
            *acc += p;
            Some(*acc)
        })
        .collect()
}

impl StepPlan {
    /// Plan from a supplied law of `|P|` on `0..=d`. Dominance must hold up to
    /// `margin` in CDF; within the margin the law is projected onto
    /// `G(t) = min(F_P(t), F_Q(t))`.
    pub fn from_law(size_law: &[f64], margin: f64) -> Result<Self> {
        if size_law.len() < 2 {
            return Err(Error::usage("law of |P| must cover 0..=d with d >= 1"));
        }
        let total: f64 = size_law.iter().sum();
        if size_law.iter().any(|&p| !p.is_finite() || p < 0.0) || (total - 1.0).abs() > 1e-9 {
            return Err(Error::usage("law of |P| must be a probability vector"));
        }
        let d = size_law.len() - 1;
        let target_law = binomial_pmf(d, 2.0 / 3.0);
        let fp = cdf(size_law);
        let fq = cdf(&target_law);
        let (gap, worst_t) = (0..d)
            .map(|t| (fp[t] - fq[t], t))
            .fold((f64::NEG_INFINITY, 0), |a, b| if b.0 > a.0 { b } else { a });
        if gap > margin {
            return Err(Error::Verification(format!(
                "stochastic dominance of |P| over Binomial({d}, 2/3) fails: \
                 Pr[|P| <= {worst_t}] = {:.6} exceeds Pr[|Q| <= {worst_t}] = {:.6} by {gap:.6} \
                 (tolerance {margin:.6}); k is too small for this n and d",
                fp[worst_t], fq[worst_t]
            )));
        }
        let projected = gap > 0.0;
        let law: Vec<f64> = if projected {
            let g: Vec<f64> = fp.iter().zip(&fq).map(|(a, b)| a.min(*b)).collect();
            let mut out: Vec<f64> = g.iter().scan(0.0, |prev, &c| {
                let p = (c - *prev).max(0.0);
                *prev = c;
                Some(p)
            }).collect();
            out[d] = 1.0 - g[d - 1];
            out
        } else {
            size_law.to_vec()
        };
        let coupling = majorization_coupling(&law, &target_law)?;
        Ok(StepPlan { d, size_law: law, target_law, coupling, dominance_gap: gap, margin, projected })
    }

    /// Estimates the law of `|P|` from `prepass` draws of `(u, σ, S)` with
    /// `u` uniform and `S` of size `params.n()` labeled by `h_u`.
    pub fn estimate<R: Rng + ?Sized>(params: &Params, prepass: usize, rng: &mut R) -> Result<Self> {
        if prepass == 0 {
            return Err(Error::usage("pre-pass size must be positive"));
        }
        let (d, k, n) = (params.d(), params.k(), params.n());
        let mut counts = vec![0u64; d + 1];
        for _ in 0..prepass {
            let u = HypothesisIndex::random(d, k, rng);
            let sigma = random_signs(d, rng);
            let s = sample_n(d, k, n, &u, rng);
            counts[candidate_direction_set(&u, &sigma, &s)?.len()] += 1;
        }
        let law: Vec<f64> = counts.iter().map(|&c| c as f64 / prepass as f64).collect();
        let margin = if n == 0 { 0.0 } else { dkw_margin(prepass, DKW_ALPHA) };
        Self::from_law(&law, margin)
    }

    /// No shrinking: `P′ = P`. Used to measure the raw candidate-set sampler.
    pub fn without_shrinking(d: usize) -> Self {
        let p = (0..=d)
            .map(|i| {
                let mut row = vec![0.0; i + 1];
                row[i] = 1.0;
                row
            })
            .collect();
        StepPlan {
            d,
            size_law: vec![f64::NAN; d + 1],
            target_law: binomial_pmf(d, 2.0 / 3.0),
            coupling: CouplingMatrix { p },
            dominance_gap: f64::NAN,
            margin: 0.0,
            projected: false,
        }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn size_law(&self) -> &[f64] {
        &self.size_law
    }

    pub fn target_law(&self) -> &[f64] {
        &self.target_law
    }

    pub fn coupling(&self) -> &CouplingMatrix {
        &self.coupling
    }
}

/// DKW half-width `sqrt(ln(2/α) / 2M)`.
pub fn dkw_margin(m: usize, alpha: f64) -> f64 {
    ((2.0 / alpha).ln() / (2.0 * m as f64)).sqrt()
}

fn random_signs<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<i8> {
    (0..d).map(|_| if rng.random_bool(0.5) { 1 } else { -1 }).collect()
}

/// One label-preserving step from `u` under `S`.
pub fn random_step<R: Rng + ?Sized>(
    u: &HypothesisIndex,
    sample: &LabeledSample,
    plan: &StepPlan,
    rng: &mut R,
) -> Result<StepOutcome> {
    if plan.d != u.d() {
        return Err(Error::usage(format!("plan is for d = {}, hypothesis has d = {}", plan.d, u.d())));
    }
    let signs = random_signs(u.d(), rng);
    let candidate_set = candidate_direction_set(u, &signs, sample)?;
    let target = plan.coupling.sample_row(candidate_set.len(), rng);
    let mut kept: Vec<usize> = sample_indices(rng, candidate_set.len(), target)
        .into_iter()
        .map(|i| candidate_set[i])
        .collect();
    kept.sort_unstable();
    let mut direction = vec![0i8; u.d()];
    for &i in &kept {
        direction[i] = signs[i];
    }
    let offset: Vec<i64> = direction.iter().map(|&z| z as i64).collect();
    let v = u.shifted(&offset);
    Ok(StepOutcome { u: u.clone(), v, direction, candidate_set, kept, signs })
}

/// `true` iff `h_u` and `h_v` label every point of `S` identically.
pub fn labels_agree(u: &HypothesisIndex, v: &HypothesisIndex, sample: &LabeledSample) -> bool {
    sample
        .points()
        .iter()
        .all(|(p, _)| evaluate_hypothesis(u, *p) == evaluate_hypothesis(v, *p))
}

/// `k ≥ 4n / (ln(81/80) d)`, the regime where the size law of `P` is known
/// to dominate `Binomial(d, 2/3)`.
pub fn regime_holds(d: usize, k: u32, n: usize) -> bool {
    k as f64 >= 4.0 * n as f64 / ((81.0f64 / 80.0).ln() * d as f64)
}

/// Lower bound on the TV distance between `v − u` and uniform on `Z` for any
/// label-preserving step: an axis can move only if neither of its two
/// boundary points was drawn, so `Pr[z_i ≠ 0] ≤ (1 − 2/(dk))^n` while the
/// uniform law puts `2/3` there.
pub fn step_tv_lower_bound(d: usize, k: u32, n: usize) -> f64 {
    let q = (1.0 - 2.0 / (d as f64 * k as f64)).powi(n as i32);
    (2.0 / 3.0 - q).max(0.0)
}

fn direction_index(z: &[i8]) -> usize {
    z.iter().fold(0usize, |acc, &c| acc * 3 + (c + 1) as usize)
}

const SAMPLE_BUCKETS: usize = 8;
const MAX_V_BINS: u64 = 256;
const INDEPENDENCE_V_BINS: u64 = 16;

fn sample_bucket(sample: &LabeledSample) -> usize {
    let mut keys: Vec<u64> = sample
        .points()
        .iter()
        .map(|(p, _)| ((p.axis as u64) << 32) | p.position as u64)
        .collect();
    keys.sort_unstable();
    let h = keys.iter().fold(mix64(keys.len() as u64), |h, &x| mix64(h ^ x));
    (h % SAMPLE_BUCKETS as u64) as usize
}

/// Exact probability of each residue class `x mod bins` for `x` uniform on `0..total`.
fn residue_probs(total: u64, bins: u64) -> Vec<f64> {
    (0..bins)
        .map(|b| (total / bins + u64::from(b < total % bins)) as f64 / total as f64)
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct StepReport {
    pub d: usize,
    pub k: u32,
    pub n: usize,
    pub trials: usize,
    /// TV between the law of `v − u` and uniform on `Z`.
    pub direction_tv: f64,
    pub direction_chi_square: ChiSquareResult,
    /// TV between the (binned) law of `v` and uniform.
    pub v_tv: f64,
    pub v_bins: u64,
    /// TV between the (binned) law of `u` and uniform.
    pub u_tv: f64,
    /// Independence of a coarse bin of `v` from a hash bucket of `S`.
    pub independence: ChiSquareResult,
    pub label_violations: u64,
    /// Empirical law of `|P′|`.
    pub kept_law: Vec<f64>,
    pub kept_chi_square: ChiSquareResult,
    /// Empirical law of `|P|`.
    pub candidate_law: Vec<f64>,
    pub regime_holds: bool,
    pub tv_lower_bound: f64,
    pub projected: bool,
}

impl StepReport {
    pub fn to_csv(&self) -> String {
        use crate::harness::fmt_g17 as g;
        format!(
            "d,k,n,trials,direction_tv,direction_p,v_tv,v_bins,u_tv,independence_p,label_violations,kept_p,regime_holds,tv_lower_bound,projected\n\
             {},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            self.d,
            self.k,
            self.n,
            self.trials,
            g(self.direction_tv),
            g(self.direction_chi_square.p_value),
            g(self.v_tv),
            self.v_bins,
            g(self.u_tv),
            g(self.independence.p_value),
            self.label_violations,
            g(self.kept_chi_square.p_value),
            self.regime_holds,
            g(self.tv_lower_bound),
            self.projected
        )
    }
}

#[derive(Default)]
struct Tally {
    direction: Vec<u64>,
    v: Vec<u64>,
    u: Vec<u64>,
    joint: Vec<Vec<u64>>,
    kept: Vec<u64>,
    candidates: Vec<u64>,
    violations: u64,
}

impl Tally {
    fn new(d: usize, v_bins: usize) -> Self {
        Tally {
            direction: vec![0; 3usize.pow(d as u32)],
            v: vec![0; v_bins],
            u: vec![0; v_bins],
            joint: vec![vec![0; INDEPENDENCE_V_BINS as usize]; SAMPLE_BUCKETS],
            kept: vec![0; d + 1],
            candidates: vec![0; d + 1],
            violations: 0,
        }
    }

    fn merge(mut self, other: Tally) -> Tally {
        let add = |a: &mut Vec<u64>, b: &[u64]| a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        add(&mut self.direction, &other.direction);
        add(&mut self.v, &other.v);
        add(&mut self.u, &other.u);
        add(&mut self.kept, &other.kept);
        add(&mut self.candidates, &other.candidates);
        for (a, b) in self.joint.iter_mut().zip(&other.joint) {
            add(a, b);
        }
        self.violations += other.violations;
        self
    }
}

/// Runs `trials` steps from uniform `u` with fresh samples `S` of size
/// `params.n()` and compares the outcome laws against their ideal targets.
/// The law of `|P|` is estimated first; a dominance failure is returned as an
/// error.
pub fn verify_step_distribution<R: Rng + ?Sized>(params: &Params, trials: usize, rng: &mut R) -> Result<StepReport> {
    let plan = StepPlan::estimate(params, DEFAULT_PREPASS, rng)?;
    verify_with_plan(params, &plan, trials, rng)
}

/// [`verify_step_distribution`] with a caller-supplied plan.
pub fn verify_with_plan<R: Rng + ?Sized>(
    params: &Params,
    plan: &StepPlan,
    trials: usize,
    rng: &mut R,
) -> Result<StepReport> {
    let (d, k, n) = (params.d(), params.k(), params.n());
    if d > 10 {
        return Err(Error::resource("direction tabulation", format!("3^{d} cells"), "3^10"));
    }
    if trials == 0 {
        return Err(Error::usage("trials must be positive"));
    }
    let total = (k as u64).checked_pow(d as u32).unwrap_or(u64::MAX);
    let v_bins = total.min(MAX_V_BINS);
    let ind_bins = total.min(INDEPENDENCE_V_BINS);
    let master: u64 = rng.random();
    let chunk = 4096usize;
    let chunks = trials.div_ceil(chunk);
    let tally = (0..chunks)
        .into_par_iter()
        .map(|c| -> Result<Tally> {
            let mut rng = substream(master, c as u64, StreamRole::Aux);
            let mut t = Tally::new(d, v_bins as usize);
            for _ in 0..chunk.min(trials - c * chunk) {
                let u = HypothesisIndex::random(d, k, &mut rng);
                let s = sample_n(d, k, n, &u, &mut rng);
                let out = random_step(&u, &s, plan, &mut rng)?;
                if !labels_agree(&out.u, &out.v, &s) {
                    t.violations += 1;
                }
                t.direction[direction_index(&out.direction)] += 1;
                let lv = out.v.to_linear();
                t.v[(lv % v_bins) as usize] += 1;
                t.u[(u.to_linear() % v_bins) as usize] += 1;
                t.joint[sample_bucket(&s)][(lv % ind_bins) as usize] += 1;
                t.kept[out.kept.len()] += 1;
                t.candidates[out.candidate_set.len()] += 1;
            }
            Ok(t)
        })
        .try_reduce(|| Tally::new(d, v_bins as usize), |a, b| Ok(a.merge(b)))?;

    let cells = tally.direction.len();
    let uniform_z = vec![1.0 / cells as f64; cells];
    let v_probs = residue_probs(total, v_bins);
    let binom = binomial_pmf(d, 2.0 / 3.0);
    Ok(StepReport {
        d,
        k,
        n,
        trials,
        direction_tv: tv_distance(&crate::stats::normalize(&tally.direction), &uniform_z),
        direction_chi_square: chi_square_gof(&tally.direction, &uniform_z),
        v_tv: tv_distance(&crate::stats::normalize(&tally.v), &v_probs),
        v_bins,
        u_tv: tv_distance(&crate::stats::normalize(&tally.u), &v_probs),
        independence: chi_square_independence(&tally.joint),
        label_violations: tally.violations,
        kept_law: crate::stats::normalize(&tally.kept),
        kept_chi_square: chi_square_gof(&tally.kept, &binom),
        candidate_law: crate::stats::normalize(&tally.candidates),
        regime_holds: regime_holds(d, k, n),
        tv_lower_bound: step_tv_lower_bound(d, k, n),
        projected: plan.projected,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Point;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn base_case_and_worked_example() {
        let c = majorization_coupling(&[0.7], &[0.7]).unwrap();
        assert_eq!(c.get(0, 0), 1.0);
        let x = [1.0, 1.0];
        let y = [2.0, 0.0];
        let c = majorization_coupling(&x, &y).unwrap();
        assert_eq!((c.get(1, 1), c.get(1, 0), c.get(0, 0)), (0.0, 1.0, 1.0));
        assert_eq!(c.max_violation(&x, &y), 0.0);
    }

    #[test]
    fn identical_laws_couple() {
        let x = [0.1, 0.2, 0.3, 0.4];
        let c = majorization_coupling(&x, &x).unwrap();
        assert!(c.max_violation(&x, &x) < 1e-12);
    }

    #[test]
    fn empty_top_row_is_uniform() {
        let x = [0.5, 0.5, 0.0];
        let y = [0.75, 0.25, 0.0];
        let c = majorization_coupling(&x, &y).unwrap();
        assert_eq!(c.row(2), &[1.0 / 3.0; 3]);
        assert!(c.max_violation(&x, &y) < 1e-12);
    }

    #[test]
    fn precondition_errors_name_the_property() {
        let msg = |r: Result<CouplingMatrix>| r.unwrap_err().to_string();
        assert!(msg(majorization_coupling(&[1.0, 0.0], &[0.0, 1.0])).contains("dominance"));
        assert!(msg(majorization_coupling(&[1.0], &[2.0])).contains("equal mass"));
        assert!(msg(majorization_coupling(&[-1.0, 2.0], &[1.0, 0.0])).contains("nonnegativity"));
    }

    #[test]
    fn candidate_set_examples() {
        let u = HypothesisIndex::new(vec![2], 7).unwrap();
        let s = LabeledSample::labeled_by(&u, &[Point::new(0, 2)]).unwrap();
        assert!(candidate_direction_set(&u, &[1], &s).unwrap().is_empty());
        let s = LabeledSample::labeled_by(&u, &[Point::new(0, 0)]).unwrap();
        assert_eq!(candidate_direction_set(&u, &[1], &s).unwrap(), vec![0]);
        let u3 = HypothesisIndex::new(vec![1, 4, 6], 7).unwrap();
        let e = LabeledSample::empty(3, 7);
        assert_eq!(candidate_direction_set(&u3, &[1, -1, 1], &e).unwrap(), vec![0, 1, 2]);
    }

    #[test]
    fn candidate_set_matches_direct_evaluation() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..2000 {
            let u = HypothesisIndex::random(3, 7, &mut rng);
            let s = sample_n(3, 7, 6, &u, &mut rng);
            let sigma = random_signs(3, &mut rng);
            let p = candidate_direction_set(&u, &sigma, &s).unwrap();
            for i in 0..3 {
                let mut off = vec![0i64; 3];
                off[i] = sigma[i] as i64;
                let moved = u.shifted(&off);
                assert_eq!(p.contains(&i), labels_agree(&u, &moved, &s));
            }
        }
    }

    #[test]
    fn steps_preserve_labels() {
        let params = Params::new(3, 101, 0.3, 0.1, 0.1, 5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let plan = StepPlan::estimate(&params, 20_000, &mut rng).unwrap();
        for _ in 0..5000 {
            let u = HypothesisIndex::random(3, 101, &mut rng);
            let s = sample_n(3, 101, 5, &u, &mut rng);
            let out = random_step(&u, &s, &plan, &mut rng).unwrap();
            assert!(labels_agree(&out.u, &out.v, &s));
            assert!(out.kept.iter().all(|i| out.candidate_set.contains(i)));
            assert!(out.direction.iter().all(|z| z.abs() <= 1));
        }
    }

    #[test]
    fn small_k_dominance_failure_is_diagnosed() {
        let params = Params::new(2, 11, 0.3, 0.1, 0.1, 10).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let err = StepPlan::estimate(&params, 20_000, &mut rng).unwrap_err();
        assert_eq!(err.exit_code(), 3);
        assert!(err.to_string().contains("dominance"));
        assert!(!regime_holds(2, 11, 10));
    }

    #[test]
    fn projection_inside_margin() {
        // F_P(0) exceeds F_Q(0) = 1/9 by 0.01
        let law = [1.0 / 9.0 + 0.01, 4.0 / 9.0 - 0.01, 4.0 / 9.0];
        assert!(StepPlan::from_law(&law, 0.0).is_err());
        let plan = StepPlan::from_law(&law, 0.02).unwrap();
        assert!(plan.projected);
        assert!((plan.size_law()[0] - 1.0 / 9.0).abs() < 1e-12);
        assert!((plan.size_law().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tv_lower_bound_values() {
        assert_eq!(step_tv_lower_bound(3, 11, 0), 0.0);
        let q = (31.0f64 / 33.0).powi(20);
        assert!((step_tv_lower_bound(3, 11, 20) - (2.0 / 3.0 - q)).abs() < 1e-15);
    }

    #[test]
    fn one_dimensional_step_is_uniform() {
        let params = Params::new(1, 7, 0.3, 0.1, 0.1, 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let r = verify_step_distribution(&params, 60_000, &mut rng).unwrap();
        assert!(r.direction_chi_square.p_value > 1e-3, "{r:?}");
        assert_eq!(r.label_violations, 0);
    }
}
