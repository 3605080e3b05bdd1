//! Small statistical toolkit for the Monte Carlo checks.

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Wilson score interval at 95% confidence.
pub fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    wilson_interval_z(successes, trials, Z95)
}

pub fn wilson_interval_z(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if successes == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if successes == trials { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

fn chi_square_tail(statistic: f64, dof: usize) -> f64 {
    if dof == 0 {
        return 1.0;
    }
    let dist = ChiSquared::new(dof as f64).expect("positive dof");
    dist.sf(statistic)
}

/// Pearson goodness of fit of `counts` against `probs`. Cells with zero
/// expected probability must have zero count (otherwise the p-value is 0)
/// and do not contribute degrees of freedom.
pub fn chi_square_gof(counts: &[u64], probs: &[f64]) -> ChiSquareResult {
    assert_eq!(counts.len(), probs.len(), "cells mismatch");
    let n: u64 = counts.iter().sum();
    let nf = n as f64;
    let mut stat = 0.0;
    let mut cells = 0usize;
    for (&c, &p) in counts.iter().zip(probs) {
        if p <= 0.0 {
            if c > 0 {
                return ChiSquareResult { statistic: f64::INFINITY, dof: 0, p_value: 0.0 };
            }
            continue;
        }
        let e = nf * p;
        stat += (c as f64 - e).powi(2) / e;
        cells += 1;
    }
    let dof = cells.saturating_sub(1);
    ChiSquareResult { statistic: stat, dof, p_value: chi_square_tail(stat, dof) }
}

/// Pearson test of independence for a contingency table (rows × columns).
/// Empty rows and columns are dropped.
pub fn chi_square_independence(table: &[Vec<u64>]) -> ChiSquareResult {
    let rows: Vec<&Vec<u64>> = table.iter().filter(|r| r.iter().any(|&c| c > 0)).collect();
    if rows.is_empty() {
        return ChiSquareResult { statistic: 0.0, dof: 0, p_value: 1.0 };
    }
    let ncols = rows[0].len();
    let col_tot: Vec<u64> = (0..ncols).map(|j| rows.iter().map(|r| r[j]).sum()).collect();
    let live: Vec<usize> = (0..ncols).filter(|&j| col_tot[j] > 0).collect();
    let total: u64 = col_tot.iter().sum();
    let mut stat = 0.0;
    for r in &rows {
        let row_tot: u64 = r.iter().sum();
        for &j in &live {
            let e = row_tot as f64 * col_tot[j] as f64 / total as f64;
            stat += (r[j] as f64 - e).powi(2) / e;
        }
    }
    let dof = (rows.len() - 1) * live.len().saturating_sub(1);
    ChiSquareResult { statistic: stat, dof, p_value: chi_square_tail(stat, dof) }
}

/// Total variation distance `½ Σ |p_i − q_i|`.
pub fn tv_distance(p: &[f64], q: &[f64]) -> f64 {
    assert_eq!(p.len(), q.len(), "support mismatch");
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

pub fn normalize(counts: &[u64]) -> Vec<f64> {
    let n: u64 = counts.iter().sum();
    counts.iter().map(|&c| c as f64 / n.max(1) as f64).collect()
}

/// `Binomial(n, p)` probability mass function on `0..=n`.
pub fn binomial_pmf(n: usize, p: f64) -> Vec<f64> {
    let mut pmf = vec![0.0; n + 1];
    let mut c = 1.0f64;
    for (i, slot) in pmf.iter_mut().enumerate() {
        *slot = c * p.powi(i as i32) * (1.0 - p).powi((n - i) as i32);
        c = c * (n - i) as f64 / (i + 1) as f64;
    }
    pmf
}

/// Pairwise (cascade) summation.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 16 {
        return xs.iter().sum();
    }
    let (a, b) = xs.split_at(xs.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

/// Weighted least-squares non-increasing fit (pool adjacent violators).
pub fn isotonic_nonincreasing(values: &[f64], weights: &[f64]) -> Vec<f64> {
    assert_eq!(values.len(), weights.len());
    // blocks of (mean, weight, length)
    let mut blocks: Vec<(f64, f64, usize)> = Vec::with_capacity(values.len());
    for (&v, &w) in values.iter().zip(weights) {
        blocks.push((v, w, 1));
        while blocks.len() >= 2 {
            let (m2, w2, l2) = blocks[blocks.len() - 1];
            let (m1, w1, l1) = blocks[blocks.len() - 2];
            if m1 >= m2 {
                break;
            }
            blocks.truncate(blocks.len() - 2);
            let w = w1 + w2;
            blocks.push(((m1 * w1 + m2 * w2) / w, w, l1 + l2));
        }
    }
    blocks
        .into_iter()
        .flat_map(|(m, _, l)| std::iter::repeat_n(m, l))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_brackets_estimate() {
        for (s, n) in [(0u64, 10u64), (5, 10), (10, 10), (37, 2000)] {
            let (lo, hi) = wilson_interval(s, n);
            let p = s as f64 / n as f64;
            assert!(lo <= p && p <= hi);
            assert!(lo >= 0.0 && hi <= 1.0);
        }
        // 50/100: known Wilson interval (0.4038, 0.5962)
        let (lo, hi) = wilson_interval(50, 100);
        assert!((lo - 0.40383).abs() < 1e-4 && (hi - 0.59617).abs() < 1e-4);
    }

    #[test]
    fn chi_square_values() {
        let r = chi_square_gof(&[50, 50], &[0.5, 0.5]);
        assert_eq!(r.statistic, 0.0);
        assert!((r.p_value - 1.0).abs() < 1e-12);
        // statistic 3.841 at dof 1 is the 5% point
        let r = chi_square_gof(&[0, 0, 0], &[0.0, 0.5, 0.5]);
        assert_eq!(r.dof, 1);
        let t = chi_square_tail(3.841_458_820_694_124, 1);
        assert!((t - 0.05).abs() < 1e-9);
        assert_eq!(chi_square_gof(&[1, 0], &[0.0, 1.0]).p_value, 0.0);
    }

    #[test]
    fn independence_of_product_table() {
        let t = vec![vec![10, 20, 30], vec![20, 40, 60]];
        let r = chi_square_independence(&t);
        assert!(r.statistic.abs() < 1e-12);
        assert_eq!(r.dof, 2);
    }

    #[test]
    fn binomial_pmf_sums_to_one() {
        let p = binomial_pmf(5, 2.0 / 3.0);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        assert!((p[5] - (2.0f64 / 3.0).powi(5)).abs() < 1e-15);
        assert!((p[0] - 3f64.powi(-5)).abs() < 1e-15);
    }

    #[test]
    fn pava_fits() {
        assert_eq!(isotonic_nonincreasing(&[3.0, 2.0, 1.0], &[1.0; 3]), vec![3.0, 2.0, 1.0]);
        assert_eq!(isotonic_nonincreasing(&[1.0, 3.0], &[1.0; 2]), vec![2.0, 2.0]);
        let f = isotonic_nonincreasing(&[5.0, 1.0, 2.0, 0.0], &[1.0; 4]);
        assert_eq!(f, vec![5.0, 1.5, 1.5, 0.0]);
    }

    #[test]
    fn pairwise_matches_naive() {
        let xs: Vec<f64> = (0..1000).map(|i| i as f64 * 0.5).collect();
        assert_eq!(pairwise_sum(&xs), xs.iter().sum::<f64>());
        assert_eq!(tv_distance(&[0.5, 0.5], &[1.0, 0.0]), 0.5);
    }
}
