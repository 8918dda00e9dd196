//! Convergence aggregation and the Wilcoxon rank-sum (Mann-Whitney) test.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;
use thiserror::Error;

/// Combined sample sizes up to this use exact enumeration.
pub const EXACT_MAX_COMBINED: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StatsError {
    #[error("no traces to aggregate")]
    NoTraces,
    #[error("rank-sum test needs two nonempty samples")]
    EmptySample,
    #[error("sample contains NaN")]
    NaN,
}

/// Pads each trace with its last value to the longest length. Empty traces
/// are skipped.
fn aligned(traces: &[&[f64]]) -> Result<(usize, Vec<Vec<f64>>), StatsError> {
    if traces.is_empty() {
        return Err(StatsError::NoTraces);
    }
    let len = traces.iter().map(|t| t.len()).max().unwrap_or(0);
    let rows = traces
        .iter()
        .filter(|t| !t.is_empty())
        .map(|t| {
            let mut v = t.to_vec();
            v.resize(len, *t.last().expect("nonempty"));
            v
        })
        .collect();
    Ok((len, rows))
}

/// Pointwise mean across runs. Values at each index are summed in sorted
/// order so the result does not depend on run order.
pub fn mean_convergence(traces: &[&[f64]]) -> Result<Vec<f64>, StatsError> {
    let (len, rows) = aligned(traces)?;
    let mut column = Vec::with_capacity(rows.len());
    Ok((0..len)
        .map(|i| {
            column.clear();
            column.extend(rows.iter().map(|r| r[i]));
            column.sort_by(f64::total_cmp);
            column.iter().sum::<f64>() / column.len() as f64
        })
        .collect())
}

/// Pointwise minimum across runs.
pub fn min_convergence(traces: &[&[f64]]) -> Result<Vec<f64>, StatsError> {
    let (len, rows) = aligned(traces)?;
    Ok((0..len).map(|i| rows.iter().map(|r| r[i]).fold(f64::INFINITY, f64::min)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankSumResult {
    /// Mann-Whitney `U` of the first sample, `R_a - n_a (n_a + 1) / 2`.
    pub u: f64,
    /// Rank sum of the first sample (midranks for ties).
    pub rank_sum: f64,
    /// Two-sided p-value in `(0, 1]`.
    pub p_value: f64,
    pub exact: bool,
}

/// Midranks (1-based, ties averaged) of the concatenation `a ++ b`, doubled
/// so they stay integral.
fn doubled_midranks(values: &[f64]) -> Vec<u64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = vec![0u64; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // ranks start+1 ..= end, doubled average = start + 1 + end
        let doubled = (start + 1 + end) as u64;
        for &k in &order[start..end] {
            ranks[k] = doubled;
        }
        start = end;
    }
    ranks
}

fn tie_groups(values: &[f64]) -> Vec<usize> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mut groups = Vec::new();
    let mut start = 0;
    while start < v.len() {
        let mut end = start + 1;
        while end < v.len() && v[end] == v[start] {
            end += 1;
        }
        groups.push(end - start);
        start = end;
    }
    groups
}

/// Two-sided rank-sum test. Exact enumeration of all rank assignments when
/// `|a| + |b| <= 12`; otherwise the normal approximation with tie and
/// continuity corrections. All-equal samples give `p = 1`.
pub fn rank_sum_test(a: &[f64], b: &[f64]) -> Result<RankSumResult, StatsError> {
    if a.is_empty() || b.is_empty() {
        return Err(StatsError::EmptySample);
    }
    if a.iter().chain(b).any(|v| v.is_nan()) {
        return Err(StatsError::NaN);
    }
    if a.len() + b.len() <= EXACT_MAX_COMBINED {
        Ok(exact_rank_sum(a, b))
    } else {
        Ok(normal_rank_sum(a, b))
    }
}

fn u_from_rank_sum(rank_sum: f64, na: usize) -> f64 {
    rank_sum - (na * (na + 1)) as f64 / 2.0
}

/// Exact permutation p-value over all `C(N, n_a)` assignments of the pooled
/// midranks to the first sample.
pub fn exact_rank_sum(a: &[f64], b: &[f64]) -> RankSumResult {
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let n = pooled.len();
    let na = a.len();
    assert!(n <= 24, "exact enumeration limited to small samples");
    let ranks = doubled_midranks(&pooled);
    let observed: u64 = ranks[..na].iter().sum();
    // doubled expectation of the rank sum: na (N + 1)
    let centre = (na * (n + 1)) as i64;
    let observed_dev = (observed as i64 - centre).abs();
    let mut extreme = 0u64;
    let mut total = 0u64;
    for mask in 0u32..(1u32 << n) {
        if mask.count_ones() as usize != na {
            continue;
        }
        total += 1;
        let s: u64 = (0..n).filter(|&i| mask & (1 << i) != 0).map(|i| ranks[i]).sum();
        if (s as i64 - centre).abs() >= observed_dev {
            extreme += 1;
        }
    }
    let rank_sum = observed as f64 / 2.0;
    RankSumResult {
        u: u_from_rank_sum(rank_sum, na),
        rank_sum,
        p_value: extreme as f64 / total as f64,
        exact: true,
    }
}

/// Normal approximation with tie-corrected variance and a 0.5 continuity
/// correction.
pub fn normal_rank_sum(a: &[f64], b: &[f64]) -> RankSumResult {
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let n = na + nb;
    let ranks = doubled_midranks(&pooled);
    let rank_sum = ranks[..a.len()].iter().sum::<u64>() as f64 / 2.0;
    let u = u_from_rank_sum(rank_sum, a.len());
    let mean = na * nb / 2.0;
    let ties: f64 = tie_groups(&pooled).iter().map(|&t| (t * t * t - t) as f64).sum();
    let var = na * nb / 12.0 * ((n + 1.0) - ties / (n * (n - 1.0)));
    let p_value = if var <= 0.0 {
        1.0
    } else {
        let z = ((u - mean).abs() - 0.5).max(0.0) / var.sqrt();
        erfc(z / std::f64::consts::SQRT_2).clamp(f64::MIN_POSITIVE, 1.0)
    };
    RankSumResult { u, rank_sum, p_value, exact: false }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_and_min() {
        let a = [70.0; 4];
        let b = [90.0; 4];
        assert_eq!(mean_convergence(&[&a, &b]).unwrap(), vec![80.0; 4]);
        assert_eq!(min_convergence(&[&a, &b]).unwrap(), vec![70.0; 4]);
        assert_eq!(mean_convergence(&[&a]).unwrap(), a.to_vec());
        assert_eq!(min_convergence(&[&a]).unwrap(), a.to_vec());
        assert_eq!(mean_convergence(&[]), Err(StatsError::NoTraces));
    }

    #[test]
    fn feasible_plus_penalty_run() {
        let feasible = [70.0; 10];
        let penalty = [500.0; 10];
        assert_eq!(mean_convergence(&[&feasible, &penalty]).unwrap(), vec![285.0; 10]);
    }

    #[test]
    fn ragged_traces_extend_last_value() {
        let a = [90.0, 80.0];
        let b = [100.0, 95.0, 60.0];
        assert_eq!(min_convergence(&[&a, &b]).unwrap(), vec![90.0, 80.0, 60.0]);
        assert_eq!(mean_convergence(&[&a, &b]).unwrap(), vec![95.0, 87.5, 70.0]);
    }

    #[test]
    fn exact_small_example() {
        let r = rank_sum_test(&[1.0, 2.0], &[3.0, 4.0]).unwrap();
        assert!(r.exact);
        assert_eq!(r.rank_sum, 3.0);
        assert_eq!(r.u, 0.0);
        assert!((r.p_value - 2.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn identical_samples() {
        let a = [3.0, 1.0, 2.0, 5.0];
        assert_eq!(rank_sum_test(&a, &a).unwrap().p_value, 1.0);
        let big: Vec<f64> = (0..20).map(|i| i as f64).collect();
        assert!(rank_sum_test(&big, &big).unwrap().p_value > 0.95);
        let flat = [7.0; 15];
        assert_eq!(rank_sum_test(&flat, &flat).unwrap().p_value, 1.0);
        assert_eq!(rank_sum_test(&[7.0; 3], &[7.0; 3]).unwrap().p_value, 1.0);
    }

    #[test]
    fn midranks_with_ties() {
        assert_eq!(doubled_midranks(&[5.0, 1.0, 5.0, 3.0]), vec![7, 2, 7, 4]);
        assert_eq!(tie_groups(&[5.0, 1.0, 5.0, 3.0]), vec![1, 1, 2]);
    }

    #[test]
    fn errors() {
        assert_eq!(rank_sum_test(&[], &[1.0]), Err(StatsError::EmptySample));
        assert_eq!(rank_sum_test(&[f64::NAN], &[1.0]), Err(StatsError::NaN));
    }

    #[test]
    fn symmetric_p() {
        let a = [1.0, 4.0, 4.0, 9.0, 2.0];
        let b = [3.0, 5.0, 8.0, 8.0, 10.0, 11.0, 0.5];
        let ab = rank_sum_test(&a, &b).unwrap();
        let ba = rank_sum_test(&b, &a).unwrap();
        assert_eq!(ab.p_value, ba.p_value);
        assert_eq!(ab.u + ba.u, (a.len() * b.len()) as f64);
    }

    #[test]
    fn far_shift_large_samples() {
        let a: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let b: Vec<f64> = (0..20).map(|i| 100.0 + i as f64).collect();
        let r = rank_sum_test(&a, &b).unwrap();
        assert!(!r.exact);
        assert!(r.p_value < 0.001 && r.p_value > 0.0);
    }
}
