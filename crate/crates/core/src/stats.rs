//! Statistical machinery behind replacement decisions: the one-sided
//! Mann-Whitney/Wilcoxon rank-sum test and summary statistics.
//!
//! The test reports evidence that sample `b` is stochastically greater
//! than sample `a`. Ties get midranks and the tie-corrected variance. The
//! p-value comes from the normal approximation with continuity correction,
//! which is what the tuning loop uses (its sample vectors have 10-120
//! entries); only two special regimes differ:
//!
//! - identical sample multisets (and the all-values-identical degenerate
//!   case) short-circuit to `p = 0.5`: the data carries no directional
//!   evidence;
//! - tiny tie-free samples (a side of size two, at most twelve values in
//!   total) use the exact U distribution, where the normal approximation
//!   is too coarse to be trusted.

use alloc::vec;
use alloc::vec::Vec;

/// Sidedness of the rank-sum test.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Alternative {
    /// Evidence that `b` is stochastically greater than `a`.
    BGreater,
}

/// Outcome of [`rank_sum_test`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RankSumResult {
    /// The Mann-Whitney U statistic of sample `b`.
    pub u_statistic: f64,
    /// One-sided p-value, in `[0, 1]`.
    pub p_value: f64,
}

/// Upper tail of the standard normal distribution.
fn normal_sf(z: f64) -> f64 {
    0.5 * libm::erfc(z / core::f64::consts::SQRT_2)
}

/// Arithmetic mean of a non-empty sample.
pub fn mean(values: &[f64]) -> f64 {
    debug_assert!(!values.is_empty());
    values.iter().sum::<f64>() / values.len() as f64
}

fn sorted(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_unstable_by(f64::total_cmp);
    v
}

/// Exact tail probability P(U >= u_obs) for tie-free samples, via the
/// subset-sum counting recurrence over ranks.
fn exact_tail(n1: usize, n2: usize, u_obs: f64) -> f64 {
    let total = n1 + n2;
    let max_rank_sum = (total * (total + 1)) / 2;
    // dp[picked][rank_sum] = number of rank subsets of the values seen so
    // far with that size and rank total.
    let mut dp = vec![vec![0.0f64; max_rank_sum + 1]; n2 + 1];
    dp[0][0] = 1.0;
    for rank in 1..=total {
        for picked in (1..=n2.min(rank)).rev() {
            for rsum in (rank..=max_rank_sum).rev() {
                let carry = dp[picked - 1][rsum - rank];
                if carry > 0.0 {
                    dp[picked][rsum] += carry;
                }
            }
        }
    }
    let offset = (n2 * (n2 + 1) / 2) as f64;
    let mut tail = 0.0;
    let mut all = 0.0;
    for (rsum, &count) in dp[n2].iter().enumerate() {
        if count == 0.0 {
            continue;
        }
        all += count;
        if rsum as f64 - offset >= u_obs {
            tail += count;
        }
    }
    tail / all
}

/// One-sided Mann-Whitney rank-sum test.
///
/// Both samples need at least two finite values. If every pooled value is
/// identical there is no evidence either way and the p-value is 0.5.
pub fn rank_sum_test(a: &[f64], b: &[f64], _alternative: Alternative) -> RankSumResult {
    let n1 = a.len();
    let n2 = b.len();
    debug_assert!(n1 >= 2 && n2 >= 2, "rank-sum test needs both samples >= 2");

    // Pool, sort, midrank.
    let mut pooled: Vec<(f64, bool)> = a
        .iter()
        .map(|&v| (v, false))
        .chain(b.iter().map(|&v| (v, true)))
        .collect();
    pooled.sort_unstable_by(|x, y| x.0.total_cmp(&y.0));

    let total = n1 + n2;
    let mut rank_sum_b = 0.0f64;
    let mut tie_term = 0.0f64;
    let mut has_ties = false;
    let mut i = 0usize;
    while i < total {
        let mut j = i + 1;
        while j < total && pooled[j].0 == pooled[i].0 {
            j += 1;
        }
        let run = (j - i) as f64;
        if run > 1.0 {
            has_ties = true;
            tie_term += run * run * run - run;
        }
        let midrank = (i + j + 1) as f64 / 2.0;
        for item in &pooled[i..j] {
            if item.1 {
                rank_sum_b += midrank;
            }
        }
        i = j;
    }

    let u_statistic = rank_sum_b - (n2 * (n2 + 1)) as f64 / 2.0;
    let nn = (n1 * n2) as f64;
    let mean_u = nn / 2.0;

    // Identical multisets carry no directional evidence.
    if n1 == n2 && sorted(a) == sorted(b) {
        return RankSumResult {
            u_statistic,
            p_value: 0.5,
        };
    }

    let n_f = total as f64;
    let variance = nn / 12.0 * ((n_f + 1.0) - tie_term / (n_f * (n_f - 1.0)));
    if variance <= 0.0 {
        // All pooled values identical.
        return RankSumResult {
            u_statistic,
            p_value: 0.5,
        };
    }

    if !has_ties && total <= 12 && n1.min(n2) <= 2 {
        return RankSumResult {
            u_statistic,
            p_value: exact_tail(n1, n2, u_statistic),
        };
    }

    let z = (u_statistic - mean_u - 0.5) / libm::sqrt(variance);
    RankSumResult {
        u_statistic,
        p_value: normal_sf(z).clamp(0.0, 1.0),
    }
}
