//! Worst-case estimation error and correlation coefficients against
//! reference ratings.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-arm absolute errors plus their maximum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    /// `max_i |s_i − ŝ_i|`.
    pub wce: f64,
    pub per_arm_abs_error: Vec<f64>,
    /// Index attaining the max; ties go to the lowest index.
    pub argmax_arm: usize,
}

/// Worst-case estimation error across arms.
pub fn wce(truth: &[f64], estimates: &[f64]) -> Result<ErrorReport> {
    if truth.len() != estimates.len() {
        return Err(Error::LengthMismatch {
            left: truth.len(),
            right: estimates.len(),
        });
    }
    if truth.is_empty() {
        return Err(Error::TooShort {
            required: 1,
            got: 0,
        });
    }
    let per_arm: Vec<f64> = truth
        .iter()
        .zip(estimates)
        .map(|(t, e)| (t - e).abs())
        .collect();
    let mut argmax = 0;
    for (i, &err) in per_arm.iter().enumerate() {
        if err > per_arm[argmax] {
            argmax = i;
        }
    }
    Ok(ErrorReport {
        wce: per_arm[argmax],
        argmax_arm: argmax,
        per_arm_abs_error: per_arm,
    })
}

fn check_paired(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::TooShort {
            required: 2,
            got: x.len(),
        });
    }
    Ok(())
}

/// Product-moment correlation. Errors when either input is constant.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    check_paired(x, y)?;
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (&a, &b) in x.iter().zip(y) {
        let dx = a - mx;
        let dy = b - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx == 0.0 {
        return Err(Error::ConstantInput("x"));
    }
    if syy == 0.0 {
        return Err(Error::ConstantInput("y"));
    }
    Ok(sxy / (sxx.sqrt() * syy.sqrt()))
}

/// Average ranks (1-based); tied runs share the mean of their positions.
fn average_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // positions i..=j (0-based) share rank mean of (i+1)..=(j+1)
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = rank;
        }
        i = j + 1;
    }
    ranks
}

/// Rank correlation: Pearson on average-rank transforms.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    check_paired(x, y)?;
    pearson(&average_ranks(x), &average_ranks(y))
}

/// Kendall's tau-b (tie-corrected), computed in O(n log n):
/// sort by (x, y), count x-tie and joint-tie pairs in one scan, count
/// discordant pairs as merge-sort inversions of the y sequence, and count
/// y-tie pairs on the sorted y values.
///
/// `tau_b = (n0 − n1 − n2 + n3 − 2·swaps) / sqrt((n0 − n1)(n0 − n2))`
/// with `n0` all pairs, `n1`/`n2` pairs tied in x/y, `n3` pairs tied in both.
pub fn kendall_tau(x: &[f64], y: &[f64]) -> Result<f64> {
    check_paired(x, y)?;
    let n = x.len();

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]).then(y[a].total_cmp(&y[b])));

    let pairs = |c: u64| c * c.saturating_sub(1) / 2;
    let n0 = pairs(n as u64);

    // x ties and joint ties over the (x, y)-sorted order.
    let mut n1 = 0u64;
    let mut n3 = 0u64;
    let mut run_x = 1u64;
    let mut run_xy = 1u64;
    for w in 1..n {
        let (prev, cur) = (order[w - 1], order[w]);
        if x[cur] == x[prev] {
            run_x += 1;
            if y[cur] == y[prev] {
                run_xy += 1;
            } else {
                n3 += pairs(run_xy);
                run_xy = 1;
            }
        } else {
            n1 += pairs(run_x);
            n3 += pairs(run_xy);
            run_x = 1;
            run_xy = 1;
        }
    }
    n1 += pairs(run_x);
    n3 += pairs(run_xy);

    // Discordant pairs = inversions of y in x-sorted order (x ties broken by
    // y, so within-tie pairs contribute no inversions).
    let mut ys: Vec<f64> = order.iter().map(|&i| y[i]).collect();
    let swaps = count_inversions(&mut ys);

    // y ties, counted on the now-sorted y values.
    let mut n2 = 0u64;
    let mut run_y = 1u64;
    for w in 1..n {
        if ys[w] == ys[w - 1] {
            run_y += 1;
        } else {
            n2 += pairs(run_y);
            run_y = 1;
        }
    }
    n2 += pairs(run_y);

    if n0 == n1 {
        return Err(Error::ConstantInput("x"));
    }
    if n0 == n2 {
        return Err(Error::ConstantInput("y"));
    }

    let con_minus_dis = n0 as f64 - n1 as f64 - n2 as f64 + n3 as f64 - 2.0 * swaps as f64;
    // Single sqrt of the product keeps tie-free cases exact (e.g. -1/3).
    Ok(con_minus_dis / ((n0 - n1) as f64 * (n0 - n2) as f64).sqrt())
}

/// Bottom-up merge sort counting strict inversions (`a[i] > a[j]`, `i < j`).
fn count_inversions(a: &mut [f64]) -> u64 {
    let n = a.len();
    let mut buf = vec![0.0; n];
    let mut inversions = 0u64;
    let mut width = 1;
    while width < n {
        let mut lo = 0;
        while lo + width < n {
            let mid = lo + width;
            let hi = (mid + width).min(n);
            let (mut i, mut j, mut k) = (lo, mid, lo);
            while i < mid && j < hi {
                // Equal values are not inversions: take from the left run.
                if a[i] <= a[j] {
                    buf[k] = a[i];
                    i += 1;
                } else {
                    inversions += (mid - i) as u64;
                    buf[k] = a[j];
                    j += 1;
                }
                k += 1;
            }
            buf[k..hi].copy_from_slice(if i < mid { &a[i..mid] } else { &a[j..hi] });
            a[lo..hi].copy_from_slice(&buf[lo..hi]);
            lo = hi;
        }
        width *= 2;
    }
    inversions
}
