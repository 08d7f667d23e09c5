//! Sample statistics: moments, empirical quantiles, Kendall's tau.

use crate::error::{Error, Result};

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Unbiased sample variance (divisor n-1).
pub fn variance(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (x.len() as f64 - 1.0)
}

pub fn std_dev(x: &[f64]) -> f64 {
    variance(x).sqrt()
}

/// Sample skewness (biased, moment form m3 / m2^1.5).
pub fn skewness(x: &[f64]) -> f64 {
    let m = mean(x);
    let n = x.len() as f64;
    let m2 = x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n;
    let m3 = x.iter().map(|v| (v - m).powi(3)).sum::<f64>() / n;
    m3 / m2.powf(1.5)
}

/// Sample excess kurtosis (moment form m4 / m2^2 - 3).
pub fn excess_kurtosis(x: &[f64]) -> f64 {
    let m = mean(x);
    let n = x.len() as f64;
    let m2 = x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n;
    let m4 = x.iter().map(|v| (v - m).powi(4)).sum::<f64>() / n;
    m4 / (m2 * m2) - 3.0
}

/// Empirical quantile, inverse-ECDF convention: the ceil(alpha*n)-th
/// smallest observation.
pub fn empirical_quantile(x: &[f64], alpha: f64) -> f64 {
    assert!(!x.is_empty() && alpha > 0.0 && alpha < 1.0);
    let mut v = x.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let k = ((alpha * v.len() as f64).ceil() as usize).clamp(1, v.len());
    v[k - 1]
}

/// Kendall's tau-b via Knight's O(n log n) algorithm, with tie
/// corrections in both variables.
pub fn kendall_tau(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), got: y.len() });
    }
    let n = x.len();
    if n < 2 {
        return Err(Error::InvalidData("kendall tau needs at least 2 observations".into()));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| {
        x[a].partial_cmp(&x[b])
            .unwrap()
            .then(y[a].partial_cmp(&y[b]).unwrap())
    });

    // ties in x, and joint ties in (x, y)
    let mut n1 = 0u64; // sum t*(t-1)/2 over x-tie groups
    let mut n3 = 0u64; // sum over joint-tie groups
    {
        let mut i = 0;
        while i < n {
            let mut j = i + 1;
            while j < n && x[idx[j]] == x[idx[i]] {
                j += 1;
            }
            let t = (j - i) as u64;
            n1 += t * (t - 1) / 2;
            let mut k = i;
            while k < j {
                let mut l = k + 1;
                while l < j && y[idx[l]] == y[idx[k]] {
                    l += 1;
                }
                let tj = (l - k) as u64;
                n3 += tj * (tj - 1) / 2;
                k = l;
            }
            i = j;
        }
    }

    // merge sort on y (in x-order), counting swaps = discordant pairs
    let mut ys: Vec<f64> = idx.iter().map(|&i| y[i]).collect();
    let mut buf = vec![0.0; n];
    let swaps = merge_count(&mut ys, &mut buf);

    // ties in y
    let mut n2 = 0u64;
    {
        let mut sorted_y: Vec<f64> = y.to_vec();
        sorted_y.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut i = 0;
        while i < n {
            let mut j = i + 1;
            while j < n && sorted_y[j] == sorted_y[i] {
                j += 1;
            }
            let t = (j - i) as u64;
            n2 += t * (t - 1) / 2;
            i = j;
        }
    }

    let n0 = n as u64 * (n as u64 - 1) / 2;
    let num = n0 as f64 - n1 as f64 - n2 as f64 + n3 as f64 - 2.0 * swaps as f64;
    let den = ((n0 - n1) as f64 * (n0 - n2) as f64).sqrt();
    if den == 0.0 {
        return Err(Error::InvalidData("kendall tau undefined for constant input".into()));
    }
    Ok(num / den)
}

fn merge_count(v: &mut [f64], buf: &mut [f64]) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut swaps = merge_count(&mut v[..mid], buf) + merge_count(&mut v[mid..], buf);
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if v[i] <= v[j] {
            buf[k] = v[i];
            i += 1;
        } else {
            buf[k] = v[j];
            swaps += (mid - i) as u64;
            j += 1;
        }
        k += 1;
    }
    while i < mid {
        buf[k] = v[i];
        i += 1;
        k += 1;
    }
    while j < n {
        buf[k] = v[j];
        j += 1;
        k += 1;
    }
    v.copy_from_slice(&buf[..n]);
    swaps
}

/// Asymptotic two-sided Kendall independence test: true when |tau| is
/// significant at the given normal quantile (e.g. 1.96 for 5%).
pub fn kendall_independent(tau: f64, n: usize, z_crit: f64) -> bool {
    let nf = n as f64;
    let z = tau.abs() * (9.0 * nf * (nf - 1.0) / (2.0 * (2.0 * nf + 5.0))).sqrt();
    z < z_crit
}
