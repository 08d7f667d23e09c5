//! Dense two-phase simplex for the small master LPs used by the
//! cutting-plane CVaR solver.

use crate::error::{Error, Result};

const EPS: f64 = 1e-11;

/// Minimize `c.x` subject to `a x = b`, `x >= 0`. Returns `(x, c.x)`.
/// Bland's rule throughout, so the method cannot cycle.
pub(crate) fn simplex_lp(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Result<(Vec<f64>, f64)> {
    let m = a.len();
    let n = c.len();
    if b.len() != m || a.iter().any(|row| row.len() != n) {
        return Err(Error::DimensionMismatch { expected: n, got: 0 });
    }

    // tableau with artificial basis; ensure b >= 0
    let cols = n + m + 1;
    let mut t = vec![vec![0.0; cols]; m];
    for i in 0..m {
        let flip = if b[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            t[i][j] = flip * a[i][j];
        }
        t[i][n + i] = 1.0;
        t[i][cols - 1] = flip * b[i];
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    // phase 1: minimize the sum of artificials
    let mut cost1 = vec![0.0; cols];
    for j in n..n + m {
        cost1[j] = 1.0;
    }
    run_simplex(&mut t, &mut basis, &cost1, n + m)?;
    let phase1: f64 = basis
        .iter()
        .enumerate()
        .map(|(i, &bj)| if bj >= n { t[i][cols - 1] } else { 0.0 })
        .sum();
    if phase1 > 1e-7 {
        return Err(Error::Singular("LP infeasible".into()));
    }
    // pivot remaining artificials out where possible
    for i in 0..m {
        if basis[i] >= n {
            if let Some(j) = (0..n).find(|&j| t[i][j].abs() > EPS) {
                pivot(&mut t, &mut basis, i, j);
            }
        }
    }

    // phase 2 on the original objective, artificials barred
    let mut cost2 = vec![0.0; cols];
    cost2[..n].copy_from_slice(c);
    run_simplex(&mut t, &mut basis, &cost2, n)?;

    let mut x = vec![0.0; n];
    for (i, &bj) in basis.iter().enumerate() {
        if bj < n {
            x[bj] = t[i][cols - 1];
        }
    }
    let obj = c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
    Ok((x, obj))
}

fn pivot(t: &mut [Vec<f64>], basis: &mut [usize], row: usize, col: usize) {
    let cols = t[0].len();
    let p = t[row][col];
    for j in 0..cols {
        t[row][j] /= p;
    }
    for i in 0..t.len() {
        if i != row && t[i][col].abs() > 0.0 {
            let f = t[i][col];
            for j in 0..cols {
                t[i][j] -= f * t[row][j];
            }
        }
    }
    basis[row] = col;
}

/// Bland-rule simplex iterations over the first `usable` columns.
fn run_simplex(t: &mut [Vec<f64>], basis: &mut [usize], cost: &[f64], usable: usize) -> Result<()> {
    let m = t.len();
    let cols = t[0].len();
    for _ in 0..50_000 {
        // reduced costs: c_j - c_B B^{-1} A_j, computed from the tableau
        let mut entering = None;
        for j in 0..usable {
            if basis.contains(&j) {
                continue;
            }
            let mut rc = cost[j];
            for i in 0..m {
                rc -= cost[basis[i]] * t[i][j];
            }
            if rc < -1e-9 {
                entering = Some(j);
                break; // Bland: smallest index
            }
        }
        let Some(j) = entering else { return Ok(()) };
        // ratio test, Bland tie-break on basis index
        let mut leave: Option<usize> = None;
        let mut best = f64::INFINITY;
        for i in 0..m {
            if t[i][j] > EPS {
                let ratio = t[i][cols - 1] / t[i][j];
                if ratio < best - 1e-12
                    || (ratio < best + 1e-12 && leave.map(|l| basis[i] < basis[l]).unwrap_or(false))
                {
                    best = ratio;
                    leave = Some(i);
                }
            }
        }
        let Some(i) = leave else {
            return Err(Error::Singular("LP unbounded".into()));
        };
        pivot(t, basis, i, j);
    }
    Err(Error::NoConvergence("simplex iteration cap".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_lp() {
        // min -x - 2y s.t. x + y + s1 = 4, x + 3y + s2 = 6, all >= 0
        // optimum at (3, 1): objective -5
        let c = vec![-1.0, -2.0, 0.0, 0.0];
        let a = vec![vec![1.0, 1.0, 1.0, 0.0], vec![1.0, 3.0, 0.0, 1.0]];
        let b = vec![4.0, 6.0];
        let (x, obj) = simplex_lp(&c, &a, &b).unwrap();
        assert!((x[0] - 3.0).abs() < 1e-9 && (x[1] - 1.0).abs() < 1e-9);
        assert!((obj + 5.0).abs() < 1e-9);
    }

    #[test]
    fn detects_infeasible() {
        // x = -1 with x >= 0
        let c = vec![1.0];
        let a = vec![vec![1.0]];
        let b = vec![-1.0];
        assert!(simplex_lp(&c, &a, &b).is_err());
    }

    #[test]
    fn handles_degenerate_equalities() {
        // x + y = 1, x - y = 1 -> x = 1, y = 0
        let c = vec![1.0, 1.0];
        let a = vec![vec![1.0, 1.0], vec![1.0, -1.0]];
        let b = vec![1.0, 1.0];
        let (x, _) = simplex_lp(&c, &a, &b).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-9 && x[1].abs() < 1e-9);
    }
}
