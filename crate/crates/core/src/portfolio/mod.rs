//! Portfolio allocation on simulated return scenarios: global minimum
//! variance, minimum CVaR (Rockafellar-Uryasev objective) and maximum
//! Sharpe ratio, all long-only and fully invested.

mod lp;

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// Which allocation problem to solve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Strategy {
    MaxSharpe,
    MinCvar,
    Gmv,
}

impl Strategy {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_lowercase().as_str() {
            "sr" | "sharpe" | "maxsr" => Ok(Strategy::MaxSharpe),
            "cvar" | "mincvar" | "min-cvar" => Ok(Strategy::MinCvar),
            "gmv" | "mv" | "minvar" => Ok(Strategy::Gmv),
            other => Err(Error::InvalidParameter(format!("unknown strategy `{other}`"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Strategy::MaxSharpe => "sr",
            Strategy::MinCvar => "cvar",
            Strategy::Gmv => "gmv",
        }
    }
}

/// Strategy plus its risk parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrategySpec {
    pub kind: Strategy,
    /// CVaR level for optimization and reporting.
    pub alpha: f64,
    /// Risk-free rate in return units per period.
    pub risk_free: f64,
}

impl StrategySpec {
    pub fn new(kind: Strategy, alpha: f64, risk_free: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidParameter(format!("alpha must be in (0,1), got {alpha}")));
        }
        Ok(StrategySpec { kind, alpha, risk_free })
    }
}

/// Long-only, fully invested weight vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Weights {
    pub values: Vec<f64>,
    /// True when a fallback rule produced the weights (max-Sharpe with no
    /// positive excess return).
    pub fallback: bool,
}

impl Weights {
    fn checked(values: Vec<f64>, fallback: bool) -> Result<Self> {
        let sum: f64 = values.iter().sum();
        if (sum - 1.0).abs() > 1e-8 {
            return Err(Error::InvalidData(format!("weights sum to {sum}")));
        }
        if values.iter().any(|&w| w < -1e-10) {
            return Err(Error::InvalidData("negative weight".into()));
        }
        Ok(Weights { values, fallback })
    }

    pub fn equal(d: usize) -> Self {
        Weights { values: vec![1.0 / d as f64; d], fallback: false }
    }

    /// Portfolio returns over scenario rows.
    pub fn portfolio_returns(&self, scenarios: &DMatrix<f64>) -> Vec<f64> {
        let w = DVector::from_column_slice(&self.values);
        (scenarios * w).iter().copied().collect()
    }
}

fn check_scenarios(scenarios: &DMatrix<f64>) -> Result<()> {
    let (s, d) = (scenarios.nrows(), scenarios.ncols());
    if d == 0 || s < d {
        return Err(Error::InvalidData(format!("need S >= d scenarios, got {s}x{d}")));
    }
    if scenarios.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidData("non-finite scenario entries".into()));
    }
    Ok(())
}

/// Column means of the scenario matrix.
pub fn scenario_means(scenarios: &DMatrix<f64>) -> Vec<f64> {
    (0..scenarios.ncols())
        .map(|j| scenarios.column(j).iter().sum::<f64>() / scenarios.nrows() as f64)
        .collect()
}

/// Sample covariance (divisor S-1) of the scenario matrix.
pub fn scenario_covariance(scenarios: &DMatrix<f64>) -> DMatrix<f64> {
    let s = scenarios.nrows();
    let d = scenarios.ncols();
    let means = scenario_means(scenarios);
    let mut cov = DMatrix::zeros(d, d);
    for i in 0..d {
        for j in i..d {
            let mut acc = 0.0;
            for r in 0..s {
                acc += (scenarios[(r, i)] - means[i]) * (scenarios[(r, j)] - means[j]);
            }
            let v = acc / (s as f64 - 1.0);
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
    }
    cov
}

/// Empirical CVaR at level `alpha`: the negated mean of the
/// `floor(alpha n)` smallest returns, reported as a loss (positive when
/// the tail is negative).
pub fn empirical_cvar(returns: &[f64], alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!("alpha {alpha}")));
    }
    let n = returns.len();
    if (n as f64) < 1.0 / alpha {
        return Err(Error::InvalidData(format!("need at least {} observations for alpha {alpha}", (1.0 / alpha).ceil())));
    }
    let k = ((alpha * n as f64).floor() as usize).max(1);
    let mut v = returns.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(-v[..k].iter().sum::<f64>() / k as f64)
}

/// Equality-constrained nonnegative QP by active-set iteration:
/// minimize `w' S w` subject to `a' w = 1`, `w >= 0`.
fn active_set_qp(sigma: &DMatrix<f64>, a: &[f64]) -> Result<Vec<f64>> {
    let d = a.len();
    let mut sigma = sigma.clone();
    // ridge until the full matrix factorizes
    let mut ridge = 0.0;
    let trace_scale = sigma.trace() / d as f64;
    while sigma.clone().cholesky().is_none() {
        ridge = if ridge == 0.0 { 1e-10 * trace_scale.max(1e-300) } else { ridge * 10.0 };
        if ridge > trace_scale.max(1e-10) {
            return Err(Error::Singular("covariance not positive definite after regularization".into()));
        }
        for i in 0..d {
            sigma[(i, i)] += ridge;
        }
    }

    let solve_on = |active: &[usize]| -> Result<Vec<f64>> {
        let k = active.len();
        let mut sub = DMatrix::zeros(k, k);
        for (ii, &i) in active.iter().enumerate() {
            for (jj, &j) in active.iter().enumerate() {
                sub[(ii, jj)] = sigma[(i, j)];
            }
        }
        let av = DVector::from_iterator(k, active.iter().map(|&i| a[i]));
        let chol = sub.cholesky().ok_or_else(|| Error::Singular("active-set subproblem".into()))?;
        let x = chol.solve(&av);
        let denom = av.dot(&x);
        if denom.abs() < 1e-300 {
            return Err(Error::Singular("degenerate constraint".into()));
        }
        let mut w = vec![0.0; d];
        for (ii, &i) in active.iter().enumerate() {
            w[i] = x[ii] / denom;
        }
        Ok(w)
    };

    let mut active: Vec<usize> = (0..d).collect();
    for _ in 0..(3 * d + 30) {
        let w = solve_on(&active)?;
        // drop the most negative active weight, if any
        if let Some((pos, _)) = active
            .iter()
            .enumerate()
            .map(|(p, &i)| (p, w[i]))
            .filter(|&(_, wi)| wi < -1e-12)
            .min_by(|x, y| x.1.partial_cmp(&y.1).unwrap())
        {
            active.remove(pos);
            if active.is_empty() {
                return Err(Error::Singular("active set emptied".into()));
            }
            continue;
        }
        // KKT for excluded coordinates: grad_j - lambda a_j >= 0 with
        // lambda = 2 w' S w
        let wv = DVector::from_column_slice(&w);
        let grad = &sigma * &wv * 2.0;
        let lambda = 2.0 * wv.dot(&(&sigma * &wv));
        let mut worst: Option<(usize, f64)> = None;
        for j in 0..d {
            if active.contains(&j) {
                continue;
            }
            let slack = grad[j] - lambda * a[j];
            if slack < -1e-9 && worst.map(|(_, s)| slack < s).unwrap_or(true) {
                worst = Some((j, slack));
            }
        }
        match worst {
            Some((j, _)) => active.push(j),
            None => return Ok(w),
        }
    }
    Err(Error::NoConvergence("active-set iteration cap".into()))
}

/// Global minimum-variance weights on the scenario sample covariance.
pub fn min_variance(scenarios: &DMatrix<f64>) -> Result<Weights> {
    check_scenarios(scenarios)?;
    let d = scenarios.ncols();
    if d == 1 {
        return Weights::checked(vec![1.0], false);
    }
    let cov = scenario_covariance(scenarios);
    let w = active_set_qp(&cov, &vec![1.0; d])?;
    Weights::checked(w, false)
}

/// Minimum-CVaR weights by cutting planes on the Rockafellar-Uryasev
/// objective: the subgradient at `w` is the negated mean of the worst
/// `floor(alpha S)` scenario rows; each master step is a small LP over
/// the accumulated cuts.
pub fn min_cvar(scenarios: &DMatrix<f64>, alpha: f64) -> Result<Weights> {
    check_scenarios(scenarios)?;
    let (s, d) = (scenarios.nrows(), scenarios.ncols());
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!("alpha {alpha}")));
    }
    if (s as f64) < 1.0 / alpha {
        return Err(Error::InvalidData(format!("need S >= 1/alpha scenarios, got {s}")));
    }
    if d == 1 {
        return Weights::checked(vec![1.0], false);
    }
    let k = ((alpha * s as f64).floor() as usize).max(1);

    // objective and subgradient at w
    let eval = |w: &[f64]| -> (f64, Vec<f64>) {
        let mut port: Vec<(f64, usize)> = (0..s)
            .map(|r| ((0..d).map(|j| scenarios[(r, j)] * w[j]).sum::<f64>(), r))
            .collect();
        port.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
        let mut g = vec![0.0; d];
        let mut obj = 0.0;
        for &(ret, r) in port.iter().take(k) {
            obj -= ret;
            for j in 0..d {
                g[j] -= scenarios[(r, j)];
            }
        }
        obj /= k as f64;
        for gj in g.iter_mut() {
            *gj /= k as f64;
        }
        (obj, g)
    };

    let mut w = vec![1.0 / d as f64; d];
    let (mut ub, g0) = eval(&w);
    let mut best_w = w.clone();
    let mut cuts: Vec<(Vec<f64>, f64)> = vec![(g0.clone(), ub - dot(&g0, &w))];

    for _ in 0..600 {
        // master LP: min t s.t. t >= c_k + g_k.w, w in simplex
        // vars: w (d), t+ , t-, slack per cut
        let m = cuts.len();
        let nv = d + 2 + m;
        let mut a = Vec::with_capacity(m + 1);
        let mut b = Vec::with_capacity(m + 1);
        for (idx, (g, c0)) in cuts.iter().enumerate() {
            let mut row = vec![0.0; nv];
            for j in 0..d {
                row[j] = -g[j];
            }
            row[d] = 1.0;
            row[d + 1] = -1.0;
            row[d + 2 + idx] = -1.0;
            a.push(row);
            b.push(*c0);
        }
        let mut row = vec![0.0; nv];
        for j in 0..d {
            row[j] = 1.0;
        }
        a.push(row);
        b.push(1.0);
        let mut c = vec![0.0; nv];
        c[d] = 1.0;
        c[d + 1] = -1.0;
        let (x, lb) = lp::simplex_lp(&c, &a, &b)?;
        w = x[..d].to_vec();
        // renormalize away LP roundoff
        let sum: f64 = w.iter().sum();
        for wj in w.iter_mut() {
            *wj = (*wj / sum).max(0.0);
        }
        let sum2: f64 = w.iter().sum();
        for wj in w.iter_mut() {
            *wj /= sum2;
        }

        let (obj, g) = eval(&w);
        if obj < ub {
            ub = obj;
            best_w = w.clone();
        }
        if ub - lb < 1e-9 * (1.0 + ub.abs()) {
            break;
        }
        cuts.push((g.clone(), obj - dot(&g, &w)));
    }
    Weights::checked(best_w, false)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Maximum Sharpe ratio via the convex reformulation: minimize `y' S y`
/// subject to `(mu - rf)' y = 1`, `y >= 0`, then normalize. Falls back to
/// GMV (flagged) when no asset has positive excess return.
pub fn max_sharpe(scenarios: &DMatrix<f64>, risk_free: f64) -> Result<Weights> {
    check_scenarios(scenarios)?;
    let mu = scenario_means(scenarios);
    let cov = scenario_covariance(scenarios);
    max_sharpe_from_moments(&mu, &cov, risk_free).or_else(|e| match e {
        Error::InvalidData(_) => {
            let mut w = min_variance(scenarios)?;
            w.fallback = true;
            Ok(w)
        }
        other => Err(other),
    })
}

/// Max-Sharpe on explicit moments. Errors with `InvalidData` when every
/// excess mean is nonpositive (callers fall back).
pub fn max_sharpe_from_moments(mu: &[f64], cov: &DMatrix<f64>, risk_free: f64) -> Result<Weights> {
    let d = mu.len();
    let a: Vec<f64> = mu.iter().map(|m| m - risk_free).collect();
    if a.iter().all(|&x| x <= 0.0) {
        return Err(Error::InvalidData("no positive excess return".into()));
    }
    if d == 1 {
        return Weights::checked(vec![1.0], false);
    }
    let y = active_set_qp(cov, &a)?;
    let total: f64 = y.iter().sum();
    if total <= 0.0 {
        return Err(Error::Singular("tangency normalization".into()));
    }
    Weights::checked(y.iter().map(|v| (v / total).max(0.0)).collect(), false)
}

#[cfg(test)]
mod tests;
