//! VaR and ES forecast evaluation: unconditional/conditional coverage
//! and dynamic-quantile tests, exceedance summaries, exceedance-residual
//! and conditional-calibration ES tests.
//!
//! Sign convention: VaR and ES are stored as return thresholds (negative
//! numbers at usual levels); an exceedance is `r_t < VaR_t`. Display
//! layers convert to positive losses.

use crate::error::{Error, Result};
use crate::util::dist::{chi2_sf, t_cdf};
use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

/// Aligned per-day forecasts and realizations at one coverage level.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HitSequence {
    pub returns: Vec<f64>,
    pub var: Vec<f64>,
    pub es: Vec<f64>,
    /// Volatility forecasts, used to standardize exceedance residuals.
    pub vol: Vec<f64>,
    /// Coverage level p (e.g. 0.01).
    pub level: f64,
}

impl HitSequence {
    pub fn new(returns: Vec<f64>, var: Vec<f64>, es: Vec<f64>, vol: Vec<f64>, level: f64) -> Result<Self> {
        let t = returns.len();
        if var.len() != t || es.len() != t || vol.len() != t {
            return Err(Error::DimensionMismatch { expected: t, got: var.len().min(es.len()).min(vol.len()) });
        }
        if !(level > 0.0 && level < 1.0) {
            return Err(Error::InvalidParameter(format!("level {level}")));
        }
        Ok(HitSequence { returns, var, es, vol, level })
    }

    pub fn hits(&self) -> Vec<bool> {
        self.returns.iter().zip(&self.var).map(|(&r, &v)| r < v).collect()
    }
}

/// VaR coverage report mirroring the standard backtest table columns.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VarTestReport {
    /// Number of exceedances.
    pub ne: usize,
    pub uc: f64,
    pub uc_p: f64,
    pub cc: f64,
    pub cc_p: f64,
    pub dq: Option<f64>,
    pub dq_p: Option<f64>,
    /// Rank of the DQ regressor matrix (chi-squared dof actually used).
    pub dq_dof: usize,
    /// Mean absolute deviation |r - VaR| on exceedance days.
    pub ad: Option<f64>,
    /// Actual over expected exceedances, NE / (p T).
    pub ae: f64,
    /// Average quantile (tick) loss.
    pub aql: f64,
    /// True when NE = 0 or NE = T and the limiting UC form was used.
    pub degenerate: bool,
}

fn xlogy(x: f64, y: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * y.ln()
    }
}

/// Kupiec/Christoffersen/Engle-Manganelli VaR backtest plus exceedance
/// summaries.
pub fn var_backtest(h: &HitSequence) -> Result<VarTestReport> {
    let t = h.returns.len();
    if t < 50 {
        return Err(Error::InvalidData(format!("need at least 50 observations, got {t}")));
    }
    let p = h.level;
    let hits = h.hits();
    let n = hits.iter().filter(|&&x| x).count();
    let tf = t as f64;
    let nf = n as f64;
    let degenerate = n == 0 || n == t;

    // unconditional coverage likelihood ratio
    let uc = -2.0
        * (xlogy(tf - nf, 1.0 - p) + xlogy(nf, p) - xlogy(tf - nf, 1.0 - nf / tf) - xlogy(nf, nf / tf));
    let uc = uc.max(0.0);
    let uc_p = chi2_sf(uc, 1.0);

    // first-order Markov independence component
    let (mut n00, mut n01, mut n10, mut n11) = (0.0f64, 0.0, 0.0, 0.0);
    for w in hits.windows(2) {
        match (w[0], w[1]) {
            (false, false) => n00 += 1.0,
            (false, true) => n01 += 1.0,
            (true, false) => n10 += 1.0,
            (true, true) => n11 += 1.0,
        }
    }
    let pi01 = if n00 + n01 > 0.0 { n01 / (n00 + n01) } else { 0.0 };
    let pi11 = if n10 + n11 > 0.0 { n11 / (n10 + n11) } else { 0.0 };
    let pi = (n01 + n11) / (n00 + n01 + n10 + n11);
    let l1 = xlogy(n00, 1.0 - pi01) + xlogy(n01, pi01) + xlogy(n10, 1.0 - pi11) + xlogy(n11, pi11);
    let l0 = xlogy(n00 + n10, 1.0 - pi) + xlogy(n01 + n11, pi);
    let lr_ind = (2.0 * (l1 - l0)).max(0.0);
    let cc = uc + lr_ind;
    let cc_p = chi2_sf(cc, 2.0);

    // dynamic quantile: project hit deviations on [1, 4 hit lags, VaR_t]
    let lags = 4;
    let (dq, dq_p, dq_dof) = if t > lags + 8 {
        let rows = t - lags;
        let mut x = DMatrix::zeros(rows, lags + 2);
        let mut y = nalgebra::DVector::zeros(rows);
        for r in 0..rows {
            let tt = r + lags;
            x[(r, 0)] = 1.0;
            for l in 1..=lags {
                x[(r, l)] = if hits[tt - l] { 1.0 } else { 0.0 };
            }
            x[(r, lags + 1)] = h.var[tt];
            y[r] = (if hits[tt] { 1.0 } else { 0.0 }) - p;
        }
        let svd = x.svd(true, false);
        let tol = 1e-10 * svd.singular_values.max();
        let rank = svd.singular_values.iter().filter(|&&s| s > tol).count();
        if rank == 0 {
            (None, None, 0)
        } else {
            let u = svd.u.as_ref().expect("svd computed");
            let mut stat = 0.0;
            for (k, &s) in svd.singular_values.iter().enumerate() {
                if s > tol {
                    let proj = u.column(k).dot(&y);
                    stat += proj * proj;
                }
            }
            stat /= p * (1.0 - p);
            (Some(stat), Some(chi2_sf(stat, rank as f64)), rank)
        }
    } else {
        (None, None, 0)
    };

    let ad = if n > 0 {
        Some(
            hits.iter()
                .enumerate()
                .filter(|(_, &hit)| hit)
                .map(|(i, _)| (h.returns[i] - h.var[i]).abs())
                .sum::<f64>()
                / nf,
        )
    } else {
        None
    };
    let ae = nf / (p * tf);
    let aql = hits
        .iter()
        .enumerate()
        .map(|(i, &hit)| {
            let ind = if hit { 1.0 } else { 0.0 };
            (p - ind) * (h.returns[i] - h.var[i])
        })
        .sum::<f64>()
        / tf;

    Ok(VarTestReport { ne: n, uc, uc_p, cc, cc_p, dq, dq_p, dq_dof, ad, ae, aql, degenerate })
}

/// Exceedance-residual ES test output.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ErTestReport {
    /// Mean standardized exceedance residual.
    pub mean_residual: f64,
    /// One-sided bootstrap p-value against "ES understates risk".
    pub p_bootstrap: f64,
    /// One-sided t-approximation p-value.
    pub p_asymptotic: f64,
    pub n_exceedances: usize,
    pub replications: usize,
}

/// Exceedance-residual test: residuals `(r - ES)/vol` on exceedance
/// days are mean-zero under correct ES forecasts; the alternative of
/// understated risk pushes the mean negative. Bootstrap resamples the
/// centered residuals.
pub fn es_er_test(h: &HitSequence, replications: usize, seed: u64) -> Result<ErTestReport> {
    if replications == 0 {
        return Err(Error::InvalidParameter("need at least 1 bootstrap replication".into()));
    }
    let hits = h.hits();
    let residuals: Vec<f64> = hits
        .iter()
        .enumerate()
        .filter(|(_, &hit)| hit)
        .map(|(i, _)| (h.returns[i] - h.es[i]) / h.vol[i].max(1e-300))
        .collect();
    let n = residuals.len();
    if n < 5 {
        return Err(Error::NotComputable(format!("only {n} exceedances; need at least 5")));
    }
    let mean = residuals.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = residuals.iter().map(|e| e - mean).collect();

    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut count = 0usize;
    for _ in 0..replications {
        let m: f64 = (0..n).map(|_| centered[rng.gen_range(0..n)]).sum::<f64>() / n as f64;
        if m <= mean {
            count += 1;
        }
    }
    let p_bootstrap = count as f64 / replications as f64;

    let sd = (centered.iter().map(|e| e * e).sum::<f64>() / (n as f64 - 1.0)).sqrt();
    let p_asymptotic = if sd < 1e-300 {
        if mean < 0.0 {
            0.0
        } else {
            1.0
        }
    } else {
        t_cdf(mean / (sd / (n as f64).sqrt()), n as f64 - 1.0)
    };

    Ok(ErTestReport { mean_residual: mean, p_bootstrap, p_asymptotic, n_exceedances: n, replications })
}

/// Conditional-calibration ES test output: simple (unconditional mean)
/// and general (lagged instruments) Wald statistics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CondCalibReport {
    pub simple: f64,
    pub simple_p: f64,
    /// Retained moment directions in the simple test.
    pub simple_dof: usize,
    pub general: f64,
    pub general_p: f64,
    /// Retained moment directions in the general test.
    pub general_dof: usize,
}

/// Two-component identification function for (VaR, ES) calibration:
/// `V1 = p - I_t` and `V2 = ES_t - VaR_t + I_t (VaR_t - r_t) / p`; both
/// have mean zero under correctly calibrated forecasts.
fn identification(h: &HitSequence) -> Vec<[f64; 2]> {
    let p = h.level;
    h.hits()
        .iter()
        .enumerate()
        .map(|(i, &hit)| {
            let ind = if hit { 1.0 } else { 0.0 };
            [p - ind, h.es[i] - h.var[i] + ind * (h.var[i] - h.returns[i]) / p]
        })
        .collect()
}

/// Wald statistic `T gbar' Omega^+ gbar` with the moment covariance
/// inverted on its well-identified eigenspace; the chi-squared dof is
/// the retained rank. Lagged-instrument moments are nearly collinear at
/// low hit rates, so a spectral cutoff keeps the statistic stable.
fn wald(moments: &[Vec<f64>]) -> Result<(f64, f64, usize)> {
    let t = moments.len();
    let q = moments[0].len();
    let mut mean = vec![0.0; q];
    for g in moments {
        for (m, &gi) in mean.iter_mut().zip(g) {
            *m += gi / t as f64;
        }
    }
    if moments.iter().all(|g| g.iter().all(|x| x.abs() < 1e-300)) {
        return Ok((0.0, 1.0, 0));
    }
    let mut omega = DMatrix::zeros(q, q);
    for g in moments {
        for i in 0..q {
            for j in 0..q {
                omega[(i, j)] += g[i] * g[j] / t as f64;
            }
        }
    }
    let eig = nalgebra::SymmetricEigen::new(omega);
    let smax = eig.eigenvalues.amax();
    let cutoff = 1e-7 * smax;
    let mv = nalgebra::DVector::from_column_slice(&mean);
    let mut stat = 0.0;
    let mut rank = 0usize;
    for (k, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam > cutoff {
            let proj = eig.eigenvectors.column(k).dot(&mv);
            stat += proj * proj / lam;
            rank += 1;
        }
    }
    if rank == 0 {
        return Err(Error::Singular("moment covariance has no identified direction".into()));
    }
    stat *= t as f64;
    Ok((stat.max(0.0), chi2_sf(stat.max(0.0), rank as f64), rank))
}

/// Conditional-calibration tests of the joint (VaR, ES) forecasts.
pub fn es_cond_calibration(h: &HitSequence) -> Result<CondCalibReport> {
    let t = h.returns.len();
    if t < 250 {
        return Err(Error::InvalidData(format!("need at least 250 observations, got {t}")));
    }
    let v = identification(h);

    let simple_moments: Vec<Vec<f64>> = v.iter().map(|g| g.to_vec()).collect();
    let (simple, simple_p, simple_dof) = wald(&simple_moments)?;

    // general variant: instruments 1, V1_{t-1}, V2_{t-1} on each component
    let general_moments: Vec<Vec<f64>> = (1..t)
        .map(|i| {
            let inst = [1.0, v[i - 1][0], v[i - 1][1]];
            let mut g = Vec::with_capacity(6);
            for &instrument in &inst {
                for &comp in &v[i] {
                    g.push(instrument * comp);
                }
            }
            g
        })
        .collect();
    let (general, general_p, general_dof) = wald(&general_moments)?;

    Ok(CondCalibReport { simple, simple_p, simple_dof, general, general_p, general_dof })
}
