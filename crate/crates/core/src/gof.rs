//! Copula goodness-of-fit: empirical-copula-process tests with
//! Cramer-von Mises and Kolmogorov-Smirnov statistics and parametric
//! bootstrap p-values.
//!
//! ECP compares the empirical copula of the data against the model CDF
//! (exact for bivariate models, Monte Carlo otherwise); ECP2 first maps
//! the data through the model's Rosenblatt transform and tests the
//! result against the independence copula. Bootstrap replications
//! simulate from the model, refit the edge parameters (families and
//! structure fixed) and recompute the statistic.

use crate::bicop::bicop_cdf;
use crate::error::{Error, Result};
use crate::util::rng::derive_seed;
use crate::vine::{refit_parameters, rosenblatt, vine_simulate, VineModel};
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Which empirical-copula test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GofTest {
    Ecp,
    Ecp2,
}

/// Which distance between the empirical copula and the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GofStatistic {
    CramerVonMises,
    KolmogorovSmirnov,
}

impl GofStatistic {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_lowercase().as_str() {
            "cvm" | "cramer-von-mises" => Ok(GofStatistic::CramerVonMises),
            "ks" | "kolmogorov-smirnov" => Ok(GofStatistic::KolmogorovSmirnov),
            other => Err(Error::InvalidParameter(format!("unknown statistic `{other}`"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GofStatistic::CramerVonMises => "CvM",
            GofStatistic::KolmogorovSmirnov => "KS",
        }
    }
}

/// Test configuration. `model_cdf_draws` sizes the Monte Carlo estimate
/// of the model CDF when no closed form exists (d > 2).
#[derive(Debug, Clone, Copy)]
pub struct GofConfig {
    pub statistic: GofStatistic,
    pub replications: usize,
    pub seed: u64,
    pub model_cdf_draws: usize,
}

impl Default for GofConfig {
    fn default() -> Self {
        GofConfig {
            statistic: GofStatistic::CramerVonMises,
            replications: 200,
            seed: 0,
            model_cdf_draws: 100_000,
        }
    }
}

/// Result of one goodness-of-fit run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GofReport {
    pub test: GofTest,
    pub statistic: GofStatistic,
    pub value: f64,
    pub p_value: f64,
    pub replications: usize,
}

/// Rank pseudo-observations: each margin is replaced by its scaled
/// ranks `r/(n+1)`, so the empirical margins are exactly uniform and the
/// test statistic measures only the dependence structure. Applied
/// identically to the data and every bootstrap replicate.
pub fn pseudo_observations(u: &DMatrix<f64>) -> DMatrix<f64> {
    let (n, d) = (u.nrows(), u.ncols());
    let mut out = DMatrix::zeros(n, d);
    for j in 0..d {
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&a, &b| u[(a, j)].partial_cmp(&u[(b, j)]).unwrap());
        for (rank, &row) in idx.iter().enumerate() {
            out[(row, j)] = (rank + 1) as f64 / (n as f64 + 1.0);
        }
    }
    out
}

/// The empirical copula of a sample: `C_hat(t) = (1/n) sum 1{u_i <= t}`.
pub struct EmpiricalCopula {
    points: DMatrix<f64>,
}

impl EmpiricalCopula {
    pub fn new(u: &DMatrix<f64>) -> Result<Self> {
        if u.nrows() == 0 {
            return Err(Error::InvalidData("empty sample".into()));
        }
        Ok(EmpiricalCopula { points: u.clone() })
    }

    /// Evaluate at a point of the unit hypercube.
    pub fn value(&self, t: &[f64]) -> f64 {
        debug_assert_eq!(t.len(), self.points.ncols());
        let mut count = 0usize;
        for r in 0..self.points.nrows() {
            if (0..t.len()).all(|j| self.points[(r, j)] <= t[j]) {
                count += 1;
            }
        }
        count as f64 / self.points.nrows() as f64
    }
}

/// Model CDF evaluated at each row of `at`: exact pair-copula CDF in two
/// dimensions, Monte Carlo otherwise.
fn model_cdf_at(model: &VineModel, at: &DMatrix<f64>, draws: usize, seed: u64) -> Result<Vec<f64>> {
    let d = model.structure.d;
    if d == 2 {
        let diag = model.structure.diagonal();
        let spec = model.spec_at(1, 0);
        let partner = model.structure.matrix_at(1, 0);
        let mut out = Vec::with_capacity(at.nrows());
        for r in 0..at.nrows() {
            out.push(bicop_cdf(at[(r, diag[0])], at[(r, partner)], spec)?);
        }
        return Ok(out);
    }
    let sample = vine_simulate(model, draws, seed)?;
    let emp = EmpiricalCopula::new(&sample)?;
    let mut out = Vec::with_capacity(at.nrows());
    for r in 0..at.nrows() {
        let t: Vec<f64> = at.row(r).iter().copied().collect();
        out.push(emp.value(&t));
    }
    Ok(out)
}

fn distance(statistic: GofStatistic, emp: &[f64], model: &[f64]) -> f64 {
    match statistic {
        GofStatistic::CramerVonMises => emp.iter().zip(model).map(|(a, b)| (a - b) * (a - b)).sum(),
        GofStatistic::KolmogorovSmirnov => emp
            .iter()
            .zip(model)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max),
    }
}

fn ecp_statistic(u: &DMatrix<f64>, model: &VineModel, cfg: &GofConfig, cdf_seed: u64) -> Result<f64> {
    let emp = EmpiricalCopula::new(u)?;
    let emp_vals: Vec<f64> = (0..u.nrows())
        .map(|r| {
            let t: Vec<f64> = u.row(r).iter().copied().collect();
            emp.value(&t)
        })
        .collect();
    let model_vals = model_cdf_at(model, u, cfg.model_cdf_draws, cdf_seed)?;
    Ok(distance(cfg.statistic, &emp_vals, &model_vals))
}

/// ECP2 statistic: Rosenblatt-transform the data with the model, then
/// measure the distance to the independence copula.
fn ecp2_statistic(u: &DMatrix<f64>, model: &VineModel, cfg: &GofConfig) -> Result<f64> {
    let z = rosenblatt(u, model)?;
    let emp = EmpiricalCopula::new(&z)?;
    let mut emp_vals = Vec::with_capacity(z.nrows());
    let mut indep_vals = Vec::with_capacity(z.nrows());
    for r in 0..z.nrows() {
        let t: Vec<f64> = z.row(r).iter().copied().collect();
        emp_vals.push(emp.value(&t));
        indep_vals.push(t.iter().product());
    }
    Ok(distance(cfg.statistic, &emp_vals, &indep_vals))
}

fn check_config(u: &DMatrix<f64>, model: &VineModel, cfg: &GofConfig) -> Result<()> {
    if u.ncols() != model.structure.d {
        return Err(Error::DimensionMismatch { expected: model.structure.d, got: u.ncols() });
    }
    if cfg.replications < 100 {
        return Err(Error::InvalidParameter(format!(
            "need at least 100 bootstrap replications, got {}",
            cfg.replications
        )));
    }
    Ok(())
}

fn bootstrap_p(
    observed: f64,
    n: usize,
    model: &VineModel,
    cfg: &GofConfig,
    replicate_stat: impl Fn(&DMatrix<f64>, &VineModel, u64) -> Result<f64> + Sync,
) -> Result<f64> {
    let stats: Result<Vec<f64>> = (0..cfg.replications)
        .into_par_iter()
        .map(|b| {
            let sim_seed = derive_seed(cfg.seed, "gof-bootstrap-sim", b as u64);
            let sample = vine_simulate(model, n, sim_seed)?;
            let refit = refit_parameters(&sample, model)?;
            replicate_stat(&sample, &refit, derive_seed(cfg.seed, "gof-bootstrap-cdf", b as u64))
        })
        .collect();
    let stats = stats?;
    let exceed = stats.iter().filter(|&&s| s > observed).count();
    Ok(exceed as f64 / cfg.replications as f64)
}

/// Empirical-copula-process test of `model` against the sample `u`.
pub fn ecp_test(u: &DMatrix<f64>, model: &VineModel, cfg: &GofConfig) -> Result<GofReport> {
    check_config(u, model, cfg)?;
    let ranked = pseudo_observations(u);
    let observed = ecp_statistic(&ranked, model, cfg, derive_seed(cfg.seed, "gof-observed-cdf", 0))?;
    let p = bootstrap_p(observed, u.nrows(), model, cfg, |sample, refit, cdf_seed| {
        ecp_statistic(&pseudo_observations(sample), refit, cfg, cdf_seed)
    })?;
    Ok(GofReport {
        test: GofTest::Ecp,
        statistic: cfg.statistic,
        value: observed,
        p_value: p,
        replications: cfg.replications,
    })
}

/// Rosenblatt-based ECP2 test of `model` against the sample `u`.
pub fn ecp2_test(u: &DMatrix<f64>, model: &VineModel, cfg: &GofConfig) -> Result<GofReport> {
    check_config(u, model, cfg)?;
    let ranked = pseudo_observations(u);
    let observed = ecp2_statistic(&ranked, model, cfg)?;
    let p = bootstrap_p(observed, u.nrows(), model, cfg, |sample, refit, _| {
        ecp2_statistic(&pseudo_observations(sample), refit, cfg)
    })?;
    Ok(GofReport {
        test: GofTest::Ecp2,
        statistic: cfg.statistic,
        value: observed,
        p_value: p,
        replications: cfg.replications,
    })
}
