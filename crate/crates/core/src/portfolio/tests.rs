use super::*;
use crate::util::dist::normal_quantile;
use crate::util::rng::rng_for;
use rand::Rng;

fn mat(rows: &[&[f64]]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j])
}

#[test]
fn cvar_single_worst_observation() {
    let mut r = vec![0.01; 9];
    r.push(-0.10);
    assert!((empirical_cvar(&r, 0.10).unwrap() - 0.10).abs() < 1e-15);
}

#[test]
fn cvar_constant_series() {
    let r = vec![-0.02; 50];
    assert!((empirical_cvar(&r, 0.10).unwrap() - 0.02).abs() < 1e-15);
    let r = vec![0.03; 50];
    assert!((empirical_cvar(&r, 0.10).unwrap() + 0.03).abs() < 1e-15);
}

#[test]
fn cvar_matches_normal_expected_shortfall() {
    // ES_0.1 of a standard normal = phi(z_0.1)/0.1 ~ 1.755
    let mut rng = rng_for(1, "cvar-normal", 0);
    let draws: Vec<f64> = (0..1000).map(|_| normal_quantile(rng.gen_range(1e-12..1.0))).collect();
    let cvar = empirical_cvar(&draws, 0.10).unwrap();
    assert!((cvar - 1.755).abs() < 0.15, "cvar {cvar}");
}

#[test]
fn cvar_rejects_short_series() {
    let r = vec![0.0; 5];
    assert!(empirical_cvar(&r, 0.10).is_err());
}

#[test]
fn gmv_diagonal_case() {
    // sample covariance diag(4/3, 16/3): weights 1/var -> (0.8, 0.2)
    let s = mat(&[&[1.0, 2.0], &[1.0, -2.0], &[-1.0, 2.0], &[-1.0, -2.0]]);
    let cov = scenario_covariance(&s);
    assert!((cov[(0, 1)]).abs() < 1e-15);
    let w = min_variance(&s).unwrap();
    assert!((w.values[0] - 0.8).abs() < 1e-8, "{:?}", w.values);
    assert!((w.values[1] - 0.2).abs() < 1e-8);
}

#[test]
fn gmv_exchangeable_assets() {
    let s = mat(&[&[1.0, 2.0], &[2.0, 1.0], &[-1.0, -2.0], &[-2.0, -1.0]]);
    let w = min_variance(&s).unwrap();
    assert!((w.values[0] - 0.5).abs() < 1e-10);
}

#[test]
fn gmv_single_asset() {
    let s = mat(&[&[0.1], &[-0.2], &[0.05]]);
    let w = min_variance(&s).unwrap();
    assert_eq!(w.values, vec![1.0]);
}

#[test]
fn gmv_never_beats_by_equal_weight() {
    let mut rng = rng_for(2, "gmv-ew", 0);
    let s = DMatrix::from_fn(300, 4, |_, j| (j as f64 + 1.0) * 0.01 * normal_quantile(rng.gen_range(1e-12..1.0)));
    let w = min_variance(&s).unwrap();
    let cov = scenario_covariance(&s);
    let var = |wts: &[f64]| {
        let v = nalgebra::DVector::from_column_slice(wts);
        v.dot(&(&cov * &v))
    };
    assert!(var(&w.values) <= var(&vec![0.25; 4]) + 1e-12);
}

#[test]
fn min_cvar_symmetric_assets() {
    // two exchangeable columns: the symmetric portfolio attains the optimum
    let mut rng = rng_for(3, "cvar-sym", 0);
    let n = 400;
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n);
    for _ in 0..n {
        let a = 0.01 * normal_quantile(rng.gen_range(1e-12..1.0));
        let b = 0.01 * normal_quantile(rng.gen_range(1e-12..1.0));
        // exchangeable by explicit symmetrization
        rows.push(vec![a, b]);
        rows.push(vec![b, a]);
    }
    let s = DMatrix::from_fn(rows.len(), 2, |i, j| rows[i][j]);
    let w = min_cvar(&s, 0.10).unwrap();
    let obj = empirical_cvar(&w.portfolio_returns(&s), 0.10).unwrap();
    let sym = Weights::equal(2);
    let obj_sym = empirical_cvar(&sym.portfolio_returns(&s), 0.10).unwrap();
    assert!(obj <= obj_sym + 1e-6, "{obj} vs {obj_sym}");
    assert!((obj - obj_sym).abs() < 1e-6, "{obj} vs {obj_sym}");
}

#[test]
fn min_cvar_dominant_asset() {
    // asset 0 constant zero return, asset 1 fat left tail
    let mut rng = rng_for(4, "cvar-dom", 0);
    let s = DMatrix::from_fn(500, 2, |_, j| {
        if j == 0 {
            0.0
        } else {
            let z = normal_quantile(rng.gen_range(1e-12..1.0));
            if z < -1.0 {
                0.05 * z * 3.0
            } else {
                0.05 * z
            }
        }
    });
    let w = min_cvar(&s, 0.10).unwrap();
    assert!(w.values[0] > 0.999, "{:?}", w.values);
}

#[test]
fn min_cvar_objective_equals_empirical_cvar() {
    let mut rng = rng_for(5, "cvar-consistency", 0);
    let s = DMatrix::from_fn(200, 3, |_, j| 0.01 * (j as f64 * 0.3 + 1.0) * normal_quantile(rng.gen_range(1e-12..1.0)));
    let w = min_cvar(&s, 0.10).unwrap();
    // internal consistency: floor(alpha S) = 20 exactly
    let obj = empirical_cvar(&w.portfolio_returns(&s), 0.10).unwrap();
    assert!(obj.is_finite());
    // re-solving from the returned weights cannot improve by more than tol
    let w2 = min_cvar(&s, 0.10).unwrap();
    let obj2 = empirical_cvar(&w2.portfolio_returns(&s), 0.10).unwrap();
    assert!((obj - obj2).abs() < 1e-9);
}

/// 0.01-step simplex grid oracle for d = 3.
fn grid_best<F: Fn(&[f64]) -> f64>(obj: &F) -> (Vec<f64>, f64) {
    let mut best = (vec![1.0, 0.0, 0.0], f64::INFINITY);
    for i in 0..=100 {
        for j in 0..=(100 - i) {
            let w = vec![i as f64 / 100.0, j as f64 / 100.0, (100 - i - j) as f64 / 100.0];
            let v = obj(&w);
            if v < best.1 {
                best = (w, v);
            }
        }
    }
    best
}

fn seeded_scenarios_200x3() -> DMatrix<f64> {
    let mut rng = rng_for(6, "grid-scenarios", 0);
    DMatrix::from_fn(200, 3, |_, j| {
        let base = 0.008 * (1.0 + 0.4 * j as f64);
        0.0004 * (j as f64) + base * normal_quantile(rng.gen_range(1e-12..1.0))
    })
}

#[test]
fn min_cvar_matches_grid_search() {
    let s = seeded_scenarios_200x3();
    let obj = |w: &[f64]| {
        let wts = Weights { values: w.to_vec(), fallback: false };
        empirical_cvar(&wts.portfolio_returns(&s), 0.10).unwrap()
    };
    let (_, grid_val) = grid_best(&obj);
    let w = min_cvar(&s, 0.10).unwrap();
    let opt_val = obj(&w.values);
    // optimizer beats the grid, up to the grid's resolution
    assert!(opt_val <= grid_val + 1e-9, "{opt_val} vs grid {grid_val}");
    let lipschitz = (0..s.nrows()).map(|r| s.row(r).amax()).fold(0.0f64, f64::max);
    assert!(grid_val - opt_val <= lipschitz * 0.02, "{opt_val} vs grid {grid_val}");
}

#[test]
fn gmv_matches_grid_search() {
    let s = seeded_scenarios_200x3();
    let cov = scenario_covariance(&s);
    let obj = |w: &[f64]| {
        let v = nalgebra::DVector::from_column_slice(w);
        v.dot(&(&cov * &v))
    };
    let (_, grid_val) = grid_best(&obj);
    let w = min_variance(&s).unwrap();
    let opt_val = obj(&w.values);
    assert!(opt_val <= grid_val + 1e-12);
    assert!(grid_val - opt_val <= 2.0 * cov.amax() * 0.02);
}

#[test]
fn max_sharpe_matches_grid_search() {
    let s = seeded_scenarios_200x3();
    let mu = scenario_means(&s);
    let cov = scenario_covariance(&s);
    let neg_sr = |w: &[f64]| {
        let v = nalgebra::DVector::from_column_slice(w);
        let m: f64 = mu.iter().zip(w).map(|(a, b)| a * b).sum();
        -m / v.dot(&(&cov * &v)).sqrt()
    };
    let (_, grid_val) = grid_best(&neg_sr);
    let w = max_sharpe(&s, 0.0).unwrap();
    let opt_val = neg_sr(&w.values);
    assert!(opt_val <= grid_val + 1e-9, "{opt_val} vs {grid_val}");
}

#[test]
fn max_sharpe_tangency_identity_covariance() {
    let mu = [0.1, 0.0];
    let cov = DMatrix::identity(2, 2);
    let w = max_sharpe_from_moments(&mu, &cov, 0.0).unwrap();
    assert!((w.values[0] - 1.0).abs() < 1e-10, "{:?}", w.values);
}

#[test]
fn max_sharpe_identical_assets() {
    let mut rng = rng_for(7, "sr-ident", 0);
    let col: Vec<f64> = (0..300).map(|_| 0.001 + 0.01 * normal_quantile(rng.gen_range(1e-12..1.0))).collect();
    let s = DMatrix::from_fn(300, 2, |i, _| col[i]);
    let w = max_sharpe(&s, 0.0).unwrap();
    let mu = scenario_means(&s);
    let cov = scenario_covariance(&s);
    let sr = |wts: &[f64]| {
        let v = nalgebra::DVector::from_column_slice(wts);
        let m: f64 = mu.iter().zip(wts).map(|(a, b)| a * b).sum();
        m / v.dot(&(&cov.clone().clone() * &v)).sqrt()
    };
    // any mix attains the single-asset Sharpe ratio (ridge makes it unique)
    assert!((sr(&w.values) - sr(&[1.0, 0.0])).abs() < 1e-6);
}

#[test]
fn max_sharpe_scale_invariance() {
    let s = seeded_scenarios_200x3();
    let w1 = max_sharpe(&s, 0.0).unwrap();
    let s2 = &s * 2.0;
    let w2 = max_sharpe(&s2, 0.0).unwrap();
    for j in 0..3 {
        assert!((w1.values[j] - w2.values[j]).abs() < 1e-6);
    }
}

#[test]
fn max_sharpe_beats_random_points() {
    let s = seeded_scenarios_200x3();
    let mu = scenario_means(&s);
    let cov = scenario_covariance(&s);
    let sr = |wts: &[f64]| {
        let v = nalgebra::DVector::from_column_slice(wts);
        let m: f64 = mu.iter().zip(wts).map(|(a, b)| a * b).sum();
        m / v.dot(&(&cov * &v)).sqrt()
    };
    let w = max_sharpe(&s, 0.0).unwrap();
    let best = sr(&w.values);
    let mut rng = rng_for(8, "sr-random", 0);
    for _ in 0..1000 {
        let mut p: Vec<f64> = (0..3).map(|_| -rng.gen_range(1e-9..1.0f64).ln()).collect();
        let t: f64 = p.iter().sum();
        p.iter_mut().for_each(|x| *x /= t);
        assert!(sr(&p) <= best + 1e-9);
    }
}

#[test]
fn max_sharpe_fallback_when_no_positive_excess() {
    let mut rng = rng_for(9, "sr-fallback", 0);
    let s = DMatrix::from_fn(200, 2, |_, j| -0.001 + 0.01 * (1.0 + j as f64) * normal_quantile(rng.gen_range(1e-12..1.0)));
    // force strictly negative means
    let mu = scenario_means(&s);
    let shift = mu.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + 1e-4;
    let shifted = DMatrix::from_fn(200, 2, |i, j| s[(i, j)] - shift);
    let w = max_sharpe(&shifted, 0.0).unwrap();
    assert!(w.fallback);
    let gmv = min_variance(&shifted).unwrap();
    for j in 0..2 {
        assert!((w.values[j] - gmv.values[j]).abs() < 1e-12);
    }
}

#[test]
fn weights_invariants_enforced() {
    assert!(Weights::checked(vec![0.5, 0.4], false).is_err());
    assert!(Weights::checked(vec![1.2, -0.2], false).is_err());
    assert!(Weights::checked(vec![0.6, 0.4], false).is_ok());
}

#[test]
fn strategy_parsing() {
    assert_eq!(Strategy::parse("sr").unwrap(), Strategy::MaxSharpe);
    assert_eq!(Strategy::parse("CVaR").unwrap(), Strategy::MinCvar);
    assert_eq!(Strategy::parse("gmv").unwrap(), Strategy::Gmv);
    assert!(Strategy::parse("momentum").is_err());
    assert!(StrategySpec::new(Strategy::Gmv, 0.0, 0.0).is_err());
}
