use super::*;
use crate::bicop::{
    bicop_loglik, bicop_sample, fit_bicop, hfunc1, hfunc2, FamilyId, Rotation,
};
use crate::util::rng::rng_for;
use crate::util::stats::{kendall_independent, kendall_tau};
use nalgebra::DMatrix;
use rand::Rng;

fn col(u: &DMatrix<f64>, j: usize) -> Vec<f64> {
    u.column(j).iter().copied().collect()
}

/// Independent brute-force vine density by explicit recursive
/// conditioning over the edge lists (no structure-matrix bookkeeping):
/// F(x | D) = h(F(x | D \ {y}) | F(y | D \ {y})) through the unique edge
/// whose constraint set is D + {x}.
fn oracle_cond(model: &VineModel, x: usize, cond: &[usize], row: &[f64]) -> f64 {
    if cond.is_empty() {
        return row[x];
    }
    let level = cond.len();
    let mut want: std::collections::BTreeSet<usize> = cond.iter().copied().collect();
    want.insert(x);
    let edge = model.structure.trees[level - 1]
        .iter()
        .find(|e| (e.conditioned.0 == x || e.conditioned.1 == x) && e.constraint_set() == want)
        .expect("regular vine has the conditional");
    let y = if edge.conditioned.0 == x { edge.conditioned.1 } else { edge.conditioned.0 };
    let sub: Vec<usize> = cond.iter().copied().filter(|&v| v != y).collect();
    let fx = oracle_cond(model, x, &sub, row);
    let fy = oracle_cond(model, y, &sub, row);
    let spec = model.spec_at(edge.row, edge.col);
    if edge.conditioned.0 == x {
        hfunc1(fx, fy, spec).unwrap()
    } else {
        hfunc2(fy, fx, spec).unwrap()
    }
}

/// Log density at one point: sum over edges of the log pair density at
/// the recursively computed conditional margins.
pub fn oracle_log_density(model: &VineModel, row: &[f64]) -> f64 {
    let mut ll = 0.0;
    for tree in &model.structure.trees {
        for e in tree {
            let (a, b) = e.conditioned;
            let fa = oracle_cond(model, a, &e.conditioning, row);
            let fb = oracle_cond(model, b, &e.conditioning, row);
            let spec = model.spec_at(e.row, e.col);
            ll += crate::bicop::bicop_pdf(fa, fb, spec).unwrap().max(1e-300).ln();
        }
    }
    ll
}

/// A model over the given structure with seeded random families drawn
/// from a small pool.
fn random_model(structure: &VineStructure, seed: u64) -> VineModel {
    let mut rng = rng_for(seed, "vine-test-model", 0);
    let mut model = VineModel::independence(structure.clone());
    for spec in model.pair_specs.iter_mut() {
        *spec = match rng.gen_range(0..5) {
            0 => crate::bicop::BicopSpec::new(FamilyId::Gaussian, Rotation::R0, vec![rng.gen_range(-0.7..0.7)])
                .unwrap(),
            1 => crate::bicop::BicopSpec::new(FamilyId::Clayton, Rotation::R0, vec![rng.gen_range(0.3..3.0)])
                .unwrap(),
            2 => crate::bicop::BicopSpec::new(FamilyId::Gumbel, Rotation::R180, vec![rng.gen_range(1.1..2.5)])
                .unwrap(),
            3 => crate::bicop::BicopSpec::new(FamilyId::Frank, Rotation::R0, vec![rng.gen_range(-4.0..6.0)])
                .unwrap(),
            _ => crate::bicop::BicopSpec::new(FamilyId::Joe, Rotation::R90, vec![rng.gen_range(1.2..2.2)])
                .unwrap(),
        };
    }
    model
}

fn random_uniforms(n: usize, d: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = rng_for(seed, "vine-test-u", 0);
    DMatrix::from_fn(n, d, |_, _| rng.gen_range(0.01..0.99))
}

#[test]
fn loglik_zero_for_independence_vine() {
    let s = VineStructure::cvine(&[0, 1, 2, 3]).unwrap();
    let model = VineModel::independence(s);
    let u = random_uniforms(50, 4, 1);
    assert_eq!(vine_loglik(&u, &model).unwrap(), 0.0);
}

#[test]
fn loglik_d2_reduces_to_bicop() {
    let s = VineStructure::cvine(&[0, 1]).unwrap();
    let mut model = VineModel::independence(s);
    model.pair_specs[0] =
        crate::bicop::BicopSpec::new(FamilyId::Gaussian, Rotation::R0, vec![0.55]).unwrap();
    let u = random_uniforms(200, 2, 2);
    let ll = vine_loglik(&u, &model).unwrap();
    // the matrix orientation for d=2: diagonal (1, ...) so first arg is
    // variable 1's column -- Gaussian is exchangeable, either order works
    let direct = bicop_loglik(&col(&u, 0), &col(&u, 1), &model.pair_specs[0]).unwrap();
    assert!((ll - direct).abs() < 1e-10);
}

#[test]
fn loglik_matches_recursive_oracle() {
    let structures = vec![
        VineStructure::cvine(&[0, 1, 2]).unwrap(),
        VineStructure::cvine(&[2, 0, 3, 1]).unwrap(),
        VineStructure::dvine(&[1, 3, 0, 2]).unwrap(),
        VineStructure::rvine_from_trees(
            4,
            vec![
                (1, (0, 1), vec![]),
                (1, (1, 2), vec![]),
                (1, (1, 3), vec![]),
                (2, (0, 2), vec![1]),
                (2, (2, 3), vec![1]),
                (3, (0, 3), vec![1, 2]),
            ],
        )
        .unwrap(),
    ];
    for (k, s) in structures.into_iter().enumerate() {
        for rep in 0..3 {
            let model = random_model(&s, (k * 10 + rep) as u64);
            let u = random_uniforms(10, s.d, 77 + rep as u64);
            let ll = vine_loglik(&u, &model).unwrap();
            let oracle: f64 = (0..u.nrows())
                .map(|r| {
                    let row: Vec<f64> = u.row(r).iter().copied().collect();
                    oracle_log_density(&model, &row)
                })
                .sum();
            let rel = (ll - oracle).abs() / oracle.abs().max(1e-12);
            assert!(rel < 1e-8, "structure {k} rep {rep}: {ll} vs {oracle}");
        }
    }
}

/// Build uniforms from a known 3-dim C-vine with Clayton(theta) edges.
fn simulate_clayton_cvine(n: usize, theta: f64, seed: u64) -> (VineModel, DMatrix<f64>) {
    let s = VineStructure::cvine(&[0, 1, 2]).unwrap();
    let mut model = VineModel::independence(s);
    for spec in model.pair_specs.iter_mut() {
        *spec = crate::bicop::BicopSpec::new(FamilyId::Clayton, Rotation::R0, vec![theta]).unwrap();
    }
    let u = vine_simulate(&model, n, seed).unwrap();
    (model, u)
}

#[test]
fn sequential_fit_recovers_clayton_cvine() {
    let (truth, u) = simulate_clayton_cvine(5000, 2.0, 2024);
    let structure = truth.structure.clone();
    let fit = fit_sequential(&u, &structure, &[(FamilyId::Clayton, Rotation::R0)]).unwrap();
    for spec in &fit.pair_specs {
        assert_eq!(spec.family, FamilyId::Clayton);
        let theta = spec.params[0];
        assert!((theta - 2.0).abs() < 0.25, "theta {theta}");
    }
    // joint MLE never decreases the sequential log-likelihood
    let joint = fit_joint_mle(&u, &fit).unwrap();
    assert!(joint.loglik >= fit.loglik - 1e-9);
    assert_eq!(joint.method, FitMethod::JointMle);
}

#[test]
fn sequential_fit_d2_equals_direct_bicop_fit() {
    let spec = crate::bicop::BicopSpec::new(FamilyId::Gumbel, Rotation::R0, vec![1.9]).unwrap();
    let draws = bicop_sample(800, &spec, 31).unwrap();
    let mut u = DMatrix::zeros(800, 2);
    for (r, &(a, b)) in draws.iter().enumerate() {
        u[(r, 0)] = a;
        u[(r, 1)] = b;
    }
    let s = VineStructure::cvine(&[0, 1]).unwrap();
    let fit = fit_sequential(&u, &s, &[(FamilyId::Gumbel, Rotation::R0)]).unwrap();
    // matrix orientation may swap the pair; Gumbel is exchangeable
    let direct = fit_bicop(&col(&u, 0), &col(&u, 1), FamilyId::Gumbel, Rotation::R0).unwrap();
    assert!((fit.loglik - direct.loglik).abs() < 1e-6);
    assert!((fit.pair_specs[0].params[0] - direct.spec.params[0]).abs() < 1e-5);
}

#[test]
fn sequential_fit_on_independent_data() {
    let u = random_uniforms(1500, 3, 5);
    let s = VineStructure::cvine(&[0, 1, 2]).unwrap();
    let fit = fit_sequential(&u, &s, &crate::bicop::standard_candidates("mixed").unwrap()).unwrap();
    for spec in &fit.pair_specs {
        assert_eq!(spec.family, FamilyId::Independence);
    }
    assert_eq!(fit.loglik, 0.0);
}

#[test]
fn joint_mle_fixed_point_for_d2() {
    let spec = crate::bicop::BicopSpec::new(FamilyId::Clayton, Rotation::R0, vec![2.0]).unwrap();
    let draws = bicop_sample(2000, &spec, 8).unwrap();
    let mut u = DMatrix::zeros(2000, 2);
    for (r, &(a, b)) in draws.iter().enumerate() {
        u[(r, 0)] = a;
        u[(r, 1)] = b;
    }
    let s = VineStructure::cvine(&[0, 1]).unwrap();
    let seq = fit_sequential(&u, &s, &[(FamilyId::Clayton, Rotation::R0)]).unwrap();
    let joint = fit_joint_mle(&u, &seq).unwrap();
    assert!(
        (joint.pair_specs[0].params[0] - seq.pair_specs[0].params[0]).abs() < 1e-4,
        "moved from {} to {}",
        seq.pair_specs[0].params[0],
        joint.pair_specs[0].params[0]
    );
    // parameters stay inside the family box
    let (lo, hi) = FamilyId::Clayton.param_box()[0];
    assert!(joint.pair_specs[0].params[0] > lo && joint.pair_specs[0].params[0] < hi);
}

#[test]
fn simulate_independence_has_independent_columns() {
    let s = VineStructure::dvine(&[0, 1, 2]).unwrap();
    let model = VineModel::independence(s);
    let u = vine_simulate(&model, 10_000, 3).unwrap();
    for i in 0..3 {
        for j in i + 1..3 {
            let tau = kendall_tau(&col(&u, i), &col(&u, j)).unwrap();
            assert!(tau.abs() < 0.03, "tau {tau}");
        }
    }
}

#[test]
fn simulate_d2_matches_bicop_sampler_distribution() {
    let spec = crate::bicop::BicopSpec::new(FamilyId::Clayton, Rotation::R0, vec![2.0]).unwrap();
    let s = VineStructure::cvine(&[0, 1]).unwrap();
    let mut model = VineModel::independence(s);
    model.pair_specs[0] = spec.clone();
    let u = vine_simulate(&model, 10_000, 11).unwrap();
    let tau_vine = kendall_tau(&col(&u, 0), &col(&u, 1)).unwrap();
    let draws = bicop_sample(10_000, &spec, 12).unwrap();
    let a: Vec<f64> = draws.iter().map(|p| p.0).collect();
    let b: Vec<f64> = draws.iter().map(|p| p.1).collect();
    let tau_direct = kendall_tau(&a, &b).unwrap();
    assert!((tau_vine - tau_direct).abs() < 0.03, "{tau_vine} vs {tau_direct}");
    assert!((tau_vine - 0.5).abs() < 0.03);
}

#[test]
fn simulate_is_deterministic() {
    let (model, _) = simulate_clayton_cvine(10, 1.5, 0);
    let a = vine_simulate(&model, 64, 5).unwrap();
    let b = vine_simulate(&model, 64, 5).unwrap();
    assert_eq!(a, b);
}

#[test]
fn simulation_reproduces_model_tau_all_kinds() {
    // 3 standard errors of the sample tau at n = 10k
    let n = 10_000usize;
    let se = (2.0 * (2.0 * n as f64 + 5.0) / (9.0 * n as f64 * (n as f64 - 1.0))).sqrt();
    let structures = vec![
        VineStructure::cvine(&[0, 1, 2, 3]).unwrap(),
        VineStructure::dvine(&[0, 1, 2, 3]).unwrap(),
        VineStructure::rvine_from_trees(
            4,
            vec![
                (1, (0, 1), vec![]),
                (1, (1, 2), vec![]),
                (1, (1, 3), vec![]),
                (2, (0, 2), vec![1]),
                (2, (2, 3), vec![1]),
                (3, (0, 3), vec![1, 2]),
            ],
        )
        .unwrap(),
    ];
    for (k, s) in structures.into_iter().enumerate() {
        let model = random_model(&s, 400 + k as u64);
        let big = vine_simulate(&model, 200_000, 1000 + k as u64).unwrap();
        let small = vine_simulate(&model, n, 2000 + k as u64).unwrap();
        for i in 0..4 {
            for j in i + 1..4 {
                let t_big = kendall_tau(&col(&big, i), &col(&big, j)).unwrap();
                let t_small = kendall_tau(&col(&small, i), &col(&small, j)).unwrap();
                assert!(
                    (t_big - t_small).abs() < 3.0 * se + 0.01,
                    "kind {k} pair ({i},{j}): {t_big} vs {t_small}"
                );
            }
        }
    }
}

#[test]
fn rosenblatt_is_identity_under_independence() {
    let s = VineStructure::cvine(&[0, 1, 2]).unwrap();
    let model = VineModel::independence(s);
    let u = random_uniforms(100, 3, 9);
    let w = rosenblatt(&u, &model).unwrap();
    assert!((&w - &u).abs().max() < 1e-12);
}

#[test]
fn rosenblatt_inverts_simulation() {
    let s = VineStructure::cvine(&[2, 0, 1]).unwrap();
    let model = random_model(&s, 15);
    let w = random_uniforms(200, 3, 16);
    let u = simulate_from_uniforms(&model, &w).unwrap();
    let back = rosenblatt(&u, &model).unwrap();
    assert!((&back - &w).abs().max() < 1e-6, "max dev {}", (&back - &w).abs().max());
}

#[test]
fn rosenblatt_detects_misspecification() {
    // dependent data pushed through an independence model stays dependent
    let (truth, u) = simulate_clayton_cvine(3000, 2.0, 99);
    let wrong = VineModel::independence(truth.structure.clone());
    let w = rosenblatt(&u, &wrong).unwrap();
    let tau = kendall_tau(&col(&w, 0), &col(&w, 1)).unwrap();
    assert!(!kendall_independent(tau, 3000, 1.96), "tau {tau} should reject");

    // and through the true model becomes independent
    let w2 = rosenblatt(&u, &truth).unwrap();
    for i in 0..3 {
        for j in i + 1..3 {
            let t = kendall_tau(&col(&w2, i), &col(&w2, j)).unwrap();
            assert!(kendall_independent(t, 3000, 1.96), "tau {t} at ({i},{j})");
        }
    }
}

#[test]
fn model_json_round_trip_preserves_loglik() {
    let (model, u) = simulate_clayton_cvine(500, 2.0, 55);
    let fit = fit_sequential(&u, &model.structure, &crate::bicop::standard_candidates("clayton,gaussian").unwrap()).unwrap();
    let text = fit.to_json();
    let reloaded = VineModel::from_json(&text).unwrap();
    let ll1 = vine_loglik(&u, &fit).unwrap();
    let ll2 = vine_loglik(&u, &reloaded).unwrap();
    assert!((ll1 - ll2).abs() < 1e-12);
    assert_eq!(fit.structure, reloaded.structure);
}

#[test]
fn dimension_mismatch_errors() {
    let s = VineStructure::cvine(&[0, 1, 2]).unwrap();
    let model = VineModel::independence(s);
    let u = random_uniforms(40, 2, 1);
    assert!(vine_loglik(&u, &model).is_err());
    assert!(rosenblatt(&u, &model).is_err());
}
