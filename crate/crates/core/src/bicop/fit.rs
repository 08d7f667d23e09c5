//! Maximum-likelihood fitting and AIC selection of bivariate copulas.

use super::family::{BicopSpec, FamilyId, Rotation};
use super::{bicop_loglik, minimize_scalar, start_params};
use crate::error::{Error, Result};
use crate::util::dist::{t_pdf, t_quantile};
use crate::util::solve::nelder_mead;
use crate::util::stats::{kendall_independent, kendall_tau};
use statrs::function::gamma::ln_gamma;

/// A fitted copula with its maximized log-likelihood.
#[derive(Debug, Clone)]
pub struct FittedBicop {
    pub spec: BicopSpec,
    pub loglik: f64,
    pub n: usize,
}

impl FittedBicop {
    /// Akaike information criterion, `-2 ll + 2 k`.
    pub fn aic(&self) -> f64 {
        -2.0 * self.loglik + 2.0 * self.spec.family.param_count() as f64
    }
}

fn check_data(u1: &[f64], u2: &[f64]) -> Result<()> {
    if u1.len() != u2.len() {
        return Err(Error::DimensionMismatch { expected: u1.len(), got: u2.len() });
    }
    if u1.len() < 30 {
        return Err(Error::InvalidData(format!("need at least 30 pairs, got {}", u1.len())));
    }
    for margin in [u1, u2] {
        if margin.iter().any(|&x| !(0.0..=1.0).contains(&x) || !x.is_finite()) {
            return Err(Error::InvalidData("uniforms outside [0,1]".into()));
        }
        let mut v: Vec<f64> = margin.to_vec();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let distinct = v.windows(2).filter(|w| w[0] != w[1]).count() + 1;
        if (distinct as f64) < 0.5 * margin.len() as f64 {
            return Err(Error::InvalidData("degenerate data: more than 50% ties".into()));
        }
    }
    Ok(())
}

// Student-t copula profile fit: coarse grid on the dof, Brent on rho with
// quantiles cached per dof. Above the cap the likelihood is flat and the
// Gaussian family is reported instead by AIC selection.
const STUDENT_NU_GRID: [f64; 12] = [2.5, 3.0, 3.5, 4.0, 5.0, 6.0, 8.0, 10.0, 15.0, 20.0, 30.0, 45.0];

fn fit_student(u1: &[f64], u2: &[f64], tau: f64) -> Result<FittedBicop> {
    let n = u1.len();
    let rho0 = (std::f64::consts::PI * tau / 2.0).sin().clamp(-0.99, 0.99);
    let mut best: Option<(f64, f64, f64)> = None; // (ll, rho, nu)
    for &nu in &STUDENT_NU_GRID {
        let x: Vec<f64> = u1.iter().map(|&u| t_quantile(u.clamp(1e-10, 1.0 - 1e-10), nu)).collect();
        let y: Vec<f64> = u2.iter().map(|&u| t_quantile(u.clamp(1e-10, 1.0 - 1e-10), nu)).collect();
        let ln_margins: f64 = x
            .iter()
            .zip(&y)
            .map(|(&a, &b)| t_pdf(a, nu).ln() + t_pdf(b, nu).ln())
            .sum();
        let lc = ln_gamma((nu + 2.0) / 2.0) - ln_gamma(nu / 2.0) - (nu * std::f64::consts::PI).ln();
        let ll_at = |rho: f64| -> f64 {
            let d = 1.0 - rho * rho;
            let mut ll = n as f64 * (lc - 0.5 * d.ln());
            for (&a, &b) in x.iter().zip(&y) {
                ll -= (nu + 2.0) / 2.0 * ((a * a - 2.0 * rho * a * b + b * b) / (nu * d)).ln_1p();
            }
            ll - ln_margins
        };
        let (lo, hi) = (-0.999, 0.999);
        let (rho_opt, neg_ll) = minimize_scalar(|r| -ll_at(r), lo, hi);
        let (rho_opt, ll_opt) = if -neg_ll >= ll_at(rho0) { (rho_opt, -neg_ll) } else { (rho0, ll_at(rho0)) };
        if best.map(|(ll, _, _)| ll_opt > ll).unwrap_or(true) {
            best = Some((ll_opt, rho_opt, nu));
        }
    }
    let (ll, rho, nu) = best.unwrap();
    Ok(FittedBicop { spec: BicopSpec::new(FamilyId::StudentT, Rotation::R0, vec![rho, nu])?, loglik: ll, n })
}

fn fit_two_param(
    u1: &[f64],
    u2: &[f64],
    family: FamilyId,
    rotation: Rotation,
    tau: f64,
) -> Result<FittedBicop> {
    let boxes = family.param_box();
    let start = start_params(family, rotation, tau);
    let to_box = |x: f64, (lo, hi): (f64, f64)| lo + (hi - lo) / (1.0 + (-x).exp());
    let from_box = |p: f64, (lo, hi): (f64, f64)| {
        let q = ((p - lo) / (hi - lo)).clamp(1e-9, 1.0 - 1e-9);
        (q / (1.0 - q)).ln()
    };
    let x0: Vec<f64> = start.iter().zip(boxes).map(|(&p, &b)| from_box(p, b)).collect();
    let objective = |x: &[f64]| -> f64 {
        let params: Vec<f64> = x.iter().zip(boxes).map(|(&xi, &b)| to_box(xi.clamp(-35.0, 35.0), b)).collect();
        match BicopSpec::new(family, rotation, params) {
            Ok(spec) => match bicop_loglik(u1, u2, &spec) {
                Ok(ll) if ll.is_finite() => -ll,
                _ => 1e12,
            },
            Err(_) => 1e12,
        }
    };
    let res = nelder_mead(objective, &x0, 0.6, 1e-8, 400);
    let params: Vec<f64> = res.x.iter().zip(boxes).map(|(&xi, &b)| to_box(xi.clamp(-35.0, 35.0), b)).collect();
    let spec = BicopSpec::new(family, rotation, params)?;
    let ll = bicop_loglik(u1, u2, &spec)?;
    // never fall below the tau-inversion starting point
    let start_spec = BicopSpec::new(family, rotation, start)?;
    let ll_start = bicop_loglik(u1, u2, &start_spec)?;
    if ll_start > ll {
        Ok(FittedBicop { spec: start_spec, loglik: ll_start, n: u1.len() })
    } else {
        Ok(FittedBicop { spec, loglik: ll, n: u1.len() })
    }
}

/// Maximum-likelihood fit of one family/rotation pair.
pub fn fit_bicop(u1: &[f64], u2: &[f64], family: FamilyId, rotation: Rotation) -> Result<FittedBicop> {
    check_data(u1, u2)?;
    if family == FamilyId::Independence {
        return Ok(FittedBicop { spec: BicopSpec::independence(), loglik: 0.0, n: u1.len() });
    }
    if rotation != Rotation::R0 && !family.rotatable() {
        return Err(Error::InvalidParameter(format!(
            "rotation {} not admissible for {}",
            rotation.degrees(),
            family.name()
        )));
    }
    let tau = kendall_tau(u1, u2)?;
    match family.param_count() {
        1 => {
            let (lo, hi) = family.param_box()[0];
            let (lo, hi) = (lo + 1e-9, hi - 1e-9);
            let neg_ll = |theta: f64| -> f64 {
                match BicopSpec::new(family, rotation, vec![theta]) {
                    Ok(spec) => match bicop_loglik(u1, u2, &spec) {
                        Ok(ll) if ll.is_finite() => -ll,
                        _ => 1e12,
                    },
                    Err(_) => 1e12,
                }
            };
            let (theta_opt, fmin) = minimize_scalar(neg_ll, lo, hi);
            let start = start_params(family, rotation, tau)[0].clamp(lo, hi);
            let f_start = neg_ll(start);
            let (theta, ll) = if f_start < fmin { (start, -f_start) } else { (theta_opt, -fmin) };
            Ok(FittedBicop { spec: BicopSpec::new(family, rotation, vec![theta])?, loglik: ll, n: u1.len() })
        }
        2 => {
            if family == FamilyId::StudentT {
                fit_student(u1, u2, tau)
            } else {
                fit_two_param(u1, u2, family, rotation, tau)
            }
        }
        _ => unreachable!(),
    }
}

/// Candidate sets by config name. Rotatable families expand to all four
/// rotations; `mixed` covers every family in the catalog. Comma-separated
/// names combine sets.
pub fn standard_candidates(name: &str) -> Result<Vec<(FamilyId, Rotation)>> {
    let mut out: Vec<(FamilyId, Rotation)> = Vec::new();
    let push_family = |f: FamilyId, out: &mut Vec<(FamilyId, Rotation)>| {
        if f.rotatable() {
            for r in Rotation::ALL {
                out.push((f, r));
            }
        } else {
            out.push((f, Rotation::R0));
        }
    };
    for part in name.split(',').map(|s| s.trim().to_lowercase()) {
        match part.as_str() {
            "mixed" => {
                for f in [
                    FamilyId::Gaussian,
                    FamilyId::StudentT,
                    FamilyId::Clayton,
                    FamilyId::Gumbel,
                    FamilyId::Frank,
                    FamilyId::Joe,
                    FamilyId::Bb1,
                    FamilyId::Bb6,
                    FamilyId::Bb7,
                    FamilyId::Bb8,
                ] {
                    push_family(f, &mut out);
                }
            }
            "gaussian" => push_family(FamilyId::Gaussian, &mut out),
            "studentt" | "student-t" | "t" => push_family(FamilyId::StudentT, &mut out),
            "clayton" => push_family(FamilyId::Clayton, &mut out),
            "gumbel" => push_family(FamilyId::Gumbel, &mut out),
            "frank" => push_family(FamilyId::Frank, &mut out),
            "joe" => push_family(FamilyId::Joe, &mut out),
            "bb1" => push_family(FamilyId::Bb1, &mut out),
            "bb6" => push_family(FamilyId::Bb6, &mut out),
            "bb7" => push_family(FamilyId::Bb7, &mut out),
            "bb8" => push_family(FamilyId::Bb8, &mut out),
            "independence" => out.push((FamilyId::Independence, Rotation::R0)),
            other => return Err(Error::InvalidParameter(format!("unknown family set `{other}`"))),
        }
    }
    out.dedup();
    Ok(out)
}

/// Select the AIC-best candidate, screening for independence first with
/// the asymptotic Kendall test at 5%.
pub fn select_bicop(
    u1: &[f64],
    u2: &[f64],
    candidates: &[(FamilyId, Rotation)],
) -> Result<FittedBicop> {
    check_data(u1, u2)?;
    if candidates.is_empty() {
        return Err(Error::InvalidParameter("empty candidate set".into()));
    }
    let tau = kendall_tau(u1, u2)?;
    if kendall_independent(tau, u1.len(), 1.959_963_984_540_054) {
        return Ok(FittedBicop { spec: BicopSpec::independence(), loglik: 0.0, n: u1.len() });
    }
    let mut best: Option<FittedBicop> = None;
    for &(family, rotation) in candidates {
        // rotations on the wrong side of the dependence sign cannot win
        if family.rotatable() {
            let aligned = match rotation {
                Rotation::R0 | Rotation::R180 => tau >= 0.0,
                Rotation::R90 | Rotation::R270 => tau < 0.0,
            };
            if !aligned {
                continue;
            }
        }
        let Ok(fit) = fit_bicop(u1, u2, family, rotation) else { continue };
        if best.as_ref().map(|b| fit.aic() < b.aic()).unwrap_or(true) {
            best = Some(fit);
        }
    }
    Ok(best.unwrap_or(FittedBicop { spec: BicopSpec::independence(), loglik: 0.0, n: u1.len() }))
}
