//! Bivariate copula engine: CDFs, densities, h-functions and their
//! inverses, sampling, Kendall-tau links, tail dependence, MLE fitting
//! and AIC-based family selection.
//!
//! All evaluators clamp interior arguments to `[1e-10, 1 - 1e-10]`;
//! exact boundary arguments use the copula identities `C(u,1) = u`,
//! `C(1,v) = v`, `C(u,0) = C(0,v) = 0` so margin checks hold exactly.

mod archimedean;
mod elliptical;
mod family;
mod fit;

pub use family::{BicopSpec, FamilyId, Rotation};
pub use fit::{fit_bicop, select_bicop, standard_candidates, FittedBicop};

use crate::error::{Error, Result};
use crate::util::quad::adaptive_simpson;
use crate::util::solve::{brent_root, brent_min};
use archimedean::Generator;
use elliptical::{GaussianCopula, StudentTCopula};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

const CLIP: f64 = 1e-10;

fn clip(u: f64) -> f64 {
    u.clamp(CLIP, 1.0 - CLIP)
}

enum Base {
    Independence,
    Gaussian(GaussianCopula),
    StudentT(StudentTCopula),
    Archimedean(Generator),
}

fn base(spec: &BicopSpec) -> Base {
    match spec.family {
        FamilyId::Independence => Base::Independence,
        FamilyId::Gaussian => Base::Gaussian(GaussianCopula { rho: spec.params[0] }),
        FamilyId::StudentT => Base::StudentT(StudentTCopula { rho: spec.params[0], nu: spec.params[1] }),
        _ => Base::Archimedean(Generator::new(spec.family, &spec.params)),
    }
}

fn base_cdf(spec: &BicopSpec, u: f64, v: f64) -> f64 {
    match base(spec) {
        Base::Independence => u * v,
        Base::Gaussian(g) => g.cdf(u, v),
        Base::StudentT(t) => t.cdf(u, v),
        Base::Archimedean(g) => g.cdf(u, v),
    }
}

fn base_pdf(spec: &BicopSpec, u: f64, v: f64) -> f64 {
    match base(spec) {
        Base::Independence => 1.0,
        Base::Gaussian(g) => g.pdf(u, v),
        Base::StudentT(t) => t.pdf(u, v),
        Base::Archimedean(g) => g.pdf(u, v),
    }
}

/// Base-family h(u|v) = dC/dv.
fn base_h(spec: &BicopSpec, u: f64, v: f64) -> f64 {
    match base(spec) {
        Base::Independence => u,
        Base::Gaussian(g) => g.hfunc(u, v),
        Base::StudentT(t) => t.hfunc(u, v),
        Base::Archimedean(g) => g.hfunc(u, v),
    }
}

/// Inverse of the base-family h(.|v).
fn base_h_inv(spec: &BicopSpec, p: f64, v: f64) -> f64 {
    match base(spec) {
        Base::Independence => p,
        Base::Gaussian(g) => g.hfunc_inv(p, v),
        Base::StudentT(t) => t.hfunc_inv(p, v),
        Base::Archimedean(g) => match spec.family {
            FamilyId::Clayton => {
                let th = spec.params[0];
                ((p * v.powf(th + 1.0)).powf(-th / (th + 1.0)) + 1.0 - v.powf(-th)).powf(-1.0 / th)
            }
            FamilyId::Frank => {
                let th = spec.params[0];
                let big_a = (-th).exp_m1();
                let b = (-th * v).exp_m1();
                let a = p * big_a / (1.0 + b * (1.0 - p));
                (-a.ln_1p() / th).clamp(CLIP, 1.0 - CLIP)
            }
            _ => {
                // monotone bisection/Brent hybrid on the h-function
                let f = |x: f64| g.hfunc(x, v) - p;
                brent_root(f, CLIP, 1.0 - CLIP, 1e-12, 200)
                    .unwrap_or(if p < g.hfunc(0.5, v) { CLIP } else { 1.0 - CLIP })
            }
        },
    }
}

/// Copula CDF `C(u1, u2)` including rotations.
pub fn bicop_cdf(u1: f64, u2: f64, spec: &BicopSpec) -> Result<f64> {
    spec.validate()?;
    if !(u1.is_finite() && u2.is_finite()) || !(0.0..=1.0).contains(&u1) || !(0.0..=1.0).contains(&u2) {
        return Err(Error::InvalidData(format!("arguments outside [0,1]: ({u1}, {u2})")));
    }
    // exact boundary identities before interior clamping
    if u1 <= CLIP || u2 <= CLIP {
        return Ok(0.0);
    }
    if u1 >= 1.0 - CLIP {
        return Ok(u2);
    }
    if u2 >= 1.0 - CLIP {
        return Ok(u1);
    }
    let (u, v) = (clip(u1), clip(u2));
    let c = match spec.rotation {
        Rotation::R0 => base_cdf(spec, u, v),
        Rotation::R90 => v - base_cdf(spec, 1.0 - u, v),
        Rotation::R180 => u + v - 1.0 + base_cdf(spec, 1.0 - u, 1.0 - v),
        Rotation::R270 => u - base_cdf(spec, u, 1.0 - v),
    };
    Ok(c.clamp(0.0, 1.0))
}

/// Copula density `c(u1, u2)` including rotations.
pub fn bicop_pdf(u1: f64, u2: f64, spec: &BicopSpec) -> Result<f64> {
    spec.validate()?;
    if !(u1.is_finite() && u2.is_finite()) {
        return Err(Error::InvalidData("non-finite arguments".into()));
    }
    let (u, v) = (clip(u1), clip(u2));
    let d = match spec.rotation {
        Rotation::R0 => base_pdf(spec, u, v),
        Rotation::R90 => base_pdf(spec, 1.0 - u, v),
        Rotation::R180 => base_pdf(spec, 1.0 - u, 1.0 - v),
        Rotation::R270 => base_pdf(spec, u, 1.0 - v),
    };
    Ok(d.max(0.0))
}

/// Conditional CDF of the first argument given the second:
/// `h1(u1 | u2) = dC(u1, u2) / du2`.
pub fn hfunc1(u1: f64, u2: f64, spec: &BicopSpec) -> Result<f64> {
    spec.validate()?;
    let (u, v) = (clip(u1), clip(u2));
    let h = match spec.rotation {
        Rotation::R0 => base_h(spec, u, v),
        Rotation::R90 => 1.0 - base_h(spec, 1.0 - u, v),
        Rotation::R180 => 1.0 - base_h(spec, 1.0 - u, 1.0 - v),
        Rotation::R270 => base_h(spec, u, 1.0 - v),
    };
    Ok(h.clamp(0.0, 1.0))
}

/// Conditional CDF of the second argument given the first:
/// `h2(u1 | u2)` reads "P(U2 <= u2 | U1 = u1)" = `dC(u1, u2) / du1`.
pub fn hfunc2(u1: f64, u2: f64, spec: &BicopSpec) -> Result<f64> {
    spec.validate()?;
    let (u, v) = (clip(u1), clip(u2));
    // base families are exchangeable: dC/du1 (u, v) = h_base(v | u)
    let h = match spec.rotation {
        Rotation::R0 => base_h(spec, v, u),
        Rotation::R90 => base_h(spec, v, 1.0 - u),
        Rotation::R180 => 1.0 - base_h(spec, 1.0 - v, 1.0 - u),
        Rotation::R270 => 1.0 - base_h(spec, 1.0 - v, u),
    };
    Ok(h.clamp(0.0, 1.0))
}

/// Inverse of [`hfunc1`] in its first argument.
pub fn hfunc1_inv(p: f64, u2: f64, spec: &BicopSpec) -> Result<f64> {
    spec.validate()?;
    let (p, v) = (clip(p), clip(u2));
    let u = match spec.rotation {
        Rotation::R0 => base_h_inv(spec, p, v),
        Rotation::R90 => 1.0 - base_h_inv(spec, 1.0 - p, v),
        Rotation::R180 => 1.0 - base_h_inv(spec, 1.0 - p, 1.0 - v),
        Rotation::R270 => base_h_inv(spec, p, 1.0 - v),
    };
    Ok(u.clamp(CLIP, 1.0 - CLIP))
}

/// Inverse of [`hfunc2`] in its second argument.
pub fn hfunc2_inv(p: f64, u1: f64, spec: &BicopSpec) -> Result<f64> {
    spec.validate()?;
    let (p, u) = (clip(p), clip(u1));
    let v = match spec.rotation {
        Rotation::R0 => base_h_inv(spec, p, u),
        Rotation::R90 => base_h_inv(spec, p, 1.0 - u),
        Rotation::R180 => 1.0 - base_h_inv(spec, 1.0 - p, 1.0 - u),
        Rotation::R270 => 1.0 - base_h_inv(spec, 1.0 - p, u),
    };
    Ok(v.clamp(CLIP, 1.0 - CLIP))
}

/// Sample `n` pairs by conditional inversion. Fixed seeds give
/// bit-identical output.
pub fn bicop_sample(n: usize, spec: &BicopSpec, seed: u64) -> Result<Vec<(f64, f64)>> {
    spec.validate()?;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let u1: f64 = rng.gen_range(CLIP..1.0 - CLIP);
        let w: f64 = rng.gen_range(CLIP..1.0 - CLIP);
        let u2 = hfunc2_inv(w, u1, spec)?;
        out.push((u1, u2));
    }
    Ok(out)
}

/// Sum of log densities over paired observations.
pub fn bicop_loglik(u1: &[f64], u2: &[f64], spec: &BicopSpec) -> Result<f64> {
    if u1.len() != u2.len() {
        return Err(Error::DimensionMismatch { expected: u1.len(), got: u2.len() });
    }
    let mut ll = 0.0;
    for (&a, &b) in u1.iter().zip(u2) {
        let d = bicop_pdf(a, b, spec)?;
        ll += d.max(1e-300).ln();
    }
    Ok(ll)
}

/// First Debye function D1.
fn debye1(x: f64) -> f64 {
    if x == 0.0 {
        return 1.0;
    }
    let a = x.abs();
    let integrand = |t: f64| if t < 1e-8 { 1.0 - t / 2.0 } else { t / t.exp_m1() };
    let d = adaptive_simpson(&integrand, 0.0, a, 1e-12) / a;
    if x > 0.0 {
        d
    } else {
        d + a / 2.0
    }
}

fn tau_frank(theta: f64) -> f64 {
    if theta.abs() < 1e-5 {
        return theta / 9.0;
    }
    let a = theta.abs();
    let tau = 1.0 - 4.0 / a * (1.0 - debye1(a));
    tau * theta.signum()
}

/// Kendall tau by the Archimedean generator identity
/// `tau = 1 + 4 int_0^1 phi(t)/phi'(t) dt`.
fn tau_generator(g: &Generator) -> f64 {
    let eps = 1e-9;
    let integrand = |t: f64| {
        let d = g.dphi(t);
        if d == 0.0 || !d.is_finite() {
            0.0
        } else {
            let r = g.phi(t) / d;
            if r.is_finite() {
                r
            } else {
                0.0
            }
        }
    };
    1.0 + 4.0 * adaptive_simpson(&integrand, eps, 1.0 - eps, 1e-10)
}

/// Model-implied Kendall tau of a copula spec.
pub fn param_to_tau(spec: &BicopSpec) -> Result<f64> {
    spec.validate()?;
    let base_tau = match spec.family {
        FamilyId::Independence => 0.0,
        FamilyId::Gaussian | FamilyId::StudentT => 2.0 / std::f64::consts::PI * spec.params[0].asin(),
        FamilyId::Clayton => spec.params[0] / (spec.params[0] + 2.0),
        FamilyId::Gumbel => 1.0 - 1.0 / spec.params[0],
        FamilyId::Frank => tau_frank(spec.params[0]),
        FamilyId::Joe | FamilyId::Bb1 | FamilyId::Bb6 | FamilyId::Bb7 | FamilyId::Bb8 => {
            tau_generator(&Generator::new(spec.family, &spec.params))
        }
    };
    Ok(match spec.rotation {
        Rotation::R0 | Rotation::R180 => base_tau,
        Rotation::R90 | Rotation::R270 => -base_tau,
    })
}

/// Invert the tau link for the one-parameter families and the elliptical
/// correlation. Two-parameter BB generators are underdetermined by tau.
pub fn tau_to_param(family: FamilyId, rotation: Rotation, tau: f64) -> Result<Vec<f64>> {
    if !(-1.0..=1.0).contains(&tau) {
        return Err(Error::InvalidParameter(format!("tau {tau} outside (-1, 1)")));
    }
    let base_tau = match rotation {
        Rotation::R0 | Rotation::R180 => tau,
        Rotation::R90 | Rotation::R270 => -tau,
    };
    let reach = |ok: bool, params: Vec<f64>| {
        if ok {
            Ok(params)
        } else {
            Err(Error::InvalidParameter(format!(
                "tau {tau} not achievable for {} at {} degrees",
                family.name(),
                rotation.degrees()
            )))
        }
    };
    match family {
        FamilyId::Independence => reach(tau.abs() < 1e-12, vec![]),
        FamilyId::Gaussian => {
            let rho = (std::f64::consts::PI * tau / 2.0).sin();
            reach(rho.abs() <= 0.999, vec![rho])
        }
        FamilyId::StudentT => {
            let rho = (std::f64::consts::PI * tau / 2.0).sin();
            reach(rho.abs() <= 0.999, vec![rho, 4.0])
        }
        FamilyId::Clayton => {
            let (lo, hi) = family.param_box()[0];
            let theta = 2.0 * base_tau / (1.0 - base_tau);
            reach(base_tau >= 0.0 && theta <= hi, vec![theta.max(lo)])
        }
        FamilyId::Gumbel => {
            let (lo, hi) = family.param_box()[0];
            let theta = 1.0 / (1.0 - base_tau);
            reach(base_tau >= 0.0 && theta <= hi, vec![theta.clamp(lo, hi)])
        }
        FamilyId::Frank => {
            if rotation != Rotation::R0 {
                return Err(Error::InvalidParameter("frank does not rotate".into()));
            }
            if tau.abs() < 1e-7 {
                return Ok(vec![9.0 * tau]);
            }
            let target = tau.abs();
            if tau_frank(35.0) < target {
                return reach(false, vec![]);
            }
            let f = |th: f64| tau_frank(th) - target;
            let theta = crate::util::solve::brent_root(f, 1e-6, 35.0, 1e-10, 200)
                .ok_or_else(|| Error::NoConvergence("frank tau inversion".into()))?;
            Ok(vec![theta * tau.signum()])
        }
        FamilyId::Joe => {
            let (lo, hi) = family.param_box()[0];
            if base_tau < 0.0 {
                return reach(false, vec![]);
            }
            if base_tau < 1e-7 {
                return Ok(vec![lo]);
            }
            let tau_at = |th: f64| tau_generator(&Generator::new(FamilyId::Joe, &[th]));
            if tau_at(hi) < base_tau {
                return reach(false, vec![]);
            }
            let theta = crate::util::solve::brent_root(|th| tau_at(th) - base_tau, lo + 1e-9, hi, 1e-8, 200)
                .ok_or_else(|| Error::NoConvergence("joe tau inversion".into()))?;
            Ok(vec![theta])
        }
        FamilyId::Bb1 | FamilyId::Bb6 | FamilyId::Bb7 | FamilyId::Bb8 => Err(Error::NotComputable(
            format!("{} has two parameters; tau does not identify them", family.name()),
        )),
    }
}

/// Lower and upper tail-dependence coefficients `(lambda_L, lambda_U)`.
pub fn tail_dependence(spec: &BicopSpec) -> Result<(f64, f64)> {
    spec.validate()?;
    let th = spec.params.first().copied().unwrap_or(0.0);
    let dl = spec.params.get(1).copied().unwrap_or(0.0);
    let base: (f64, f64) = match spec.family {
        FamilyId::Independence | FamilyId::Gaussian | FamilyId::Frank => (0.0, 0.0),
        FamilyId::StudentT => {
            let l = StudentTCopula { rho: th, nu: dl }.tail_dependence();
            (l, l)
        }
        FamilyId::Clayton => (2f64.powf(-1.0 / th), 0.0),
        FamilyId::Gumbel => (0.0, 2.0 - 2f64.powf(1.0 / th)),
        FamilyId::Joe => (0.0, 2.0 - 2f64.powf(1.0 / th)),
        FamilyId::Bb1 => (2f64.powf(-1.0 / (th * dl)), 2.0 - 2f64.powf(1.0 / dl)),
        FamilyId::Bb6 => (0.0, 2.0 - 2f64.powf(1.0 / (dl * th))),
        FamilyId::Bb7 => (2f64.powf(-1.0 / dl), 2.0 - 2f64.powf(1.0 / th)),
        FamilyId::Bb8 => (0.0, if dl == 1.0 { 2.0 - 2f64.powf(1.0 / th) } else { 0.0 }),
    };
    Ok(match spec.rotation {
        Rotation::R0 => base,
        Rotation::R180 => (base.1, base.0),
        Rotation::R90 | Rotation::R270 => (0.0, 0.0),
    })
}

/// Smallest achievable |tau| gap helper used by fitting heuristics: map a
/// sample tau into a starting parameter vector for the family, clamped to
/// the admissible box.
pub(crate) fn start_params(family: FamilyId, rotation: Rotation, tau: f64) -> Vec<f64> {
    let base_tau = match rotation {
        Rotation::R0 | Rotation::R180 => tau,
        Rotation::R90 | Rotation::R270 => -tau,
    }
    .max(0.0);
    let t = base_tau.clamp(0.02, 0.85);
    match family {
        FamilyId::Independence => vec![],
        FamilyId::Gaussian => vec![(std::f64::consts::PI * tau / 2.0).sin().clamp(-0.99, 0.99)],
        FamilyId::StudentT => vec![(std::f64::consts::PI * tau / 2.0).sin().clamp(-0.99, 0.99), 6.0],
        FamilyId::Clayton => vec![(2.0 * t / (1.0 - t)).clamp(1e-4, 27.0)],
        FamilyId::Gumbel => vec![(1.0 / (1.0 - t)).clamp(1.0, 16.5)],
        FamilyId::Frank => tau_to_param(FamilyId::Frank, Rotation::R0, tau.clamp(-0.85, 0.85))
            .unwrap_or_else(|_| vec![1.0]),
        FamilyId::Joe => vec![(1.0 / (1.0 - t)).mul_add(1.4, -0.4).clamp(1.0, 29.0)],
        FamilyId::Bb1 => vec![(2.0 * t / (1.0 - t) * 0.5).clamp(0.05, 6.5), 1.2],
        FamilyId::Bb6 => vec![1.1, (1.0 / (1.0 - t)).clamp(1.0, 7.5)],
        FamilyId::Bb7 => vec![1.1, (2.0 * t / (1.0 - t)).clamp(0.05, 24.0)],
        FamilyId::Bb8 => vec![(1.0 / (1.0 - t)).mul_add(1.4, -0.4).clamp(1.0, 7.5), 0.9],
    }
}

/// Minimize a 1-d function on a bracket, used for single-parameter fits.
pub(crate) fn minimize_scalar<F: FnMut(f64) -> f64>(f: F, lo: f64, hi: f64) -> (f64, f64) {
    brent_min(f, lo, hi, 1e-8, 200)
}
