//! Derivative-free optimization and root finding.

/// Result of a minimization run.
#[derive(Debug, Clone)]
pub struct MinResult {
    pub x: Vec<f64>,
    pub fx: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Nelder-Mead simplex minimization of `f` starting at `x0`.
///
/// `step` sets the initial simplex spread per coordinate. Terminates when
/// both the function spread and the simplex diameter fall below `tol`, or
/// after `max_iter` reflections. The best evaluated point is always
/// returned, converged or not.
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x0: &[f64],
    step: f64,
    tol: f64,
    max_iter: usize,
) -> MinResult {
    let n = x0.len();
    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += if v[i].abs() > 1e-8 { step * v[i].abs() } else { step };
        simplex.push(v);
    }
    let mut fvals: Vec<f64> = simplex.iter().map(|v| f(v)).collect();

    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        iterations += 1;
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| fvals[a].partial_cmp(&fvals[b]).unwrap_or(std::cmp::Ordering::Equal));
        let best = order[0];
        let worst = order[n];
        let second_worst = order[n - 1];

        let fspread = (fvals[worst] - fvals[best]).abs();
        let diam = simplex
            .iter()
            .map(|v| {
                v.iter()
                    .zip(&simplex[best])
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if fspread < tol && diam < tol {
            converged = true;
            break;
        }

        // centroid excluding the worst vertex
        let mut centroid = vec![0.0; n];
        for (i, v) in simplex.iter().enumerate() {
            if i == worst {
                continue;
            }
            for j in 0..n {
                centroid[j] += v[j] / n as f64;
            }
        }

        let reflect: Vec<f64> = (0..n)
            .map(|j| centroid[j] + alpha * (centroid[j] - simplex[worst][j]))
            .collect();
        let f_reflect = f(&reflect);

        if f_reflect < fvals[best] {
            let expand: Vec<f64> = (0..n)
                .map(|j| centroid[j] + gamma * (reflect[j] - centroid[j]))
                .collect();
            let f_expand = f(&expand);
            if f_expand < f_reflect {
                simplex[worst] = expand;
                fvals[worst] = f_expand;
            } else {
                simplex[worst] = reflect;
                fvals[worst] = f_reflect;
            }
        } else if f_reflect < fvals[second_worst] {
            simplex[worst] = reflect;
            fvals[worst] = f_reflect;
        } else {
            let contract: Vec<f64> = (0..n)
                .map(|j| centroid[j] + rho * (simplex[worst][j] - centroid[j]))
                .collect();
            let f_contract = f(&contract);
            if f_contract < fvals[worst] {
                simplex[worst] = contract;
                fvals[worst] = f_contract;
            } else {
                // shrink toward the best vertex
                let best_v = simplex[best].clone();
                for (i, v) in simplex.iter_mut().enumerate() {
                    if i == best {
                        continue;
                    }
                    for j in 0..n {
                        v[j] = best_v[j] + sigma * (v[j] - best_v[j]);
                    }
                    fvals[i] = f(v);
                }
            }
        }
    }

    let mut best = 0;
    for i in 1..=n {
        if fvals[i] < fvals[best] {
            best = i;
        }
    }
    MinResult {
        x: simplex[best].clone(),
        fx: fvals[best],
        iterations,
        converged,
    }
}

/// Brent's method for one-dimensional bounded minimization on `[a, b]`.
///
/// Golden-section with parabolic interpolation; `f` need not be
/// differentiable. Returns `(x_min, f_min)`.
pub fn brent_min<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64, max_iter: usize) -> (f64, f64) {
    let golden = 0.381_966_011_250_105;
    let (mut a, mut b) = (a.min(b), a.max(b));
    let mut x = a + golden * (b - a);
    let mut w = x;
    let mut v = x;
    let mut fx = f(x);
    let mut fw = fx;
    let mut fv = fx;
    let mut d: f64 = 0.0;
    let mut e: f64 = 0.0;

    for _ in 0..max_iter {
        let m = 0.5 * (a + b);
        let tol1 = tol * x.abs() + 1e-12;
        let tol2 = 2.0 * tol1;
        if (x - m).abs() <= tol2 - 0.5 * (b - a) {
            break;
        }
        let mut use_golden = true;
        if e.abs() > tol1 {
            // parabolic fit through x, w, v
            let r = (x - w) * (fx - fv);
            let q0 = (x - v) * (fx - fw);
            let mut p = (x - v) * q0 - (x - w) * r;
            let mut q = 2.0 * (q0 - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            let e_old = e;
            e = d;
            if p.abs() < (0.5 * q * e_old).abs() && p > q * (a - x) && p < q * (b - x) {
                d = p / q;
                let u = x + d;
                if (u - a) < tol2 || (b - u) < tol2 {
                    d = if m > x { tol1 } else { -tol1 };
                }
                use_golden = false;
            }
        }
        if use_golden {
            e = if x < m { b - x } else { a - x };
            d = golden * e;
        }
        let u = if d.abs() >= tol1 { x + d } else { x + if d > 0.0 { tol1 } else { -tol1 } };
        let fu = f(u);
        if fu <= fx {
            if u < x {
                b = x;
            } else {
                a = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    (x, fx)
}

/// Brent's root finder on a bracketing interval `[a, b]` with `f(a)` and
/// `f(b)` of opposite signs. Falls back to bisection steps whenever the
/// interpolated point is not acceptable, so convergence is guaranteed for
/// continuous `f`.
pub fn brent_root<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64, max_iter: usize) -> Option<f64> {
    let (mut a, mut b) = (a, b);
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Some(a);
    }
    if fb == 0.0 {
        return Some(b);
    }
    if fa * fb > 0.0 {
        return None;
    }
    if fa.abs() < fb.abs() {
        std::mem::swap(&mut a, &mut b);
        std::mem::swap(&mut fa, &mut fb);
    }
    let mut c = a;
    let mut fc = fa;
    let mut mflag = true;
    let mut d = a;

    for _ in 0..max_iter {
        if fb == 0.0 || (b - a).abs() < tol {
            return Some(b);
        }
        let mut s = if fa != fc && fb != fc {
            // inverse quadratic interpolation
            a * fb * fc / ((fa - fb) * (fa - fc))
                + b * fa * fc / ((fb - fa) * (fb - fc))
                + c * fa * fb / ((fc - fa) * (fc - fb))
        } else {
            b - fb * (b - a) / (fb - fa)
        };

        let lo = (3.0 * a + b) / 4.0;
        let cond = !((lo.min(b) < s && s < lo.max(b))
            && !(mflag && (s - b).abs() >= (b - c).abs() / 2.0)
            && !(!mflag && (s - b).abs() >= (c - d).abs() / 2.0)
            && !(mflag && (b - c).abs() < tol)
            && !(!mflag && (c - d).abs() < tol));
        if cond {
            s = 0.5 * (a + b);
            mflag = true;
        } else {
            mflag = false;
        }
        let fs = f(s);
        d = c;
        c = b;
        fc = fb;
        if fa * fs < 0.0 {
            b = s;
            fb = fs;
        } else {
            a = s;
            fa = fs;
        }
        if fa.abs() < fb.abs() {
            std::mem::swap(&mut a, &mut b);
            std::mem::swap(&mut fa, &mut fb);
        }
    }
    Some(b)
}
