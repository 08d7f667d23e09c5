//! One-dimensional quadrature.

/// Adaptive Simpson integration of `f` on `[a, b]` to absolute tolerance
/// `tol`. Recursion depth is capped; on hitting the cap the current
/// estimate is accepted.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_rec(f, a, b, fa, fm, fb, whole, tol, 50)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: usize,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        simpson_rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
            + simpson_rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
}

/// 20-point Gauss-Legendre nodes and weights on [-1, 1] (positive half;
/// nodes are symmetric).
const GL20_X: [f64; 10] = [
    0.076_526_521_133_497_33,
    0.227_785_851_141_645_1,
    0.373_706_088_715_419_56,
    0.510_867_001_950_827_1,
    0.636_053_680_726_515_1,
    0.746_331_906_460_150_8,
    0.839_116_971_822_218_8,
    0.912_234_428_251_325_9,
    0.963_971_927_277_913_8,
    0.993_128_599_185_094_9,
];
const GL20_W: [f64; 10] = [
    0.152_753_387_130_725_85,
    0.149_172_986_472_603_75,
    0.142_096_109_318_382_05,
    0.131_688_638_449_176_63,
    0.118_194_531_961_518_42,
    0.101_930_119_817_240_44,
    0.083_276_741_576_704_75,
    0.062_672_048_334_109_06,
    0.040_601_429_800_386_94,
    0.017_614_007_139_152_12,
];

/// Fixed 20-point Gauss-Legendre quadrature on `[a, b]`.
pub fn gauss_legendre_20<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut acc = 0.0;
    for i in 0..10 {
        acc += GL20_W[i] * (f(c - h * GL20_X[i]) + f(c + h * GL20_X[i]));
    }
    acc * h
}

/// Composite 20-point Gauss-Legendre over `panels` equal subintervals.
pub fn gauss_legendre_composite<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|k| gauss_legendre_20(f, a + k as f64 * h, a + (k + 1) as f64 * h))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_matches_known_integral() {
        let v = adaptive_simpson(&|x: f64| x.exp(), 0.0, 1.0, 1e-12);
        assert!((v - (1f64.exp() - 1.0)).abs() < 1e-11);
    }

    #[test]
    fn gl20_is_exact_for_polynomials() {
        // exact up to degree 39
        let v = gauss_legendre_20(&|x: f64| x.powi(8) - 3.0 * x.powi(3) + 1.0, -1.0, 2.0);
        let exact = (2f64.powi(9) - (-1f64).powi(9)) / 9.0 - 3.0 * (2f64.powi(4) - 1.0) / 4.0 + 3.0;
        assert!((v - exact).abs() < 1e-12);
    }

    #[test]
    fn composite_handles_peaked_integrand() {
        let f = |x: f64| (-(x - 0.5).powi(2) * 4000.0).exp();
        let v = gauss_legendre_composite(&f, 0.0, 1.0, 16);
        let exact = (std::f64::consts::PI / 4000.0).sqrt(); // full Gaussian mass, tails negligible
        assert!((v - exact).abs() < 1e-10);
    }
}
