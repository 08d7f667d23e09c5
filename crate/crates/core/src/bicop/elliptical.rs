//! Gaussian and Student-t copulas.

use crate::util::dist::{bvn_cdf, normal_cdf, normal_quantile, t_cdf, t_pdf, t_quantile};
use crate::util::quad::adaptive_simpson;
use statrs::function::gamma::ln_gamma;

pub(crate) struct GaussianCopula {
    pub rho: f64,
}

impl GaussianCopula {
    pub fn cdf(&self, u: f64, v: f64) -> f64 {
        bvn_cdf(normal_quantile(u), normal_quantile(v), self.rho)
    }

    pub fn pdf(&self, u: f64, v: f64) -> f64 {
        let r = self.rho;
        let x = normal_quantile(u);
        let y = normal_quantile(v);
        let d = 1.0 - r * r;
        ((-(r * r * (x * x + y * y) - 2.0 * r * x * y) / (2.0 * d)).exp()) / d.sqrt()
    }

    pub fn hfunc(&self, u: f64, v: f64) -> f64 {
        let x = normal_quantile(u);
        let y = normal_quantile(v);
        normal_cdf((x - self.rho * y) / (1.0 - self.rho * self.rho).sqrt())
    }

    pub fn hfunc_inv(&self, p: f64, v: f64) -> f64 {
        let y = normal_quantile(v);
        let x = normal_quantile(p) * (1.0 - self.rho * self.rho).sqrt() + self.rho * y;
        normal_cdf(x)
    }
}

pub(crate) struct StudentTCopula {
    pub rho: f64,
    pub nu: f64,
}

impl StudentTCopula {
    /// Conditional scale in the t h-function given the conditioning
    /// quantile `y`.
    fn cond_scale(&self, y: f64) -> f64 {
        ((self.nu + y * y) * (1.0 - self.rho * self.rho) / (self.nu + 1.0)).sqrt()
    }

    /// CDF by integrating the analytic h-function over the conditioning
    /// variable: C(u,v) = int_0^v h(u|w) dw. The integrand tends to a
    /// constant as w -> 0, so the clamped lower endpoint is harmless.
    pub fn cdf(&self, u: f64, v: f64) -> f64 {
        let x = t_quantile(u, self.nu);
        let f = |w: f64| {
            let w = w.clamp(1e-14, 1.0 - 1e-14);
            let y = t_quantile(w, self.nu);
            t_cdf((x - self.rho * y) / self.cond_scale(y), self.nu + 1.0)
        };
        adaptive_simpson(&f, 0.0, v, 5e-13).clamp(0.0, 1.0)
    }

    pub fn pdf(&self, u: f64, v: f64) -> f64 {
        let r = self.rho;
        let nu = self.nu;
        let x = t_quantile(u, nu);
        let y = t_quantile(v, nu);
        let d = 1.0 - r * r;
        let ln_joint = ln_gamma((nu + 2.0) / 2.0)
            - ln_gamma(nu / 2.0)
            - (nu * std::f64::consts::PI).ln()
            - 0.5 * d.ln()
            - (nu + 2.0) / 2.0 * ((x * x - 2.0 * r * x * y + y * y) / (nu * d)).ln_1p();
        (ln_joint - t_pdf(x, nu).ln() - t_pdf(y, nu).ln()).exp()
    }

    pub fn hfunc(&self, u: f64, v: f64) -> f64 {
        let x = t_quantile(u, self.nu);
        let y = t_quantile(v, self.nu);
        t_cdf((x - self.rho * y) / self.cond_scale(y), self.nu + 1.0)
    }

    pub fn hfunc_inv(&self, p: f64, v: f64) -> f64 {
        let y = t_quantile(v, self.nu);
        let x = t_quantile(p, self.nu + 1.0) * self.cond_scale(y) + self.rho * y;
        t_cdf(x, self.nu)
    }

    /// Symmetric tail dependence coefficient.
    pub fn tail_dependence(&self) -> f64 {
        2.0 * t_cdf(
            -((self.nu + 1.0) * (1.0 - self.rho) / (1.0 + self.rho)).sqrt(),
            self.nu + 1.0,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_zero_rho_is_independence() {
        let g = GaussianCopula { rho: 0.0 };
        assert!((g.cdf(0.3, 0.7) - 0.21).abs() < 1e-13);
        assert!((g.pdf(0.4, 0.9) - 1.0).abs() < 1e-13);
        assert!((g.hfunc(0.35, 0.8) - 0.35).abs() < 1e-13);
    }

    #[test]
    fn gaussian_h_round_trip() {
        let g = GaussianCopula { rho: 0.65 };
        for &(u, v) in &[(0.2, 0.4), (0.7, 0.1), (0.95, 0.95)] {
            let p = g.hfunc(u, v);
            assert!((g.hfunc_inv(p, v) - u).abs() < 1e-10);
        }
    }

    #[test]
    fn student_h_round_trip() {
        let t = StudentTCopula { rho: -0.4, nu: 4.5 };
        for &(u, v) in &[(0.2, 0.4), (0.7, 0.1), (0.95, 0.95)] {
            let p = t.hfunc(u, v);
            assert!((t.hfunc_inv(p, v) - u).abs() < 1e-9);
        }
    }

    #[test]
    fn student_cdf_consistent_with_h_derivative() {
        let t = StudentTCopula { rho: 0.5, nu: 6.0 };
        // dC/dv at (0.4, 0.6) via finite difference of the quadrature cdf
        let h = 1e-5;
        let fd = (t.cdf(0.4, 0.6 + h) - t.cdf(0.4, 0.6 - h)) / (2.0 * h);
        assert!((fd - t.hfunc(0.4, 0.6)).abs() < 1e-6);
    }

    #[test]
    fn student_cdf_margins() {
        let t = StudentTCopula { rho: 0.5, nu: 5.0 };
        for &u in &[0.1, 0.5, 0.9] {
            assert!((t.cdf(u, 1.0 - 1e-14) - u).abs() < 1e-9);
        }
    }

    #[test]
    fn student_large_nu_close_to_gaussian() {
        let t = StudentTCopula { rho: 0.5, nu: 500.0 };
        let g = GaussianCopula { rho: 0.5 };
        assert!((t.pdf(0.3, 0.6) - g.pdf(0.3, 0.6)).abs() < 1e-2);
        assert!((t.hfunc(0.3, 0.6) - g.hfunc(0.3, 0.6)).abs() < 1e-3);
    }
}
