//! Archimedean copulas through their generators.
//!
//! Every family here is `C(u,v) = phi^{-1}(phi(u) + phi(v))` for a
//! strictly decreasing convex generator `phi`. Density and h-function
//! follow from the generator derivatives:
//!
//! - `h(u|v) = phi'(v) / phi'(C)`
//! - `c(u,v) = -phi''(C) phi'(u) phi'(v) / phi'(C)^3`

use super::family::FamilyId;

/// Generator dispatch for the Archimedean families. Parameters are the
/// validated `BicopSpec` parameters.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Generator {
    family: FamilyId,
    theta: f64,
    delta: f64,
}

impl Generator {
    pub fn new(family: FamilyId, params: &[f64]) -> Self {
        Generator {
            family,
            theta: params.first().copied().unwrap_or(0.0),
            delta: params.get(1).copied().unwrap_or(0.0),
        }
    }

    /// phi(u)
    pub fn phi(&self, u: f64) -> f64 {
        let th = self.theta;
        let dl = self.delta;
        match self.family {
            FamilyId::Clayton => (u.powf(-th) - 1.0) / th,
            FamilyId::Gumbel => (-u.ln()).powf(th),
            FamilyId::Frank => {
                // -ln[(e^{-th u} - 1) / (e^{-th} - 1)]
                let num = (-th * u).exp_m1();
                let den = (-th).exp_m1();
                -(num / den).ln()
            }
            FamilyId::Joe => -(-(1.0 - u).powf(th)).ln_1p(),
            FamilyId::Bb1 => (u.powf(-th) - 1.0).powf(dl),
            FamilyId::Bb6 => (-(-(1.0 - u).powf(th)).ln_1p()).powf(dl),
            FamilyId::Bb7 => (1.0 - (1.0 - u).powf(th)).powf(-dl) - 1.0,
            FamilyId::Bb8 => {
                let k0 = 1.0 - (1.0 - dl).powf(th);
                let k = 1.0 - (1.0 - dl * u).powf(th);
                -(k / k0).ln()
            }
            _ => unreachable!("not an Archimedean family"),
        }
    }

    /// phi'(u), negative on (0,1)
    pub fn dphi(&self, u: f64) -> f64 {
        let th = self.theta;
        let dl = self.delta;
        match self.family {
            FamilyId::Clayton => -u.powf(-th - 1.0),
            FamilyId::Gumbel => {
                let x = -u.ln();
                -th * x.powf(th - 1.0) / u
            }
            FamilyId::Frank => {
                let e = (-th * u).exp();
                th * e / (e - 1.0)
            }
            FamilyId::Joe => {
                let xb = 1.0 - u;
                -th * xb.powf(th - 1.0) / (1.0 - xb.powf(th))
            }
            FamilyId::Bb1 => {
                let a = u.powf(-th) - 1.0;
                -th * dl * a.powf(dl - 1.0) * u.powf(-th - 1.0)
            }
            FamilyId::Bb6 => {
                let xb = 1.0 - u;
                let k = 1.0 - xb.powf(th);
                let p = -k.ln();
                let dp = -th * xb.powf(th - 1.0) / k;
                dl * p.powf(dl - 1.0) * dp
            }
            FamilyId::Bb7 => {
                let xb = 1.0 - u;
                let k = 1.0 - xb.powf(th);
                -th * dl * k.powf(-dl - 1.0) * xb.powf(th - 1.0)
            }
            FamilyId::Bb8 => {
                let m = 1.0 - dl * u;
                let k = 1.0 - m.powf(th);
                -th * dl * m.powf(th - 1.0) / k
            }
            _ => unreachable!(),
        }
    }

    /// phi''(u), positive on (0,1)
    pub fn d2phi(&self, u: f64) -> f64 {
        let th = self.theta;
        let dl = self.delta;
        match self.family {
            FamilyId::Clayton => (th + 1.0) * u.powf(-th - 2.0),
            FamilyId::Gumbel => {
                let x = -u.ln();
                th * x.powf(th - 2.0) * (th - 1.0 + x) / (u * u)
            }
            FamilyId::Frank => {
                let e = (-th * u).exp();
                let d = e - 1.0;
                th * th * e / (d * d)
            }
            FamilyId::Joe => {
                let xb = 1.0 - u;
                let k = 1.0 - xb.powf(th);
                th * xb.powf(th - 2.0) * (th - 1.0 + xb.powf(th)) / (k * k)
            }
            FamilyId::Bb1 => {
                let a = u.powf(-th) - 1.0;
                th * dl
                    * (th * (dl - 1.0) * a.powf(dl - 2.0) * u.powf(-2.0 * th - 2.0)
                        + (th + 1.0) * a.powf(dl - 1.0) * u.powf(-th - 2.0))
            }
            FamilyId::Bb6 => {
                let xb = 1.0 - u;
                let k = 1.0 - xb.powf(th);
                let p = -k.ln();
                let dp = -th * xb.powf(th - 1.0) / k;
                let d2p = th * xb.powf(th - 2.0) * (th - 1.0 + xb.powf(th)) / (k * k);
                dl * ((dl - 1.0) * p.powf(dl - 2.0) * dp * dp + p.powf(dl - 1.0) * d2p)
            }
            FamilyId::Bb7 => {
                let xb = 1.0 - u;
                let k = 1.0 - xb.powf(th);
                th * dl
                    * (th * (dl + 1.0) * k.powf(-dl - 2.0) * xb.powf(2.0 * th - 2.0)
                        + (th - 1.0) * k.powf(-dl - 1.0) * xb.powf(th - 2.0))
            }
            FamilyId::Bb8 => {
                let m = 1.0 - dl * u;
                let k = 1.0 - m.powf(th);
                th * dl * dl * m.powf(th - 2.0) * (th - 1.0 + m.powf(th)) / (k * k)
            }
            _ => unreachable!(),
        }
    }

    /// phi^{-1}(t)
    pub fn phi_inv(&self, t: f64) -> f64 {
        let th = self.theta;
        let dl = self.delta;
        let u = match self.family {
            FamilyId::Clayton => (1.0 + th * t).powf(-1.0 / th),
            FamilyId::Gumbel => (-t.powf(1.0 / th)).exp(),
            FamilyId::Frank => {
                let den = (-th).exp_m1();
                -(-t).exp().mul_add(den, 1.0).ln() / th
            }
            FamilyId::Joe => 1.0 - (-(-t).exp_m1()).powf(1.0 / th),
            FamilyId::Bb1 => (1.0 + t.powf(1.0 / dl)).powf(-1.0 / th),
            FamilyId::Bb6 => 1.0 - (-(-t.powf(1.0 / dl)).exp_m1()).powf(1.0 / th),
            FamilyId::Bb7 => 1.0 - (1.0 - (1.0 + t).powf(-1.0 / dl)).powf(1.0 / th),
            FamilyId::Bb8 => {
                let k0 = 1.0 - (1.0 - dl).powf(th);
                (1.0 - (1.0 - k0 * (-t).exp()).powf(1.0 / th)) / dl
            }
            _ => unreachable!(),
        };
        u.clamp(0.0, 1.0)
    }

    pub fn cdf(&self, u: f64, v: f64) -> f64 {
        self.phi_inv(self.phi(u) + self.phi(v))
    }

    pub fn pdf(&self, u: f64, v: f64) -> f64 {
        let c = self.cdf(u, v).clamp(1e-12, 1.0 - 1e-12);
        let dc = self.dphi(c);
        let val = -self.d2phi(c) * self.dphi(u) * self.dphi(v) / (dc * dc * dc);
        if val.is_finite() {
            val.max(0.0)
        } else {
            0.0
        }
    }

    /// h(u|v) = dC/dv
    pub fn hfunc(&self, u: f64, v: f64) -> f64 {
        let c = self.cdf(u, v).clamp(1e-12, 1.0 - 1e-12);
        (self.dphi(v) / self.dphi(c)).clamp(0.0, 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gen(f: FamilyId, params: &[f64]) -> Generator {
        Generator::new(f, params)
    }

    const CASES: [(FamilyId, [f64; 2]); 8] = [
        (FamilyId::Clayton, [2.0, 0.0]),
        (FamilyId::Gumbel, [2.0, 0.0]),
        (FamilyId::Frank, [5.0, 0.0]),
        (FamilyId::Joe, [2.5, 0.0]),
        (FamilyId::Bb1, [0.8, 1.5]),
        (FamilyId::Bb6, [1.5, 1.4]),
        (FamilyId::Bb7, [1.5, 1.2]),
        (FamilyId::Bb8, [2.5, 0.7]),
    ];

    #[test]
    fn generator_inverse_round_trip() {
        for (f, p) in CASES {
            let g = gen(f, &p);
            for &u in &[0.05, 0.3, 0.5, 0.8, 0.99] {
                let t = g.phi(u);
                assert!((g.phi_inv(t) - u).abs() < 1e-10, "{f:?} u={u}");
            }
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let h = 1e-6;
        for (f, p) in CASES {
            let g = gen(f, &p);
            for &u in &[0.2, 0.5, 0.8] {
                let fd1 = (g.phi(u + h) - g.phi(u - h)) / (2.0 * h);
                assert!(
                    (fd1 - g.dphi(u)).abs() / g.dphi(u).abs() < 1e-6,
                    "{f:?} dphi at {u}: fd {fd1} vs {}",
                    g.dphi(u)
                );
                let fd2 = (g.phi(u + h) - 2.0 * g.phi(u) + g.phi(u - h)) / (h * h);
                assert!(
                    (fd2 - g.d2phi(u)).abs() / g.d2phi(u).abs() < 1e-3,
                    "{f:?} d2phi at {u}: fd {fd2} vs {}",
                    g.d2phi(u)
                );
            }
        }
    }

    #[test]
    fn frank_negative_theta_works() {
        let g = gen(FamilyId::Frank, &[-4.0, 0.0]);
        for &u in &[0.1, 0.5, 0.9] {
            let t = g.phi(u);
            assert!(t.is_finite() && t >= 0.0);
            assert!((g.phi_inv(t) - u).abs() < 1e-10);
            assert!(g.dphi(u) < 0.0);
            assert!(g.d2phi(u) > 0.0);
        }
        // negative dependence: C(u,v) < uv
        assert!(g.cdf(0.5, 0.5) < 0.25);
    }

    #[test]
    fn clayton_closed_forms() {
        let g = gen(FamilyId::Clayton, &[2.0, 0.0]);
        let c = g.cdf(0.5, 0.5);
        assert!((c - 7.0f64.powf(-0.5)).abs() < 1e-14);
        let h = g.hfunc(0.5, 0.5);
        assert!((h - 8.0 * 7.0f64.powf(-1.5)).abs() < 1e-12);
    }
}
