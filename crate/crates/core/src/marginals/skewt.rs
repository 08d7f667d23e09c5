//! Standardized skewed Student-t distribution.
//!
//! Two-piece construction: a unit-variance Student-t core is scaled by
//! `1/zeta` on the left half-line and by `zeta` on the right, then the
//! result is rescaled to zero mean and unit variance. `zeta = 1` recovers
//! the symmetric standardized Student-t; `zeta > 1` thickens the left
//! tail, so the cumulative probability at zero drops below one half.

use crate::error::{Error, Result};
use crate::util::dist::{t_cdf, t_quantile};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

/// Skewness and shape of the standardized skew-t innovation density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SkewtParams {
    /// Skewness parameter, > 0; 1 is symmetric.
    pub skew: f64,
    /// Degrees of freedom, > 2.
    pub shape: f64,
}

impl SkewtParams {
    pub fn new(skew: f64, shape: f64) -> Result<Self> {
        if !(skew > 0.0 && skew.is_finite()) {
            return Err(Error::InvalidParameter(format!("skew must be > 0, got {skew}")));
        }
        if !(shape > 2.0 && shape.is_finite()) {
            return Err(Error::InvalidParameter(format!("shape must be > 2, got {shape}")));
        }
        Ok(Self { skew, shape })
    }

    pub fn symmetric(shape: f64) -> Result<Self> {
        Self::new(1.0, shape)
    }
}

/// Precomputed constants for repeated density evaluations at fixed
/// parameters (the GARCH likelihood calls this in a tight loop).
#[derive(Debug, Clone, Copy)]
pub(crate) struct SkewtCtx {
    zeta: f64,
    /// E|X| of the unit-variance core.
    mu: f64,
    sigma: f64,
    ln_sigma: f64,
    /// log of 2/(zeta + 1/zeta)
    ln_norm: f64,
    /// log of the core density normalizing constant
    ln_c: f64,
    /// eta - 2
    k: f64,
    /// (eta + 1) / 2
    e: f64,
    shape: f64,
}

impl SkewtCtx {
    pub fn new(p: SkewtParams) -> Self {
        let eta = p.shape;
        let zeta = p.skew;
        let m1 = 2.0 * (eta - 2.0).sqrt() * (ln_gamma((eta + 1.0) / 2.0) - ln_gamma(eta / 2.0)).exp()
            / (std::f64::consts::PI.sqrt() * (eta - 1.0));
        let mu = m1 * (1.0 / zeta - zeta);
        let sigma2 = (1.0 - m1 * m1) * (zeta * zeta + 1.0 / (zeta * zeta)) + 2.0 * m1 * m1 - 1.0;
        let sigma = sigma2.sqrt();
        let ln_c = ln_gamma((eta + 1.0) / 2.0)
            - ln_gamma(eta / 2.0)
            - 0.5 * (std::f64::consts::PI * (eta - 2.0)).ln();
        SkewtCtx {
            zeta,
            mu,
            sigma,
            ln_sigma: sigma.ln(),
            ln_norm: (2.0 / (zeta + 1.0 / zeta)).ln(),
            ln_c,
            k: eta - 2.0,
            e: (eta + 1.0) / 2.0,
            shape: eta,
        }
    }

    /// Log-density of the standardized skew-t at `z`.
    #[inline]
    pub fn ln_pdf(&self, z: f64) -> f64 {
        let y = self.sigma * z + self.mu;
        let w = if y < 0.0 { y / self.zeta } else { y * self.zeta };
        self.ln_sigma + self.ln_norm + self.ln_c - self.e * (w * w / self.k).ln_1p()
    }

    /// CDF of the standardized skew-t at `z`.
    pub fn cdf(&self, z: f64) -> f64 {
        let y = self.sigma * z + self.mu;
        let z2 = self.zeta * self.zeta;
        let scale = (self.shape / self.k).sqrt(); // unit-variance core -> classical t
        if y < 0.0 {
            2.0 * z2 / (z2 + 1.0) * t_cdf(y / self.zeta * scale, self.shape)
        } else {
            z2 / (z2 + 1.0) + 2.0 / (z2 + 1.0) * (t_cdf(y * self.zeta * scale, self.shape) - 0.5)
        }
    }

    /// Quantile of the standardized skew-t.
    pub fn quantile(&self, u: f64) -> f64 {
        let z2 = self.zeta * self.zeta;
        let p_star = z2 / (z2 + 1.0);
        let scale = (self.k / self.shape).sqrt(); // classical t -> unit-variance core
        let y = if u < p_star {
            self.zeta * scale * t_quantile(u * (z2 + 1.0) / (2.0 * z2), self.shape)
        } else {
            scale / self.zeta * t_quantile((u - p_star) * (z2 + 1.0) / 2.0 + 0.5, self.shape)
        };
        (y - self.mu) / self.sigma
    }
}

/// Density of the standardized skew-t distribution at `z`.
pub fn skewt_pdf(z: f64, p: SkewtParams) -> Result<f64> {
    if !z.is_finite() {
        return Err(Error::InvalidData(format!("non-finite z: {z}")));
    }
    SkewtParams::new(p.skew, p.shape)?;
    Ok(SkewtCtx::new(p).ln_pdf(z).exp())
}

/// CDF of the standardized skew-t distribution at `z`.
pub fn skewt_cdf(z: f64, p: SkewtParams) -> Result<f64> {
    if !z.is_finite() {
        return Err(Error::InvalidData(format!("non-finite z: {z}")));
    }
    SkewtParams::new(p.skew, p.shape)?;
    Ok(SkewtCtx::new(p).cdf(z).clamp(0.0, 1.0))
}

/// Quantile of the standardized skew-t distribution.
pub fn skewt_quantile(u: f64, p: SkewtParams) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::InvalidParameter(format!("u must be in (0,1), got {u}")));
    }
    SkewtParams::new(p.skew, p.shape)?;
    Ok(SkewtCtx::new(p).quantile(u))
}
