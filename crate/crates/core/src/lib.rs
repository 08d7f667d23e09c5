//! Vine-copula return modeling and portfolio backtesting.
//!
//! The crate is organized as a pipeline over daily return panels:
//!
//! - [`marginals`]: AR(1)-GARCH(1,1) filtering with skewed Student-t
//!   innovations, probability integral transforms and one-step forecasts.
//! - [`bicop`]: bivariate copula families (elliptical, Archimedean and
//!   BB families with rotations), h-functions, sampling, fitting and
//!   AIC-based selection.
//! - [`vine`]: C-, D- and R-vine structure selection, sequential and
//!   joint maximum-likelihood estimation, simulation and Rosenblatt
//!   transforms.
//! - [`gof`]: empirical-copula goodness-of-fit tests with bootstrap
//!   p-values.
//! - [`portfolio`]: minimum-variance, minimum-CVaR and maximum-Sharpe
//!   allocation on scenario matrices.
//! - [`backtest`]: rolling out-of-sample experiments, ledger accounting,
//!   performance reports and strategy-effect regressions.
//! - [`risktests`]: VaR coverage tests (UC/CC/DQ) and expected-shortfall
//!   calibration tests.
//! - [`panel`]: return-panel ingestion and descriptive statistics.

pub mod backtest;
pub mod bicop;
pub mod error;
pub mod gof;
pub mod marginals;
pub mod panel;
pub mod portfolio;
pub mod risktests;
pub mod util;
pub mod vine;

pub use error::{Error, Result};
