//! Unbiased and closed-form point estimation for the two-parameter Gamma
//! and Beta families.
//!
//! The crate is organised bottom-up:
//!
//! * [`specfun`]: log-gamma, digamma, trigamma, log-beta and Hurwitz zeta.
//! * [`numkit`]: adaptive quadrature, bracketed minimisation, guarded series.
//! * [`gseries`]: the coefficient recursion behind the density of the
//!   geometric/arithmetic mean ratio of a Gamma sample.
//! * [`gamma_est`]: UMVUEs of α, λ, 1/α, 1/λ, the Ye–Chen and Louzada
//!   closed forms, Fisher information and efficiency functions.
//! * [`beta_est`]: Stein-identity estimators for the Beta family, their
//!   asymptotic covariance and the least-efficiency table.
//! * [`mc`]: seeded samplers and the Monte Carlo experiment runner.

pub mod beta_est;
pub mod error;
pub mod gamma_est;
pub mod gseries;
pub mod mc;
pub mod numkit;
pub mod specfun;

pub use error::{Error, Result};
