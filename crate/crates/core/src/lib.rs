//! Time-consistent investment under strictly monotone mean-variance preferences.
//!
//! The equilibrium dollar amount in a Black-Scholes market with deterministic
//! coefficients is `pi_t = vartheta_t beta_t e^{-int_t^T r} / (theta sigma_t)`, where
//! `beta` solves a nonlinear integral fixed point. The crate provides
//!
//! * [`special`]: `Phi`, `phi`, the integrated CDF `f`, its inverse `psi` and `int_0^b psi`;
//! * [`market`]: coefficient curves, market parameters and time grids;
//! * [`beta`]: the Picard solver for `beta` and the strong equilibrium margin;
//! * [`measure`]: `lambda`, `g` and their first-order behaviour on discrete laws;
//! * [`equilibrium`]: strategies, Gaussian terminal laws and closed-form values;
//! * [`spike`]: open- and closed-loop spike deviations and their asymptotics;
//! * [`montecarlo`]: reproducible parallel wealth simulation and empirical values;
//! * [`cli`]: the `smmv` command line.
//!
//! Runnable examples live in `examples/`: `special_functions`, `beta_fixed_point`,
//! `strategy_sweep`, `measure_lemmas`, `gaussian_value`, `spike_asymptotics` and
//! `monte_carlo`.

pub mod quadrature;
pub mod special;
pub mod market;
pub mod beta;
pub mod measure;
pub mod equilibrium;
pub mod spike;
pub mod montecarlo;
pub mod cli;
