//! Monte Carlo simulation of the wealth equation and empirical SMMV values.
//!
//! Every path draws from its own ChaCha8 stream selected by the path index,
//! so results are bit-identical for any thread count.

use crate::equilibrium::{gaussian_terminal, DeterministicStrategy};
use crate::market::{MarketError, MarketParams};
use crate::measure::{grad_g_at, solve_sorted, DiscreteMeasure, MeasureError};
use crate::quadrature::{sum, CompensatedSum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Market(#[from] MarketError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Draw `X_T = mu + S Z` from the exact normal terminal law.
    ExactGaussian,
    /// Euler-Maruyama on a uniform grid.
    Euler,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub n_paths: usize,
    #[serde(default = "default_steps")]
    pub n_steps: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_scheme")]
    pub scheme: Scheme,
    #[serde(default)]
    pub t0: f64,
    #[serde(default = "default_x0")]
    pub x0: f64,
    /// Keep every Euler path (memory grows as `n_paths * n_steps`).
    #[serde(default)]
    pub store_paths: bool,
}

fn default_steps() -> usize {
    1
}
fn default_scheme() -> Scheme {
    Scheme::ExactGaussian
}
fn default_x0() -> f64 {
    1.0
}

impl SimConfig {
    pub fn exact(n_paths: usize, seed: u64, t0: f64, x0: f64) -> Self {
        Self { n_paths, n_steps: 1, seed, scheme: Scheme::ExactGaussian, t0, x0, store_paths: false }
    }

    pub fn euler(n_paths: usize, n_steps: usize, seed: u64, t0: f64, x0: f64) -> Self {
        Self { n_paths, n_steps, seed, scheme: Scheme::Euler, t0, x0, store_paths: false }
    }

    fn validate(&self, params: &MarketParams) -> Result<(), SimError> {
        if self.n_paths == 0 {
            return Err(SimError::InvalidConfig("n_paths must be at least 1".into()));
        }
        if self.n_steps == 0 {
            return Err(SimError::InvalidConfig("n_steps must be at least 1".into()));
        }
        if !self.x0.is_finite() {
            return Err(SimError::InvalidConfig(format!("x0 = {}", self.x0)));
        }
        params.check_time(self.t0)?;
        Ok(())
    }
}

/// Simulated terminal wealth, with the provenance needed to regenerate it.
#[derive(Debug, Clone, PartialEq)]
pub struct PathBatch {
    terminal_wealth: Vec<f64>,
    paths: Option<Vec<Vec<f64>>>,
    seed: u64,
    scheme: Scheme,
}

impl PathBatch {
    pub fn terminal_wealth(&self) -> &[f64] {
        &self.terminal_wealth
    }

    /// Euler paths including the starting value, when stored.
    pub fn paths(&self) -> Option<&[Vec<f64>]> {
        self.paths.as_deref()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    /// Path `i` used stream `i` of the ChaCha8 generator seeded with `seed`.
    pub fn stream_id(&self, path: usize) -> u64 {
        path as u64
    }

    pub fn len(&self) -> usize {
        self.terminal_wealth.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terminal_wealth.is_empty()
    }

    /// Empirical law with common floor `zeta`.
    pub fn to_measure(&self, zeta: f64) -> Result<DiscreteMeasure, MeasureError> {
        DiscreteMeasure::uniform(&self.terminal_wealth, zeta)
    }
}

fn path_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Simulates terminal wealth under a deterministic strategy.
pub fn simulate<S: DeterministicStrategy + Sync + ?Sized>(
    params: &MarketParams,
    strategy: &S,
    cfg: &SimConfig,
) -> Result<PathBatch, SimError> {
    cfg.validate(params)?;
    match cfg.scheme {
        Scheme::ExactGaussian => {
            let gt = gaussian_terminal(params, strategy, cfg.t0, cfg.x0)?;
            let terminal_wealth = (0..cfg.n_paths)
                .into_par_iter()
                .map(|i| {
                    if gt.sd > 0.0 {
                        let z: f64 = path_rng(cfg.seed, i as u64).sample(StandardNormal);
                        gt.mu + gt.sd * z
                    } else {
                        gt.mu
                    }
                })
                .collect();
            Ok(PathBatch { terminal_wealth, paths: None, seed: cfg.seed, scheme: cfg.scheme })
        }
        Scheme::Euler => {
            let t0 = cfg.t0;
            let dt = (params.horizon() - t0) / cfg.n_steps as f64;
            let sqrt_dt = dt.sqrt();
            // Coefficients frozen at the left end of each step.
            let coeffs: Vec<(f64, f64, f64)> = (0..cfg.n_steps)
                .map(|k| {
                    let s = t0 + k as f64 * dt;
                    let a = strategy.amount(params, s) * params.sigma(s);
                    (params.r(s), a, params.vartheta(s))
                })
                .collect();
            let run = |i: usize| -> (f64, Option<Vec<f64>>) {
                let mut rng = path_rng(cfg.seed, i as u64);
                let mut x = cfg.x0;
                let mut path = cfg.store_paths.then(|| {
                    let mut v = Vec::with_capacity(cfg.n_steps + 1);
                    v.push(x);
                    v
                });
                for &(r, a, v) in &coeffs {
                    let z: f64 = rng.sample(StandardNormal);
                    x += x * r * dt + a * (v * dt + sqrt_dt * z);
                    if let Some(p) = path.as_mut() {
                        p.push(x);
                    }
                }
                (x, path)
            };
            let out: Vec<(f64, Option<Vec<f64>>)> = (0..cfg.n_paths).into_par_iter().map(run).collect();
            let mut terminal_wealth = Vec::with_capacity(out.len());
            let mut paths = cfg.store_paths.then(|| Vec::with_capacity(out.len()));
            for (x, p) in out {
                terminal_wealth.push(x);
                if let (Some(all), Some(p)) = (paths.as_mut(), p) {
                    all.push(p);
                }
            }
            Ok(PathBatch { terminal_wealth, paths, seed: cfg.seed, scheme: cfg.scheme })
        }
    }
}

/// Standard-error estimator for the empirical value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case", deny_unknown_fields)]
pub enum SeMethod {
    /// Nonparametric bootstrap.
    Bootstrap { resamples: usize, seed: u64 },
    /// Delta-method standard error from the influence functions of `lambda` and `g`.
    Influence,
}

impl Default for SeMethod {
    fn default() -> Self {
        SeMethod::Bootstrap { resamples: 200, seed: 0 }
    }
}

/// `lambda` and `g` of an empirical law with their standard errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalValue {
    pub lambda: f64,
    pub g: f64,
    pub se_g: f64,
    pub se_lambda: f64,
    pub n: usize,
}

/// `lambda` and `g` of the equally weighted law of `samples` with floor `zeta`.
pub fn empirical_value(
    samples: &[f64],
    zeta: f64,
    theta: f64,
    se: SeMethod,
) -> Result<EmpiricalValue, SimError> {
    let measure = DiscreteMeasure::uniform(samples, zeta)?;
    let lr = crate::measure::solve_lambda(&measure, theta)?;
    let lambda = lr.lambda;
    let n = samples.len();
    let g = sum(samples.iter().map(|&x| grad_g_at(lambda, theta, x, zeta))) / n as f64;
    let (se_g, se_lambda) = match se {
        SeMethod::Influence => {
            let active = lr.mass_below + lr.mass_at;
            let ig: Vec<f64> = samples.iter().map(|&x| grad_g_at(lambda, theta, x, zeta) - g).collect();
            let il: Vec<f64> = samples
                .iter()
                .map(|&x| {
                    let h = zeta + theta * (lambda - x - zeta / theta).max(0.0);
                    -(h - 1.0) / (theta * active)
                })
                .collect();
            (std_dev(&ig) / (n as f64).sqrt(), std_dev(&il) / (n as f64).sqrt())
        }
        SeMethod::Bootstrap { resamples, seed } => {
            if resamples < 2 {
                return Err(SimError::InvalidConfig("bootstrap needs at least 2 resamples".into()));
            }
            let mut sorted = samples.to_vec();
            sorted.sort_by(f64::total_cmp);
            let b: Vec<f64> = sorted.iter().map(|x| x + zeta / theta).collect();
            let target = (1.0 - zeta) / theta;
            let stats: Vec<(f64, f64)> = (0..resamples)
                .into_par_iter()
                .map(|k| {
                    let mut rng = path_rng(seed, k as u64);
                    let mut counts = vec![0u32; n];
                    for _ in 0..n {
                        counts[rng.random_range(0..n)] += 1;
                    }
                    let w: Vec<f64> = counts.iter().map(|&c| c as f64 / n as f64).collect();
                    let l = solve_sorted(&b, &w, target);
                    let mut acc = CompensatedSum::new();
                    for (x, &c) in sorted.iter().zip(&counts) {
                        if c > 0 {
                            acc.add(c as f64 * grad_g_at(l, theta, *x, zeta));
                        }
                    }
                    (l, acc.value() / n as f64)
                })
                .collect();
            let gs: Vec<f64> = stats.iter().map(|s| s.1).collect();
            let ls: Vec<f64> = stats.iter().map(|s| s.0).collect();
            (std_dev(&gs), std_dev(&ls))
        }
    };
    Ok(EmpiricalValue { lambda, g, se_g, se_lambda, n })
}

/// Sample standard deviation with the `n - 1` denominator; 0 for fewer than two values.
fn std_dev(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let m = sum(v.iter().copied()) / v.len() as f64;
    let ss = sum(v.iter().map(|x| (x - m) * (x - m)));
    (ss / (v.len() - 1) as f64).sqrt()
}
