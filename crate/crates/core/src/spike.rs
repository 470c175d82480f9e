//! Spike perturbations of the equilibrium strategy and their value gaps.
//!
//! On `[t, t + eps)` the equilibrium amount is either shifted by a constant
//! `xi` (open loop) or replaced by the constant `xi` (closed loop). The gap
//! `J(equilibrium) - J(perturbed)` is evaluated in closed form. Writing
//! `A = int L^2`, the value depends on the loading only through `mu` and `A`,
//! and `d/dA [A int_0^{y(A)} psi] = -Phi(psi(y(A))) / 2`, so
//!
//! `gap = -D_mu + theta/2 int_{A_0}^{A_1} Phi(psi(y(a))) da`
//!
//! where `D_mu` and `D_A = A_1 - A_0` are integrals over the spike window of
//! loading differences. This keeps full relative accuracy for gaps of order
//! `eps^3`.

use crate::beta::BetaSolution;
use crate::equilibrium::{
    gaussian_terminal, onec_strategy, value_gaussian, DeterministicStrategy, EquilibriumStrategy,
};
use crate::market::{MarketError, MarketParams};
use crate::quadrature::{gl16, gl8, CompensatedSum};
use crate::special::cdf_of_psi;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpikeError {
    #[error("spike window [{t}, {t} + {eps}] leaves [0, {horizon}]")]
    SpikeOutOfRange { t: f64, eps: f64, horizon: f64 },
    #[error("spike length must be positive, got {0}")]
    InvalidEpsilon(f64),
    #[error("epsilon ladder unsuitable for a fit: {0}")]
    InsufficientLadder(String),
    #[error("log-log fit is ill-conditioned (R^2 = {r_squared})")]
    IllConditionedFit { r_squared: f64 },
    #[error(transparent)]
    Market(#[from] MarketError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpikeMode {
    /// Equilibrium amount plus `xi` on the window.
    OpenLoop,
    /// Amount replaced by `xi` on the window.
    ClosedLoop,
}

impl SpikeMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            SpikeMode::OpenLoop => "open_loop",
            SpikeMode::ClosedLoop => "closed_loop",
        }
    }
}

/// Equilibrium strategy with a spike on `[start, end)`.
#[derive(Debug, Clone, Copy)]
pub struct SpikedStrategy<'a> {
    pub base: EquilibriumStrategy<'a>,
    pub start: f64,
    pub end: f64,
    pub xi: f64,
    pub mode: SpikeMode,
}

impl SpikedStrategy<'_> {
    fn in_window(&self, s: f64) -> bool {
        s >= self.start && s < self.end
    }
}

impl DeterministicStrategy for SpikedStrategy<'_> {
    fn amount(&self, params: &MarketParams, s: f64) -> f64 {
        let base = self.base.amount(params, s);
        if !self.in_window(s) {
            return base;
        }
        match self.mode {
            SpikeMode::OpenLoop => base + self.xi,
            SpikeMode::ClosedLoop => self.xi,
        }
    }

    fn loading(&self, params: &MarketParams, s: f64) -> f64 {
        let base = self.base.loading(params, s);
        if !self.in_window(s) {
            return base;
        }
        let extra = params.growth(s) * self.xi * params.sigma(s);
        match self.mode {
            SpikeMode::OpenLoop => base + extra,
            SpikeMode::ClosedLoop => extra,
        }
    }

    fn kinks(&self) -> Vec<f64> {
        let mut k = self.base.kinks();
        k.push(self.start);
        k.push(self.end);
        k
    }
}

fn check_window(params: &MarketParams, t: f64, eps: f64) -> Result<(), SpikeError> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(SpikeError::InvalidEpsilon(eps));
    }
    let horizon = params.horizon();
    if !(t >= 0.0 && t + eps <= horizon * (1.0 + 4.0 * f64::EPSILON)) {
        return Err(SpikeError::SpikeOutOfRange { t, eps, horizon });
    }
    Ok(())
}

/// `(D_mu, D_A)` over the window, integrating loading differences pointwise.
fn window_differences(
    params: &MarketParams,
    sol: &BetaSolution,
    t: f64,
    eps: f64,
    xi: f64,
    mode: SpikeMode,
) -> (f64, f64) {
    let end = (t + eps).min(params.horizon());
    let theta = params.theta();
    let mut cuts: Vec<f64> = sol
        .times()
        .iter()
        .copied()
        .chain(params.breakpoints())
        .filter(|&k| k > t && k < end)
        .collect();
    cuts.push(t);
    cuts.push(end);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut d_mu = CompensatedSum::new();
    let mut d_a = CompensatedSum::new();
    for w in cuts.windows(2) {
        let (m, a) = gl8().integrate_pair(w[0], w[1], |s| {
            let l0 = sol.beta_at(s) * params.vartheta(s) / theta;
            let extra = params.growth(s) * xi * params.sigma(s);
            let (diff, sum) = match mode {
                SpikeMode::OpenLoop => (extra, 2.0 * l0 + extra),
                SpikeMode::ClosedLoop => (extra - l0, extra + l0),
            };
            (diff * params.vartheta(s), diff * sum)
        });
        d_mu.add(m);
        d_a.add(a);
    }
    (d_mu.value(), d_a.value())
}

/// `int_0^{delta} Phi(psi((1 - zeta) / (theta sqrt(a0 + u)))) du`.
///
/// Integrating over the offset keeps the interval length exact; forming
/// `a0 + delta` first would round away most digits of a tiny `delta`.
fn active_integral(a0: f64, delta: f64, zeta: f64, theta: f64) -> f64 {
    if delta == 0.0 {
        return 0.0;
    }
    let integrand = |u: f64| {
        let a = a0 + u;
        if a > 0.0 {
            cdf_of_psi((1.0 - zeta) / (theta * a.sqrt()))
        } else {
            1.0
        }
    };
    const PANELS: usize = 4;
    let h = delta / PANELS as f64;
    let mut acc = CompensatedSum::new();
    for k in 0..PANELS {
        let lo = k as f64 * h;
        let hi = if k + 1 == PANELS { delta } else { lo + h };
        acc.add(gl16().integrate(lo, hi, integrand));
    }
    acc.value()
}

/// `J(equilibrium) - J(spiked)` at `(t, x)`. The gap does not depend on `x`.
pub fn spike_gap(
    params: &MarketParams,
    sol: &BetaSolution,
    t: f64,
    _x: f64,
    xi: f64,
    eps: f64,
    mode: SpikeMode,
) -> Result<f64, SpikeError> {
    check_window(params, t, eps)?;
    let theta = params.theta();
    let (d_mu, d_a) = window_differences(params, sol, t, eps, xi, mode);
    let a0 = sol.tail_integral_from(t) / (theta * theta);
    // The perturbed variance cannot be negative.
    let delta = d_a.max(-a0);
    Ok(-d_mu + 0.5 * theta * active_integral(a0, delta, params.zeta(), theta))
}

/// The same gap as a difference of two closed-form values. Loses relative
/// accuracy once the gap falls below roughly `1e-13`.
pub fn spike_gap_direct(
    params: &MarketParams,
    sol: &BetaSolution,
    t: f64,
    x: f64,
    xi: f64,
    eps: f64,
    mode: SpikeMode,
) -> Result<f64, SpikeError> {
    check_window(params, t, eps)?;
    let base = EquilibriumStrategy::new(sol);
    let spiked = SpikedStrategy { base, start: t, end: t + eps, xi, mode };
    let j0 = value_gaussian(&gaussian_terminal(params, &base, t, x)?);
    let j1 = value_gaussian(&gaussian_terminal(params, &spiked, t, x)?);
    Ok(j0 - j1)
}

/// Default ladder `eps = 2^-k`, `k = 4..=12`.
pub fn default_epsilons() -> Vec<f64> {
    (4..=12).map(|k| 2f64.powi(-k)).collect()
}

/// Gaps along an epsilon ladder.
#[derive(Debug, Clone, PartialEq)]
pub struct SpikeExperiment {
    pub t: f64,
    pub xi: f64,
    pub mode: SpikeMode,
    pub epsilons: Vec<f64>,
    pub gaps: Vec<f64>,
}

pub fn run_experiment(
    params: &MarketParams,
    sol: &BetaSolution,
    t: f64,
    x: f64,
    xi: f64,
    epsilons: &[f64],
    mode: SpikeMode,
) -> Result<SpikeExperiment, SpikeError> {
    let gaps = epsilons
        .iter()
        .map(|&e| spike_gap(params, sol, t, x, xi, e, mode))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SpikeExperiment { t, xi, mode, epsilons: epsilons.to_vec(), gaps })
}

/// Leading-order description `gap ~ coefficient * eps^order`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeadingOrderFit {
    /// Limit of `gap / eps^order` as `eps -> 0`.
    pub coefficient: f64,
    /// Slope of `ln |gap|` against `ln eps`.
    pub empirical_order: f64,
    pub r_squared: f64,
}

/// Fits the empirical order by log-log regression and extrapolates
/// `gap / eps^order` to `eps = 0` with a quadratic through the three
/// smallest epsilons.
pub fn fit_leading_order(exp: &SpikeExperiment, order: u32) -> Result<LeadingOrderFit, SpikeError> {
    let n = exp.epsilons.len();
    if n < 4 || exp.gaps.len() != n {
        return Err(SpikeError::InsufficientLadder(format!("need at least 4 points, got {n}")));
    }
    let mut pts: Vec<(f64, f64)> = exp.epsilons.iter().copied().zip(exp.gaps.iter().copied()).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    if pts.iter().any(|p| !(p.0 > 0.0)) {
        return Err(SpikeError::InsufficientLadder("epsilons must be positive".into()));
    }
    if pts[n - 1].0 / pts[0].0 < 100.0 {
        return Err(SpikeError::InsufficientLadder("epsilons must span two decades".into()));
    }
    let sign = pts[0].1.signum();
    if pts.iter().any(|p| p.1 == 0.0 || !p.1.is_finite() || p.1.signum() != sign) {
        return Err(SpikeError::IllConditionedFit { r_squared: f64::NAN });
    }
    let lx: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = pts.iter().map(|p| p.1.abs().ln()).collect();
    let nf = n as f64;
    let mx = lx.iter().sum::<f64>() / nf;
    let my = ly.iter().sum::<f64>() / nf;
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ly.iter().map(|y| (y - my) * (y - my)).sum();
    let slope = sxy / sxx;
    let r_squared = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    if !(r_squared >= 0.999) {
        return Err(SpikeError::IllConditionedFit { r_squared });
    }
    let xs: Vec<f64> = pts[..3].iter().map(|p| p.0).collect();
    let vs: Vec<f64> = pts[..3].iter().map(|p| p.1 / p.0.powi(order as i32)).collect();
    Ok(LeadingOrderFit { coefficient: neville_at_zero(&xs, &vs), empirical_order: slope, r_squared })
}

/// Value at 0 of the interpolating polynomial through `(xs, vs)`.
fn neville_at_zero(xs: &[f64], vs: &[f64]) -> f64 {
    let mut p = vs.to_vec();
    let n = xs.len();
    for m in 1..n {
        for i in 0..n - m {
            p[i] = (xs[i + m] * p[i] - xs[i] * p[i + 1]) / (xs[i + m] - xs[i]);
        }
    }
    p[0]
}

/// Predicted leading behaviour of a gap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeadingOrder {
    pub order: u32,
    pub coefficient: f64,
}

/// Theoretical leading term of `spike_gap` as `eps -> 0`.
///
/// * open loop: `theta/2 xi^2 e^{2 int_t^T r} sigma_t^2 Phi(psi(y_t)) eps`;
/// * closed loop with `xi` different from the equilibrium amount `pi_t`:
///   `theta/2 (xi - pi_t)^2 e^{2 int_t^T r} sigma_t^2 / beta_t eps`;
/// * closed loop with `xi = pi_t`: `vartheta^2 (r^2 beta_t^2 - beta_t'^2) / (6 theta beta_t) eps^3`,
///   available for constant coefficients only.
pub fn theory_leading_order(
    params: &MarketParams,
    sol: &BetaSolution,
    t: f64,
    xi: f64,
    mode: SpikeMode,
) -> Result<Option<LeadingOrder>, SpikeError> {
    params.check_time(t)?;
    let theta = params.theta();
    let g2 = params.growth(t).powi(2);
    let sigma = params.sigma(t);
    let active = cdf_of_psi(sol.y_at(t));
    match mode {
        SpikeMode::OpenLoop => Ok(Some(LeadingOrder {
            order: 1,
            coefficient: 0.5 * theta * xi * xi * g2 * sigma * sigma * active,
        })),
        SpikeMode::ClosedLoop => {
            let pi = onec_strategy(params, sol, t)?;
            if (xi - pi).abs() > 1e-12 * (1.0 + pi.abs()) {
                let d = xi - pi;
                return Ok(Some(LeadingOrder {
                    order: 1,
                    coefficient: 0.5 * theta * d * d * g2 * sigma * sigma * active,
                }));
            }
            if !params.is_constant() {
                return Ok(None);
            }
            let b = sol.beta_at(t);
            let bp = sol.beta_prime(t);
            let r = params.r(t);
            let v = params.vartheta(t);
            Ok(Some(LeadingOrder {
                order: 3,
                coefficient: v * v * (r * b - bp) * (r * b + bp) / (6.0 * theta * b),
            }))
        }
    }
}

/// One `(mode, t, xi)` cell of a strong-equilibrium report.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub mode: SpikeMode,
    pub t: f64,
    pub xi: f64,
    /// `r_t - |beta'_t| / beta_t`.
    pub margin: f64,
    pub epsilons: Vec<f64>,
    pub gaps: Vec<f64>,
    /// Sign predicted by the leading-order term (0 when unknown).
    pub expected_sign: i8,
    /// Sign of the gap at the smallest epsilon.
    pub observed_sign: i8,
    /// Largest epsilon below which every gap has the observed sign.
    pub stable_below: f64,
    pub theory: Option<LeadingOrder>,
    pub fit: Option<LeadingOrderFit>,
}

impl ReportRow {
    pub fn consistent(&self) -> bool {
        self.expected_sign == 0 || self.expected_sign == self.observed_sign
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrongEquilibriumReport {
    pub rows: Vec<ReportRow>,
    /// Every sampled margin is positive.
    pub margin_positive: bool,
}

impl StrongEquilibriumReport {
    /// All open-loop gaps with `xi != 0` are positive at the smallest epsilon.
    pub fn open_loop_positive(&self) -> bool {
        self.rows
            .iter()
            .filter(|r| r.mode == SpikeMode::OpenLoop && r.xi != 0.0)
            .all(|r| r.observed_sign > 0)
    }

    pub fn all_consistent(&self) -> bool {
        self.rows.iter().all(ReportRow::consistent)
    }
}

fn sign_of(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

/// Evaluates both spike modes on a `(t, xi)` sample. Closed-loop rows always
/// include the equilibrium amount at `t` as one of the spike values.
pub fn strong_equilibrium_report(
    params: &MarketParams,
    sol: &BetaSolution,
    t_samples: &[f64],
    xi_samples: &[f64],
    epsilons: &[f64],
) -> Result<StrongEquilibriumReport, SpikeError> {
    let mut rows = Vec::new();
    let mut margin_positive = true;
    for &t in t_samples {
        params.check_time(t)?;
        let margin = params.r(t) - sol.beta_prime(t).abs() / sol.beta_at(t);
        margin_positive &= margin > 0.0;
        let eps: Vec<f64> = epsilons.iter().copied().filter(|&e| t + e <= params.horizon()).collect();
        if eps.is_empty() {
            continue;
        }
        let pi = onec_strategy(params, sol, t)?;
        let mut cells: Vec<(SpikeMode, f64)> = xi_samples
            .iter()
            .filter(|&&xi| xi != 0.0)
            .map(|&xi| (SpikeMode::OpenLoop, xi))
            .collect();
        cells.push((SpikeMode::ClosedLoop, pi));
        cells.extend(xi_samples.iter().map(|&xi| (SpikeMode::ClosedLoop, xi)));
        for (mode, xi) in cells {
            let exp = run_experiment(params, sol, t, 0.0, xi, &eps, mode)?;
            let theory = theory_leading_order(params, sol, t, xi, mode)?;
            let expected_sign = theory.map_or(0, |lo| sign_of(lo.coefficient));
            let mut order: Vec<usize> = (0..eps.len()).collect();
            order.sort_by(|&a, &b| eps[a].total_cmp(&eps[b]));
            let observed_sign = sign_of(exp.gaps[order[0]]);
            let mut stable_below = eps[order[0]];
            for &k in &order {
                if sign_of(exp.gaps[k]) != observed_sign {
                    break;
                }
                stable_below = eps[k];
            }
            let fit = theory.and_then(|lo| fit_leading_order(&exp, lo.order).ok());
            rows.push(ReportRow {
                mode,
                t,
                xi,
                margin,
                epsilons: exp.epsilons,
                gaps: exp.gaps,
                expected_sign,
                observed_sign,
                stable_below,
                theory,
                fit,
            });
        }
    }
    Ok(StrongEquilibriumReport { rows, margin_positive })
}
