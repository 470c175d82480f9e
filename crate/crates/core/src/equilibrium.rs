//! Deterministic strategies, the Gaussian terminal law they induce and the
//! closed-form SMMV value of that law.
//!
//! Wealth follows `dX = X r dt + pi sigma (dW + vartheta dt)`. For a
//! deterministic amount `pi` the terminal wealth is normal with
//! `mu = x e^{int_t^T r} + int_t^T L vartheta` and `S^2 = int_t^T L^2`, where
//! `L_s = e^{int_s^T r} pi_s sigma_s` is the loading on the Brownian increment.

use crate::beta::BetaSolution;
use crate::market::{MarketError, MarketParams};
use crate::quadrature::{gl8, CompensatedSum};
use crate::special::{cdf_of_psi, int_psi, psi_unchecked, Phi};

/// A strategy whose amount invested in the risky asset is a deterministic
/// function of time.
pub trait DeterministicStrategy {
    /// Amount `pi_s` held in the risky asset.
    fn amount(&self, params: &MarketParams, s: f64) -> f64;

    /// Loading `L_s = e^{int_s^T r} pi_s sigma_s`.
    fn loading(&self, params: &MarketParams, s: f64) -> f64 {
        params.growth(s) * self.amount(params, s) * params.sigma(s)
    }

    /// Times at which the amount may fail to be smooth.
    fn kinks(&self) -> Vec<f64> {
        Vec::new()
    }
}

/// The equilibrium amount `beta_t vartheta_t / (theta sigma_t) e^{-int_t^T r}`.
#[derive(Debug, Clone, Copy)]
pub struct EquilibriumStrategy<'a> {
    pub sol: &'a BetaSolution,
}

impl<'a> EquilibriumStrategy<'a> {
    pub fn new(sol: &'a BetaSolution) -> Self {
        Self { sol }
    }
}

impl DeterministicStrategy for EquilibriumStrategy<'_> {
    fn amount(&self, params: &MarketParams, s: f64) -> f64 {
        self.loading(params, s) / (params.growth(s) * params.sigma(s))
    }

    fn loading(&self, params: &MarketParams, s: f64) -> f64 {
        self.sol.beta_at(s) * params.vartheta(s) / params.theta()
    }

    fn kinks(&self) -> Vec<f64> {
        self.sol.times().to_vec()
    }
}

/// Time-consistent mean-variance amount `vartheta_t / (theta sigma_t) e^{-int_t^T r}`.
#[derive(Debug, Clone, Copy, Default)]
pub struct MvStrategy;

impl DeterministicStrategy for MvStrategy {
    fn amount(&self, params: &MarketParams, s: f64) -> f64 {
        params.vartheta(s) / (params.theta() * params.sigma(s) * params.growth(s))
    }

    fn loading(&self, params: &MarketParams, s: f64) -> f64 {
        params.vartheta(s) / params.theta()
    }
}

/// Constant amount.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantStrategy(pub f64);

impl DeterministicStrategy for ConstantStrategy {
    fn amount(&self, _params: &MarketParams, _s: f64) -> f64 {
        self.0
    }
}

/// Amount given by a coefficient-style curve.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveStrategy(pub crate::market::Curve);

impl DeterministicStrategy for CurveStrategy {
    fn amount(&self, _params: &MarketParams, s: f64) -> f64 {
        self.0.value(s)
    }

    fn kinks(&self) -> Vec<f64> {
        self.0.breakpoints().to_vec()
    }
}

/// Equilibrium amount at `t`.
pub fn onec_strategy(params: &MarketParams, sol: &BetaSolution, t: f64) -> Result<f64, MarketError> {
    params.check_time(t)?;
    Ok(EquilibriumStrategy::new(sol).amount(params, t))
}

/// Mean-variance amount at `t`, i.e. the equilibrium formula with `beta = 1`.
pub fn mv_strategy(params: &MarketParams, t: f64) -> Result<f64, MarketError> {
    params.check_time(t)?;
    Ok(MvStrategy.amount(params, t))
}

/// Normal terminal law together with the preference parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianTerminal {
    pub mu: f64,
    /// Standard deviation; zero means a point mass.
    pub sd: f64,
    pub zeta: f64,
    pub theta: f64,
}

impl GaussianTerminal {
    /// `y = (1 - zeta) / (theta S)`, infinite for a point mass.
    pub fn scaled_budget(&self) -> f64 {
        if self.sd > 0.0 {
            (1.0 - self.zeta) / (self.theta * self.sd)
        } else {
            f64::INFINITY
        }
    }
}

/// `(int_a^b L vartheta, int_a^b L^2)` for a strategy.
pub fn loading_integrals<S: DeterministicStrategy + ?Sized>(
    params: &MarketParams,
    strategy: &S,
    a: f64,
    b: f64,
) -> (f64, f64) {
    if !(b > a) {
        return (0.0, 0.0);
    }
    let mut cuts: Vec<f64> = params
        .breakpoints()
        .into_iter()
        .chain(strategy.kinks())
        .filter(|&k| k > a && k < b)
        .collect();
    cuts.push(a);
    cuts.push(b);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut drift = CompensatedSum::new();
    let mut var = CompensatedSum::new();
    const MAX_PIECE: f64 = 0.25;
    for w in cuts.windows(2) {
        let (l, r) = (w[0], w[1]);
        let pieces = ((r - l) / MAX_PIECE).ceil().max(1.0) as usize;
        let h = (r - l) / pieces as f64;
        for k in 0..pieces {
            let lo = l + k as f64 * h;
            let hi = if k + 1 == pieces { r } else { lo + h };
            let (d, v) = gl8().integrate_pair(lo, hi, |s| {
                let ld = strategy.loading(params, s);
                (ld * params.vartheta(s), ld * ld)
            });
            drift.add(d);
            var.add(v);
        }
    }
    (drift.value(), var.value().max(0.0))
}

/// Terminal law of wealth started at `(t, x)` under a deterministic strategy.
pub fn gaussian_terminal<S: DeterministicStrategy + ?Sized>(
    params: &MarketParams,
    strategy: &S,
    t: f64,
    x: f64,
) -> Result<GaussianTerminal, MarketError> {
    params.check_time(t)?;
    let (drift, var) = loading_integrals(params, strategy, t, params.horizon());
    Ok(GaussianTerminal {
        mu: x * params.growth(t) + drift,
        sd: var.sqrt(),
        zeta: params.zeta(),
        theta: params.theta(),
    })
}

/// `lambda = zeta/theta + mu + psi((1 - zeta)/(theta S)) S`; `mu + 1/theta` for a point mass.
pub fn lambda_gaussian(gt: &GaussianTerminal) -> f64 {
    if !(gt.sd > 0.0) {
        return gt.mu + 1.0 / gt.theta;
    }
    gt.zeta / gt.theta + gt.mu + psi_unchecked(gt.scaled_budget()) * gt.sd
}

/// SMMV value `mu + theta S^2 int_0^y psi - (1 - zeta)^2 / (2 theta)` of the
/// normal law, in a form free of the large cancelling terms; `mu` for a point mass.
pub fn value_gaussian(gt: &GaussianTerminal) -> f64 {
    if !(gt.sd > 0.0) {
        return gt.mu;
    }
    let om = 1.0 - gt.zeta;
    let q = psi_unchecked(gt.scaled_budget());
    gt.mu + 0.5 * (om * gt.sd * q - gt.theta * gt.sd * gt.sd * Phi(q)) - om * om / (2.0 * gt.theta)
}

/// Value of a deterministic strategy at `(t, x)`.
pub fn strategy_value<S: DeterministicStrategy + ?Sized>(
    params: &MarketParams,
    strategy: &S,
    t: f64,
    x: f64,
) -> Result<f64, MarketError> {
    Ok(value_gaussian(&gaussian_terminal(params, strategy, t, x)?))
}

/// Equilibrium value at `(t, x)`.
pub fn equilibrium_value(
    params: &MarketParams,
    sol: &BetaSolution,
    t: f64,
    x: f64,
) -> Result<f64, MarketError> {
    strategy_value(params, &EquilibriumStrategy::new(sol), t, x)
}

/// Equilibrium value written out term by term:
/// `x e^{int r} - (1-zeta)^2/(2 theta) + (1/theta) int beta vartheta^2
///  + (1/theta) A int_0^{(1-zeta)/sqrt(A)} psi` with `A = int (beta vartheta)^2`.
pub fn equilibrium_value_expanded(
    params: &MarketParams,
    sol: &BetaSolution,
    t: f64,
    x: f64,
) -> Result<f64, MarketError> {
    params.check_time(t)?;
    let theta = params.theta();
    let om = 1.0 - params.zeta();
    let (drift, _) = loading_integrals(params, &EquilibriumStrategy::new(sol), t, params.horizon());
    let a = sol.tail_integral_from(t);
    let base = x * params.growth(t) + drift;
    if !(a > 0.0) {
        return Ok(base);
    }
    let ip = int_psi(om / a.sqrt()).expect("positive argument");
    Ok(base - om * om / (2.0 * theta) + a * ip / theta)
}

/// `Phi(psi(y))`, the probability that the pricing density sits above its floor.
pub fn active_probability(y: f64) -> f64 {
    cdf_of_psi(y)
}
