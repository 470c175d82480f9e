//! Picard solver for the equilibrium scaling function `beta`.
//!
//! `beta` solves `1 = beta_t Phi(psi(y_t))` with
//! `y_t = (1 - zeta) / sqrt(int_t^T (beta_s vartheta_s)^2 ds)`, `beta_T = 1`.
//! Between grid nodes `beta` is represented by the cubic Hermite interpolant of
//! the nodal values and the closed-form nodal derivatives, so tail integrals
//! are exact up to the fixed-point error.

use crate::market::{Curve, MarketError, MarketParams, TimeGrid};
use crate::quadrature::gl8;
use crate::special::{mean_excess, phi, psi_unchecked, Phi};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BetaError {
    #[error("fixed point not reached after {iterations} iterations (residual {residual:e}, step {step:e})")]
    NonConvergence { iterations: usize, residual: f64, step: f64 },
    #[error("vartheta vanishes identically on [{t}, T]")]
    DegenerateMarket { t: f64 },
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Market(#[from] MarketError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Bound on the fixed-point residual; successive iterates must also agree
    /// to `tol / 10` in relative sup-norm.
    pub tol: f64,
    pub max_iter: usize,
    /// Accept markets with `vartheta = 0` on a final interval, setting
    /// `beta = 1` there. Otherwise such markets are rejected.
    pub allow_degenerate: bool,
    /// Keep every Picard iterate's nodal values.
    pub record_history: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 200, allow_degenerate: true, record_history: false }
    }
}

impl SolverConfig {
    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }
}

/// Converged `beta` on a grid together with its diagnostics.
#[derive(Debug, Clone)]
pub struct BetaSolution {
    grid: TimeGrid,
    beta: Vec<f64>,
    excess: Vec<f64>,
    beta_prime: Vec<f64>,
    beta_prime_left: Vec<f64>,
    y: Vec<f64>,
    residual: Vec<f64>,
    tail_integral: Vec<f64>,
    iterations: usize,
    degenerate_nodes: usize,
    history: Option<Vec<Vec<f64>>>,
    vartheta: Curve,
    zeta: f64,
}

/// Solves with the default grid spacing of 0.01 years (at least 100 intervals).
pub fn solve_beta_default(params: &MarketParams) -> Result<BetaSolution, BetaError> {
    let n = ((params.horizon() / 0.01).round() as usize).max(100);
    let grid = TimeGrid::uniform(params.horizon(), n)?;
    solve_beta(params, &grid, &SolverConfig::default())
}

/// Runs the Picard iteration `beta^(n+1) = 1 / Phi(psi(y^(n)))` from `beta^(0) = 1`.
///
/// The grid is refined with the breakpoints of `vartheta` so that derivative
/// jumps fall on nodes.
pub fn solve_beta(
    params: &MarketParams,
    grid: &TimeGrid,
    cfg: &SolverConfig,
) -> Result<BetaSolution, BetaError> {
    if !(cfg.tol > 0.0) {
        return Err(BetaError::InvalidConfig(format!("tol must be positive, got {}", cfg.tol)));
    }
    if cfg.max_iter == 0 {
        return Err(BetaError::InvalidConfig("max_iter must be at least 1".into()));
    }
    if (grid.horizon() - params.horizon()).abs() > 1e-12 * params.horizon() {
        return Err(BetaError::InvalidConfig(format!(
            "grid ends at {} but T = {}",
            grid.horizon(),
            params.horizon()
        )));
    }
    let grid = grid.refined_with(params.vartheta_curve().breakpoints());
    let nodes = grid.nodes();
    let n = nodes.len();
    let vartheta = params.vartheta_curve();
    let zeta = params.zeta();

    let theta_r: Vec<f64> = nodes.iter().map(|&t| vartheta.value(t)).collect();
    let theta_l: Vec<f64> = nodes.iter().map(|&t| vartheta.value_left(t)).collect();

    let mut state = Iterate { beta: vec![1.0; n], dr: vec![0.0; n], dl: vec![0.0; n] };
    let mut history = cfg.record_history.then(|| vec![state.beta.clone()]);
    let mut last = (f64::INFINITY, f64::INFINITY);

    for iteration in 1..=cfg.max_iter {
        let tails = tail_integrals(nodes, &state, vartheta);
        let update = picard_update(nodes, &state, &tails, &theta_r, &theta_l, zeta);
        if let Some(t) = update.first_degenerate {
            if !cfg.allow_degenerate {
                return Err(BetaError::DegenerateMarket { t });
            }
        }
        let mut residual: f64 = 0.0;
        let mut step: f64 = 0.0;
        for i in 0..n {
            residual = residual.max((1.0 - state.beta[i] / update.next.beta[i]).abs());
            step = step.max((update.next.beta[i] - state.beta[i]).abs() / update.next.beta[i]);
        }
        state = update.next;
        if let Some(h) = history.as_mut() {
            h.push(state.beta.clone());
        }
        last = (residual, step);
        if residual <= cfg.tol && step <= cfg.tol / 10.0 {
            let sol = finalize(grid.clone(), state, vartheta, &theta_r, &theta_l, zeta, iteration, history);
            let worst = sol.max_residual();
            if worst <= cfg.tol {
                if sol.degenerate_nodes > 0 {
                    log::warn!(
                        "vartheta vanishes on a final interval; beta set to 1 on {} nodes",
                        sol.degenerate_nodes
                    );
                }
                return Ok(sol);
            }
            return Err(BetaError::NonConvergence { iterations: iteration, residual: worst, step });
        }
    }
    Err(BetaError::NonConvergence { iterations: cfg.max_iter, residual: last.0, step: last.1 })
}

#[derive(Debug, Clone)]
struct Iterate {
    beta: Vec<f64>,
    /// Right derivative at each node.
    dr: Vec<f64>,
    /// Left derivative at each node.
    dl: Vec<f64>,
}

struct Update {
    next: Iterate,
    first_degenerate: Option<f64>,
}

/// Hermite basis evaluation of `beta` on `[t0, t1]`.
#[inline]
fn hermite(t0: f64, t1: f64, b0: f64, b1: f64, d0: f64, d1: f64, t: f64) -> f64 {
    let h = t1 - t0;
    let s = (t - t0) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    h00 * b0 + h10 * h * d0 + h01 * b1 + h11 * h * d1
}

/// `int_a^b (beta vartheta)^2` on part of segment `i`, split at vartheta knots.
fn segment_integral(
    nodes: &[f64],
    state: &Iterate,
    vartheta: &Curve,
    i: usize,
    a: f64,
    b: f64,
) -> f64 {
    let (t0, t1) = (nodes[i], nodes[i + 1]);
    let (b0, b1, d0, d1) = (state.beta[i], state.beta[i + 1], state.dr[i], state.dl[i + 1]);
    let integrand = |s: f64| {
        let v = hermite(t0, t1, b0, b1, d0, d1, s) * vartheta.value(s);
        v * v
    };
    let mut lo = a;
    let mut acc = 0.0;
    for &k in vartheta.breakpoints().iter().filter(|&&k| k > a && k < b) {
        acc += gl8().integrate(lo, k, integrand);
        lo = k;
    }
    acc + gl8().integrate(lo, b, integrand)
}

fn tail_integrals(nodes: &[f64], state: &Iterate, vartheta: &Curve) -> Vec<f64> {
    let n = nodes.len();
    let mut tails = vec![0.0; n];
    for i in (0..n - 1).rev() {
        tails[i] = tails[i + 1] + segment_integral(nodes, state, vartheta, i, nodes[i], nodes[i + 1]);
    }
    tails
}

/// One Picard step. Derivatives follow from differentiating
/// `1 / Phi(psi(y_t))` with `y_t` built from the previous iterate.
fn picard_update(
    nodes: &[f64],
    prev: &Iterate,
    tails: &[f64],
    theta_r: &[f64],
    theta_l: &[f64],
    zeta: f64,
) -> Update {
    let n = nodes.len();
    let one_minus = 1.0 - zeta;
    let mut next = Iterate { beta: vec![1.0; n], dr: vec![0.0; n], dl: vec![0.0; n] };
    let mut first_degenerate = None;
    for i in (0..n - 1).rev() {
        let a = tails[i];
        if !(a > 0.0) {
            first_degenerate = Some(nodes[i]);
            continue;
        }
        let yi = one_minus / a.sqrt();
        let q = psi_unchecked(yi);
        let p = Phi(q);
        let b = 1.0 / p;
        next.beta[i] = b;
        let dens = phi(q);
        if dens > 0.0 {
            let common = -b * b * b * dens * prev.beta[i] * prev.beta[i] * yi * yi * yi
                / (2.0 * one_minus * one_minus);
            next.dr[i] = common * theta_r[i] * theta_r[i];
            next.dl[i] = common * theta_l[i] * theta_l[i];
        }
    }
    Update { next, first_degenerate }
}

#[allow(clippy::too_many_arguments)]
fn finalize(
    grid: TimeGrid,
    state: Iterate,
    vartheta: &Curve,
    theta_r: &[f64],
    theta_l: &[f64],
    zeta: f64,
    iterations: usize,
    history: Option<Vec<Vec<f64>>>,
) -> BetaSolution {
    let nodes = grid.nodes();
    let n = nodes.len();
    let one_minus = 1.0 - zeta;
    // Replace the iterate's derivatives by the fixed-point formula
    // beta' = -beta^5 vartheta^2 y^3 phi(psi(y)) / (2 (1 - zeta)^2).
    let slopes = |st: &Iterate, y: &[f64]| -> (Vec<f64>, Vec<f64>) {
        let mut dr = vec![0.0; n];
        let mut dl = vec![0.0; n];
        for i in 0..n - 1 {
            if !y[i].is_finite() {
                continue;
            }
            let dens = phi(psi_unchecked(y[i]));
            if dens > 0.0 {
                let b = st.beta[i];
                let common = -b.powi(5) * y[i].powi(3) * dens / (2.0 * one_minus * one_minus);
                dr[i] = common * theta_r[i] * theta_r[i];
                dl[i] = common * theta_l[i] * theta_l[i];
            }
        }
        (dr, dl)
    };
    let y_of = |tails: &[f64]| -> Vec<f64> {
        tails
            .iter()
            .map(|&a| if a > 0.0 { one_minus / a.sqrt() } else { f64::INFINITY })
            .collect()
    };

    let mut st = state;
    let y0 = y_of(&tail_integrals(nodes, &st, vartheta));
    let (dr, dl) = slopes(&st, &y0);
    st.dr = dr;
    st.dl = dl;
    let tails = tail_integrals(nodes, &st, vartheta);
    let y = y_of(&tails);
    let mut residual = vec![0.0; n];
    let mut excess = vec![0.0; n];
    let mut degenerate_nodes = 0;
    for i in 0..n - 1 {
        if y[i].is_finite() {
            let q = psi_unchecked(y[i]);
            residual[i] = (1.0 - st.beta[i] * Phi(q)).abs();
            excess[i] = Phi(-q) / Phi(q);
        } else {
            degenerate_nodes += 1;
        }
    }
    BetaSolution {
        grid,
        beta: st.beta,
        excess,
        beta_prime: st.dr,
        beta_prime_left: st.dl,
        y,
        residual,
        tail_integral: tails,
        iterations,
        degenerate_nodes,
        history,
        vartheta: vartheta.clone(),
        zeta,
    }
}

impl BetaSolution {
    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn times(&self) -> &[f64] {
        self.grid.nodes()
    }

    /// Nodal values of `beta`.
    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    /// Nodal `beta - 1`, computed as `Phi(-psi(y)) / Phi(psi(y))` so that it
    /// keeps full relative precision where `beta` rounds to 1.
    pub fn beta_excess(&self) -> &[f64] {
        &self.excess
    }

    /// Nodal right derivatives of `beta`.
    pub fn beta_prime_nodes(&self) -> &[f64] {
        &self.beta_prime
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn residual(&self) -> &[f64] {
        &self.residual
    }

    pub fn max_residual(&self) -> f64 {
        self.residual.iter().copied().fold(0.0, f64::max)
    }

    /// Nodal `int_{t_i}^T (beta vartheta)^2 ds`.
    pub fn tail_integral(&self) -> &[f64] {
        &self.tail_integral
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// Number of nodes before `T` at which `vartheta` vanishes on the rest of
    /// the horizon and `beta` was set to 1.
    pub fn degenerate_nodes(&self) -> usize {
        self.degenerate_nodes
    }

    /// Nodal values of every Picard iterate, when recorded.
    pub fn history(&self) -> Option<&[Vec<f64>]> {
        self.history.as_deref()
    }

    pub fn zeta(&self) -> f64 {
        self.zeta
    }

    fn clamp_time(&self, t: f64) -> f64 {
        t.clamp(0.0, self.grid.horizon())
    }

    /// `beta` at an arbitrary time, by Hermite interpolation.
    pub fn beta_at(&self, t: f64) -> f64 {
        let t = self.clamp_time(t);
        let nodes = self.grid.nodes();
        let i = self.grid.interval(t);
        hermite(
            nodes[i],
            nodes[i + 1],
            self.beta[i],
            self.beta[i + 1],
            self.beta_prime[i],
            self.beta_prime_left[i + 1],
            t,
        )
    }

    /// `int_t^T (beta vartheta)^2 ds` at an arbitrary time.
    pub fn tail_integral_from(&self, t: f64) -> f64 {
        let t = self.clamp_time(t);
        let nodes = self.grid.nodes();
        let i = self.grid.interval(t);
        if t == nodes[i] {
            return self.tail_integral[i];
        }
        let st = self.as_iterate();
        self.tail_integral[i + 1] + segment_integral(nodes, &st, &self.vartheta, i, t, nodes[i + 1])
    }

    fn as_iterate(&self) -> Iterate {
        Iterate {
            beta: self.beta.clone(),
            dr: self.beta_prime.clone(),
            dl: self.beta_prime_left.clone(),
        }
    }

    /// `int_a^b (beta vartheta)^2 ds` for `0 <= a <= b <= T`.
    pub fn squared_integral(&self, a: f64, b: f64) -> f64 {
        self.tail_integral_from(a) - self.tail_integral_from(b)
    }

    /// `y_t` at an arbitrary time; `+inf` where the tail integral vanishes.
    pub fn y_at(&self, t: f64) -> f64 {
        let a = self.tail_integral_from(t);
        if a > 0.0 {
            (1.0 - self.zeta) / a.sqrt()
        } else {
            f64::INFINITY
        }
    }

    /// Right derivative `beta'_t = -beta^5 vartheta^2 y^3 phi(psi(y)) / (2 (1 - zeta)^2)`.
    pub fn beta_prime(&self, t: f64) -> f64 {
        let t = self.clamp_time(t);
        if t >= self.grid.horizon() {
            return 0.0;
        }
        let y = self.y_at(t);
        if !y.is_finite() {
            return 0.0;
        }
        let dens = phi(psi_unchecked(y));
        if dens == 0.0 {
            return 0.0;
        }
        let b = self.beta_at(t);
        let v = self.vartheta.value(t);
        let om = 1.0 - self.zeta;
        -b.powi(5) * v * v * y.powi(3) * dens / (2.0 * om * om)
    }
}

/// Per-node `r_t - |beta'_t| / beta_t`; positive everywhere is the sufficient
/// condition for the closed-loop equilibrium to be strong.
#[derive(Debug, Clone)]
pub struct MarginCurve {
    pub t: Vec<f64>,
    pub margin: Vec<f64>,
}

impl MarginCurve {
    pub fn verdict(&self) -> bool {
        self.margin.iter().all(|&m| m > 0.0)
    }

    pub fn min(&self) -> f64 {
        self.margin.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

pub fn strong_equilibrium_margin(sol: &BetaSolution, params: &MarketParams) -> MarginCurve {
    let t = sol.times().to_vec();
    let margin = t
        .iter()
        .zip(sol.beta.iter().zip(&sol.beta_prime))
        .map(|(&s, (&b, &d))| params.r(s) - d.abs() / b)
        .collect();
    MarginCurve { t, margin }
}

/// Lower bound `m_t <= 1 / beta_t` from the a-priori estimate of the Picard
/// scheme, returned as the normal quantile `q_t` with `m_t = Phi(q_t)`.
///
/// `q_t` solves `f(q) / Phi(q) = Theta_t` with
/// `Theta_t = (1 - zeta) / sqrt(int_t^T vartheta^2)`.
pub fn lower_bound_quantile(params: &MarketParams, t: f64) -> Result<f64, MarketError> {
    params.check_time(t)?;
    let a = params.vartheta_sq_integral(t, params.horizon());
    if !(a > 0.0) {
        return Ok(f64::INFINITY);
    }
    let big_theta = (1.0 - params.zeta()) / a.sqrt();
    // f(q)/Phi(q) is increasing, below 1/|q| for q < 0 and above q for q > 0.
    let ratio = |q: f64| if q < 0.0 { mean_excess(-q) } else { crate::special::f_int_cdf(q) / Phi(q) };
    let mut lo = -(1.0 / big_theta + 1.0);
    let mut hi = big_theta + 1.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ratio(mid) < big_theta {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 2.0 * f64::EPSILON * mid.abs().max(1.0) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `m_t = Phi(q_t)`; see [`lower_bound_quantile`].
pub fn picard_lower_bound(params: &MarketParams, t: f64) -> Result<f64, MarketError> {
    Ok(Phi(lower_bound_quantile(params, t)?).min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn market(zeta: f64) -> MarketParams {
        MarketParams::constant(0.012, 0.158, 0.343, 5.0, zeta, 25.0).unwrap()
    }

    #[test]
    fn hermite_reproduces_cubics() {
        let p = |t: f64| 1.0 + 0.5 * t - 0.25 * t * t + 0.125 * t * t * t;
        let dp = |t: f64| 0.5 - 0.5 * t + 0.375 * t * t;
        let (a, b) = (0.3, 1.1);
        for s in [0.3, 0.5, 0.77, 1.1] {
            let v = hermite(a, b, p(a), p(b), dp(a), dp(b), s);
            assert!((v - p(s)).abs() < 1e-15);
        }
    }

    #[test]
    fn terminal_node_and_shape() {
        let sol = solve_beta(&market(0.3), &TimeGrid::uniform(25.0, 500).unwrap(), &SolverConfig::default())
            .unwrap();
        let n = sol.beta().len();
        assert_eq!(sol.beta()[n - 1], 1.0);
        assert_eq!(sol.beta_prime_nodes()[n - 1], 0.0);
        assert_eq!(sol.beta_prime(25.0), 0.0);
        assert!(sol.beta()[0] > 1.0);
        assert!(sol.max_residual() <= 1e-10);
        assert!(sol.beta_prime_nodes().iter().all(|&d| d <= 0.0));
    }

    #[test]
    fn degenerate_tail_is_flagged() {
        let vt = Curve::piecewise_constant(vec![5.0], vec![0.3, 0.0]).unwrap();
        let p = MarketParams::new(Curve::constant(0.012), Curve::constant(0.158), vt, 5.0, 0.2, 10.0)
            .unwrap();
        let grid = TimeGrid::uniform(10.0, 100).unwrap();
        let sol = solve_beta(&p, &grid, &SolverConfig::default()).unwrap();
        assert!(sol.degenerate_nodes() > 0);
        assert_eq!(sol.beta_at(7.0), 1.0);
        assert!(sol.beta_at(1.0) > 1.0);
        let strict = SolverConfig { allow_degenerate: false, ..SolverConfig::default() };
        assert!(matches!(solve_beta(&p, &grid, &strict), Err(BetaError::DegenerateMarket { .. })));
    }

    #[test]
    fn rejects_bad_config() {
        let grid = TimeGrid::uniform(25.0, 100).unwrap();
        let cfg = SolverConfig { tol: 0.0, ..SolverConfig::default() };
        assert!(solve_beta(&market(0.0), &grid, &cfg).is_err());
        let short = TimeGrid::uniform(20.0, 100).unwrap();
        assert!(solve_beta(&market(0.0), &short, &SolverConfig::default()).is_err());
        let stingy = SolverConfig { tol: 1e-30, max_iter: 1, ..SolverConfig::default() };
        assert!(matches!(
            solve_beta(&market(0.0), &grid, &stingy),
            Err(BetaError::NonConvergence { .. })
        ));
    }

    #[test]
    fn lower_bound_is_a_probability() {
        let p = market(0.5);
        let m = picard_lower_bound(&p, 0.0).unwrap();
        assert!(m > 0.0 && m < 1.0);
        assert_eq!(picard_lower_bound(&p, 25.0).unwrap(), 1.0);
    }
}
