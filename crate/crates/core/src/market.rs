//! Deterministic market coefficients, preference parameters and time grids.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MarketError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("time {t} outside [0, {horizon}]")]
    TimeOutOfRange { t: f64, horizon: f64 },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
}

/// A deterministic coefficient curve on `[0, T]`.
///
/// `Pwc` has interior `breakpoints` and `values.len() == breakpoints.len() + 1`;
/// it is right-continuous. `Pwl` interpolates `(breakpoints[i], values[i])`
/// linearly and is held flat outside the first and last knot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Curve {
    Constant { value: f64 },
    Pwc { breakpoints: Vec<f64>, values: Vec<f64> },
    Pwl { breakpoints: Vec<f64>, values: Vec<f64> },
}

impl Curve {
    pub fn constant(value: f64) -> Self {
        Curve::Constant { value }
    }

    pub fn piecewise_constant(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self, MarketError> {
        let c = Curve::Pwc { breakpoints, values };
        c.validate_shape()?;
        Ok(c)
    }

    pub fn piecewise_linear(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self, MarketError> {
        let c = Curve::Pwl { breakpoints, values };
        c.validate_shape()?;
        Ok(c)
    }

    fn validate_shape(&self) -> Result<(), MarketError> {
        let (bps, vals, want) = match self {
            Curve::Constant { value } => {
                return if value.is_finite() {
                    Ok(())
                } else {
                    Err(MarketError::InvalidParameter(format!("non-finite value {value}")))
                };
            }
            Curve::Pwc { breakpoints, values } => (breakpoints, values, breakpoints.len() + 1),
            Curve::Pwl { breakpoints, values } => {
                if breakpoints.is_empty() {
                    return Err(MarketError::InvalidParameter(
                        "piecewise-linear curve needs at least one knot".into(),
                    ));
                }
                (breakpoints, values, breakpoints.len())
            }
        };
        if vals.len() != want {
            return Err(MarketError::InvalidParameter(format!(
                "expected {want} values for {} breakpoints, got {}",
                bps.len(),
                vals.len()
            )));
        }
        if bps.iter().chain(vals.iter()).any(|v| !v.is_finite()) {
            return Err(MarketError::InvalidParameter("non-finite curve entry".into()));
        }
        if bps.windows(2).any(|w| w[0] >= w[1]) {
            return Err(MarketError::InvalidParameter(
                "breakpoints must be strictly increasing".into(),
            ));
        }
        Ok(())
    }

    /// Value at `t` (right limit at a piecewise-constant jump).
    pub fn value(&self, t: f64) -> f64 {
        match self {
            Curve::Constant { value } => *value,
            Curve::Pwc { breakpoints, values } => {
                values[breakpoints.partition_point(|&b| b <= t)]
            }
            Curve::Pwl { breakpoints, values } => pwl_eval(breakpoints, values, t),
        }
    }

    /// Left limit at `t`.
    pub fn value_left(&self, t: f64) -> f64 {
        match self {
            Curve::Pwc { breakpoints, values } => values[breakpoints.partition_point(|&b| b < t)],
            _ => self.value(t),
        }
    }

    /// Points where the curve or its derivative may jump.
    pub fn breakpoints(&self) -> &[f64] {
        match self {
            Curve::Constant { .. } => &[],
            Curve::Pwc { breakpoints, .. } | Curve::Pwl { breakpoints, .. } => breakpoints,
        }
    }

    pub fn is_constant(&self) -> bool {
        match self {
            Curve::Constant { .. } => true,
            Curve::Pwc { values, .. } | Curve::Pwl { values, .. } => {
                values.iter().all(|v| *v == values[0])
            }
        }
    }

    /// Infimum over `[a, b]`. Piecewise-linear curves attain it at a knot or an end.
    pub fn min_on(&self, a: f64, b: f64) -> f64 {
        self.pieces(a, b)
            .map(|(l, r)| {
                let (vl, vr) = self.piece_ends(l, r);
                vl.min(vr)
            })
            .fold(self.value(a), f64::min)
    }

    fn piece_ends(&self, l: f64, r: f64) -> (f64, f64) {
        match self {
            Curve::Constant { value } => (*value, *value),
            Curve::Pwc { .. } => {
                let m = self.value(0.5 * (l + r));
                (m, m)
            }
            Curve::Pwl { .. } => (self.value(l), self.value(r)),
        }
    }

    /// Subintervals of `[a, b]` on which the curve is affine.
    fn pieces(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let inner = self.breakpoints().iter().copied().filter(move |&x| x > a && x < b);
        let cuts: Vec<f64> = std::iter::once(a).chain(inner).chain(std::iter::once(b)).collect();
        (0..cuts.len().saturating_sub(1)).map(move |i| (cuts[i], cuts[i + 1]))
    }

    /// Exact `int_a^b c(s) ds`; negative when `b < a`.
    pub fn integrate(&self, a: f64, b: f64) -> f64 {
        if b < a {
            return -self.integrate(b, a);
        }
        crate::quadrature::sum(self.pieces(a, b).map(|(l, r)| {
            let (vl, vr) = self.piece_ends(l, r);
            (r - l) * 0.5 * (vl + vr)
        }))
    }

    /// Exact `int_a^b c(s)^2 ds`.
    pub fn integrate_squared(&self, a: f64, b: f64) -> f64 {
        if b < a {
            return -self.integrate_squared(b, a);
        }
        crate::quadrature::sum(self.pieces(a, b).map(|(l, r)| {
            let (vl, vr) = self.piece_ends(l, r);
            (r - l) * (vl * vl + vl * vr + vr * vr) / 3.0
        }))
    }
}

fn pwl_eval(bps: &[f64], vals: &[f64], t: f64) -> f64 {
    let n = bps.len();
    if t <= bps[0] {
        return vals[0];
    }
    if t >= bps[n - 1] {
        return vals[n - 1];
    }
    let k = bps.partition_point(|&b| b <= t);
    let (x0, x1) = (bps[k - 1], bps[k]);
    let w = (t - x0) / (x1 - x0);
    vals[k - 1] + w * (vals[k] - vals[k - 1])
}

/// Market coefficients and SMMV preference parameters.
///
/// `theta` is the risk-aversion parameter and `zeta` the monotonicity floor of
/// the pricing density, `0 <= zeta < 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMarketParams", into = "RawMarketParams")]
pub struct MarketParams {
    r: Curve,
    sigma: Curve,
    vartheta: Curve,
    theta: f64,
    zeta: f64,
    horizon: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMarketParams {
    r: Curve,
    sigma: Curve,
    vartheta: Curve,
    theta: f64,
    zeta: f64,
    #[serde(rename = "T")]
    horizon: f64,
}

impl TryFrom<RawMarketParams> for MarketParams {
    type Error = MarketError;

    fn try_from(raw: RawMarketParams) -> Result<Self, Self::Error> {
        MarketParams::new(raw.r, raw.sigma, raw.vartheta, raw.theta, raw.zeta, raw.horizon)
    }
}

impl From<MarketParams> for RawMarketParams {
    fn from(p: MarketParams) -> Self {
        RawMarketParams {
            r: p.r,
            sigma: p.sigma,
            vartheta: p.vartheta,
            theta: p.theta,
            zeta: p.zeta,
            horizon: p.horizon,
        }
    }
}

impl MarketParams {
    pub fn new(
        r: Curve,
        sigma: Curve,
        vartheta: Curve,
        theta: f64,
        zeta: f64,
        horizon: f64,
    ) -> Result<Self, MarketError> {
        let p = MarketParams { r, sigma, vartheta, theta, zeta, horizon };
        p.validate()?;
        Ok(p)
    }

    /// Constant coefficients.
    pub fn constant(
        r: f64,
        sigma: f64,
        vartheta: f64,
        theta: f64,
        zeta: f64,
        horizon: f64,
    ) -> Result<Self, MarketError> {
        Self::new(
            Curve::constant(r),
            Curve::constant(sigma),
            Curve::constant(vartheta),
            theta,
            zeta,
            horizon,
        )
    }

    fn validate(&self) -> Result<(), MarketError> {
        let bad = |m: String| Err(MarketError::InvalidParameter(m));
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return bad(format!("horizon T must be positive and finite, got {}", self.horizon));
        }
        if !(self.theta > 0.0 && self.theta.is_finite()) {
            return bad(format!("theta must be positive and finite, got {}", self.theta));
        }
        if !(0.0..1.0).contains(&self.zeta) {
            return bad(format!("zeta must lie in [0, 1), got {}", self.zeta));
        }
        for (name, c) in [("r", &self.r), ("sigma", &self.sigma), ("vartheta", &self.vartheta)] {
            c.validate_shape().map_err(|e| MarketError::InvalidParameter(format!("{name}: {e}")))?;
        }
        let t = self.horizon;
        if !(self.sigma.min_on(0.0, t) > 0.0) {
            return bad("sigma must be strictly positive on [0, T]".into());
        }
        if self.vartheta.min_on(0.0, t) < 0.0 {
            return bad("vartheta must be non-negative on [0, T]".into());
        }
        Ok(())
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }
    pub fn theta(&self) -> f64 {
        self.theta
    }
    pub fn zeta(&self) -> f64 {
        self.zeta
    }
    pub fn r_curve(&self) -> &Curve {
        &self.r
    }
    pub fn sigma_curve(&self) -> &Curve {
        &self.sigma
    }
    pub fn vartheta_curve(&self) -> &Curve {
        &self.vartheta
    }

    pub fn with_zeta(&self, zeta: f64) -> Result<Self, MarketError> {
        let mut p = self.clone();
        p.zeta = zeta;
        p.validate()?;
        Ok(p)
    }

    pub fn with_theta(&self, theta: f64) -> Result<Self, MarketError> {
        let mut p = self.clone();
        p.theta = theta;
        p.validate()?;
        Ok(p)
    }

    pub fn with_vartheta(&self, vartheta: Curve) -> Result<Self, MarketError> {
        let mut p = self.clone();
        p.vartheta = vartheta;
        p.validate()?;
        Ok(p)
    }

    pub fn with_r(&self, r: Curve) -> Result<Self, MarketError> {
        let mut p = self.clone();
        p.r = r;
        p.validate()?;
        Ok(p)
    }

    pub fn check_time(&self, t: f64) -> Result<(), MarketError> {
        if t >= 0.0 && t <= self.horizon {
            Ok(())
        } else {
            Err(MarketError::TimeOutOfRange { t, horizon: self.horizon })
        }
    }

    pub fn r(&self, t: f64) -> f64 {
        self.r.value(t)
    }
    pub fn sigma(&self, t: f64) -> f64 {
        self.sigma.value(t)
    }
    pub fn vartheta(&self, t: f64) -> f64 {
        self.vartheta.value(t)
    }

    /// `int_a^b r(s) ds`.
    pub fn integral_r(&self, a: f64, b: f64) -> Result<f64, MarketError> {
        self.check_time(a)?;
        self.check_time(b)?;
        Ok(self.r.integrate(a, b))
    }

    /// `exp(-int_t^T r)`.
    pub fn discount(&self, t: f64) -> Result<f64, MarketError> {
        Ok((-self.integral_r(t, self.horizon)?).exp())
    }

    /// `exp(int_t^T r)`, without the range check.
    pub(crate) fn growth(&self, t: f64) -> f64 {
        self.r.integrate(t, self.horizon).exp()
    }

    /// `int_a^b vartheta(s)^2 ds`.
    pub fn vartheta_sq_integral(&self, a: f64, b: f64) -> f64 {
        self.vartheta.integrate_squared(a, b)
    }

    /// Sorted union of all coefficient breakpoints inside `(0, T)`.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut v: Vec<f64> = [&self.r, &self.sigma, &self.vartheta]
            .iter()
            .flat_map(|c| c.breakpoints().iter().copied())
            .filter(|&x| x > 0.0 && x < self.horizon)
            .collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }

    pub fn is_constant(&self) -> bool {
        self.r.is_constant() && self.sigma.is_constant() && self.vartheta.is_constant()
    }
}

/// Increasing sequence of times from `0` to `T`, both included exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    nodes: Vec<f64>,
}

impl TimeGrid {
    pub fn uniform(horizon: f64, n_intervals: usize) -> Result<Self, MarketError> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(MarketError::InvalidGrid(format!("horizon {horizon}")));
        }
        if n_intervals < 2 {
            return Err(MarketError::InvalidGrid("need at least two intervals".into()));
        }
        let h = horizon / n_intervals as f64;
        let mut nodes: Vec<f64> = (0..=n_intervals).map(|i| i as f64 * h).collect();
        nodes[n_intervals] = horizon;
        Ok(Self { nodes })
    }

    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self, MarketError> {
        if nodes.len() < 3 {
            return Err(MarketError::InvalidGrid("need at least three nodes".into()));
        }
        if nodes[0] != 0.0 {
            return Err(MarketError::InvalidGrid("first node must be 0".into()));
        }
        if nodes.iter().any(|v| !v.is_finite()) || nodes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(MarketError::InvalidGrid("nodes must be finite and strictly increasing".into()));
        }
        Ok(Self { nodes })
    }

    /// Adds interior points (e.g. coefficient breakpoints) to the grid.
    pub fn refined_with(&self, extra: &[f64]) -> Self {
        let t = self.horizon();
        let mut nodes: Vec<f64> = self
            .nodes
            .iter()
            .copied()
            .chain(extra.iter().copied().filter(|&x| x > 0.0 && x < t))
            .collect();
        nodes.sort_by(f64::total_cmp);
        nodes.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * t);
        *nodes.last_mut().expect("non-empty grid") = t;
        Self { nodes }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn horizon(&self) -> f64 {
        *self.nodes.last().expect("non-empty grid")
    }

    /// Index `i` of the interval `[t_i, t_{i+1})` containing `t`, clamped to the
    /// last interval at `t = T`.
    pub fn interval(&self, t: f64) -> usize {
        let k = self.nodes.partition_point(|&x| x <= t);
        k.clamp(1, self.nodes.len() - 1) - 1
    }
}
