//! SMMV functional on finite discrete laws of `(X, zeta)`.
//!
//! For a law `p` of wealth `x` and pricing floor `z`, `lambda(p)` solves
//! `E[z + theta (lambda - x - z/theta)^+] = 1` and the preference value is
//! `g(p) = E[grad_g(p, x, z)]` with
//! `grad_g = lambda (1 - z) - theta/2 ((lambda - x - z/theta)^+)^2 + x z + (z^2 - 1)/(2 theta)`.

use crate::quadrature::{sum, CompensatedSum};
use serde::{Deserialize, Serialize};
use std::io::Read;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeasureError {
    #[error("infeasible measure: E[z] = {mean_z} must be below 1")]
    InfeasibleMeasure { mean_z: f64 },
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("theta must be positive and finite, got {0}")]
    InvalidTheta(f64),
    #[error("indicator set {0} has zero mass")]
    EmptyIndicatorSet(&'static str),
    #[error("perturbation has {got} entries for {want} atoms")]
    LengthMismatch { want: usize, got: usize },
    #[error("sample file: {0}")]
    Csv(String),
}

/// One atom `(x, z)` with probability weight `w`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub x: f64,
    pub z: f64,
    pub w: f64,
}

impl Atom {
    pub fn new(x: f64, z: f64, w: f64) -> Self {
        Self { x, z, w }
    }
}

/// Finite probability measure on `(x, z)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    atoms: Vec<Atom>,
}

const WEIGHT_TOL: f64 = 1e-12;

impl DiscreteMeasure {
    /// Validates finiteness, `w > 0`, `z >= 0` and total weight 1.
    pub fn new(atoms: Vec<Atom>) -> Result<Self, MeasureError> {
        if atoms.is_empty() {
            return Err(MeasureError::InvalidMeasure("no atoms".into()));
        }
        for a in &atoms {
            if !(a.x.is_finite() && a.z.is_finite() && a.w.is_finite()) {
                return Err(MeasureError::InvalidMeasure(format!("non-finite atom {a:?}")));
            }
            if !(a.w > 0.0) {
                return Err(MeasureError::InvalidMeasure(format!("non-positive weight {}", a.w)));
            }
            if a.z < 0.0 {
                return Err(MeasureError::InvalidMeasure(format!("negative z {}", a.z)));
            }
        }
        let total = sum(atoms.iter().map(|a| a.w));
        if (total - 1.0).abs() > WEIGHT_TOL {
            return Err(MeasureError::InvalidMeasure(format!("weights sum to {total}, not 1")));
        }
        Ok(Self { atoms })
    }

    /// Builds a measure from positive weights of any total mass.
    pub fn normalized(mut atoms: Vec<Atom>) -> Result<Self, MeasureError> {
        let total = sum(atoms.iter().map(|a| a.w));
        if !(total > 0.0 && total.is_finite()) {
            return Err(MeasureError::InvalidMeasure(format!("total weight {total}")));
        }
        for a in &mut atoms {
            a.w /= total;
        }
        Self::new(atoms)
    }

    /// Empirical law of `xs` with a common floor `z`.
    pub fn uniform(xs: &[f64], z: f64) -> Result<Self, MeasureError> {
        if xs.is_empty() {
            return Err(MeasureError::InvalidMeasure("no atoms".into()));
        }
        let w = 1.0 / xs.len() as f64;
        Self::new(xs.iter().map(|&x| Atom::new(x, z, w)).collect())
    }

    pub fn point_mass(x: f64, z: f64) -> Result<Self, MeasureError> {
        Self::new(vec![Atom::new(x, z, 1.0)])
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn mean_x(&self) -> f64 {
        sum(self.atoms.iter().map(|a| a.w * a.x))
    }

    pub fn mean_z(&self) -> f64 {
        sum(self.atoms.iter().map(|a| a.w * a.z))
    }

    /// `(1 - eps) self + eps other`.
    pub fn mixture(&self, other: &DiscreteMeasure, eps: f64) -> Result<Self, MeasureError> {
        if !(0.0..=1.0).contains(&eps) {
            return Err(MeasureError::InvalidMeasure(format!("mixture weight {eps}")));
        }
        let atoms = self
            .atoms
            .iter()
            .map(|a| Atom { w: (1.0 - eps) * a.w, ..*a })
            .chain(other.atoms.iter().map(|a| Atom { w: eps * a.w, ..*a }))
            .filter(|a| a.w > 0.0)
            .collect();
        Self::normalized(atoms)
    }

    /// Law of `(x + c, z)`.
    pub fn shifted(&self, c: f64) -> Self {
        Self { atoms: self.atoms.iter().map(|a| Atom { x: a.x + c, ..*a }).collect() }
    }

    /// Law of `(x_i + chi_i, z_i)` with the same weights.
    pub fn perturbed(&self, chi: &[f64]) -> Result<Self, MeasureError> {
        if chi.len() != self.atoms.len() {
            return Err(MeasureError::LengthMismatch { want: self.atoms.len(), got: chi.len() });
        }
        Self::new(self.atoms.iter().zip(chi).map(|(a, c)| Atom { x: a.x + c, ..*a }).collect())
    }

    /// Reads a sample file with a header containing `x` and optionally `z`
    /// and `w`. Lines starting with `#` are skipped. Missing `z` defaults to
    /// `default_z`, missing `w` to equal weights.
    pub fn from_csv_reader<R: Read>(reader: R, default_z: f64) -> Result<Self, MeasureError> {
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr.headers().map_err(|e| MeasureError::Csv(e.to_string()))?.clone();
        let col = |name: &str| headers.iter().position(|h| h == name);
        let ix = col("x").ok_or_else(|| MeasureError::Csv("missing column x".into()))?;
        let iz = col("z");
        let iw = col("w");
        if let Some(extra) = headers.iter().find(|h| !matches!(*h, "x" | "z" | "w")) {
            return Err(MeasureError::Csv(format!("unexpected column {extra}")));
        }
        let parse = |rec: &csv::StringRecord, i: usize, line: usize| -> Result<f64, MeasureError> {
            rec.get(i)
                .ok_or_else(|| MeasureError::Csv(format!("record {line}: missing field")))?
                .parse::<f64>()
                .map_err(|e| MeasureError::Csv(format!("record {line}: {e}")))
        };
        let mut atoms = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| MeasureError::Csv(e.to_string()))?;
            let x = parse(&rec, ix, line + 1)?;
            let z = match iz {
                Some(i) => parse(&rec, i, line + 1)?,
                None => default_z,
            };
            let w = match iw {
                Some(i) => parse(&rec, i, line + 1)?,
                None => 1.0,
            };
            atoms.push(Atom::new(x, z, w));
        }
        if atoms.is_empty() {
            return Err(MeasureError::Csv("no samples".into()));
        }
        if iw.is_some() {
            Self::new(atoms)
        } else {
            Self::normalized(atoms)
        }
    }
}

/// Solution of the `lambda` equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaResult {
    pub lambda: f64,
    /// Mass of atoms with `x + z/theta < lambda`.
    pub mass_below: f64,
    /// Mass of atoms with `x + z/theta == lambda`.
    pub mass_at: f64,
    /// `|1 - E[z + theta (lambda - x - z/theta)^+]|`.
    pub residual: f64,
}

fn check_theta(theta: f64) -> Result<(), MeasureError> {
    if theta > 0.0 && theta.is_finite() {
        Ok(())
    } else {
        Err(MeasureError::InvalidTheta(theta))
    }
}

/// Breakpoints `b = x + z/theta` sorted with merged ties and their weights.
pub(crate) struct SortedLaw {
    pub b: Vec<f64>,
    pub w: Vec<f64>,
}

impl SortedLaw {
    pub fn new(p: &DiscreteMeasure, theta: f64) -> Self {
        let mut pairs: Vec<(f64, f64)> = p.atoms.iter().map(|a| (a.x + a.z / theta, a.w)).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut b: Vec<f64> = Vec::with_capacity(pairs.len());
        let mut w: Vec<f64> = Vec::with_capacity(pairs.len());
        for (bi, wi) in pairs {
            match b.last() {
                Some(&last) if last == bi => *w.last_mut().expect("paired") += wi,
                _ => {
                    b.push(bi);
                    w.push(wi);
                }
            }
        }
        Self { b, w }
    }

    pub fn solve(&self, target: f64) -> f64 {
        solve_sorted(&self.b, &self.w, target)
    }
}

/// Solves `sum_k w_k (lambda - b_k)^+ = target` for sorted `b` by scanning the
/// segments of the piecewise-linear left side. Zero weights are skipped.
pub(crate) fn solve_sorted(b: &[f64], w: &[f64], target: f64) -> f64 {
    let mut wsum = CompensatedSum::new();
    let mut msum = CompensatedSum::new();
    let n = b.len();
    let mut lambda = f64::NAN;
    for k in 0..n {
        if w[k] == 0.0 {
            continue;
        }
        wsum.add(w[k]);
        msum.add(w[k] * b[k]);
        lambda = (target + msum.value()) / wsum.value();
        let next = b[k + 1..].iter().zip(&w[k + 1..]).find(|(_, &wk)| wk > 0.0).map(|(&bk, _)| bk);
        match next {
            Some(nb) if lambda > nb => continue,
            _ => break,
        }
    }
    lambda
}

/// Exact `lambda(p)` by a breakpoint scan.
pub fn solve_lambda(p: &DiscreteMeasure, theta: f64) -> Result<LambdaResult, MeasureError> {
    check_theta(theta)?;
    let mean_z = p.mean_z();
    if mean_z >= 1.0 {
        return Err(MeasureError::InfeasibleMeasure { mean_z });
    }
    let law = SortedLaw::new(p, theta);
    let lambda = law.solve((1.0 - mean_z) / theta);
    let mut below = CompensatedSum::new();
    let mut at = CompensatedSum::new();
    let mut total = CompensatedSum::new();
    for a in &p.atoms {
        let b = a.x + a.z / theta;
        if b < lambda {
            below.add(a.w);
        } else if b == lambda {
            at.add(a.w);
        }
        total.add(a.w * a.z);
        total.add(a.w * theta * (lambda - b).max(0.0));
    }
    Ok(LambdaResult {
        lambda,
        mass_below: below.value(),
        mass_at: at.value(),
        residual: (1.0 - total.value()).abs(),
    })
}

/// `grad_g` at `(x, z)` given `lambda`.
pub fn grad_g_at(lambda: f64, theta: f64, x: f64, z: f64) -> f64 {
    let gap = (lambda - x - z / theta).max(0.0);
    lambda * (1.0 - z) - 0.5 * theta * gap * gap + x * z + (z * z - 1.0) / (2.0 * theta)
}

/// `grad_g(p, x, z)` using `lambda(p)`.
pub fn grad_g(p: &DiscreteMeasure, theta: f64, x: f64, z: f64) -> Result<f64, MeasureError> {
    let lr = solve_lambda(p, theta)?;
    Ok(grad_g_at(lr.lambda, theta, x, z))
}

/// `g(p) = E_p[grad_g(p, x, z)]`, the SMMV value of the law.
pub fn g_objective(p: &DiscreteMeasure, theta: f64) -> Result<f64, MeasureError> {
    let lr = solve_lambda(p, theta)?;
    Ok(g_with_lambda(p, theta, lr.lambda))
}

fn g_with_lambda(p: &DiscreteMeasure, theta: f64, lambda: f64) -> f64 {
    sum(p.atoms.iter().map(|a| a.w * grad_g_at(lambda, theta, a.x, a.z)))
}

/// Gateaux differential `dg(p, q - p) = E_q[grad_g(p)] - E_p[grad_g(p)]`.
pub fn gateaux(p: &DiscreteMeasure, q: &DiscreteMeasure, theta: f64) -> Result<f64, MeasureError> {
    let lr = solve_lambda(p, theta)?;
    solve_lambda(q, theta)?;
    let mut acc = CompensatedSum::new();
    for a in &q.atoms {
        acc.add(a.w * grad_g_at(lr.lambda, theta, a.x, a.z));
    }
    for a in &p.atoms {
        acc.add(-a.w * grad_g_at(lr.lambda, theta, a.x, a.z));
    }
    Ok(acc.value())
}

/// Outcome of the second-order remainder check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapCheck {
    /// `|g(q) - g(p) - dg(p, q - p)|`.
    pub gap: f64,
    /// `theta/2 |lambda(q) - lambda(p)|^2`.
    pub bound: f64,
    pub ok: bool,
}

/// Checks `|g(q) - g(p) - dg(p, q - p)| <= theta/2 |lambda(q) - lambda(p)|^2`.
///
/// The remainder is a Bregman divergence of
/// `lambda -> theta/2 E[((lambda - b)^+)^2]`, whose curvature is bounded by
/// `theta`. The constant `theta/2` is sharp; `1/2` fails for `theta > 1`.
pub fn check_gap_bound(p: &DiscreteMeasure, q: &DiscreteMeasure, theta: f64) -> Result<GapCheck, MeasureError> {
    let (gap, dl) = gap_and_lambda_shift(p, q, theta)?;
    let bound = 0.5 * theta * dl * dl;
    let slack = 1e-12 * (1.0 + bound);
    Ok(GapCheck { gap, bound, ok: gap <= bound + slack })
}

/// `(|g(q) - g(p) - dg(p, q - p)|, lambda(q) - lambda(p))`.
pub fn gap_and_lambda_shift(
    p: &DiscreteMeasure,
    q: &DiscreteMeasure,
    theta: f64,
) -> Result<(f64, f64), MeasureError> {
    let lp = solve_lambda(p, theta)?.lambda;
    let lq = solve_lambda(q, theta)?.lambda;
    let mut acc = CompensatedSum::new();
    // g(q) - E_q[grad_g(p)]; the E_p terms of g(p) and dg cancel.
    for a in &q.atoms {
        acc.add(a.w * grad_g_at(lq, theta, a.x, a.z));
        acc.add(-a.w * grad_g_at(lp, theta, a.x, a.z));
    }
    Ok((acc.value().abs(), lq - lp))
}

/// Outcome of the `lambda` sandwich check for a per-atom perturbation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SandwichCheck {
    /// `E[chi 1_{R1}] / E[1_{R1}]` with `R1 = {x + chi + z/theta <= lambda_1}`.
    pub lower: f64,
    /// `lambda_1 - lambda_0`.
    pub difference: f64,
    /// `E[chi 1_{R0}] / E[1_{R0}]` with `R0 = {x + z/theta <= lambda_0}`.
    pub upper: f64,
    pub ok: bool,
}

/// Checks the two-sided bound on `lambda(x + chi) - lambda(x)`.
pub fn check_lambda_sandwich(
    base: &DiscreteMeasure,
    chi: &[f64],
    theta: f64,
) -> Result<SandwichCheck, MeasureError> {
    let pert = base.perturbed(chi)?;
    let l0 = solve_lambda(base, theta)?.lambda;
    let l1 = solve_lambda(&pert, theta)?.lambda;
    let (mut n0, mut m0, mut n1, mut m1) =
        (CompensatedSum::new(), CompensatedSum::new(), CompensatedSum::new(), CompensatedSum::new());
    for (a, &c) in base.atoms.iter().zip(chi) {
        let b = a.x + a.z / theta;
        if b <= l0 {
            m0.add(a.w);
            n0.add(a.w * c);
        }
        if b + c <= l1 {
            m1.add(a.w);
            n1.add(a.w * c);
        }
    }
    if !(m0.value() > 0.0) {
        return Err(MeasureError::EmptyIndicatorSet("R0"));
    }
    if !(m1.value() > 0.0) {
        return Err(MeasureError::EmptyIndicatorSet("R1"));
    }
    let lower = n1.value() / m1.value();
    let upper = n0.value() / m0.value();
    let difference = l1 - l0;
    let scale = 1.0 + l0.abs().max(l1.abs()) + chi.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let slack = 1e-12 * scale;
    Ok(SandwichCheck { lower, difference, upper, ok: lower <= difference + slack && difference <= upper + slack })
}
