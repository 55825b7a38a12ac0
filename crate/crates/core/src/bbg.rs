//! The isoperimetric comparison constant `a(n, eps, alpha)`.
//!
//! Under `r0 d^2 >= (n-1) eps alpha^2` the isoperimetric profile of `M` is
//! bounded below by `a / d` times the model profile. Three branches:
//!
//! * `eps = 1`: `a = alpha sigma_n^{1/n} [2 int_0^{alpha/2} cos^{n-1}]^{-1/n}`
//! * `eps = 0`: `a = (1 + n sigma_n)^{1/n} - 1`
//! * `eps = -1`: `a = alpha c(alpha)`, with `c(alpha)` the positive root of
//!   `sigma_n cosh^n y = sinh y int_y^{y+alpha} cosh^{n-1} t dt`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::ManifoldSummary;
use crate::quadrature::{integrate, QuadratureSpec};
use crate::spheregeom::{sigma, Dim};

/// Curvature-diameter hypothesis `(eps, alpha)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawHypothesis", into = "RawHypothesis")]
pub struct Hypothesis {
    epsilon: i8,
    alpha: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct RawHypothesis {
    epsilon: i8,
    alpha: f64,
}

impl TryFrom<RawHypothesis> for Hypothesis {
    type Error = Error;
    fn try_from(raw: RawHypothesis) -> Result<Self> {
        Hypothesis::new(raw.epsilon, raw.alpha)
    }
}

impl From<Hypothesis> for RawHypothesis {
    fn from(h: Hypothesis) -> Self {
        RawHypothesis {
            epsilon: h.epsilon,
            alpha: h.alpha,
        }
    }
}

impl Hypothesis {
    pub fn new(epsilon: i8, alpha: f64) -> Result<Self> {
        if !(-1..=1).contains(&epsilon) {
            return Err(Error::invalid(format!("epsilon must be -1, 0 or 1, got {epsilon}")));
        }
        if !(alpha.is_finite() && alpha >= 0.0) {
            return Err(Error::out_of_range("alpha", alpha, "[0, inf)"));
        }
        Ok(Self { epsilon, alpha })
    }

    pub fn epsilon(&self) -> i8 {
        self.epsilon
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

/// The constant `a` together with the hypothesis it was computed under.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BbgConstant {
    pub value: f64,
    pub hypothesis: Hypothesis,
    pub c_alpha: Option<f64>,
}

/// `r0 d^2 >= (n-1) eps alpha^2`.
pub fn check_hypothesis(summary: &ManifoldSummary, h: &Hypothesis) -> bool {
    let n = summary.n().as_f64();
    let d = summary.diameter();
    summary.ricci_lower_bound() * d * d >= (n - 1.0) * h.epsilon as f64 * h.alpha * h.alpha
}

/// Ratio `cosh(y + s) / cosh y`, finite for any `y`.
fn cosh_ratio(s: f64, y: f64) -> f64 {
    (s.exp() + (-s - 2.0 * y).exp()) / (1.0 + (-2.0 * y).exp())
}

/// `F(y) / cosh^n y`; same sign as `F`, without overflow.
fn scaled_root_function(n: Dim, sigma_n: f64, alpha: f64, y: f64) -> Result<f64> {
    let k = n.get() as i32 - 1;
    let tail = integrate(|s| cosh_ratio(s, y).powi(k), 0.0, alpha, &QuadratureSpec::default())?;
    Ok(sigma_n - y.tanh() * tail)
}

/// `F(y) = sigma_n cosh^n y - sinh y int_y^{y+alpha} cosh^{n-1} t dt`.
pub fn c_alpha_residual(n: Dim, alpha: f64, y: f64) -> Result<f64> {
    let sigma_n = sigma(n)?;
    let k = n.get() as i32 - 1;
    let tail = integrate(|t| t.cosh().powi(k), y, y + alpha, &QuadratureSpec::default())?;
    Ok(sigma_n * y.cosh().powi(n.get() as i32) - y.sinh() * tail)
}

/// Largest bracket exponent tried: the upper end runs through `1, 2, 4, ..., 2^60`.
const BRACKET_DOUBLINGS: u32 = 60;
const ROOT_RESIDUAL_TOL: f64 = 1e-10;

/// Solves for `c(alpha)`.
///
/// `F(0) = sigma_n > 0`; the upper bracket end is doubled from 1 until `F`
/// turns negative. No sign change within the budget is a solver failure.
pub fn solve_c_alpha(n: Dim, alpha: f64) -> Result<f64> {
    let n = n.require(2)?;
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::out_of_range("alpha", alpha, "(0, inf)"));
    }
    let sigma_n = sigma(n)?;
    let g = |y: f64| scaled_root_function(n, sigma_n, alpha, y);

    let mut hi = 1.0;
    let mut found = false;
    for _ in 0..=BRACKET_DOUBLINGS {
        if g(hi)? < 0.0 {
            found = true;
            break;
        }
        hi *= 2.0;
    }
    if !found {
        return Err(Error::solver(format!(
            "no sign change of the c(alpha) equation on (0, 2^{BRACKET_DOUBLINGS}] for n = {}, alpha = {alpha}",
            n.get()
        )));
    }

    let mut lo = 0.0;
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let root = if g(lo)?.abs() < g(hi)?.abs() { lo } else { hi };
    let residual = c_alpha_residual(n, alpha, root)?;
    if residual.abs() >= ROOT_RESIDUAL_TOL {
        return Err(Error::solver(format!(
            "c(alpha) root {root} leaves residual {residual:e}"
        )));
    }
    Ok(root)
}

/// Evaluates `a(n, eps, alpha)`.
pub fn bbg_constant(n: Dim, h: Hypothesis) -> Result<BbgConstant> {
    let n = n.require(2)?;
    let nf = n.as_f64();
    let sigma_n = sigma(n)?;
    match h.epsilon {
        1 => {
            if !(h.alpha > 0.0 && h.alpha <= PI) {
                return Err(Error::out_of_range("alpha (eps = 1)", h.alpha, "(0, pi]"));
            }
            let k = n.get() as i32 - 1;
            let half = integrate(|t| t.cos().powi(k), 0.0, h.alpha / 2.0, &QuadratureSpec::default())?;
            Ok(BbgConstant {
                value: h.alpha * sigma_n.powf(1.0 / nf) * (2.0 * half).powf(-1.0 / nf),
                hypothesis: h,
                c_alpha: None,
            })
        }
        0 => Ok(BbgConstant {
            value: (1.0 + nf * sigma_n).powf(1.0 / nf) - 1.0,
            hypothesis: Hypothesis { epsilon: 0, alpha: 0.0 },
            c_alpha: None,
        }),
        _ => {
            if !(h.alpha > 0.0) {
                return Err(Error::out_of_range("alpha (eps = -1)", h.alpha, "(0, inf)"));
            }
            let c = solve_c_alpha(n, h.alpha)?;
            Ok(BbgConstant {
                value: h.alpha * c,
                hypothesis: h,
                c_alpha: Some(c),
            })
        }
    }
}

/// Picks the admissible hypothesis with the largest `a`.
///
/// Candidates: `eps = 1` with `alpha = min(pi, d sqrt(r0/(n-1)))` when
/// `r0 > 0`; `eps = 0` when `r0 >= 0`; `eps = -1` with
/// `alpha = d sqrt(-r0/(n-1))` when `r0 < 0`. Ties go to the earlier one.
pub fn best_hypothesis(summary: &ManifoldSummary) -> Result<BbgConstant> {
    let n = summary.n();
    let r0 = summary.ricci_lower_bound();
    let d = summary.diameter();
    let nm1 = n.as_f64() - 1.0;

    let mut candidates = Vec::with_capacity(2);
    if r0 > 0.0 {
        let alpha = (d * (r0 / nm1).sqrt()).min(PI);
        candidates.push(bbg_constant(n, Hypothesis::new(1, alpha)?)?);
    }
    if r0 >= 0.0 {
        candidates.push(bbg_constant(n, Hypothesis::new(0, 0.0)?)?);
    } else {
        let alpha = d * (-r0 / nm1).sqrt();
        candidates.push(bbg_constant(n, Hypothesis::new(-1, alpha)?)?);
    }

    let mut best: Option<BbgConstant> = None;
    for c in candidates {
        if !check_hypothesis(summary, &c.hypothesis) {
            continue;
        }
        if best.is_none_or(|b| c.value > b.value) {
            best = Some(c);
        }
    }
    best.ok_or_else(|| Error::solver("no admissible curvature-diameter hypothesis"))
}
