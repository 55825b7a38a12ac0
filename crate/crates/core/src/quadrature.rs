//! Composite Gauss–Legendre quadrature with dyadic panel refinement.
//!
//! Every integral in the crate goes through [`integrate`]. The rule on each
//! panel has a fixed order; panels are halved until two successive composite
//! estimates agree to the requested relative tolerance.

use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Nodes per panel.
pub const ORDER: usize = 16;

/// Refinement controls for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    rel_tol: f64,
    max_depth: u32,
}

impl QuadratureSpec {
    pub fn new(rel_tol: f64, max_depth: u32) -> Result<Self> {
        if !(rel_tol > 0.0) {
            return Err(Error::out_of_range("relative tolerance", rel_tol, "(0, inf)"));
        }
        if max_depth < 1 {
            return Err(Error::invalid("quadrature depth must be at least 1"));
        }
        Ok(Self { rel_tol, max_depth })
    }

    pub fn rel_tol(&self) -> f64 {
        self.rel_tol
    }

    pub fn max_depth(&self) -> u32 {
        self.max_depth
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            max_depth: 20,
        }
    }
}

struct Rule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

fn rule() -> &'static Rule {
    static RULE: OnceLock<Rule> = OnceLock::new();
    RULE.get_or_init(|| legendre_rule(ORDER))
}

/// Gauss–Legendre nodes and weights of the given order on `[-1, 1]`.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let r = legendre_rule(order.max(1));
    (r.nodes, r.weights)
}

/// Nodes on [-1, 1] from Newton iteration on the three-term recurrence.
fn legendre_rule(order: usize) -> Rule {
    let mut nodes = vec![0.0; order];
    let mut weights = vec![0.0; order];
    let n = order as f64;
    for i in 0..order {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=order {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    Rule { nodes, weights }
}

fn composite<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, panels: usize) -> f64 {
    let r = rule();
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for k in 0..panels {
        let lo = a + k as f64 * h;
        let mid = lo + 0.5 * h;
        let half = 0.5 * h;
        let mut s = 0.0;
        for (x, w) in r.nodes.iter().zip(r.weights.iter()) {
            s += w * f(mid + half * x);
        }
        total += s * half;
    }
    total
}

/// Integrates `f` over `[a, b]`.
///
/// Returns an error if the panel count reaches `2^max_depth` without two
/// successive estimates agreeing.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let mut panels = 1usize;
    let mut prev = composite(&f, a, b, panels);
    for _ in 0..spec.max_depth {
        panels *= 2;
        let next = composite(&f, a, b, panels);
        let diff = (next - prev).abs();
        if diff <= spec.rel_tol * next.abs() || diff <= f64::MIN_POSITIVE {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::solver(format!(
        "quadrature on [{a}, {b}] did not settle after {panels} panels"
    )))
}
