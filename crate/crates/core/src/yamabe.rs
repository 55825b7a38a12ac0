//! Nonlinear least eigenvalue `rho(S^n)` of `c_n Delta u + h u = rho u^{p-1}`.
//!
//! `rho` is the infimum over positive radial `u` of the Yamabe-type quotient
//!
//! ```text
//! J(u) = int (c_n |u'|^2 + h u^2) dv / (int u^p dv)^{2/p},   p = 2n/(n-2).
//! ```
//!
//! Profiles are continuous and piecewise linear in `r` on the edges of a
//! [`RadialGrid`], poles included, and both integrals are evaluated on the
//! actual piecewise-linear function (Gauss points per element, split at the
//! jumps of `h`). Every discrete quotient is therefore the quotient of a
//! genuine radial `H^1` function, so the discrete infimum can only sit above
//! the continuous one. A cell-centred sum would not do: grid-scale bubbles at
//! a pole drive that discrete quotient below `lambda(S^n)`.
//!
//! `J` is minimized by projected gradient descent on `{int u^p = 1}` in the
//! positive cone, with gradients taken in the `H^1` metric of the grid.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::StepPotential;
use crate::quadrature::gauss_legendre;
use crate::spectral::RadialGrid;
use crate::spheregeom::{radial_density, sphere_volume, Dim};

/// Gauss points per element piece.
const ELEMENT_ORDER: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq)]
struct GaussPoint {
    /// Position in the element, 0 at the left node and 1 at the right.
    s: f64,
    weight: f64,
    h: f64,
}

/// `|x|^q`, with integer `q` taken by repeated multiplication.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Power {
    Int(i32),
    Real(f64),
}

impl Power {
    fn new(q: f64) -> Self {
        if q.fract() == 0.0 && q.abs() < 64.0 {
            Power::Int(q as i32)
        } else {
            Power::Real(q)
        }
    }

    #[inline]
    fn of(self, x: f64) -> f64 {
        match self {
            Power::Int(k) => x.abs().powi(k),
            Power::Real(q) => x.abs().powf(q),
        }
    }
}

/// Quadratic forms of the quotient on piecewise-linear radial profiles.
#[derive(Debug, Clone, PartialEq)]
pub struct NodalForms {
    n: Dim,
    m: usize,
    conformal: f64,
    exponent: f64,
    element_measure: Vec<f64>,
    points: Vec<GaussPoint>,
    offsets: Vec<usize>,
    lumped: Vec<f64>,
}

impl NodalForms {
    pub fn new(h: &StepPotential, grid: &RadialGrid) -> Result<Self> {
        let n = grid.n();
        if h.n() != n {
            return Err(Error::invalid(format!(
                "potential dimension {} does not match grid dimension {}",
                h.n().get(),
                n.get()
            )));
        }
        let m = grid.cells();
        let boundary = sphere_volume(Dim::new(n.get() - 1)?)?;
        let (gx, gw) = gauss_legendre(ELEMENT_ORDER);
        let mut jumps = Vec::new();
        if h.r1().get() > 0.0 && h.r1().get() < PI {
            jumps.push(PI - h.r1().get());
        }
        if h.r2().get() > 0.0 && h.r2().get() < PI {
            jumps.push(h.r2().get());
        }

        let mut points = Vec::with_capacity(m * ELEMENT_ORDER);
        let mut offsets = Vec::with_capacity(m + 1);
        let mut element_measure = Vec::with_capacity(m);
        let mut lumped = vec![0.0; m + 1];
        for e in 0..m {
            offsets.push(points.len());
            let (lo, hi) = grid.cell_bounds(e);
            let width = hi - lo;
            let mut cuts = vec![lo];
            cuts.extend(jumps.iter().copied().filter(|&j| j > lo && j < hi));
            cuts.push(hi);
            cuts.sort_by(f64::total_cmp);
            let mut measure = 0.0;
            for piece in cuts.windows(2) {
                let (a, b) = (piece[0], piece[1]);
                let hv = h.eval(0.5 * (a + b))?;
                let half = 0.5 * (b - a);
                for (x, w) in gx.iter().zip(&gw) {
                    let t = a + half * (1.0 + x);
                    let weight = w * half * boundary * radial_density(n, t);
                    let s = (t - lo) / width;
                    measure += weight;
                    lumped[e] += weight * (1.0 - s);
                    lumped[e + 1] += weight * s;
                    points.push(GaussPoint { s, weight, h: hv });
                }
            }
            element_measure.push(measure);
        }
        offsets.push(points.len());
        Ok(Self {
            n,
            m,
            conformal: n.conformal_constant()?,
            exponent: n.critical_exponent()?,
            element_measure,
            points,
            offsets,
            lumped,
        })
    }

    pub fn n(&self) -> Dim {
        self.n
    }

    /// Number of nodes, `m + 1`.
    pub fn nodes(&self) -> usize {
        self.m + 1
    }

    /// Node positions `r_i = i pi / m`.
    pub fn node_positions(&self) -> Vec<f64> {
        (0..=self.m).map(|i| i as f64 * PI / self.m as f64).collect()
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    /// Row sums of the mass matrix, `int phi_i dv`.
    pub fn lumped_mass(&self) -> &[f64] {
        &self.lumped
    }

    fn stiffness_coupling(&self, e: usize) -> f64 {
        let dr = PI / self.m as f64;
        self.conformal * self.element_measure[e] / (dr * dr)
    }

    fn element_points(&self, e: usize) -> &[GaussPoint] {
        &self.points[self.offsets[e]..self.offsets[e + 1]]
    }

    fn check(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.nodes() {
            return Err(Error::invalid(format!(
                "profile has {} values, expected {} nodes",
                u.len(),
                self.nodes()
            )));
        }
        Ok(())
    }

    /// `int (c_n |u'|^2 + h u^2) dv`.
    pub fn energy(&self, u: &[f64]) -> f64 {
        let mut total = 0.0;
        for e in 0..self.m {
            let (a, b) = (u[e], u[e + 1]);
            total += self.stiffness_coupling(e) * (b - a) * (b - a);
            for g in self.element_points(e) {
                let v = a + g.s * (b - a);
                total += g.weight * g.h * v * v;
            }
        }
        total
    }

    /// `int |u|^q dv`.
    pub fn power_integral(&self, u: &[f64], q: f64) -> f64 {
        let pow = Power::new(q);
        let mut total = 0.0;
        for e in 0..self.m {
            let (a, b) = (u[e], u[e + 1]);
            for g in self.element_points(e) {
                total += g.weight * pow.of(a + g.s * (b - a));
            }
        }
        total
    }

    /// `J(u)`.
    pub fn quotient(&self, u: &[f64]) -> Result<f64> {
        self.check(u)?;
        let denom = self.power_integral(u, self.exponent);
        if !(denom > 0.0) {
            return Err(Error::invalid("quotient of the zero function"));
        }
        Ok(self.energy(u) / denom.powf(2.0 / self.exponent))
    }

    /// `(A u)_i` with `u^T A u` the energy.
    fn apply(&self, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.nodes()];
        for e in 0..self.m {
            let (a, b) = (u[e], u[e + 1]);
            let k = self.stiffness_coupling(e) * (b - a);
            out[e] -= k;
            out[e + 1] += k;
            for g in self.element_points(e) {
                let v = g.weight * g.h * (a + g.s * (b - a));
                out[e] += v * (1.0 - g.s);
                out[e + 1] += v * g.s;
            }
        }
        out
    }

    /// `int |u|^{p-2} u phi_i dv`.
    fn power_load(&self, u: &[f64]) -> Vec<f64> {
        let pow = Power::new(self.exponent - 1.0);
        let mut out = vec![0.0; self.nodes()];
        for e in 0..self.m {
            let (a, b) = (u[e], u[e + 1]);
            for g in self.element_points(e) {
                let v = a + g.s * (b - a);
                let load = g.weight * pow.of(v) * v.signum();
                out[e] += load * (1.0 - g.s);
                out[e + 1] += load * g.s;
            }
        }
        out
    }

    /// `A u - rho int |u|^{p-2} u phi_i`, the discrete Euler–Lagrange defect.
    fn defect(&self, u: &[f64], rho: f64) -> Vec<f64> {
        self.apply(u)
            .into_iter()
            .zip(self.power_load(u))
            .map(|(a, b)| a - rho * b)
            .collect()
    }

    /// Defect in the lumped dual norm over `|u|_2`.
    pub fn residual(&self, u: &[f64], rho: f64) -> Result<f64> {
        self.check(u)?;
        let r: f64 = self
            .defect(u, rho)
            .iter()
            .zip(&self.lumped)
            .map(|(d, w)| d * d / w)
            .sum();
        Ok((r / self.power_integral(u, 2.0)).sqrt())
    }

    fn normalize(&self, u: &mut [f64]) {
        let s = self.power_integral(u, self.exponent).powf(1.0 / self.exponent);
        u.iter_mut().for_each(|x| *x /= s);
    }
}

/// Initial profile of one descent run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StartKind {
    Constant,
    SouthBump,
    NorthBump,
}

impl StartKind {
    pub const ALL: [StartKind; 3] = [StartKind::Constant, StartKind::SouthBump, StartKind::NorthBump];

    pub fn label(self) -> &'static str {
        match self {
            StartKind::Constant => "constant",
            StartKind::SouthBump => "south-bump",
            StartKind::NorthBump => "north-bump",
        }
    }

    /// Start values at the nodes of `forms`.
    pub fn profile(self, forms: &NodalForms) -> Vec<f64> {
        const WIDTH: f64 = 0.6;
        const FLOOR: f64 = 0.05;
        let bump = |d: f64| FLOOR + (-(d / WIDTH).powi(2)).exp();
        forms
            .node_positions()
            .into_iter()
            .map(|r| match self {
                StartKind::Constant => 1.0,
                StartKind::SouthBump => bump(PI - r),
                StartKind::NorthBump => bump(r),
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct YamabeOptions {
    pub grid_size: usize,
    pub initial_step: f64,
    pub max_iterations: usize,
    pub stagnation_tol: f64,
    pub window: usize,
    pub starts: Vec<StartKind>,
}

impl Default for YamabeOptions {
    fn default() -> Self {
        Self {
            grid_size: 2000,
            initial_step: 1.0,
            max_iterations: 10_000,
            stagnation_tol: 1e-12,
            window: 5,
            starts: StartKind::ALL.to_vec(),
        }
    }
}

impl YamabeOptions {
    pub fn validate(&self) -> Result<()> {
        if self.grid_size < crate::spectral::MIN_CELLS {
            return Err(Error::invalid(format!("grid size {} is below 16", self.grid_size)));
        }
        if !(self.initial_step > 0.0 && self.initial_step.is_finite()) {
            return Err(Error::invalid("initial step must be positive"));
        }
        if self.max_iterations == 0 {
            return Err(Error::invalid("iteration budget must be positive"));
        }
        if !(self.stagnation_tol > 0.0) {
            return Err(Error::invalid("stagnation tolerance must be positive"));
        }
        if self.window < 3 {
            return Err(Error::invalid("stagnation window must be at least 3"));
        }
        if self.starts.is_empty() {
            return Err(Error::invalid("at least one start is required"));
        }
        Ok(())
    }
}

/// Outcome of one start.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct StartOutcome {
    pub start: StartKind,
    pub rho: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct YamabeResult {
    pub rho: f64,
    /// Values at the grid nodes `r_i = i pi / m`, normalized to `int u^p = 1`.
    pub minimizer: Vec<f64>,
    pub iterations: usize,
    pub el_residual: f64,
    pub converged: bool,
    pub start_label: StartKind,
    pub grid_size: usize,
    pub starts: Vec<StartOutcome>,
}

/// A single descent run, with the accepted quotient values.
#[derive(Debug, Clone, PartialEq)]
pub struct DescentRun {
    pub profile: Vec<f64>,
    pub rho: f64,
    pub iterations: usize,
    pub converged: bool,
    pub history: Vec<f64>,
}

/// `J(u)` for `u` given at the `m + 1` nodes of `grid`.
pub fn quotient(u: &[f64], h: &StepPotential, grid: &RadialGrid) -> Result<f64> {
    NodalForms::new(h, grid)?.quotient(u)
}

/// SPD preconditioner `S + s M_lumped`, factored once, with `S` the
/// gradient part of the energy.
struct Preconditioner {
    piv: Vec<f64>,
    off: Vec<f64>,
}

impl Preconditioner {
    fn new(forms: &NodalForms) -> Self {
        let shift = 1.0 + forms.points.iter().fold(0.0f64, |a, g| a.max(g.h.abs()));
        let mut diag: Vec<f64> = forms.lumped.iter().map(|w| shift * w).collect();
        let mut off = vec![0.0; forms.m];
        for e in 0..forms.m {
            let k = forms.stiffness_coupling(e);
            diag[e] += k;
            diag[e + 1] += k;
            off[e] = -k;
        }
        let mut piv = diag;
        for j in 1..piv.len() {
            piv[j] -= off[j - 1] * off[j - 1] / piv[j - 1];
        }
        Self { piv, off }
    }

    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let m = rhs.len();
        let mut y = rhs.to_vec();
        for j in 1..m {
            y[j] -= self.off[j - 1] / self.piv[j - 1] * y[j - 1];
        }
        let mut x = vec![0.0; m];
        for j in (0..m).rev() {
            let tail = if j + 1 < m { self.off[j] * x[j + 1] } else { 0.0 };
            x[j] = (y[j] - tail) / self.piv[j];
        }
        x
    }
}

const ARMIJO: f64 = 1e-4;
const MAX_HALVINGS: usize = 60;
const MAX_STEP: f64 = 1e6;

/// Runs projected gradient descent on `J` from `start`.
pub fn descend(forms: &NodalForms, start: &[f64], opts: &YamabeOptions) -> Result<DescentRun> {
    forms.check(start)?;
    let mut u: Vec<f64> = start.iter().map(|x| x.abs()).collect();
    if !(forms.power_integral(&u, forms.exponent) > 0.0) {
        return Err(Error::invalid("start profile is identically zero"));
    }
    forms.normalize(&mut u);
    let pre = Preconditioner::new(forms);

    let mut value = forms.energy(&u);
    let mut history = vec![value];
    let mut step = opts.initial_step;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < opts.max_iterations {
        iterations += 1;
        let grad: Vec<f64> = forms.defect(&u, value).iter().map(|d| 2.0 * d).collect();
        let dir = pre.solve(&grad);
        let slope: f64 = grad.iter().zip(&dir).map(|(a, b)| a * b).sum();

        if slope > 0.0 && slope.is_finite() {
            let mut t = step;
            for _ in 0..MAX_HALVINGS {
                let mut cand: Vec<f64> = u.iter().zip(&dir).map(|(x, d)| (x - t * d).abs()).collect();
                let s = forms.power_integral(&cand, forms.exponent);
                if s > 0.0 && s.is_finite() {
                    forms.normalize(&mut cand);
                    let cv = forms.energy(&cand);
                    if cv <= value - ARMIJO * t * slope {
                        u = cand;
                        value = cv;
                        step = (2.0 * t).min(MAX_STEP);
                        break;
                    }
                }
                t *= 0.5;
            }
        }
        history.push(value);

        if history.len() > opts.window {
            let old = history[history.len() - 1 - opts.window];
            if old - value <= opts.stagnation_tol * value.abs() {
                converged = true;
                break;
            }
        }
    }

    Ok(DescentRun {
        profile: u,
        rho: value,
        iterations,
        converged,
        history,
    })
}

/// Minimizes `J` over positive radial profiles from every configured start.
pub fn minimize_quotient(h: &StepPotential, opts: &YamabeOptions) -> Result<YamabeResult> {
    opts.validate()?;
    let grid = RadialGrid::new(h.n(), opts.grid_size)?;
    let forms = NodalForms::new(h, &grid)?;

    // starts are independent; each runs on its own thread
    let runs: Vec<(StartKind, DescentRun)> = std::thread::scope(|scope| {
        let handles: Vec<_> = opts
            .starts
            .iter()
            .map(|&start| {
                let forms = &forms;
                scope.spawn(move || descend(forms, &start.profile(forms), opts).map(|r| (start, r)))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("descent thread panicked"))
            .collect::<Result<Vec<_>>>()
    })?;
    let outcomes: Vec<StartOutcome> = runs
        .iter()
        .map(|(s, r)| StartOutcome {
            start: *s,
            rho: r.rho,
            iterations: r.iterations,
            converged: r.converged,
        })
        .collect();
    let (start, best) = runs
        .into_iter()
        .min_by(|a, b| a.1.rho.total_cmp(&b.1.rho).then(a.0.cmp(&b.0)))
        .expect("at least one start");

    let el_residual = forms.residual(&best.profile, best.rho)?;
    Ok(YamabeResult {
        rho: best.rho,
        minimizer: best.profile,
        iterations: best.iterations,
        el_residual,
        converged: best.converged,
        start_label: start,
        grid_size: opts.grid_size,
        starts: outcomes,
    })
}

/// Weak-form residual of `c_n Delta u + h u - rho u^{p-1}` for the reported
/// minimizer, in the lumped dual norm, over `|u|_2`.
pub fn euler_lagrange_residual(res: &YamabeResult, h: &StepPotential) -> Result<f64> {
    let grid = RadialGrid::new(h.n(), res.grid_size)?;
    NodalForms::new(h, &grid)?.residual(&res.minimizer, res.rho)
}
