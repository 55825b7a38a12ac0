//! Rearrangements of functions known through their distribution, and the
//! inequalities the symmetrization argument rests on.
//!
//! A function on `M` is a list of `(value, weight)` atoms whose weights sum
//! to the volume `V`. Its decreasing rearrangement is a step function on
//! `[0, V]`; every identity and inequality below is then a finite sum.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::ManifoldSummary;
use crate::spheregeom::{cap_radius_for_fraction, cap_volume, sphere_volume, Dim, Radius};

const VOLUME_REL_TOL: f64 = 1e-12;

/// A function on `M` through its distribution: atoms `(value, weight)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasuredFunction {
    samples: Vec<(f64, f64)>,
    total_volume: f64,
}

impl MeasuredFunction {
    pub fn new(samples: Vec<(f64, f64)>, total_volume: f64) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::invalid("measured function needs at least one sample"));
        }
        if !(total_volume.is_finite() && total_volume > 0.0) {
            return Err(Error::invalid(format!("total volume must be positive, got {total_volume}")));
        }
        let mut sum = 0.0;
        for &(v, w) in &samples {
            if !v.is_finite() {
                return Err(Error::invalid("sample values must be finite"));
            }
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::invalid(format!("sample weights must be positive, got {w}")));
            }
            sum += w;
        }
        if (sum - total_volume).abs() > VOLUME_REL_TOL * total_volume {
            return Err(Error::invalid(format!(
                "sample weights sum to {sum}, expected total volume {total_volume}"
            )));
        }
        Ok(Self {
            samples,
            total_volume,
        })
    }

    /// Atoms of equal weight `V / values.len()`.
    pub fn uniform(values: &[f64], total_volume: f64) -> Result<Self> {
        let w = total_volume / values.len().max(1) as f64;
        Self::new(values.iter().map(|&v| (v, w)).collect(), total_volume)
    }

    pub fn samples(&self) -> &[(f64, f64)] {
        &self.samples
    }

    pub fn total_volume(&self) -> f64 {
        self.total_volume
    }

    /// Same atoms, values mapped through `f`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(
            self.samples.iter().map(|&(v, w)| (f(v), w)).collect(),
            self.total_volume,
        )
    }

    /// `sum_i w_i f_i^q`.
    pub fn power_sum(&self, q: f64) -> Result<f64> {
        let mut s = 0.0;
        for &(v, w) in &self.samples {
            s += w * checked_power(v, q)?;
        }
        Ok(s)
    }

    fn same_partition(&self, other: &MeasuredFunction) -> bool {
        self.samples.len() == other.samples.len()
            && self.total_volume == other.total_volume
            && self
                .samples
                .iter()
                .zip(&other.samples)
                .all(|(a, b)| a.1 == b.1)
    }
}

fn checked_power(v: f64, q: f64) -> Result<f64> {
    if q.fract() == 0.0 && q.abs() < i32::MAX as f64 {
        Ok(v.powi(q as i32))
    } else if v < 0.0 {
        Err(Error::invalid(format!(
            "negative value {v} raised to non-integer power {q}"
        )))
    } else {
        Ok(v.powf(q))
    }
}

/// A right-continuous step function on `[0, V]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepProfile {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl StepProfile {
    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn total_length(&self) -> f64 {
        *self.breakpoints.last().expect("profile has breakpoints")
    }

    /// Value at `u`; the last step is closed at `V`.
    pub fn eval(&self, u: f64) -> f64 {
        let k = self.breakpoints[1..].partition_point(|&b| b <= u);
        self.values[k.min(self.values.len() - 1)]
    }

    fn steps(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.breakpoints
            .windows(2)
            .zip(&self.values)
            .map(|(w, &v)| (w[0], w[1], v))
    }

    fn from_sorted(atoms: Vec<(f64, f64)>, total: f64) -> StepProfile {
        let mut breakpoints = Vec::with_capacity(atoms.len() + 1);
        let mut values = Vec::with_capacity(atoms.len());
        breakpoints.push(0.0);
        let mut acc = 0.0;
        for (v, w) in atoms {
            acc += w;
            breakpoints.push(acc);
            values.push(v);
        }
        *breakpoints.last_mut().unwrap() = total;
        StepProfile { breakpoints, values }
    }
}

/// `f*`: values sorted decreasing, weights stacked from 0. Ties keep input
/// order.
pub fn decreasing_rearrangement(mf: &MeasuredFunction) -> StepProfile {
    let mut atoms = mf.samples.clone();
    atoms.sort_by(|a, b| b.0.total_cmp(&a.0));
    StepProfile::from_sorted(atoms, mf.total_volume)
}

/// Increasing rearrangement, the reflection `u -> V - u` of `f*`.
pub fn increasing_rearrangement(mf: &MeasuredFunction) -> StepProfile {
    let mut atoms = mf.samples.clone();
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    StepProfile::from_sorted(atoms, mf.total_volume)
}

/// `int_0^V p(u)^q du`, exact over the steps.
pub fn power_integral(p: &StepProfile, q: f64) -> Result<f64> {
    if !(q >= 1.0) {
        return Err(Error::out_of_range("exponent q", q, "[1, inf)"));
    }
    let mut s = 0.0;
    for (lo, hi, v) in p.steps() {
        s += (hi - lo) * checked_power(v, q)?;
    }
    Ok(s)
}

/// Both sides of the Hardy–Littlewood–Pólya bound
/// `int R f^2 >= beta int_0^{omega_n} [R+*(V - beta u) - R-*(beta u)] f*^2(u) du`,
/// with `f*` read in the sphere measure coordinate `u` (so `f*(u)` is the
/// rearrangement of `|f|` on `M` evaluated at `beta u`).
pub fn hlp_lower_bound(r: &MeasuredFunction, f: &MeasuredFunction, n: Dim) -> Result<(f64, f64)> {
    if !r.same_partition(f) {
        return Err(Error::invalid("R and f must share the same weighted partition"));
    }
    let v = r.total_volume;
    let omega = sphere_volume(n)?;
    let beta = v / omega;

    let lhs: f64 = r
        .samples
        .iter()
        .zip(&f.samples)
        .map(|(&(rv, w), &(fv, _))| w * rv * fv * fv)
        .sum();

    let plus_inc = increasing_rearrangement(&r.map(|x| x.max(0.0))?);
    let minus_dec = decreasing_rearrangement(&r.map(|x| (-x).max(0.0))?);
    let f_dec = decreasing_rearrangement(&f.map(f64::abs)?);

    let mut marks: Vec<f64> = plus_inc
        .breakpoints
        .iter()
        .chain(&minus_dec.breakpoints)
        .chain(&f_dec.breakpoints)
        .copied()
        .collect();
    marks.sort_by(f64::total_cmp);
    marks.dedup();

    // R+*(V - t) is the increasing rearrangement of R+ at t = beta u.
    let mut integral_u = 0.0;
    for w in marks.windows(2) {
        let (t0, t1) = (w[0], w[1]);
        if t1 <= t0 {
            continue;
        }
        let t = 0.5 * (t0 + t1);
        let fv = f_dec.eval(t);
        let weight = plus_inc.eval(t) - minus_dec.eval(t);
        integral_u += (t1 - t0) / beta * weight * fv * fv;
    }
    Ok((lhs, beta * integral_u))
}

/// Output of [`steffensen_bounds`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteffensenBounds {
    pub lower: f64,
    pub middle: f64,
    pub upper: f64,
    pub gamma: f64,
}

/// Piecewise-linear integral of the tabulation `(xs, ys)` over `[lo, hi]`.
fn linear_integral(xs: &[f64], ys: &[f64], lo: f64, hi: f64) -> f64 {
    let mut s = 0.0;
    for k in 0..xs.len() - 1 {
        let (x0, x1) = (xs[k], xs[k + 1]);
        let a = lo.max(x0);
        let b = hi.min(x1);
        if b <= a {
            continue;
        }
        let slope = (ys[k + 1] - ys[k]) / (x1 - x0);
        let ya = ys[k] + slope * (a - x0);
        let yb = ys[k] + slope * (b - x0);
        s += 0.5 * (b - a) * (ya + yb);
    }
    s
}

/// Steffensen's inequality for a nonincreasing `phi` and `0 <= psi <= 1`,
/// both tabulated at `nodes` on `[a, b]` and interpolated linearly:
/// `int_{b-gamma}^b phi <= int phi psi <= int_a^{a+gamma} phi`,
/// `gamma = int psi`.
pub fn steffensen_bounds(nodes: &[f64], phi: &[f64], psi: &[f64]) -> Result<SteffensenBounds> {
    if nodes.len() < 2 || phi.len() != nodes.len() || psi.len() != nodes.len() {
        return Err(Error::invalid("tabulation needs >= 2 nodes and matching value lists"));
    }
    if nodes.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::invalid("tabulation nodes must be strictly increasing"));
    }
    if phi.windows(2).any(|w| w[1] > w[0]) {
        return Err(Error::invalid("phi must be nonincreasing"));
    }
    if psi.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
        return Err(Error::invalid("psi must take values in [0, 1]"));
    }
    let a = nodes[0];
    let b = *nodes.last().unwrap();
    let gamma = linear_integral(nodes, psi, a, b);
    let mut middle = 0.0;
    for k in 0..nodes.len() - 1 {
        let h = nodes[k + 1] - nodes[k];
        let (f0, f1, g0, g1) = (phi[k], phi[k + 1], psi[k], psi[k + 1]);
        middle += h / 6.0 * (2.0 * f0 * g0 + f0 * g1 + f1 * g0 + 2.0 * f1 * g1);
    }
    Ok(SteffensenBounds {
        lower: linear_integral(nodes, phi, b - gamma, b),
        middle,
        upper: linear_integral(nodes, phi, a, a + gamma),
        gamma,
    })
}

/// The bookkeeping lengths `gamma_+-` in the sphere measure coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GammaPair {
    pub gamma_plus: f64,
    pub gamma_minus: f64,
}

/// `gamma_+ = omega_n - |R_+|_1 / (beta sup R_+)`,
/// `gamma_- = |R_-|_1 / (beta sup R_-)`; a vanishing part gives
/// `gamma_+ = omega_n` and `gamma_- = 0`.
pub fn gamma_pair(summary: &ManifoldSummary) -> Result<GammaPair> {
    let omega = sphere_volume(summary.n())?;
    let beta = summary.beta()?;
    let s = summary.scalar();
    let gamma_plus = if s.sup_plus == 0.0 {
        omega
    } else {
        omega - s.l1_plus / (beta * s.sup_plus)
    };
    let gamma_minus = if s.sup_minus == 0.0 {
        0.0
    } else {
        s.l1_minus / (beta * s.sup_minus)
    };
    Ok(GammaPair {
        gamma_plus: gamma_plus.clamp(0.0, omega),
        gamma_minus: gamma_minus.clamp(0.0, omega),
    })
}

/// A radial step function on `S^n`: `values[k]` on `radii[k] <= r < radii[k+1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    n: Dim,
    radii: Vec<Radius>,
    values: Vec<f64>,
}

impl RadialProfile {
    pub fn radii(&self) -> &[Radius] {
        &self.radii
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn eval(&self, r: f64) -> f64 {
        let k = self.radii[1..].partition_point(|b| b.get() <= r);
        self.values[k.min(self.values.len() - 1)]
    }

    /// `int_{S^n} g^q dv`.
    pub fn power_integral(&self, q: f64) -> Result<f64> {
        let mut s = 0.0;
        let mut prev = 0.0;
        for (k, &v) in self.values.iter().enumerate() {
            let next = cap_volume(self.n, self.radii[k + 1].get())?;
            s += (next - prev) * checked_power(v, q)?;
            prev = next;
        }
        Ok(s)
    }
}

/// Transplants `p` to `S^n`: `g(r) = p(V vol B(N, r) / omega_n)`.
pub fn project_to_sphere(p: &StepProfile, n: Dim) -> Result<RadialProfile> {
    let v = p.total_length();
    let radii = p
        .breakpoints
        .iter()
        .map(|&b| cap_radius_for_fraction(n, (b / v).clamp(0.0, 1.0)))
        .collect::<Result<Vec<_>>>()?;
    Ok(RadialProfile {
        n,
        radii,
        values: p.values.clone(),
    })
}
