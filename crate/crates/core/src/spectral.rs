//! Radial spectrum of `c_n Delta + h` on `S^n`.
//!
//! Radial functions are discretized on a cell-centred grid in the distance
//! `r` from the north pole. The quadratic forms are
//!
//! ```text
//! Q(u) = sum_faces c_n W_f (u_{j+1} - u_j)^2 / dr + sum_cells h_j w_j u_j^2
//! M(u) = sum_cells w_j u_j^2
//! ```
//!
//! with `w_j` the exact sphere measure of shell `j` and `W_f` the area of the
//! interior face. Face areas vanish at the poles, so the singular endpoints
//! need no boundary condition. `h_j` is the exact shell average of the step
//! potential.
//!
//! Eigenvalues of the pencil `(K, M)` are isolated by bisection on the
//! inertia of `K - lambda M` and polished by inverse iteration.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::potential::StepPotential;
use crate::spheregeom::{self, radial_density, sphere_volume, Dim};

pub const MIN_CELLS: usize = 16;

/// Cell-centred grid on `[0, pi]` carrying the sphere measure.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RadialGrid {
    n: Dim,
    m: usize,
    #[serde(skip)]
    cell_measure: Vec<f64>,
    #[serde(skip)]
    face_weight: Vec<f64>,
}

impl RadialGrid {
    pub fn new(n: Dim, m: usize) -> Result<Self> {
        n.require(3)?;
        if m < MIN_CELLS {
            return Err(Error::invalid(format!("grid needs at least {MIN_CELLS} cells, got {m}")));
        }
        let boundary = sphere_volume(Dim::new(n.get() - 1)?)?;
        let dr = PI / m as f64;
        let cell_measure = (0..m)
            .map(|j| {
                let lo = j as f64 * dr;
                let hi = if j + 1 == m { PI } else { (j + 1) as f64 * dr };
                spheregeom::sine_power_integral(n, lo, hi).map(|v| boundary * v)
            })
            .collect::<Result<Vec<_>>>()?;
        let face_weight = (1..m)
            .map(|j| boundary * radial_density(n, j as f64 * dr))
            .collect();
        Ok(Self {
            n,
            m,
            cell_measure,
            face_weight,
        })
    }

    pub fn n(&self) -> Dim {
        self.n
    }

    pub fn cells(&self) -> usize {
        self.m
    }

    pub fn spacing(&self) -> f64 {
        PI / self.m as f64
    }

    pub fn center(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.spacing()
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.m).map(|j| self.center(j)).collect()
    }

    /// Shell edges `j dr` and `(j+1) dr`.
    pub fn cell_bounds(&self, j: usize) -> (f64, f64) {
        let dr = self.spacing();
        let hi = if j + 1 == self.m { PI } else { (j + 1) as f64 * dr };
        (j as f64 * dr, hi)
    }

    /// `w_j`, sphere measure of each shell.
    pub fn cell_measure(&self) -> &[f64] {
        &self.cell_measure
    }

    /// Area of the `m - 1` interior faces.
    pub fn face_weight(&self) -> &[f64] {
        &self.face_weight
    }

    /// Shell averages of a step potential.
    pub fn cell_potential(&self, h: &StepPotential) -> Result<Vec<f64>> {
        if h.n() != self.n {
            return Err(Error::invalid(format!(
                "potential dimension {} does not match grid dimension {}",
                h.n().get(),
                self.n.get()
            )));
        }
        (0..self.m)
            .map(|j| {
                let (lo, hi) = self.cell_bounds(j);
                h.shell_average(lo, hi)
            })
            .collect()
    }
}

/// Stiffness and mass forms of `c_n Delta + h` on a radial grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialForms {
    grid: RadialGrid,
    conformal: f64,
    potential: Vec<f64>,
}

/// Builds the forms for `h` on `grid`.
pub fn assemble_forms(h: &StepPotential, grid: &RadialGrid) -> Result<RadialForms> {
    let potential = grid.cell_potential(h)?;
    RadialForms::with_cell_potential(grid.clone(), potential)
}

impl RadialForms {
    /// Forms with an arbitrary per-cell potential.
    pub fn with_cell_potential(grid: RadialGrid, potential: Vec<f64>) -> Result<Self> {
        if potential.len() != grid.cells() {
            return Err(Error::invalid("cell potential length must match the grid"));
        }
        if potential.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("cell potential must be finite"));
        }
        let conformal = grid.n().conformal_constant()?;
        Ok(Self {
            grid,
            conformal,
            potential,
        })
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn potential(&self) -> &[f64] {
        &self.potential
    }

    /// Same forms with `h` replaced by `h + c`.
    pub fn shifted(&self, c: f64) -> Self {
        Self {
            grid: self.grid.clone(),
            conformal: self.conformal,
            potential: self.potential.iter().map(|v| v + c).collect(),
        }
    }

    fn coupling(&self) -> impl Iterator<Item = f64> + '_ {
        let scale = self.conformal / self.grid.spacing();
        self.grid.face_weight.iter().map(move |w| scale * w)
    }

    /// Diagonal and off-diagonal of the stiffness matrix `K`.
    pub fn stiffness(&self) -> (Vec<f64>, Vec<f64>) {
        let m = self.grid.cells();
        let off: Vec<f64> = self.coupling().map(|k| -k).collect();
        let mut diag: Vec<f64> = (0..m)
            .map(|j| self.potential[j] * self.grid.cell_measure[j])
            .collect();
        for (f, k) in off.iter().enumerate() {
            diag[f] -= k;
            diag[f + 1] -= k;
        }
        (diag, off)
    }

    pub fn mass(&self) -> &[f64] {
        &self.grid.cell_measure
    }

    /// `Q(u)`, summed in difference form.
    pub fn energy(&self, u: &[f64]) -> f64 {
        let grad: f64 = self
            .coupling()
            .zip(u.windows(2))
            .map(|(k, w)| k * (w[1] - w[0]).powi(2))
            .sum();
        let pot: f64 = u
            .iter()
            .zip(&self.potential)
            .zip(&self.grid.cell_measure)
            .map(|((x, h), w)| h * w * x * x)
            .sum();
        grad + pot
    }

    /// Dirichlet part of `Q(u)` only.
    pub fn gradient_energy(&self, u: &[f64]) -> f64 {
        self.coupling()
            .zip(u.windows(2))
            .map(|(k, w)| k * (w[1] - w[0]).powi(2))
            .sum()
    }

    /// `M(u)`.
    pub fn mass_norm2(&self, u: &[f64]) -> f64 {
        u.iter().zip(&self.grid.cell_measure).map(|(x, w)| w * x * x).sum()
    }

    /// `K u`.
    pub fn apply_stiffness(&self, u: &[f64]) -> Vec<f64> {
        let mut out: Vec<f64> = u
            .iter()
            .zip(&self.potential)
            .zip(&self.grid.cell_measure)
            .map(|((x, h), w)| h * w * x)
            .collect();
        for (f, k) in self.coupling().enumerate() {
            let flux = k * (u[f + 1] - u[f]);
            out[f] -= flux;
            out[f + 1] += flux;
        }
        out
    }

    pub fn rayleigh_quotient(&self, u: &[f64]) -> f64 {
        self.energy(u) / self.mass_norm2(u)
    }

    /// Number of generalized eigenvalues strictly below `lambda`.
    pub fn count_below(&self, lambda: f64) -> usize {
        let (diag, off) = self.stiffness();
        sturm_count(&diag, &off, self.mass(), lambda)
    }

    /// Gershgorin interval of `M^{-1/2} K M^{-1/2}`.
    fn spectral_enclosure(&self) -> (f64, f64) {
        let (diag, off) = self.stiffness();
        let w = self.mass();
        let m = diag.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for j in 0..m {
            let mut radius = 0.0;
            if j > 0 {
                radius += off[j - 1].abs() / (w[j] * w[j - 1]).sqrt();
            }
            if j + 1 < m {
                radius += off[j].abs() / (w[j] * w[j + 1]).sqrt();
            }
            let c = diag[j] / w[j];
            lo = lo.min(c - radius);
            hi = hi.max(c + radius);
        }
        (lo - 1.0, hi + 1.0)
    }

    /// The `k`-th eigenpair (0-based).
    pub fn eigenpair(&self, k: usize) -> Result<Eigenpair> {
        let m = self.grid.cells();
        if k >= m {
            return Err(Error::invalid(format!("grid has only {m} eigenvalues")));
        }
        let (diag, off) = self.stiffness();
        let w = self.mass();
        let (mut lo, mut hi) = self.spectral_enclosure();
        let scale = lo.abs().max(hi.abs());

        // invariant: count(lo) <= k < count(hi)
        while hi - lo > BISECTION_TOL {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if sturm_count(&diag, &off, w, mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }

        let shift = lo;
        let mut u: Vec<f64> = if k == 0 {
            vec![1.0; m]
        } else {
            // alternating start so higher modes are not orthogonal to it
            (0..m).map(|j| 1.0 + ((j * (k + 1)) as f64 * 0.61803).sin()).collect()
        };
        let tol = RESIDUAL_TOL * (1.0 + scale);
        let mut residual = f64::INFINITY;
        let mut lambda = 0.5 * (lo + hi);
        // an exact start vector (constants for constant h) is kept as is
        let start_norm = self.mass_norm2(&u).sqrt();
        u.iter_mut().for_each(|v| *v /= start_norm);
        let start_value = self.rayleigh_quotient(&u);
        // Sturm counts carry rounding of order eps * scale per pivot
        let count_slack = BISECTION_TOL.max(64.0 * f64::EPSILON * (1.0 + scale));
        if (start_value - lambda).abs() <= count_slack && self.residual_norm(&u, start_value) < tol {
            lambda = start_value;
            residual = self.residual_norm(&u, lambda);
        }
        for _ in 0..INVERSE_ITERATIONS {
            if residual < tol {
                break;
            }
            let rhs: Vec<f64> = u.iter().zip(w).map(|(x, wj)| x * wj).collect();
            let x = solve_shifted(&diag, &off, w, shift, &rhs)?;
            let norm = self.mass_norm2(&x).sqrt();
            if !(norm.is_finite() && norm > 0.0) {
                return Err(Error::solver("inverse iteration produced a degenerate vector"));
            }
            u = x.into_iter().map(|v| v / norm).collect();
            lambda = self.rayleigh_quotient(&u);
            residual = self.residual_norm(&u, lambda);
            if residual < tol {
                break;
            }
        }
        if !(residual < tol) {
            return Err(Error::solver(format!(
                "inverse iteration for eigenvalue {k} stalled at residual {residual:e}"
            )));
        }
        if u.iter().sum::<f64>() < 0.0 {
            u.iter_mut().for_each(|v| *v = -*v);
        }
        Ok(Eigenpair {
            value: lambda,
            vector: u,
            residual,
        })
    }

    /// `|K u - lambda M u|` in the `M^{-1}` norm, over `|u|_M`.
    pub fn residual_norm(&self, u: &[f64], lambda: f64) -> f64 {
        let ku = self.apply_stiffness(u);
        let w = self.mass();
        let r: f64 = ku
            .iter()
            .zip(u)
            .zip(w)
            .map(|((k, x), wj)| (k - lambda * wj * x).powi(2) / wj)
            .sum();
        r.sqrt() / self.mass_norm2(u).sqrt()
    }
}

const BISECTION_TOL: f64 = 1e-10;
const RESIDUAL_TOL: f64 = 1e-9;
const INVERSE_ITERATIONS: usize = 8;

/// Eigenvalue, `M`-normalized eigenvector and residual.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigenpair {
    pub value: f64,
    pub vector: Vec<f64>,
    pub residual: f64,
}

/// Negative pivots of the `LDL^T` factorization of `K - lambda M`.
pub fn sturm_count(diag: &[f64], off: &[f64], mass: &[f64], lambda: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for j in 0..diag.len() {
        let d = diag[j] - lambda * mass[j];
        q = if j == 0 { d } else { d - off[j - 1] * off[j - 1] / q };
        if q == 0.0 {
            q = -f64::EPSILON * (diag[j].abs() + (lambda * mass[j]).abs()).max(f64::MIN_POSITIVE);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Solves `(K - shift M) x = rhs` by tridiagonal elimination.
fn solve_shifted(diag: &[f64], off: &[f64], mass: &[f64], shift: f64, rhs: &[f64]) -> Result<Vec<f64>> {
    let m = diag.len();
    let mut piv = vec![0.0; m];
    let mut y = vec![0.0; m];
    for j in 0..m {
        let d = diag[j] - shift * mass[j];
        let (p, r) = if j == 0 {
            (d, rhs[0])
        } else {
            let l = off[j - 1] / piv[j - 1];
            (d - l * off[j - 1], rhs[j] - l * y[j - 1])
        };
        piv[j] = if p == 0.0 {
            f64::EPSILON * (diag[j].abs() + 1.0)
        } else {
            p
        };
        y[j] = r;
    }
    let mut x = vec![0.0; m];
    for j in (0..m).rev() {
        let tail = if j + 1 < m { off[j] * x[j + 1] } else { 0.0 };
        x[j] = (y[j] - tail) / piv[j];
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::solver("shifted solve overflowed"));
    }
    Ok(x)
}

/// Ground state of `c_n Delta + h` on a radial grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SpectralResult {
    pub rho1: f64,
    pub eigenfunction: Vec<f64>,
    pub residual_norm: f64,
    pub grid: RadialGrid,
}

impl SpectralResult {
    fn from_forms(forms: &RadialForms) -> Result<Self> {
        let pair = forms.eigenpair(0)?;
        Ok(Self {
            rho1: pair.value,
            eigenfunction: pair.vector,
            residual_norm: pair.residual,
            grid: forms.grid().clone(),
        })
    }
}

/// Least eigenvalue `rho_1` of `c_n Delta + h` on `m` cells.
pub fn least_eigenvalue(h: &StepPotential, m: usize) -> Result<SpectralResult> {
    let grid = RadialGrid::new(h.n(), m)?;
    least_eigenvalue_on(&assemble_forms(h, &grid)?)
}

/// Least eigenvalue for prebuilt forms.
pub fn least_eigenvalue_on(forms: &RadialForms) -> Result<SpectralResult> {
    SpectralResult::from_forms(forms)
}

/// The lowest `count` eigenvalues, increasing.
pub fn radial_spectrum(h: &StepPotential, count: usize, m: usize) -> Result<Vec<f64>> {
    if count < 1 {
        return Err(Error::invalid("spectrum count must be at least 1"));
    }
    let grid = RadialGrid::new(h.n(), m)?;
    let forms = assemble_forms(h, &grid)?;
    (0..count).map(|k| forms.eigenpair(k).map(|p| p.value)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spheregeom::Radius;
    use approx::assert_abs_diff_eq;

    fn dim(n: usize) -> Dim {
        Dim::new(n).unwrap()
    }

    #[test]
    fn grid_measure_sums_to_sphere_volume() {
        for n in 3..=5 {
            let g = RadialGrid::new(dim(n), 64).unwrap();
            let total: f64 = g.cell_measure().iter().sum();
            assert_abs_diff_eq!(total, sphere_volume(dim(n)).unwrap(), epsilon = 1e-11);
            assert!(g.cell_measure().iter().all(|&w| w > 0.0));
        }
        assert!(RadialGrid::new(dim(3), 8).is_err());
        assert!(RadialGrid::new(dim(2), 32).is_err());
    }

    #[test]
    fn constant_function_forms() {
        let g = RadialGrid::new(dim(3), 200).unwrap();
        let omega = sphere_volume(dim(3)).unwrap();
        let u = vec![1.0; 200];
        let zero = assemble_forms(&StepPotential::zero(dim(3)).unwrap(), &g).unwrap();
        assert_eq!(zero.energy(&u), 0.0);
        assert_abs_diff_eq!(zero.mass_norm2(&u), omega, epsilon = 1e-11);
        let c = assemble_forms(&StepPotential::constant(dim(3), 2.5).unwrap(), &g).unwrap();
        assert_abs_diff_eq!(c.rayleigh_quotient(&u), 2.5, epsilon = 1e-13);
    }

    #[test]
    fn cos_mode_quotient_converges() {
        // cos r is the first zonal harmonic: Delta cos = n cos, so Q/M -> c_3 * 3 = 24
        let mut prev = f64::INFINITY;
        for m in [100, 400, 1600] {
            let g = RadialGrid::new(dim(3), m).unwrap();
            let f = assemble_forms(&StepPotential::zero(dim(3)).unwrap(), &g).unwrap();
            let u: Vec<f64> = g.centers().iter().map(|r| r.cos()).collect();
            let err = (f.rayleigh_quotient(&u) - 24.0).abs();
            assert!(err < prev);
            prev = err;
        }
        assert!(prev < 1e-3);
    }

    #[test]
    fn stiffness_matches_energy() {
        let h = StepPotential::new(dim(4), 3.0, Radius::new(1.0).unwrap(), 2.0, Radius::new(0.7).unwrap()).unwrap();
        let g = RadialGrid::new(dim(4), 50).unwrap();
        let f = assemble_forms(&h, &g).unwrap();
        let u: Vec<f64> = g.centers().iter().map(|r| (2.0 * r).sin() + 0.3).collect();
        let ku = f.apply_stiffness(&u);
        let uku: f64 = ku.iter().zip(&u).map(|(a, b)| a * b).sum();
        assert_abs_diff_eq!(uku, f.energy(&u), epsilon = 1e-10 * f.energy(&u).abs());
    }

    #[test]
    fn zero_potential_ground_state() {
        let r = least_eigenvalue(&StepPotential::zero(dim(3)).unwrap(), 200).unwrap();
        assert_eq!(r.rho1, 0.0);
        let (min, max) = r
            .eigenfunction
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
        assert!(min > 0.0);
        assert!((max - min) / max < 1e-8);
    }

    #[test]
    fn round_sphere_potential() {
        let r = least_eigenvalue(&StepPotential::constant(dim(3), 6.0).unwrap(), 500).unwrap();
        assert_abs_diff_eq!(r.rho1, 6.0, epsilon = 1e-9);
    }

    #[test]
    fn half_cap_potential_is_bracketed() {
        let h = StepPotential::new(dim(3), 10.0, Radius::new(PI / 2.0).unwrap(), 0.0, Radius::ZERO).unwrap();
        let r = least_eigenvalue(&h, 400).unwrap();
        assert!(r.rho1 > 0.0 && r.rho1 < 5.0);
        assert!(r.eigenfunction.iter().all(|&v| v > 0.0));
    }

    #[test]
    fn spectrum_is_increasing_and_shifts() {
        let h = StepPotential::new(dim(3), 4.0, Radius::new(2.0).unwrap(), 1.0, Radius::new(0.5).unwrap()).unwrap();
        let s = radial_spectrum(&h, 4, 300).unwrap();
        assert!(s.windows(2).all(|w| w[1] > w[0]));

        let g = RadialGrid::new(dim(3), 300).unwrap();
        let f = assemble_forms(&h, &g).unwrap();
        let base = f.eigenpair(1).unwrap().value;
        let shifted = f.shifted(7.5).eigenpair(1).unwrap().value;
        assert_abs_diff_eq!(shifted, base + 7.5, epsilon = 1e-9);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let g = RadialGrid::new(dim(3), 32).unwrap();
        assert!(assemble_forms(&StepPotential::zero(dim(4)).unwrap(), &g).is_err());
        assert!(radial_spectrum(&StepPotential::zero(dim(3)).unwrap(), 0, 32).is_err());
    }

    #[test]
    fn sturm_count_on_diagonal_pencil() {
        let diag = [1.0, 4.0, 9.0];
        let off = [0.0, 0.0];
        let mass = [1.0, 2.0, 3.0];
        // eigenvalues 1, 2, 3
        assert_eq!(sturm_count(&diag, &off, &mass, 0.5), 0);
        assert_eq!(sturm_count(&diag, &off, &mass, 2.5), 2);
        assert_eq!(sturm_count(&diag, &off, &mass, 10.0), 3);
    }
}
