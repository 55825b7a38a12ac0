//! Manifold summary data and the model step potential on `S^n`.
//!
//! The scalar curvature `R` of the manifold enters only through the sup and
//! `L^1` norm of its positive and negative parts. These fix two polar caps on
//! the model sphere, a south cap carrying `(d/a)^2 sup R_+` and a north cap
//! carrying `-(d/a)^2 sup R_-`.

use serde::{Deserialize, Serialize};

use crate::bbg::BbgConstant;
use crate::error::{Error, Result};
use crate::spheregeom::{self, cap_radius_for_fraction, sphere_volume, Dim, Radius};

/// Relative slack accepted in `l1 <= V * sup`.
const L1_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ScalarCurvatureStats {
    pub sup_plus: f64,
    pub sup_minus: f64,
    pub l1_plus: f64,
    pub l1_minus: f64,
}

impl ScalarCurvatureStats {
    /// Statistics of a constant scalar curvature `r` on volume `volume`.
    pub fn constant(r: f64, volume: f64) -> Self {
        if r >= 0.0 {
            Self {
                sup_plus: r,
                sup_minus: 0.0,
                l1_plus: r * volume,
                l1_minus: 0.0,
            }
        } else {
            Self {
                sup_plus: 0.0,
                sup_minus: -r,
                l1_plus: 0.0,
                l1_minus: -r * volume,
            }
        }
    }

    fn validate(&self, volume: f64) -> Result<()> {
        let fields = [
            ("supPlus", self.sup_plus),
            ("supMinus", self.sup_minus),
            ("l1Plus", self.l1_plus),
            ("l1Minus", self.l1_minus),
        ];
        for (name, v) in fields {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::invalid(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        for (part, l1, sup) in [("R+", self.l1_plus, self.sup_plus), ("R-", self.l1_minus, self.sup_minus)] {
            if l1 > volume * sup * (1.0 + L1_SLACK) {
                return Err(Error::invalid(format!(
                    "L1 norm of {part} ({l1}) exceeds volume * sup ({})",
                    volume * sup
                )));
            }
        }
        Ok(())
    }
}

/// Unvalidated wire form of [`ManifoldSummary`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct SummaryRecord {
    pub n: usize,
    pub diameter: f64,
    pub volume: f64,
    pub ricci_lower_bound: f64,
    pub scalar: ScalarCurvatureStats,
}

/// Scalar description of a closed Riemannian manifold `(M, g)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SummaryRecord", into = "SummaryRecord")]
pub struct ManifoldSummary {
    n: Dim,
    diameter: f64,
    volume: f64,
    ricci_lower_bound: f64,
    scalar: ScalarCurvatureStats,
}

impl TryFrom<SummaryRecord> for ManifoldSummary {
    type Error = Error;
    fn try_from(raw: SummaryRecord) -> Result<Self> {
        ManifoldSummary::new(raw.n, raw.diameter, raw.volume, raw.ricci_lower_bound, raw.scalar)
    }
}

impl From<ManifoldSummary> for SummaryRecord {
    fn from(s: ManifoldSummary) -> Self {
        SummaryRecord {
            n: s.n.get(),
            diameter: s.diameter,
            volume: s.volume,
            ricci_lower_bound: s.ricci_lower_bound,
            scalar: s.scalar,
        }
    }
}

impl ManifoldSummary {
    pub fn new(
        n: usize,
        diameter: f64,
        volume: f64,
        ricci_lower_bound: f64,
        scalar: ScalarCurvatureStats,
    ) -> Result<Self> {
        let n = Dim::new(n)?.require(3)?;
        if !(diameter.is_finite() && diameter > 0.0) {
            return Err(Error::invalid(format!("diameter must be positive, got {diameter}")));
        }
        if !(volume.is_finite() && volume > 0.0) {
            return Err(Error::invalid(format!("volume must be positive, got {volume}")));
        }
        if !ricci_lower_bound.is_finite() {
            return Err(Error::invalid("Ricci lower bound must be finite"));
        }
        scalar.validate(volume)?;
        Ok(Self {
            n,
            diameter,
            volume,
            ricci_lower_bound,
            scalar,
        })
    }

    /// The round sphere of radius `t`.
    pub fn round_sphere(n: usize, t: f64) -> Result<Self> {
        let dim = Dim::new(n)?;
        let nf = n as f64;
        let volume = t.powi(n as i32) * sphere_volume(dim)?;
        let r = nf * (nf - 1.0) / (t * t);
        Self::new(
            n,
            std::f64::consts::PI * t,
            volume,
            (nf - 1.0) / (t * t),
            ScalarCurvatureStats::constant(r, volume),
        )
    }

    pub fn n(&self) -> Dim {
        self.n
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn volume(&self) -> f64 {
        self.volume
    }

    pub fn ricci_lower_bound(&self) -> f64 {
        self.ricci_lower_bound
    }

    pub fn scalar(&self) -> &ScalarCurvatureStats {
        &self.scalar
    }

    /// `beta = V / omega_n`.
    pub fn beta(&self) -> Result<f64> {
        Ok(self.volume / sphere_volume(self.n)?)
    }
}

/// Radial step potential `h = h_+ - h_-` on `S^n`, with `r` measured from
/// the north pole.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PotentialRecord", into = "PotentialRecord")]
pub struct StepPotential {
    n: Dim,
    c_plus: f64,
    r1: Radius,
    c_minus: f64,
    r2: Radius,
}

/// Unvalidated wire form of [`StepPotential`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct PotentialRecord {
    pub n: usize,
    pub c_plus: f64,
    pub r1: f64,
    pub c_minus: f64,
    pub r2: f64,
}

impl TryFrom<PotentialRecord> for StepPotential {
    type Error = Error;
    fn try_from(raw: PotentialRecord) -> Result<Self> {
        StepPotential::new(
            Dim::new(raw.n)?,
            raw.c_plus,
            Radius::new(raw.r1)?,
            raw.c_minus,
            Radius::new(raw.r2)?,
        )
    }
}

impl From<StepPotential> for PotentialRecord {
    fn from(h: StepPotential) -> Self {
        PotentialRecord {
            n: h.n.get(),
            c_plus: h.c_plus,
            r1: h.r1.get(),
            c_minus: h.c_minus,
            r2: h.r2.get(),
        }
    }
}

impl StepPotential {
    pub fn new(n: Dim, c_plus: f64, r1: Radius, c_minus: f64, r2: Radius) -> Result<Self> {
        let n = n.require(2)?;
        for (name, c) in [("cPlus", c_plus), ("cMinus", c_minus)] {
            if !c.is_finite() || c < 0.0 {
                return Err(Error::invalid(format!("{name} must be finite and >= 0, got {c}")));
            }
        }
        Ok(Self {
            n,
            c_plus,
            r1,
            c_minus,
            r2,
        })
    }

    /// `h = c` on the whole sphere.
    pub fn constant(n: Dim, c: f64) -> Result<Self> {
        if c >= 0.0 {
            Self::new(n, c, Radius::PI, 0.0, Radius::ZERO)
        } else {
            Self::new(n, 0.0, Radius::ZERO, -c, Radius::PI)
        }
    }

    pub fn zero(n: Dim) -> Result<Self> {
        Self::constant(n, 0.0)
    }

    pub fn n(&self) -> Dim {
        self.n
    }

    pub fn c_plus(&self) -> f64 {
        self.c_plus
    }

    pub fn c_minus(&self) -> f64 {
        self.c_minus
    }

    pub fn r1(&self) -> Radius {
        self.r1
    }

    pub fn r2(&self) -> Radius {
        self.r2
    }

    /// Lower edge `pi - r1` of the south cap.
    fn south_edge(&self) -> f64 {
        std::f64::consts::PI - self.r1.get()
    }

    /// Point value with closed caps.
    pub fn eval(&self, r: f64) -> Result<f64> {
        let r = Radius::new(r)?.get();
        let mut h = 0.0;
        if self.r1.get() > 0.0 && r >= self.south_edge() {
            h += self.c_plus;
        }
        if self.r2.get() > 0.0 && r <= self.r2.get() {
            h -= self.c_minus;
        }
        Ok(h)
    }

    /// Exact average of `h` over the shell `lo <= r <= hi` against the sphere
    /// measure.
    pub fn shell_average(&self, lo: f64, hi: f64) -> Result<f64> {
        let measure = spheregeom::sine_power_integral(self.n, lo, hi)?;
        let portion = |a: f64, b: f64| -> Result<f64> {
            let (a, b) = (a.max(lo), b.min(hi));
            if b <= a {
                Ok(0.0)
            } else if a <= lo && b >= hi {
                Ok(1.0)
            } else {
                Ok(spheregeom::sine_power_integral(self.n, a, b)? / measure)
            }
        };
        let mut h = 0.0;
        if self.r1.get() > 0.0 && self.c_plus != 0.0 {
            h += self.c_plus * portion(self.south_edge(), std::f64::consts::PI)?;
        }
        if self.r2.get() > 0.0 && self.c_minus != 0.0 {
            h -= self.c_minus * portion(0.0, self.r2.get())?;
        }
        Ok(h)
    }

    /// `omega_n^{-1} int h dv`, the Rayleigh quotient of the constant function.
    pub fn mean(&self) -> Result<f64> {
        let plus = spheregeom::cap_fraction(self.n, self.r1.get())?;
        let minus = spheregeom::cap_fraction(self.n, self.r2.get())?;
        Ok(self.c_plus * plus - self.c_minus * minus)
    }

    /// `min h` over the sphere.
    pub fn min_value(&self) -> f64 {
        let pi = std::f64::consts::PI;
        let mut marks = vec![0.0, self.r2.get(), self.south_edge(), pi];
        marks.sort_by(f64::total_cmp);
        let mut probes = marks.clone();
        probes.extend(marks.windows(2).map(|w| 0.5 * (w[0] + w[1])));
        probes
            .into_iter()
            .filter_map(|r| self.eval(r.clamp(0.0, pi)).ok())
            .fold(f64::INFINITY, f64::min)
    }
}

/// Point evaluation of `h` at distance `r` from the north pole.
pub fn eval_potential(h: &StepPotential, r: f64) -> Result<f64> {
    h.eval(r)
}

/// Cap radii `(r1, r2)` holding the normalized `L^1` mass ratios of `R_+` and
/// `R_-`. An identically vanishing part gives an empty cap.
pub fn cap_radii(summary: &ManifoldSummary) -> Result<(Radius, Radius)> {
    let s = summary.scalar();
    let v = summary.volume();
    let radius = |l1: f64, sup: f64| -> Result<Radius> {
        if sup == 0.0 {
            return Ok(Radius::ZERO);
        }
        if l1 > v * sup * (1.0 + L1_SLACK) {
            return Err(Error::invalid("L1 norm exceeds volume * sup"));
        }
        cap_radius_for_fraction(summary.n(), (l1 / (v * sup)).min(1.0))
    };
    Ok((radius(s.l1_plus, s.sup_plus)?, radius(s.l1_minus, s.sup_minus)?))
}

/// Builds `h_+ - h_-` with heights `(d/a)^2 sup R_+-`.
pub fn build_potential(summary: &ManifoldSummary, a: &BbgConstant) -> Result<StepPotential> {
    if !(a.value > 0.0) {
        return Err(Error::invalid(format!(
            "comparison constant must be positive, got {}",
            a.value
        )));
    }
    let scale = (summary.diameter() / a.value).powi(2);
    let (r1, r2) = cap_radii(summary)?;
    let s = summary.scalar();
    StepPotential::new(summary.n(), scale * s.sup_plus, r1, scale * s.sup_minus, r2)
}
