//! Geometry of the round unit sphere `S^n`.
//!
//! Radial coordinates are geodesic distance from the north pole. Volumes of
//! geodesic caps and their inverses feed the rearrangement and potential
//! code; the model isoperimetric profile is computed from the same pieces.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadratureSpec};

/// Dimension of a sphere or manifold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Dim(usize);

impl Dim {
    pub fn new(n: usize) -> Result<Self> {
        if n < 1 {
            return Err(Error::Dimension { got: n, min: 1 });
        }
        Ok(Dim(n))
    }

    pub fn get(self) -> usize {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64
    }

    pub(crate) fn require(self, min: usize) -> Result<Self> {
        if self.0 < min {
            Err(Error::Dimension { got: self.0, min })
        } else {
            Ok(self)
        }
    }

    /// `c_n = 4(n-1)/(n-2)`, the coefficient of the Laplacian in the
    /// conformal Laplacian.
    pub fn conformal_constant(self) -> Result<f64> {
        let n = self.require(3)?.as_f64();
        Ok(4.0 * (n - 1.0) / (n - 2.0))
    }

    /// Critical Sobolev exponent `p = 2n/(n-2)`.
    pub fn critical_exponent(self) -> Result<f64> {
        let n = self.require(3)?.as_f64();
        Ok(2.0 * n / (n - 2.0))
    }
}

/// Geodesic distance on the unit sphere, in `[0, pi]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Radius(f64);

impl Radius {
    pub const ZERO: Radius = Radius(0.0);
    pub const PI: Radius = Radius(PI);

    pub fn new(r: f64) -> Result<Self> {
        if (0.0..=PI).contains(&r) {
            Ok(Radius(r))
        } else {
            Err(Error::out_of_range("radius", r, "[0, pi]"))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }

    /// The antipodal distance `pi - r`.
    pub fn complement(self) -> Radius {
        Radius((PI - self.0).max(0.0))
    }
}

impl TryFrom<f64> for Radius {
    type Error = Error;
    fn try_from(r: f64) -> Result<Self> {
        Radius::new(r)
    }
}

impl From<Radius> for f64 {
    fn from(r: Radius) -> f64 {
        r.0
    }
}

/// Integrand `sin^{n-1} t` of all radial volume integrals.
pub(crate) fn radial_density(n: Dim, t: f64) -> f64 {
    t.sin().powi(n.get() as i32 - 1)
}

/// `int_lo^hi sin^{n-1} t dt`.
pub(crate) fn sine_power_integral(n: Dim, lo: f64, hi: f64) -> Result<f64> {
    integrate(|t| radial_density(n, t), lo, hi, &QuadratureSpec::default())
}

/// `sigma_n = int_0^pi sin^{n-1} t dt`.
pub fn sigma(n: Dim) -> Result<f64> {
    let n = n.require(2)?;
    sine_power_integral(n, 0.0, PI)
}

/// Volume `omega_n` of the unit `n`-sphere, by `omega_n = omega_{n-1} sigma_n`.
pub fn sphere_volume(n: Dim) -> Result<f64> {
    let mut omega = 2.0 * PI;
    for k in 2..=n.get() {
        omega *= sigma(Dim(k))?;
    }
    Ok(omega)
}

/// Volume of the geodesic ball of radius `r` (about either pole).
pub fn cap_volume(n: Dim, r: f64) -> Result<f64> {
    let n = n.require(2)?;
    let r = Radius::new(r)?;
    Ok(sphere_volume(Dim(n.get() - 1))? * sine_power_integral(n, 0.0, r.get())?)
}

/// Normalized cap volume `vol B(r) / omega_n`.
pub fn cap_fraction(n: Dim, r: f64) -> Result<f64> {
    let n = n.require(2)?;
    let r = Radius::new(r)?;
    Ok(sine_power_integral(n, 0.0, r.get())? / sigma(n)?)
}

/// Radius at which bisection stops, in absolute terms.
const RADIUS_TOL: f64 = 1e-12;

/// Inverts [`cap_fraction`]: the radius whose cap holds fraction `s` of the
/// sphere.
pub fn cap_radius_for_fraction(n: Dim, s: f64) -> Result<Radius> {
    let n = n.require(2)?;
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::out_of_range("volume fraction", s, "[0, 1]"));
    }
    if s == 0.0 {
        return Ok(Radius::ZERO);
    }
    if s == 1.0 {
        return Ok(Radius::PI);
    }
    let total = sigma(n)?;
    let (mut lo, mut hi) = (0.0, PI);
    while hi - lo > RADIUS_TOL {
        let mid = 0.5 * (lo + hi);
        if sine_power_integral(n, 0.0, mid)? / total < s {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Radius::new(0.5 * (lo + hi))
}

/// Model isoperimetric profile `Is(s)`: boundary area of the cap holding
/// fraction `s`, over `omega_n`.
pub fn iso_profile(n: Dim, s: f64) -> Result<f64> {
    let n = n.require(2)?;
    let r = cap_radius_for_fraction(n, s)?;
    // the empty and the full cap have no boundary; sin(pi) is not 0 in f64
    if s == 0.0 || s == 1.0 {
        return Ok(0.0);
    }
    let boundary = sphere_volume(Dim(n.get() - 1))? * radial_density(n, r.get());
    Ok(boundary / sphere_volume(n)?)
}
