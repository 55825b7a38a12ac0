//! Lower bounds for `mu_1(M)` and `lambda(M)` from summary data, the
//! conformal-sphere test, and a catalog of reference summaries.
//!
//! With `a` the comparison constant, `d` the diameter and `beta = V / omega_n`:
//!
//! ```text
//! mu_1(M)   >= (a/d)^2 rho_1(S^n)
//! lambda(M) >= (a/d)^2 beta^{2/n} rho(S^n)
//! ```
//!
//! where `rho_1` and `rho` are the linear and nonlinear least eigenvalues of
//! the model step potential. If the right side of the second line reaches
//! `lambda(S^n)` under a positive-curvature hypothesis, `M` is conformally
//! diffeomorphic to the round sphere.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::bbg::{bbg_constant, best_hypothesis, BbgConstant, Hypothesis};
use crate::error::{Error, Result};
use crate::potential::{build_potential, ManifoldSummary, ScalarCurvatureStats, StepPotential};
use crate::spectral::least_eigenvalue;
use crate::spheregeom::{sphere_volume, Dim, Radius};
use crate::yamabe::{minimize_quotient, YamabeOptions};

pub const RADIAL_CAVEAT: &str =
    "rho is the infimum over radial profiles only; a non-radial function could lower it";
pub const NOT_CONVERGED_CAVEAT: &str =
    "the rho descent did not converge; the reported rho is the best value found";
pub const CONSTANT_R_CAVEAT: &str =
    "scalar curvature is constant; lambda(M) = R V^{2/n} holds only if constants minimize the Yamabe quotient, which is not checked";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BoundsOptions {
    /// Cells for the linear eigenvalue.
    pub spectral_grid: usize,
    pub yamabe: YamabeOptions,
    /// Relative tolerance of the conformal-sphere decision.
    pub rigidity_tol: f64,
}

impl Default for BoundsOptions {
    fn default() -> Self {
        Self {
            spectral_grid: 2000,
            yamabe: YamabeOptions::default(),
            rigidity_tol: 1e-3,
        }
    }
}

impl BoundsOptions {
    pub fn validate(&self) -> Result<()> {
        if self.spectral_grid < crate::spectral::MIN_CELLS {
            return Err(Error::invalid(format!(
                "grid size {} is below {}",
                self.spectral_grid,
                crate::spectral::MIN_CELLS
            )));
        }
        if !(self.rigidity_tol >= 0.0 && self.rigidity_tol.is_finite()) {
            return Err(Error::invalid("rigidity tolerance must be finite and >= 0"));
        }
        self.yamabe.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rigidity {
    ConformalSphere,
    Inconclusive,
    NotApplicable,
}

impl Rigidity {
    pub fn label(self) -> &'static str {
        match self {
            Rigidity::ConformalSphere => "conformal-sphere",
            Rigidity::Inconclusive => "inconclusive",
            Rigidity::NotApplicable => "not-applicable",
        }
    }
}

/// Verdict of the conformal-sphere test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RigidityOutcome {
    pub verdict: Rigidity,
    /// `(a/d)^2 beta^{2/n} rho` under the positive-curvature hypothesis.
    pub bound: Option<f64>,
    /// `bound - lambda(S^n)`.
    pub margin: Option<f64>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BoundsReport {
    pub summary_echo: ManifoldSummary,
    pub hypothesis: Hypothesis,
    pub a: f64,
    pub a_over_d2: f64,
    pub beta: f64,
    pub r1: Radius,
    pub r2: Radius,
    pub c_plus: f64,
    pub c_minus: f64,
    pub rho1: f64,
    pub rho: f64,
    pub rho_converged: bool,
    pub mu1_lower_bound: f64,
    pub lambda_lower_bound: f64,
    pub lambda_sphere: f64,
    /// `lambdaLowerBound - lambdaSphere`.
    pub lambda_margin: f64,
    pub rigidity: Rigidity,
    pub caveats: Vec<String>,
    /// Closed-form bounds, present when `Ric >= n-1`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corollary: Option<CorollaryBounds>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CorollaryBounds {
    pub mu1: f64,
    pub lambda: f64,
}

/// `lambda(S^n) = n(n-1) omega_n^{2/n}`.
pub fn lambda_sphere(n: Dim) -> Result<f64> {
    let n = n.require(3)?;
    let k = n.as_f64();
    Ok(k * (k - 1.0) * sphere_volume(n)?.powf(2.0 / k))
}

fn scale(summary: &ManifoldSummary, a: &BbgConstant) -> f64 {
    (a.value / summary.diameter()).powi(2)
}

/// `(a/d)^2 rho_1` under the best hypothesis.
pub fn mu1_lower_bound(summary: &ManifoldSummary, grid_size: usize) -> Result<f64> {
    let a = best_hypothesis(summary)?;
    let h = build_potential(summary, &a)?;
    Ok(scale(summary, &a) * least_eigenvalue(&h, grid_size)?.rho1)
}

struct NonlinearBound {
    value: f64,
    rho: f64,
    converged: bool,
}

fn nonlinear_bound(summary: &ManifoldSummary, a: &BbgConstant, opts: &YamabeOptions) -> Result<NonlinearBound> {
    let h = build_potential(summary, a)?;
    let res = minimize_quotient(&h, opts)?;
    let beta = summary.beta()?;
    Ok(NonlinearBound {
        value: scale(summary, a) * beta.powf(2.0 / summary.n().as_f64()) * res.rho,
        rho: res.rho,
        converged: res.converged,
    })
}

/// `(a/d)^2 beta^{2/n} rho` under the best hypothesis.
pub fn lambda_lower_bound(summary: &ManifoldSummary, opts: &YamabeOptions) -> Result<f64> {
    Ok(nonlinear_bound(summary, &best_hypothesis(summary)?, opts)?.value)
}

/// The positive-curvature hypothesis, or why there is none.
fn positive_hypothesis(summary: &ManifoldSummary) -> std::result::Result<Hypothesis, String> {
    let r0 = summary.ricci_lower_bound();
    if !(r0 > 0.0) {
        return Err(format!(
            "rigidity needs a positive Ricci lower bound, got {r0}"
        ));
    }
    let s = summary.scalar();
    if s.sup_minus > 0.0 || s.l1_minus > 0.0 {
        return Err(
            "rigidity needs R >= n r0 > 0, but the summary has a negative scalar-curvature part".to_string(),
        );
    }
    let nm1 = summary.n().as_f64() - 1.0;
    let alpha = (summary.diameter() * (r0 / nm1).sqrt()).min(PI);
    Hypothesis::new(1, alpha).map_err(|e| e.to_string())
}

fn decide(bound: &NonlinearBound, sphere: f64, tol: f64) -> RigidityOutcome {
    let margin = bound.value - sphere;
    let mut notes = Vec::new();
    let verdict = if !bound.converged {
        notes.push(NOT_CONVERGED_CAVEAT.to_string());
        Rigidity::Inconclusive
    } else if bound.value >= sphere * (1.0 - tol) {
        Rigidity::ConformalSphere
    } else {
        Rigidity::Inconclusive
    };
    RigidityOutcome {
        verdict,
        bound: Some(bound.value),
        margin: Some(margin),
        notes,
    }
}

fn not_applicable(note: String) -> RigidityOutcome {
    RigidityOutcome {
        verdict: Rigidity::NotApplicable,
        bound: None,
        margin: None,
        notes: vec![note],
    }
}

/// Tests whether `(a/d)^2 beta^{2/n} rho >= lambda(S^n)` under the
/// positive-curvature hypothesis. Solver failures give `inconclusive`.
pub fn rigidity_test(summary: &ManifoldSummary, opts: &BoundsOptions) -> RigidityOutcome {
    let hyp = match positive_hypothesis(summary) {
        Ok(h) => h,
        Err(note) => return not_applicable(note),
    };
    let computed = bbg_constant(summary.n(), hyp)
        .and_then(|a| nonlinear_bound(summary, &a, &opts.yamabe))
        .and_then(|b| Ok((b, lambda_sphere(summary.n())?)));
    match computed {
        Ok((b, sphere)) => decide(&b, sphere, opts.rigidity_tol),
        Err(e) => RigidityOutcome {
            verdict: Rigidity::Inconclusive,
            bound: None,
            margin: None,
            notes: vec![format!("rigidity bound could not be computed: {e}")],
        },
    }
}

/// Closed-form bounds `(n(n-1), n(n-1) V^{2/n})` under `Ric >= n-1`.
pub fn corollary_bounds(summary: &ManifoldSummary) -> Result<(f64, f64)> {
    let k = summary.n().as_f64();
    let r0 = summary.ricci_lower_bound();
    if r0 < k - 1.0 {
        return Err(Error::invalid(format!(
            "closed-form bounds need Ric >= n-1 = {}, got {r0}",
            k - 1.0
        )));
    }
    let mu = k * (k - 1.0);
    Ok((mu, mu * summary.volume().powf(2.0 / k)))
}

fn has_constant_scalar_curvature(summary: &ManifoldSummary) -> bool {
    let s = summary.scalar();
    let v = summary.volume();
    let flat = |l1: f64, sup: f64| sup == 0.0 || ((l1 - v * sup) / (v * sup)).abs() < 1e-12;
    let one_sided = s.sup_plus == 0.0 || s.sup_minus == 0.0;
    one_sided && flat(s.l1_plus, s.sup_plus) && flat(s.l1_minus, s.sup_minus)
}

/// Full report: both bounds under the best hypothesis and the rigidity test.
pub fn bounds_report(summary: &ManifoldSummary, opts: &BoundsOptions) -> Result<BoundsReport> {
    opts.validate()?;
    let n = summary.n();
    let a = best_hypothesis(summary)?;
    let h: StepPotential = build_potential(summary, &a)?;
    let a_over_d2 = scale(summary, &a);
    let beta = summary.beta()?;
    let rho1 = least_eigenvalue(&h, opts.spectral_grid)?.rho1;
    let nl = nonlinear_bound(summary, &a, &opts.yamabe)?;
    let sphere = lambda_sphere(n)?;

    let rigidity = match positive_hypothesis(summary) {
        Err(note) => not_applicable(note),
        Ok(hyp) if hyp == a.hypothesis => decide(&nl, sphere, opts.rigidity_tol),
        Ok(_) => rigidity_test(summary, opts),
    };

    let mut caveats = vec![RADIAL_CAVEAT.to_string()];
    if !nl.converged {
        caveats.push(NOT_CONVERGED_CAVEAT.to_string());
    }
    if has_constant_scalar_curvature(summary) {
        caveats.push(CONSTANT_R_CAVEAT.to_string());
    }
    if nl.value > sphere * (1.0 + opts.rigidity_tol) {
        caveats.push(format!(
            "the lambda bound exceeds lambda(S^n) = {sphere}, which no manifold can satisfy"
        ));
    }
    for note in &rigidity.notes {
        if !caveats.contains(note) {
            caveats.push(note.clone());
        }
    }

    Ok(BoundsReport {
        summary_echo: *summary,
        hypothesis: a.hypothesis,
        a: a.value,
        a_over_d2,
        beta,
        r1: h.r1(),
        r2: h.r2(),
        c_plus: h.c_plus(),
        c_minus: h.c_minus(),
        rho1,
        rho: nl.rho,
        rho_converged: nl.converged,
        mu1_lower_bound: a_over_d2 * rho1,
        lambda_lower_bound: nl.value,
        lambda_sphere: sphere,
        lambda_margin: nl.value - sphere,
        rigidity: rigidity.verdict,
        caveats,
        corollary: corollary_bounds(summary)
            .ok()
            .map(|(mu1, lambda)| CorollaryBounds { mu1, lambda }),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CatalogEntry {
    pub name: String,
    pub summary: ManifoldSummary,
    pub known_lambda: Option<f64>,
    pub note: String,
}

/// Flat torus with the given diameter and volume.
pub fn flat_torus(n: usize, diameter: f64, volume: f64) -> Result<ManifoldSummary> {
    ManifoldSummary::new(n, diameter, volume, 0.0, ScalarCurvatureStats::constant(0.0, volume))
}

/// Product of two unit 2-spheres.
pub fn s2_times_s2() -> Result<ManifoldSummary> {
    let volume = 16.0 * PI * PI;
    ManifoldSummary::new(
        4,
        PI * 2f64.sqrt(),
        volume,
        1.0,
        ScalarCurvatureStats::constant(4.0, volume),
    )
}

/// Built-in reference summaries.
pub fn catalog() -> Result<Vec<CatalogEntry>> {
    let mut out = Vec::new();
    for n in [3usize, 4, 5] {
        out.push(CatalogEntry {
            name: format!("S{n}-round"),
            summary: ManifoldSummary::round_sphere(n, 1.0)?,
            known_lambda: Some(lambda_sphere(Dim::new(n)?)?),
            note: "unit round sphere; lambda is n(n-1) omega_n^{2/n}".to_string(),
        });
    }
    for (n, t) in [(3usize, 2.0), (4, 0.5)] {
        out.push(CatalogEntry {
            name: format!("S{n}-radius-{t}"),
            summary: ManifoldSummary::round_sphere(n, t)?,
            known_lambda: Some(lambda_sphere(Dim::new(n)?)?),
            note: format!("round sphere of radius {t}; lambda is scale invariant"),
        });
    }
    out.push(CatalogEntry {
        name: "T3-flat".to_string(),
        summary: flat_torus(3, 3f64.sqrt() / 2.0, 1.0)?,
        known_lambda: Some(0.0),
        note: "unit cubic flat torus; scalar-flat conformal class".to_string(),
    });
    out.push(CatalogEntry {
        name: "S2xS2".to_string(),
        summary: s2_times_s2()?,
        known_lambda: None,
        note: "product of unit 2-spheres; not conformally spherical".to_string(),
    });
    Ok(out)
}

/// Looks up a catalog entry by name.
pub fn catalog_entry(name: &str) -> Result<CatalogEntry> {
    catalog()?
        .into_iter()
        .find(|e| e.name == name)
        .ok_or_else(|| Error::invalid(format!("no catalog entry named {name:?}")))
}
