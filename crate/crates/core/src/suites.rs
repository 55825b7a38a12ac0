//! Seeded randomized checks of the identities and inequalities behind the
//! bounds. Each instance yields a slack; an instance passes when its slack is
//! nonnegative.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::{cap_radii, ManifoldSummary, ScalarCurvatureStats, StepPotential};
use crate::rearrange::{
    decreasing_rearrangement, gamma_pair, hlp_lower_bound, increasing_rearrangement, power_integral,
    steffensen_bounds, MeasuredFunction, StepProfile,
};
use crate::spectral::{assemble_forms, least_eigenvalue_on, RadialGrid};
use crate::spheregeom::{cap_volume, sphere_volume, Dim, Radius};

/// Relative tolerance of the step-arithmetic identities.
pub const EQUIMEASURABLE_TOL: f64 = 1e-12;
/// Relative slack in the HLP inequality.
pub const HLP_TOL: f64 = 1e-10;
/// Relative slack in Steffensen's inequality, against `(b-a) max|phi|`.
pub const STEFFENSEN_TOL: f64 = 1e-12;
/// Absolute tolerance of the gamma-to-cap-volume link.
pub const GAMMA_TOL: f64 = 1e-10;
/// Relative tolerance of `rho_1(h + c) = rho_1(h) + c`, against `1 + |rho_1| + |c|`.
pub const SHIFT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Steffensen,
    Hlp,
    Equimeasurability,
    GammaLink,
    ShiftIdentity,
}

impl Suite {
    pub const ALL: [Suite; 5] = [
        Suite::Steffensen,
        Suite::Hlp,
        Suite::Equimeasurability,
        Suite::GammaLink,
        Suite::ShiftIdentity,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Suite::Steffensen => "steffensen",
            Suite::Hlp => "hlp",
            Suite::Equimeasurability => "equimeasurability",
            Suite::GammaLink => "gamma-link",
            Suite::ShiftIdentity => "shift-identity",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.label() == s)
            .ok_or_else(|| Error::invalid(format!("unknown suite {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SuiteReport {
    pub suite: Suite,
    pub seed: u64,
    pub count: usize,
    pub failures: usize,
    /// Smallest slack over all instances.
    pub worst_slack: f64,
    pub first_failure: Option<String>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

struct Instance {
    slack: f64,
    detail: String,
}

/// Runs `count` seeded instances of `suite`.
pub fn run_suite(suite: Suite, seed: u64, count: usize) -> Result<SuiteReport> {
    if count == 0 {
        return Err(Error::invalid("instance count must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = 0;
    let mut worst = f64::INFINITY;
    let mut first_failure = None;
    for k in 0..count {
        let inst = match suite {
            Suite::Steffensen => steffensen_instance(&mut rng)?,
            Suite::Hlp => hlp_instance(&mut rng)?,
            Suite::Equimeasurability => equimeasurability_instance(&mut rng)?,
            Suite::GammaLink => gamma_link_instance(&mut rng)?,
            Suite::ShiftIdentity => shift_identity_instance(&mut rng)?,
        };
        worst = worst.min(inst.slack);
        if !(inst.slack >= 0.0) {
            failures += 1;
            first_failure.get_or_insert_with(|| format!("instance {k}: {}", inst.detail));
        }
    }
    Ok(SuiteReport {
        suite,
        seed,
        count,
        failures,
        worst_slack: worst,
        first_failure,
    })
}

fn random_dim(rng: &mut ChaCha8Rng) -> Dim {
    Dim::new(rng.random_range(3..=7)).expect("dimension is at least 3")
}

/// Random nonincreasing `phi` and `0 <= psi <= 1` on a random partition.
fn steffensen_instance(rng: &mut ChaCha8Rng) -> Result<Instance> {
    let k = rng.random_range(2..=40);
    let a: f64 = rng.random_range(-5.0..5.0);
    let mut nodes = vec![a];
    for _ in 1..k {
        let last = *nodes.last().unwrap();
        nodes.push(last + rng.random_range(0.01..1.0));
    }
    let mut phi: Vec<f64> = (0..k).map(|_| rng.random_range(-10.0..10.0)).collect();
    phi.sort_by(|x, y| y.total_cmp(x));
    let psi: Vec<f64> = (0..k)
        .map(|_| match rng.random_range(0..4) {
            0 => 0.0,
            1 => 1.0,
            _ => rng.random_range(0.0..=1.0),
        })
        .collect();
    let s = steffensen_bounds(&nodes, &phi, &psi)?;
    let span = nodes[k - 1] - nodes[0];
    let scale = span * phi.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = STEFFENSEN_TOL * (1.0 + scale);
    Ok(Instance {
        slack: (s.middle - s.lower + tol).min(s.upper - s.middle + tol),
        detail: format!("lower {} middle {} upper {}", s.lower, s.middle, s.upper),
    })
}

fn random_weights(rng: &mut ChaCha8Rng, k: usize) -> (Vec<f64>, f64) {
    let w: Vec<f64> = (0..k).map(|_| rng.random_range(0.01..3.0)).collect();
    let total = w.iter().sum();
    (w, total)
}

/// `int R f^2` against the rearranged pairing, for random `R` of both signs.
fn hlp_instance(rng: &mut ChaCha8Rng) -> Result<Instance> {
    let n = random_dim(rng);
    let k = rng.random_range(1..=30);
    let (w, total) = random_weights(rng, k);
    let rv: Vec<(f64, f64)> = w
        .iter()
        .map(|&wi| {
            let v = if rng.random_range(0..5) == 0 {
                0.0
            } else {
                rng.random_range(-5.0..5.0)
            };
            (v, wi)
        })
        .collect();
    let fv: Vec<(f64, f64)> = w.iter().map(|&wi| (rng.random_range(-3.0..3.0), wi)).collect();
    let r = MeasuredFunction::new(rv, total)?;
    let f = MeasuredFunction::new(fv, total)?;
    let (lhs, rhs) = hlp_lower_bound(&r, &f, n)?;
    Ok(Instance {
        slack: lhs - rhs + HLP_TOL * (1.0 + lhs.abs()),
        detail: format!("lhs {lhs} rhs {rhs}"),
    })
}

/// `|{f* > t}|` at a level `t`.
fn level_measure(p: &StepProfile, t: f64) -> f64 {
    p.breakpoints()
        .windows(2)
        .zip(p.values())
        .filter(|(_, &v)| v > t)
        .map(|(b, _)| b[1] - b[0])
        .sum()
}

/// Power integrals and level-set measures of both rearrangements against the
/// atoms.
fn equimeasurability_instance(rng: &mut ChaCha8Rng) -> Result<Instance> {
    let k = rng.random_range(1..=40);
    let (w, total) = random_weights(rng, k);
    let samples: Vec<(f64, f64)> = w
        .iter()
        .map(|&wi| {
            // repeated values exercise ties
            let v = if rng.random_range(0..4) == 0 {
                1.5
            } else {
                rng.random_range(0.0..4.0)
            };
            (v, wi)
        })
        .collect();
    let f = MeasuredFunction::new(samples.clone(), total)?;
    let dec = decreasing_rearrangement(&f);
    let inc = increasing_rearrangement(&f);
    let mut worst = f64::INFINITY;
    let mut detail = String::new();
    let qs = [1.0, 2.0, rng.random_range(1.0..6.0), 2.0 * 5.0 / 3.0];
    for q in qs {
        let direct = f.power_sum(q)?;
        let tol = EQUIMEASURABLE_TOL * (1.0 + direct.abs());
        for (label, p) in [("decreasing", &dec), ("increasing", &inc)] {
            let got = power_integral(p, q)?;
            let slack = tol - (got - direct).abs();
            if slack < worst {
                worst = slack;
                detail = format!("{label} q={q}: {got} vs {direct}");
            }
        }
    }
    for _ in 0..4 {
        let t = rng.random_range(-0.5..4.0);
        let direct: f64 = samples.iter().filter(|s| s.0 > t).map(|s| s.1).sum();
        let tol = EQUIMEASURABLE_TOL * total;
        for (label, p) in [("decreasing", &dec), ("increasing", &inc)] {
            let got = level_measure(p, t);
            let slack = tol - (got - direct).abs();
            if slack < worst {
                worst = slack;
                detail = format!("{label} level {t}: {got} vs {direct}");
            }
        }
    }
    Ok(Instance { slack: worst, detail })
}

/// A random valid summary; either scalar part may vanish.
pub fn random_summary(rng: &mut ChaCha8Rng) -> Result<ManifoldSummary> {
    let n = rng.random_range(3..=7);
    let volume = rng.random_range(0.1..100.0);
    let diameter = rng.random_range(0.5..10.0);
    let r0 = rng.random_range(-2.0..2.0);
    let part = |rng: &mut ChaCha8Rng| -> (f64, f64) {
        if rng.random_range(0..4) == 0 {
            (0.0, 0.0)
        } else {
            let sup = rng.random_range(0.01..20.0);
            (sup, volume * sup * rng.random_range(0.0..=1.0))
        }
    };
    let (sup_plus, l1_plus) = part(rng);
    let (sup_minus, l1_minus) = part(rng);
    ManifoldSummary::new(
        n,
        diameter,
        volume,
        r0,
        ScalarCurvatureStats {
            sup_plus,
            sup_minus,
            l1_plus,
            l1_minus,
        },
    )
}

/// `gamma_+ = omega_n - vol B(S, r1)` and `gamma_- = vol B(N, r2)`.
fn gamma_link_instance(rng: &mut ChaCha8Rng) -> Result<Instance> {
    let s = random_summary(rng)?;
    let g = gamma_pair(&s)?;
    let (r1, r2) = cap_radii(&s)?;
    let omega = sphere_volume(s.n())?;
    let plus = (g.gamma_plus - (omega - cap_volume(s.n(), r1.get())?)).abs();
    let minus = (g.gamma_minus - cap_volume(s.n(), r2.get())?).abs();
    Ok(Instance {
        slack: GAMMA_TOL - plus.max(minus),
        detail: format!("gamma+ error {plus:e}, gamma- error {minus:e}"),
    })
}

/// A random step potential with caps of either size, possibly empty.
pub fn random_potential(rng: &mut ChaCha8Rng, n: Dim) -> Result<StepPotential> {
    let radius = |rng: &mut ChaCha8Rng| -> Result<Radius> {
        match rng.random_range(0..6) {
            0 => Ok(Radius::ZERO),
            1 => Ok(Radius::PI),
            _ => Radius::new(rng.random_range(0.0..std::f64::consts::PI)),
        }
    };
    let r1 = radius(rng)?;
    let r2 = radius(rng)?;
    StepPotential::new(n, rng.random_range(0.0..30.0), r1, rng.random_range(0.0..30.0), r2)
}

/// `rho_1(h + c) = rho_1(h) + c`.
fn shift_identity_instance(rng: &mut ChaCha8Rng) -> Result<Instance> {
    let n = random_dim(rng);
    let h = random_potential(rng, n)?;
    let grid = RadialGrid::new(n, rng.random_range(32..=200))?;
    let forms = assemble_forms(&h, &grid)?;
    let c = rng.random_range(-50.0..50.0);
    let base = least_eigenvalue_on(&forms)?.rho1;
    let shifted = least_eigenvalue_on(&forms.shifted(c))?.rho1;
    let err = (shifted - base - c).abs();
    Ok(Instance {
        slack: SHIFT_TOL * (1.0 + base.abs() + c.abs()) - err,
        detail: format!("rho1 {base}, shift {c}, shifted {shifted}"),
    })
}
