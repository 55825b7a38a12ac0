//! One test per acceptance criterion. Each check prints a `PASS` or `FAIL`
//! line; run with `--nocapture` to see them.

use std::f64::consts::PI;
use std::time::Instant;

use confbound::bbg::{bbg_constant, c_alpha_residual, Hypothesis};
use confbound::bounds::{bounds_report, catalog_entry, lambda_sphere, BoundsOptions, Rigidity};
use confbound::spectral::{assemble_forms, least_eigenvalue, least_eigenvalue_on, radial_spectrum, RadialGrid};
use confbound::spheregeom::{sphere_volume, Dim, Radius};
use confbound::suites::{random_potential, run_suite, Suite};
use confbound::yamabe::{minimize_quotient, StartKind, YamabeOptions};
use confbound::StepPotential;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Checks {
    criterion: u32,
    failed: Vec<String>,
}

impl Checks {
    fn new(criterion: u32) -> Self {
        Checks {
            criterion,
            failed: Vec::new(),
        }
    }

    fn check(&mut self, name: &str, ok: bool, detail: String) {
        let tag = if ok { "PASS" } else { "FAIL" };
        println!("[{tag}] criterion {}: {name}: {detail}", self.criterion);
        if !ok {
            self.failed.push(name.to_string());
        }
    }

    fn finish(self) {
        let tag = if self.failed.is_empty() { "PASS" } else { "FAIL" };
        println!("[{tag}] criterion {}", self.criterion);
        assert!(self.failed.is_empty(), "criterion {} failed: {:?}", self.criterion, self.failed);
    }
}

fn dim(n: usize) -> Dim {
    Dim::new(n).unwrap()
}

#[test]
fn criterion_1_round_sphere_chain() {
    let mut c = Checks::new(1);
    let summary = catalog_entry("S3-round").unwrap().summary;
    let opts = BoundsOptions::default();
    assert_eq!(opts.spectral_grid, 2000);
    assert_eq!(opts.yamabe.grid_size, 2000);
    let start = Instant::now();
    let r = bounds_report(&summary, &opts).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    c.check(
        "mu1 bound = 6",
        (r.mu1_lower_bound - 6.0).abs() < 1e-4,
        format!("{}", r.mu1_lower_bound),
    );
    let want = 6.0 * (2.0 * PI * PI).powf(2.0 / 3.0);
    let rel = (r.lambda_lower_bound / want - 1.0).abs();
    c.check("lambda bound = 6 (2 pi^2)^(2/3)", rel < 1e-3, format!("{} (rel err {rel:e})", r.lambda_lower_bound));
    c.check(
        "rigidity verdict",
        r.rigidity == Rigidity::ConformalSphere,
        r.rigidity.label().to_string(),
    );
    c.check("runtime under 60 s", elapsed < 60.0, format!("{elapsed:.1} s"));
    c.finish();
}

#[test]
fn criterion_2_bbg_constant() {
    let mut c = Checks::new(2);
    for n in 2..=8 {
        let a = bbg_constant(dim(n), Hypothesis::new(1, PI).unwrap()).unwrap().value;
        c.check(&format!("a({n}, 1, pi) = pi"), (a - PI).abs() < 1e-10, format!("{a}"));
    }
    for n in [2, 3, 4] {
        for alpha in [0.5, 1.0, 2.0] {
            let name = format!("eps = -1 residual at n = {n}, alpha = {alpha}");
            match bbg_constant(dim(n), Hypothesis::new(-1, alpha).unwrap()) {
                Ok(k) => {
                    let y = k.c_alpha.unwrap();
                    let res = c_alpha_residual(dim(n), alpha, y).unwrap();
                    c.check(&name, res.abs() < 1e-10, format!("c = {y}, residual {res:e}"));
                }
                Err(e) => c.check(&name, false, format!("no root: {e}")),
            }
        }
    }
    let a = bbg_constant(dim(2), Hypothesis::new(0, 0.0).unwrap()).unwrap().value;
    let want = 5f64.sqrt() - 1.0;
    c.check("a(2, 0) = sqrt 5 - 1", (a - want).abs() < 1e-12, format!("{a}"));
    c.finish();
}

#[test]
fn criterion_3_spectral_calibration() {
    let mut c = Checks::new(3);
    let zero = StepPotential::zero(dim(3)).unwrap();
    let got = radial_spectrum(&zero, 3, 4000).unwrap();
    // relative error is meaningless at 0; the ground value is checked absolutely
    c.check("rho1 = 0", got[0].abs() < 1e-9, format!("{:e}", got[0]));
    for (k, want) in [(1, 24.0), (2, 64.0)] {
        let rel = (got[k] / want - 1.0).abs();
        c.check(&format!("rho{} = {want}", k + 1), rel < 5e-3, format!("{} (rel err {rel:e})", got[k]));
    }

    let report = run_suite(Suite::ShiftIdentity, 3, 100).unwrap();
    c.check(
        "shift identity, 100 shifts",
        report.passed(),
        format!("{} failures, worst slack {:e}", report.failures, report.worst_slack),
    );

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut bad = 0;
    let mut worst = f64::INFINITY;
    for _ in 0..100 {
        let n = dim(rng.random_range(3..=6));
        let h = random_potential(&mut rng, n).unwrap();
        let r = least_eigenvalue(&h, 400).unwrap();
        let min = r.eigenfunction.iter().copied().fold(f64::INFINITY, f64::min);
        worst = worst.min(min);
        if min <= 0.0 {
            bad += 1;
        }
    }
    c.check("ground state positive, 100 potentials", bad == 0, format!("{bad} failures, min entry {worst:e}"));

    // shift identity directly on one assembled operator as well
    let h = random_potential(&mut rng, dim(4)).unwrap();
    let forms = assemble_forms(&h, &RadialGrid::new(dim(4), 500).unwrap()).unwrap();
    let base = least_eigenvalue_on(&forms).unwrap().rho1;
    let moved = least_eigenvalue_on(&forms.shifted(17.25)).unwrap().rho1;
    let err = (moved - base - 17.25).abs();
    c.check("shift by 17.25", err <= 1e-10 * (1.0 + base.abs() + 17.25), format!("{err:e}"));
    c.finish();
}

#[test]
fn criterion_4_yamabe_solver() {
    let mut c = Checks::new(4);
    for n in [3, 4, 5] {
        let d = dim(n);
        let s = (n * (n - 1)) as f64;
        let h = StepPotential::constant(d, s).unwrap();
        let res = minimize_quotient(&h, &YamabeOptions::default()).unwrap();
        let want = s * sphere_volume(d).unwrap().powf(2.0 / n as f64);
        let rel = (res.rho / want - 1.0).abs();
        c.check(&format!("rho(S^{n})"), rel < 1e-3, format!("{} vs {want} (rel err {rel:e})", res.rho));
        let constant = res.starts.iter().find(|o| o.start == StartKind::Constant).unwrap();
        c.check(
            &format!("constant start converges, n = {n}"),
            constant.converged && constant.iterations < 10_000,
            format!("{} iterations", constant.iterations),
        );
        c.check(
            &format!("Euler-Lagrange residual, n = {n}"),
            res.el_residual < 1e-6,
            format!("{:e}", res.el_residual),
        );
    }
    c.finish();
}

#[test]
fn criterion_5_rearrangement_suites() {
    let mut c = Checks::new(5);
    for (suite, count) in [
        (Suite::Equimeasurability, 1000),
        (Suite::Hlp, 1000),
        (Suite::Steffensen, 1000),
        (Suite::GammaLink, 200),
    ] {
        let r = run_suite(suite, 5, count).unwrap();
        c.check(
            &format!("{suite}, {count} instances"),
            r.passed(),
            format!("{} failures, worst slack {:e}", r.failures, r.worst_slack),
        );
    }
    c.finish();
}

#[test]
fn criterion_6_negative_controls() {
    let mut c = Checks::new(6);
    let opts = BoundsOptions::default();
    let torus = bounds_report(&catalog_entry("T3-flat").unwrap().summary, &opts).unwrap();
    c.check("torus mu1 bound = 0", torus.mu1_lower_bound == 0.0, format!("{:e}", torus.mu1_lower_bound));
    c.check(
        "torus lambda bound = 0",
        torus.lambda_lower_bound == 0.0,
        format!("{:e}", torus.lambda_lower_bound),
    );

    let r = bounds_report(&catalog_entry("S2xS2").unwrap().summary, &opts).unwrap();
    let sphere = lambda_sphere(dim(4)).unwrap();
    c.check("S2xS2 inconclusive", r.rigidity == Rigidity::Inconclusive, r.rigidity.label().to_string());
    c.check(
        "S2xS2 below lambda(S^4)",
        r.lambda_lower_bound < sphere && r.lambda_margin < 0.0,
        format!("{} < {sphere}, margin {}", r.lambda_lower_bound, r.lambda_margin),
    );
    c.finish();
}

#[test]
fn criterion_7_grid_convergence() {
    let mut c = Checks::new(7);
    let h = StepPotential::new(dim(3), 10.0, Radius::new(PI / 2.0).unwrap(), 0.0, Radius::ZERO).unwrap();
    let oracle = least_eigenvalue(&h, 20001).unwrap().rho1;
    let errs: Vec<f64> = [500, 1000, 2000]
        .iter()
        .map(|&m| (least_eigenvalue(&h, m).unwrap().rho1 - oracle).abs())
        .collect();
    c.check(
        "errors decrease over m = 500, 1000, 2000",
        errs[0] > errs[1] && errs[1] > errs[2],
        format!("{errs:?}"),
    );
    let rel = errs[2] / oracle.abs();
    c.check("m = 2000 within 1e-4 of the m = 20001 oracle", rel < 1e-4, format!("rel err {rel:e}"));
    c.finish();
}
