use std::f64::consts::PI;

use confbound::bbg::{bbg_constant, best_hypothesis, check_hypothesis, Hypothesis};
use confbound::potential::{build_potential, cap_radii, ManifoldSummary, ScalarCurvatureStats, StepPotential};
use confbound::rearrange::{
    decreasing_rearrangement, hlp_lower_bound, power_integral, project_to_sphere, steffensen_bounds,
    MeasuredFunction,
};
use confbound::spectral::{assemble_forms, least_eigenvalue, least_eigenvalue_on, RadialGrid};
use confbound::spheregeom::{cap_fraction, cap_radius_for_fraction, cap_volume, iso_profile, sphere_volume, Dim, Radius};
use confbound::suites::{random_potential, random_summary};
use confbound::yamabe::{descend, minimize_quotient, quotient, NodalForms, StartKind, YamabeOptions};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn dim(n: usize) -> Dim {
    Dim::new(n).unwrap()
}

fn radius(r: f64) -> Radius {
    Radius::new(r).unwrap()
}

/// Composite Simpson on `[a, b]` with `k` (even) panels.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, k: usize) -> f64 {
    let h = (b - a) / k as f64;
    let mut s = f(a) + f(b);
    for i in 1..k {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// `sigma_n` from `sigma_1 = pi`, `sigma_2 = 2`, `sigma_n = (n-2)/(n-1) sigma_{n-2}`.
fn sigma_closed(n: usize) -> f64 {
    match n {
        1 => PI,
        2 => 2.0,
        _ => (n as f64 - 2.0) / (n as f64 - 1.0) * sigma_closed(n - 2),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn cap_radius_inverts_cap_fraction(n in 2usize..=8, s in 0.0f64..=1.0) {
        let r = cap_radius_for_fraction(dim(n), s).unwrap();
        let back = cap_fraction(dim(n), r.get()).unwrap();
        prop_assert!((back - s).abs() < 1e-10, "s {s} back {back}");
    }
}

proptest! {
    #[test]
    fn antipodal_caps_fill_the_sphere(n in 2usize..=8, r in 0.0f64..=PI) {
        let omega = sphere_volume(dim(n)).unwrap();
        let a = cap_volume(dim(n), r).unwrap();
        let b = cap_volume(dim(n), (PI - r).max(0.0)).unwrap();
        prop_assert!((a + b - omega).abs() < 1e-12 * omega);
    }

    #[test]
    fn iso_profile_peaks_at_half_and_is_symmetric(n in 2usize..=8, s in 0.0f64..=1.0) {
        let top = iso_profile(dim(n), 0.5).unwrap();
        let v = iso_profile(dim(n), s).unwrap();
        prop_assert!(v <= top + 1e-12);
        let w = iso_profile(dim(n), 1.0 - s).unwrap();
        prop_assert!((v - w).abs() < 1e-9);
    }

    #[test]
    fn positive_branch_is_increasing(n in 2usize..=8, a in 0.05f64..3.0, gap in 0.01f64..0.5) {
        let b = (a + gap).min(PI);
        let lo = bbg_constant(dim(n), Hypothesis::new(1, a).unwrap()).unwrap().value;
        let hi = bbg_constant(dim(n), Hypothesis::new(1, b).unwrap()).unwrap().value;
        prop_assert!(hi > lo);
    }

    #[test]
    fn negative_branch_roots_solve_the_equation(n in 2usize..=6, alpha in 0.3f64..4.0) {
        // only returned roots carry a claim; failures must be reported as such
        match bbg_constant(dim(n), Hypothesis::new(-1, alpha).unwrap()) {
            Ok(c) => {
                let y = c.c_alpha.unwrap();
                let k = n as i32 - 1;
                let tail = simpson(|t| (t.cosh() / y.cosh()).powi(k), y, y + alpha, 4000);
                let scaled = sigma_closed(n) - y.tanh() * tail;
                prop_assert!(scaled.abs() < 1e-9, "scaled residual {scaled}");
                prop_assert!((c.value - alpha * y).abs() <= 1e-15 * c.value);
            }
            Err(e) => prop_assert!(e.is_solver_failure()),
        }
    }

    #[test]
    fn best_hypothesis_is_admissible(seed in any::<u64>()) {
        let s = random_summary(&mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        match best_hypothesis(&s) {
            Ok(c) => prop_assert!(check_hypothesis(&s, &c.hypothesis)),
            Err(e) => prop_assert!(e.is_solver_failure()),
        }
    }

    #[test]
    fn potential_preserves_mass_ratio(seed in any::<u64>()) {
        let s = random_summary(&mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let Ok(a) = best_hypothesis(&s) else { return Ok(()) };
        let h = build_potential(&s, &a).unwrap();
        let n = s.n();
        let scale = (s.diameter() / a.value).powi(2);
        let frac_s = cap_fraction(n, h.r1().get()).unwrap();
        let frac_n = cap_fraction(n, h.r2().get()).unwrap();
        let want_plus = scale * s.scalar().l1_plus / s.volume();
        let want_minus = scale * s.scalar().l1_minus / s.volume();
        prop_assert!((h.c_plus() * frac_s - want_plus).abs() <= 1e-10 * (1.0 + want_plus));
        prop_assert!((h.c_minus() * frac_n - want_minus).abs() <= 1e-10 * (1.0 + want_minus));
    }

    #[test]
    fn more_positive_mass_widens_the_south_cap(n in 3usize..=7, f in 0.0f64..0.9, df in 0.001f64..0.1) {
        let v = 10.0;
        let make = |frac: f64| {
            let stats = ScalarCurvatureStats { sup_plus: 2.0, sup_minus: 0.0, l1_plus: 2.0 * v * frac, l1_minus: 0.0 };
            ManifoldSummary::new(n, 2.0, v, 0.1, stats).unwrap()
        };
        let (r_small, _) = cap_radii(&make(f)).unwrap();
        let (r_big, _) = cap_radii(&make((f + df).min(1.0))).unwrap();
        prop_assert!(r_big.get() >= r_small.get());
    }
}

fn atoms() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-5.0f64..5.0, 0.01f64..3.0), 1..30)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn rearrangement_is_equimeasurable(atoms in atoms(), n in 3usize..=7) {
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        let f = MeasuredFunction::new(atoms.iter().map(|&(v, w)| (v.abs(), w)).collect(), total).unwrap();
        let p = 2.0 * n as f64 / (n as f64 - 2.0);
        let star = decreasing_rearrangement(&f);
        for q in [1.0, 2.0, p] {
            let direct = f.power_sum(q).unwrap();
            let stepped = power_integral(&star, q).unwrap();
            prop_assert!((direct - stepped).abs() <= 1e-12 * (1.0 + direct));
        }
    }

    #[test]
    fn projection_preserves_power_integrals(atoms in atoms(), n in 3usize..=7, q in 1.0f64..5.0) {
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        let f = MeasuredFunction::new(atoms.iter().map(|&(v, w)| (v.abs(), w)).collect(), total).unwrap();
        let star = decreasing_rearrangement(&f);
        let g = project_to_sphere(&star, dim(n)).unwrap();
        let omega = sphere_volume(dim(n)).unwrap();
        let on_sphere = g.power_integral(q).unwrap();
        let want = omega / total * power_integral(&star, q).unwrap();
        prop_assert!((on_sphere - want).abs() <= 1e-10 * (1.0 + want));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn hlp_lower_bound_holds(atoms in atoms(), fs in prop::collection::vec(-3.0f64..3.0, 30), n in 3usize..=7) {
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        let r = MeasuredFunction::new(atoms.clone(), total).unwrap();
        let f = MeasuredFunction::new(atoms.iter().zip(&fs).map(|(a, &v)| (v, a.1)).collect(), total).unwrap();
        let (lhs, rhs) = hlp_lower_bound(&r, &f, dim(n)).unwrap();
        prop_assert!(lhs >= rhs - 1e-10 * (1.0 + lhs.abs()), "lhs {lhs} rhs {rhs}");
    }

    #[test]
    fn steffensen_sandwich(
        steps in prop::collection::vec(0.01f64..1.0, 1..40),
        phi in prop::collection::vec(-10.0f64..10.0, 41),
        psi in prop::collection::vec(0.0f64..=1.0, 41),
    ) {
        let mut nodes = vec![0.0];
        for s in &steps {
            nodes.push(nodes.last().unwrap() + s);
        }
        let k = nodes.len();
        let mut phi = phi[..k].to_vec();
        phi.sort_by(|a, b| b.total_cmp(a));
        let b = steffensen_bounds(&nodes, &phi, &psi[..k]).unwrap();
        let tol = 1e-12 * (1.0 + nodes[k - 1] * 10.0);
        prop_assert!(b.lower <= b.middle + tol && b.middle <= b.upper + tol, "{b:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn ground_state_is_positive_and_bracketed(seed in any::<u64>(), n in 3usize..=6, m in 32usize..300) {
        let h = random_potential(&mut ChaCha8Rng::seed_from_u64(seed), dim(n)).unwrap();
        let r = least_eigenvalue(&h, m).unwrap();
        prop_assert!(r.eigenfunction.iter().all(|&v| v > 0.0));
        // -cMinus <= rho1 <= mean of h
        prop_assert!(r.rho1 >= -h.c_minus() - 1e-9);
        prop_assert!(r.rho1 <= h.mean().unwrap() + 1e-9 * (1.0 + h.c_plus() + h.c_minus()));
    }

    #[test]
    fn shift_identity(seed in any::<u64>(), c in -50.0f64..50.0) {
        let h = random_potential(&mut ChaCha8Rng::seed_from_u64(seed), dim(4)).unwrap();
        let forms = assemble_forms(&h, &RadialGrid::new(dim(4), 120).unwrap()).unwrap();
        let base = least_eigenvalue_on(&forms).unwrap().rho1;
        let moved = least_eigenvalue_on(&forms.shifted(c)).unwrap().rho1;
        prop_assert!((moved - base - c).abs() <= 1e-10 * (1.0 + base.abs() + c.abs()));
    }

    #[test]
    fn rho1_is_monotone_in_potential_data(
        c in 0.0f64..20.0, dc in 0.0f64..5.0, r in 0.0f64..3.0, dr in 0.0f64..0.14, cm in 0.0f64..20.0,
    ) {
        let n = dim(3);
        let m = 200;
        let rho = |cp: f64, r1: f64, cmin: f64| {
            let h = StepPotential::new(n, cp, radius(r1), cmin, radius(1.0)).unwrap();
            least_eigenvalue(&h, m).unwrap().rho1
        };
        let tol = 1e-9;
        prop_assert!(rho(c + dc, r, 0.0) >= rho(c, r, 0.0) - tol);
        prop_assert!(rho(c, r + dr, 0.0) >= rho(c, r, 0.0) - tol);
        prop_assert!(rho(c, r, cm + dc) <= rho(c, r, cm) + tol);
    }
}

fn small_opts(m: usize) -> YamabeOptions {
    YamabeOptions {
        grid_size: m,
        max_iterations: 400,
        ..YamabeOptions::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn quotient_is_homogeneous_of_degree_zero(seed in any::<u64>(), t in 1e-3f64..1e3) {
        let n = dim(4);
        let h = random_potential(&mut ChaCha8Rng::seed_from_u64(seed), n).unwrap();
        let grid = RadialGrid::new(n, 50).unwrap();
        let u: Vec<f64> = (0..=50).map(|i| 1.2 + (i as f64 * 0.37).sin()).collect();
        let scaled: Vec<f64> = u.iter().map(|x| t * x).collect();
        let a = quotient(&u, &h, &grid).unwrap();
        let b = quotient(&scaled, &h, &grid).unwrap();
        prop_assert!((a - b).abs() <= 1e-11 * (1.0 + a.abs()));
    }

    #[test]
    fn descent_decreases_and_respects_bounds(seed in any::<u64>(), n in 3usize..=5) {
        let d = dim(n);
        let h = random_potential(&mut ChaCha8Rng::seed_from_u64(seed), d).unwrap();
        let opts = small_opts(80);
        let grid = RadialGrid::new(d, 80).unwrap();
        let forms = NodalForms::new(&h, &grid).unwrap();
        for start in StartKind::ALL {
            let run = descend(&forms, &start.profile(&forms), &opts).unwrap();
            prop_assert!(run.history.windows(2).all(|w| w[1] <= w[0]));
            prop_assert!(run.profile.iter().all(|&v| v >= 0.0));
        }
        let res = minimize_quotient(&h, &opts).unwrap();
        let constant = quotient(&vec![1.0; 81], &h, &grid).unwrap();
        prop_assert!(res.rho <= constant + 1e-12 * (1.0 + constant.abs()));
        // Hoelder on the mass term: rho >= -cMinus omega_n^{2/n}
        let floor = -h.c_minus() * sphere_volume(d).unwrap().powf(2.0 / n as f64);
        prop_assert!(res.rho >= floor - 1e-9 * (1.0 + floor.abs()));
        let q = quotient(&res.minimizer, &h, &grid).unwrap();
        prop_assert!((q - res.rho).abs() <= 1e-10 * (1.0 + res.rho.abs()));
    }

    #[test]
    fn symmetric_potential_bumps_agree(c in -20.0f64..40.0, n in 3usize..=5) {
        let d = dim(n);
        let h = if c >= 0.0 {
            StepPotential::constant(d, c).unwrap()
        } else {
            StepPotential::new(d, 0.0, Radius::ZERO, -c, Radius::PI).unwrap()
        };
        let res = minimize_quotient(&h, &small_opts(60)).unwrap();
        let south = res.starts.iter().find(|s| s.start == StartKind::SouthBump).unwrap().rho;
        let north = res.starts.iter().find(|s| s.start == StartKind::NorthBump).unwrap().rho;
        prop_assert!((south - north).abs() <= 1e-6 * (1.0 + south.abs()));
    }
}

#[test]
fn sphere_volume_is_the_full_cap() {
    for n in 2..=8 {
        let w = sphere_volume(dim(n)).unwrap();
        assert!((cap_volume(dim(n), PI).unwrap() - w).abs() < 1e-12 * w);
        assert!((sigma_closed(n) * sphere_volume(dim(n - 1)).unwrap() - w).abs() < 1e-12 * w);
    }
}

#[test]
fn yamabe_residual_on_constant_potential() {
    for n in [3, 4, 5] {
        let h = StepPotential::constant(dim(n), (n * (n - 1)) as f64).unwrap();
        let res = minimize_quotient(
            &h,
            &YamabeOptions {
                grid_size: 200,
                starts: vec![StartKind::Constant],
                ..YamabeOptions::default()
            },
        )
        .unwrap();
        assert!(res.converged);
        let el = confbound::yamabe::euler_lagrange_residual(&res, &h).unwrap();
        assert!(el < 1e-8, "n = {n}: residual {el}");
    }
}

#[test]
fn grid_refinement_is_monotone_for_step_potentials() {
    let h = StepPotential::new(dim(3), 10.0, radius(PI / 2.0), 4.0, radius(0.7)).unwrap();
    let rho = |m| least_eigenvalue(&h, m).unwrap().rho1;
    let values: Vec<f64> = [500, 1000, 2000, 4000, 8000].iter().map(|&m| rho(m)).collect();
    let diffs: Vec<f64> = values.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    assert!(diffs.windows(2).all(|d| d[1] < d[0]), "{diffs:?}");
}
