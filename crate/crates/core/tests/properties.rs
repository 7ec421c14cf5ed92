use dnls_core::criteria::{negativity_time, positive_energy_condition, positive_energy_condition_sqrt};
use dnls_core::cutoff::{positivity_margin, Completion, CutoffKind, RadialCutoff};
use dnls_core::diagnostics::mass;
use dnls_core::solver::{change_variable, free_propagate, strang_step, Direction};
use dnls_core::*;
use num_complex::Complex64;
use proptest::prelude::*;

fn spec(n: usize, alpha: f64, mu: Sign, a: f64) -> ProblemSpec {
    ProblemSpec::new(n, Power::new(alpha).unwrap(), mu, a).unwrap()
}

/// Smooth random field: a few low Fourier modes on an `n`-point 1D grid.
fn field_1d(modes: &[(f64, f64)], n: usize) -> Field {
    let g = make_grid(2.0 * std::f64::consts::PI, n, 1).unwrap();
    Field::from_fn(g, 0.0, |x| {
        modes
            .iter()
            .enumerate()
            .map(|(k, &(re, im))| Complex64::new(re, im) * Complex64::from_polar(1.0, k as f64 * x[0]))
            .sum()
    })
    .unwrap()
}

fn rel_diff(a: &Field, b: &Field) -> f64 {
    let num: f64 = a.values().iter().zip(b.values()).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.values().iter().map(|y| y.norm_sqr()).sum();
    (num / den).sqrt()
}

fn modes() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1..6)
        .prop_filter("non-zero field", |m| m[0].0.abs() + m[0].1.abs() > 0.1)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sigma_criterion_is_scale_coherent(e in -5.0..5.0f64, v in -5.0..5.0f64, i in 0.01..5.0f64, lambda in 0.01..100.0f64) {
        let a = sigma_criterion(e, v, i).unwrap();
        let b = sigma_criterion(lambda * e, lambda * v, lambda * i).unwrap();
        prop_assert_eq!(a.branch, b.branch);
        prop_assert_eq!(a.predicted_blowup, b.predicted_blowup);
        match (a.t_star, b.t_star) {
            (Some(x), Some(y)) => prop_assert!((x - y).abs() <= 1e-12 * x.abs().max(1e-300)),
            (None, None) => {}
            other => prop_assert!(false, "t_star mismatch {:?}", other),
        }
    }

    #[test]
    fn positive_energy_formulations_agree(e in 1e-3..5.0f64, v in -5.0..5.0f64, i in 1e-3..5.0f64, c in prop::sample::select(vec![2.0, 8.0, 12.0, 24.0])) {
        let gap = (v * v - c * e * i).abs();
        prop_assume!(gap > 1e-9 * (v * v).max(c * e * i));
        prop_assert_eq!(positive_energy_condition(e, v, i, c), positive_energy_condition_sqrt(e, v, i, c));
    }

    #[test]
    fn t_star_is_first_sign_change(c0 in 0.01..10.0f64, c1 in -10.0..10.0f64, c2 in -10.0..10.0f64) {
        let q = |t: f64| c0 + c1 * t + c2 * t * t;
        if let Some(ts) = negativity_time(c0, c1, c2) {
            let scale = c0.abs() + (c1 * ts).abs() + (c2 * ts * ts).abs();
            prop_assert!(q(ts) <= 1e-12 * scale);
            for k in 1..200 {
                let t = (ts - 1e-9) * k as f64 / 200.0;
                prop_assert!(q(t) > 0.0, "q({}) = {} before t_star {}", t, q(t), ts);
            }
        } else {
            for k in 0..200 {
                let t = k as f64 * 0.5;
                prop_assert!(q(t) >= -1e-12 * (c0 + (c1 * t).abs() + (c2 * t * t).abs()));
            }
        }
    }

    #[test]
    fn cutoff_derivatives_are_consistent(rho in 0.0..4.0f64, quintic in any::<bool>()) {
        let completion = if quintic { Completion::Quintic } else { Completion::Hermite };
        let c = RadialCutoff::new(1.0, CutoffKind::MassCriticalTheta, completion).unwrap();
        let h = 1e-6;
        prop_assume!(c.breakpoints().iter().all(|b| (rho - b).abs() > 2.0 * h) && rho > 2.0 * h);
        let lo = c.profile(rho - h);
        let hi = c.profile(rho + h);
        let mid = c.profile(rho);
        for d in 0..4 {
            let fd = (hi[d] - lo[d]) / (2.0 * h);
            prop_assert!((fd - mid[d + 1]).abs() <= 1e-6 * (1.0 + mid[d + 1].abs()), "order {} at {}", d + 1, rho);
        }
    }

    #[test]
    fn cutoff_margin_vanishes_inside_and_chis_are_nonnegative(
        radius in 0.25..4.0f64, frac in 0.0..4.0f64, n in 1usize..4, eps in 1e-3..10.0f64, constant in 0.1..10.0f64,
    ) {
        let c = RadialCutoff::mass_critical(radius).unwrap();
        let r = frac * radius;
        let e = c.evaluate(r, n).unwrap();
        if frac <= 1.0 {
            prop_assert_eq!(e.chi1, 0.0);
            prop_assert_eq!(e.chi2, 0.0);
            prop_assert_eq!(positivity_margin(&e, n, eps, constant), 0.0);
        }
        prop_assert!(e.chi1 >= -1e-12 && e.chi2 >= -1e-12);
    }

    #[test]
    fn one_step_mass_law(m in modes(), dt in 1e-4..5e-2f64, a in 0.0..5.0f64, defocusing in any::<bool>()) {
        let mu = if defocusing { Sign::Defocusing } else { Sign::Focusing };
        let u = field_1d(&m, 64);
        let sp = spec(1, 2.0, mu, a);
        let next = strang_step(&u, dt, &sp).unwrap();
        let ratio = (mass(&next) / mass(&u)).sqrt();
        prop_assert!((ratio / (-a * dt).exp() - 1.0).abs() <= 1e-13);
    }

    #[test]
    fn free_flow_is_reversible(m in modes(), t in -3.0..3.0f64) {
        let u = field_1d(&m, 64);
        let back = free_propagate(&free_propagate(&u, t), -t);
        prop_assert!(rel_diff(&back, &u) <= 1e-12);
    }

    #[test]
    fn parseval_holds(m in modes()) {
        let u = field_1d(&m, 32);
        let mut sp = Spectral::new(u.grid());
        let hat = sp.spectrum(u.values());
        let m0 = mass(&u);
        prop_assert!((sp.parseval_mass(&hat) - m0).abs() <= 1e-12 * m0);
    }

    #[test]
    fn change_of_variable_round_trip(m in modes(), t in 0.0..5.0f64, a in 0.0..3.0f64) {
        let u = field_1d(&m, 32).with_time(t);
        let v = change_variable(&u, t, a, Direction::ToV).unwrap();
        prop_assert!(((mass(&v) / mass(&u)).sqrt() / (a * t).exp() - 1.0).abs() <= 1e-13);
        let back = change_variable(&v, t, a, Direction::ToU).unwrap();
        prop_assert!(rel_diff(&back, &u) <= 1e-14);
    }
}
