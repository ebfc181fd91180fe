use num_complex::Complex64;
use proptest::prelude::*;
use sbm_tcl::bathcorr::nu;
use sbm_tcl::dynamics::{evolve, EvolveOptions};
use sbm_tcl::generators::{tcl0, tcl2_asymptotic, tcl2_at_time, SystemParams};
use sbm_tcl::numerics::{digamma, pv_integral_above, trigamma, Domain, PoleSpec, QuadConfig};
use sbm_tcl::spectral::{DqdSincParams, DrudeParams, SpectralDensity};
use sbm_tcl::steadystate::{assemble_report, gibbs_state, BlochVector};

fn cfg() -> QuadConfig {
    QuadConfig::default()
}

fn params() -> impl Strategy<Value = SystemParams> {
    (0.3..3.0f64, -1.0..1.0f64, -1.0..1.0f64, 0.2..5.0f64)
        .prop_filter("nonzero coupling vector", |(_, a1, a3, _)| a1.abs() + a3.abs() > 0.05)
        .prop_map(|(om, a1, a3, beta)| SystemParams::new(om, a1, a3, beta, 1.0).unwrap())
}

fn drude() -> impl Strategy<Value = DrudeParams> {
    (0.1..2.0f64, 0.5..12.0f64).prop_map(|(g, l)| DrudeParams::new(g, l).unwrap())
}

fn dqd() -> impl Strategy<Value = DqdSincParams> {
    (0.1..2.0f64, 0.5..2.0f64, 3.0..10.0f64).prop_map(|(g, c, m)| DqdSincParams::new(g, c, m).unwrap())
}

fn bloch_ball() -> impl Strategy<Value = BlochVector> {
    (-0.57..0.57f64, -0.57..0.57f64, -0.57..0.57f64).prop_map(|(a, b, c)| BlochVector::new(a, b, c))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn generator_rows_are_trace_preserving_and_proportional(p in params(), d in drude()) {
        let g = tcl2_asymptotic(&p, &d, &cfg()).unwrap();
        prop_assert_eq!(g.entries[0], [0.0; 4]);
        for k in 0..4 {
            let (x, y) = (p.a3 * g.get(3, k), p.a1 * g.get(1, k));
            prop_assert!((x - y).abs() <= 1e-10 * x.abs().max(y.abs()).max(1e-300), "k = {}: {} vs {}", k, x, y);
        }
    }

    #[test]
    fn finite_time_rows_are_proportional(p in params(), s in dqd(), t in 0.05..20.0f64) {
        let g = tcl2_at_time(&p, &s, t).unwrap();
        prop_assert_eq!(g.entries[0], [0.0; 4]);
        prop_assert_eq!(g.get(3, 2), 0.0);
        for k in 0..4 {
            let (x, y) = (p.a3 * g.get(3, k), p.a1 * g.get(1, k));
            prop_assert!((x - y).abs() <= 1e-10 * x.abs().max(y.abs()).max(1e-300));
        }
    }

    #[test]
    fn spectral_density_parity(d in drude(), s in dqd(), w in 0.01..30.0f64, beta in 0.1..10.0f64) {
        for sd in [&d as &dyn SpectralDensity, &s] {
            prop_assert_eq!(sd.j(-w), -sd.j(w));
            prop_assert_eq!(sd.f(-w, beta), sd.f(w, beta));
            prop_assert!(sd.f(w, beta) >= 0.0);
        }
    }

    #[test]
    fn noise_kernel_is_even_in_time(d in drude(), t in 0.01..10.0f64, beta in 0.2..3.0f64) {
        let a = nu(&d, t, beta, &cfg()).unwrap();
        let b = nu(&d, -t, beta, &cfg()).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn gibbs_population_is_bounded(om in 0.01..50.0f64, beta in 0.01..50.0f64) {
        let p = SystemParams::new(om, 1.0, 0.0, beta, 0.0).unwrap();
        let v = gibbs_state(&p).v3;
        prop_assert!(v > -1.0 - 1e-15 && v < 0.0);
    }

    #[test]
    fn digamma_recurrence(re in -8.0..8.0f64, im in 0.05..20.0f64) {
        let z = Complex64::new(re, im);
        let lhs = digamma(z + 1.0).unwrap() - digamma(z).unwrap();
        prop_assert!((lhs - z.inv()).norm() <= 1e-12 * (1.0 + z.inv().norm()));
        let t = trigamma(z).unwrap() - trigamma(z + 1.0).unwrap();
        prop_assert!((t - (z * z).inv()).norm() <= 1e-11 * (1.0 + (z * z).inv().norm()));
    }

    #[test]
    fn contour_integral_of_simple_pole(p0 in 0.3..3.0f64, scale in 0.2..5.0f64) {
        // ∫₀^∞ c/(x² - p²) along the contour above: the principal value is 0
        let r = pv_integral_above(|x| scale / (x * x - p0 * p0), Domain::From(0.0), &[PoleSpec::fit(p0)], &cfg()).unwrap();
        let want = Complex64::new(0.0, -std::f64::consts::PI * scale / (2.0 * p0));
        prop_assert!((r.complex() - want).norm() <= 1e-9 * (1.0 + want.norm()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn steady_state_routes_agree(p in params(), d in drude()) {
        let r = assemble_report(&p, &d, &cfg()).unwrap();
        prop_assert!(r.route_discrepancy.v1.abs() <= 1e-6 * (1.0 + r.tcl_correction.v1.abs()));
        prop_assert!(r.route_discrepancy.v3.abs() <= 1e-5 * (1.0 + r.tcl_correction.v3.abs()));
        prop_assert!(r.tcl_correction.v2.abs() <= 1e-8);
    }

    #[test]
    fn correction_is_linear_in_coupling(p in params(), d in drude(), lam in 1e-4..0.05f64) {
        let full = SystemParams { coupling_sq: lam, ..p };
        let half = SystemParams { coupling_sq: 0.5 * lam, ..p };
        let a = assemble_report(&full, &d, &cfg()).unwrap();
        let b = assemble_report(&half, &d, &cfg()).unwrap();
        for (x, y) in [(a.assembled.v1 - a.gibbs.v1, b.assembled.v1 - b.gibbs.v1), (a.assembled.v3 - a.gibbs.v3, b.assembled.v3 - b.gibbs.v3)] {
            prop_assert!((0.5 * x - y).abs() <= 0.01 * y.abs() + 1e-15);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn evolution_is_affine_in_the_initial_state(u in bloch_ball(), w in bloch_ball(), s in 0.0..1.0f64) {
        let d = DrudeParams::new(1.0, 4.0).unwrap();
        let p = SystemParams::new(1.2, 0.6, 0.8, 1.0, 0.05).unwrap();
        let opts = EvolveOptions::new(6.0, 1.5).with_rel_tol(1e-10);
        let mix = BlochVector::new(
            s * u.v1 + (1.0 - s) * w.v1,
            s * u.v2 + (1.0 - s) * w.v2,
            s * u.v3 + (1.0 - s) * w.v3,
        );
        let tu = evolve(&p, &d, &u, &opts).unwrap();
        let tw = evolve(&p, &d, &w, &opts).unwrap();
        let tm = evolve(&p, &d, &mix, &opts).unwrap();
        for i in 0..tm.len() {
            for k in 1..4 {
                let want = s * tu.states[i][k] + (1.0 - s) * tw.states[i][k];
                prop_assert!((tm.states[i][k] - want).abs() <= 1e-8, "i = {} k = {}", i, k);
            }
            prop_assert_eq!(tm.states[i][0], 1.0);
        }
    }
}

#[test]
fn free_generator_is_antisymmetric() {
    let p = SystemParams::new(1.7, 0.2, 0.4, 1.0, 0.0).unwrap();
    let g = tcl0(&p).unwrap();
    for i in 0..4 {
        for j in 0..4 {
            assert_eq!(g.get(i, j), -g.get(j, i));
        }
    }
}

#[test]
fn halving_the_integrator_tolerance_changes_little() {
    let d = DrudeParams::new(1.0, 5.0).unwrap();
    let p = SystemParams::new(1.0, 0.6, 0.8, 1.0, 0.05).unwrap();
    let v = BlochVector::new(0.2, 0.1, -0.3);
    let a = evolve(&p, &d, &v, &EvolveOptions::new(40.0, 1.0)).unwrap();
    let b = evolve(&p, &d, &v, &EvolveOptions::new(40.0, 1.0).with_rel_tol(5e-9)).unwrap();
    let (x, y) = (a.last(), b.last());
    let diff = (x.v1 - y.v1).abs().max((x.v2 - y.v2).abs()).max((x.v3 - y.v3).abs());
    assert!(diff < 1e-8, "{diff:e}");
}
