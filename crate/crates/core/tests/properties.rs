use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;

use structbc::geometry::{divergence_theorem_check, induced_metric, sample_curve};
use structbc::kernels::{convolve_direct, KernelState, KernelTerm, MemoryKernel};
use structbc::model::{
    validate_scenario, BoundaryNodeSpec, EndSpec, Interior, InteractionSpec, InteriorSpec1D, Profile, Scenario,
};
use structbc::output::fmt_float;
use structbc::response::{
    check_positive_definite_ae, impedance_operator_retarded, laplace_transform, ComplexFrequencyGrid,
};
use structbc::run::simulate;
use structbc::Error;

fn decaying_kernel() -> impl Strategy<Value = MemoryKernel> {
    (prop::collection::vec((0.05f64..5.0, 0.1f64..10.0), 1..4), 0.0f64..2.0).prop_map(|(terms, inf)| {
        MemoryKernel::new(terms.into_iter().map(|(c, l)| KernelTerm::decaying(c, l)).collect(), inf).unwrap()
    })
}

fn closed_string(mass: f64, hooke: f64, spring: f64) -> Scenario {
    let mut line = InteriorSpec1D::string(1.0, 1.0, 0.0, 1.0, 100);
    line.semi_infinite = [false, false];
    let end = || EndSpec {
        boundary: Some(BoundaryNodeSpec::scalar(mass, hooke)),
        interaction: InteractionSpec::spring(spring),
    };
    let mut s = Scenario::new(Interior::Line(line), [end(), end()], 2.0, 2e-3);
    s.initial.displacement = Profile::Gaussian { amplitude: 0.1, center: 0.5, width: 0.1 };
    s
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 32, ..ProptestConfig::default() })]

    #[test]
    fn floats_survive_text(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        prop_assert_eq!(fmt_float(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn transform_is_linear(a in -3.0f64..3.0, b in -3.0f64..3.0, f1 in 0.1f64..3.0, f2 in 0.1f64..3.0) {
        let dt = 0.01;
        let n = 8000;
        let u: Vec<f64> = (0..n).map(|j| (-(j as f64 * dt)).exp() * (f1 * j as f64 * dt).sin()).collect();
        let v: Vec<f64> = (0..n).map(|j| (-(j as f64 * dt) * 0.5).exp() * (f2 * j as f64 * dt).cos()).collect();
        let w: Vec<f64> = u.iter().zip(&v).map(|(x, y)| a * x + b * y).collect();
        let grid = ComplexFrequencyGrid::standard();
        let (tu, tv, tw) = (
            laplace_transform(&u, dt, &grid).unwrap(),
            laplace_transform(&v, dt, &grid).unwrap(),
            laplace_transform(&w, dt, &grid).unwrap(),
        );
        for k in 0..grid.len() {
            let want = tu.values[k] * a + tv.values[k] * b;
            prop_assert!((tw.values[k] - want).norm() <= 1e-12 * (1.0 + want.norm()));
        }
    }

    #[test]
    fn positive_decaying_kernels_are_passive(kernel in decaying_kernel()) {
        for eta in [1e-3, 0.1, 1.0, 10.0] {
            for omega in [-50.0, -1.0, 0.0, 0.3, 7.0] {
                prop_assert!(kernel.transform(Complex64::new(omega, eta)).re >= 0.0);
            }
        }
        let verdict = check_positive_definite_ae(&kernel);
        prop_assert!(verdict.passed, "{:?}", verdict);
    }

    #[test]
    fn flipped_kernels_are_caught(kernel in decaying_kernel()) {
        let flipped = kernel.scaled(-1.0);
        prop_assert!(!check_positive_definite_ae(&flipped).passed);
    }

    #[test]
    fn fast_engine_matches_direct_convolution(kernel in decaying_kernel(), freq in 0.2f64..3.0) {
        let dt = 1e-3;
        let n = 3000;
        let v: Vec<f64> = (0..n).map(|j| (freq * j as f64 * dt).sin()).collect();
        let direct = convolve_direct(&kernel, &v, dt).unwrap();
        let mut state = KernelState::at_rest(&kernel);
        let mut worst: f64 = 0.0;
        for j in 1..n {
            state.advance(&kernel, 0.5 * (v[j - 1] + v[j]), dt);
            let fast = state.memory_force(&kernel) + kernel.instantaneous * v[j];
            worst = worst.max((fast - direct[j]).abs());
        }
        let scale: f64 = kernel.terms.iter().map(|t| t.c / t.lambda).sum::<f64>() + kernel.instantaneous;
        prop_assert!(worst <= 1e-4 * scale, "{worst}");
    }

    #[test]
    fn admittance_inverts_retarded_impedance(
        k in 0.1f64..5.0, kt in 0.0f64..5.0, a in 0.2f64..3.0, t in 0.2f64..3.0,
        re in -5.0f64..5.0, im in 0.05f64..3.0,
    ) {
        let z = impedance_operator_retarded(k, kt, a, t, Complex64::new(re, im));
        let y = z.clone().try_inverse().unwrap();
        let defect = (&y * &z - nalgebra::DMatrix::<Complex64>::identity(2, 2)).norm();
        prop_assert!(defect < 1e-10, "{defect}");
    }

    #[test]
    fn metric_is_invariant_under_rigid_motion(
        a in 0.5f64..3.0, b in 0.5f64..3.0, angle in 0.0f64..(2.0 * PI), sx in -5.0f64..5.0, sy in -5.0f64..5.0,
    ) {
        let ellipse = sample_curve(64, 2.0 * PI, |u| [a * u.cos(), b * u.sin()]);
        let (c, s) = (angle.cos(), angle.sin());
        let moved: Vec<[f64; 2]> = ellipse.iter().map(|p| [c * p[0] - s * p[1] + sx, s * p[0] + c * p[1] + sy]).collect();
        let m0 = induced_metric(&ellipse, 2.0 * PI).unwrap();
        let m1 = induced_metric(&moved, 2.0 * PI).unwrap();
        for (g0, g1) in m0.g.iter().zip(&m1.g) {
            prop_assert!((g0 - g1).abs() <= 1e-10 * g0.max(1.0));
        }
    }

    #[test]
    fn divergence_integrates_to_zero(
        a in 0.5f64..3.0, b in 0.5f64..3.0, p in -2.0f64..2.0, q in -2.0f64..2.0, mode in 1usize..5,
    ) {
        let m = induced_metric(&sample_curve(128, 2.0 * PI, |u| [a * u.cos(), b * u.sin()]), 2.0 * PI).unwrap();
        let v: Vec<f64> = m.u.iter().map(|u| p + q * (mode as f64 * u).sin()).collect();
        prop_assert!(divergence_theorem_check(&v, &m) < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 8, ..ProptestConfig::default() })]

    #[test]
    fn closed_strings_conserve_energy(mass in 0.5f64..5.0, hooke in 0.0f64..3.0, spring in 1.0f64..50.0) {
        let out = simulate(&validate_scenario(closed_string(mass, hooke, spring)).unwrap()).unwrap();
        prop_assert!(out.summary.conservation.max_drift < 1e-3, "{}", out.summary.conservation.max_drift);
    }

    #[test]
    fn runs_are_deterministic(mass in 0.5f64..5.0, spring in 1.0f64..50.0) {
        let v = validate_scenario(closed_string(mass, 1.0, spring)).unwrap();
        let (a, b) = (simulate(&v).unwrap(), simulate(&v).unwrap());
        prop_assert_eq!(a.trajectory, b.trajectory);
    }

    #[test]
    fn negative_masses_are_rejected(mass in -10.0f64..-1e-6) {
        let err = validate_scenario(closed_string(mass, 1.0, 1.0)).unwrap_err();
        prop_assert!(matches!(err, Error::InvalidSpec(_)));
        prop_assert_eq!(err.exit_code(), 2);
    }
}
