use std::f64::consts::PI;

use super::*;
use crate::model::{
    validate_scenario, BoundaryInit, Direction, EndSpec, ForceShape, InteriorSpec1D, Profile, Scenario, VelocityInit,
};

fn string_line(len: f64, n: usize, semi: [bool; 2]) -> InteriorSpec1D {
    let mut s = InteriorSpec1D::string(1.0, 1.0, 0.0, len, n);
    s.semi_infinite = semi;
    s
}

fn build(s: Scenario) -> (CoupledSystem1D, CoupledState1D) {
    let v = validate_scenario(s).unwrap();
    let sys = CoupledSystem1D::assemble(&v).unwrap();
    let st = sys.initial_state().unwrap();
    (sys, st)
}

fn run_to(sys: &CoupledSystem1D, st: &mut CoupledState1D, t: f64) {
    let n = (t / sys.dt()).round() as usize;
    for _ in 0..n {
        step_coupled(sys, st).unwrap();
    }
}

fn spring_end(m: f64, k: f64, kt: f64) -> EndSpec {
    EndSpec { boundary: Some(BoundaryNodeSpec::scalar(m, k)), interaction: InteractionSpec::spring(kt) }
}

#[test]
fn zero_data_stays_zero() {
    let s = Scenario::new(
        Interior::Line(string_line(20.0, 200, [false, true])),
        [EndSpec { boundary: Some(BoundaryNodeSpec::scalar(1.0, 1.0)), interaction: InteractionSpec::Rigid }, EndSpec::default()],
        5.0,
        0.09,
    );
    let (sys, mut st) = build(s);
    run_to(&sys, &mut st, 5.0);
    assert!(st.field(&sys).psi.iter().all(|x| *x == 0.0));
    assert!(st.psi_b(&sys, End::B1).iter().all(|x| *x == 0.0));
}

#[test]
fn standing_mode_is_second_order() {
    let err = |n: usize| {
        let dz = 1.0 / n as f64;
        let mut s = Scenario::new(Interior::Line(string_line(1.0, n, [false, false])), Default::default(), 0.5, 0.5 * dz);
        s.initial.displacement = Profile::SineMode { amplitude: 1.0, mode: 1 };
        let (sys, mut st) = build(s);
        run_to(&sys, &mut st, 0.5);
        let t = st.time();
        (0..sys.n_nodes())
            .map(|j| {
                let z = sys.z(j);
                (st.psi(&sys, j)[0] - (PI * z).sin() * (PI * t).cos()).abs()
            })
            .fold(0.0, f64::max)
    };
    let (a, b) = (err(40), err(80));
    let order = (a / b).log2();
    assert!(a < 1e-3 && (order - 2.0).abs() < 0.2, "{a} {b} {order}");
}

#[test]
fn pulse_travels_at_wave_speed() {
    let mut line = string_line(40.0, 2000, [false, false]);
    line.stiffness_matrix[(0, 0)] = 4.0;
    let mut s = Scenario::new(Interior::Line(line), Default::default(), 5.0, 0.009);
    s.initial.displacement = Profile::Gaussian { amplitude: 1.0, center: 10.0, width: 1.0 };
    s.initial.velocity = VelocityInit::Travelling { travelling: Direction::Right };
    let (sys, mut st) = build(s);
    run_to(&sys, &mut st, 5.0);
    let (mut num, mut den) = (0.0, 0.0);
    for j in 0..sys.n_nodes() {
        let w = st.psi(&sys, j)[0].powi(2);
        num += w * sys.z(j);
        den += w;
    }
    let centroid = num / den;
    assert!((centroid - 20.0).abs() < 0.02, "{centroid}");
}

#[test]
fn outflow_end_reflects_little() {
    let mut s = Scenario::new(Interior::Line(string_line(20.0, 1000, [false, true])), Default::default(), 25.0, 0.018);
    s.initial.displacement = Profile::Gaussian { amplitude: 1.0, center: 10.0, width: 1.0 };
    s.initial.velocity = VelocityInit::Travelling { travelling: Direction::Right };
    let (sys, mut st) = build(s);
    run_to(&sys, &mut st, 25.0);
    let left = (0..sys.n_nodes()).map(|j| st.psi(&sys, j)[0].abs()).fold(0.0, f64::max);
    assert!(left < 1e-3, "{left}");
}

#[test]
fn left_going_wave_unaffected_by_far_outflow_end() {
    // The pulse moves away from the truncation; the solution is the free translate.
    let mut s = Scenario::new(Interior::Line(string_line(40.0, 2000, [false, true])), Default::default(), 5.0, 0.018);
    s.initial.displacement = Profile::Gaussian { amplitude: 1.0, center: 25.0, width: 1.0 };
    s.initial.velocity = VelocityInit::Travelling { travelling: Direction::Left };
    let (sys, mut st) = build(s);
    run_to(&sys, &mut st, 5.0);
    let t = st.time();
    let err = (0..sys.n_nodes())
        .map(|j| (st.psi(&sys, j)[0] - (-0.5 * (sys.z(j) - 25.0 + t).powi(2)).exp()).abs())
        .fold(0.0, f64::max);
    assert!(err < 1e-3, "{err}");
}

#[test]
fn linear_field_gives_exact_flux() {
    let mut line = string_line(1.0, 20, [false, false]);
    line.stiffness_matrix[(0, 0)] = 3.0;
    let mut s = Scenario::new(
        Interior::Line(line),
        [EndSpec { boundary: Some(BoundaryNodeSpec::scalar(1.0, 1.0)), interaction: InteractionSpec::None }, EndSpec::default()],
        0.01,
        0.01,
    );
    s.initial.displacement = Profile::Samples { values: vec![0.0, 0.5] };
    let (sys, st) = build(s);
    let f = sys.interface_force(&st, End::B1);
    assert!((f.flux[0] - 1.5).abs() < 1e-12, "{:?}", f.flux);
    assert_eq!(f.interaction[0], 0.0);
}

#[test]
fn spring_equilibrium_has_zero_residual() {
    // T psi_z(0) = -k~ (psi_B - psi_L): slope 1/2, psi_L = 1, k~ = 2 gives psi_B = 3/4.
    let mut s = Scenario::new(
        Interior::Line(string_line(1.0, 20, [false, false])),
        [spring_end(1.0, 1.0, 2.0), EndSpec::default()],
        0.01,
        0.01,
    );
    s.initial.displacement = Profile::Samples { values: vec![1.0, 1.5] };
    s.initial.boundary[0] = BoundaryInit { psi: Some(vec![0.75]), velocity: None };
    let (sys, st) = build(s);
    let f = sys.interface_force(&st, End::B1);
    assert!(f.iel_residual[0].abs() < 1e-12, "{:?}", f.iel_residual);
}

#[test]
fn discrete_interface_solve_is_exact() {
    let mut s = Scenario::new(
        Interior::Line(string_line(2.0, 100, [false, false])),
        [spring_end(0.5, 1.0, 3.0), spring_end(0.0, 2.0, 1.5)],
        1.0,
        0.01,
    );
    s.initial.displacement = Profile::Gaussian { amplitude: 1.0, center: 0.7, width: 0.3 };
    let (sys, mut st) = build(s);
    for _ in 0..100 {
        step_coupled(&sys, &mut st).unwrap();
        for end in End::BOTH {
            let r = sys.interface_force(&st, end).discrete_residual[0];
            assert!(r.abs() < 1e-12, "{r}");
        }
    }
}

#[test]
fn rigid_ends_keep_boundary_on_trace() {
    let mut s = Scenario::new(
        Interior::Line(string_line(1.0, 50, [false, false])),
        [
            EndSpec { boundary: Some(BoundaryNodeSpec::scalar(2.0, 1.0)), interaction: InteractionSpec::Rigid },
            EndSpec { boundary: Some(BoundaryNodeSpec::scalar(0.0, 3.0)), interaction: InteractionSpec::Rigid },
        ],
        1.0,
        0.01,
    );
    s.initial.displacement = Profile::Gaussian { amplitude: 1.0, center: 0.5, width: 0.1 };
    let (sys, mut st) = build(s);
    for _ in 0..100 {
        step_coupled(&sys, &mut st).unwrap();
        for end in End::BOTH {
            assert_eq!(st.psi_b(&sys, end), st.psi_l(&sys, end));
        }
    }
}

#[test]
fn interaction_forces_are_opposite() {
    let mut s = Scenario::new(
        Interior::Line(string_line(1.0, 50, [false, false])),
        [spring_end(1.0, 1.0, 2.0), spring_end(1.0, 0.0, 5.0)],
        1.0,
        0.01,
    );
    s.initial.displacement = Profile::Gaussian { amplitude: 1.0, center: 0.3, width: 0.1 };
    let (sys, mut st) = build(s);
    for _ in 0..50 {
        step_coupled(&sys, &mut st).unwrap();
        for end in End::BOTH {
            let (a, b) = interaction_forces(&sys, &st, end);
            assert_eq!(a[0] + b[0], 0.0);
        }
    }
}

#[test]
fn halving_dt_agrees_to_scheme_order() {
    let run = |dt: f64| {
        let mut s = Scenario::new(
            Interior::Line(string_line(1.0, 100, [false, false])),
            [spring_end(1.0, 1.0, 2.0), EndSpec::default()],
            1.0,
            dt,
        );
        s.initial.displacement = Profile::Gaussian { amplitude: 1.0, center: 0.5, width: 0.1 };
        let (sys, mut st) = build(s);
        run_to(&sys, &mut st, 1.0);
        st.field(&sys).psi
    };
    let (a, b, c) = (run(0.008), run(0.004), run(0.002));
    let d1 = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let d2 = b.iter().zip(&c).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    assert!(d2 < 1e-3 && (d1 / d2).log2() > 1.8, "{d1} {d2}");
}

#[test]
fn free_boundary_oscillates_as_cosine() {
    let node = BoundaryNodeSpec::scalar(1.0, 1.0);
    let dt = 1e-3;
    let mut st = BoundaryState { psi_b: vec![1.0], psi_b_dot: vec![0.0], kernel_state: None };
    for _ in 0..5000 {
        st = step_boundary(&node, &st, &[0.0], &[0.0], dt).unwrap();
    }
    assert!((st.psi_b[0] - 5f64.cos()).abs() < 1e-5, "{}", st.psi_b[0]);
}

#[test]
fn constant_force_gives_parabola() {
    let node = BoundaryNodeSpec::scalar(2.0, 0.0);
    let force = ForceSpec::scalar(1.0, ForceShape::Constant);
    let mut f = [0.0];
    force.value_into(0.0, &mut f);
    let mut st = BoundaryState::at_rest(1);
    for _ in 0..1000 {
        st = step_boundary(&node, &st, &[0.0], &f, 1e-3).unwrap();
    }
    assert!((st.psi_b[0] - 0.25).abs() < 1e-12, "{}", st.psi_b[0]);
    assert!((st.psi_b_dot[0] - 0.5).abs() < 1e-12);
}

#[test]
fn massless_boundary_balances_flux() {
    let node = BoundaryNodeSpec::scalar(0.0, 4.0);
    let st = step_boundary(&node, &BoundaryState::at_rest(1), &[0.6], &[0.0], 1e-3).unwrap();
    assert!((0.6 - 4.0 * st.psi_b[0]).abs() < 1e-15);
}

#[test]
fn massless_spring_end_sits_on_its_constraint() {
    let mut s = Scenario::new(
        Interior::Line(string_line(1.0, 50, [false, false])),
        [spring_end(0.0, 2.0, 3.0), EndSpec::default()],
        1.0,
        0.01,
    );
    s.initial.displacement = Profile::Gaussian { amplitude: 1.0, center: 0.2, width: 0.1 };
    let (sys, mut st) = build(s);
    for _ in 0..100 {
        step_coupled(&sys, &mut st).unwrap();
        let (pb, pl) = (st.psi_b(&sys, End::B1)[0], st.psi_l(&sys, End::B1)[0]);
        assert!((2.0 * pb - 3.0 * (pl - pb)).abs() < 1e-13);
    }
}

#[test]
fn lamb_end_follows_damped_oscillator() {
    let mut s = Scenario::new(
        Interior::Line(string_line(20.0, 1000, [false, true])),
        [EndSpec { boundary: Some(BoundaryNodeSpec::scalar(1.0, 1.0)), interaction: InteractionSpec::Rigid }, EndSpec::default()],
        10.0,
        0.018,
    );
    // A right-going pulse carries nothing into the end, so psi_B obeys the homogeneous model.
    s.initial.displacement = Profile::Gaussian { amplitude: 1.0, center: 0.0, width: 1.0 };
    s.initial.velocity = VelocityInit::Travelling { travelling: Direction::Right };
    let (sys, mut st) = build(s);
    let mut err: f64 = 0.0;
    for _ in 0..(10.0 / sys.dt()).round() as usize {
        step_coupled(&sys, &mut st).unwrap();
        let want = lamb_analytic(1.0, 1.0, 1.0, 1.0, (1.0, 0.0), st.time()).unwrap();
        err = err.max((st.psi_b(&sys, End::B1)[0] - want).abs());
    }
    assert!(err < 2e-2, "{err}");
}

#[test]
fn blowup_is_reported() {
    let mut s = Scenario::new(Interior::Line(string_line(1.0, 20, [false, false])), Default::default(), 1.0, 0.01);
    s.initial.displacement = Profile::SineMode { amplitude: 1.0, mode: 1 };
    let v = validate_scenario(s).unwrap();
    let mut sys = CoupledSystem1D::assemble(&v).unwrap();
    sys.dt = 0.2;
    let mut st = sys.initial_state().unwrap();
    let mut res = Ok(());
    for _ in 0..2000 {
        res = step_coupled(&sys, &mut st);
        if res.is_err() {
            break;
        }
    }
    assert!(matches!(res, Err(Error::NumericalBlowup { .. })));
}
