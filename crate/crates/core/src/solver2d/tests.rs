use super::*;
use crate::model::{validate_scenario, Profile, Scenario};

fn disk_scenario(d: DiskSpec, t_end: f64, dt: Option<f64>) -> Scenario {
    let dt = dt.unwrap_or_else(|| stable_dt(&d));
    Scenario::new(Interior::Disk(d), Default::default(), t_end, dt)
}

fn build(s: Scenario) -> (MembraneSystem, MembraneState) {
    let v = validate_scenario(s).unwrap();
    let sys = MembraneSystem::assemble(&v).unwrap();
    let st = sys.initial_state().unwrap();
    (sys, st)
}

fn robin(k: f64, lambda: f64) -> DiskSpec {
    let mut d = DiskSpec::new(1.0, 1.0, 1.0, 16, 32);
    d.ring_k = k;
    d.ring_lambda = lambda;
    d
}

#[test]
fn zero_data_stays_zero() {
    let (sys, mut st) = build(disk_scenario(robin(1.0, 0.5), 1.0, None));
    for _ in 0..50 {
        step_disk(&sys, &mut st).unwrap();
    }
    assert!(st.cells().iter().all(|x| *x == 0.0));
    assert!(st.ring_faces(&sys).1.iter().all(|x| *x == 0.0));
}

#[test]
fn rotation_by_whole_cells_is_exact() {
    let mut d = robin(2.0, 0.3);
    d.interaction = InteractionSpec::spring(5.0);
    let mut s = disk_scenario(d, 1.0, None);
    s.initial.displacement = Profile::Gaussian { amplitude: 1.0, center: 0.6, width: 0.2 };
    s.initial.angular_mode = 3;
    s.initial.angular_phase = 0.4;
    let (sys, st) = build(s);
    let mut a = st.clone();
    let mut b = st.rotated(&sys, 5);
    for _ in 0..200 {
        step_disk(&sys, &mut a).unwrap();
        step_disk(&sys, &mut b).unwrap();
    }
    assert_eq!(a.rotated(&sys, 5), b);
}

#[test]
fn bessel_mode_oscillates_at_robin_frequency() {
    let beta = robin_eigenvalue_oracle(1.0, 1.0, 1.0).unwrap();
    let mut s = disk_scenario(robin(1.0, 0.0), 20.0, None);
    s.initial.displacement = Profile::BesselMode { amplitude: 1.0, beta };
    let (sys, mut st) = build(s);
    let mut probe = vec![st.probe(&sys, 1)];
    let mut err: f64 = 0.0;
    let r0 = sys.radii()[0];
    for _ in 0..s_steps(&sys, 20.0) {
        step_disk(&sys, &mut st).unwrap();
        probe.push(st.probe(&sys, 1));
        let want = bessel::j0(beta * r0) * (beta * st.time()).cos();
        err = err.max((st.psi(&sys, 0, 0) - want).abs());
    }
    assert!(err < 2e-2, "{err}");
    let f = dominant_frequency(&probe, sys.dt());
    let want = beta / (2.0 * PI);
    assert!((f - want).abs() < 0.01 * want, "{f} {want}");
}

fn s_steps(sys: &MembraneSystem, t: f64) -> usize {
    (t / sys.dt()).round() as usize
}

#[test]
fn stiff_massless_ring_clamps_the_edge() {
    let mut s = disk_scenario(robin(1e6, 0.0), 1.0, None);
    s.initial.displacement = Profile::Gaussian { amplitude: 1.0, center: 0.0, width: 0.5 };
    let (sys, mut st) = build(s);
    for _ in 0..20 {
        step_disk(&sys, &mut st).unwrap();
        let (l, _) = st.ring_faces(&sys);
        let edge = st.psi(&sys, sys.n_r() - 1, 0).abs();
        assert!(l.iter().all(|x| x.abs() < 1e-4 * edge.max(1e-3)), "{:?}", &l[..2]);
    }
}

#[test]
fn free_massless_ring_has_zero_flux() {
    let mut s = disk_scenario(robin(0.0, 0.0), 1.0, None);
    s.initial.displacement = Profile::Gaussian { amplitude: 1.0, center: 0.3, width: 0.4 };
    let (sys, mut st) = build(s);
    for _ in 0..20 {
        step_disk(&sys, &mut st).unwrap();
        let ri = sys.interface(&st);
        assert!(ri.normal_flux.iter().all(|x| x.abs() < 1e-12));
    }
}

#[test]
fn heavy_ring_acceleration_matches_direct_formula() {
    let (k, lambda) = (2.0, 0.7);
    let mut s = disk_scenario(robin(k, lambda), 1.0, None);
    s.initial.displacement = Profile::Gaussian { amplitude: 1.0, center: 0.0, width: 0.6 };
    let (sys, st) = build(s);
    let ri = sys.interface(&st);
    let (_, b) = st.ring_faces(&sys);
    let dt = sys.dt();
    for j in 0..sys.n_theta() {
        let acc = (st.ring[NEXT][j] - 2.0 * st.ring[CUR][j] + st.ring[PREV][j]) / (dt * dt);
        let want = -(k * b[j] + ri.normal_flux[j]) / lambda;
        assert!((acc - want).abs() < 1e-9 * want.abs().max(1.0), "{acc} {want}");
    }
}

#[test]
fn spring_ring_interface_residual_vanishes() {
    let mut d = robin(1.0, 0.5);
    d.interaction = InteractionSpec::spring(3.0);
    let mut s = disk_scenario(d, 1.0, None);
    s.initial.displacement = Profile::Gaussian { amplitude: 1.0, center: 0.5, width: 0.3 };
    s.initial.angular_mode = 2;
    let (sys, mut st) = build(s);
    for _ in 0..100 {
        step_disk(&sys, &mut st).unwrap();
        let ri = apply_ring_interaction(&sys, &st);
        assert!(ri.residual.iter().all(|r| r.abs() < 1e-12));
    }
}

#[test]
fn matched_ring_carries_no_interaction() {
    let mut d = robin(0.0, 1.0);
    d.interaction = InteractionSpec::spring(3.0);
    let mut s = disk_scenario(d, 1.0, None);
    s.initial.displacement = Profile::Gaussian { amplitude: 2.0, center: 0.0, width: 1e6 };
    s.initial.boundary[0].psi = Some(vec![2.0]);
    let (sys, st) = build(s);
    let ri = apply_ring_interaction(&sys, &st);
    assert!(ri.interaction.iter().all(|f| f.abs() < 1e-9));
}

#[test]
fn uniform_stretch_gives_equal_forces() {
    let mut d = robin(1.0, 1.0);
    d.interaction = InteractionSpec::spring(2.0);
    let mut s = disk_scenario(d, 1.0, None);
    s.initial.displacement = Profile::Gaussian { amplitude: 1.0, center: 0.0, width: 0.5 };
    s.initial.boundary[0].psi = Some(vec![0.3]);
    let (sys, st) = build(s);
    let ri = apply_ring_interaction(&sys, &st);
    assert!(ri.interaction.iter().all(|f| *f == ri.interaction[0]));
    assert!(ri.normal_flux.iter().all(|f| *f == ri.normal_flux[0]));
}

#[test]
fn heavy_ring_system_conserves_energy() {
    for inter in [InteractionSpec::Rigid, InteractionSpec::spring(4.0)] {
        let mut d = robin(1.0, 0.5);
        d.interaction = inter;
        let mut s = disk_scenario(d, 5.0, None);
        s.initial.displacement = Profile::Gaussian { amplitude: 1.0, center: 0.4, width: 0.3 };
        s.initial.angular_mode = 1;
        let (sys, mut st) = build(s);
        let e0 = sys.interior_energy(&st) + sys.ring_energy(&st);
        let mut drift: f64 = 0.0;
        for _ in 0..s_steps(&sys, 5.0) {
            step_disk(&sys, &mut st).unwrap();
            let e = sys.interior_energy(&st) + sys.ring_energy(&st);
            drift = drift.max((e - e0).abs() / e0);
        }
        assert!(drift < 1e-2, "{drift}");
    }
}

#[test]
fn dominant_frequency_of_a_sine() {
    let dt = 0.01;
    let sig: Vec<f64> = (0..3000).map(|i| (2.0 * PI * 1.37 * i as f64 * dt).sin() + 0.2).collect();
    let f = dominant_frequency(&sig, dt);
    assert!((f - 1.37).abs() < 1e-3, "{f}");
}

#[test]
fn stable_step_does_not_blow_up() {
    let mut d = robin(3.0, 0.01);
    d.interaction = InteractionSpec::spring(50.0);
    let mut s = disk_scenario(d, 20.0, None);
    s.initial.displacement = Profile::Gaussian { amplitude: 1.0, center: 0.9, width: 0.05 };
    s.initial.angular_mode = 4;
    let (sys, mut st) = build(s);
    for _ in 0..s_steps(&sys, 20.0) {
        step_disk(&sys, &mut st).unwrap();
    }
    assert!(st.cells().iter().all(|x| x.abs() < 10.0));
}
