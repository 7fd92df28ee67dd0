//! Plant dynamics against independent closed-form and Cartesian oracles.

use posturebench::plant::{
    integrate_step, AddedMass, AnthropometricModel, Configuration, DisturbanceInputs, Plant,
    PlantState,
};

/// Total mechanical energy from Cartesian segment kinematics, written out
/// independently of the plant's Lagrangian terms.
fn cartesian_energy(model: &AnthropometricModel, s: &PlantState) -> f64 {
    let g = model.gravity;
    let (l1, t) = (&model.segments[0], &model.segments[1]);
    let [th1, th2] = s.sway;
    let [w1, w2] = s.rate;
    // Leg CoM.
    let (x1, z1) = (l1.com_offset_m * th1.sin(), l1.com_offset_m * th1.cos());
    let (vx1, vz1) = (
        l1.com_offset_m * th1.cos() * w1,
        -l1.com_offset_m * th1.sin() * w1,
    );
    // Trunk CoM, hanging off the hip at the top of the leg.
    let (x2, z2) = (
        l1.length_m * th1.sin() + t.com_offset_m * th2.sin(),
        l1.length_m * th1.cos() + t.com_offset_m * th2.cos(),
    );
    let vx2 = l1.length_m * th1.cos() * w1 + t.com_offset_m * th2.cos() * w2;
    let vz2 = -l1.length_m * th1.sin() * w1 - t.com_offset_m * th2.sin() * w2;
    let _ = (x1, x2);
    let kinetic = 0.5 * l1.mass_kg * (vx1 * vx1 + vz1 * vz1)
        + 0.5 * l1.inertia_kgm2 * w1 * w1
        + 0.5 * t.mass_kg * (vx2 * vx2 + vz2 * vz2)
        + 0.5 * t.inertia_kgm2 * w2 * w2;
    let potential = g * (l1.mass_kg * z1 + t.mass_kg * z2);
    kinetic + potential
}

fn still() -> DisturbanceInputs {
    DisturbanceInputs::default()
}

#[test]
fn dip_energy_is_conserved() {
    let model = AnthropometricModel::lucy_default();
    let plant = Plant::new(&model, None, Configuration::Dip).unwrap();
    let mut s = PlantState::upright();
    s.sway = [0.05, 0.02];
    let e0 = cartesian_energy(&model, &s);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        s = integrate_step(&plant, &s, [0.0, 0.0], &still(), 0.01).unwrap();
        worst = worst.max(((cartesian_energy(&model, &s) - e0) / e0).abs());
    }
    assert!(worst < 1e-6, "relative drift {worst:e} over 1 s");
    // The body must actually have moved for the check to mean anything.
    assert!(s.rate[0].abs() > 1e-3);
}

#[test]
fn locked_hip_matches_rigid_sip() {
    let model = AnthropometricModel::lucy_default();
    let added = AddedMass {
        mass_kg: 2.0,
        height_m: 0.15,
        eccentricity_m: 0.05,
    };
    for added in [None, Some(&added)] {
        let sip = Plant::new(&model, added, Configuration::Sip).unwrap();
        let dip = Plant::new(&model, added, Configuration::DipHipLocked).unwrap();
        let mgh = model.mgh();
        let (mut a, mut b) = (PlantState::leaning(0.05), PlantState::leaning(0.05));
        let mut worst: f64 = 0.0;
        for k in 0..1000 {
            let t = k as f64 * 0.01;
            let dist = DisturbanceInputs {
                support_accel: 0.3 * (2.0 * std::f64::consts::PI * 0.5 * t).sin(),
                ..Default::default()
            };
            let torque = |s: &PlantState| -1.5 * mgh * s.sway[0] - 0.3 * mgh * s.rate[0];
            a = integrate_step(&sip, &a, [torque(&a), 0.0], &dist, 0.01).unwrap();
            b = integrate_step(&dip, &b, [torque(&b), 0.0], &dist, 0.01).unwrap();
            worst = worst.max((a.sway[0] - b.sway[0]).abs());
            assert_eq!(b.sway[0], b.sway[1]);
        }
        assert!(worst < 1e-6, "max deviation {worst:e} rad");
    }
}

#[test]
fn small_lean_diverges_as_cosh() {
    let (g, h) = (9.81, 0.8);
    let model = AnthropometricModel::point_mass(16.5, h, g).unwrap();
    let plant = Plant::new(&model, None, Configuration::Sip).unwrap();
    let a0 = 1e-4;
    let mut s = PlantState::leaning(a0);
    let omega = (g / h).sqrt();
    let dt = 0.001;
    for k in 1..=500 {
        s = integrate_step(&plant, &s, [0.0, 0.0], &still(), dt).unwrap();
        let expected = a0 * (omega * k as f64 * dt).cosh();
        assert!(
            (s.sway[0] / expected - 1.0).abs() < 0.01,
            "t = {}: {} vs {expected}",
            k as f64 * dt,
            s.sway[0]
        );
    }
}

#[test]
fn tilt_does_not_move_the_body_in_space() {
    // The ankle lies on the tilt axis: with zero ankle torque an upright
    // body stays put while the support tilts under it.
    let model = AnthropometricModel::lucy_default();
    let plant = Plant::new(&model, None, Configuration::Sip).unwrap();
    let mut s = PlantState::upright();
    for k in 0..200 {
        let tilt = 0.03 * (k as f64 * 0.01).sin();
        let dist = DisturbanceInputs {
            support_tilt: tilt,
            support_tilt_rate: 0.03 * (k as f64 * 0.01).cos(),
            ..Default::default()
        };
        s = integrate_step(&plant, &s, [0.0, 0.0], &dist, 0.01).unwrap();
        assert_eq!(s.sway[0], 0.0);
        assert_eq!(s.fs, tilt);
        assert_eq!(s.ankle_angle(), -tilt);
    }
}
