//! Closed-loop trials: invariants of the assembled plant, controller and
//! platform.

use posturebench::controller::{ControllerConfig, ControllerKind};
use posturebench::metrics::{power, trim_steady_state};
use posturebench::perturbation::{Axis, PerturbationProfile, ProfileKind};
use posturebench::plant::{com_sway, AddedMass, AnthropometricModel, Configuration};
use posturebench::testbench::{
    run_pair, run_trial, Channel, Outcome, PlatformModel, Scenario, TrialSpec,
};

fn spec(kind: ControllerKind) -> TrialSpec {
    let model = AnthropometricModel::lucy_default();
    TrialSpec {
        scenario: Scenario::Tilt,
        profile: PerturbationProfile::sine(2f64.to_radians(), 0.05),
        controller: ControllerConfig::for_model(kind, &model),
        model,
        added_mass: None,
        configuration: Configuration::Sip,
        platform: PlatformModel::default(),
        duration_s: 100.0,
        rate_hz: 100.0,
        settle_periods: 2,
        initial_sway: 0.0,
        fall_threshold: 0.5,
    }
}

fn quiet(kind: ControllerKind, lean: f64) -> TrialSpec {
    let mut s = spec(kind);
    s.profile = PerturbationProfile::zero();
    s.duration_s = 10.0;
    s.initial_sway = lean;
    s
}

fn constant_pull(torque: f64, duration_s: f64) -> PerturbationProfile {
    PerturbationProfile {
        axis: Axis::SupportTilt,
        kind: ProfileKind::Custom {
            samples: vec![torque; (duration_s * 100.0) as usize],
            period_s: None,
        },
    }
}

fn com_power(spec: &TrialSpec) -> f64 {
    let r = run_trial(spec).unwrap();
    assert_eq!(r.meta.outcome, Outcome::Completed);
    power(&trim_steady_state(&r.series(Channel::Com).unwrap(), spec.settle_periods).unwrap())
        .unwrap()
}

#[test]
fn small_lean_recovers_under_pd_and_dec() {
    for kind in [ControllerKind::Pd, ControllerKind::Dec] {
        let r = run_trial(&quiet(kind, 0.01)).unwrap();
        assert_eq!(r.meta.outcome, Outcome::Completed);
        let com = r.channel(Channel::Com).unwrap();
        let last = *com.last().unwrap();
        assert!(last.abs() < 1e-3, "{kind:?}: sway {last} after 10 s");
    }
}

#[test]
fn unactuated_body_falls_within_first_period() {
    let mut s = spec(ControllerKind::Off);
    s.initial_sway = 1e-3;
    let r = run_trial(&s).unwrap();
    assert_eq!(r.meta.outcome, Outcome::Fallen);
    assert!(r.meta.fall_time_s.unwrap() < 20.0);
}

#[test]
fn bsrp_holds_ankle_angle() {
    let mut s = quiet(ControllerKind::Dec, 0.01);
    s.scenario = Scenario::Bsrp;
    s.duration_s = 20.0;
    s.platform = PlatformModel::ideal();
    let r = run_trial(&s).unwrap();
    assert_eq!(r.meta.outcome, Outcome::Completed);
    let ss = r.channel(Channel::Ss).unwrap();
    let fs = r.channel(Channel::Fs).unwrap();
    let ankle0 = ss[0] - fs[0];
    let worst = ss
        .iter()
        .zip(fs)
        .map(|(a, f)| (a - f - ankle0).abs())
        .fold(0.0, f64::max);
    assert!(worst < 1e-3, "ankle moved by {worst}");
    // The platform really did move with the body.
    assert!(fs.iter().any(|x| x.abs() > 1e-3));
}

#[test]
fn gravity_compensation_reduces_static_lean() {
    // A steady forward pull of 3 N·m leans the body; with the contact
    // estimator off, the steady lean is set by the net stiffness.
    let lean = |nominal_mgh: f64| {
        let mut s = quiet(ControllerKind::Dec, 0.0);
        s.scenario = Scenario::ContactPull;
        s.duration_s = 20.0;
        s.profile = constant_pull(3.0, 20.0);
        s.controller.contact_gain = 0.0;
        s.controller.nominal_mgh = nominal_mgh;
        let r = run_trial(&s).unwrap();
        *r.channel(Channel::Com).unwrap().last().unwrap()
    };
    let mgh = AnthropometricModel::lucy_default().mgh();
    let with = lean(mgh);
    let without = lean(0.0);
    assert!(with > 0.0 && without > 0.0);
    assert!(with.abs() < without.abs(), "{with} vs {without}");
    // Linear statics: lean ≈ τ / (Kp − mgh + nominal_mgh).
    let kp = 1.5 * mgh;
    assert!((with / (3.0 / kp) - 1.0).abs() < 0.02, "{with}");
    assert!(
        (without / (3.0 / (kp - mgh)) - 1.0).abs() < 0.02,
        "{without}"
    );
}

#[test]
fn contact_estimator_cancels_a_steady_pull() {
    let lean = |gain: f64| {
        let mut s = quiet(ControllerKind::Dec, 0.0);
        s.scenario = Scenario::ContactPull;
        s.duration_s = 30.0;
        s.profile = constant_pull(8.0, 30.0);
        s.controller.contact_gain = gain;
        let r = run_trial(&s).unwrap();
        *r.channel(Channel::Com).unwrap().last().unwrap()
    };
    let (on, off) = (lean(1.0), lean(0.0));
    assert!(off > 0.0);
    assert!(on.abs() < 0.5 * off.abs(), "{on} vs {off}");
}

#[test]
fn com_channel_matches_segment_channels() {
    for config in [
        Configuration::Sip,
        Configuration::Dip,
        Configuration::DipHipLocked,
    ] {
        let mut s = spec(ControllerKind::Dec);
        s.configuration = config;
        let r = run_trial(&s).unwrap();
        let ls = r.channel(Channel::Ls).unwrap();
        let ts = r.channel(Channel::Ts).unwrap();
        let com = r.channel(Channel::Com).unwrap();
        for k in 0..r.len() {
            let expected = com_sway(&[ls[k], ts[k]], &s.model).unwrap();
            assert!((com[k] - expected).abs() <= 1e-9, "{config:?} sample {k}");
        }
        assert_eq!(r.has(Channel::HipTorque), config != Configuration::Sip);
    }
}

#[test]
fn identical_specs_give_identical_records() {
    let s = spec(ControllerKind::Dec);
    let (a, b) = run_pair(&s, &s).unwrap();
    assert_eq!(a, b);
    assert_eq!(run_trial(&s).unwrap(), a);
}

#[test]
fn added_mass_increases_sway_power() {
    let nominal = spec(ControllerKind::Dec);
    let mut heavy = nominal.clone();
    heavy.added_mass = Some(AddedMass {
        mass_kg: 2.0,
        height_m: 0.15,
        eccentricity_m: 0.05,
    });
    let (a, b) = run_pair(&nominal, &heavy).unwrap();
    let p = |r: &posturebench::testbench::TrialRecord| {
        power(&trim_steady_state(&r.series(Channel::Com).unwrap(), 2).unwrap()).unwrap()
    };
    assert!(p(&b) > p(&a));
}

#[test]
fn unmodeled_mass_increases_sway_power() {
    let base = spec(ControllerKind::Dec);
    let p0 = com_power(&base);
    let mut prev = p0;
    for scale in [1.05, 1.1, 1.2] {
        let mut s = base.clone();
        for seg in &mut s.model.segments {
            seg.mass_kg *= scale;
            seg.inertia_kgm2 *= scale;
        }
        let p = com_power(&s);
        assert!(p > prev, "scale {scale}: {p} <= {prev}");
        prev = p;
    }
}

#[test]
fn translation_trial_sways_and_respects_accel_limit() {
    let mut s = spec(ControllerKind::Dec);
    s.scenario = Scenario::Translation;
    s.profile = PerturbationProfile {
        axis: Axis::SupportTranslation,
        kind: ProfileKind::Sine {
            amplitude: 0.05,
            frequency_hz: 0.2,
        },
    };
    s.duration_s = 30.0;
    let r = run_trial(&s).unwrap();
    assert_eq!(r.meta.outcome, Outcome::Completed);
    let x = r.channel(Channel::Translation).unwrap();
    for w in x.windows(3) {
        let acc = (w[2] - 2.0 * w[1] + w[0]) * 1e4;
        assert!(acc.abs() <= s.platform.accel_limit * (1.0 + 1e-6));
    }
    assert!(r
        .channel(Channel::Com)
        .unwrap()
        .iter()
        .any(|c| c.abs() > 1e-4));
    assert!(r.channel(Channel::Fs).unwrap().iter().all(|&f| f == 0.0));
}

#[test]
fn fallen_record_is_truncated() {
    let mut s = spec(ControllerKind::Off);
    s.initial_sway = 0.01;
    let r = run_trial(&s).unwrap();
    let t = r.meta.fall_time_s.unwrap();
    for c in Channel::ALL {
        if let Ok(v) = r.channel(c) {
            assert_eq!(v.len(), (t * s.rate_hz).round() as usize, "{c:?}");
        }
    }
}
