//! Score and FRF properties against direct-sum and analytic oracles.

use std::f64::consts::PI;

use posturebench::metrics::{
    cross_correlate, estimate_frf, gain, phase, power, stimulus_harmonics, trim_steady_state,
};
use posturebench::perturbation::gen_prts;
use posturebench::SignalSeries;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn series(v: Vec<f64>, period: Option<f64>) -> SignalSeries {
    SignalSeries::new(v, 100.0, period).unwrap()
}

/// `Σ_t u[t]·a[t+L]` by definition.
fn direct_xcorr(u: &[f64], a: &[f64], lag: isize) -> f64 {
    let n = u.len() as isize;
    (0..n)
        .filter(|t| (0..n).contains(&(t + lag)))
        .map(|t| u[t as usize] * a[(t + lag) as usize])
        .sum()
}

#[test]
fn fft_correlation_matches_direct_sum() {
    let mut rng = StdRng::seed_from_u64(0x5eed);
    for _ in 0..100 {
        let n = rng.gen_range(1..=512);
        let u: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let a: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x = cross_correlate(&series(u.clone(), None), &series(a.clone(), None)).unwrap();
        let scale = u.iter().map(|v| v * v).sum::<f64>().sqrt()
            * a.iter().map(|v| v * v).sum::<f64>().sqrt();
        for lag in x.lags() {
            let d = direct_xcorr(&u, &a, lag);
            assert!(
                (x.at(lag).unwrap() - d).abs() <= 1e-9 * scale.max(1e-300),
                "n={n} lag={lag}"
            );
        }
    }
}

fn periodic(per: usize, periods: usize, f: impl Fn(f64) -> f64) -> Vec<f64> {
    (0..per * periods)
        .map(|k| f(2.0 * PI * k as f64 / per as f64))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn gain_scales_inversely_with_input(k in prop_oneof![-5.0..-0.1f64, 0.1..5.0f64], shift in -3.0..3.0f64) {
        let u = periodic(200, 4, |w| w.sin());
        let a = periodic(200, 4, |w| 0.3 * (w + shift).sin());
        let ku: Vec<f64> = u.iter().map(|x| k * x).collect();
        let g = gain(&series(u, Some(2.0)), &series(a.clone(), Some(2.0))).unwrap();
        let gk = gain(&series(ku, Some(2.0)), &series(a, Some(2.0))).unwrap();
        prop_assert!((gk - g / k.abs()).abs() <= 1e-12 * g.max(1.0) / k.abs());
    }

    #[test]
    fn gain_is_linear_in_response(k in -5.0..5.0f64, shift in -3.0..3.0f64) {
        let u = series(periodic(200, 4, |w| w.sin()), Some(2.0));
        let a = periodic(200, 4, |w| 0.3 * (w + shift).sin());
        let ka: Vec<f64> = a.iter().map(|x| k * x).collect();
        let g = gain(&u, &series(a, Some(2.0))).unwrap();
        let gk = gain(&u, &series(ka, Some(2.0))).unwrap();
        prop_assert!((gk - k.abs() * g).abs() <= 1e-12 * g.max(1e-12) * k.abs().max(1.0));
    }

    #[test]
    fn power_ignores_circular_shift(v in prop::collection::vec(-1.0..1.0f64, 1..300), s in 0usize..300) {
        let mut w = v.clone();
        let s = s % v.len();
        w.rotate_left(s);
        let p1 = power(&series(v, None)).unwrap();
        let p2 = power(&series(w, None)).unwrap();
        prop_assert!((p1 - p2).abs() <= 1e-12 * p1.max(1e-300));
    }

    #[test]
    fn delay_shifts_phase(delta in 0usize..400, shift in -1.0..1.0f64) {
        let per = 400;
        let u = periodic(per, 8, |w| w.sin());
        let a = periodic(per, 8, |w| 0.2 * (w + shift).sin());
        let mut delayed = a.clone();
        delayed.rotate_right(delta);
        let p0 = phase(&series(u.clone(), Some(4.0)), &series(a, Some(4.0))).unwrap();
        let p1 = phase(&series(u, Some(4.0)), &series(delayed, Some(4.0))).unwrap();
        let quantum = 2.0 * PI / per as f64;
        let expected = p0 - 2.0 * PI * delta as f64 / per as f64;
        let diff = (p1 - expected).rem_euclid(2.0 * PI);
        let diff = diff.min(2.0 * PI - diff);
        prop_assert!(diff <= quantum * (1.0 + 1e-9), "p0={p0} p1={p1} delta={delta}");
    }

    #[test]
    fn sampled_sine_rms(amp in 0.0..1.0f64, cycles in 1usize..6) {
        let per = 2000;
        let v = periodic(per, cycles, |w| amp * w.sin());
        let rms = series(v, Some(20.0)).rms();
        prop_assert!((rms - amp / 2f64.sqrt()).abs() <= 1e-12);
    }

    #[test]
    fn prts_repeats_every_cycle(stages in 2u32..6, v in 0.001..0.1f64, sps in 1usize..5) {
        let state = sps as f64 / 100.0;
        let x = gen_prts(stages, v, state, 100.0, 3).unwrap();
        let per = x.samples_per_period().unwrap();
        prop_assert_eq!(per, (3usize.pow(stages) - 1) * sps);
        let s = x.samples();
        for k in 0..per {
            prop_assert_eq!(s[k], s[k + per]);
            prop_assert_eq!(s[k], s[k + 2 * per]);
        }
    }
}

/// First-order lag `τ·ẏ = −y + u` driven by a continuous-time input,
/// integrated with fine RK4 substeps and sampled at 100 Hz.
fn first_order_response(tau: f64, u: impl Fn(f64) -> f64, n: usize) -> Vec<f64> {
    let rate = 100.0;
    let sub = 20;
    let h = 1.0 / rate / sub as f64;
    let f = |t: f64, y: f64| (u(t) - y) / tau;
    let mut y = 0.0;
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        out.push(y);
        for j in 0..sub {
            let t = k as f64 / rate + j as f64 * h;
            let k1 = f(t, y);
            let k2 = f(t + h / 2.0, y + h / 2.0 * k1);
            let k3 = f(t + h / 2.0, y + h / 2.0 * k2);
            let k4 = f(t + h, y + h * k3);
            y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
    }
    out
}

fn lag_oracle(tau: f64, f: f64) -> (f64, f64) {
    let wt = 2.0 * PI * f * tau;
    (1.0 / (1.0 + wt * wt).sqrt(), -wt.atan())
}

#[test]
fn frf_recovers_first_order_lag_multisine() {
    let (tau, period) = (0.2, 20.0);
    let harmonics = [1usize, 2, 3, 5, 8, 13, 21, 34];
    let u = |t: f64| {
        harmonics
            .iter()
            .map(|&h| (2.0 * PI * h as f64 * t / period + h as f64).sin())
            .sum::<f64>()
    };
    let n = 10 * 2000;
    let us: Vec<f64> = (0..n).map(|k| u(k as f64 / 100.0)).collect();
    let ys = first_order_response(tau, u, n);
    let us = trim_steady_state(&series(us, Some(period)), 2).unwrap();
    let ys = trim_steady_state(&series(ys, Some(period)), 2).unwrap();
    let freqs: Vec<f64> = harmonics.iter().map(|&h| h as f64 / period).collect();
    let frf = estimate_frf(&us, &ys, &freqs).unwrap();
    for (i, &f) in freqs.iter().enumerate() {
        let (g, p) = lag_oracle(tau, f);
        assert!(
            (frf.gain[i] / g - 1.0).abs() < 0.02,
            "{f} Hz gain {} vs {g}",
            frf.gain[i]
        );
        assert!(
            (frf.phase[i] - p).abs() < 0.02,
            "{f} Hz phase {} vs {p}",
            frf.phase[i]
        );
        assert!((frf.coherence[i] - 1.0).abs() <= 1e-9);
    }
}

#[test]
fn frf_recovers_first_order_lag_prts() {
    let tau = 0.2;
    let x = gen_prts(4, 0.01, 0.25, 100.0, 6).unwrap();
    let samples = x.samples().to_vec();
    // PRTS position is piecewise linear between samples.
    let interp = |t: f64| {
        let s = t * 100.0;
        let k = s.floor() as usize;
        let frac = s - k as f64;
        let a = samples[k.min(samples.len() - 1)];
        let b = samples[(k + 1).min(samples.len() - 1)];
        a + (b - a) * frac
    };
    let ys = first_order_response(tau, interp, samples.len());
    let u = trim_steady_state(&x, 2).unwrap();
    let y = trim_steady_state(&series(ys, x.period_s()), 2).unwrap();
    let freqs = stimulus_harmonics(&u, 0.05, 2.5).unwrap();
    eprintln!("{} harmonics", freqs.len());
    assert!(freqs.len() >= 8);
    let frf = estimate_frf(&u, &y, &freqs).unwrap();
    for (i, &f) in freqs.iter().enumerate() {
        let (g, p) = lag_oracle(tau, f);
        assert!(
            (frf.gain[i] / g - 1.0).abs() < 0.02,
            "{f} Hz gain {} vs {g}",
            frf.gain[i]
        );
        assert!(
            (frf.phase[i] - p).abs() < 0.02,
            "{f} Hz phase {} vs {p}",
            frf.phase[i]
        );
        assert!((frf.coherence[i] - 1.0).abs() <= 1e-9);
    }
}

#[test]
fn coherence_falls_as_noise_grows() {
    let per = 500;
    let u = periodic(per, 8, |w| w.sin() + 0.5 * (3.0 * w).sin());
    let a = periodic(per, 8, |w| {
        0.3 * (w - 0.4).sin() + 0.1 * (3.0 * w - 1.0).sin()
    });
    let mut rng = StdRng::seed_from_u64(7);
    let noise: Vec<f64> = (0..a.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let freqs = [0.2, 0.6];
    let us = series(u, Some(5.0));
    let mut prev = [1.0 + 1e-9; 2];
    for (i, sigma) in [0.0, 0.01, 0.03, 0.1, 0.3].into_iter().enumerate() {
        let noisy: Vec<f64> = a.iter().zip(&noise).map(|(x, e)| x + sigma * e).collect();
        let frf = estimate_frf(&us, &series(noisy, Some(5.0)), &freqs).unwrap();
        for (&c, p) in frf.coherence.iter().zip(prev.iter_mut()) {
            if i == 0 {
                assert!((c - 1.0).abs() <= 1e-9);
            } else {
                assert!(c < *p, "sigma {sigma}: coherence {c} not below {p}");
            }
            *p = c;
        }
    }
}

#[test]
fn frf_agrees_with_scalar_scores_for_a_sine() {
    let tau = 0.5;
    let (period, n) = (20.0, 10 * 2000);
    let u = |t: f64| (2.0 * PI * t / period).sin();
    let us: Vec<f64> = (0..n).map(|k| u(k as f64 / 100.0)).collect();
    let ys = first_order_response(tau, u, n);
    let us = trim_steady_state(&series(us, Some(period)), 2).unwrap();
    let ys = trim_steady_state(&series(ys, Some(period)), 2).unwrap();
    let frf = estimate_frf(&us, &ys, &[0.05]).unwrap();
    let g = gain(&us, &ys).unwrap();
    let p = phase(&us, &ys).unwrap();
    assert!((frf.gain[0] / g - 1.0).abs() < 0.02);
    assert!((frf.phase[0] - p).abs() <= 2.0 * PI / 2000.0);
}
