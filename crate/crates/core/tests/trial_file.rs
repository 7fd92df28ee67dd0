//! Trial-file round trip over randomized records.

use std::collections::BTreeMap;

use posturebench::io::{parse_trial, trial_to_string};
use posturebench::testbench::{Channel, Outcome, TrialMeta, TrialRecord};
use proptest::prelude::*;

fn record_strategy() -> impl Strategy<Value = TrialRecord> {
    (
        1usize..120,
        prop::sample::select(vec![50.0, 100.0, 200.0, 1000.0]),
        prop::option::of(0.5..60.0f64),
        any::<bool>(),
        prop::collection::vec(any::<bool>(), Channel::ALL.len()),
        any::<u64>(),
        -1000.0..1000.0f64,
    )
        .prop_map(|(n, rate, period, fallen, keep, seed, start)| {
            let mut state = seed | 1;
            let mut next = move || {
                // xorshift, for bulk values without proptest overhead
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                (state >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
            };
            let mut channels = BTreeMap::new();
            for (c, k) in Channel::ALL.into_iter().zip(keep) {
                let required = matches!(c, Channel::Fs | Channel::Com);
                if k || required {
                    let scale = if c.is_angle() { 0.5 } else { 300.0 };
                    channels.insert(c, (0..n).map(|_| scale * next()).collect());
                }
            }
            TrialRecord {
                meta: TrialMeta {
                    spec: None,
                    model: None,
                    outcome: if fallen {
                        Outcome::Fallen
                    } else {
                        Outcome::Completed
                    },
                    fall_time_s: fallen.then(|| n as f64 / rate),
                    rate_hz: rate,
                    period_s: period,
                },
                start_time_s: (start * rate).round() / rate,
                channels,
            }
        })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 128, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn written_records_read_back(r in record_strategy()) {
        let text = trial_to_string(&r).unwrap();
        let back = parse_trial(&text, None).unwrap();
        prop_assert_eq!(&back.meta, &r.meta);
        prop_assert_eq!(back.len(), r.len());
        prop_assert!((back.start_time_s - r.start_time_s).abs() <= 1e-6);
        prop_assert_eq!(back.channels.keys().collect::<Vec<_>>(), r.channels.keys().collect::<Vec<_>>());
        for (c, v) in &r.channels {
            let w = &back.channels[c];
            for (a, b) in v.iter().zip(w) {
                let tol = if c.is_angle() { 1e-8 } else { 1e-8 * a.abs().max(1.0) };
                prop_assert!((a - b).abs() <= tol, "{:?}: {} vs {}", c, a, b);
            }
        }
        // Writing what was read reproduces the text exactly.
        prop_assert_eq!(trial_to_string(&back).unwrap(), text);
    }
}
