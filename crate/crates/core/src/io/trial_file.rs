//! Trial CSV: `#`-commented header lines followed by a comma-separated
//! sample table. Numbers carry 9 significant digits.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::plant::{com_sway, AnthropometricModel};
use crate::testbench::{Channel, Outcome, TrialMeta, TrialRecord, TrialSpec};

pub const TRIAL_FORMAT: &str = "posturebench-trial";
pub const TRIAL_VERSION: u32 = 1;
const UNITS: &str = "angles rad, torques N*m, translation m, time s";

/// Renders a value with 9 significant digits.
pub fn fmt_sig9(x: f64) -> String {
    format!("{x:.8e}")
}

/// Serializes a record to trial-file text.
pub fn trial_to_string(record: &TrialRecord) -> Result<String> {
    if record.is_empty() {
        return Err(Error::Format("refusing to write an empty record".into()));
    }
    let n = record.len();
    let cols: Vec<Channel> = Channel::ALL
        .into_iter()
        .filter(|c| record.has(*c))
        .collect();
    for c in &cols {
        if record.channels[c].len() != n {
            return Err(Error::Mismatch(format!(
                "channel {} has a different length",
                c.column()
            )));
        }
    }
    let m = &record.meta;
    let mut out = String::with_capacity(n * cols.len() * 16);
    let _ = writeln!(out, "# {TRIAL_FORMAT} v{TRIAL_VERSION}");
    let _ = writeln!(out, "# rate_hz = {}", m.rate_hz);
    let _ = writeln!(out, "# start_time_s = {}", record.start_time_s);
    match m.period_s {
        Some(p) => writeln!(out, "# period_s = {p}"),
        None => writeln!(out, "# period_s = none"),
    }
    .ok();
    let outcome = match m.outcome {
        Outcome::Completed => "completed",
        Outcome::Fallen => "fallen",
    };
    let _ = writeln!(out, "# outcome = {outcome}");
    match m.fall_time_s {
        Some(t) => writeln!(out, "# fall_time_s = {t}"),
        None => writeln!(out, "# fall_time_s = none"),
    }
    .ok();
    let _ = writeln!(out, "# units = {UNITS}");
    if let Some(spec) = &m.spec {
        let _ = writeln!(out, "# spec = {}", serde_json::to_string(spec)?);
    }
    if let Some(model) = &m.model {
        let _ = writeln!(out, "# model = {}", serde_json::to_string(model)?);
    }
    out.push_str("time_s");
    for c in &cols {
        out.push(',');
        out.push_str(c.column());
    }
    out.push('\n');
    let series: Vec<&[f64]> = cols.iter().map(|c| record.channels[c].as_slice()).collect();
    for k in 0..n {
        out.push_str(&fmt_sig9(record.time(k)));
        for s in &series {
            out.push(',');
            out.push_str(&fmt_sig9(s[k]));
        }
        out.push('\n');
    }
    Ok(out)
}

/// Writes `contents` to a sibling temp file, then renames it into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let name = path
        .file_name()
        .ok_or_else(|| Error::Format(format!("`{}` is not a file path", path.display())))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(format!(".tmp{}", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    std::fs::write(&tmp, contents)?;
    if let Err(e) = std::fs::rename(&tmp, path) {
        let _ = std::fs::remove_file(&tmp);
        return Err(e.into());
    }
    Ok(())
}

pub fn write_trial(record: &TrialRecord, path: &Path) -> Result<()> {
    let text = trial_to_string(record)?;
    write_atomic(path, text.as_bytes())
}

fn none_or<T>(v: &str, f: impl FnOnce(&str) -> Option<T>) -> Option<Option<T>> {
    if v == "none" {
        Some(None)
    } else {
        f(v).map(Some)
    }
}

/// Parses trial-file text.
///
/// `model` is used when the header carries none; with a model, a missing
/// `com_rad` column is recomputed from the segment channels. Legacy files
/// without the `rate_hz` header take the rate from the first time step.
/// Columns the tool does not know are ignored.
pub fn parse_trial(text: &str, model: Option<&AnthropometricModel>) -> Result<TrialRecord> {
    let mut lines = text.lines().enumerate().peekable();
    let mut rate: Option<f64> = None;
    let mut start: Option<f64> = None;
    let mut period: Option<f64> = None;
    let mut outcome = Outcome::Completed;
    let mut fall_time = None;
    let mut spec: Option<TrialSpec> = None;
    let mut header_model: Option<AnthropometricModel> = None;
    let mut saw_version = false;

    let bad = |line: usize, msg: String| Error::Format(format!("line {}: {msg}", line + 1));

    while let Some((i, line)) = lines.peek().copied() {
        let Some(body) = line.strip_prefix('#') else {
            break;
        };
        lines.next();
        let body = body.trim();
        if let Some(v) = body.strip_prefix(TRIAL_FORMAT) {
            let v = v.trim();
            if v != format!("v{TRIAL_VERSION}") {
                return Err(bad(
                    i,
                    format!("unsupported format version `{v}`, expected v{TRIAL_VERSION}"),
                ));
            }
            saw_version = true;
            continue;
        }
        let Some((key, value)) = body.split_once('=') else {
            continue;
        };
        let (key, value) = (key.trim(), value.trim());
        let num = |v: &str| v.parse::<f64>().ok().filter(|x| x.is_finite());
        match key {
            "rate_hz" => {
                rate = Some(num(value).ok_or_else(|| bad(i, format!("bad rate_hz `{value}`")))?)
            }
            "start_time_s" => {
                start =
                    Some(num(value).ok_or_else(|| bad(i, format!("bad start_time_s `{value}`")))?)
            }
            "period_s" => {
                period =
                    none_or(value, num).ok_or_else(|| bad(i, format!("bad period_s `{value}`")))?
            }
            "fall_time_s" => {
                fall_time = none_or(value, num)
                    .ok_or_else(|| bad(i, format!("bad fall_time_s `{value}`")))?
            }
            "outcome" => {
                outcome = match value {
                    "completed" => Outcome::Completed,
                    "fallen" => Outcome::Fallen,
                    _ => return Err(bad(i, format!("unknown outcome `{value}`"))),
                }
            }
            "spec" => {
                spec = Some(serde_json::from_str(value).map_err(|e| bad(i, format!("spec: {e}")))?)
            }
            "model" => {
                header_model =
                    Some(serde_json::from_str(value).map_err(|e| bad(i, format!("model: {e}")))?)
            }
            _ => {}
        }
    }
    if !saw_version {
        return Err(Error::Format(format!(
            "missing `# {TRIAL_FORMAT} v{TRIAL_VERSION}` version line"
        )));
    }

    let (hi, header) = lines
        .next()
        .ok_or_else(|| Error::Format("missing column header".into()))?;
    let names: Vec<&str> = header.split(',').map(str::trim).collect();
    if names.first() != Some(&"time_s") {
        return Err(bad(hi, "first column must be time_s".into()));
    }
    let mut columns: Vec<Option<Channel>> = Vec::with_capacity(names.len());
    for (j, name) in names.iter().enumerate().skip(1) {
        let c = Channel::from_column(name);
        if let Some(c) = c {
            if columns.contains(&Some(c)) {
                return Err(bad(hi, format!("column {} `{name}` appears twice", j + 1)));
            }
        }
        columns.push(c);
    }

    let mut time = Vec::new();
    let mut data: Vec<Vec<f64>> = vec![Vec::new(); columns.len()];
    for (row, (i, line)) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != names.len() {
            return Err(bad(
                i,
                format!(
                    "data row {row} has {} columns, header has {}",
                    cells.len(),
                    names.len()
                ),
            ));
        }
        for (j, cell) in cells.iter().enumerate() {
            let v: f64 = cell.trim().parse().map_err(|_| {
                bad(
                    i,
                    format!(
                        "data row {row}, column {} `{}`: not a number",
                        j + 1,
                        names[j]
                    ),
                )
            })?;
            if j == 0 {
                time.push(v);
            } else {
                data[j - 1].push(v);
            }
        }
    }
    if time.is_empty() {
        return Err(Error::Format("no data rows".into()));
    }

    let t0 = start.unwrap_or(time[0]);
    let rate = match rate {
        Some(r) => r,
        None if time.len() >= 2 && time[1] > time[0] => 1.0 / (time[1] - time[0]),
        None => return Err(Error::Format("cannot infer the sample rate".into())),
    };
    if !(rate > 0.0) {
        return Err(Error::Format(format!("rate_hz must be > 0, got {rate}")));
    }
    let dt = 1.0 / rate;
    for (k, &t) in time.iter().enumerate() {
        let expected = t0 + k as f64 * dt;
        if (t - expected).abs() > 0.05 * dt + 1e-8 * expected.abs() {
            return Err(Error::Format(format!(
                "non-uniform time base at data row {k}: t = {t}, expected {expected}"
            )));
        }
    }

    let mut channels = BTreeMap::new();
    for (c, values) in columns.into_iter().zip(data) {
        if let Some(c) = c {
            channels.insert(c, values);
        }
    }
    if !channels.contains_key(&Channel::Fs) {
        return Err(Error::MissingChannel(Channel::Fs.column()));
    }
    if ![Channel::Ss, Channel::Ls, Channel::Ts, Channel::Com]
        .iter()
        .any(|c| channels.contains_key(c))
    {
        return Err(Error::Format(
            "no body channel (ss/ls/ts/com) present".into(),
        ));
    }

    let model = header_model.or_else(|| model.cloned());
    let mut record = TrialRecord {
        meta: TrialMeta {
            spec,
            model,
            outcome,
            fall_time_s: fall_time,
            rate_hz: rate,
            period_s: period,
        },
        start_time_s: t0,
        channels,
    };
    if !record.has(Channel::Com) {
        if let Some(m) = record.meta.model.clone() {
            let segs = record.segment_channels(m.segments.len())?;
            let com = (0..record.len())
                .map(|k| {
                    let sways: Vec<f64> = segs.iter().map(|s| s[k]).collect();
                    com_sway(&sways, &m)
                })
                .collect::<Result<Vec<f64>>>()?;
            record.channels.insert(Channel::Com, com);
        }
    }
    Ok(record)
}

pub fn read_trial(path: &Path, model: Option<&AnthropometricModel>) -> Result<TrialRecord> {
    let text = crate::error::read_text(path)?;
    parse_trial(&text, model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testbench::TrialMeta;

    fn record(n: usize) -> TrialRecord {
        let mut ch = BTreeMap::new();
        let s = |f: f64| {
            (0..n)
                .map(|k| (k as f64 * f).sin() * 0.01)
                .collect::<Vec<_>>()
        };
        ch.insert(Channel::Fs, s(0.01));
        ch.insert(Channel::Ss, s(0.02));
        ch.insert(Channel::Com, s(0.02));
        ch.insert(
            Channel::AnkleTorque,
            s(0.03).iter().map(|x| x * 1e4).collect(),
        );
        TrialRecord {
            meta: TrialMeta {
                spec: None,
                model: None,
                outcome: Outcome::Completed,
                fall_time_s: None,
                rate_hz: 100.0,
                period_s: Some(20.0),
            },
            start_time_s: 0.0,
            channels: ch,
        }
    }

    #[test]
    fn sig9_format() {
        assert_eq!(fmt_sig9(0.123456789123), "1.23456789e-1");
        assert_eq!(fmt_sig9(0.0), "0.00000000e0");
        assert_eq!(fmt_sig9(-1234.5), "-1.23450000e3");
    }

    #[test]
    fn round_trip() {
        let r = record(500);
        let text = trial_to_string(&r).unwrap();
        let back = parse_trial(&text, None).unwrap();
        assert_eq!(back.meta, r.meta);
        for (c, v) in &r.channels {
            let w = &back.channels[c];
            let tol = if c.is_angle() { 1e-8 } else { 1e-8 * 100.0 };
            assert!(v.iter().zip(w).all(|(a, b)| (a - b).abs() <= tol));
        }
    }

    #[test]
    fn fallen_header() {
        let mut r = record(10);
        r.meta.outcome = Outcome::Fallen;
        r.meta.fall_time_s = Some(0.1);
        let text = trial_to_string(&r).unwrap();
        assert!(text.contains("# outcome = fallen\n"));
        assert!(text.contains("# fall_time_s = 0.1\n"));
        let back = parse_trial(&text, None).unwrap();
        assert_eq!(back.meta.outcome, Outcome::Fallen);
        assert_eq!(back.meta.fall_time_s, Some(0.1));
    }

    #[test]
    fn empty_rejected() {
        let mut r = record(0);
        r.channels.values_mut().for_each(Vec::clear);
        assert!(trial_to_string(&r).is_err());
    }

    #[test]
    fn diagnostics() {
        let text = trial_to_string(&record(20)).unwrap();
        let v2 = text.replacen("v1", "v2", 1);
        assert!(parse_trial(&v2, None)
            .unwrap_err()
            .to_string()
            .contains("version"));

        let mut lines: Vec<&str> = text.lines().collect();
        let first_data = lines.iter().position(|l| l.starts_with("time_s")).unwrap() + 1;
        lines.remove(first_data + 5);
        let gap = lines.join("\n");
        let e = parse_trial(&gap, None).unwrap_err().to_string();
        assert!(e.contains("row 5"), "{e}");

        let mut lines: Vec<String> = text.lines().map(String::from).collect();
        lines[first_data + 3].push_str(",1.0");
        let e = parse_trial(&lines.join("\n"), None)
            .unwrap_err()
            .to_string();
        assert!(e.contains("data row 3") && e.contains("columns"), "{e}");
    }

    #[test]
    fn legacy_without_torques() {
        let text = "# posturebench-trial v1\ntime_s,fs_rad,ss_rad\n0,0,0\n0.01,0.001,0.0005\n0.02,0.002,0.001\n";
        let r = parse_trial(text, None).unwrap();
        assert!((r.meta.rate_hz - 100.0).abs() < 1e-9);
        assert!(!r.has(Channel::AnkleTorque));
        assert!(!r.has(Channel::Com));
        let m = AnthropometricModel::point_mass(16.5, 0.8, 9.81).unwrap();
        assert!(r.normalized_ankle_torque(&m).is_err());
        let with_model = parse_trial(text, Some(&m)).unwrap();
        assert_eq!(
            with_model.channel(Channel::Com).unwrap(),
            with_model.channel(Channel::Ss).unwrap()
        );
    }

    #[test]
    fn needs_fs_and_body() {
        let no_body = "# posturebench-trial v1\ntime_s,fs_rad\n0,0\n0.01,0\n";
        assert!(parse_trial(no_body, None).is_err());
        let no_fs = "# posturebench-trial v1\ntime_s,ss_rad\n0,0\n0.01,0\n";
        assert!(parse_trial(no_fs, None).is_err());
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = std::env::temp_dir().join(format!("pb-trial-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let p = dir.join("t.csv");
        write_trial(&record(5), &p).unwrap();
        write_trial(&record(7), &p).unwrap();
        assert_eq!(read_trial(&p, None).unwrap().len(), 7);
        assert_eq!(std::fs::read_dir(&dir).unwrap().count(), 1);
        std::fs::remove_dir_all(&dir).unwrap();
        assert!(write_trial(&record(5), Path::new("/nonexistent-dir/x.csv")).is_err());
    }
}
