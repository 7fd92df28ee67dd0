//! Plot data for stacked segment-sway panels: a CSV of the plotted series
//! and a static SVG.

use std::fmt::Write as _;
use std::path::Path;

use super::report::ScoreReport;
use super::trial_file::{fmt_sig9, write_atomic};
use crate::error::{Error, Result};
use crate::testbench::{Channel, TrialRecord};

const WIDTH: f64 = 800.0;
const PANEL_H: f64 = 120.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 30.0;
const GAP: f64 = 20.0;
/// Points per polyline; longer records are min/max decimated.
const MAX_POINTS: usize = 2000;

const PANEL_CHANNELS: [(Channel, &str); 6] = [
    (Channel::Fs, "FS"),
    (Channel::Ss, "SS"),
    (Channel::Ls, "LS"),
    (Channel::Ts, "TS"),
    (Channel::Com, "CoM"),
    (Channel::HipTorque, "hip torque"),
];

/// Channels drawn for this record, in panel order. Single-segment records
/// show SS; two-segment records show LS and TS.
pub fn panel_channels(record: &TrialRecord) -> Vec<(Channel, &'static str)> {
    let two_link = record
        .meta
        .model
        .as_ref()
        .is_some_and(|m| m.segments.len() == 2)
        && record.channel(Channel::Ls).ok() != record.channel(Channel::Ts).ok();
    PANEL_CHANNELS
        .into_iter()
        .filter(|(c, _)| record.has(*c))
        .filter(|(c, _)| match c {
            Channel::Ss => !two_link,
            Channel::Ls | Channel::Ts => two_link,
            Channel::HipTorque => false,
            _ => true,
        })
        .collect()
}

pub fn sway_csv(record: &TrialRecord) -> Result<String> {
    let panels = panel_channels(record);
    if panels.is_empty() || record.is_empty() {
        return Err(Error::InsufficientData("nothing to plot".into()));
    }
    let mut out = String::from("time_s");
    for (c, _) in &panels {
        out.push(',');
        out.push_str(c.column());
    }
    out.push('\n');
    for k in 0..record.len() {
        out.push_str(&fmt_sig9(record.time(k)));
        for (c, _) in &panels {
            out.push(',');
            out.push_str(&fmt_sig9(record.channels[c][k]));
        }
        out.push('\n');
    }
    Ok(out)
}

/// Min/max pairs per bucket so spikes survive decimation.
fn decimate(v: &[f64]) -> Vec<(usize, f64)> {
    if v.len() <= MAX_POINTS {
        return v.iter().copied().enumerate().collect();
    }
    let bucket = v.len().div_ceil(MAX_POINTS / 2);
    let mut out = Vec::with_capacity(MAX_POINTS + 2);
    for (b, chunk) in v.chunks(bucket).enumerate() {
        let base = b * bucket;
        let (mut lo, mut hi) = (0, 0);
        for (i, x) in chunk.iter().enumerate() {
            if *x < chunk[lo] {
                lo = i;
            }
            if *x > chunk[hi] {
                hi = i;
            }
        }
        let (first, second) = if lo <= hi { (lo, hi) } else { (hi, lo) };
        out.push((base + first, chunk[first]));
        if second != first {
            out.push((base + second, chunk[second]));
        }
    }
    out
}

/// Stacked panels, one per sway channel, in degrees against time.
pub fn sway_svg(record: &TrialRecord, title: &str) -> Result<String> {
    let panels = panel_channels(record);
    if panels.is_empty() || record.len() < 2 {
        return Err(Error::InsufficientData("nothing to plot".into()));
    }
    let n = record.len();
    let t0 = record.time(0);
    let t1 = record.time(n - 1);
    let plot_w = WIDTH - MARGIN_L - MARGIN_R;
    let height = MARGIN_T + panels.len() as f64 * (PANEL_H + GAP) + 20.0;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{MARGIN_L}" y="18" font-size="13">{}</text>"#,
        escape(title)
    );
    for (i, (c, label)) in panels.iter().enumerate() {
        let v = &record.channels[c];
        let top = MARGIN_T + i as f64 * (PANEL_H + GAP);
        let deg: Vec<f64> = v.iter().map(|x| x.to_degrees()).collect();
        let lim = deg.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1e-3) * 1.1;
        let y = |d: f64| top + PANEL_H / 2.0 - d / lim * PANEL_H / 2.0;
        let x = |k: usize| MARGIN_L + (record.time(k) - t0) / (t1 - t0) * plot_w;
        let _ = writeln!(
            s,
            r##"<rect x="{MARGIN_L}" y="{top}" width="{plot_w}" height="{PANEL_H}" fill="none" stroke="#888"/>"##
        );
        let _ = writeln!(
            s,
            r##"<line x1="{MARGIN_L}" y1="{z:.2}" x2="{x2}" y2="{z:.2}" stroke="#ccc"/>"##,
            z = y(0.0),
            x2 = MARGIN_L + plot_w
        );
        let _ = writeln!(
            s,
            r#"<text x="8" y="{:.2}">{label} (deg)</text>"#,
            top + PANEL_H / 2.0 + 4.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{:.3}</text>"#,
            MARGIN_L - 4.0,
            top + 10.0,
            lim
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{:.3}</text>"#,
            MARGIN_L - 4.0,
            top + PANEL_H,
            -lim
        );
        let mut pts = String::new();
        for (k, d) in decimate(&deg) {
            let _ = write!(pts, "{:.2},{:.2} ", x(k), y(d));
        }
        let _ = writeln!(
            s,
            r##"<polyline fill="none" stroke="#1f4e9c" stroke-width="1" points="{}"/>"##,
            pts.trim_end()
        );
    }
    let bottom = MARGIN_T + panels.len() as f64 * (PANEL_H + GAP) - GAP + 14.0;
    let _ = writeln!(s, r#"<text x="{MARGIN_L}" y="{bottom}">{t0:.1} s</text>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{bottom}" text-anchor="end">{t1:.1} s</text>"#,
        MARGIN_L + plot_w
    );
    s.push_str("</svg>\n");
    Ok(s)
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Writes `scores.json`, `sway.csv` and `sway.svg` into `dir`.
pub fn write_report_bundle(
    record: &TrialRecord,
    report: &ScoreReport,
    dir: &Path,
    title: &str,
) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    write_atomic(&dir.join("scores.json"), report.to_json()?.as_bytes())?;
    write_atomic(&dir.join("sway.csv"), sway_csv(record)?.as_bytes())?;
    write_atomic(&dir.join("sway.svg"), sway_svg(record, title)?.as_bytes())?;
    Ok(())
}
