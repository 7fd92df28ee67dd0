//! Files and reports: trial CSV, TOML trial configs, JSON score reports and
//! reference sets, and plot data.

mod config;
mod plot;
mod report;
mod trial_file;

pub use config::{
    bundled_config, bundled_config_names, bundled_model, load_trial_config, parse_trial_config,
    MODEL_ENV,
};
pub use plot::{panel_channels, sway_csv, sway_svg, write_report_bundle};
pub use report::{
    analyze, compare_reports, compare_to_set, sha256_hex, AnalyzeOptions, Comparison, Deltas,
    FrfRequest, Provenance, ReferenceEntry, ReferenceSet, ScoreReport, TrimInfo, COMPARISON_FORMAT,
    REFERENCE_FORMAT, REPORT_FORMAT,
};
pub use trial_file::{
    fmt_sig9, parse_trial, read_trial, trial_to_string, write_atomic, write_trial, TRIAL_FORMAT,
    TRIAL_VERSION,
};
