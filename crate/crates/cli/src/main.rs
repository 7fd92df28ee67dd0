//! `posturebench` command line.
//!
//! Exit codes: 0 ok, 1 usage, 2 data or I/O error, 3 simulated fall (the
//! trial file is still written).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use posturebench::io::{
    analyze, compare_reports, compare_to_set, fmt_sig9, load_trial_config, read_trial,
    write_atomic, write_report_bundle, write_trial, AnalyzeOptions, FrfRequest, ReferenceSet,
    ScoreReport, MODEL_ENV,
};
use posturebench::metrics::LikenessWeights;
use posturebench::perturbation::{Axis, PerturbationProfile, ProfileKind};
use posturebench::plant::AnthropometricModel;
use posturebench::testbench::{run_trial, Channel, Outcome};
use posturebench::Error;

#[derive(Parser)]
#[command(
    name = "posturebench",
    version,
    about = "Posture-control benchmarking workbench"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Emit a perturbation profile as CSV (or JSON).
    Generate(GenerateArgs),
    /// Run a trial config and write the trial file.
    Simulate(SimulateArgs),
    /// Score a trial file.
    Analyze(AnalyzeArgs),
    /// Compare two score reports, or a report with a reference set.
    Compare(CompareArgs),
    /// Write scores plus plot data (CSV and SVG) for a trial file.
    Report(ReportArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ProfileArg {
    Sine,
    Prts,
    TiltImpulse,
    TranslationImpulse,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, value_enum, default_value = "sine")]
    kind: ProfileArg,
    /// Sine amplitude, degrees.
    #[arg(long, default_value_t = 2.0)]
    amplitude_deg: f64,
    #[arg(long, default_value_t = 0.05)]
    frequency_hz: f64,
    /// PRTS velocity level, degrees per second.
    #[arg(long, default_value_t = 0.5)]
    velocity_deg: f64,
    #[arg(long, default_value_t = 5)]
    stages: u32,
    #[arg(long, default_value_t = 0.25)]
    state_duration_s: f64,
    /// Impulse peak: degrees for tilt, metres for translation.
    #[arg(long, default_value_t = 1.0)]
    peak: f64,
    #[arg(long, default_value_t = 1.0)]
    width_s: f64,
    #[arg(long, default_value_t = 100.0)]
    duration_s: f64,
    #[arg(long, default_value_t = 100.0)]
    rate_hz: f64,
    /// Output file; standard output when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct SimulateArgs {
    /// Config file, or a bundled config: tilt-sine-nominal,
    /// tilt-sine-added-mass, tilt-prts, bsrp.
    config: String,
    #[arg(short, long)]
    output: PathBuf,
    /// Print a JSON summary on standard output.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ScoringArgs {
    /// Stimulus periods to discard before scoring.
    #[arg(long)]
    settle: Option<usize>,
    /// Stimulus period, for records whose header carries none.
    #[arg(long)]
    period_s: Option<f64>,
    /// Estimate the FRF at the excited stimulus harmonics.
    #[arg(long)]
    frf: bool,
    /// Estimate the FRF at these frequencies instead (Hz, repeatable).
    #[arg(long = "frf-freq")]
    frf_freq: Vec<f64>,
    /// Input column, e.g. fs_rad.
    #[arg(long)]
    input: Option<String>,
    /// Response column, default com_rad.
    #[arg(long)]
    response: Option<String>,
    /// Body model file for records without a model echo.
    #[arg(long)]
    model: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyzeArgs {
    trial: PathBuf,
    #[command(flatten)]
    scoring: ScoringArgs,
    /// Also write the JSON report here.
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct CompareArgs {
    report: PathBuf,
    /// Second report; the first is compared against it.
    other: Option<PathBuf>,
    /// Reference set JSON.
    #[arg(long, conflicts_with_all = ["other", "placeholder"])]
    reference: Option<PathBuf>,
    /// Compare against the bundled synthetic (non-human) placeholder.
    #[arg(long, conflicts_with = "other")]
    placeholder: bool,
    #[arg(long, default_value_t = 1.0)]
    weight_gain: f64,
    #[arg(long, default_value_t = 1.0)]
    weight_phase: f64,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ReportArgs {
    trial: PathBuf,
    /// Output directory.
    #[arg(short, long)]
    output: PathBuf,
    #[command(flatten)]
    scoring: ScoringArgs,
    #[arg(long)]
    title: Option<String>,
}

enum Failure {
    Data(Error),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Data(e)
    }
}

type CliResult = Result<ExitCode, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Generate(a) => generate(a),
        Command::Simulate(a) => simulate(a),
        Command::Analyze(a) => analyze_cmd(a),
        Command::Compare(a) => compare(a),
        Command::Report(a) => report(a),
    };
    match result {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {}", one_line(&msg));
            ExitCode::from(1)
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {}", one_line(&e.to_string()));
            ExitCode::from(2)
        }
    }
}

fn one_line(s: &str) -> String {
    s.split('\n')
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .collect::<Vec<_>>()
        .join("; ")
}

fn emit(output: Option<&Path>, text: &str) -> Result<(), Failure> {
    match output {
        Some(p) => write_atomic(p, text.as_bytes())?,
        None => print_stdout(text)?,
    }
    Ok(())
}

/// Writes to standard output; a closed pipe (e.g. `| head`) is not an error.
fn print_stdout(text: &str) -> Result<(), Failure> {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Error::from(e).into()),
        _ => Ok(()),
    }
}

fn generate(a: GenerateArgs) -> CliResult {
    let (axis, kind, column) = match a.kind {
        ProfileArg::Sine => (
            Axis::SupportTilt,
            ProfileKind::Sine {
                amplitude: a.amplitude_deg.to_radians(),
                frequency_hz: a.frequency_hz,
            },
            "tilt_rad",
        ),
        ProfileArg::Prts => (
            Axis::SupportTilt,
            ProfileKind::Prts {
                stages: a.stages,
                velocity: a.velocity_deg.to_radians(),
                state_duration_s: a.state_duration_s,
            },
            "tilt_rad",
        ),
        ProfileArg::TiltImpulse => (
            Axis::SupportTilt,
            ProfileKind::TiltImpulse {
                peak: a.peak.to_radians(),
                width_s: a.width_s,
            },
            "tilt_rad",
        ),
        ProfileArg::TranslationImpulse => (
            Axis::SupportTranslation,
            ProfileKind::TranslationImpulse {
                peak: a.peak,
                width_s: a.width_s,
            },
            "translation_m",
        ),
    };
    let profile = PerturbationProfile { axis, kind };
    let series = profile.realize(a.duration_s, a.rate_hz)?;
    let text = if a.json {
        let mut s = serde_json::to_string_pretty(&series).map_err(Error::from)?;
        s.push('\n');
        s
    } else {
        let mut s = String::from("# posturebench-profile v1\n");
        s.push_str(&format!("# rate_hz = {}\n", series.rate_hz()));
        match series.period_s() {
            Some(p) => s.push_str(&format!("# period_s = {p}\n")),
            None => s.push_str("# period_s = none\n"),
        }
        s.push_str(&format!("time_s,{column}\n"));
        for (k, v) in series.samples().iter().enumerate() {
            s.push_str(&format!(
                "{},{}\n",
                fmt_sig9(k as f64 / series.rate_hz()),
                fmt_sig9(*v)
            ));
        }
        s
    };
    emit(a.output.as_deref(), &text)?;
    Ok(ExitCode::SUCCESS)
}

fn simulate(a: SimulateArgs) -> CliResult {
    let spec = load_trial_config(&a.config)?;
    let record = run_trial(&spec)?;
    write_trial(&record, &a.output)?;
    let fallen = record.meta.outcome == Outcome::Fallen;
    if a.json {
        let summary = serde_json::json!({
            "output": a.output.display().to_string(),
            "outcome": record.meta.outcome,
            "fall_time_s": record.meta.fall_time_s,
            "samples": record.len(),
        });
        println!(
            "{}",
            serde_json::to_string_pretty(&summary).map_err(Error::from)?
        );
    } else if fallen {
        eprintln!(
            "fallen at {:.2} s; partial record written to {}",
            record.meta.fall_time_s.unwrap_or(0.0),
            a.output.display()
        );
    } else {
        eprintln!(
            "completed; {} samples written to {}",
            record.len(),
            a.output.display()
        );
    }
    Ok(if fallen {
        ExitCode::from(3)
    } else {
        ExitCode::SUCCESS
    })
}

fn channel_arg(name: &Option<String>) -> Result<Option<Channel>, Failure> {
    match name {
        None => Ok(None),
        Some(n) => Channel::from_column(n)
            .map(Some)
            .ok_or_else(|| Failure::Usage(format!("unknown column `{n}`"))),
    }
}

fn load_record(
    path: &Path,
    s: &ScoringArgs,
) -> Result<posturebench::testbench::TrialRecord, Failure> {
    let model_path = s.model.clone().or_else(|| {
        std::env::var_os(MODEL_ENV)
            .filter(|v| !v.is_empty())
            .map(PathBuf::from)
    });
    let model = match model_path {
        Some(p) => {
            let text = std::fs::read_to_string(&p)
                .map_err(|e| Error::Config(format!("model {}: {e}", p.display())))?;
            Some(AnthropometricModel::from_toml(&text)?)
        }
        None => None,
    };
    Ok(read_trial(path, model.as_ref())?)
}

fn score(
    path: &Path,
    s: &ScoringArgs,
) -> Result<(posturebench::testbench::TrialRecord, ScoreReport), Failure> {
    let record = load_record(path, s)?;
    let frf = if !s.frf_freq.is_empty() {
        FrfRequest::Frequencies(s.frf_freq.clone())
    } else if s.frf {
        FrfRequest::Auto
    } else {
        FrfRequest::None
    };
    let opts = AnalyzeOptions {
        settle_periods: s.settle,
        period_s: s.period_s,
        input: channel_arg(&s.input)?,
        response: channel_arg(&s.response)?,
        frf,
    };
    let report = analyze(&record, &opts)?;
    Ok((record, report))
}

fn analyze_cmd(a: AnalyzeArgs) -> CliResult {
    let (_, report) = score(&a.trial, &a.scoring)?;
    let json = report.to_json()?;
    if let Some(p) = &a.output {
        write_atomic(p, json.as_bytes())?;
    }
    if a.json {
        print_stdout(&json)?;
    } else {
        println!("outcome      {:?}", report.outcome);
        println!("gain         {:.6}", report.gain);
        println!("phase        {:.6} rad", report.phase_rad);
        println!(
            "power        {:.6e} rad^2 (tabulated as {})",
            report.power_rad2, report.power_display_unit
        );
        if let Some(t) = report.normalized_torque_rms {
            println!("torque/mgh   {t:.6} rms");
        }
        println!(
            "scored       {} periods of {} s after discarding {}",
            report.trim.periods_scored, report.trim.period_s, report.trim.settle_periods
        );
        if let Some(f) = &report.frf {
            println!("frf          freq_hz  gain  phase_rad  coherence");
            for i in 0..f.len() {
                println!(
                    "             {:.4}  {:.4}  {:+.4}  {:.4}",
                    f.frequencies_hz[i], f.gain[i], f.phase[i], f.coherence[i]
                );
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn compare(a: CompareArgs) -> CliResult {
    let weights = LikenessWeights {
        log_gain: a.weight_gain,
        phase: a.weight_phase,
    };
    let subject = ScoreReport::load(&a.report)?;
    let label = a.report.display().to_string();
    let comparisons = match (&a.other, &a.reference, a.placeholder) {
        (Some(other), _, _) => {
            let reference = ScoreReport::load(other)?;
            vec![compare_reports(
                &subject,
                &reference,
                (&label, &other.display().to_string()),
                weights,
            )?]
        }
        (None, Some(path), _) => {
            compare_to_set(&subject, &label, &ReferenceSet::load(path)?, weights)?
        }
        (None, None, true) => {
            let freqs = match &subject.frf {
                Some(f) => f.frequencies_hz.clone(),
                None => vec![1.0 / subject.trim.period_s],
            };
            compare_to_set(
                &subject,
                &label,
                &ReferenceSet::placeholder(&freqs)?,
                weights,
            )?
        }
        (None, None, false) => {
            return Err(Failure::Usage(
                "give a second report, --reference or --placeholder".into(),
            ))
        }
    };
    if a.json {
        let value = if comparisons.len() == 1 {
            serde_json::to_string_pretty(&comparisons[0])
        } else {
            serde_json::to_string_pretty(&comparisons)
        };
        println!("{}", value.map_err(Error::from)?);
    } else {
        for c in &comparisons {
            println!(
                "{} vs {}: likeness distance {:.6}",
                c.subject, c.reference, c.likeness_distance
            );
            if let Some(d) = &c.deltas {
                println!(
                    "  delta gain {:+.6}  phase {:+.6} rad  power {:+.6e} rad^2",
                    d.gain, d.phase_rad, d.power_rad2
                );
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn report(a: ReportArgs) -> CliResult {
    let (record, report) = score(&a.trial, &a.scoring)?;
    let title = a.title.unwrap_or_else(|| {
        a.trial
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default()
    });
    write_report_bundle(&record, &report, &a.output, &title)?;
    eprintln!(
        "wrote scores.json, sway.csv, sway.svg to {}",
        a.output.display()
    );
    Ok(ExitCode::SUCCESS)
}
