//! Command-line front end. Exit codes: 0 success, 1 the data is degenerate
//! for the requested computation, 2 bad usage or unreadable input.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use hrload::activity::artifact::{fit_learner, Learner, ModelArtifact};
use hrload::activity::evaluate::{evaluate, EvaluationReport};
use hrload::activity::linear::{fit_linear, residual_diagnostics};
use hrload::activity::rprop::TrainingConfig;
use hrload::activity::{
    build_dataset, parse_exercises, synthetic_exercises, write_exercises, ModelId,
};
use hrload::bootstrap::{bootstrap_cloud, BootstrapConfig, DEFAULT_SEED, DEFAULT_TRIALS};
use hrload::ingest::{
    parse_marks, parse_recording, validate_series, write_recording, SchemaConfig, ValueColumn,
};
use hrload::load_metrics::{
    detect_regime_changes, metric_series, phase_slopes, recovery_delay, PeakConfig, PeakSource,
    DEFAULT_RECOVERY_DELTA,
};
use hrload::moments::{accumulated_trajectory, window_trajectory, DEFAULT_WINDOW};
use hrload::pearson::landmarks;
use hrload::report::{
    landmark_rows, panel_rows, slope_rows, trajectory_rows, write_document, write_table, Format,
    Provenance,
};
use hrload::synth::{generate, marks_for, Segment, SynthSpec};
use hrload::{Error, HeartSeries, Phase};

#[derive(Parser)]
#[command(
    name = "hrload",
    version,
    about = "Heartbeat load analytics on the Pearson plane"
)]
struct Cli {
    /// Output table format.
    #[arg(long, value_enum, global = true, default_value = "csv")]
    format: FormatArg,

    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,

    /// Worker threads for bootstrap trials and parallel model fits.
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Accumulated and window trajectories, metrics, events and slopes.
    Analyze(AnalyzeArgs),
    /// Resampling cloud of Pearson points.
    Bootstrap(BootstrapArgs),
    /// Fit an activity model and save it as JSON.
    Train(TrainArgs),
    /// Score a saved model on an exercise dataset.
    Predict(PredictArgs),
    /// Write a synthetic recording or exercise dataset.
    Synth(SynthArgs),
    /// Reference points and boundaries of the plane.
    Landmarks(LandmarksArgs),
}

#[derive(Args)]
struct InputArgs {
    /// Recording with columns t_s (optional) and hb_ms or hr_bpm.
    input: PathBuf,

    /// Field delimiter.
    #[arg(long, default_value = ",")]
    delimiter: char,

    /// Which value column to read.
    #[arg(long, value_enum, default_value = "auto")]
    value: ValueArg,

    /// Exercise start, seconds.
    #[arg(long, requires = "end_s", conflicts_with = "marks")]
    start_s: Option<f64>,

    /// Exercise end, seconds.
    #[arg(long, requires = "start_s")]
    end_s: Option<f64>,

    /// Sidecar file holding the start and end times.
    #[arg(long)]
    marks: Option<PathBuf>,

    /// Remove beats outside the plausible interval range.
    #[arg(long)]
    drop_implausible: bool,

    /// Treat validation warnings as errors.
    #[arg(long)]
    strict: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum ValueArg {
    Auto,
    HbMs,
    HrBpm,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    input: InputArgs,

    /// Directory receiving the output tables.
    #[arg(long)]
    out_dir: PathBuf,

    /// Sliding window length in samples.
    #[arg(long, default_value_t = DEFAULT_WINDOW)]
    window: usize,

    /// Emit one summary every this many samples.
    #[arg(long, default_value_t = 1)]
    stride: usize,

    /// Peak threshold in robust standard deviations.
    #[arg(long, default_value_t = PeakConfig::default().k)]
    peak_k: f64,

    /// Peak neighbourhood half-width in samples.
    #[arg(long, default_value_t = PeakConfig::default().half_width)]
    peak_half_width: usize,

    /// Window series scanned for peaks.
    #[arg(long, value_enum, default_value = "metric1")]
    peak_source: PeakSourceArg,

    /// Tolerance around the resting baseline for the recovery delay.
    #[arg(long, default_value_t = DEFAULT_RECOVERY_DELTA)]
    recovery_delta: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum PeakSourceArg {
    Metric1,
    Kurtosis,
    Skew2,
}

#[derive(Args)]
struct BootstrapArgs {
    #[command(flatten)]
    input: InputArgs,

    /// Directory receiving cloud and summary tables.
    #[arg(long)]
    out_dir: PathBuf,

    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    trials: usize,

    /// Resample size; defaults to the number of beats used.
    #[arg(long)]
    subsample: Option<usize>,

    /// Restrict to one phase (needs markers).
    #[arg(long, value_parser = parse_phase)]
    phase: Option<Phase>,
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum LearnerArg {
    Lm,
    Nn,
    Dl,
    All,
}

#[derive(Args)]
struct TrainArgs {
    /// Exercise dataset.
    dataset: PathBuf,

    #[arg(long, value_enum)]
    learner: LearnerArg,

    /// Feature set, 1 to 4.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4))]
    model: u8,

    /// Artifact path; a directory when the learner is `all`.
    #[arg(long)]
    out: PathBuf,

    #[arg(long, default_value_t = TrainingConfig::default().max_epochs)]
    max_epochs: usize,

    /// Residual diagnostics table for linear fits.
    #[arg(long)]
    diagnostics: Option<PathBuf>,
}

#[derive(Args)]
struct PredictArgs {
    /// Exercise dataset.
    dataset: PathBuf,

    /// Artifact written by `train`.
    #[arg(long)]
    model: PathBuf,

    /// Prediction table; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    /// Output file.
    #[arg(long)]
    out: PathBuf,

    /// Segments as beats:mean_ms:std_ms[:trend_ms], comma separated.
    /// Defaults to rest, exercise, rest with 80, 15 and 80 ms spread.
    #[arg(long, conflicts_with = "exercises")]
    segments: Option<String>,

    /// Write the exercise start and end of a three-segment recording here.
    #[arg(long)]
    marks_out: Option<PathBuf>,

    /// Write this many synthetic exercise records instead of a recording.
    #[arg(long)]
    exercises: Option<usize>,
}

#[derive(Args)]
struct LandmarksArgs {
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Right end of the boundary segments.
    #[arg(long, default_value_t = 10.0)]
    beta1_max: f64,
}

fn parse_phase(s: &str) -> Result<Phase, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Run(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Run(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Run(e.into())
    }
}

type CliResult<T = ()> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let flags: Vec<String> = std::env::args().skip(1).collect();
    match run(cli, flags) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_degeneracy() { 1 } else { 2 })
        }
    }
}

struct Ctx {
    format: Format,
    seed: u64,
    workers: usize,
    flags: Vec<String>,
}

impl Ctx {
    fn provenance(&self, seeded: bool) -> Provenance {
        Provenance::new(seeded.then_some(self.seed), self.flags.clone())
    }
}

fn run(cli: Cli, flags: Vec<String>) -> CliResult {
    if cli.workers == 0 {
        return Err(Failure::Usage("--workers must be at least 1".into()));
    }
    let ctx = Ctx {
        format: cli.format.into(),
        seed: cli.seed,
        workers: cli.workers,
        flags,
    };
    match cli.command {
        Command::Analyze(a) => analyze(&ctx, a),
        Command::Bootstrap(a) => bootstrap(&ctx, a),
        Command::Train(a) => train(&ctx, a),
        Command::Predict(a) => predict(&ctx, a),
        Command::Synth(a) => synth(&ctx, a),
        Command::Landmarks(a) => emit_landmarks(&ctx, a),
    }
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::Usage(format!("cannot create {}: {e}", path.display())))
}

fn open(path: &Path) -> CliResult<File> {
    File::open(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

fn prepare_dir(dir: &Path) -> CliResult {
    fs::create_dir_all(dir)
        .map_err(|e| Failure::Usage(format!("cannot create {}: {e}", dir.display())))
}

fn load_series(args: &InputArgs) -> CliResult<HeartSeries> {
    if !args.delimiter.is_ascii() {
        return Err(Failure::Usage(
            "delimiter must be a single ASCII character".into(),
        ));
    }
    let schema = SchemaConfig {
        delimiter: args.delimiter as u8,
        value: match args.value {
            ValueArg::Auto => ValueColumn::Auto,
            ValueArg::HbMs => ValueColumn::IntervalMs,
            ValueArg::HrBpm => ValueColumn::RateBpm,
        },
    };
    let mut series = parse_recording(open(&args.input)?, &schema).map_err(input_error)?;

    let report = validate_series(&series);
    let mut warnings = Vec::new();
    if !report.range_violations.is_empty() {
        warnings.push(format!(
            "{} beats outside the plausible interval range",
            report.range_violations.len()
        ));
    }
    if !report.duplicate_timestamps.is_empty() {
        warnings.push(format!(
            "{} duplicate timestamps",
            report.duplicate_timestamps.len()
        ));
    }
    if report.low_precision {
        warnings.push("intervals derived from rounded heart rates (low precision)".into());
    }
    if args.strict && !report.is_clean() {
        return Err(Failure::Usage(format!(
            "validation failed: {}",
            warnings.join("; ")
        )));
    }
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    if args.drop_implausible {
        series = series.drop_implausible().map_err(input_error)?;
    }

    let marks = match (&args.marks, args.start_s, args.end_s) {
        (Some(path), _, _) => Some(parse_marks(&fs::read_to_string(path)?).map_err(input_error)?),
        (None, Some(s), Some(e)) => Some((s, e)),
        _ => None,
    };
    if let Some((s, e)) = marks {
        series = series.mark_phases(s, e).map_err(input_error)?;
    }
    Ok(series)
}

/// Malformed input is a usage problem even when the library would classify
/// the condition as degenerate.
fn input_error(e: Error) -> Failure {
    match e {
        Error::InsufficientData { .. } => Failure::Usage(e.to_string()),
        other => Failure::Run(other),
    }
}

fn table_path(dir: &Path, name: &str, format: Format) -> PathBuf {
    dir.join(format!("{name}.{}", format.extension()))
}

fn write_named<T: Serialize>(
    ctx: &Ctx,
    dir: &Path,
    name: &str,
    seeded: bool,
    rows: &[T],
) -> CliResult {
    let mut out = create(&table_path(dir, name, ctx.format))?;
    write_table(&mut out, ctx.format, &ctx.provenance(seeded), name, rows)?;
    out.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct RecoveryRow {
    mode: &'static str,
    delta: f64,
    delay_s: Option<f64>,
}

fn analyze(ctx: &Ctx, a: AnalyzeArgs) -> CliResult {
    if a.window < hrload::moments::MIN_SAMPLES {
        return Err(Failure::Usage(format!(
            "--window must be at least {}",
            hrload::moments::MIN_SAMPLES
        )));
    }
    if a.stride == 0 {
        return Err(Failure::Usage("--stride must be at least 1".into()));
    }
    let series = load_series(&a.input)?;
    prepare_dir(&a.out_dir)?;

    let accumulated = accumulated_trajectory(&series, a.stride)?;
    let window = window_trajectory(&series, a.window, a.stride)?;
    for (name, t) in [("accumulated", &accumulated), ("window", &window)] {
        if !t.degenerate.is_empty() {
            eprintln!(
                "warning: {} zero-variance {name} ensembles skipped",
                t.degenerate.len()
            );
        }
    }
    if window.points.is_empty() {
        return Err(Error::InsufficientData {
            needed: a.window,
            got: series.len(),
        }
        .into());
    }
    write_named(
        ctx,
        &a.out_dir,
        "accumulated",
        false,
        &trajectory_rows(&accumulated),
    )?;
    write_named(ctx, &a.out_dir, "window", false, &trajectory_rows(&window))?;

    let acc_metrics = metric_series(&accumulated)?;
    let win_metrics = metric_series(&window)?;
    write_named(
        ctx,
        &a.out_dir,
        "panels",
        false,
        &panel_rows(&acc_metrics, &win_metrics),
    )?;

    let peak = PeakConfig {
        half_width: a.peak_half_width,
        k: a.peak_k,
        source: match a.peak_source {
            PeakSourceArg::Metric1 => PeakSource::WindowMetric1,
            PeakSourceArg::Kurtosis => PeakSource::WindowKurtosis,
            PeakSourceArg::Skew2 => PeakSource::WindowSkew2,
        },
    };
    let events = match detect_regime_changes(&win_metrics, &peak) {
        Ok(ev) => ev,
        Err(Error::InsufficientData { .. }) => {
            eprintln!("warning: window series too short for peak detection");
            Vec::new()
        }
        Err(e) => return Err(e.into()),
    };
    write_named(ctx, &a.out_dir, "events", false, &events)?;

    if let Some(marks) = series.marks() {
        let mut slopes = slope_rows("accumulated", &phase_slopes(&acc_metrics, marks));
        slopes.extend(slope_rows("window", &phase_slopes(&win_metrics, marks)));
        write_named(ctx, &a.out_dir, "slopes", false, &slopes)?;
        let recovery: Vec<RecoveryRow> = [("accumulated", &acc_metrics), ("window", &win_metrics)]
            .into_iter()
            .map(|(mode, m)| {
                let delay_s = recovery_delay(m, marks, a.recovery_delta).unwrap_or(None);
                RecoveryRow {
                    mode,
                    delta: a.recovery_delta,
                    delay_s,
                }
            })
            .collect();
        write_named(ctx, &a.out_dir, "recovery", false, &recovery)?;
    }

    let beta1_max = acc_metrics
        .entries
        .iter()
        .chain(&win_metrics.entries)
        .map(|e| e.beta1)
        .fold(1.0, f64::max);
    write_named(
        ctx,
        &a.out_dir,
        "landmarks",
        false,
        &landmark_rows(&landmarks(), beta1_max),
    )?;
    Ok(())
}

fn bootstrap(ctx: &Ctx, a: BootstrapArgs) -> CliResult {
    let series = load_series(&a.input)?;
    let series = match a.phase {
        Some(p) => series.phase_slice(p).map_err(input_error)?,
        None => series,
    };
    let cfg = BootstrapConfig {
        trials: a.trials,
        subsample: a.subsample,
        seed: ctx.seed,
        workers: ctx.workers,
    };
    let cloud = match bootstrap_cloud(&series.intervals(), &cfg) {
        Err(e @ Error::InvalidConfig(_)) => return Err(Failure::Usage(e.to_string())),
        other => other?,
    };
    if cloud.degenerate_count > 0 {
        eprintln!(
            "warning: {} of {} trials were degenerate",
            cloud.degenerate_count, cloud.trials
        );
    }
    prepare_dir(&a.out_dir)?;
    write_named(ctx, &a.out_dir, "cloud", true, &cloud.points)?;

    #[derive(Serialize)]
    struct SummaryRow {
        seed: u64,
        trials: usize,
        subsample: usize,
        degenerate: usize,
        centroid_beta1: f64,
        centroid_beta2: f64,
        std_beta1: f64,
        std_beta2: f64,
        cov_beta1_beta2: f64,
        q025_beta1: f64,
        q975_beta1: f64,
        q025_beta2: f64,
        q975_beta2: f64,
    }
    let s = cloud.summary()?;
    let row = SummaryRow {
        seed: cloud.seed,
        trials: cloud.trials,
        subsample: cloud.subsample,
        degenerate: cloud.degenerate_count,
        centroid_beta1: cloud.centroid.beta1,
        centroid_beta2: cloud.centroid.beta2,
        std_beta1: s.std_beta1,
        std_beta2: s.std_beta2,
        cov_beta1_beta2: cloud.dispersion[0][1],
        q025_beta1: s.q_low.beta1,
        q975_beta1: s.q_high.beta1,
        q025_beta2: s.q_low.beta2,
        q975_beta2: s.q_high.beta2,
    };
    write_named(ctx, &a.out_dir, "cloud_summary", true, &[row])?;
    Ok(())
}

fn load_dataset(path: &Path, model: u8) -> CliResult<hrload::activity::Dataset> {
    let records = parse_exercises(open(path)?).map_err(input_error)?;
    build_dataset(&records, ModelId::new(model)?).map_err(input_error)
}

fn save_artifact(path: &Path, artifact: &ModelArtifact) -> CliResult {
    let mut out = create(path)?;
    out.write_all(artifact.to_json()?.as_bytes())?;
    out.flush()?;
    Ok(())
}

fn train(ctx: &Ctx, a: TrainArgs) -> CliResult {
    let data = load_dataset(&a.dataset, a.model)?;
    let config = TrainingConfig {
        max_epochs: a.max_epochs,
        seed: ctx.seed,
        ..TrainingConfig::default()
    };
    config
        .validate()
        .map_err(|e| Failure::Usage(e.to_string()))?;

    if let Some(path) = &a.diagnostics {
        let lm = fit_linear(&data.rows, &data.targets)?;
        let mut out = create(path)?;
        write_table(
            &mut out,
            ctx.format,
            &ctx.provenance(false),
            "diagnostics",
            &residual_diagnostics(&lm)?,
        )?;
        out.flush()?;
    }

    let learners: Vec<Learner> = match a.learner {
        LearnerArg::Lm => vec![Learner::Lm],
        LearnerArg::Nn => vec![Learner::Nn],
        LearnerArg::Dl => vec![Learner::Dl],
        LearnerArg::All => Learner::ALL.to_vec(),
    };
    let fits: Vec<hrload::Result<ModelArtifact>> = if ctx.workers > 1 && learners.len() > 1 {
        std::thread::scope(|s| {
            let handles: Vec<_> = learners
                .iter()
                .map(|&l| {
                    let (data, config) = (&data, &config);
                    s.spawn(move || fit_learner(data, l, config))
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("training thread panicked"))
                .collect()
        })
    } else {
        learners
            .iter()
            .map(|&l| fit_learner(&data, l, &config))
            .collect()
    };

    if a.learner == LearnerArg::All {
        prepare_dir(&a.out)?;
    }
    for (learner, fit) in learners.iter().zip(fits) {
        let artifact = fit?;
        if let hrload::activity::artifact::ArtifactBody::Network {
            exhausted: true,
            epochs,
            ..
        } = artifact.body
        {
            eprintln!(
                "warning: {} stopped at the epoch limit ({epochs}) before the gradient threshold",
                learner.as_str()
            );
        }
        let path = if a.learner == LearnerArg::All {
            a.out.join(format!("{}.json", learner.as_str()))
        } else {
            a.out.clone()
        };
        save_artifact(&path, &artifact)?;
        eprintln!(
            "{}: training SSE {}",
            learner.as_str(),
            artifact.training_sse
        );
    }
    Ok(())
}

#[derive(Serialize)]
struct PredictionRow {
    index: usize,
    target: f64,
    prediction: f64,
    class: u8,
    correct: bool,
}

fn predict(ctx: &Ctx, a: PredictArgs) -> CliResult {
    let text = fs::read_to_string(&a.model)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", a.model.display())))?;
    let artifact = ModelArtifact::from_json(&text)
        .map_err(|e| Failure::Usage(format!("invalid model artifact: {e}")))?;
    let data = load_dataset(&a.dataset, artifact.model_id.get())?;
    if data.columns != artifact.columns {
        return Err(Error::Schema(format!(
            "dataset columns {:?} differ from model columns {:?}",
            data.columns, artifact.columns
        ))
        .into());
    }
    let report: EvaluationReport = evaluate(&artifact, &data)?;
    let rows: Vec<PredictionRow> = report
        .predictions
        .iter()
        .zip(&report.classes)
        .zip(&data.targets)
        .enumerate()
        .map(|(index, ((&prediction, class), &target))| PredictionRow {
            index,
            target,
            prediction,
            class: class.code(),
            correct: f64::from(class.code()) == target,
        })
        .collect();

    let prov = ctx.provenance(false);
    let mut out: Box<dyn Write> = match &a.out {
        Some(p) => Box::new(create(p)?),
        None => Box::new(io::stdout().lock()),
    };
    match ctx.format {
        Format::Csv => write_table(&mut out, Format::Csv, &prov, "predictions", &rows)?,
        Format::Json => {
            #[derive(Serialize)]
            struct Payload<'a> {
                learner: Learner,
                model_id: ModelId,
                sse: f64,
                accuracy: f64,
                predictions: &'a [PredictionRow],
            }
            let payload = Payload {
                learner: artifact.learner,
                model_id: artifact.model_id,
                sse: report.sse,
                accuracy: report.accuracy,
                predictions: &rows,
            };
            write_document(&mut out, &prov, &payload)?;
        }
    }
    out.flush()?;
    eprintln!("sse {} accuracy {}", report.sse, report.accuracy);
    Ok(())
}

fn parse_segments(text: &str) -> CliResult<Vec<Segment>> {
    text.split(',')
        .map(|part| {
            let f: Vec<&str> = part.trim().split(':').collect();
            if !(3..=4).contains(&f.len()) {
                return Err(Failure::Usage(format!(
                    "segment '{part}' is not beats:mean:std[:trend]"
                )));
            }
            let bad = |what: &str| Failure::Usage(format!("segment '{part}': invalid {what}"));
            Ok(Segment {
                beats: f[0].parse().map_err(|_| bad("beats"))?,
                mean_ms: f[1].parse().map_err(|_| bad("mean"))?,
                std_ms: f[2].parse().map_err(|_| bad("std"))?,
                trend_ms: f
                    .get(3)
                    .map_or(Ok(0.0), |v| v.parse())
                    .map_err(|_| bad("trend"))?,
            })
        })
        .collect()
}

fn synth(ctx: &Ctx, a: SynthArgs) -> CliResult {
    let prov = ctx.provenance(true);
    if let Some(n) = a.exercises {
        if n < 3 {
            return Err(Failure::Usage(
                "--exercises needs at least 3 records".into(),
            ));
        }
        let mut out = create(&a.out)?;
        prov.write_comment(&mut out)?;
        write_exercises(&synthetic_exercises(n, ctx.seed), &mut out)?;
        out.flush()?;
        return Ok(());
    }
    let spec = match &a.segments {
        Some(text) => SynthSpec {
            segments: parse_segments(text)?,
            seed: ctx.seed,
        },
        None => SynthSpec::rest_exercise_rest(ctx.seed),
    };
    spec.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    let series = generate(&spec)?;
    let mut out = create(&a.out)?;
    prov.write_comment(&mut out)?;
    write_recording(&series, &mut out)?;
    out.flush()?;

    if let Some(path) = &a.marks_out {
        let marks = marks_for(&spec, &series)
            .ok_or_else(|| Failure::Usage("--marks-out needs exactly three segments".into()))?;
        let mut out = create(path)?;
        prov.write_comment(&mut out)?;
        writeln!(out, "{} {}", marks.start_s, marks.end_s)?;
        out.flush()?;
    }
    Ok(())
}

fn emit_landmarks(ctx: &Ctx, a: LandmarksArgs) -> CliResult {
    if a.beta1_max.is_nan() || a.beta1_max <= 0.0 {
        return Err(Failure::Usage("--beta1-max must be positive".into()));
    }
    let rows = landmark_rows(&landmarks(), a.beta1_max);
    let prov = ctx.provenance(false);
    match &a.out {
        Some(p) => {
            let mut out = create(p)?;
            write_table(&mut out, ctx.format, &prov, "landmarks", &rows)?;
            out.flush()?;
        }
        None => write_table(io::stdout().lock(), ctx.format, &prov, "landmarks", &rows)?,
    }
    Ok(())
}
