//! `surveq`: survey power curves and classifier equivalence from the
//! command line.
//!
//! Four subcommands cover the workflow end to end:
//!
//! * `synth` — draw a synthetic dataset (ratings plus hard and soft
//!   classifier predictions) from a model configuration or from the
//!   built-in running example.
//! * `curve` — compute a survey power curve from a ratings CSV and,
//!   given classifier predictions, read off their survey equivalence;
//!   emits a JSON report and an optional plot-point CSV.
//! * `alpha` — Krippendorff's alpha of a ratings CSV.
//! * `calibrate` — replace each distinct classifier output with the
//!   empirical label frequencies among the items that received it.
//!
//! Exit codes: 0 on success, 1 on bad input or arguments, 2 on an
//! internal error. Reports are deterministic: the same invocation with
//! the same seed produces byte-identical output (except the trailing
//! `runtime_ms` field), regardless of `--jobs`.

mod report;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use survey_equivalence::combiners::Combiner;
use survey_equivalence::equivalence::{analyze, AnalysisOptions};
use survey_equivalence::formats;
use survey_equivalence::power_curve::{CurveOptions, ReferenceMode};
use survey_equivalence::scorers::{krippendorff_alpha, Scorer};
use survey_equivalence::synthetic::{example_model, GeneratedData};
use survey_equivalence::{Label, LabelSpace, PredictionKind, RandomSource};

use report::{ConfigEcho, CurveReport};

#[derive(Debug, Parser)]
#[command(
    name = "surveq",
    version,
    about = "Survey power curves and classifier equivalence",
    max_term_width = 100
)]
struct Cli {
    /// Worker threads for the numeric passes (default: all cores).
    /// Results never depend on this.
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute a power curve and, optionally, a classifier's equivalence.
    Curve(CurveArgs),
    /// Generate a synthetic dataset from a model configuration.
    Synth(SynthArgs),
    /// Krippendorff's alpha of a ratings file.
    Alpha(AlphaArgs),
    /// Calibrate classifier predictions against observed ratings.
    Calibrate(CalibrateArgs),
}

#[derive(Debug, Args)]
struct CurveArgs {
    /// Ratings CSV (`item,r1,...,rK`; empty cells may only trail).
    #[arg(long, value_name = "FILE")]
    ratings: PathBuf,

    /// Classifier predictions CSV (`item,label` or `item,p_<L1>,...`);
    /// enables the classifier score and survey-equivalence blocks.
    #[arg(long, value_name = "FILE")]
    predictions: Option<PathBuf>,

    /// Label pooling rule: majority, plurality, frequency, or abc.
    #[arg(long, value_name = "NAME")]
    combiner: String,

    /// Accuracy measure: agreement, f1, auc, cross-entropy, or dmi.
    #[arg(long, value_name = "NAME")]
    scorer: String,

    /// Bootstrap samples behind the confidence bands; 0 disables
    /// bootstrapping and reports point estimates only.
    #[arg(long, value_name = "N", default_value_t = 500)]
    bootstrap: usize,

    /// Maximum rater subsets evaluated per survey size.
    #[arg(long, value_name = "N", default_value_t = 200)]
    subset_cap: usize,

    /// Root seed for subset draws, tie-breaking, and resampling.
    #[arg(long, value_name = "SEED", default_value_t = 0)]
    seed: u64,

    /// Positive label; required by (and only valid for) f1 and auc.
    #[arg(long, value_name = "LABEL")]
    positive_label: Option<String>,

    /// Reference panel size: 1 scores against single held-out raters,
    /// r > 1 against plurality votes of r-rater panels.
    #[arg(long, value_name = "R", default_value_t = 1)]
    ref_r: usize,

    /// Comma-separated label space, in column order for soft
    /// predictions; inferred from the ratings when absent.
    #[arg(long, value_name = "L1,L2,...")]
    labels: Option<String>,

    /// Write the JSON report here instead of stdout.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,

    /// Write plot points (`k,mean,ci_low,ci_high` rows plus a
    /// `classifier,<score>` trailer) to this CSV.
    #[arg(long, value_name = "FILE")]
    plot: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// Model configuration JSON.
    #[arg(
        long,
        value_name = "FILE",
        required_unless_present = "running_example",
        conflicts_with = "running_example"
    )]
    model: Option<PathBuf>,

    /// Use the built-in two-label running-example model instead of
    /// --model.
    #[arg(long)]
    running_example: bool,

    /// Number of items to draw.
    #[arg(long, value_name = "N")]
    items: usize,

    /// Number of rater slots per item.
    #[arg(long, value_name = "K")]
    raters: usize,

    /// Generation seed.
    #[arg(long, value_name = "SEED", default_value_t = 0)]
    seed: u64,

    /// Output path prefix; writes <PREFIX>-ratings.csv,
    /// <PREFIX>-hard.csv, and <PREFIX>-soft.csv.
    #[arg(long, value_name = "PREFIX")]
    out_prefix: String,
}

#[derive(Debug, Args)]
struct AlphaArgs {
    /// Ratings CSV.
    #[arg(long, value_name = "FILE")]
    ratings: PathBuf,

    /// Comma-separated label space; inferred when absent.
    #[arg(long, value_name = "L1,L2,...")]
    labels: Option<String>,
}

#[derive(Debug, Args)]
struct CalibrateArgs {
    /// Ratings CSV supplying the human labels per item.
    #[arg(long, value_name = "FILE")]
    ratings: PathBuf,

    /// Classifier predictions CSV to calibrate.
    #[arg(long, value_name = "FILE")]
    predictions: PathBuf,

    /// Label whose component buckets soft predictions.
    #[arg(long, value_name = "LABEL")]
    positive_label: String,

    /// Where to write the calibrated soft predictions CSV.
    #[arg(long, value_name = "FILE")]
    out: PathBuf,

    /// Comma-separated label space; inferred when absent.
    #[arg(long, value_name = "L1,L2,...")]
    labels: Option<String>,
}

/// A failed run, split by who is at fault.
#[derive(Debug)]
enum Failure {
    /// Bad input or arguments; the user can fix it. Exit 1.
    Validation(String),
    /// A bug or environment fault. Exit 2.
    Internal(String),
}

impl Failure {
    fn validation(message: impl Into<String>) -> Self {
        Failure::Validation(message.into())
    }
}

impl From<survey_equivalence::Error> for Failure {
    fn from(err: survey_equivalence::Error) -> Self {
        Failure::Validation(err.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Help and version are successes; everything else is a
            // usage error, which this tool reports as exit code 1.
            use clap::error::ErrorKind;
            let kind = err.kind();
            let _ = err.print();
            return if matches!(kind, ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            };
        }
    };

    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
        Err(Failure::Internal(message)) => {
            eprintln!("internal error: {message}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    // All parallel passes run inside one locally built pool, so that
    // --jobs caps the whole process without touching global state.
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(Failure::validation("--jobs must be at least 1"));
        }
        builder = builder.num_threads(jobs);
    }
    let pool = builder
        .build()
        .map_err(|err| Failure::Internal(format!("could not build thread pool: {err}")))?;

    match cli.command {
        Command::Curve(args) => pool.install(|| run_curve(args)),
        Command::Synth(args) => pool.install(|| run_synth(args)),
        Command::Alpha(args) => run_alpha(args),
        Command::Calibrate(args) => run_calibrate(args),
    }
}

fn run_curve(args: CurveArgs) -> Result<(), Failure> {
    let start = Instant::now();

    let label_override = parse_label_override(args.labels.as_deref())?;
    let matrix = formats::load_ratings_csv(&args.ratings, label_override)
        .map_err(|err| file_error("--ratings", &args.ratings, err))?;

    let combiner = Combiner::from_name(&args.combiner)
        .map_err(|err| Failure::validation(format!("--combiner: {err}")))?;
    let scorer = build_scorer(
        &args.scorer,
        args.positive_label.as_deref(),
        matrix.label_space(),
    )?;

    // Kind compatibility is checked up front, before any numeric work:
    // first the combiner's output against the scorer, then the
    // classifier predictions (if any) against the scorer.
    scorer.check_kind(combiner.output_kind()).map_err(|_| {
        Failure::validation(format!(
            "--scorer {} consumes {} predictions, but --combiner {} produces {} ones",
            args.scorer,
            kind_noun(scorer.required_kind()),
            args.combiner,
            kind_noun(Some(combiner.output_kind())),
        ))
    })?;

    let predictions = args
        .predictions
        .as_ref()
        .map(|path| -> Result<_, Failure> {
            let set = formats::load_predictions_csv(path, matrix.label_space())
                .map_err(|err| file_error("--predictions", path, err))?;
            scorer.check_kind(set.kind()).map_err(|_| {
                Failure::validation(format!(
                    "--scorer {} consumes {} predictions, but --predictions {} holds {} ones",
                    args.scorer,
                    kind_noun(scorer.required_kind()),
                    path.display(),
                    kind_noun(Some(set.kind())),
                ))
            })?;
            Ok(set)
        })
        .transpose()?;

    if args.ref_r == 0 {
        return Err(Failure::validation("--ref-r must be at least 1"));
    }
    if args.subset_cap == 0 {
        return Err(Failure::validation("--subset-cap must be at least 1"));
    }
    let options = AnalysisOptions {
        curve: CurveOptions {
            subset_cap: args.subset_cap,
            reference: match args.ref_r {
                1 => ReferenceMode::SingleRater,
                r => ReferenceMode::PluralityOf(r),
            },
        },
        bootstrap_samples: args.bootstrap,
    };
    let source = RandomSource::new(args.seed);

    let analysis = analyze(
        &matrix,
        predictions.as_ref(),
        combiner,
        scorer,
        &options,
        &source,
    )?;

    let config = ConfigEcho {
        ratings: args.ratings.display().to_string(),
        predictions: args.predictions.as_ref().map(|p| p.display().to_string()),
        combiner: combiner.name().to_string(),
        scorer: scorer.name().to_string(),
        positive_label: args.positive_label.clone(),
        bootstrap: args.bootstrap,
        subset_cap: args.subset_cap,
        seed: args.seed,
        ref_r: args.ref_r,
        labels: matrix.label_space().names().to_vec(),
    };
    let runtime_ms = start.elapsed().as_millis() as u64;
    let report = CurveReport::new(config, &analysis, runtime_ms);
    let json = report
        .to_json()
        .map_err(|err| Failure::Internal(format!("could not serialize report: {err}")))?;

    match &args.out {
        Some(path) => std::fs::write(path, &json).map_err(|err| file_error("--out", path, err))?,
        None => print!("{json}"),
    }
    if let Some(path) = &args.plot {
        report::write_plot_csv(path, &analysis.curve)
            .map_err(|err| file_error("--plot", path, err))?;
    }
    Ok(())
}

fn run_synth(args: SynthArgs) -> Result<(), Failure> {
    let model = if args.running_example {
        example_model()
    } else {
        let path = args.model.as_ref().expect("clap enforces --model");
        formats::load_model_json(path).map_err(|err| file_error("--model", path, err))?
    };

    let source = RandomSource::new(args.seed);
    let GeneratedData {
        matrix,
        hard_predictions,
        soft_predictions,
        ..
    } = model.generate(args.items, args.raters, &source)?;

    let ratings_path = prefixed(&args.out_prefix, "ratings.csv");
    let hard_path = prefixed(&args.out_prefix, "hard.csv");
    let soft_path = prefixed(&args.out_prefix, "soft.csv");
    formats::write_ratings_csv(&ratings_path, &matrix)
        .map_err(|err| file_error("--out-prefix", &ratings_path, err))?;
    formats::write_predictions_csv(&hard_path, &hard_predictions, matrix.label_space())
        .map_err(|err| file_error("--out-prefix", &hard_path, err))?;
    formats::write_predictions_csv(&soft_path, &soft_predictions, matrix.label_space())
        .map_err(|err| file_error("--out-prefix", &soft_path, err))?;

    let summary = serde_json::json!({
        "items": args.items,
        "raters": args.raters,
        "seed": args.seed,
        "ratings": ratings_path.display().to_string(),
        "hard_predictions": hard_path.display().to_string(),
        "soft_predictions": soft_path.display().to_string(),
    });
    println!("{summary:#}");
    Ok(())
}

fn run_alpha(args: AlphaArgs) -> Result<(), Failure> {
    let label_override = parse_label_override(args.labels.as_deref())?;
    let matrix = formats::load_ratings_csv(&args.ratings, label_override)
        .map_err(|err| file_error("--ratings", &args.ratings, err))?;
    let alpha = krippendorff_alpha(&matrix)?;
    let summary = serde_json::json!({
        "alpha": alpha.value,
        "degenerate": alpha.degenerate,
    });
    println!("{summary:#}");
    Ok(())
}

fn run_calibrate(args: CalibrateArgs) -> Result<(), Failure> {
    let label_override = parse_label_override(args.labels.as_deref())?;
    let matrix = formats::load_ratings_csv(&args.ratings, label_override)
        .map_err(|err| file_error("--ratings", &args.ratings, err))?;
    let predictions = formats::load_predictions_csv(&args.predictions, matrix.label_space())
        .map_err(|err| file_error("--predictions", &args.predictions, err))?;
    let positive = resolve_label(matrix.label_space(), &args.positive_label)?;

    let calibrated =
        survey_equivalence::calibration::calibrate_discrete(&predictions, &matrix, positive)?;
    formats::write_predictions_csv(&args.out, &calibrated, matrix.label_space())
        .map_err(|err| file_error("--out", &args.out, err))?;
    Ok(())
}

/// Parses `--labels C,D,...` into a label space.
fn parse_label_override(labels: Option<&str>) -> Result<Option<LabelSpace>, Failure> {
    match labels {
        None => Ok(None),
        Some(text) => {
            let names: Vec<&str> = text.split(',').map(str::trim).collect();
            let space = LabelSpace::new(names)
                .map_err(|err| Failure::validation(format!("--labels: {err}")))?;
            Ok(Some(space))
        }
    }
}

/// Builds the scorer named on the command line, resolving the positive
/// label for the scorers that need one and rejecting it for the rest.
fn build_scorer(
    name: &str,
    positive_label: Option<&str>,
    space: &LabelSpace,
) -> Result<Scorer, Failure> {
    let needs_positive = matches!(name, "f1" | "auc");
    match (needs_positive, positive_label) {
        (true, None) => {
            return Err(Failure::validation(format!(
                "--positive-label is required for --scorer {name}"
            )))
        }
        (false, Some(_)) => {
            return Err(Failure::validation(format!(
                "--positive-label only applies to the f1 and auc scorers, not --scorer {name}"
            )))
        }
        _ => {}
    }
    match name {
        "agreement" => Ok(Scorer::Agreement),
        "cross-entropy" => Ok(Scorer::CrossEntropy),
        "dmi" => Ok(Scorer::Dmi),
        "f1" => {
            let positive = resolve_label(space, positive_label.expect("checked above"))?;
            Ok(Scorer::F1 { positive })
        }
        "auc" => {
            let positive = resolve_label(space, positive_label.expect("checked above"))?;
            Ok(Scorer::Auc { positive })
        }
        other => Err(Failure::validation(format!(
            "--scorer: unknown scorer {other:?} (expected agreement, f1, auc, cross-entropy, or dmi)"
        ))),
    }
}

/// Looks a label name up in the space, with the candidates in the error.
fn resolve_label(space: &LabelSpace, name: &str) -> Result<Label, Failure> {
    space.label(name).ok_or_else(|| {
        let mut known = String::new();
        for (i, candidate) in space.names().iter().enumerate() {
            if i > 0 {
                known.push_str(", ");
            }
            let _ = write!(known, "{candidate:?}");
        }
        Failure::validation(format!(
            "--positive-label: unknown label {name:?} (label space: {known})"
        ))
    })
}

/// The noun for a prediction-kind requirement, for error messages.
fn kind_noun(kind: Option<PredictionKind>) -> &'static str {
    match kind {
        Some(PredictionKind::Hard) => "hard",
        Some(PredictionKind::Soft) => "soft",
        None => "any",
    }
}

/// Wraps an error with the flag and path it came from.
fn file_error(flag: &str, path: &Path, err: impl std::fmt::Display) -> Failure {
    Failure::Validation(format!("{flag} {}: {err}", path.display()))
}

/// `<prefix>-<suffix>`, as a path.
fn prefixed(prefix: &str, suffix: &str) -> PathBuf {
    PathBuf::from(format!("{prefix}-{suffix}"))
}
