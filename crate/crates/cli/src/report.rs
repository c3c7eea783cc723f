//! The JSON result document and the plot-point CSV.
//!
//! Field order below is the published schema (see `docs/schema.md` at
//! the repository root): `runtime_ms` is always the last top-level
//! field, so consumers comparing reports across runs can strip the one
//! expected-to-differ line and diff the rest byte for byte. Everything
//! above it depends only on the inputs and the seed.

use std::io::Write as _;
use std::path::Path;

use serde::Serialize;
use survey_equivalence::equivalence::Analysis;
use survey_equivalence::{Equivalence, EquivalenceResult, PowerCurve};

/// One full `curve` run, ready for serialization.
#[derive(Debug, Serialize)]
pub struct CurveReport {
    /// The run's inputs, echoed back (resolved label space included).
    pub config: ConfigEcho,
    /// Survey sizes, `0..=K-r` in order.
    pub k_values: Vec<usize>,
    /// Mean held-out score at each survey size.
    pub means: Vec<f64>,
    /// Lower 2.5-percentile bootstrap band, `null` without a bootstrap.
    pub ci_low: Option<Vec<f64>>,
    /// Upper 97.5-percentile bootstrap band, `null` without a bootstrap.
    pub ci_high: Option<Vec<f64>>,
    /// The classifier's held-out score, `null` without `--predictions`.
    pub classifier_score: Option<f64>,
    /// 95% band over bootstrap classifier scores.
    pub classifier_ci: Option<[f64; 2]>,
    /// Where the classifier lands on the curve.
    pub survey_equivalence: Option<EquivalenceReport>,
    /// Wall-clock run time; the one field allowed to differ between
    /// reruns of the same invocation.
    pub runtime_ms: u64,
}

/// The inputs a report was computed from.
///
/// The parallelism degree (`--jobs`) is deliberately absent: results do
/// not depend on it, and echoing it would break the byte-identical
/// contract between runs that differ only in thread count.
#[derive(Debug, Serialize)]
pub struct ConfigEcho {
    /// Ratings CSV path, as given on the command line.
    pub ratings: String,
    /// Predictions CSV path, when a classifier was compared.
    pub predictions: Option<String>,
    /// Combiner name.
    pub combiner: String,
    /// Scorer name.
    pub scorer: String,
    /// Positive label, when the scorer needed one.
    pub positive_label: Option<String>,
    /// Bootstrap sample count (0 = point estimates only).
    pub bootstrap: usize,
    /// Maximum rater subsets per survey size.
    pub subset_cap: usize,
    /// Root seed.
    pub seed: u64,
    /// Reference panel size.
    pub ref_r: usize,
    /// The label space the run used, in column order.
    pub labels: Vec<String>,
}

/// The survey-equivalence block of the report.
#[derive(Debug, Serialize)]
pub struct EquivalenceReport {
    /// Point estimate: a fractional rater count, or the sentinel
    /// strings `"less_than_zero"` / `"more_than_max"`.
    pub point: Equivalence,
    /// Mean of the numeric bootstrap equivalences, when bootstrapped.
    pub bootstrap_mean: Option<f64>,
    /// 95% band over the numeric bootstrap equivalences.
    pub ci: Option<[f64; 2]>,
    /// How many bootstrap samples fell off either end of the curve.
    pub sentinel_counts: SentinelCounts,
    /// Human-readable reading of the point estimate.
    pub interpretation: String,
}

/// Bootstrap samples whose equivalence was a sentinel, by side.
#[derive(Debug, Serialize)]
pub struct SentinelCounts {
    /// Samples at or below the zero-rater baseline.
    pub less_than_zero: usize,
    /// Samples that outscored the largest survey.
    pub more_than_max: usize,
}

impl EquivalenceReport {
    fn from_result(result: &EquivalenceResult) -> Self {
        EquivalenceReport {
            point: result.value,
            bootstrap_mean: result.bootstrap_mean,
            ci: match (result.ci_low, result.ci_high) {
                (Some(low), Some(high)) => Some([low, high]),
                _ => None,
            },
            sentinel_counts: SentinelCounts {
                less_than_zero: result.n_less_than_zero,
                more_than_max: result.n_more_than_max,
            },
            interpretation: result.interpretation.clone(),
        }
    }
}

impl CurveReport {
    /// Assembles the report from an analysis and its echoed config.
    pub fn new(config: ConfigEcho, analysis: &Analysis, runtime_ms: u64) -> Self {
        let curve = &analysis.curve;
        CurveReport {
            config,
            k_values: curve.k_values.clone(),
            means: curve.means.clone(),
            ci_low: curve.ci_low.clone(),
            ci_high: curve.ci_high.clone(),
            classifier_score: curve.classifier_score,
            classifier_ci: analysis.classifier_ci.map(|(low, high)| [low, high]),
            survey_equivalence: analysis
                .equivalence
                .as_ref()
                .map(EquivalenceReport::from_result),
            runtime_ms,
        }
    }

    /// Pretty-printed JSON with a trailing newline.
    pub fn to_json(&self) -> serde_json::Result<String> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        Ok(text)
    }
}

/// Writes the plot-point CSV: a header, one `k,mean,ci_low,ci_high` row
/// per survey size (band cells empty without a bootstrap), and a
/// `classifier,<score>` trailer row when a classifier was scored.
pub fn write_plot_csv(path: &Path, curve: &PowerCurve) -> std::io::Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "k,mean,ci_low,ci_high")?;
    for (i, &k) in curve.k_values.iter().enumerate() {
        let low = band_cell(curve.ci_low.as_deref(), i);
        let high = band_cell(curve.ci_high.as_deref(), i);
        writeln!(out, "{k},{},{low},{high}", curve.means[i])?;
    }
    if let Some(score) = curve.classifier_score {
        writeln!(out, "classifier,{score}")?;
    }
    out.flush()
}

fn band_cell(band: Option<&[f64]>, i: usize) -> String {
    match band.and_then(|b| b.get(i)) {
        Some(v) => v.to_string(),
        None => String::new(),
    }
}
