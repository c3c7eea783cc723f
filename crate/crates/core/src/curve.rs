//! Power curves and survey-equivalence values.
//!
//! A power curve reports, for each survey size `k`, the expected score of
//! predictions pooled from `k` raters when judged against a held-out
//! rater. The survey equivalence of a classifier is the (possibly
//! fractional) `k` at which the curve first reaches the classifier's own
//! score.

use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::stats;

/// Descriptive metadata carried alongside a power curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveMetadata {
    /// Combiner name (`majority`, `plurality`, `frequency`, `abc`).
    pub combiner: String,
    /// Scorer name (`agreement`, `f1`, `auc`, `cross-entropy`, `dmi`).
    pub scorer: String,
    /// Root seed the run was derived from.
    pub seed: u64,
    /// Maximum number of rater subsets evaluated per `k`.
    pub subset_cap: usize,
    /// Number of held-out raters each prediction was scored against.
    pub reference_raters: usize,
    /// Bootstrap sample count behind the confidence bands, if any.
    pub bootstrap_samples: Option<usize>,
    /// Per-`k` fraction of `(item, subset)` pairs that produced a
    /// prediction; below 1.0 only on ragged matrices, where a subset
    /// skips items missing one of its rating slots.
    pub coverage: Vec<f64>,
}

/// Expected score of `k`-rater pooled predictions, for `k = 0..=K-r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerCurve {
    /// Survey sizes, always `0..=K-r` in order.
    pub k_values: Vec<usize>,
    /// Mean held-out score at each survey size; `means[0]` is the
    /// no-rater baseline.
    pub means: Vec<f64>,
    /// Lower 2.5-percentile bootstrap band, parallel to `means`.
    pub ci_low: Option<Vec<f64>>,
    /// Upper 97.5-percentile bootstrap band, parallel to `means`.
    pub ci_high: Option<Vec<f64>>,
    /// Score of the classifier under comparison, when one was supplied.
    pub classifier_score: Option<f64>,
    /// How the curve was built: combiner, scorer, seed, and sampling
    /// settings.
    pub metadata: CurveMetadata,
}

impl PowerCurve {
    /// The zero-rater baseline score `c_0`.
    pub fn baseline(&self) -> f64 {
        self.means[0]
    }

    /// The largest survey size on the curve.
    pub fn max_k(&self) -> usize {
        *self.k_values.last().expect("curve has at least k = 0")
    }
}

/// A survey-equivalence value: a fractional number of raters, or a
/// sentinel when the classifier's score falls outside the curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Equivalence {
    /// The classifier matches the pooled judgment of this many raters.
    Raters(f64),
    /// The classifier scores at or below the zero-rater baseline.
    LessThanZero,
    /// The classifier outscores the largest survey measured.
    MoreThanMax,
}

impl Equivalence {
    /// The numeric value, unless this is a sentinel.
    pub fn raters(&self) -> Option<f64> {
        match self {
            Equivalence::Raters(v) => Some(*v),
            _ => None,
        }
    }

    /// True for either sentinel outcome.
    pub fn is_sentinel(&self) -> bool {
        !matches!(self, Equivalence::Raters(_))
    }

    /// A one-sentence reading of the value.
    ///
    /// A fractional equivalence of `4.77` means the classifier's score
    /// equals that of surveying 77% of items with 5 raters and 23% with
    /// 4; below 1, the smaller side is the zero-rater baseline.
    pub fn interpretation(&self, max_k: usize) -> String {
        match *self {
            Equivalence::LessThanZero => {
                "classifier performs no better than the zero-rater baseline".to_owned()
            }
            Equivalence::MoreThanMax => {
                format!("classifier outperforms the largest survey measured ({max_k} raters)")
            }
            Equivalence::Raters(v) => {
                let lower = v.floor();
                let frac = v - lower;
                if frac < 1e-12 {
                    format!("classifier is equivalent to a survey of {lower:.0} raters")
                } else if lower < 1.0 {
                    format!(
                        "classifier is equivalent to {v:.2} raters: {:.1}% of items surveyed \
                         with 1 rater, {:.1}% left at the zero-rater baseline",
                        frac * 100.0,
                        (1.0 - frac) * 100.0
                    )
                } else {
                    format!(
                        "classifier is equivalent to {v:.2} raters: {:.1}% of items surveyed \
                         with {:.0} raters, {:.1}% with {lower:.0}",
                        frac * 100.0,
                        lower + 1.0,
                        (1.0 - frac) * 100.0
                    )
                }
            }
        }
    }
}

impl Serialize for Equivalence {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Equivalence::Raters(v) => serializer.serialize_f64(*v),
            Equivalence::LessThanZero => serializer.serialize_str("less_than_zero"),
            Equivalence::MoreThanMax => serializer.serialize_str("more_than_max"),
        }
    }
}

impl<'de> Deserialize<'de> for Equivalence {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Number(v) => Ok(Equivalence::Raters(v)),
            Raw::Text(s) => match s.as_str() {
                "less_than_zero" => Ok(Equivalence::LessThanZero),
                "more_than_max" => Ok(Equivalence::MoreThanMax),
                other => Err(de::Error::custom(format!(
                    "unknown equivalence sentinel {other:?}"
                ))),
            },
        }
    }
}

/// A survey-equivalence estimate with optional bootstrap uncertainty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceResult {
    /// Point estimate from the full dataset.
    pub value: Equivalence,
    /// Per-sample bootstrap outcomes, when a bootstrap was run.
    pub bootstrap_values: Option<Vec<Equivalence>>,
    /// Mean of the numeric bootstrap outcomes.
    pub bootstrap_mean: Option<f64>,
    /// 2.5-percentile of the numeric bootstrap outcomes.
    pub ci_low: Option<f64>,
    /// 97.5-percentile of the numeric bootstrap outcomes.
    pub ci_high: Option<f64>,
    /// Bootstrap samples that fell at or below the zero-rater baseline.
    pub n_less_than_zero: usize,
    /// Bootstrap samples that outscored the largest survey.
    pub n_more_than_max: usize,
    /// Human-readable reading of the point estimate.
    pub interpretation: String,
}

impl EquivalenceResult {
    /// Wraps a point estimate with no bootstrap information.
    pub fn point(value: Equivalence, max_k: usize) -> Self {
        EquivalenceResult {
            value,
            bootstrap_values: None,
            bootstrap_mean: None,
            ci_low: None,
            ci_high: None,
            n_less_than_zero: 0,
            n_more_than_max: 0,
            interpretation: value.interpretation(max_k),
        }
    }

    /// Summarizes a point estimate plus bootstrap outcomes.
    ///
    /// The mean and percentile band are taken over the numeric outcomes
    /// only; sentinel outcomes are excluded from both but reported in the
    /// two counters.
    pub fn with_bootstrap(value: Equivalence, samples: Vec<Equivalence>, max_k: usize) -> Self {
        let mut numeric: Vec<f64> = samples.iter().filter_map(|e| e.raters()).collect();
        let n_less_than_zero = samples
            .iter()
            .filter(|e| matches!(e, Equivalence::LessThanZero))
            .count();
        let n_more_than_max = samples
            .iter()
            .filter(|e| matches!(e, Equivalence::MoreThanMax))
            .count();
        let bootstrap_mean = if numeric.is_empty() {
            None
        } else {
            Some(stats::mean(&numeric))
        };
        let band = stats::central_band(&mut numeric);
        EquivalenceResult {
            value,
            bootstrap_values: Some(samples),
            bootstrap_mean,
            ci_low: band.map(|(lo, _)| lo),
            ci_high: band.map(|(_, hi)| hi),
            n_less_than_zero,
            n_more_than_max,
            interpretation: value.interpretation(max_k),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn equivalence_serializes_as_number_or_sentinel() {
        assert_eq!(
            serde_json::to_string(&Equivalence::Raters(4.31)).unwrap(),
            "4.31"
        );
        assert_eq!(
            serde_json::to_string(&Equivalence::LessThanZero).unwrap(),
            "\"less_than_zero\""
        );
        assert_eq!(
            serde_json::to_string(&Equivalence::MoreThanMax).unwrap(),
            "\"more_than_max\""
        );
        let back: Equivalence = serde_json::from_str("2.5").unwrap();
        assert_eq!(back, Equivalence::Raters(2.5));
        let back: Equivalence = serde_json::from_str("\"more_than_max\"").unwrap();
        assert_eq!(back, Equivalence::MoreThanMax);
    }

    #[test]
    fn interpretation_reads_as_a_mixture() {
        let s = Equivalence::Raters(4.77).interpretation(9);
        assert!(s.contains("4.77"));
        assert!(s.contains("77.0%"));
        assert!(s.contains("5 raters"));
        let s = Equivalence::Raters(0.46).interpretation(9);
        assert!(s.contains("zero-rater baseline"));
        let s = Equivalence::Raters(3.0).interpretation(9);
        assert!(s.contains("3 raters"));
        let s = Equivalence::MoreThanMax.interpretation(9);
        assert!(s.contains("9 raters"));
    }

    #[test]
    fn bootstrap_summary_excludes_sentinels_from_band() {
        let samples = vec![
            Equivalence::Raters(2.0),
            Equivalence::Raters(3.0),
            Equivalence::Raters(4.0),
            Equivalence::LessThanZero,
            Equivalence::MoreThanMax,
            Equivalence::MoreThanMax,
        ];
        let r = EquivalenceResult::with_bootstrap(Equivalence::Raters(3.0), samples, 9);
        assert_relative_eq!(r.bootstrap_mean.unwrap(), 3.0);
        assert_eq!(r.n_less_than_zero, 1);
        assert_eq!(r.n_more_than_max, 2);
        assert!(r.ci_low.unwrap() >= 2.0);
        assert!(r.ci_high.unwrap() <= 4.0);
        assert_eq!(r.bootstrap_values.as_ref().unwrap().len(), 6);
    }
}
