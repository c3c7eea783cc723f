//! Measure a classifier against the collective judgment of human raters.
//!
//! When ground truth is itself a matter of human judgment — is this
//! comment toxic? is this news item credible? — a classifier cannot be
//! graded against a single "correct" answer. This crate instead asks:
//! *how many raters is the classifier worth?* It builds a **survey power
//! curve**, the expected score of predictions pooled from `k` raters when
//! judged against a held-out rater, and reads off the **survey
//! equivalence** of the classifier: the (possibly fractional) `k` at
//! which the curve reaches the classifier's score.
//!
//! # Quick tour
//!
//! ```
//! use survey_equivalence::equivalence::{analyze, AnalysisOptions};
//! use survey_equivalence::combiners::Combiner;
//! use survey_equivalence::scorers::Scorer;
//! use survey_equivalence::rng::RandomSource;
//! use survey_equivalence::synthetic::example_model;
//!
//! // Draw a small dataset (with classifier predictions) from the
//! // built-in example model.
//! let model = example_model();
//! let data = model.generate(150, 10, &RandomSource::new(7)).unwrap();
//!
//! // How many raters is the hard classifier worth, by agreement with
//! // majority-vote surveys?
//! let analysis = analyze(
//!     &data.matrix,
//!     Some(&data.hard_predictions),
//!     Combiner::MajorityVote,
//!     Scorer::Agreement,
//!     &AnalysisOptions::default(),
//!     &RandomSource::new(7),
//! )
//! .unwrap();
//! let equivalence = analysis.equivalence.unwrap();
//! println!("{}", equivalence.interpretation);
//! ```
//!
//! # Layout
//!
//! - [`model`]: label spaces, rating matrices, validation.
//! - [`prediction`]: hard/soft predictions and per-item sets.
//! - [`scorers`]: agreement, F1, AUC, cross entropy, mutual-information
//!   scoring, held-out scoring, and inter-rater reliability.
//! - [`combiners`]: majority/plurality/frequency pooling and the
//!   Bayesian rating combiner with its memoized probability engine.
//! - [`power_curve`]: rater subset plans, curve computation, bootstrap.
//! - [`equivalence`]: reading a classifier score off a curve, with
//!   bootstrap uncertainty and cross-group comparisons.
//! - [`synthetic`]: a generative rating model for experiments, with
//!   closed-form information oracles.
//! - [`formats`]: CSV/JSON ingest and export.
//! - [`calibration`]: mapping discrete classifier outputs to empirical
//!   label frequencies.
//!
//! All randomness flows through [`rng::RandomSource`], which derives an
//! independent stream per task: results are reproducible bit-for-bit for
//! a given seed, independent of thread count or scheduling.

pub mod calibration;
pub mod combiners;
mod curve;
pub mod equivalence;
pub mod error;
pub mod formats;
pub mod model;
pub mod power_curve;
pub mod prediction;
pub mod rng;
pub mod scorers;
mod stats;
pub mod synthetic;

pub use curve::{CurveMetadata, Equivalence, EquivalenceResult, PowerCurve};
pub use error::{Error, Result, Violation};
pub use model::{Label, LabelCounts, LabelSpace, RatingMatrix};
pub use prediction::{Prediction, PredictionKind, PredictionSet, SoftPrediction};
pub use rng::RandomSource;
