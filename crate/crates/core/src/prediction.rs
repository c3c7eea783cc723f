//! Classifier and combiner outputs: hard labels, soft distributions, and
//! per-item prediction sets.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::model::{Label, LabelSpace, RatingMatrix};

/// Tolerance for a soft prediction's components summing to 1.
pub const SOFT_SUM_TOLERANCE: f64 = 1e-9;

/// A probability distribution over the label space, in label order.
///
/// Cheap to clone: the probabilities are shared behind an [`Arc`], which
/// lets memoized combiners hand out the same vector many times.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftPrediction {
    probs: Arc<[f64]>,
}

impl SoftPrediction {
    /// Validates that `probs` is a distribution (each component in
    /// [0, 1], summing to 1 within [`SOFT_SUM_TOLERANCE`]).
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.len() < 2 {
            return Err(Error::InvalidDistribution(format!(
                "need at least 2 components, got {}",
                probs.len()
            )));
        }
        for (i, &p) in probs.iter().enumerate() {
            if !(0.0..=1.0).contains(&p) || p.is_nan() {
                return Err(Error::InvalidDistribution(format!(
                    "component {i} is {p}, outside [0, 1]"
                )));
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > SOFT_SUM_TOLERANCE {
            return Err(Error::InvalidDistribution(format!(
                "components sum to {sum}, not 1"
            )));
        }
        Ok(SoftPrediction {
            probs: Arc::from(probs),
        })
    }

    /// Normalizes non-negative weights into a distribution.
    ///
    /// Used by combiners whose raw outputs are exact up to one final
    /// division; the caller guarantees at least one positive weight.
    pub(crate) fn normalized(mut weights: Vec<f64>) -> Self {
        let sum: f64 = weights.iter().sum();
        debug_assert!(sum > 0.0, "normalizing all-zero weights");
        for w in &mut weights {
            *w /= sum;
        }
        SoftPrediction {
            probs: Arc::from(weights),
        }
    }

    /// The full probability vector, in label-space order.
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Probability assigned to `label`.
    pub fn prob(&self, label: Label) -> f64 {
        self.probs[label.index()]
    }

    /// The most probable label (smallest index wins ties).
    pub fn argmax(&self) -> Label {
        let mut best = 0;
        for (i, &p) in self.probs.iter().enumerate() {
            if p > self.probs[best] {
                best = i;
            }
        }
        Label(best as u16)
    }
}

/// One prediction for one item.
#[derive(Debug, Clone, PartialEq)]
pub enum Prediction {
    /// A single label.
    Hard(Label),
    /// A probability distribution over labels.
    Soft(SoftPrediction),
}

impl Prediction {
    /// Builds a soft prediction, validating the distribution.
    pub fn soft(probs: Vec<f64>) -> Result<Self> {
        Ok(Prediction::Soft(SoftPrediction::new(probs)?))
    }

    /// The prediction's kind.
    pub fn kind(&self) -> PredictionKind {
        match self {
            Prediction::Hard(_) => PredictionKind::Hard,
            Prediction::Soft(_) => PredictionKind::Soft,
        }
    }

    /// The hard label, if this is a hard prediction.
    pub fn as_hard(&self) -> Option<Label> {
        match self {
            Prediction::Hard(label) => Some(*label),
            Prediction::Soft(_) => None,
        }
    }

    /// The soft distribution, if this is a soft prediction.
    pub fn as_soft(&self) -> Option<&SoftPrediction> {
        match self {
            Prediction::Hard(_) => None,
            Prediction::Soft(soft) => Some(soft),
        }
    }
}

/// Whether predictions are single labels or distributions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PredictionKind {
    Hard,
    Soft,
}

impl PredictionKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PredictionKind::Hard => "hard",
            PredictionKind::Soft => "soft",
        }
    }
}

/// Predictions for a set of items, keyed by item id.
///
/// All predictions in a set share one kind. A set is *aligned* with a
/// rating matrix when it covers every item id the matrix contains;
/// predictions for ids the matrix lacks are allowed (and ignored), which
/// is what lets one set serve both a full matrix and its bootstrap
/// resamples.
#[derive(Debug, Clone)]
pub struct PredictionSet {
    kind: PredictionKind,
    entries: BTreeMap<String, Prediction>,
}

impl PredictionSet {
    /// An empty set of the given kind.
    pub fn new(kind: PredictionKind) -> Self {
        PredictionSet {
            kind,
            entries: BTreeMap::new(),
        }
    }

    /// Collects `(item id, prediction)` pairs, requiring a uniform kind
    /// and unique ids.
    pub fn from_pairs<I>(kind: PredictionKind, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (String, Prediction)>,
    {
        let mut set = Self::new(kind);
        for (id, prediction) in pairs {
            set.insert(id, prediction)?;
        }
        Ok(set)
    }

    /// Inserts one prediction, enforcing the set's kind and id
    /// uniqueness.
    pub fn insert(&mut self, id: String, prediction: Prediction) -> Result<()> {
        if prediction.kind() != self.kind {
            return Err(Error::KindMismatch {
                expected: self.kind.as_str(),
                found: prediction.kind().as_str(),
            });
        }
        if self.entries.contains_key(&id) {
            return Err(Error::PredictionMismatch(format!(
                "duplicate prediction for item {id:?}"
            )));
        }
        self.entries.insert(id, prediction);
        Ok(())
    }

    /// The kind shared by all predictions in the set.
    pub fn kind(&self) -> PredictionKind {
        self.kind
    }

    /// Number of predictions.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    /// True when the set holds no predictions.
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// The prediction for one item id.
    pub fn get(&self, id: &str) -> Option<&Prediction> {
        self.entries.get(id)
    }

    /// Iterates `(id, prediction)` in id order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &Prediction)> + '_ {
        self.entries.iter().map(|(id, p)| (id.as_str(), p))
    }

    /// Resolves one prediction per matrix item, in the matrix's storage
    /// order, failing if any item id is missing from the set.
    pub fn aligned<'a>(&'a self, matrix: &RatingMatrix) -> Result<Vec<&'a Prediction>> {
        let mut missing = Vec::new();
        let mut out = Vec::with_capacity(matrix.n_items());
        for idx in 0..matrix.n_items() {
            match self.entries.get(matrix.item_id(idx)) {
                Some(p) => out.push(p),
                None => missing.push(matrix.item_id(idx).to_owned()),
            }
        }
        if !missing.is_empty() {
            missing.truncate(5);
            return Err(Error::PredictionMismatch(format!(
                "no prediction for {} item(s), e.g. {missing:?}",
                matrix.n_items() - out.len()
            )));
        }
        Ok(out)
    }

    /// Validates that every soft prediction's dimension matches `space`.
    pub fn check_dimensions(&self, space: &LabelSpace) -> Result<()> {
        for (id, prediction) in &self.entries {
            if let Prediction::Soft(soft) = prediction {
                if soft.probs().len() != space.len() {
                    return Err(Error::PredictionMismatch(format!(
                        "prediction for item {id:?} has {} components, label space has {}",
                        soft.probs().len(),
                        space.len()
                    )));
                }
            }
        }
        Ok(())
    }
}
