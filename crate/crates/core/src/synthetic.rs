//! A generative rating model for experiments, with closed-form
//! information oracles.
//!
//! The model is an urn of urns: each item draws a latent *state* (a
//! distribution over labels) from a prior, then raters label the item
//! i.i.d. from that state. A synthetic classifier reads the state too:
//! it emits a hard label from a per-state distribution, and a fixed map
//! turns each hard label into a soft output. Because everything is
//! conditionally independent given the state, mutual informations have
//! exact closed forms ([`SyntheticModel::survey_mi`],
//! [`SyntheticModel::classifier_mi`], [`SyntheticModel::state_label_mi`])
//! — which is what makes generated datasets useful as test fixtures:
//! empirical curves can be checked against analytic limits.
//!
//! [`example_model`] is the three-state binary model used across the
//! crate's docs and tests; [`example_ratings`] is a tiny fixed dataset
//! for worked examples.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Label, LabelSpace, RatingMatrix};
use crate::prediction::{Prediction, PredictionKind, PredictionSet, SoftPrediction};
use crate::rng::{task, RandomSource, TaskRng};
use crate::scorers::Scorer;

/// Tolerance for probability vectors summing to one in model configs.
const DISTRIBUTION_TOLERANCE: f64 = 1e-9;

/// Gap above which a soft map is flagged as not calibrated.
const CALIBRATION_TOLERANCE: f64 = 1e-9;

/// One latent state: a distribution over labels plus its prior weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct State {
    /// Probability of each label under this state, in label-space
    /// order. Every component must be positive (full support), so that
    /// log scores stay finite on any generated data.
    pub probs: Vec<f64>,
    /// Prior probability of an item drawing this state.
    pub prior: f64,
}

/// The synthetic classifier attached to a model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierRules {
    /// Per state: the distribution its hard emission is drawn from.
    pub hard_emission: Vec<Vec<f64>>,
    /// Per hard label: the soft output vector reported for it.
    pub soft_map: Vec<Vec<f64>>,
}

/// A complete generative rating model: label space, states with priors,
/// and classifier rules.
///
/// Fields are public so configs can be assembled directly or loaded
/// from JSON; call [`SyntheticModel::validate`] (or any generator or
/// oracle, which validate on entry) before trusting one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticModel {
    /// Label names, defining the label order used by every vector here.
    pub labels: Vec<String>,
    /// The latent states items draw from.
    pub states: Vec<State>,
    /// The synthetic classifier.
    pub classifier: ClassifierRules,
}

impl SyntheticModel {
    /// Checks the structural invariants: distributions sum to one,
    /// states have full support, priors are positive, and the
    /// classifier tables have matching dimensions.
    ///
    /// A single-state model is allowed (it generates exchangeable noise
    /// with zero information, handy for null-hypothesis checks), though
    /// the interesting properties all need at least two states.
    pub fn validate(&self) -> Result<()> {
        let space = self.label_space()?;
        let n_labels = space.len();
        if self.states.is_empty() {
            return Err(Error::InvalidModel(
                "a model needs at least one state".into(),
            ));
        }
        let mut prior_total = 0.0;
        for (i, state) in self.states.iter().enumerate() {
            if state.probs.len() != n_labels {
                return Err(Error::InvalidModel(format!(
                    "state {i} has {} label probabilities for {n_labels} labels",
                    state.probs.len()
                )));
            }
            check_distribution(&state.probs, &format!("state {i}"))?;
            if state.probs.iter().any(|&p| p <= 0.0) {
                return Err(Error::InvalidModel(format!(
                    "state {i} must have full support (every label probability positive)"
                )));
            }
            if state.prior <= 0.0 {
                return Err(Error::InvalidModel(format!(
                    "state {i} has non-positive prior {}",
                    state.prior
                )));
            }
            prior_total += state.prior;
        }
        if (prior_total - 1.0).abs() > DISTRIBUTION_TOLERANCE {
            return Err(Error::InvalidModel(format!(
                "state priors sum to {prior_total}, expected 1"
            )));
        }
        if self.classifier.hard_emission.len() != self.states.len() {
            return Err(Error::InvalidModel(format!(
                "{} hard-emission rows for {} states",
                self.classifier.hard_emission.len(),
                self.states.len()
            )));
        }
        for (i, row) in self.classifier.hard_emission.iter().enumerate() {
            if row.len() != n_labels {
                return Err(Error::InvalidModel(format!(
                    "hard-emission row {i} has {} entries for {n_labels} labels",
                    row.len()
                )));
            }
            check_distribution(row, &format!("hard-emission row {i}"))?;
        }
        if self.classifier.soft_map.len() != n_labels {
            return Err(Error::InvalidModel(format!(
                "{} soft-map rows for {n_labels} labels",
                self.classifier.soft_map.len()
            )));
        }
        for (i, row) in self.classifier.soft_map.iter().enumerate() {
            if row.len() != n_labels {
                return Err(Error::InvalidModel(format!(
                    "soft-map row {i} has {} entries for {n_labels} labels",
                    row.len()
                )));
            }
            check_distribution(row, &format!("soft-map row {i}"))?;
        }
        Ok(())
    }

    /// The label space the model's vectors are indexed by.
    pub fn label_space(&self) -> Result<LabelSpace> {
        LabelSpace::new(self.labels.iter().map(String::as_str))
    }

    /// Number of labels.
    pub fn n_labels(&self) -> usize {
        self.labels.len()
    }

    /// Marginal label distribution `Pr[Y = l]` under the model.
    pub fn label_marginal(&self) -> Vec<f64> {
        let mut marginal = vec![0.0; self.n_labels()];
        for state in &self.states {
            for (m, &p) in marginal.iter_mut().zip(&state.probs) {
                *m += state.prior * p;
            }
        }
        marginal
    }

    /// Draws a dataset: `n_items` items, each with `n_raters` ratings
    /// and one hard + one soft classifier prediction.
    ///
    /// Each item uses its own rng stream, so the draw for item `i` does
    /// not depend on how many items come before it.
    pub fn generate(
        &self,
        n_items: usize,
        n_raters: usize,
        source: &RandomSource,
    ) -> Result<GeneratedData> {
        self.validate()?;
        if n_items == 0 {
            return Err(Error::InvalidConfig("cannot generate zero items".into()));
        }
        if n_raters < 2 {
            return Err(Error::InvalidConfig(format!(
                "need at least two raters per item, got {n_raters}"
            )));
        }
        let space = self.label_space()?;

        struct ItemDraw {
            id: String,
            state: usize,
            ratings: Vec<Label>,
            hard: Label,
        }
        let priors: Vec<f64> = self.states.iter().map(|s| s.prior).collect();
        let draws: Vec<ItemDraw> = (0..n_items)
            .into_par_iter()
            .map(|i| {
                let mut rng = source.stream(&[task::GEN, i as u64]);
                let state = sample_discrete(&priors, &mut rng);
                let ratings: Vec<Label> = (0..n_raters)
                    .map(|_| Label(sample_discrete(&self.states[state].probs, &mut rng) as u16))
                    .collect();
                let hard =
                    Label(sample_discrete(&self.classifier.hard_emission[state], &mut rng) as u16);
                ItemDraw {
                    id: format!("item-{i:06}"),
                    state,
                    ratings,
                    hard,
                }
            })
            .collect();

        let mut hard_predictions = PredictionSet::new(PredictionKind::Hard);
        let mut soft_predictions = PredictionSet::new(PredictionKind::Soft);
        let mut ids = Vec::with_capacity(n_items);
        let mut states = Vec::with_capacity(n_items);
        let mut rows = Vec::with_capacity(n_items);
        for draw in draws {
            hard_predictions.insert(draw.id.clone(), Prediction::Hard(draw.hard))?;
            soft_predictions.insert(
                draw.id.clone(),
                Prediction::Soft(SoftPrediction::new(
                    self.classifier.soft_map[draw.hard.index()].clone(),
                )?),
            )?;
            ids.push(draw.id.clone());
            states.push(draw.state);
            rows.push((draw.id, draw.ratings));
        }
        let matrix = RatingMatrix::from_labels(space, rows)?;
        Ok(GeneratedData {
            matrix,
            hard_predictions,
            soft_predictions,
            trace: GroundTruthTrace { ids, states },
        })
    }

    /// Exact mutual information (bits) between one further rating and
    /// `k` ratings of the same item: `MI(Y_{k+1}; Y_1..Y_k)`.
    ///
    /// Computed by summing over label-count vectors of size `k` with
    /// multinomial weights — exchangeability makes that exact, and it
    /// stays tractable for the `k <= 20` range surveys live in.
    pub fn survey_mi(&self, k: usize) -> Result<f64> {
        self.validate()?;
        if k == 0 {
            return Ok(0.0);
        }
        let marginal = self.label_marginal();
        let mut mi = 0.0;
        for counts in count_vectors(k, self.n_labels()) {
            let coeff = multinomial_coefficient(&counts);
            // Weight of this count vector and, jointly, of each next
            // label: sums over states of prior * state likelihood.
            let mut w = 0.0;
            let mut joint_next = vec![0.0; self.n_labels()];
            for state in &self.states {
                let mut likelihood = state.prior * coeff;
                for (&c, &p) in counts.iter().zip(&state.probs) {
                    likelihood *= p.powi(c as i32);
                }
                w += likelihood;
                for (j, &p) in joint_next.iter_mut().zip(&state.probs) {
                    *j += likelihood * p;
                }
            }
            for (j, &m) in joint_next.iter().zip(&marginal) {
                // j = Pr[counts, next]; the contribution is
                // j * log2(Pr[next | counts] / Pr[next]).
                if *j > 0.0 {
                    mi += *j * (*j / (w * m)).log2();
                }
            }
        }
        Ok(mi)
    }

    /// Exact mutual information (bits) between the soft classifier's
    /// output and one rating of the same item, with a calibration
    /// diagnostic.
    pub fn classifier_mi(&self) -> Result<ClassifierMi> {
        self.validate()?;
        let n_labels = self.n_labels();
        // Group hard labels whose soft outputs coincide: information
        // content depends only on the partition the output induces.
        let mut groups: Vec<Vec<usize>> = Vec::new();
        for hard in 0..n_labels {
            let row = &self.classifier.soft_map[hard];
            match groups
                .iter()
                .position(|g| self.classifier.soft_map[g[0]] == *row)
            {
                Some(g) => groups[g].push(hard),
                None => groups.push(vec![hard]),
            }
        }

        let marginal = self.label_marginal();
        let mut mi = 0.0;
        for group in &groups {
            let mut p_output = 0.0;
            let mut joint = vec![0.0; n_labels];
            for (s, state) in self.states.iter().enumerate() {
                let emit: f64 = group
                    .iter()
                    .map(|&h| self.classifier.hard_emission[s][h])
                    .sum();
                let weight = state.prior * emit;
                p_output += weight;
                for (j, &p) in joint.iter_mut().zip(&state.probs) {
                    *j += weight * p;
                }
            }
            for (&j, &m) in joint.iter().zip(&marginal) {
                if j > 0.0 {
                    mi += j * (j / (p_output * m)).log2();
                }
            }
        }

        // Calibration gap: how far each soft output sits from the true
        // posterior Pr[Y = l | hard output].
        let mut gap = 0.0f64;
        for hard in 0..n_labels {
            let mut p_hard = 0.0;
            let mut joint = vec![0.0; n_labels];
            for (s, state) in self.states.iter().enumerate() {
                let weight = state.prior * self.classifier.hard_emission[s][hard];
                p_hard += weight;
                for (j, &p) in joint.iter_mut().zip(&state.probs) {
                    *j += weight * p;
                }
            }
            if p_hard == 0.0 {
                continue; // an output never emitted carries no claim
            }
            for (j, &soft) in joint.iter().zip(&self.classifier.soft_map[hard]) {
                gap = gap.max((j / p_hard - soft).abs());
            }
        }

        Ok(ClassifierMi {
            value: mi,
            calibration_gap: gap,
            calibrated: gap <= CALIBRATION_TOLERANCE,
        })
    }

    /// Exact mutual information (bits) between an item's latent state
    /// and one of its ratings — the ceiling any survey or classifier
    /// information can approach.
    pub fn state_label_mi(&self) -> Result<f64> {
        self.validate()?;
        let marginal = self.label_marginal();
        let mut mi = 0.0;
        for state in &self.states {
            for (&p, &m) in state.probs.iter().zip(&marginal) {
                mi += state.prior * p * (p / m).log2();
            }
        }
        Ok(mi)
    }
}

/// A classifier-information oracle result.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifierMi {
    /// `MI(classifier output; one rating)` in bits.
    pub value: f64,
    /// Largest deviation of a soft output from the true posterior label
    /// distribution given that output.
    pub calibration_gap: f64,
    /// True when the gap is negligible; a rounded soft map (like the
    /// example model's 0.77/0.32) reports `false` with a small gap.
    pub calibrated: bool,
}

/// Which latent state each generated item actually drew.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthTrace {
    ids: Vec<String>,
    states: Vec<usize>,
}

impl GroundTruthTrace {
    /// Number of items traced.
    pub fn len(&self) -> usize {
        self.states.len()
    }

    /// True when the trace is empty (never produced by generation).
    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Item ids, in generation order.
    pub fn ids(&self) -> impl Iterator<Item = &str> + '_ {
        self.ids.iter().map(String::as_str)
    }

    /// State indices, parallel to [`GroundTruthTrace::ids`].
    pub fn states(&self) -> &[usize] {
        &self.states
    }
}

/// Everything one generation run produces.
#[derive(Debug, Clone)]
pub struct GeneratedData {
    /// The rating matrix.
    pub matrix: RatingMatrix,
    /// Hard classifier predictions, one per item.
    pub hard_predictions: PredictionSet,
    /// Soft classifier predictions, one per item.
    pub soft_predictions: PredictionSet,
    /// The latent state each item drew.
    pub trace: GroundTruthTrace,
}

/// Scores predictions against each item's *latent state* instead of
/// against held-out raters.
///
/// Only meaningful when states correspond one-to-one with labels (state
/// `i` is read as label `i`), the setting where label noise merely
/// rescales rater-referenced scores; anything else is refused.
pub fn hscore_star(
    predictions: &PredictionSet,
    trace: &GroundTruthTrace,
    model: &SyntheticModel,
    scorer: Scorer,
) -> Result<f64> {
    model.validate()?;
    if model.states.len() != model.n_labels() {
        return Err(Error::NonUniformNoiseModel(format!(
            "{} states over {} labels",
            model.states.len(),
            model.n_labels()
        )));
    }
    scorer.check_kind(predictions.kind())?;
    let mut pairs = Vec::with_capacity(trace.len());
    for (id, &state) in trace.ids.iter().zip(&trace.states) {
        let prediction = predictions.get(id).ok_or_else(|| {
            Error::PredictionMismatch(format!("no prediction for generated item {id:?}"))
        })?;
        pairs.push((prediction, Label(state as u16)));
    }
    scorer.score(&pairs, model.n_labels())
}

/// The three-state binary model used across the crate's docs and tests.
///
/// Most items lean toward label `C` (state `(0.8, 0.2)`, prior 0.7), a
/// few are ambiguous (`(0.5, 0.5)`, prior 0.1), the rest lean hard to
/// `D` (`(0.1, 0.9)`, prior 0.2). The hard classifier reads the state
/// noisily (emitting `C` with probability 0.9 / 0.5 / 0.05 per state)
/// and the soft classifier reports 0.77 or 0.32 for `C` according to
/// the hard output — close to, but deliberately not exactly, the
/// calibrated posterior.
pub fn example_model() -> SyntheticModel {
    SyntheticModel {
        labels: vec!["C".to_owned(), "D".to_owned()],
        states: vec![
            State {
                probs: vec![0.8, 0.2],
                prior: 0.7,
            },
            State {
                probs: vec![0.5, 0.5],
                prior: 0.1,
            },
            State {
                probs: vec![0.1, 0.9],
                prior: 0.2,
            },
        ],
        classifier: ClassifierRules {
            hard_emission: vec![vec![0.9, 0.1], vec![0.5, 0.5], vec![0.05, 0.95]],
            soft_map: vec![vec![0.77, 0.23], vec![0.32, 0.68]],
        },
    }
}

/// A fixed ten-item, ten-rater dataset with classifier predictions,
/// small enough to check every score by hand.
///
/// Returns the matrix plus hard and soft prediction sets (the soft
/// outputs are 0.77/0.32 for `C` following the hard output, matching
/// [`example_model`]'s classifier).
pub fn example_ratings() -> (RatingMatrix, PredictionSet, PredictionSet) {
    const ROWS: [(&str, &str); 10] = [
        ("D", "DDCCDCCCCC"),
        ("C", "CCCCCCCCCC"),
        ("C", "DCCCCCCCCC"),
        ("C", "DCCCCCCCCC"),
        ("C", "DCDCCCCCCC"),
        ("C", "CCCCCCDCCC"),
        ("C", "CDCCCCCCCC"),
        ("C", "DCDCCCDCCC"),
        ("D", "DDDDDDDDDD"),
        ("D", "DDDCDDDCDD"),
    ];
    let space = LabelSpace::new(["C", "D"]).expect("static label space");
    let to_label = |ch: char| if ch == 'C' { Label(0) } else { Label(1) };
    let mut items = Vec::with_capacity(ROWS.len());
    let mut hard = PredictionSet::new(PredictionKind::Hard);
    let mut soft = PredictionSet::new(PredictionKind::Soft);
    for (i, (h, ratings)) in ROWS.iter().enumerate() {
        let id = format!("ex-{i}");
        items.push((
            id.clone(),
            ratings.chars().map(to_label).collect::<Vec<_>>(),
        ));
        let h = to_label(h.chars().next().expect("one char"));
        hard.insert(id.clone(), Prediction::Hard(h))
            .expect("fresh id");
        let probs = if h == Label(0) {
            vec![0.77, 0.23]
        } else {
            vec![0.32, 0.68]
        };
        soft.insert(
            id,
            Prediction::Soft(SoftPrediction::new(probs).expect("static distribution")),
        )
        .expect("fresh id");
    }
    let matrix = RatingMatrix::from_labels(space, items).expect("static fixture is valid");
    (matrix, hard, soft)
}

fn check_distribution(probs: &[f64], what: &str) -> Result<()> {
    if probs.iter().any(|p| !p.is_finite() || *p < 0.0 || *p > 1.0) {
        return Err(Error::InvalidModel(format!(
            "{what} has probabilities outside [0, 1]"
        )));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > DISTRIBUTION_TOLERANCE {
        return Err(Error::InvalidModel(format!(
            "{what} sums to {total}, expected 1"
        )));
    }
    Ok(())
}

fn sample_discrete(probs: &[f64], rng: &mut TaskRng) -> usize {
    use rand::Rng;
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}

/// All vectors of `n_labels` non-negative counts summing to `k`.
fn count_vectors(k: usize, n_labels: usize) -> Vec<Vec<u16>> {
    fn recurse(remaining: u16, slots: usize, prefix: &mut Vec<u16>, out: &mut Vec<Vec<u16>>) {
        if slots == 1 {
            prefix.push(remaining);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for c in 0..=remaining {
            prefix.push(c);
            recurse(remaining - c, slots - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    recurse(
        k as u16,
        n_labels,
        &mut Vec::with_capacity(n_labels),
        &mut out,
    );
    out
}

/// `k! / (c_1! * ... * c_n!)` for a count vector.
fn multinomial_coefficient(counts: &[u16]) -> f64 {
    let mut value = 1.0;
    let mut drawn = 0u32;
    for &c in counts {
        for j in 1..=c as u32 {
            drawn += 1;
            value *= drawn as f64 / j as f64;
        }
    }
    value
}
