//! Scoring functions for predictions against held-out ratings.
//!
//! Two layers live here. The *pair scorers* ([`agreement_score`],
//! [`f1_score`], [`auc_score`], [`cross_entropy_score`], [`dmi_score`])
//! grade a batch of `(prediction, reference label)` pairs. On top of
//! them, [`hscore`] grades a classifier against a whole rating matrix by
//! scoring each rating slot as a separate reference and averaging — the
//! same construction the power-curve machinery uses for pooled rater
//! predictions, so classifier scores and curve points are directly
//! comparable. [`hscore_r`] swaps the single held-out rater for the
//! plurality of `r` held-out raters, and [`krippendorff_alpha`] reports
//! plain inter-rater reliability of the matrix itself.
//!
//! Scores are oriented so that **higher is better**; cross entropy is the
//! expected base-2 log probability of the realized label, a negative
//! number that approaches zero from below as predictions sharpen.

use crate::error::{Error, Result};
use crate::model::{Label, LabelCounts, RatingMatrix};
use crate::power_curve::rater_subsets_capped;
use crate::prediction::{Prediction, PredictionKind, PredictionSet, SoftPrediction};
use crate::rng::{stable_id_hash, task, RandomSource};

/// A scoring function plus the parameters it needs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scorer {
    /// Fraction of pairs where the predicted label equals the reference.
    Agreement,
    /// Harmonic mean of precision and recall for `positive`.
    F1 { positive: Label },
    /// Probability that a random positive item is ranked above a random
    /// negative one (ties count half), ranking by predicted probability
    /// of `positive`.
    Auc { positive: Label },
    /// Expected base-2 log probability assigned to the reference label.
    CrossEntropy,
    /// Absolute determinant of the joint prediction/reference frequency
    /// matrix; zero iff predictions and references are independent.
    Dmi,
}

impl Scorer {
    /// The prediction kind this scorer consumes, or `None` when both
    /// kinds are accepted.
    pub fn required_kind(&self) -> Option<PredictionKind> {
        match self {
            Scorer::Agreement | Scorer::F1 { .. } => Some(PredictionKind::Hard),
            Scorer::Auc { .. } | Scorer::CrossEntropy => Some(PredictionKind::Soft),
            Scorer::Dmi => None,
        }
    }

    /// Stable name used in metadata and on the command line.
    pub fn name(&self) -> &'static str {
        match self {
            Scorer::Agreement => "agreement",
            Scorer::F1 { .. } => "f1",
            Scorer::Auc { .. } => "auc",
            Scorer::CrossEntropy => "cross-entropy",
            Scorer::Dmi => "dmi",
        }
    }

    /// Checks that `kind` is acceptable input for this scorer.
    pub fn check_kind(&self, kind: PredictionKind) -> Result<()> {
        match self.required_kind() {
            Some(required) if required != kind => Err(Error::KindMismatch {
                expected: required.as_str(),
                found: kind.as_str(),
            }),
            _ => Ok(()),
        }
    }

    /// Scores a batch of `(prediction, reference)` pairs.
    ///
    /// `n_labels` is the size of the label space (needed by the joint
    /// frequency matrix; harmless elsewhere).
    pub fn score(&self, pairs: &[(&Prediction, Label)], n_labels: usize) -> Result<f64> {
        match *self {
            Scorer::Agreement => agreement_score(&hard_pairs(pairs)?),
            Scorer::F1 { positive } => f1_score(&hard_pairs(pairs)?, positive),
            Scorer::Auc { positive } => auc_score(&soft_pairs(pairs)?, positive),
            Scorer::CrossEntropy => cross_entropy_score(&soft_pairs(pairs)?),
            Scorer::Dmi => dmi_score(pairs, n_labels),
        }
    }
}

fn hard_pairs(pairs: &[(&Prediction, Label)]) -> Result<Vec<(Label, Label)>> {
    pairs
        .iter()
        .map(|&(p, r)| match p {
            Prediction::Hard(label) => Ok((*label, r)),
            Prediction::Soft(_) => Err(Error::KindMismatch {
                expected: "hard",
                found: "soft",
            }),
        })
        .collect()
}

fn soft_pairs<'a>(pairs: &[(&'a Prediction, Label)]) -> Result<Vec<(&'a SoftPrediction, Label)>> {
    pairs
        .iter()
        .map(|&(p, r)| match p {
            Prediction::Soft(soft) => Ok((soft, r)),
            Prediction::Hard(_) => Err(Error::KindMismatch {
                expected: "soft",
                found: "hard",
            }),
        })
        .collect()
}

/// Fraction of pairs whose predicted label equals the reference label.
pub fn agreement_score(pairs: &[(Label, Label)]) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::EmptyInput("agreement over no pairs".into()));
    }
    let hits = pairs.iter().filter(|(p, r)| p == r).count();
    Ok(hits as f64 / pairs.len() as f64)
}

/// F1 for the `positive` label: `2·TP / (2·TP + FP + FN)`.
///
/// When the positive label appears in neither predictions nor references
/// the measure is undefined; this returns 0.0 for that case so that a
/// batch with no positives anywhere scores as if the classifier found
/// none of them.
pub fn f1_score(pairs: &[(Label, Label)], positive: Label) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::EmptyInput("f1 over no pairs".into()));
    }
    let mut tp = 0.0;
    let mut fp = 0.0;
    let mut fn_ = 0.0;
    for &(p, r) in pairs {
        match (p == positive, r == positive) {
            (true, true) => tp += 1.0,
            (true, false) => fp += 1.0,
            (false, true) => fn_ += 1.0,
            (false, false) => {}
        }
    }
    let denom = 2.0 * tp + fp + fn_;
    if denom == 0.0 {
        return Ok(0.0);
    }
    Ok(2.0 * tp / denom)
}

/// Expected base-2 log probability of the reference label.
///
/// Fails with [`Error::ZeroProbabilityLabel`] if any prediction assigns
/// probability zero to its realized reference.
pub fn cross_entropy_score(pairs: &[(&SoftPrediction, Label)]) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::EmptyInput("cross entropy over no pairs".into()));
    }
    let mut total = 0.0;
    for (i, &(soft, r)) in pairs.iter().enumerate() {
        let p = soft.prob(r);
        if p <= 0.0 {
            return Err(Error::ZeroProbabilityLabel {
                context: format!("pair {i}"),
            });
        }
        total += p.log2();
    }
    Ok(total / pairs.len() as f64)
}

/// Area under the ROC curve for `positive`, ranking by predicted
/// probability of the positive label; tied ranks count one half.
///
/// Fails with [`Error::DegenerateLabels`] unless both positive and
/// negative references are present.
pub fn auc_score(pairs: &[(&SoftPrediction, Label)], positive: Label) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::EmptyInput("auc over no pairs".into()));
    }
    let n_pos = pairs.iter().filter(|&&(_, r)| r == positive).count();
    let n_neg = pairs.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::DegenerateLabels(format!(
            "auc needs both classes in the references, got {n_pos} positive / {n_neg} negative"
        )));
    }

    // Rank-sum formulation: sort by score, give tied runs their average
    // rank, and sum the positive ranks.
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    order.sort_by(|&a, &b| {
        pairs[a]
            .0
            .prob(positive)
            .partial_cmp(&pairs[b].0.prob(positive))
            .expect("probabilities are never NaN")
    });
    let mut rank_sum_pos = 0.0;
    let mut start = 0;
    while start < order.len() {
        let score = pairs[order[start]].0.prob(positive);
        let mut end = start + 1;
        while end < order.len() && pairs[order[end]].0.prob(positive) == score {
            end += 1;
        }
        // 1-based ranks start+1 ..= end share the average.
        let avg_rank = (start + 1 + end) as f64 / 2.0;
        for &idx in &order[start..end] {
            if pairs[idx].1 == positive {
                rank_sum_pos += avg_rank;
            }
        }
        start = end;
    }
    let u = rank_sum_pos - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Ok(u / (n_pos as f64 * n_neg as f64))
}

/// Absolute determinant of the joint `(prediction, reference)` frequency
/// matrix over `n_labels` labels.
///
/// Accepts hard pairs (each adds one count) or soft pairs (each spreads
/// its distribution across the prediction axis).
pub fn dmi_score(pairs: &[(&Prediction, Label)], n_labels: usize) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::EmptyInput("dmi over no pairs".into()));
    }
    let mut joint = vec![vec![0.0f64; n_labels]; n_labels];
    for &(p, r) in pairs {
        match p {
            Prediction::Hard(label) => joint[label.index()][r.index()] += 1.0,
            Prediction::Soft(soft) => {
                for (row, &prob) in soft.probs().iter().enumerate() {
                    joint[row][r.index()] += prob;
                }
            }
        }
    }
    let n = pairs.len() as f64;
    for row in &mut joint {
        for cell in row {
            *cell /= n;
        }
    }
    Ok(determinant(joint).abs())
}

/// Determinant by LU decomposition with partial pivoting; the matrices
/// here are `|labels| x |labels|`, so tiny.
fn determinant(mut m: Vec<Vec<f64>>) -> f64 {
    let n = m.len();
    let mut det = 1.0;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&a, &b| m[a][col].abs().partial_cmp(&m[b][col].abs()).unwrap())
            .unwrap();
        if m[pivot][col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            m.swap(pivot, col);
            det = -det;
        }
        det *= m[col][col];
        for row in col + 1..n {
            let factor = m[row][col] / m[col][col];
            let (pivot_rows, rest) = m.split_at_mut(row);
            for (cell, &p) in rest[0][col..].iter_mut().zip(&pivot_rows[col][col..]) {
                *cell -= factor * p;
            }
        }
    }
    det
}

/// Outcome of scoring one reference (a rating slot, or one reference
/// rater subset) inside [`hscore`]/[`hscore_r`].
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceOutcome {
    /// Index of the rating slot (or reference subset).
    pub reference: usize,
    /// Number of `(prediction, rating)` pairs the reference provided.
    pub n_pairs: usize,
    /// The score, or `None` when this reference was skipped because its
    /// labels were degenerate for the scorer (AUC with one class).
    pub score: Option<f64>,
}

/// [`hscore`] plus per-reference details.
#[derive(Debug, Clone, PartialEq)]
pub struct HScoreDetail {
    /// Mean score over the non-skipped references.
    pub value: f64,
    /// One outcome per reference, in reference order.
    pub references: Vec<ReferenceOutcome>,
    /// Mean fraction of items covered per reference (below 1.0 only on
    /// ragged matrices).
    pub coverage: f64,
}

/// Scores a classifier against every rating slot of a matrix and
/// averages.
///
/// Each slot position acts as one held-out reference: the predictions
/// are paired with the ratings in that slot (items lacking the slot are
/// skipped for it) and scored; the final value is the mean over slots.
/// Slots where the scorer is undefined because the references are
/// degenerate are skipped; everything else fails loudly.
pub fn hscore(predictions: &PredictionSet, matrix: &RatingMatrix, scorer: Scorer) -> Result<f64> {
    hscore_detailed(predictions, matrix, scorer).map(|d| d.value)
}

/// [`hscore`] with per-slot scores and coverage reported.
pub fn hscore_detailed(
    predictions: &PredictionSet,
    matrix: &RatingMatrix,
    scorer: Scorer,
) -> Result<HScoreDetail> {
    scorer.check_kind(predictions.kind())?;
    predictions.check_dimensions(matrix.label_space())?;
    let aligned = predictions.aligned(matrix)?;
    let per_item: Vec<Option<&Prediction>> = aligned.into_iter().map(Some).collect();
    score_against_slots(&per_item, matrix, scorer, None)
}

/// Scores per-item predictions (possibly missing for some items) against
/// every slot of `matrix`, or against `restrict_to` slots only.
///
/// This is the shared core of [`hscore`] and the power-curve scoring
/// path; the caller guarantees the predictions' kind suits the scorer.
pub(crate) fn score_against_slots(
    predictions: &[Option<&Prediction>],
    matrix: &RatingMatrix,
    scorer: Scorer,
    restrict_to: Option<&[usize]>,
) -> Result<HScoreDetail> {
    let n_labels = matrix.label_space().len();
    let all_slots: Vec<usize>;
    let slots: &[usize] = match restrict_to {
        Some(s) => s,
        None => {
            all_slots = (0..matrix.max_raters()).collect();
            &all_slots
        }
    };
    if slots.is_empty() {
        return Err(Error::EmptyInput(
            "no reference slots to score against".into(),
        ));
    }

    let mut outcomes = Vec::with_capacity(slots.len());
    let mut pairs: Vec<(&Prediction, Label)> = Vec::with_capacity(matrix.n_items());
    let mut pair_items: Vec<u32> = Vec::with_capacity(matrix.n_items());
    let mut total = 0.0;
    let mut scored = 0usize;
    let mut coverage = 0.0;

    for &slot in slots {
        pairs.clear();
        pair_items.clear();
        for &idx in matrix.canonical_order() {
            let idx = idx as usize;
            let row = matrix.row(idx);
            if slot < row.len() {
                if let Some(prediction) = predictions[idx] {
                    pairs.push((prediction, row[slot]));
                    pair_items.push(idx as u32);
                }
            }
        }
        coverage += pairs.len() as f64 / matrix.n_items() as f64;
        if pairs.is_empty() {
            outcomes.push(ReferenceOutcome {
                reference: slot,
                n_pairs: 0,
                score: None,
            });
            continue;
        }
        match scorer.score(&pairs, n_labels) {
            Ok(score) => {
                total += score;
                scored += 1;
                outcomes.push(ReferenceOutcome {
                    reference: slot,
                    n_pairs: pairs.len(),
                    score: Some(score),
                });
            }
            Err(Error::DegenerateLabels(_)) => {
                outcomes.push(ReferenceOutcome {
                    reference: slot,
                    n_pairs: pairs.len(),
                    score: None,
                });
            }
            Err(Error::ZeroProbabilityLabel { .. }) => {
                // Re-derive which item tripped it, for a precise report.
                let culprit = pairs
                    .iter()
                    .zip(&pair_items)
                    .find(|((p, r), _)| p.as_soft().map(|s| s.prob(*r)) == Some(0.0))
                    .map(|(_, &idx)| matrix.item_id(idx as usize).to_owned())
                    .unwrap_or_default();
                return Err(Error::ZeroProbabilityLabel {
                    context: format!("item {culprit:?}, rating slot {slot}"),
                });
            }
            Err(other) => return Err(other),
        }
    }

    if scored == 0 {
        return Err(Error::DegenerateLabels(
            "every reference slot was degenerate for this scorer".into(),
        ));
    }
    Ok(HScoreDetail {
        value: total / scored as f64,
        references: outcomes,
        coverage: coverage / slots.len() as f64,
    })
}

/// Scores a classifier against the plurality vote of every `r`-rater
/// reference panel and averages (at most 200 panels, sampled when there
/// are more).
///
/// With `r = 1` this is exactly [`hscore`]. Larger `r` grades against a
/// *pooled* reference, which rewards classifiers that track the
/// consensus rather than any single rater.
pub fn hscore_r(
    predictions: &PredictionSet,
    matrix: &RatingMatrix,
    scorer: Scorer,
    r: usize,
    source: &RandomSource,
) -> Result<f64> {
    scorer.check_kind(predictions.kind())?;
    predictions.check_dimensions(matrix.label_space())?;
    if r == 0 || r > matrix.max_raters() {
        return Err(Error::InvalidConfig(format!(
            "reference panel size {r} must be in 1..={}",
            matrix.max_raters()
        )));
    }
    let aligned = predictions.aligned(matrix)?;
    let per_item: Vec<Option<&Prediction>> = aligned.into_iter().map(Some).collect();

    let slots: Vec<usize> = (0..matrix.max_raters()).collect();
    let mut plan_rng = source.stream(&[task::REF_SUBSETS, 0, r as u64]);
    let panels = rater_subsets_capped(&slots, r, 200, &mut plan_rng);

    let n_labels = matrix.label_space().len();
    let mut total = 0.0;
    let mut scored = 0usize;
    let mut pairs: Vec<(&Prediction, Label)> = Vec::with_capacity(matrix.n_items());
    let mut panel_labels: Vec<Label> = Vec::with_capacity(r);

    for (panel_idx, panel) in panels.iter().enumerate() {
        pairs.clear();
        // Pair each prediction with the plurality label of the panel's
        // ratings; items missing any panel slot sit this panel out.
        for &idx in matrix.canonical_order() {
            let idx = idx as usize;
            let row = matrix.row(idx);
            if panel.iter().any(|&s| s >= row.len()) {
                continue;
            }
            let Some(prediction) = per_item[idx] else {
                continue;
            };
            panel_labels.clear();
            panel_labels.extend(panel.iter().map(|&s| row[s]));
            let counts = LabelCounts::tally(&panel_labels, n_labels);
            let mut rng = source.stream(&[
                task::REF_TIE,
                0,
                r as u64,
                panel_idx as u64,
                stable_id_hash(matrix.item_id(idx)),
            ]);
            let winner = crate::combiners::plurality_of_counts(&counts, &mut rng);
            pairs.push((prediction, winner));
        }
        if pairs.is_empty() {
            continue;
        }
        match scorer.score(&pairs, n_labels) {
            Ok(score) => {
                total += score;
                scored += 1;
            }
            Err(Error::DegenerateLabels(_)) => continue,
            Err(other) => return Err(other),
        }
    }
    if scored == 0 {
        return Err(Error::DegenerateLabels(
            "every reference panel was degenerate for this scorer".into(),
        ));
    }
    Ok(total / scored as f64)
}

/// Krippendorff's alpha (nominal agreement) of the matrix itself.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaResult {
    /// The reliability coefficient.
    pub value: f64,
    /// True when every rating in the matrix carried the same label, in
    /// which case alpha is undefined and reported as 1.0.
    pub degenerate: bool,
}

/// Computes Krippendorff's alpha with the nominal (identity) metric.
///
/// Handles ragged matrices: each item contributes its own
/// pairable-rating count. Returns the coefficient plus a flag marking
/// the degenerate all-one-label case.
pub fn krippendorff_alpha(matrix: &RatingMatrix) -> Result<AlphaResult> {
    let n_labels = matrix.label_space().len();
    let mut label_totals = vec![0.0f64; n_labels];
    let mut observed = 0.0; // sum of within-item disagreeing pair weights
    let mut n = 0.0f64;

    // Canonical order keeps the floating-point accumulation — and so
    // the exact result — independent of item insertion order.
    for &idx in matrix.canonical_order() {
        let idx = idx as usize;
        let row = matrix.row(idx);
        let m = row.len() as f64;
        let counts = matrix.row_counts(idx);
        let mut sum_sq = 0.0;
        for (label_idx, &c) in counts.counts().iter().enumerate() {
            let c = c as f64;
            label_totals[label_idx] += c;
            sum_sq += c * c;
        }
        observed += (m * m - sum_sq) / (m - 1.0);
        n += m;
    }

    let total_sq: f64 = label_totals.iter().map(|&c| c * c).sum();
    let expected = n * n - total_sq;
    if expected == 0.0 {
        // Every rating carried the same label: no expected disagreement,
        // alpha undefined.
        return Ok(AlphaResult {
            value: 1.0,
            degenerate: true,
        });
    }
    let value = 1.0 - (n - 1.0) * observed / expected;
    Ok(AlphaResult {
        value,
        degenerate: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::LabelSpace;
    use crate::prediction::PredictionSet;
    use crate::rng::RandomSource;
    use crate::synthetic::example_model;
    use approx::assert_relative_eq;

    fn soft(p: &[f64]) -> Prediction {
        Prediction::Soft(SoftPrediction::new(p.to_vec()).unwrap())
    }

    fn hard(l: usize) -> Prediction {
        Prediction::Hard(Label(l as u16))
    }

    fn matrix_from(rows: &[&[usize]]) -> RatingMatrix {
        let space = LabelSpace::new(["a", "b", "c"]).unwrap();
        RatingMatrix::from_labels(
            space,
            rows.iter().enumerate().map(|(i, row)| {
                (
                    format!("i{i}"),
                    row.iter().map(|&l| Label(l as u16)).collect::<Vec<_>>(),
                )
            }),
        )
        .unwrap()
    }

    fn binary_matrix(rows: &[&[usize]]) -> RatingMatrix {
        let space = LabelSpace::new(["a", "b"]).unwrap();
        RatingMatrix::from_labels(
            space,
            rows.iter().enumerate().map(|(i, row)| {
                (
                    format!("i{i}"),
                    row.iter().map(|&l| Label(l as u16)).collect::<Vec<_>>(),
                )
            }),
        )
        .unwrap()
    }

    #[test]
    fn agreement_is_the_match_fraction() {
        let pairs = [
            (Label(0), Label(0)),
            (Label(0), Label(1)),
            (Label(1), Label(1)),
            (Label(1), Label(1)),
        ];
        assert_relative_eq!(agreement_score(&pairs).unwrap(), 0.75);
        assert!(matches!(agreement_score(&[]), Err(Error::EmptyInput(_))));
    }

    #[test]
    fn f1_counts_true_positives_twice() {
        // tp = 1, fp = 1, fn = 1 -> 2/(2+1+1) = 0.5.
        let pairs = [
            (Label(0), Label(0)),
            (Label(0), Label(1)),
            (Label(1), Label(0)),
        ];
        assert_relative_eq!(f1_score(&pairs, Label(0)).unwrap(), 0.5);

        // Perfect predictions score 1 for either positive choice.
        let perfect = [(Label(0), Label(0)), (Label(1), Label(1))];
        assert_relative_eq!(f1_score(&perfect, Label(0)).unwrap(), 1.0);
        assert_relative_eq!(f1_score(&perfect, Label(1)).unwrap(), 1.0);

        // A positive label absent from both sides scores 0.
        let negatives = [(Label(1), Label(1)), (Label(1), Label(1))];
        assert_relative_eq!(f1_score(&negatives, Label(0)).unwrap(), 0.0);
    }

    #[test]
    fn auc_orders_positives_above_negatives() {
        let predictions = [
            soft(&[0.9, 0.1]),
            soft(&[0.8, 0.2]),
            soft(&[0.7, 0.3]),
            soft(&[0.6, 0.4]),
        ];
        let refs = [Label(0), Label(1), Label(0), Label(1)];
        let pairs: Vec<(&SoftPrediction, Label)> = predictions
            .iter()
            .zip(refs)
            .map(|(p, r)| (p.as_soft().unwrap(), r))
            .collect();
        // Positives at 0.9 and 0.7 vs negatives at 0.8 and 0.6: three of
        // four positive/negative orderings are correct.
        assert_relative_eq!(auc_score(&pairs, Label(0)).unwrap(), 0.75);
    }

    #[test]
    fn auc_gives_ties_half_credit() {
        let predictions = [soft(&[0.8, 0.2]), soft(&[0.8, 0.2])];
        let refs = [Label(0), Label(1)];
        let pairs: Vec<(&SoftPrediction, Label)> = predictions
            .iter()
            .zip(refs)
            .map(|(p, r)| (p.as_soft().unwrap(), r))
            .collect();
        assert_relative_eq!(auc_score(&pairs, Label(0)).unwrap(), 0.5);
    }

    #[test]
    fn auc_requires_both_classes() {
        let predictions = [soft(&[0.8, 0.2]), soft(&[0.6, 0.4])];
        let pairs: Vec<(&SoftPrediction, Label)> = predictions
            .iter()
            .map(|p| (p.as_soft().unwrap(), Label(0)))
            .collect();
        assert!(matches!(
            auc_score(&pairs, Label(0)),
            Err(Error::DegenerateLabels(_))
        ));
    }

    #[test]
    fn cross_entropy_averages_log_probabilities() {
        let predictions = [soft(&[0.8, 0.2]), soft(&[0.25, 0.75])];
        let refs = [Label(0), Label(1)];
        let pairs: Vec<(&SoftPrediction, Label)> = predictions
            .iter()
            .zip(refs)
            .map(|(p, r)| (p.as_soft().unwrap(), r))
            .collect();
        let expected = (0.8f64.log2() + 0.75f64.log2()) / 2.0;
        assert_relative_eq!(cross_entropy_score(&pairs).unwrap(), expected);
    }

    #[test]
    fn cross_entropy_rejects_zero_probability_references() {
        let predictions = [soft(&[1.0, 0.0])];
        let pairs: Vec<(&SoftPrediction, Label)> = predictions
            .iter()
            .map(|p| (p.as_soft().unwrap(), Label(1)))
            .collect();
        assert!(matches!(
            cross_entropy_score(&pairs),
            Err(Error::ZeroProbabilityLabel { .. })
        ));
    }

    #[test]
    fn log_scoring_is_strictly_proper() {
        // References are 70% label 0. Reporting exactly 0.7 must beat
        // every other candidate on the expected score.
        let truth = 0.7f64;
        let expected_score = |q: f64| truth * q.log2() + (1.0 - truth) * (1.0 - q).log2();
        let best = expected_score(truth);
        for q in [0.1, 0.3, 0.5, 0.69, 0.71, 0.9] {
            assert!(
                expected_score(q) < best - 1e-12,
                "reporting {q} should lose to reporting the truth"
            );
        }
        // And the empirical mean over pairs matches the expectation
        // when the reference frequencies are exactly 7-of-10.
        let prediction = soft(&[truth, 1.0 - truth]);
        let pairs: Vec<(&SoftPrediction, Label)> = (0..10)
            .map(|i| (prediction.as_soft().unwrap(), Label(u16::from(i >= 7))))
            .collect();
        assert_relative_eq!(
            cross_entropy_score(&pairs).unwrap(),
            best,
            max_relative = 1e-12
        );
    }

    #[test]
    fn dmi_is_the_absolute_joint_determinant() {
        // Perfectly diagonal joint: |det| = 0.5 * 0.5 = 0.25.
        let predictions = [hard(0), hard(0), hard(1), hard(1)];
        let refs = [Label(0), Label(0), Label(1), Label(1)];
        let pairs: Vec<(&Prediction, Label)> = predictions.iter().zip(refs).collect();
        assert_relative_eq!(dmi_score(&pairs, 2).unwrap(), 0.25);

        // Independent predictions: rank-one joint, determinant zero.
        let refs = [Label(0), Label(1), Label(0), Label(1)];
        let pairs: Vec<(&Prediction, Label)> = predictions.iter().zip(refs).collect();
        assert_relative_eq!(dmi_score(&pairs, 2).unwrap(), 0.0);
    }

    #[test]
    fn dmi_accepts_soft_predictions_and_label_swaps() {
        // A label-swapped classifier carries the same information.
        let predictions = [hard(1), hard(1), hard(0), hard(0)];
        let refs = [Label(0), Label(0), Label(1), Label(1)];
        let pairs: Vec<(&Prediction, Label)> = predictions.iter().zip(refs).collect();
        assert_relative_eq!(dmi_score(&pairs, 2).unwrap(), 0.25);

        // A soft uniform prediction spreads mass equally: no signal.
        let uniform = [soft(&[0.5, 0.5]), soft(&[0.5, 0.5])];
        let refs = [Label(0), Label(1)];
        let pairs: Vec<(&Prediction, Label)> = uniform.iter().zip(refs).collect();
        assert_relative_eq!(dmi_score(&pairs, 2).unwrap(), 0.0);
    }

    #[test]
    fn dmi_is_invariant_under_pair_order() {
        let predictions = [hard(0), hard(1), hard(0), hard(1), hard(0)];
        let refs = [Label(0), Label(1), Label(1), Label(1), Label(0)];
        let pairs: Vec<(&Prediction, Label)> = predictions.iter().zip(refs).collect();
        let forward = dmi_score(&pairs, 2).unwrap();
        let mut reversed = pairs.clone();
        reversed.reverse();
        assert_eq!(forward, dmi_score(&reversed, 2).unwrap());
    }

    #[test]
    fn determinant_matches_a_hand_expansion() {
        // det [[2,0,1],[1,3,2],[0,1,1]] = 2*(3-2) - 0 + 1*(1-0) = 3.
        let m = vec![
            vec![2.0, 0.0, 1.0],
            vec![1.0, 3.0, 2.0],
            vec![0.0, 1.0, 1.0],
        ];
        assert_relative_eq!(determinant(m), 3.0, max_relative = 1e-12);
    }

    #[test]
    fn scorer_kind_checks_reject_mismatches() {
        assert!(Scorer::Agreement.check_kind(PredictionKind::Soft).is_err());
        assert!(Scorer::CrossEntropy
            .check_kind(PredictionKind::Hard)
            .is_err());
        assert!(Scorer::Dmi.check_kind(PredictionKind::Hard).is_ok());
        assert!(Scorer::Dmi.check_kind(PredictionKind::Soft).is_ok());

        let predictions = [soft(&[0.5, 0.5])];
        let pairs: Vec<(&Prediction, Label)> = predictions.iter().map(|p| (p, Label(0))).collect();
        assert!(matches!(
            Scorer::Agreement.score(&pairs, 2),
            Err(Error::KindMismatch { .. })
        ));
    }

    #[test]
    fn hscore_averages_over_rating_slots() {
        // Slot 0 agrees twice (1.0); slot 1 agrees once (0.5).
        let matrix = binary_matrix(&[&[0, 0], &[0, 1]]);
        let predictions = PredictionSet::from_pairs(
            PredictionKind::Hard,
            [("i0".to_owned(), hard(0)), ("i1".to_owned(), hard(0))],
        )
        .unwrap();
        let value = hscore(&predictions, &matrix, Scorer::Agreement).unwrap();
        assert_relative_eq!(value, 0.75);
    }

    #[test]
    fn hscore_skips_missing_slots_and_reports_coverage() {
        let matrix = binary_matrix(&[&[0, 0, 1], &[0, 1]]);
        let predictions = PredictionSet::from_pairs(
            PredictionKind::Hard,
            [("i0".to_owned(), hard(0)), ("i1".to_owned(), hard(0))],
        )
        .unwrap();
        let detail = hscore_detailed(&predictions, &matrix, Scorer::Agreement).unwrap();
        // Slot 2 exists only for i0, where the prediction disagrees.
        assert_eq!(detail.references.len(), 3);
        assert_eq!(detail.references[2].n_pairs, 1);
        assert_relative_eq!(detail.references[2].score.unwrap(), 0.0);
        // Coverage: slots see 2/2, 2/2, 1/2 of items.
        assert_relative_eq!(detail.coverage, (1.0 + 1.0 + 0.5) / 3.0);
        assert_relative_eq!(detail.value, (1.0 + 0.5 + 0.0) / 3.0);
    }

    #[test]
    fn a_single_rater_panel_is_exactly_the_plain_hscore() {
        let data = example_model()
            .generate(30, 4, &RandomSource::new(41))
            .unwrap();
        let source = RandomSource::new(7);
        for (predictions, scorer) in [
            (&data.hard_predictions, Scorer::Agreement),
            (&data.soft_predictions, Scorer::CrossEntropy),
        ] {
            let plain = hscore(predictions, &data.matrix, scorer).unwrap();
            let panel = hscore_r(predictions, &data.matrix, scorer, 1, &source).unwrap();
            assert_eq!(
                plain,
                panel,
                "r=1 must agree bit-for-bit ({})",
                scorer.name()
            );
        }
    }

    #[test]
    fn larger_panels_reward_consensus_tracking() {
        // The soft classifier scored against 3-rater plurality
        // references should look at least as good as against single
        // raters: pooling denoises the reference.
        let data = example_model()
            .generate(400, 5, &RandomSource::new(13))
            .unwrap();
        let source = RandomSource::new(7);
        let r1 = hscore_r(
            &data.soft_predictions,
            &data.matrix,
            Scorer::CrossEntropy,
            1,
            &source,
        )
        .unwrap();
        let r3 = hscore_r(
            &data.soft_predictions,
            &data.matrix,
            Scorer::CrossEntropy,
            3,
            &source,
        )
        .unwrap();
        assert!(
            r3 > r1,
            "3-rater references should score higher: r1 = {r1}, r3 = {r3}"
        );
    }

    #[test]
    fn hscore_r_validates_the_panel_size() {
        let matrix = binary_matrix(&[&[0, 1], &[0, 0]]);
        let predictions = PredictionSet::from_pairs(
            PredictionKind::Hard,
            [("i0".to_owned(), hard(0)), ("i1".to_owned(), hard(0))],
        )
        .unwrap();
        let source = RandomSource::new(1);
        for r in [0, 3] {
            assert!(matches!(
                hscore_r(&predictions, &matrix, Scorer::Agreement, r, &source),
                Err(Error::InvalidConfig(_))
            ));
        }
    }

    // Alpha oracle values below were frozen from an independent
    // exact-fraction implementation of the coincidence-matrix recipe
    // (computed outside this codebase); the fractions are quoted so the
    // comparison stays honest at full precision.

    #[test]
    fn alpha_matches_the_coincidence_matrix_oracle_on_the_fixture() {
        let (matrix, _, _) = crate::synthetic::example_ratings();
        let alpha = krippendorff_alpha(&matrix).unwrap();
        assert!(!alpha.degenerate);
        // 89/210
        assert_relative_eq!(alpha.value, 89.0 / 210.0, max_relative = 1e-12);
    }

    #[test]
    fn alpha_matches_the_oracle_on_ragged_binary_data() {
        let matrix = binary_matrix(&[
            &[0, 0, 1],
            &[0, 0],
            &[1, 1, 1, 0],
            &[0, 1],
            &[1, 1],
            &[0, 0, 0, 0],
        ]);
        let alpha = krippendorff_alpha(&matrix).unwrap();
        // 11/35
        assert_relative_eq!(alpha.value, 11.0 / 35.0, max_relative = 1e-12);
    }

    #[test]
    fn alpha_matches_the_oracle_on_three_label_data() {
        let matrix = matrix_from(&[
            &[0, 0, 1, 2],
            &[1, 1, 1],
            &[2, 2, 0],
            &[0, 1],
            &[2, 2, 2, 2],
            &[0, 0, 2],
            &[1, 0],
        ]);
        let alpha = krippendorff_alpha(&matrix).unwrap();
        // 49/219
        assert_relative_eq!(alpha.value, 49.0 / 219.0, max_relative = 1e-12);
    }

    #[test]
    fn alpha_is_negative_for_systematic_disagreement() {
        let matrix = binary_matrix(&[&[0, 1], &[1, 0], &[0, 1], &[1, 0]]);
        let alpha = krippendorff_alpha(&matrix).unwrap();
        // -3/4
        assert_relative_eq!(alpha.value, -0.75, max_relative = 1e-12);
    }

    #[test]
    fn unanimous_matrices_are_degenerate_with_alpha_one() {
        let matrix = binary_matrix(&[&[0, 0, 0], &[0, 0]]);
        let alpha = krippendorff_alpha(&matrix).unwrap();
        assert!(alpha.degenerate);
        assert_relative_eq!(alpha.value, 1.0);
    }
}
