//! Reading a classifier score off a power curve: survey equivalence.
//!
//! The equivalence of a classifier is the (fractional) number of raters
//! whose pooled judgment scores the same as the classifier does, found
//! by locating the classifier's score on the survey power curve. Scores
//! at or below the zero-rater baseline and scores above the whole curve
//! are reported as sentinels rather than numbers.
//!
//! [`analyze`] is the one-call entry point: it computes the curve,
//! scores the classifier the same way curve predictions are scored,
//! reads off the equivalence, and (optionally) repeats everything over
//! item bootstrap resamples for uncertainty bands.
//! [`cross_group_equivalence`] swaps the classifier for pooled surveys
//! of a second rater group, answering questions like "how many experts
//! are ten amateurs worth?".

use crate::combiners::Combiner;
use crate::curve::{Equivalence, EquivalenceResult, PowerCurve};
use crate::error::{Error, Result};
use crate::model::RatingMatrix;
use crate::power_curve::{
    bootstrap_power_curves, rater_subsets, survey_power_curve, BootstrapOptions, CurveOptions,
    ReferenceMode,
};
use crate::prediction::{Prediction, PredictionSet};
use crate::rng::{stable_id_hash, task, RandomSource};
use crate::scorers::{hscore, hscore_r, score_against_slots, Scorer};
use crate::stats;

/// Locates `h_score` on the curve: the leftmost fractional survey size
/// whose interpolated curve value equals `h_score`.
///
/// Scores at or below the baseline `c_0` return
/// [`Equivalence::LessThanZero`]; scores above every curve value return
/// [`Equivalence::MoreThanMax`]. A score hitting a curve knot exactly
/// returns that integer survey size exactly.
pub fn survey_equivalence(h_score: f64, curve: &PowerCurve) -> Equivalence {
    equivalence_from_means(h_score, &curve.means)
}

/// [`survey_equivalence`] on bare curve values (used per bootstrap
/// sample, whose curves are plain vectors).
pub(crate) fn equivalence_from_means(h_score: f64, means: &[f64]) -> Equivalence {
    let Some(&baseline) = means.first() else {
        return Equivalence::MoreThanMax;
    };
    if h_score <= baseline {
        return Equivalence::LessThanZero;
    }
    for k in 1..means.len() {
        if means[k] >= h_score {
            // First k at or above the score; the previous value is
            // strictly below it, so the interpolation is well-defined
            // and lands exactly on k when h_score == means[k].
            let prev = means[k - 1];
            let v = (k - 1) as f64 + (h_score - prev) / (means[k] - prev);
            return Equivalence::Raters(v);
        }
    }
    Equivalence::MoreThanMax
}

/// Knobs for [`analyze`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AnalysisOptions {
    /// Curve construction: subset cap and reference mode.
    pub curve: CurveOptions,
    /// Item bootstrap samples behind uncertainty bands; 0 skips
    /// bootstrapping and reports point estimates only.
    pub bootstrap_samples: usize,
}

/// Everything [`analyze`] computes.
#[derive(Debug, Clone)]
pub struct Analysis {
    /// The power curve; carries percentile bands when bootstrapped and
    /// the classifier's score when a classifier was supplied.
    pub curve: PowerCurve,
    /// 95% band over per-sample classifier scores (bootstrap runs with a
    /// classifier only).
    pub classifier_ci: Option<(f64, f64)>,
    /// The classifier's survey equivalence (absent without a
    /// classifier).
    pub equivalence: Option<EquivalenceResult>,
}

/// Computes the power curve of `matrix` and, when `classifier`
/// predictions are given, their survey equivalence.
///
/// The classifier is scored exactly the way curve predictions are
/// scored (against single held-out raters, or against plurality panels
/// when the options say so), which is what makes the two sides
/// comparable. With `bootstrap_samples > 0`, the whole computation is
/// repeated on item-resampled matrices: curve bands, a classifier score
/// band, and a distribution of equivalence values.
pub fn analyze(
    matrix: &RatingMatrix,
    classifier: Option<&PredictionSet>,
    combiner: Combiner,
    scorer: Scorer,
    options: &AnalysisOptions,
    source: &RandomSource,
) -> Result<Analysis> {
    if let Some(predictions) = classifier {
        scorer.check_kind(predictions.kind())?;
    }
    let classifier_score = classifier
        .map(|predictions| {
            score_classifier(predictions, matrix, scorer, options.curve.reference, source)
        })
        .transpose()?;

    if options.bootstrap_samples == 0 {
        let mut curve = survey_power_curve(matrix, combiner, scorer, &options.curve, source)?;
        curve.classifier_score = classifier_score;
        let equivalence = classifier_score
            .map(|h| EquivalenceResult::point(survey_equivalence(h, &curve), curve.max_k()));
        return Ok(Analysis {
            curve,
            classifier_ci: None,
            equivalence,
        });
    }

    let set = bootstrap_power_curves(
        matrix,
        combiner,
        scorer,
        &options.curve,
        &BootstrapOptions {
            n_samples: options.bootstrap_samples,
            resample_items: true,
        },
        source,
    )?;
    let mut curve = set.point;
    curve.classifier_score = classifier_score;

    let mut classifier_ci = None;
    let mut equivalence = None;
    if let (Some(predictions), Some(h)) = (classifier, classifier_score) {
        let mut sample_scores = Vec::with_capacity(set.samples.len());
        let mut sample_values = Vec::with_capacity(set.samples.len());
        for sample in &set.samples {
            let view = matrix.select_items(&sample.indices);
            let h_sample =
                score_classifier(predictions, &view, scorer, options.curve.reference, source)?;
            sample_scores.push(h_sample);
            sample_values.push(equivalence_from_means(h_sample, &sample.means));
        }
        classifier_ci = stats::central_band(&mut sample_scores);
        equivalence = Some(EquivalenceResult::with_bootstrap(
            survey_equivalence(h, &curve),
            sample_values,
            curve.max_k(),
        ));
    }
    Ok(Analysis {
        curve,
        classifier_ci,
        equivalence,
    })
}

fn score_classifier(
    predictions: &PredictionSet,
    matrix: &RatingMatrix,
    scorer: Scorer,
    reference: ReferenceMode,
    source: &RandomSource,
) -> Result<f64> {
    match reference {
        ReferenceMode::SingleRater => hscore(predictions, matrix, scorer),
        ReferenceMode::PluralityOf(r) => hscore_r(predictions, matrix, scorer, r, source),
    }
}

/// What [`cross_group_equivalence`] computes.
#[derive(Debug, Clone)]
pub struct CrossGroupAnalysis {
    /// Survey equivalence of the pooled first group on the second
    /// group's curve.
    pub equivalence: EquivalenceResult,
    /// The second (reference) group's own power curve, with the pooled
    /// first-group score attached as the classifier score.
    pub curve: PowerCurve,
    /// Mean score of pooled first-group predictions against the second
    /// group's ratings.
    pub pooled_score: f64,
}

/// How many of group B's raters are `k_a` of group A's raters worth?
///
/// Surveys of `k_a` raters are drawn from `group_a`, pooled per item by
/// the combiner, and scored against `group_b`'s ratings; that score is
/// then located on `group_b`'s own power curve. Both matrices must cover
/// the same item ids. When the two groups are the same matrix, a pooled
/// survey's predictions are scored only against the rating slots it did
/// not use — so a survey measured against its own group comes out worth
/// its own size.
pub fn cross_group_equivalence(
    group_a: &RatingMatrix,
    group_b: &RatingMatrix,
    combiner: Combiner,
    scorer: Scorer,
    k_a: usize,
    options: &CurveOptions,
    source: &RandomSource,
) -> Result<CrossGroupAnalysis> {
    scorer.check_kind(combiner.output_kind())?;
    if group_a.label_space().names() != group_b.label_space().names() {
        return Err(Error::PredictionMismatch(
            "the two groups use different label spaces".into(),
        ));
    }
    if group_a.n_items() != group_b.n_items() {
        return Err(Error::PredictionMismatch(format!(
            "group item counts differ: {} vs {}",
            group_a.n_items(),
            group_b.n_items()
        )));
    }
    // a-index -> b-index, by item id.
    let mut a_to_b = Vec::with_capacity(group_a.n_items());
    for idx_a in 0..group_a.n_items() {
        let id = group_a.item_id(idx_a);
        let idx_b = group_b.item_index(id).ok_or_else(|| {
            Error::PredictionMismatch(format!("item {id:?} is missing from the reference group"))
        })?;
        a_to_b.push(idx_b);
    }
    let identity = same_ratings(group_a, group_b, &a_to_b);
    if k_a == 0 || k_a > group_a.max_raters() - usize::from(identity) {
        return Err(Error::InvalidConfig(format!(
            "survey size {k_a} does not fit the first group's {} rating slots{}",
            group_a.max_raters(),
            if identity {
                " (one must stay held out when the groups coincide)"
            } else {
                ""
            }
        )));
    }

    let prepared = combiner.prepare(group_a)?;
    let mut plan_rng = source.stream(&[task::CROSS, k_a as u64]);
    let plan = rater_subsets(group_a.max_raters(), k_a, options.subset_cap, &mut plan_rng);

    let mut total = 0.0;
    let mut scored = 0usize;
    for (subset_idx, subset) in plan.subsets().iter().enumerate() {
        let mut refs_b: Vec<Option<Prediction>> = vec![None; group_b.n_items()];
        for idx_a in 0..group_a.n_items() {
            let row = group_a.row(idx_a);
            if subset.iter().any(|&s| s >= row.len()) {
                continue;
            }
            let mut counts = crate::model::LabelCounts::zeros(group_a.label_space().len());
            for &s in subset {
                counts.add(row[s]);
            }
            let prediction = prepared.combine_counts_lazy(&counts, idx_a, || {
                source.stream(&[
                    task::CROSS,
                    k_a as u64,
                    subset_idx as u64,
                    stable_id_hash(group_a.item_id(idx_a)),
                ])
            })?;
            refs_b[a_to_b[idx_a]] = Some(prediction);
        }
        let refs: Vec<Option<&Prediction>> = refs_b.iter().map(Option::as_ref).collect();
        let restriction: Option<Vec<usize>> = identity.then(|| {
            (0..group_b.max_raters())
                .filter(|s| !subset.contains(s))
                .collect()
        });
        match score_against_slots(&refs, group_b, scorer, restriction.as_deref()) {
            Ok(detail) => {
                total += detail.value;
                scored += 1;
            }
            Err(Error::DegenerateLabels(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    if scored == 0 {
        return Err(Error::DegenerateLabels(format!(
            "every size-{k_a} survey of the first group was degenerate for the {} scorer",
            scorer.name()
        )));
    }
    let pooled_score = total / scored as f64;

    let mut curve = survey_power_curve(group_b, combiner, scorer, options, source)?;
    curve.classifier_score = Some(pooled_score);
    let equivalence =
        EquivalenceResult::point(survey_equivalence(pooled_score, &curve), curve.max_k());
    Ok(CrossGroupAnalysis {
        equivalence,
        curve,
        pooled_score,
    })
}

fn same_ratings(a: &RatingMatrix, b: &RatingMatrix, a_to_b: &[usize]) -> bool {
    (0..a.n_items()).all(|idx_a| a.row(idx_a) == b.row(a_to_b[idx_a]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Label, LabelSpace};
    use approx::assert_relative_eq;

    fn curve_of(means: &[f64]) -> PowerCurve {
        PowerCurve {
            k_values: (0..means.len()).collect(),
            means: means.to_vec(),
            ci_low: None,
            ci_high: None,
            classifier_score: None,
            metadata: crate::curve::CurveMetadata {
                combiner: "test".into(),
                scorer: "test".into(),
                seed: 0,
                subset_cap: 200,
                reference_raters: 1,
                bootstrap_samples: None,
                coverage: vec![1.0; means.len()],
            },
        }
    }

    #[test]
    fn midpoint_interpolation() {
        let curve = curve_of(&[0.5, 0.6, 0.8]);
        let value = survey_equivalence(0.7, &curve);
        // 0.7 sits halfway between c_1 = 0.6 and c_2 = 0.8.
        assert_relative_eq!(value.raters().unwrap(), 1.5, epsilon = 1e-12);
    }

    #[test]
    fn scores_at_or_below_baseline_are_sentinels() {
        let curve = curve_of(&[0.5, 0.6, 0.8]);
        assert_eq!(survey_equivalence(0.4, &curve), Equivalence::LessThanZero);
        assert_eq!(survey_equivalence(0.5, &curve), Equivalence::LessThanZero);
    }

    #[test]
    fn scores_above_the_curve_are_sentinels() {
        let curve = curve_of(&[0.5, 0.6, 0.8]);
        assert_eq!(survey_equivalence(0.81, &curve), Equivalence::MoreThanMax);
    }

    #[test]
    fn knots_are_hit_exactly() {
        let curve = curve_of(&[0.5, 0.6, 0.8, 0.85]);
        assert_eq!(survey_equivalence(0.6, &curve), Equivalence::Raters(1.0));
        assert_eq!(survey_equivalence(0.8, &curve), Equivalence::Raters(2.0));
        assert_eq!(survey_equivalence(0.85, &curve), Equivalence::Raters(3.0));
    }

    #[test]
    fn flat_segments_resolve_to_the_leftmost_crossing() {
        let curve = curve_of(&[0.5, 0.7, 0.7, 0.9]);
        assert_eq!(survey_equivalence(0.7, &curve), Equivalence::Raters(1.0));
        assert_relative_eq!(
            survey_equivalence(0.8, &curve).raters().unwrap(),
            2.5,
            max_relative = 1e-12
        );
    }

    fn toy_matrix() -> RatingMatrix {
        let space = LabelSpace::new(["a", "b"]).unwrap();
        let rows: Vec<(String, Vec<Label>)> = (0..8)
            .map(|i| {
                let row: Vec<Label> = (0..4)
                    .map(|j| Label(u16::from((i * 5 + j * 3) % 7 < 3)))
                    .collect();
                (format!("t{i}"), row)
            })
            .collect();
        RatingMatrix::from_labels(space, rows).unwrap()
    }

    fn plurality_votes(matrix: &RatingMatrix) -> PredictionSet {
        // A deterministic "classifier": each item's own most frequent
        // label (ties resolved toward label 0 by order).
        let mut set = PredictionSet::new(crate::prediction::PredictionKind::Hard);
        for (id, row) in matrix.iter() {
            let counts = crate::model::LabelCounts::tally(row, 2);
            let winner = if counts.counts()[0] >= counts.counts()[1] {
                Label(0)
            } else {
                Label(1)
            };
            set.insert(id.to_owned(), Prediction::Hard(winner)).unwrap();
        }
        set
    }

    #[test]
    fn analyze_without_classifier_yields_curve_only() {
        let matrix = toy_matrix();
        let analysis = analyze(
            &matrix,
            None,
            Combiner::MajorityVote,
            Scorer::Agreement,
            &AnalysisOptions::default(),
            &RandomSource::new(3),
        )
        .unwrap();
        assert!(analysis.equivalence.is_none());
        assert!(analysis.classifier_ci.is_none());
        assert!(analysis.curve.classifier_score.is_none());
        assert_eq!(analysis.curve.k_values, vec![0, 1, 2, 3]);
    }

    #[test]
    fn analyze_point_run_is_deterministic() {
        let matrix = toy_matrix();
        let classifier = plurality_votes(&matrix);
        let run = || {
            analyze(
                &matrix,
                Some(&classifier),
                Combiner::MajorityVote,
                Scorer::Agreement,
                &AnalysisOptions::default(),
                &RandomSource::new(9),
            )
            .unwrap()
        };
        let a = run();
        let b = run();
        assert_eq!(a.curve.means, b.curve.means);
        assert_eq!(a.curve.classifier_score, b.curve.classifier_score);
        assert_eq!(
            a.equivalence.as_ref().unwrap().value,
            b.equivalence.as_ref().unwrap().value
        );
    }

    #[test]
    fn analyze_bootstrap_attaches_bands_and_distribution() {
        let matrix = toy_matrix();
        let classifier = plurality_votes(&matrix);
        let options = AnalysisOptions {
            bootstrap_samples: 16,
            ..AnalysisOptions::default()
        };
        let analysis = analyze(
            &matrix,
            Some(&classifier),
            Combiner::MajorityVote,
            Scorer::Agreement,
            &options,
            &RandomSource::new(9),
        )
        .unwrap();
        assert!(analysis.curve.ci_low.is_some());
        assert!(analysis.classifier_ci.is_some());
        let equivalence = analysis.equivalence.unwrap();
        let values = equivalence.bootstrap_values.as_ref().unwrap();
        assert_eq!(values.len(), 16);
        let numeric = values.iter().filter(|v| !v.is_sentinel()).count();
        assert_eq!(
            numeric + equivalence.n_less_than_zero + equivalence.n_more_than_max,
            16
        );
    }

    #[test]
    fn a_survey_scored_against_its_own_group_is_worth_its_size() {
        // With exhaustive subset plans, the pooled score of k raters
        // against held-out slots is computed by the same arithmetic as
        // the curve value c_k, so the equivalence lands exactly on k.
        // Needs data whose curve actually rises: high-agreement rows,
        // since near-random rows make the uniform baseline unbeatable.
        let space = LabelSpace::new(["a", "b"]).unwrap();
        let rows = [
            [0, 0, 0, 0],
            [0, 0, 0, 0],
            [0, 0, 0, 1],
            [0, 0, 0, 0],
            [1, 1, 1, 1],
            [1, 1, 0, 1],
            [1, 1, 1, 1],
            [0, 0, 0, 0],
        ];
        let matrix = RatingMatrix::from_labels(
            space,
            rows.iter().enumerate().map(|(i, row)| {
                (
                    format!("t{i}"),
                    row.iter().map(|&l| Label(l)).collect::<Vec<_>>(),
                )
            }),
        )
        .unwrap();
        for k in 1..=2usize {
            let analysis = cross_group_equivalence(
                &matrix,
                &matrix,
                Combiner::Frequency,
                Scorer::CrossEntropy,
                k,
                &CurveOptions::default(),
                &RandomSource::new(5),
            )
            .unwrap();
            assert_eq!(
                analysis.pooled_score, analysis.curve.means[k],
                "pooled score should be computed by the curve's own arithmetic"
            );
            let value = analysis.equivalence.value.raters().unwrap();
            assert_relative_eq!(value, k as f64, epsilon = 1e-9);
        }
    }

    #[test]
    fn cross_group_item_mismatch_is_rejected() {
        let space = LabelSpace::new(["a", "b"]).unwrap();
        let a = RatingMatrix::from_labels(
            space.clone(),
            vec![("x".to_owned(), vec![Label(0), Label(1)])],
        )
        .unwrap();
        let b = RatingMatrix::from_labels(space, vec![("y".to_owned(), vec![Label(0), Label(1)])])
            .unwrap();
        let err = cross_group_equivalence(
            &a,
            &b,
            Combiner::MajorityVote,
            Scorer::Agreement,
            1,
            &CurveOptions::default(),
            &RandomSource::new(1),
        )
        .unwrap_err();
        assert!(matches!(err, Error::PredictionMismatch(_)));
    }
}
