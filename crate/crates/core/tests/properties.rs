//! Property tests for the structural invariants: things that must hold
//! for *every* input, not just the worked examples.

use proptest::prelude::*;

use survey_equivalence::combiners::{
    frequency_of_counts, plurality_of_counts, sequence_probability_one_item,
};
use survey_equivalence::equivalence::survey_equivalence;
use survey_equivalence::model::{Label, LabelCounts, LabelSpace, RatingMatrix};
use survey_equivalence::prediction::{Prediction, SoftPrediction};
use survey_equivalence::scorers::{
    agreement_score, auc_score, f1_score, krippendorff_alpha, Scorer,
};
use survey_equivalence::{CurveMetadata, Equivalence, PowerCurve, RandomSource};

fn curve_from(means: Vec<f64>) -> PowerCurve {
    PowerCurve {
        k_values: (0..means.len()).collect(),
        means,
        ci_low: None,
        ci_high: None,
        classifier_score: None,
        metadata: CurveMetadata {
            combiner: "test".into(),
            scorer: "test".into(),
            seed: 0,
            subset_cap: 200,
            reference_raters: 1,
            bootstrap_samples: None,
            coverage: Vec::new(),
        },
    }
}

/// A nondecreasing score curve with 2..=8 points.
fn nondecreasing_curve() -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-5.0f64..5.0, 2..=8).prop_map(|mut v| {
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    })
}

/// A small random rating matrix: 2..=7 items, rows of 2..=5 ratings,
/// 2 or 3 labels.
fn small_matrix() -> impl Strategy<Value = RatingMatrix> {
    (2usize..=3).prop_flat_map(|n_labels| {
        proptest::collection::vec(proptest::collection::vec(0..n_labels as u16, 2..=5), 2..=7)
            .prop_map(move |rows| {
                let space = LabelSpace::new(["a", "b", "c"][..n_labels].iter().copied()).unwrap();
                RatingMatrix::from_labels(
                    space,
                    rows.into_iter()
                        .enumerate()
                        .map(|(i, row)| (format!("i{i}"), row.into_iter().map(Label).collect())),
                )
                .unwrap()
            })
    })
}

proptest! {
    // ---- survey equivalence over arbitrary nondecreasing curves ----

    #[test]
    fn equivalence_classifies_every_score_correctly(
        means in nondecreasing_curve(),
        h in -6.0f64..6.0,
    ) {
        let max_k = means.len() - 1;
        let curve = curve_from(means.clone());
        match survey_equivalence(h, &curve) {
            Equivalence::LessThanZero => prop_assert!(h <= means[0]),
            Equivalence::MoreThanMax => prop_assert!(h > means[max_k]),
            Equivalence::Raters(v) => {
                prop_assert!((0.0..=max_k as f64).contains(&v));
                // The score sits inside the segment the value names.
                let lo = v.floor() as usize;
                let hi = v.ceil() as usize;
                prop_assert!(means[lo] <= h + 1e-9);
                prop_assert!(h <= means[hi] + 1e-9);
            }
        }
    }

    #[test]
    fn equivalence_is_monotone_in_the_score(
        means in nondecreasing_curve(),
        h1 in -6.0f64..6.0,
        h2 in -6.0f64..6.0,
    ) {
        let (h1, h2) = if h1 <= h2 { (h1, h2) } else { (h2, h1) };
        let curve = curve_from(means);
        // Order sentinels below/above all numeric values.
        let rank = |e: Equivalence| match e {
            Equivalence::LessThanZero => -1.0,
            Equivalence::Raters(v) => v,
            Equivalence::MoreThanMax => f64::INFINITY,
        };
        let v1 = rank(survey_equivalence(h1, &curve));
        let v2 = rank(survey_equivalence(h2, &curve));
        prop_assert!(v1 <= v2, "h1={h1} -> {v1}, h2={h2} -> {v2}");
    }

    #[test]
    fn curve_knots_map_to_whole_rater_counts(
        means in nondecreasing_curve().prop_filter(
            "strictly increasing",
            |v| v.windows(2).all(|w| w[1] > w[0] + 1e-6),
        ),
        k in 1usize..8,
    ) {
        prop_assume!(k < means.len());
        let curve = curve_from(means.clone());
        let value = survey_equivalence(means[k], &curve);
        prop_assert_eq!(value, Equivalence::Raters(k as f64));
    }

    // ---- pooling rules ----

    #[test]
    fn plurality_winners_have_maximal_count(
        counts in proptest::collection::vec(0u16..6, 2..=4),
        seed in 0u64..1000,
    ) {
        prop_assume!(counts.iter().any(|&c| c > 0));
        let mut tally = LabelCounts::zeros(counts.len());
        for (l, &c) in counts.iter().enumerate() {
            for _ in 0..c {
                tally.add(Label(l as u16));
            }
        }
        let mut rng = RandomSource::new(seed).stream(&[99]);
        let winner = plurality_of_counts(&tally, &mut rng);
        let max = counts.iter().max().copied().unwrap();
        prop_assert_eq!(counts[winner.index()], max);
    }

    #[test]
    fn frequency_predictions_are_positive_distributions(
        counts in proptest::collection::vec(0u16..8, 2..=4),
    ) {
        let mut tally = LabelCounts::zeros(counts.len());
        for (l, &c) in counts.iter().enumerate() {
            for _ in 0..c {
                tally.add(Label(l as u16));
            }
        }
        let soft = frequency_of_counts(&tally);
        let sum: f64 = soft.probs().iter().sum();
        prop_assert!((sum - 1.0).abs() < 1e-9);
        prop_assert!(soft.probs().iter().all(|&p| p > 0.0), "{:?}", soft.probs());
        // More observations of a label never mean less probability.
        for (a, &ca) in counts.iter().enumerate() {
            for (b, &cb) in counts.iter().enumerate() {
                if ca > cb {
                    prop_assert!(
                        soft.probs()[a] >= soft.probs()[b],
                        "counts {:?} -> {:?}",
                        counts,
                        soft.probs()
                    );
                }
            }
        }
    }

    // ---- sequence probabilities ----

    #[test]
    fn sequence_probabilities_shrink_as_sequences_extend(
        row in proptest::collection::vec(0u16..3, 2..=6),
        take in 0usize..=6,
        extra in 0u16..3,
    ) {
        let n_labels = 3;
        let take = take.min(row.len());
        let item = LabelCounts::tally(
            &row.iter().map(|&l| Label(l)).collect::<Vec<_>>(),
            n_labels,
        );
        let seq = LabelCounts::tally(
            &row[..take].iter().map(|&l| Label(l)).collect::<Vec<_>>(),
            n_labels,
        );
        let p = sequence_probability_one_item(&seq, &item);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&p));
        // A prefix of the item's own ratings is always drawable.
        prop_assert!(p > 0.0);
        let extended = seq.with(Label(extra));
        let p_ext = sequence_probability_one_item(&extended, &item);
        prop_assert!(p_ext <= p + 1e-15, "extending cannot raise probability");
    }

    // ---- scorer bounds and symmetries ----

    #[test]
    fn hard_scores_stay_in_range(
        pairs in proptest::collection::vec((0u16..3, 0u16..3), 1..=30),
    ) {
        let pairs: Vec<(Label, Label)> =
            pairs.into_iter().map(|(p, r)| (Label(p), Label(r))).collect();
        let a = agreement_score(&pairs).unwrap();
        prop_assert!((0.0..=1.0).contains(&a));
        let f = f1_score(&pairs, Label(0)).unwrap();
        prop_assert!((0.0..=1.0).contains(&f));
    }

    #[test]
    fn auc_is_invariant_under_swapping_the_positive_class(
        data in proptest::collection::vec((0.0f64..=1.0, proptest::bool::ANY), 2..=30),
    ) {
        prop_assume!(data.iter().any(|&(_, pos)| pos));
        prop_assume!(data.iter().any(|&(_, pos)| !pos));
        let predictions: Vec<SoftPrediction> = data
            .iter()
            .map(|&(p, _)| SoftPrediction::new(vec![p, 1.0 - p]).unwrap())
            .collect();
        let pairs: Vec<(&SoftPrediction, Label)> = predictions
            .iter()
            .zip(&data)
            .map(|(soft, &(_, pos))| (soft, Label(u16::from(!pos))))
            .collect();
        // Ranking swaps with the class, so the two orientations agree:
        // a random positive outranks a random negative by p(pos)
        // exactly when the negative outranks it by p(neg).
        let forward = auc_score(&pairs, Label(0)).unwrap();
        let reverse = auc_score(&pairs, Label(1)).unwrap();
        prop_assert!((forward - reverse).abs() < 1e-9);
    }

    #[test]
    fn dmi_is_nonnegative_and_bounded(
        pairs in proptest::collection::vec((0u16..3, 0u16..3), 1..=30),
    ) {
        let predictions: Vec<Prediction> = pairs
            .iter()
            .map(|&(p, _)| Prediction::Hard(Label(p)))
            .collect();
        let scored: Vec<(&Prediction, Label)> = predictions
            .iter()
            .zip(&pairs)
            .map(|(p, &(_, r))| (p, Label(r)))
            .collect();
        let value = Scorer::Dmi.score(&scored, 3).unwrap();
        // Any joint frequency matrix has |det| <= 1.
        prop_assert!((0.0..=1.0).contains(&value));
    }

    // ---- matrix-level invariants ----

    #[test]
    fn alpha_is_invariant_under_label_renaming(matrix in small_matrix()) {
        let alpha = krippendorff_alpha(&matrix).unwrap();
        prop_assert!(alpha.value <= 1.0 + 1e-12);

        // Swap the first two labels everywhere: a pure renaming.
        let space = matrix.label_space().clone();
        let swapped = RatingMatrix::from_labels(
            space,
            matrix.iter().map(|(id, row)| {
                (
                    id.to_owned(),
                    row.iter()
                        .map(|&l| match l.index() {
                            0 => Label(1),
                            1 => Label(0),
                            other => Label(other as u16),
                        })
                        .collect::<Vec<_>>(),
                )
            }),
        )
        .unwrap();
        let renamed = krippendorff_alpha(&swapped).unwrap();
        prop_assert!(
            (alpha.value - renamed.value).abs() < 1e-12,
            "{} vs {}",
            alpha.value,
            renamed.value
        );
    }

    #[test]
    fn alpha_is_invariant_under_item_order(matrix in small_matrix()) {
        let space = matrix.label_space().clone();
        let mut rows: Vec<(String, Vec<Label>)> = matrix
            .iter()
            .map(|(id, row)| (id.to_owned(), row.to_vec()))
            .collect();
        rows.reverse();
        let reversed = RatingMatrix::from_labels(space, rows).unwrap();
        let a = krippendorff_alpha(&matrix).unwrap();
        let b = krippendorff_alpha(&reversed).unwrap();
        prop_assert_eq!(a.value.to_bits(), b.value.to_bits());
    }
}
