//! Discrete calibration: replace each classifier output value with the
//! empirical label distribution among the items that received it.
//!
//! Classifiers that take finitely many distinct output values — any
//! hard classifier, or a soft one built from a lookup table — can be
//! calibrated without binning: bucket items by exact output value, pool
//! every human rating inside each bucket, and report each bucket's
//! label frequencies as the new soft output. The positive-label
//! component of the result is then, by construction, the empirical
//! frequency of the positive label among items the classifier treated
//! identically.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::model::{Label, RatingMatrix};
use crate::prediction::{Prediction, PredictionKind, PredictionSet, SoftPrediction};

/// The bucket a prediction falls in: hard outputs bucket by label, soft
/// outputs by the exact bit pattern of their positive-label component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Bucket {
    Hard(Label),
    Soft(u64),
}

fn bucket_of(prediction: &Prediction, positive: Label) -> Bucket {
    match prediction {
        Prediction::Hard(label) => Bucket::Hard(*label),
        Prediction::Soft(soft) => Bucket::Soft(soft.prob(positive).to_bits()),
    }
}

fn describe_bucket(bucket: Bucket, matrix: &RatingMatrix) -> String {
    match bucket {
        Bucket::Hard(label) => format!("{:?}", matrix.label_space().name(label)),
        Bucket::Soft(bits) => format!("{}", f64::from_bits(bits)),
    }
}

/// Calibrates a discrete-valued classifier against observed ratings.
///
/// Every item in `matrix` must have a prediction; predictions for items
/// the matrix lacks are calibrated too, provided their output value was
/// seen on at least one rated item (otherwise [`Error::EmptyBucket`]).
/// For soft inputs, `positive` selects the component that identifies an
/// output value; hard inputs bucket by their label and ignore it.
///
/// Returns a soft prediction set over the matrix's label space: each
/// prediction becomes the frequency of each label among all ratings of
/// all items in its bucket.
pub fn calibrate_discrete(
    predictions: &PredictionSet,
    matrix: &RatingMatrix,
    positive: Label,
) -> Result<PredictionSet> {
    if positive.index() >= matrix.label_space().len() {
        return Err(Error::UnknownLabel(format!(
            "positive label index {} out of range for {} labels",
            positive.index(),
            matrix.label_space().len()
        )));
    }
    predictions.check_dimensions(matrix.label_space())?;
    let aligned = predictions.aligned(matrix)?;

    let n_labels = matrix.label_space().len();
    let mut tallies: HashMap<Bucket, Vec<u64>> = HashMap::new();
    for (idx, prediction) in aligned.iter().enumerate() {
        let tally = tallies
            .entry(bucket_of(prediction, positive))
            .or_insert_with(|| vec![0; n_labels]);
        for &label in matrix.row(idx) {
            tally[label.index()] += 1;
        }
    }

    let mut out = PredictionSet::new(PredictionKind::Soft);
    for (id, prediction) in predictions.iter() {
        let bucket = bucket_of(prediction, positive);
        let tally = tallies
            .get(&bucket)
            .ok_or_else(|| Error::EmptyBucket(describe_bucket(bucket, matrix)))?;
        let total: u64 = tally.iter().sum();
        let probs: Vec<f64> = tally.iter().map(|&c| c as f64 / total as f64).collect();
        out.insert(id.to_owned(), Prediction::Soft(SoftPrediction::new(probs)?))?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::LabelSpace;
    use crate::synthetic::example_ratings;
    use approx::assert_relative_eq;

    fn matrix_from(rows: &[(&str, &[usize])]) -> RatingMatrix {
        let space = LabelSpace::new(["pos", "neg"]).unwrap();
        RatingMatrix::from_labels(
            space,
            rows.iter().map(|(id, labels)| {
                (
                    (*id).to_owned(),
                    labels.iter().map(|&l| Label(l as u16)).collect::<Vec<_>>(),
                )
            }),
        )
        .unwrap()
    }

    fn hard_set(pairs: &[(&str, usize)]) -> PredictionSet {
        PredictionSet::from_pairs(
            PredictionKind::Hard,
            pairs
                .iter()
                .map(|&(id, l)| (id.to_owned(), Prediction::Hard(Label(l as u16)))),
        )
        .unwrap()
    }

    #[test]
    fn a_constant_classifier_becomes_the_base_rate() {
        let matrix = matrix_from(&[("i1", &[0, 0]), ("i2", &[0, 1]), ("i3", &[1, 1])]);
        let predictions = hard_set(&[("i1", 0), ("i2", 0), ("i3", 0)]);
        let calibrated = calibrate_discrete(&predictions, &matrix, Label(0)).unwrap();
        assert_eq!(calibrated.kind(), PredictionKind::Soft);
        for (id, prediction) in calibrated.iter() {
            let soft = prediction.as_soft().unwrap();
            assert_relative_eq!(
                soft.prob(Label(0)),
                0.5,
                max_relative = 1e-12,
                epsilon = 0.0
            );
            assert_relative_eq!(
                soft.prob(Label(1)),
                0.5,
                max_relative = 1e-12,
                epsilon = 0.0
            );
            let _ = id;
        }
    }

    #[test]
    fn buckets_map_to_their_pooled_label_frequency() {
        // Bucket "pos" covers i1 (pos,pos,neg) and i2 (pos,neg):
        // 3 of 5 ratings are pos. Bucket "neg" covers the rest, all neg.
        let matrix = matrix_from(&[
            ("i1", &[0, 0, 1]),
            ("i2", &[0, 1]),
            ("i3", &[1, 1]),
            ("i4", &[1, 1]),
            ("i5", &[1, 1]),
        ]);
        let predictions = hard_set(&[("i1", 0), ("i2", 0), ("i3", 1), ("i4", 1), ("i5", 1)]);
        let calibrated = calibrate_discrete(&predictions, &matrix, Label(0)).unwrap();
        let a = calibrated.get("i1").unwrap().as_soft().unwrap();
        assert_relative_eq!(a.prob(Label(0)), 0.6, max_relative = 1e-12);
        assert_relative_eq!(a.prob(Label(1)), 0.4, max_relative = 1e-12);
        // Items in one bucket all get the same output.
        assert_eq!(calibrated.get("i2"), calibrated.get("i1"));
        let b = calibrated.get("i3").unwrap().as_soft().unwrap();
        assert_relative_eq!(b.prob(Label(0)), 0.0, epsilon = 0.0);
    }

    #[test]
    fn soft_classifiers_bucket_by_exact_output_value() {
        // The example fixture's soft classifier takes two values, 0.77
        // and 0.32 for C. Pooling ratings by hand: the 0.77 bucket
        // (items ex-1..ex-7) holds 61 C of 70 ratings; the 0.32 bucket
        // (ex-0, ex-8, ex-9) holds 9 C of 30.
        let (matrix, _, soft) = example_ratings();
        let positive = matrix.label_space().require("C").unwrap();
        let calibrated = calibrate_discrete(&soft, &matrix, positive).unwrap();
        let high = calibrated.get("ex-1").unwrap().as_soft().unwrap();
        assert_relative_eq!(high.prob(positive), 61.0 / 70.0, max_relative = 1e-12);
        let low = calibrated.get("ex-0").unwrap().as_soft().unwrap();
        assert_relative_eq!(low.prob(positive), 0.3, max_relative = 1e-12);
    }

    #[test]
    fn choosing_the_other_positive_label_changes_nothing_binary() {
        // In a binary space the two components identify the same buckets.
        let (matrix, _, soft) = example_ratings();
        let c = matrix.label_space().require("C").unwrap();
        let d = matrix.label_space().require("D").unwrap();
        let via_c = calibrate_discrete(&soft, &matrix, c).unwrap();
        let via_d = calibrate_discrete(&soft, &matrix, d).unwrap();
        for (id, prediction) in via_c.iter() {
            assert_eq!(via_d.get(id), Some(prediction));
        }
    }

    #[test]
    fn extra_predictions_calibrate_when_their_value_was_seen() {
        let matrix = matrix_from(&[("i1", &[0, 0]), ("i2", &[0, 1])]);
        let predictions = hard_set(&[("i1", 0), ("i2", 0), ("extra", 0)]);
        let calibrated = calibrate_discrete(&predictions, &matrix, Label(0)).unwrap();
        let soft = calibrated.get("extra").unwrap().as_soft().unwrap();
        assert_relative_eq!(soft.prob(Label(0)), 0.75, max_relative = 1e-12);
    }

    #[test]
    fn unseen_output_values_are_empty_buckets() {
        let matrix = matrix_from(&[("i1", &[0, 0]), ("i2", &[0, 1])]);
        let predictions = hard_set(&[("i1", 0), ("i2", 0), ("extra", 1)]);
        let err = calibrate_discrete(&predictions, &matrix, Label(0)).unwrap_err();
        assert!(matches!(err, Error::EmptyBucket(_)), "got {err:?}");
    }

    #[test]
    fn every_matrix_item_needs_a_prediction() {
        let matrix = matrix_from(&[("i1", &[0, 0]), ("i2", &[0, 1])]);
        let predictions = hard_set(&[("i1", 0)]);
        let err = calibrate_discrete(&predictions, &matrix, Label(0)).unwrap_err();
        assert!(matches!(err, Error::PredictionMismatch(_)), "got {err:?}");
    }
}
