//! CSV and JSON interchange for ratings, predictions, and model
//! configs.
//!
//! Ratings travel as `item,r1,…,rK` with empty cells for missing
//! ratings; because rows are left-compacted, empty cells may only
//! trail. Predictions travel as `item,label` (hard) or
//! `item,p_<label1>,…,p_<labelN>` (soft, columns in label-space
//! order) — the header says which. Model configs are JSON matching
//! [`SyntheticModel`]'s field layout.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{LabelSpace, RatingMatrix};
use crate::prediction::{
    Prediction, PredictionKind, PredictionSet, SoftPrediction, SOFT_SUM_TOLERANCE,
};
use crate::synthetic::SyntheticModel;

/// How far a soft prediction row's sum may stray from one before the
/// file is rejected. Sums inside this gate but outside the stricter
/// in-memory tolerance are renormalized on load.
pub const SOFT_ROW_SUM_TOLERANCE: f64 = 1e-6;

fn parse_error(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

/// Loads a rating matrix from `item,r1,…,rK` CSV.
///
/// With `labels: None` the label space is inferred as the sorted set of
/// distinct labels in the file; passing a space instead pins the label
/// order (useful when a sample of a dataset omits a rare label).
pub fn load_ratings_csv(
    path: impl AsRef<Path>,
    labels: Option<LabelSpace>,
) -> Result<RatingMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .from_path(path.as_ref())?;
    let headers = reader.headers()?.clone();
    if headers.get(0) != Some("item") {
        return Err(parse_error(
            1,
            1,
            format!(
                "expected first header column `item`, found {:?}",
                headers.get(0).unwrap_or("")
            ),
        ));
    }

    // First pass keeps labels as strings so the space can be inferred
    // before any conversion.
    let mut raw: Vec<(String, Vec<String>, usize)> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let line = i + 2; // 1-based, after the header
        let id = record.get(0).unwrap_or("").to_owned();
        if id.is_empty() {
            return Err(parse_error(line, 1, "empty item id"));
        }
        let mut row = Vec::new();
        let mut first_gap: Option<usize> = None;
        for (j, cell) in record.iter().enumerate().skip(1) {
            if cell.is_empty() {
                first_gap.get_or_insert(j + 1);
            } else if let Some(gap) = first_gap {
                return Err(parse_error(
                    line,
                    gap,
                    "empty cell before later ratings (missing ratings may only trail)",
                ));
            } else {
                row.push(cell.to_owned());
            }
        }
        raw.push((id, row, line));
    }
    if raw.is_empty() {
        return Err(Error::EmptyInput("ratings file has no data rows".into()));
    }

    let space = match labels {
        Some(space) => space,
        None => {
            let mut distinct: Vec<&str> = raw
                .iter()
                .flat_map(|(_, row, _)| row.iter().map(String::as_str))
                .collect();
            distinct.sort_unstable();
            distinct.dedup();
            LabelSpace::new(distinct)?
        }
    };

    let mut items = Vec::with_capacity(raw.len());
    for (id, row, line) in raw {
        let mut converted = Vec::with_capacity(row.len());
        for (j, name) in row.iter().enumerate() {
            match space.require(name) {
                Ok(label) => converted.push(label),
                Err(_) => return Err(parse_error(line, j + 2, format!("unknown label {name:?}"))),
            }
        }
        items.push((id, converted));
    }
    RatingMatrix::from_labels(space, items)
}

/// Writes a rating matrix as `item,r1,…,rK` CSV, padding short rows
/// with trailing empty cells.
pub fn write_ratings_csv(path: impl AsRef<Path>, matrix: &RatingMatrix) -> Result<()> {
    let mut writer = csv::Writer::from_path(path.as_ref())?;
    let k = matrix.max_raters();
    let mut header = Vec::with_capacity(k + 1);
    header.push("item".to_owned());
    header.extend((1..=k).map(|r| format!("r{r}")));
    writer.write_record(&header)?;
    let space = matrix.label_space();
    for (id, row) in matrix.iter() {
        let mut record = Vec::with_capacity(k + 1);
        record.push(id.to_owned());
        record.extend(row.iter().map(|&l| space.name(l).to_owned()));
        record.extend(std::iter::repeat_n(String::new(), k - row.len()));
        writer.write_record(&record)?;
    }
    writer.flush().map_err(Error::Io)?;
    Ok(())
}

/// Loads predictions from CSV, deciding hard vs soft by the header:
/// `item,label` is hard; `item,p_<label1>,…,p_<labelN>` (columns in
/// label-space order) is soft.
///
/// Soft rows must sum to one within [`SOFT_ROW_SUM_TOLERANCE`]; rows
/// inside that gate are renormalized if they miss exact normalization.
pub fn load_predictions_csv(path: impl AsRef<Path>, space: &LabelSpace) -> Result<PredictionSet> {
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .from_path(path.as_ref())?;
    let headers = reader.headers()?.clone();
    if headers.get(0) != Some("item") {
        return Err(parse_error(
            1,
            1,
            format!(
                "expected first header column `item`, found {:?}",
                headers.get(0).unwrap_or("")
            ),
        ));
    }

    let kind = if headers.len() == 2 && headers.get(1) == Some("label") {
        PredictionKind::Hard
    } else {
        let expected: Vec<String> = space.names().iter().map(|n| format!("p_{n}")).collect();
        let found: Vec<&str> = headers.iter().skip(1).collect();
        if found != expected.iter().map(String::as_str).collect::<Vec<_>>() {
            return Err(parse_error(
                1,
                2,
                format!(
                    "expected header `item,label` or `item,{}`, found `item,{}`",
                    expected.join(","),
                    found.join(",")
                ),
            ));
        }
        PredictionKind::Soft
    };

    let mut set = PredictionSet::new(kind);
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let line = i + 2;
        let id = record.get(0).unwrap_or("").to_owned();
        if id.is_empty() {
            return Err(parse_error(line, 1, "empty item id"));
        }
        let prediction = match kind {
            PredictionKind::Hard => {
                let name = record.get(1).unwrap_or("");
                let label = space
                    .require(name)
                    .map_err(|_| parse_error(line, 2, format!("unknown label {name:?}")))?;
                Prediction::Hard(label)
            }
            PredictionKind::Soft => {
                if record.len() != space.len() + 1 {
                    return Err(parse_error(
                        line,
                        record.len(),
                        format!(
                            "expected {} probability columns, found {}",
                            space.len(),
                            record.len().saturating_sub(1)
                        ),
                    ));
                }
                let mut probs = Vec::with_capacity(space.len());
                for (j, cell) in record.iter().enumerate().skip(1) {
                    let p: f64 = cell.parse().map_err(|_| {
                        parse_error(line, j + 1, format!("not a probability: {cell:?}"))
                    })?;
                    probs.push(p);
                }
                let sum: f64 = probs.iter().sum();
                if !sum.is_finite() || (sum - 1.0).abs() > SOFT_ROW_SUM_TOLERANCE {
                    return Err(parse_error(
                        line,
                        2,
                        format!("probabilities sum to {sum}, expected 1"),
                    ));
                }
                if (sum - 1.0).abs() > SOFT_SUM_TOLERANCE {
                    for p in &mut probs {
                        *p /= sum;
                    }
                }
                Prediction::Soft(SoftPrediction::new(probs)?)
            }
        };
        set.insert(id, prediction)?;
    }
    if set.is_empty() {
        return Err(Error::EmptyInput(
            "predictions file has no data rows".into(),
        ));
    }
    Ok(set)
}

/// Writes predictions as CSV in the format [`load_predictions_csv`]
/// reads, rows in item-id order.
pub fn write_predictions_csv(
    path: impl AsRef<Path>,
    predictions: &PredictionSet,
    space: &LabelSpace,
) -> Result<()> {
    predictions.check_dimensions(space)?;
    let mut writer = csv::Writer::from_path(path.as_ref())?;
    match predictions.kind() {
        PredictionKind::Hard => {
            writer.write_record(["item", "label"])?;
            for (id, prediction) in predictions.iter() {
                let Prediction::Hard(label) = prediction else {
                    unreachable!("hard set holds hard predictions");
                };
                writer.write_record([id, space.name(*label)])?;
            }
        }
        PredictionKind::Soft => {
            let mut header = vec!["item".to_owned()];
            header.extend(space.names().iter().map(|n| format!("p_{n}")));
            writer.write_record(&header)?;
            for (id, prediction) in predictions.iter() {
                let Prediction::Soft(soft) = prediction else {
                    unreachable!("soft set holds soft predictions");
                };
                let mut record = vec![id.to_owned()];
                record.extend(soft.probs().iter().map(|p| p.to_string()));
                writer.write_record(&record)?;
            }
        }
    }
    writer.flush().map_err(Error::Io)?;
    Ok(())
}

/// Loads and validates a synthetic-model config from JSON.
pub fn load_model_json(path: impl AsRef<Path>) -> Result<SyntheticModel> {
    let mut text = String::new();
    BufReader::new(File::open(path.as_ref())?).read_to_string(&mut text)?;
    let model: SyntheticModel = serde_json::from_str(&text)?;
    model.validate()?;
    Ok(model)
}

/// Writes a synthetic-model config as pretty-printed JSON.
pub fn write_model_json(path: impl AsRef<Path>, model: &SyntheticModel) -> Result<()> {
    let mut writer = BufWriter::new(File::create(path.as_ref())?);
    serde_json::to_writer_pretty(&mut writer, model)?;
    writer.write_all(b"\n")?;
    writer.flush()?;
    Ok(())
}
