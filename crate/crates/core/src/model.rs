//! Labels, label-count vectors, and the rating matrix.
//!
//! A [`RatingMatrix`] holds, per item, an *anonymous* sequence of labels:
//! column position carries no rater identity, so every operation in this
//! crate treats a row as an exchangeable multiset of ratings. Rows may be
//! ragged — different items can have different numbers of ratings — as
//! long as every item keeps at least two (one to predict from, one to
//! score against).

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use smallvec::SmallVec;

use crate::error::{Error, Result, Violation};

/// A label, stored as an index into its [`LabelSpace`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Label(pub u16);

impl Label {
    /// The label's index within its label space.
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// An ordered set of at least two distinct label names.
///
/// The ordering is significant: soft predictions are probability vectors
/// in label-space order, and CSV columns follow it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelSpace {
    names: Vec<String>,
}

impl LabelSpace {
    /// Builds a label space from distinct names, preserving their order.
    pub fn new<I, S>(names: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.len() < 2 {
            return Err(Error::InvalidLabelSpace(format!(
                "need at least 2 labels, got {}",
                names.len()
            )));
        }
        if names.len() > u16::MAX as usize {
            return Err(Error::InvalidLabelSpace(format!(
                "too many labels ({})",
                names.len()
            )));
        }
        for (i, name) in names.iter().enumerate() {
            if name.is_empty() {
                return Err(Error::InvalidLabelSpace(format!(
                    "label {i} has an empty name"
                )));
            }
            if names[..i].contains(name) {
                return Err(Error::InvalidLabelSpace(format!(
                    "duplicate label name {name:?}"
                )));
            }
        }
        Ok(LabelSpace { names })
    }

    /// Number of labels.
    #[allow(clippy::len_without_is_empty)] // a valid space is never empty
    pub fn len(&self) -> usize {
        self.names.len()
    }

    /// True when the space has exactly two labels.
    pub fn is_binary(&self) -> bool {
        self.names.len() == 2
    }

    /// Looks a label up by name.
    pub fn label(&self, name: &str) -> Option<Label> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| Label(i as u16))
    }

    /// Looks a label up by name, failing with [`Error::UnknownLabel`].
    pub fn require(&self, name: &str) -> Result<Label> {
        self.label(name)
            .ok_or_else(|| Error::UnknownLabel(name.to_owned()))
    }

    /// The name of `label`.
    pub fn name(&self, label: Label) -> &str {
        &self.names[label.index()]
    }

    /// All label names, in order.
    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Iterates over all labels in order.
    pub fn labels(&self) -> impl Iterator<Item = Label> + '_ {
        (0..self.names.len()).map(|i| Label(i as u16))
    }
}

/// How many times each label occurs in a multiset of ratings.
///
/// Count vectors are the currency of the sequence-probability machinery:
/// because ratings are anonymous, any quantity derived from a set of
/// labels depends only on its counts.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct LabelCounts {
    counts: SmallVec<[u16; 8]>,
}

impl LabelCounts {
    /// An all-zero count vector over `n_labels` labels.
    pub fn zeros(n_labels: usize) -> Self {
        LabelCounts {
            counts: smallvec::smallvec![0; n_labels],
        }
    }

    /// Tallies `labels` into a count vector over `n_labels` labels.
    pub fn tally(labels: &[Label], n_labels: usize) -> Self {
        let mut counts = Self::zeros(n_labels);
        for &label in labels {
            counts.add(label);
        }
        counts
    }

    /// The per-label counts, in label-space order.
    pub fn counts(&self) -> &[u16] {
        &self.counts
    }

    /// The count for one label.
    pub fn count(&self, label: Label) -> u16 {
        self.counts[label.index()]
    }

    /// Total number of ratings counted.
    pub fn total(&self) -> u32 {
        self.counts.iter().map(|&c| c as u32).sum()
    }

    /// Number of labels in the underlying space.
    pub fn n_labels(&self) -> usize {
        self.counts.len()
    }

    /// Adds one occurrence of `label`.
    pub fn add(&mut self, label: Label) {
        self.counts[label.index()] += 1;
    }

    /// Removes one occurrence of `label` (which must be present).
    pub fn remove(&mut self, label: Label) {
        debug_assert!(self.counts[label.index()] > 0);
        self.counts[label.index()] -= 1;
    }

    /// A copy with one extra occurrence of `label`.
    pub fn with(&self, label: Label) -> Self {
        let mut next = self.clone();
        next.add(label);
        next
    }

    /// True when every component of `other` fits inside `self`.
    pub fn covers(&self, other: &LabelCounts) -> bool {
        debug_assert_eq!(self.counts.len(), other.counts.len());
        self.counts
            .iter()
            .zip(other.counts.iter())
            .all(|(a, b)| a >= b)
    }
}

impl fmt::Display for LabelCounts {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, c) in self.counts.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "]")
    }
}

/// A set of items, each with an anonymous sequence of ratings.
#[derive(Debug, Clone)]
pub struct RatingMatrix {
    space: Arc<LabelSpace>,
    ids: Vec<Arc<str>>,
    rows: Vec<Arc<[Label]>>,
    index: HashMap<Arc<str>, usize>,
    canonical: Vec<u32>,
    max_raters: usize,
}

impl RatingMatrix {
    /// Validates raw `(item id, rating symbols)` rows and builds a matrix.
    ///
    /// All violations are collected before failing: unknown label symbols
    /// (with item and 1-based rating position), rows with fewer than two
    /// ratings, and duplicated item ids.
    pub fn new<I>(space: LabelSpace, items: I) -> Result<Self>
    where
        I: IntoIterator<Item = (String, Vec<String>)>,
    {
        let mut violations = Vec::new();
        let mut ids = Vec::new();
        let mut rows: Vec<Arc<[Label]>> = Vec::new();
        let mut seen: HashMap<String, ()> = HashMap::new();

        for (id, symbols) in items {
            if seen.insert(id.clone(), ()).is_some() {
                violations.push(Violation::DuplicateItemId { item: id.clone() });
            }
            if symbols.len() < 2 {
                violations.push(Violation::RowTooShort {
                    item: id.clone(),
                    len: symbols.len(),
                });
            }
            let mut row = Vec::with_capacity(symbols.len());
            for (pos, symbol) in symbols.iter().enumerate() {
                match space.label(symbol) {
                    Some(label) => row.push(label),
                    None => violations.push(Violation::UnknownLabel {
                        item: id.clone(),
                        position: pos + 1,
                        symbol: symbol.clone(),
                    }),
                }
            }
            ids.push(Arc::<str>::from(id.as_str()));
            rows.push(Arc::from(row));
        }

        if !violations.is_empty() {
            return Err(Error::InvalidMatrix(violations));
        }
        if ids.is_empty() {
            return Err(Error::EmptyInput("rating matrix has no items".into()));
        }
        Ok(Self::assemble(Arc::new(space), ids, rows))
    }

    /// Builds a matrix from already-resolved labels, with the same
    /// structural validation as [`RatingMatrix::new`].
    pub fn from_labels<I>(space: LabelSpace, items: I) -> Result<Self>
    where
        I: IntoIterator<Item = (String, Vec<Label>)>,
    {
        let n_labels = space.len();
        let mut violations = Vec::new();
        let mut ids = Vec::new();
        let mut rows: Vec<Arc<[Label]>> = Vec::new();
        let mut seen: HashMap<String, ()> = HashMap::new();

        for (id, row) in items {
            if seen.insert(id.clone(), ()).is_some() {
                violations.push(Violation::DuplicateItemId { item: id.clone() });
            }
            if row.len() < 2 {
                violations.push(Violation::RowTooShort {
                    item: id.clone(),
                    len: row.len(),
                });
            }
            for (pos, label) in row.iter().enumerate() {
                if label.index() >= n_labels {
                    violations.push(Violation::UnknownLabel {
                        item: id.clone(),
                        position: pos + 1,
                        symbol: format!("#{}", label.0),
                    });
                }
            }
            ids.push(Arc::<str>::from(id.as_str()));
            rows.push(Arc::from(row));
        }

        if !violations.is_empty() {
            return Err(Error::InvalidMatrix(violations));
        }
        if ids.is_empty() {
            return Err(Error::EmptyInput("rating matrix has no items".into()));
        }
        Ok(Self::assemble(Arc::new(space), ids, rows))
    }

    fn assemble(space: Arc<LabelSpace>, ids: Vec<Arc<str>>, rows: Vec<Arc<[Label]>>) -> Self {
        let max_raters = rows.iter().map(|r| r.len()).max().unwrap_or(0);
        let mut index = HashMap::with_capacity(ids.len());
        for (i, id) in ids.iter().enumerate() {
            // First occurrence wins; duplicates only arise in resampled
            // views, which are never queried by id.
            index.entry(Arc::clone(id)).or_insert(i);
        }
        let mut canonical: Vec<u32> = (0..ids.len() as u32).collect();
        canonical.sort_by(|&a, &b| ids[a as usize].cmp(&ids[b as usize]).then(a.cmp(&b)));
        RatingMatrix {
            space,
            ids,
            rows,
            index,
            canonical,
            max_raters,
        }
    }

    /// The label space ratings are drawn from.
    pub fn label_space(&self) -> &LabelSpace {
        &self.space
    }

    /// Shared handle to the label space.
    pub fn label_space_arc(&self) -> Arc<LabelSpace> {
        Arc::clone(&self.space)
    }

    /// Number of items.
    pub fn n_items(&self) -> usize {
        self.rows.len()
    }

    /// The largest number of ratings any item has (the maximum survey
    /// size this matrix can emulate).
    pub fn max_raters(&self) -> usize {
        self.max_raters
    }

    /// The id of the item at `idx`.
    pub fn item_id(&self, idx: usize) -> &str {
        &self.ids[idx]
    }

    /// The ratings of the item at `idx`.
    pub fn row(&self, idx: usize) -> &[Label] {
        &self.rows[idx]
    }

    /// Index of the item with the given id.
    pub fn item_index(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    /// Item indices in canonical (id-sorted) order.
    ///
    /// Scoring loops iterate in this order so that results are identical
    /// — bit for bit — no matter how the input rows were ordered.
    pub fn canonical_order(&self) -> &[u32] {
        &self.canonical
    }

    /// Iterates `(id, row)` pairs in storage order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &[Label])> + '_ {
        self.ids
            .iter()
            .zip(self.rows.iter())
            .map(|(id, row)| (&**id, &**row))
    }

    /// Per-label rating counts of one item.
    pub fn row_counts(&self, idx: usize) -> LabelCounts {
        LabelCounts::tally(&self.rows[idx], self.space.len())
    }

    /// A new matrix holding the items at `indices`, in that order.
    ///
    /// Used for bootstrap resampling: indices may repeat, so the result
    /// can contain duplicate item ids and skips id-uniqueness validation.
    /// Rows are shared, not copied.
    pub fn select_items(&self, indices: &[usize]) -> RatingMatrix {
        let ids = indices.iter().map(|&i| Arc::clone(&self.ids[i])).collect();
        let rows = indices.iter().map(|&i| Arc::clone(&self.rows[i])).collect();
        Self::assemble(Arc::clone(&self.space), ids, rows)
    }
}
