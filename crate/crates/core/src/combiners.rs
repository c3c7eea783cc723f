//! Pooling a set of ratings into one prediction.
//!
//! A combiner turns the ratings a survey of `k` raters produced for an
//! item into a single prediction: a label (majority, plurality) or a
//! distribution (frequency, Bayesian). Ratings are anonymous, so every
//! combiner here is a function of the rating *counts* — a property the
//! tests pin down and the memoization below exploits.
//!
//! The Bayesian combiner is the interesting one: it estimates, from the
//! rest of the matrix, the probability that one more rater would answer
//! each label given the `k` answers seen so far. Its building blocks are
//! exposed too: [`sequence_probability_one_item`] (the chance a specific
//! ordered rating sequence arises from one item's ratings) and
//! [`BayesianEngine::sequence_probability`] (the same marginalized over
//! items). Both depend only on count vectors, which makes aggressive
//! memoization safe; see [`BayesianEngine`].

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use dashmap::DashMap;
use rand::Rng;

use crate::error::{Error, Result};
use crate::model::{Label, LabelCounts, RatingMatrix};
use crate::prediction::{Prediction, PredictionKind, SoftPrediction};
use crate::rng::TaskRng;

/// Floor applied by the frequency combiner to components that would
/// otherwise be exactly 0 (and `1 -` this to components that would be
/// exactly 1), so that log-loss scoring stays finite.
pub const FREQUENCY_FLOOR: f64 = 0.02;

/// The available rating combiners.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Combiner {
    /// Majority label of a binary space; ties and empty input break
    /// uniformly at random.
    MajorityVote,
    /// Most frequent label; ties among leaders (or empty input, over all
    /// labels) break uniformly at random.
    Plurality,
    /// Empirical label frequencies, floored away from hard 0/1 by
    /// [`FREQUENCY_FLOOR`] and renormalized; uniform on empty input.
    Frequency,
    /// Bayesian posterior over the next rater's label, learned from the
    /// rest of the matrix under rater anonymity.
    Bayesian,
}

impl Combiner {
    /// Stable name used in metadata and on the command line.
    pub fn name(&self) -> &'static str {
        match self {
            Combiner::MajorityVote => "majority",
            Combiner::Plurality => "plurality",
            Combiner::Frequency => "frequency",
            Combiner::Bayesian => "abc",
        }
    }

    /// Parses a command-line combiner name.
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "majority" => Ok(Combiner::MajorityVote),
            "plurality" => Ok(Combiner::Plurality),
            "frequency" => Ok(Combiner::Frequency),
            "abc" => Ok(Combiner::Bayesian),
            other => Err(Error::InvalidConfig(format!(
                "unknown combiner {other:?} (expected majority, plurality, frequency, or abc)"
            ))),
        }
    }

    /// The kind of prediction this combiner produces.
    pub fn output_kind(&self) -> PredictionKind {
        match self {
            Combiner::MajorityVote | Combiner::Plurality => PredictionKind::Hard,
            Combiner::Frequency | Combiner::Bayesian => PredictionKind::Soft,
        }
    }

    /// True when combining may need random tie-breaking.
    pub fn needs_rng(&self) -> bool {
        self.output_kind() == PredictionKind::Hard
    }

    /// Validates this combiner against a matrix and builds any learned
    /// state it needs (the Bayesian engine), ready for repeated use.
    pub fn prepare(&self, matrix: &RatingMatrix) -> Result<PreparedCombiner> {
        if *self == Combiner::MajorityVote && !matrix.label_space().is_binary() {
            return Err(Error::CombinerContract(format!(
                "majority vote requires a binary label space, this one has {} labels \
                 (use plurality instead)",
                matrix.label_space().len()
            )));
        }
        let engine = match self {
            Combiner::Bayesian => Some(BayesianEngine::new(matrix)),
            _ => None,
        };
        let freq_memo = match self {
            Combiner::Frequency => Some(Arc::new(DashMap::new())),
            _ => None,
        };
        Ok(PreparedCombiner {
            combiner: *self,
            n_labels: matrix.label_space().len(),
            engine,
            freq_memo,
        })
    }
}

/// A combiner bound to a matrix, with learned state and memo tables.
#[derive(Debug)]
pub struct PreparedCombiner {
    combiner: Combiner,
    n_labels: usize,
    engine: Option<BayesianEngine>,
    freq_memo: Option<Arc<DashMap<LabelCounts, SoftPrediction>>>,
}

impl PreparedCombiner {
    /// The combiner this was prepared from.
    pub fn combiner(&self) -> Combiner {
        self.combiner
    }

    /// The Bayesian engine, when this is the Bayesian combiner.
    pub fn engine(&self) -> Option<&BayesianEngine> {
        self.engine.as_ref()
    }

    /// Pools `labels` (the ratings a survey produced for the item at
    /// `excluded_item`) into a prediction. `rng` is drawn from only for
    /// tie-breaking by the hard combiners.
    pub fn combine(
        &self,
        labels: &[Label],
        excluded_item: usize,
        rng: &mut TaskRng,
    ) -> Result<Prediction> {
        self.combine_counts(
            &LabelCounts::tally(labels, self.n_labels),
            excluded_item,
            rng,
        )
    }

    /// [`PreparedCombiner::combine`] on pre-tallied counts.
    pub fn combine_counts(
        &self,
        counts: &LabelCounts,
        excluded_item: usize,
        rng: &mut TaskRng,
    ) -> Result<Prediction> {
        match self.combiner {
            Combiner::MajorityVote => Ok(Prediction::Hard(majority_of_counts(counts, rng))),
            Combiner::Plurality => Ok(Prediction::Hard(plurality_of_counts(counts, rng))),
            _ => self.combine_soft(counts, excluded_item),
        }
    }

    /// [`PreparedCombiner::combine_counts`], constructing the rng stream
    /// only if a tie actually needs breaking. The hot path calls this
    /// with a keyed-stream factory so that unique-winner items (and soft
    /// combiners, which never draw) skip stream setup; outcomes are
    /// bit-identical to [`PreparedCombiner::combine_counts`] fed the
    /// same stream.
    pub fn combine_counts_lazy(
        &self,
        counts: &LabelCounts,
        excluded_item: usize,
        make_rng: impl FnOnce() -> TaskRng,
    ) -> Result<Prediction> {
        match self.combiner {
            Combiner::MajorityVote => {
                let c = counts.counts();
                let winner = match c[0].cmp(&c[1]) {
                    std::cmp::Ordering::Greater => Label(0),
                    std::cmp::Ordering::Less => Label(1),
                    std::cmp::Ordering::Equal => majority_of_counts(counts, &mut make_rng()),
                };
                Ok(Prediction::Hard(winner))
            }
            Combiner::Plurality => {
                let c = counts.counts();
                let max = c.iter().copied().max().expect("non-empty label space");
                let unique = max > 0 && c.iter().filter(|&&x| x == max).count() == 1;
                let winner = if unique {
                    Label(c.iter().position(|&x| x == max).unwrap() as u16)
                } else {
                    plurality_of_counts(counts, &mut make_rng())
                };
                Ok(Prediction::Hard(winner))
            }
            _ => self.combine_soft(counts, excluded_item),
        }
    }

    fn combine_soft(&self, counts: &LabelCounts, excluded_item: usize) -> Result<Prediction> {
        match self.combiner {
            Combiner::Frequency => {
                let memo = self.freq_memo.as_ref().expect("frequency memo present");
                if let Some(hit) = memo.get(counts) {
                    return Ok(Prediction::Soft(hit.clone()));
                }
                let soft = frequency_of_counts(counts);
                memo.insert(counts.clone(), soft.clone());
                Ok(Prediction::Soft(soft))
            }
            Combiner::Bayesian => {
                let engine = self.engine.as_ref().expect("bayesian engine present");
                Ok(Prediction::Soft(
                    engine.combine_counts(counts, excluded_item)?,
                ))
            }
            _ => unreachable!("hard combiners handled by the callers"),
        }
    }

    /// A prepared combiner for a resampled view of the same matrix
    /// (`indices` into the original items, repeats allowed). Shares the
    /// memo tables that stay valid across resamples.
    pub fn for_resample(&self, indices: &[usize]) -> PreparedCombiner {
        PreparedCombiner {
            combiner: self.combiner,
            n_labels: self.n_labels,
            engine: self.engine.as_ref().map(|e| e.for_resample(indices)),
            freq_memo: self.freq_memo.clone(),
        }
    }
}

/// Majority label over a binary space; ties and empty input uniform.
pub fn majority_vote(labels: &[Label], n_labels: usize, rng: &mut TaskRng) -> Result<Label> {
    if n_labels != 2 {
        return Err(Error::CombinerContract(format!(
            "majority vote requires a binary label space, got {n_labels} labels"
        )));
    }
    Ok(majority_of_counts(
        &LabelCounts::tally(labels, n_labels),
        rng,
    ))
}

fn majority_of_counts(counts: &LabelCounts, rng: &mut TaskRng) -> Label {
    debug_assert_eq!(counts.n_labels(), 2);
    let c = counts.counts();
    match c[0].cmp(&c[1]) {
        std::cmp::Ordering::Greater => Label(0),
        std::cmp::Ordering::Less => Label(1),
        std::cmp::Ordering::Equal => Label(rng.random_range(0..2u16)),
    }
}

/// Most frequent label; ties among leaders break uniformly at random,
/// and empty input draws uniformly from the whole label space.
pub fn plurality(labels: &[Label], n_labels: usize, rng: &mut TaskRng) -> Label {
    plurality_of_counts(&LabelCounts::tally(labels, n_labels), rng)
}

/// [`plurality`] on pre-tallied counts.
pub fn plurality_of_counts(counts: &LabelCounts, rng: &mut TaskRng) -> Label {
    let c = counts.counts();
    let max = c.iter().copied().max().expect("non-empty label space");
    if max == 0 {
        return Label(rng.random_range(0..c.len() as u16));
    }
    let n_tied = c.iter().filter(|&&x| x == max).count();
    if n_tied == 1 {
        // No rng draw on a unique winner, so deterministic cases stay
        // deterministic.
        let idx = c.iter().position(|&x| x == max).unwrap();
        return Label(idx as u16);
    }
    let pick = rng.random_range(0..n_tied);
    let idx = c
        .iter()
        .enumerate()
        .filter(|(_, &x)| x == max)
        .nth(pick)
        .map(|(i, _)| i)
        .unwrap();
    Label(idx as u16)
}

/// Empirical label frequencies as a soft prediction.
///
/// Components that would be exactly 0 or 1 are pulled in to
/// [`FREQUENCY_FLOOR`] / `1 - FREQUENCY_FLOOR` and the vector is
/// renormalized, so downstream log-loss scoring never sees a hard zero.
/// Empty input yields the uniform distribution.
pub fn frequency(labels: &[Label], n_labels: usize) -> SoftPrediction {
    frequency_of_counts(&LabelCounts::tally(labels, n_labels))
}

/// [`frequency`] on pre-tallied counts.
pub fn frequency_of_counts(counts: &LabelCounts) -> SoftPrediction {
    let k = counts.total();
    let n_labels = counts.n_labels();
    if k == 0 {
        return SoftPrediction::normalized(vec![1.0; n_labels]);
    }
    let weights: Vec<f64> = counts
        .counts()
        .iter()
        .map(|&c| {
            if c == 0 {
                FREQUENCY_FLOOR
            } else if c as u32 == k {
                1.0 - FREQUENCY_FLOOR
            } else {
                c as f64 / k as f64
            }
        })
        .collect();
    SoftPrediction::normalized(weights)
}

/// Probability that a specific ordered sequence of ratings with counts
/// `seq` arises when `seq.total()` raters are drawn uniformly without
/// replacement from an item whose ratings have counts `item`.
///
/// Zero when the item cannot cover the sequence. All orderings of the
/// same counts are equally likely, so the value depends only on counts.
pub fn sequence_probability_one_item(seq: &LabelCounts, item: &LabelCounts) -> f64 {
    if !item.covers(seq) {
        return 0.0;
    }
    // Falling-factorial form, in log space to stay finite for large
    // rows: prod_l item_l! / (item_l - seq_l)!  /  (n! / (n - k)!).
    let mut log_p = -log_falling_factorial(item.total(), seq.total());
    for (&c, &y) in item.counts().iter().zip(seq.counts()) {
        log_p += log_falling_factorial(c as u32, y as u32);
    }
    log_p.exp()
}

fn log_falling_factorial(a: u32, b: u32) -> f64 {
    (0..b).map(|i| ((a - i) as f64).ln()).sum()
}

/// Interned distinct row-count vectors of a matrix.
///
/// Most matrices have far fewer distinct count vectors than items (a
/// binary matrix with 10 raters has at most 11), and every sequence
/// probability depends on an item only through its counts — so all the
/// heavy arithmetic is keyed by `(class, sequence counts)` pairs.
#[derive(Debug)]
struct ClassTable {
    /// Distinct count vectors, indexed by class id in canonical
    /// first-seen order.
    counts: Vec<LabelCounts>,
    /// Cached totals, parallel to `counts`.
    totals: Vec<u32>,
    /// `ln(i!)` for `i` up to the largest row length.
    log_factorial: Vec<f64>,
}

impl ClassTable {
    fn log_falling_factorial(&self, a: u32, b: u32) -> f64 {
        self.log_factorial[a as usize] - self.log_factorial[(a - b) as usize]
    }
}

/// The learned state of the Bayesian combiner for one matrix, with the
/// memo tables that make it fast.
///
/// # Memoization
///
/// Three layers, all keyed by count vectors:
/// 1. per-item probabilities, keyed `(item class, sequence counts)` —
///    shared with every resampled view, since resampling changes only
///    *how many* items fall in each class;
/// 2. their across-item sums, keyed `(sequence counts, eligibility
///    threshold)` — per view;
/// 3. finished predictions, keyed `(excluded class, sequence counts)` —
///    per view.
///
/// Tables are concurrent maps with insert-if-absent semantics and pure
/// values, so results are identical no matter how many threads race, and
/// identical (bit for bit) with memoization disabled.
#[derive(Debug)]
pub struct BayesianEngine {
    n_labels: usize,
    ids: Vec<Arc<str>>,
    id_index: HashMap<Arc<str>, usize>,
    /// Class id of each item in this view.
    item_class: Vec<u32>,
    /// Multiplicity of each class in this view.
    class_mult: Vec<u32>,
    /// `eligible[t]` = number of items in this view with at least `t`
    /// ratings.
    eligible: Vec<u32>,
    table: Arc<ClassTable>,
    poi_memo: Arc<DashMap<(u32, LabelCounts), f64>>,
    poi_evals: Arc<AtomicU64>,
    sum_memo: DashMap<(LabelCounts, u32), f64>,
    prediction_memo: DashMap<(u32, LabelCounts), Option<SoftPrediction>>,
    memoize: bool,
}

impl BayesianEngine {
    /// Learns the class structure of `matrix` with memoization enabled.
    pub fn new(matrix: &RatingMatrix) -> Self {
        Self::with_memoization(matrix, true)
    }

    /// Learns the class structure of `matrix`; disabling memoization
    /// recomputes every probability from scratch (for testing — results
    /// are identical, just slower).
    pub fn with_memoization(matrix: &RatingMatrix, memoize: bool) -> Self {
        let n_labels = matrix.label_space().len();
        let mut class_of: HashMap<LabelCounts, u32> = HashMap::new();
        let mut counts: Vec<LabelCounts> = Vec::new();
        let mut totals: Vec<u32> = Vec::new();
        let mut item_class = vec![0u32; matrix.n_items()];
        // Canonical discovery order keeps class ids (and therefore
        // summation order) independent of item storage order.
        for &idx in matrix.canonical_order() {
            let idx = idx as usize;
            let row_counts = matrix.row_counts(idx);
            let class = *class_of.entry(row_counts.clone()).or_insert_with(|| {
                counts.push(row_counts.clone());
                totals.push(row_counts.total());
                (counts.len() - 1) as u32
            });
            item_class[idx] = class;
        }
        let mut class_mult = vec![0u32; counts.len()];
        for &class in &item_class {
            class_mult[class as usize] += 1;
        }

        let max_len = matrix.max_raters();
        let mut log_factorial = vec![0.0f64; max_len + 2];
        for i in 1..log_factorial.len() {
            log_factorial[i] = log_factorial[i - 1] + (i as f64).ln();
        }

        let ids: Vec<Arc<str>> = (0..matrix.n_items())
            .map(|i| Arc::<str>::from(matrix.item_id(i)))
            .collect();
        let mut id_index = HashMap::with_capacity(ids.len());
        for (i, id) in ids.iter().enumerate() {
            id_index.entry(Arc::clone(id)).or_insert(i);
        }

        let eligible = eligibility_counts(&class_mult, &totals, max_len);
        BayesianEngine {
            n_labels,
            ids,
            id_index,
            item_class,
            class_mult,
            eligible,
            table: Arc::new(ClassTable {
                counts,
                totals,
                log_factorial,
            }),
            poi_memo: Arc::new(DashMap::new()),
            poi_evals: Arc::new(AtomicU64::new(0)),
            sum_memo: DashMap::new(),
            prediction_memo: DashMap::new(),
            memoize,
        }
    }

    /// An engine for the resampled view selecting `indices` (repeats
    /// allowed) of the matrix this engine was built from. Shares the
    /// per-item probability memo; per-view sums are rebuilt, since they
    /// depend on class multiplicities.
    pub fn for_resample(&self, indices: &[usize]) -> BayesianEngine {
        let item_class: Vec<u32> = indices.iter().map(|&i| self.item_class[i]).collect();
        let mut class_mult = vec![0u32; self.table.counts.len()];
        for &class in &item_class {
            class_mult[class as usize] += 1;
        }
        let max_len = self.table.log_factorial.len() - 2;
        let eligible = eligibility_counts(&class_mult, &self.table.totals, max_len);
        let ids: Vec<Arc<str>> = indices.iter().map(|&i| Arc::clone(&self.ids[i])).collect();
        let mut id_index = HashMap::with_capacity(ids.len());
        for (i, id) in ids.iter().enumerate() {
            id_index.entry(Arc::clone(id)).or_insert(i);
        }
        BayesianEngine {
            n_labels: self.n_labels,
            ids,
            id_index,
            item_class,
            class_mult,
            eligible,
            table: Arc::clone(&self.table),
            poi_memo: Arc::clone(&self.poi_memo),
            poi_evals: Arc::clone(&self.poi_evals),
            sum_memo: DashMap::new(),
            prediction_memo: DashMap::new(),
            memoize: self.memoize,
        }
    }

    /// How many times a per-item sequence probability has actually been
    /// computed (memo hits excluded), across this engine and every view
    /// sharing its tables.
    pub fn probability_evaluations(&self) -> u64 {
        self.poi_evals.load(Ordering::Relaxed)
    }

    /// Number of distinct row-count classes in the underlying matrix.
    pub fn n_classes(&self) -> usize {
        self.table.counts.len()
    }

    fn item_index(&self, id: &str) -> Result<usize> {
        self.id_index
            .get(id)
            .copied()
            .ok_or_else(|| Error::PredictionMismatch(format!("unknown item id {id:?}")))
    }

    /// Per-item sequence probability by class, memoized.
    fn poi(&self, class: u32, seq: &LabelCounts) -> f64 {
        if self.memoize {
            if let Some(hit) = self.poi_memo.get(&(class, seq.clone())) {
                return *hit;
            }
        }
        let item = &self.table.counts[class as usize];
        let value = if item.covers(seq) {
            let mut log_p = -self.table.log_falling_factorial(item.total(), seq.total());
            for (&c, &y) in item.counts().iter().zip(seq.counts()) {
                log_p += self.table.log_falling_factorial(c as u32, y as u32);
            }
            log_p.exp()
        } else {
            0.0
        };
        self.poi_evals.fetch_add(1, Ordering::Relaxed);
        if self.memoize {
            self.poi_memo.insert((class, seq.clone()), value);
        }
        value
    }

    /// Sum of per-item probabilities over every item in this view with
    /// at least `threshold` ratings, memoized per view.
    fn sum_over_items(&self, seq: &LabelCounts, threshold: u32) -> f64 {
        if self.memoize {
            if let Some(hit) = self.sum_memo.get(&(seq.clone(), threshold)) {
                return *hit;
            }
        }
        let mut total = 0.0;
        for (class, &mult) in self.class_mult.iter().enumerate() {
            if mult > 0 && self.table.totals[class] >= threshold {
                total += mult as f64 * self.poi(class as u32, seq);
            }
        }
        if self.memoize {
            self.sum_memo.insert((seq.clone(), threshold), total);
        }
        total
    }

    /// Number of items in this view with at least `t` ratings.
    fn n_eligible(&self, t: u32) -> u32 {
        self.eligible.get(t as usize).copied().unwrap_or(0)
    }

    /// Probability that a random *other* item would produce the ordered
    /// rating sequence `seq`, estimated over items with at least
    /// `seq.len()` ratings, excluding `excluded_item`.
    pub fn sequence_probability(&self, seq: &[Label], excluded_item: &str) -> Result<f64> {
        let idx = self.item_index(excluded_item)?;
        self.sequence_probability_counts(&LabelCounts::tally(seq, self.n_labels), idx)
    }

    /// [`BayesianEngine::sequence_probability`] on pre-tallied counts and
    /// an item index.
    pub fn sequence_probability_counts(
        &self,
        seq: &LabelCounts,
        excluded_item: usize,
    ) -> Result<f64> {
        let threshold = seq.total();
        self.sequence_probability_at(seq, excluded_item, threshold)
    }

    fn sequence_probability_at(
        &self,
        seq: &LabelCounts,
        excluded_item: usize,
        threshold: u32,
    ) -> Result<f64> {
        let class = self.item_class[excluded_item];
        let excluded_in = self.table.totals[class as usize] >= threshold;
        let population = self.n_eligible(threshold);
        let divisor = population as i64 - excluded_in as i64;
        if divisor <= 0 {
            return Err(Error::TooFewItems(format!(
                "sequence probability needs another item with at least {threshold} rating(s); \
                 only {population} item(s) qualify"
            )));
        }
        let mut total = self.sum_over_items(seq, threshold);
        if excluded_in {
            total -= self.poi(class, seq);
        }
        Ok((total / divisor as f64).max(0.0))
    }

    /// Bayesian pooled prediction: the posterior probability of each
    /// label for a further rating of the excluded item, given `labels`
    /// from it, learned from the other items.
    pub fn combine(&self, labels: &[Label], excluded_item: &str) -> Result<SoftPrediction> {
        let idx = self.item_index(excluded_item)?;
        self.combine_counts(&LabelCounts::tally(labels, self.n_labels), idx)
    }

    /// [`BayesianEngine::combine`] on pre-tallied counts and an item
    /// index.
    ///
    /// Both the numerator and denominator sequence probabilities run
    /// over the items with at least `k + 1` ratings, so the components
    /// telescope and always sum to 1.
    pub fn combine_counts(
        &self,
        counts: &LabelCounts,
        excluded_item: usize,
    ) -> Result<SoftPrediction> {
        let class = self.item_class[excluded_item];
        let key = (class, counts.clone());
        if self.memoize {
            if let Some(hit) = self.prediction_memo.get(&key) {
                return match &*hit {
                    Some(soft) => Ok(soft.clone()),
                    None => Err(self.zero_denominator(counts)),
                };
            }
        }
        let result = self.combine_uncached(counts, class);
        if self.memoize {
            self.prediction_memo.insert(key, result.clone());
        }
        match result {
            Some(soft) => Ok(soft),
            None => Err(self.zero_denominator(counts)),
        }
    }

    fn combine_uncached(&self, counts: &LabelCounts, class: u32) -> Option<SoftPrediction> {
        let threshold = counts.total() + 1;
        let excluded_in = self.table.totals[class as usize] >= threshold;
        if self.n_eligible(threshold) <= excluded_in as u32 {
            return None;
        }
        let mut denominator = self.sum_over_items(counts, threshold);
        if excluded_in {
            denominator -= self.poi(class, counts);
        }
        if denominator <= 0.0 {
            return None;
        }
        let mut weights = Vec::with_capacity(self.n_labels);
        for label in 0..self.n_labels {
            let extended = counts.with(Label(label as u16));
            let mut numerator = self.sum_over_items(&extended, threshold);
            if excluded_in {
                numerator -= self.poi(class, &extended);
            }
            weights.push((numerator / denominator).max(0.0));
        }
        Some(SoftPrediction::normalized(weights))
    }

    fn zero_denominator(&self, counts: &LabelCounts) -> Error {
        Error::ZeroDenominator(format!(
            "no other item with enough ratings can produce rating counts {counts}"
        ))
    }
}

fn eligibility_counts(class_mult: &[u32], totals: &[u32], max_len: usize) -> Vec<u32> {
    let mut eligible = vec![0u32; max_len + 2];
    for (class, &mult) in class_mult.iter().enumerate() {
        for slot in eligible.iter_mut().take(totals[class] as usize + 1) {
            *slot += mult;
        }
    }
    eligible
}
