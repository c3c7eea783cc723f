//! Survey power curves: the expected score of `k` pooled raters against
//! held-out references, for every survey size `k`.
//!
//! For each `k`, rater-slot subsets of size `k` are drawn (all of them
//! when few, a capped random selection when many), each subset's labels
//! are pooled per item by the combiner, and the resulting predictions
//! are scored against the slots the subset did *not* use. The mean
//! across subsets is the curve value `c_k`; `c_0` is the zero-rater
//! baseline. Percentile error bands come from re-running the whole
//! computation on matrices resampled item-wise with replacement.
//!
//! Everything here is deterministic given a [`RandomSource`]: subset
//! plans, tie-breaks, and bootstrap draws all use streams keyed by their
//! place in the computation (sample, survey size, subset, item), never
//! by iteration order — so results are independent of thread count and
//! of the storage order of items.

use std::collections::HashSet;

use itertools::Itertools;
use rand::Rng;
use rayon::prelude::*;

use crate::combiners::{Combiner, PreparedCombiner};
use crate::curve::{CurveMetadata, PowerCurve};
use crate::error::{Error, Result};
use crate::model::{Label, LabelCounts, RatingMatrix};
use crate::prediction::Prediction;
use crate::rng::{stable_id_hash, task, RandomSource, TaskRng};
use crate::scorers::{score_against_slots, Scorer};
use crate::stats;

/// Default cap on the number of rater subsets evaluated per survey size.
pub const DEFAULT_SUBSET_CAP: usize = 200;

/// Default number of bootstrap samples behind error bands.
pub const DEFAULT_BOOTSTRAP_SAMPLES: usize = 500;

/// How the reference side of curve scoring is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceMode {
    /// Every unused rating slot is its own reference; a subset's score
    /// is the mean over those slots.
    SingleRater,
    /// References are plurality votes of panels of this many unused
    /// raters; a subset's score is the mean over panels.
    PluralityOf(usize),
}

impl ReferenceMode {
    /// Number of raters one reference consumes.
    pub fn raters(&self) -> usize {
        match *self {
            ReferenceMode::SingleRater => 1,
            ReferenceMode::PluralityOf(r) => r,
        }
    }
}

/// Knobs for a power-curve computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CurveOptions {
    /// Maximum subsets evaluated per survey size (and reference panels
    /// per subset).
    pub subset_cap: usize,
    /// Reference construction.
    pub reference: ReferenceMode,
}

impl Default for CurveOptions {
    fn default() -> Self {
        CurveOptions {
            subset_cap: DEFAULT_SUBSET_CAP,
            reference: ReferenceMode::SingleRater,
        }
    }
}

/// The rater subsets evaluated for one survey size.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsetPlan {
    k: usize,
    subsets: Vec<Vec<usize>>,
}

impl SubsetPlan {
    /// The survey size the subsets were drawn for.
    pub fn k(&self) -> usize {
        self.k
    }

    /// The subsets, each a sorted list of distinct rater-slot indices.
    pub fn subsets(&self) -> &[Vec<usize>] {
        &self.subsets
    }

    /// Number of subsets in the plan.
    pub fn len(&self) -> usize {
        self.subsets.len()
    }

    /// True when the plan holds no subsets (`k` exceeded the slots).
    pub fn is_empty(&self) -> bool {
        self.subsets.is_empty()
    }
}

/// Draws the subset plan for surveys of `k` out of `n_raters` slots:
/// exhaustive when there are at most `cap` combinations, otherwise
/// exactly `cap` distinct subsets sampled uniformly.
pub fn rater_subsets(n_raters: usize, k: usize, cap: usize, rng: &mut TaskRng) -> SubsetPlan {
    let slots: Vec<usize> = (0..n_raters).collect();
    SubsetPlan {
        k,
        subsets: rater_subsets_capped(&slots, k, cap, rng),
    }
}

/// [`rater_subsets`] over an explicit slot list (used to draw reference
/// panels from a subset's unused slots). Returns subsets of the *values*
/// in `slots`, each sorted; empty when `k > slots.len()`.
pub(crate) fn rater_subsets_capped(
    slots: &[usize],
    k: usize,
    cap: usize,
    rng: &mut TaskRng,
) -> Vec<Vec<usize>> {
    let n = slots.len();
    if k > n {
        return Vec::new();
    }
    if k == 0 {
        return vec![Vec::new()];
    }
    if combinations_at_most(n, k, cap) {
        return slots.iter().copied().combinations(k).collect();
    }
    let mut seen: HashSet<Vec<usize>> = HashSet::with_capacity(cap);
    let mut out = Vec::with_capacity(cap);
    while out.len() < cap {
        let mut picked: Vec<usize> = rand::seq::index::sample(rng, n, k)
            .into_iter()
            .map(|i| slots[i])
            .collect();
        picked.sort_unstable();
        if seen.insert(picked.clone()) {
            out.push(picked);
        }
    }
    out
}

/// True when `C(n, k) <= cap`, computed without overflow.
fn combinations_at_most(n: usize, k: usize, cap: usize) -> bool {
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 0..k {
        // Each step is an exact binomial, so the division is exact.
        c = c * (n - i) as u128 / (i + 1) as u128;
        if c > cap as u128 {
            return false;
        }
    }
    true
}

/// Computes the survey power curve of a matrix for one combiner/scorer
/// pairing. See the module docs for the construction.
pub fn survey_power_curve(
    matrix: &RatingMatrix,
    combiner: Combiner,
    scorer: Scorer,
    options: &CurveOptions,
    source: &RandomSource,
) -> Result<PowerCurve> {
    scorer.check_kind(combiner.output_kind())?;
    let prepared = combiner.prepare(matrix)?;
    let view = curve_for_view(matrix, &prepared, scorer, options, source, 0)?;
    Ok(assemble_curve(view, combiner, scorer, options, source))
}

/// Knobs for bootstrap error bands.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BootstrapOptions {
    /// Number of item-resampled matrices to evaluate.
    pub n_samples: usize,
    /// Draw items with replacement (the normal mode). When disabled
    /// every sample is the identity view computed with the point
    /// curve's streams, so bands collapse onto the point curve — a
    /// plumbing check, not a statistics mode.
    pub resample_items: bool,
}

impl Default for BootstrapOptions {
    fn default() -> Self {
        BootstrapOptions {
            n_samples: DEFAULT_BOOTSTRAP_SAMPLES,
            resample_items: true,
        }
    }
}

/// One bootstrap sample's curve.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveSample {
    /// The item indices (into the original matrix) this sample drew.
    pub indices: Vec<usize>,
    /// The sample's curve values; may cover fewer survey sizes than the
    /// point curve if the sample missed every longest row.
    pub means: Vec<f64>,
}

/// A point power curve with its bootstrap distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerCurveSet {
    /// The full-matrix curve, with percentile bands attached.
    pub point: PowerCurve,
    /// Per-sample curves, in sample order.
    pub samples: Vec<CurveSample>,
}

/// Computes the power curve plus 95% percentile bands from item
/// bootstrap resamples.
pub fn bootstrap_power_curves(
    matrix: &RatingMatrix,
    combiner: Combiner,
    scorer: Scorer,
    options: &CurveOptions,
    bootstrap: &BootstrapOptions,
    source: &RandomSource,
) -> Result<PowerCurveSet> {
    scorer.check_kind(combiner.output_kind())?;
    if bootstrap.n_samples == 0 {
        return Err(Error::InvalidConfig(
            "bootstrap needs at least one sample".into(),
        ));
    }
    let prepared = combiner.prepare(matrix)?;
    let point_view = curve_for_view(matrix, &prepared, scorer, options, source, 0)?;

    let n = matrix.n_items();
    let mut samples = Vec::with_capacity(bootstrap.n_samples);
    for s in 0..bootstrap.n_samples {
        let (indices, tag) = if bootstrap.resample_items {
            let mut rng = source.stream(&[task::BOOT, s as u64]);
            let indices: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            (indices, s as u64 + 1)
        } else {
            ((0..n).collect(), 0)
        };
        let view = matrix.select_items(&indices);
        let sampled = prepared.for_resample(&indices);
        let curve = curve_for_view(&view, &sampled, scorer, options, source, tag)?;
        samples.push(CurveSample {
            indices,
            means: curve.means,
        });
    }

    let mut point = assemble_curve(point_view, combiner, scorer, options, source);
    let n_k = point.means.len();
    let mut low = Vec::with_capacity(n_k);
    let mut high = Vec::with_capacity(n_k);
    for k in 0..n_k {
        let mut values: Vec<f64> = samples
            .iter()
            .filter_map(|s| s.means.get(k))
            .copied()
            .collect();
        match stats::central_band(&mut values) {
            Some((lo, hi)) => {
                low.push(lo);
                high.push(hi);
            }
            // No resample reached this survey size (possible on very
            // ragged data); fall back to the point value.
            None => {
                low.push(point.means[k]);
                high.push(point.means[k]);
            }
        }
    }
    point.ci_low = Some(low);
    point.ci_high = Some(high);
    point.metadata.bootstrap_samples = Some(bootstrap.n_samples);
    Ok(PowerCurveSet { point, samples })
}

/// A curve computed for one view of the data (the full matrix or one
/// bootstrap resample).
pub(crate) struct ViewCurve {
    pub(crate) means: Vec<f64>,
    pub(crate) coverage: Vec<f64>,
}

/// Computes curve values for `view`. `sample_tag` keys every rng stream
/// (0 = the point computation, `s + 1` = bootstrap sample `s`).
pub(crate) fn curve_for_view(
    view: &RatingMatrix,
    prepared: &PreparedCombiner,
    scorer: Scorer,
    options: &CurveOptions,
    source: &RandomSource,
    sample_tag: u64,
) -> Result<ViewCurve> {
    let r = options.reference.raters();
    if r == 0 {
        return Err(Error::InvalidConfig(
            "reference panels need at least one rater".into(),
        ));
    }
    if options.subset_cap == 0 {
        return Err(Error::InvalidConfig("subset cap must be positive".into()));
    }
    let max_raters = view.max_raters();
    if max_raters <= r {
        return Err(Error::InvalidConfig(format!(
            "a {r}-rater reference leaves no room for surveys in {max_raters} rating slots"
        )));
    }
    let max_k = max_raters - r;

    let mut tasks: Vec<(usize, usize, Vec<usize>)> = Vec::new();
    let mut per_k: Vec<usize> = Vec::with_capacity(max_k + 1);
    for k in 0..=max_k {
        let mut plan_rng = source.stream(&[task::SUBSETS, sample_tag, k as u64]);
        let plan = rater_subsets(max_raters, k, options.subset_cap, &mut plan_rng);
        per_k.push(plan.len());
        for (subset_idx, subset) in plan.subsets.into_iter().enumerate() {
            tasks.push((k, subset_idx, subset));
        }
    }

    let results: Vec<Result<Option<SubsetScore>>> = tasks
        .par_iter()
        .map(|(k, subset_idx, subset)| {
            evaluate_subset(
                view,
                prepared,
                scorer,
                options,
                source,
                sample_tag,
                *k,
                *subset_idx,
                subset,
            )
        })
        .collect();

    let mut means = Vec::with_capacity(max_k + 1);
    let mut coverage = Vec::with_capacity(max_k + 1);
    let mut results = results.into_iter();
    for (k, &n_subsets) in per_k.iter().enumerate() {
        let mut total = 0.0;
        let mut cov = 0.0;
        let mut scored = 0usize;
        for _ in 0..n_subsets {
            match results.next().expect("one result per task") {
                Ok(Some(subset_score)) => {
                    total += subset_score.score;
                    cov += subset_score.coverage;
                    scored += 1;
                }
                Ok(None) => {}
                Err(e) => return Err(e),
            }
        }
        if scored == 0 {
            return Err(Error::DegenerateLabels(format!(
                "every rater subset of size {k} was degenerate for the {} scorer",
                scorer.name()
            )));
        }
        means.push(total / scored as f64);
        coverage.push(cov / scored as f64);
    }
    Ok(ViewCurve { means, coverage })
}

fn assemble_curve(
    view: ViewCurve,
    combiner: Combiner,
    scorer: Scorer,
    options: &CurveOptions,
    source: &RandomSource,
) -> PowerCurve {
    PowerCurve {
        k_values: (0..view.means.len()).collect(),
        means: view.means,
        ci_low: None,
        ci_high: None,
        classifier_score: None,
        metadata: CurveMetadata {
            combiner: combiner.name().to_owned(),
            scorer: scorer.name().to_owned(),
            seed: source.seed(),
            subset_cap: options.subset_cap,
            reference_raters: options.reference.raters(),
            bootstrap_samples: None,
            coverage: view.coverage,
        },
    }
}

struct SubsetScore {
    score: f64,
    coverage: f64,
}

/// Pools one subset's labels per item and scores against the unused
/// slots. `Ok(None)` means the subset produced only references the
/// scorer is undefined on (it is skipped, not an error).
#[allow(clippy::too_many_arguments)]
fn evaluate_subset(
    view: &RatingMatrix,
    prepared: &PreparedCombiner,
    scorer: Scorer,
    options: &CurveOptions,
    source: &RandomSource,
    sample_tag: u64,
    k: usize,
    subset_idx: usize,
    subset: &[usize],
) -> Result<Option<SubsetScore>> {
    let n_labels = view.label_space().len();
    let mut predictions: Vec<Option<Prediction>> = vec![None; view.n_items()];
    for (idx, slot) in predictions.iter_mut().enumerate() {
        let row = view.row(idx);
        // A subset applies to an item only when the item has every slot.
        if subset.iter().any(|&s| s >= row.len()) {
            continue;
        }
        let mut counts = LabelCounts::zeros(n_labels);
        for &s in subset {
            counts.add(row[s]);
        }
        let prediction = prepared
            .combine_counts_lazy(&counts, idx, || {
                source.stream(&[
                    task::TIE,
                    sample_tag,
                    k as u64,
                    subset_idx as u64,
                    stable_id_hash(view.item_id(idx)),
                ])
            })
            .map_err(|e| curve_error(k, subset, e))?;
        *slot = Some(prediction);
    }
    let refs: Vec<Option<&Prediction>> = predictions.iter().map(Option::as_ref).collect();
    let unused: Vec<usize> = (0..view.max_raters())
        .filter(|s| !subset.contains(s))
        .collect();

    match options.reference {
        ReferenceMode::SingleRater => match score_against_slots(&refs, view, scorer, Some(&unused))
        {
            Ok(detail) => Ok(Some(SubsetScore {
                score: detail.value,
                coverage: detail.coverage,
            })),
            Err(Error::DegenerateLabels(_)) => Ok(None),
            Err(e) => Err(curve_error(k, subset, e)),
        },
        ReferenceMode::PluralityOf(r) => score_against_panels(
            view,
            &refs,
            scorer,
            &unused,
            r,
            options.subset_cap,
            source,
            sample_tag,
            k,
            subset_idx,
        )
        .map_err(|e| curve_error(k, subset, e)),
    }
}

/// Scores predictions against plurality votes of `r`-rater panels drawn
/// from the unused slots.
#[allow(clippy::too_many_arguments)]
fn score_against_panels(
    view: &RatingMatrix,
    refs: &[Option<&Prediction>],
    scorer: Scorer,
    unused: &[usize],
    r: usize,
    cap: usize,
    source: &RandomSource,
    sample_tag: u64,
    k: usize,
    subset_idx: usize,
) -> Result<Option<SubsetScore>> {
    let n_labels = view.label_space().len();
    let mut plan_rng = source.stream(&[task::REF_SUBSETS, sample_tag, k as u64, subset_idx as u64]);
    let panels = rater_subsets_capped(unused, r, cap, &mut plan_rng);
    debug_assert!(!panels.is_empty(), "k range guarantees r unused slots");

    let mut total = 0.0;
    let mut scored = 0usize;
    let mut coverage = 0.0;
    let mut pairs: Vec<(&Prediction, Label)> = Vec::with_capacity(view.n_items());
    let mut panel_labels: Vec<Label> = Vec::with_capacity(r);
    for (panel_idx, panel) in panels.iter().enumerate() {
        pairs.clear();
        for &idx in view.canonical_order() {
            let idx = idx as usize;
            let row = view.row(idx);
            if panel.iter().any(|&s| s >= row.len()) {
                continue;
            }
            let Some(prediction) = refs[idx] else {
                continue;
            };
            panel_labels.clear();
            panel_labels.extend(panel.iter().map(|&s| row[s]));
            let counts = LabelCounts::tally(&panel_labels, n_labels);
            let max = counts.counts().iter().copied().max().expect("labels exist");
            let unique = max > 0 && counts.counts().iter().filter(|&&x| x == max).count() == 1;
            let winner = if unique {
                let leader = counts.counts().iter().position(|&x| x == max).unwrap();
                Label(leader as u16)
            } else {
                let mut rng = source.stream(&[
                    task::REF_TIE,
                    sample_tag,
                    k as u64,
                    subset_idx as u64,
                    panel_idx as u64,
                    stable_id_hash(view.item_id(idx)),
                ]);
                crate::combiners::plurality_of_counts(&counts, &mut rng)
            };
            pairs.push((prediction, winner));
        }
        coverage += pairs.len() as f64 / view.n_items() as f64;
        if pairs.is_empty() {
            continue;
        }
        match scorer.score(&pairs, n_labels) {
            Ok(score) => {
                total += score;
                scored += 1;
            }
            Err(Error::DegenerateLabels(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    if scored == 0 {
        return Ok(None);
    }
    Ok(Some(SubsetScore {
        score: total / scored as f64,
        coverage: coverage / panels.len() as f64,
    }))
}

fn curve_error(k: usize, subset: &[usize], source: Error) -> Error {
    match source {
        already @ Error::CurveEvaluation { .. } => already,
        other => Error::CurveEvaluation {
            k,
            subset: format!("{subset:?}"),
            source: Box::new(other),
        },
    }
}
