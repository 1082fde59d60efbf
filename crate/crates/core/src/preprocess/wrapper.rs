//! Accuracy-driven wrapper selection.
//!
//! Greedy forward search over the filter stage's survivors: each round scores
//! every remaining candidate by stratified k-fold naive-Bayes accuracy of the
//! current subset plus that candidate, accepts the best (ties to the lower
//! attribute id), and stops once the best improvement is at most epsilon.
//! The first round is always accepted against the majority-rate baseline, so
//! the output is never empty when candidates exist. Everything is
//! deterministic under the config seed.

use crate::eval::{fold_labels, FoldPlan};
use crate::ingest::AttrId;
use crate::nbc;

use super::{
    DiscretizedView, FeatureSubset, RemovalReason, RemovedAttr, RetainedAttr, SelectError,
    SelectionConfig,
};

/// One accepted greedy step.
#[derive(Debug, Clone, PartialEq)]
pub struct WrapperStep {
    pub attr: AttrId,
    /// Internal cross-validated accuracy of the subset after adding `attr`.
    pub accuracy: f64,
}

/// The recorded search: baseline majority rate plus each accepted step.
/// Accuracies are non-decreasing across steps by construction.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct WrapperTrace {
    pub baseline: f64,
    pub steps: Vec<WrapperStep>,
}

/// Internal CV accuracy of one candidate attribute set.
fn subset_accuracy(
    view: &DiscretizedView,
    attrs: &[AttrId],
    plan: &FoldPlan,
    alpha: f64,
) -> Result<f64, SelectError> {
    let labels = view.labels();
    let mut correct = 0usize;
    let mut total = 0usize;
    for fold in 0..plan.k() {
        let train = plan.train_indices(fold);
        let model = nbc::fit_on(view, attrs, alpha, &train)?;
        for &index in &plan.folds[fold] {
            let truth = labels[index].expect("folds hold labeled records");
            if model.posterior_binned(view, index).predicted == truth {
                correct += 1;
            }
            total += 1;
        }
    }
    Ok(correct as f64 / total.max(1) as f64)
}

/// Wrapper stage. Returns the selected subset (retained in acceptance order,
/// scored by accuracy at acceptance; candidates never added leave with reason
/// `below_wrapper_threshold`) together with the search trace.
///
/// An empty `start` yields an empty subset with an empty trace.
pub fn wrapper_select(
    view: &DiscretizedView,
    start: &FeatureSubset,
    config: &SelectionConfig,
) -> Result<(FeatureSubset, WrapperTrace), SelectError> {
    let mut removed = start.removed.clone();
    let mut candidates: Vec<AttrId> = start.retained_ids();
    candidates.sort_unstable();
    if candidates.is_empty() {
        return Ok((FeatureSubset { retained: Vec::new(), removed }, WrapperTrace::default()));
    }

    let labels = view.labels();
    let labeled: Vec<usize> = view.labeled_indices();
    if labeled.is_empty() {
        return Err(SelectError::Model(nbc::NbcError::EmptyTrainingSet));
    }
    let plan = fold_labels(labels, config.wrapper_folds.min(labeled.len()), config.seed)
        .map_err(|_| SelectError::Model(nbc::NbcError::EmptyTrainingSet))?;

    // majority-rate baseline of the empty model
    let mut class_counts = [0usize; crate::ingest::CLASS_COUNT];
    for &i in &labeled {
        class_counts[labels[i].expect("labeled index").code() as usize] += 1;
    }
    let baseline = *class_counts.iter().max().unwrap() as f64 / labeled.len() as f64;

    const NB_ALPHA: f64 = 1.0;
    let mut trace = WrapperTrace { baseline, steps: Vec::new() };
    let mut selected: Vec<RetainedAttr> = Vec::new();
    let mut selected_ids: Vec<AttrId> = Vec::new();
    let mut current = baseline;

    loop {
        let mut best: Option<(f64, AttrId)> = None;
        for &candidate in &candidates {
            let mut attrs = selected_ids.clone();
            attrs.push(candidate);
            let accuracy = subset_accuracy(view, &attrs, &plan, NB_ALPHA)?;
            // strict improvement keeps the lowest id on ties
            if best.is_none_or(|(best_acc, _)| accuracy > best_acc) {
                best = Some((accuracy, candidate));
            }
        }
        let Some((accuracy, attr)) = best else { break };
        let accept = selected_ids.is_empty() || accuracy - current > config.wrapper_epsilon;
        if !accept {
            break;
        }
        selected.push(RetainedAttr { id: attr, score: Some(accuracy) });
        selected_ids.push(attr);
        candidates.retain(|c| *c != attr);
        trace.steps.push(WrapperStep { attr, accuracy });
        current = accuracy;
        if candidates.is_empty() {
            break;
        }
    }

    for leftover in candidates {
        removed.push(RemovedAttr {
            id: leftover,
            reason: RemovalReason::BelowWrapperThreshold,
            score: None,
        });
    }
    Ok((FeatureSubset { retained: selected, removed }, trace))
}
