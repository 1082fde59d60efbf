//! Relevance and redundancy filtering with symmetric uncertainty.
//!
//! Relevance is SU(attr, label) = 2 I / (H(attr) + H(label)) over co-observed
//! records; attributes under the relevance threshold go first, then a single
//! descending-relevance pass drops any attribute dominated by an
//! already-retained one (SU between the two at least the candidate's label
//! SU). Only retained-so-far attributes are checked, never all pairs.

use crate::ingest::{AttrId, Dataset, LABEL_ATTR};
use crate::significance::ProbabilityTable;

use super::{
    drop_unusable, DiscretizedView, FeatureSubset, RemovalReason, RemovedAttr, RetainedAttr,
    SelectError, SelectionConfig,
};

/// Second argument of a symmetric-uncertainty computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SuTarget {
    Attr(AttrId),
    Label,
}

/// SU(a, b) = 2 I(a;b) / (H(a) + H(b)) in [0, 1], computed over records where
/// both sides are observed; 0 when either side has zero entropy there.
pub fn symmetric_uncertainty(
    view: &DiscretizedView,
    a: AttrId,
    b: SuTarget,
) -> Result<f64, SelectError> {
    let bins_a = view.bins_for(a).ok_or(SelectError::UnknownAttribute(a))?;
    let n_a = bins_a.bin_count().max(1);
    let (n_b, pairs) = match b {
        SuTarget::Attr(other) => {
            let bins_b = view.bins_for(other).ok_or(SelectError::UnknownAttribute(other))?;
            let pairs: Vec<(usize, usize)> = (0..view.n_records())
                .filter_map(|r| match (view.bin_index(r, a), view.bin_index(r, other)) {
                    (Some(x), Some(y)) => Some((x, y)),
                    _ => None,
                })
                .collect();
            (bins_b.bin_count().max(1), pairs)
        }
        SuTarget::Label => {
            let pairs: Vec<(usize, usize)> = (0..view.n_records())
                .filter_map(|r| match (view.bin_index(r, a), view.labels()[r]) {
                    (Some(x), Some(label)) => Some((x, label.code() as usize)),
                    _ => None,
                })
                .collect();
            (crate::ingest::CLASS_COUNT, pairs)
        }
    };
    if pairs.is_empty() {
        let other = match b {
            SuTarget::Attr(other) => other,
            SuTarget::Label => LABEL_ATTR,
        };
        return Err(SelectError::NoCoverage { a, b: other });
    }
    let table = ProbabilityTable::from_pairs(pairs, n_a, n_b);
    let h_a = table.entropy_f();
    let h_b = table.entropy_c();
    if h_a <= 0.0 || h_b <= 0.0 {
        return Ok(0.0);
    }
    Ok(2.0 * table.mutual_information_standard() / (h_a + h_b))
}

/// Filter stage: drop unusable attributes, then low-relevance ones, then
/// redundant ones. Retained attributes come back in descending label-SU
/// order (ties toward the lower id), each carrying its label SU as score.
///
/// An empty selection (nothing passes the threshold) is reported, not fatal:
/// the subset comes back with every attribute removed.
pub fn filter_select(
    dataset: &Dataset,
    view: &DiscretizedView,
    config: &SelectionConfig,
) -> Result<FeatureSubset, SelectError> {
    let base = drop_unusable(dataset, config);
    let mut removed = base.removed;

    // relevance against the label; no label coverage counts as zero
    let mut candidates: Vec<(AttrId, f64)> = Vec::new();
    for retained in &base.retained {
        let su = match symmetric_uncertainty(view, retained.id, SuTarget::Label) {
            Ok(su) => su,
            Err(SelectError::NoCoverage { .. }) => 0.0,
            Err(e) => return Err(e),
        };
        if su >= config.relevance_threshold {
            candidates.push((retained.id, su));
        } else {
            removed.push(RemovedAttr {
                id: retained.id,
                reason: RemovalReason::LowRelevance,
                score: Some(su),
            });
        }
    }
    candidates.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));

    // redundancy pass against already-retained, higher-ranked attributes
    let mut retained: Vec<RetainedAttr> = Vec::new();
    'candidates: for (id, label_su) in candidates {
        for kept in &retained {
            let pair_su = match symmetric_uncertainty(view, kept.id, SuTarget::Attr(id)) {
                Ok(su) => su,
                Err(SelectError::NoCoverage { .. }) => 0.0,
                Err(e) => return Err(e),
            };
            if pair_su >= label_su {
                removed.push(RemovedAttr {
                    id,
                    reason: RemovalReason::Redundant,
                    score: Some(label_su),
                });
                continue 'candidates;
            }
        }
        retained.push(RetainedAttr { id, score: Some(label_su) });
    }

    let subset = FeatureSubset { retained, removed };
    if subset.is_empty_selection() {
        log::warn!(
            "filter stage of {:?}: no attribute reaches relevance threshold {}",
            view.dataset_name(),
            config.relevance_threshold
        );
    }
    Ok(subset)
}
