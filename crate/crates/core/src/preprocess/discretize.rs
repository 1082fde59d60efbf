//! Equal-frequency discretization of continuous attributes.
//!
//! Categorical and binary attributes pass through as their documented
//! category sets; continuous and date-part attributes get equal-frequency bin
//! edges computed from the non-missing values. An attribute with fewer
//! distinct values than requested bins degrades to one bin per distinct value
//! and is flagged degenerate.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use crate::ingest::{label_of, AttrId, AttributeKind, AttributeSchema, ClassLabel, Dataset};

use super::SelectError;

/// Binning of one attribute.
#[derive(Debug, Clone, PartialEq)]
pub enum AttrBins {
    /// One bin per listed value, sorted ascending.
    Categories(Vec<f64>),
    /// Interior cut points, strictly increasing; values fall left of the
    /// first edge into bin 0 and right of the last into bin `len`.
    Edges(Vec<f64>),
}

impl AttrBins {
    pub fn bin_count(&self) -> usize {
        match self {
            AttrBins::Categories(values) => values.len(),
            AttrBins::Edges(edges) => edges.len() + 1,
        }
    }

    /// Bin index for a value; `None` for a category never listed.
    pub fn bin_of(&self, value: f64) -> Option<usize> {
        match self {
            AttrBins::Categories(values) => values.iter().position(|v| *v == value),
            AttrBins::Edges(edges) => Some(edges.partition_point(|e| *e < value)),
        }
    }

    /// Closest bin for out-of-vocabulary values (ties go to the lower bin).
    pub fn nearest_bin(&self, value: f64) -> usize {
        match self {
            AttrBins::Categories(values) => {
                let mut best = 0usize;
                let mut best_distance = f64::INFINITY;
                for (i, v) in values.iter().enumerate() {
                    let distance = (v - value).abs();
                    if distance < best_distance {
                        best = i;
                        best_distance = distance;
                    }
                }
                best
            }
            AttrBins::Edges(edges) => edges.partition_point(|e| *e < value),
        }
    }
}

/// A dataset projected onto bin indices, with labels pulled out.
#[derive(Debug, Clone)]
pub struct DiscretizedView {
    schema: Arc<AttributeSchema>,
    dataset_name: String,
    bins: BTreeMap<AttrId, AttrBins>,
    degenerate: BTreeSet<AttrId>,
    /// `assignments[record][slot]`: bin index or missing.
    assignments: Vec<Vec<Option<u16>>>,
    labels: Vec<Option<ClassLabel>>,
    patient_ids: Vec<i64>,
}

impl DiscretizedView {
    pub fn schema(&self) -> &Arc<AttributeSchema> {
        &self.schema
    }

    pub fn dataset_name(&self) -> &str {
        &self.dataset_name
    }

    pub fn n_records(&self) -> usize {
        self.assignments.len()
    }

    pub fn bin_index(&self, record: usize, attr: AttrId) -> Option<usize> {
        self.assignments[record][attr.slot()].map(|b| b as usize)
    }

    pub fn bins_for(&self, attr: AttrId) -> Option<&AttrBins> {
        self.bins.get(&attr)
    }

    pub fn is_degenerate(&self, attr: AttrId) -> bool {
        self.degenerate.contains(&attr)
    }

    /// Class labels by record; `None` covers both missing and out-of-range
    /// label cells.
    pub fn labels(&self) -> &[Option<ClassLabel>] {
        &self.labels
    }

    pub fn patient_ids(&self) -> &[i64] {
        &self.patient_ids
    }

    /// Records where the label is usable.
    pub fn labeled_indices(&self) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter_map(|(i, l)| l.map(|_| i))
            .collect()
    }

    /// Occupancy of each bin of one attribute (non-missing records only).
    pub fn bin_occupancy(&self, attr: AttrId) -> Vec<usize> {
        let Some(bins) = self.bins_for(attr) else { return Vec::new() };
        let mut counts = vec![0usize; bins.bin_count()];
        for row in &self.assignments {
            if let Some(b) = row[attr.slot()] {
                counts[b as usize] += 1;
            }
        }
        counts
    }
}

/// Discretize every eligible attribute of the dataset into at most `bins`
/// bins. Label cells become the view's label vector; identifier/unused
/// attributes are not binned.
pub fn discretize(dataset: &Dataset, bins: usize) -> Result<DiscretizedView, SelectError> {
    if bins < 2 {
        return Err(SelectError::InvalidBinCount(bins));
    }
    let schema = dataset.schema().clone();
    let mut bin_map: BTreeMap<AttrId, AttrBins> = BTreeMap::new();
    let mut degenerate: BTreeSet<AttrId> = BTreeSet::new();

    for descriptor in schema.descriptors() {
        if descriptor.kind.is_excluded() || descriptor.id == schema.label().id {
            continue;
        }
        let attr_bins = match descriptor.kind {
            AttributeKind::Binary | AttributeKind::Categorical => {
                AttrBins::Categories(descriptor.category_values().expect("kind has categories").to_vec())
            }
            AttributeKind::Continuous | AttributeKind::DatePart => {
                let mut values: Vec<f64> = dataset
                    .records()
                    .iter()
                    .filter_map(|r| r.value(descriptor.id))
                    .collect();
                values.sort_by(f64::total_cmp);
                let mut distinct = values.clone();
                distinct.dedup();
                if distinct.is_empty() {
                    // no observed values; nothing to bin
                    degenerate.insert(descriptor.id);
                    AttrBins::Categories(Vec::new())
                } else if distinct.len() < bins {
                    degenerate.insert(descriptor.id);
                    AttrBins::Categories(distinct)
                } else {
                    AttrBins::Edges(equal_frequency_edges(&values, bins))
                }
            }
            AttributeKind::Identifier | AttributeKind::Unused => unreachable!("excluded above"),
        };
        bin_map.insert(descriptor.id, attr_bins);
    }

    let mut assignments = Vec::with_capacity(dataset.len());
    let mut labels = Vec::with_capacity(dataset.len());
    let mut patient_ids = Vec::with_capacity(dataset.len());
    for record in dataset.records() {
        let mut row: Vec<Option<u16>> = vec![None; crate::ingest::ATTRIBUTE_COUNT];
        for (attr, attr_bins) in &bin_map {
            if let Some(value) = record.value(*attr) {
                let bin = attr_bins.bin_of(value).unwrap_or_else(|| {
                    log::warn!(
                        "patient {}: attribute {} value {} outside its category set, clamped",
                        record.patient_id,
                        attr,
                        value
                    );
                    attr_bins.nearest_bin(value)
                });
                row[attr.slot()] = Some(bin as u16);
            }
        }
        assignments.push(row);
        labels.push(label_of(record).ok());
        patient_ids.push(record.patient_id);
    }

    Ok(DiscretizedView {
        schema,
        dataset_name: dataset.name.clone(),
        bins: bin_map,
        degenerate,
        assignments,
        labels,
        patient_ids,
    })
}

/// Interior cut points at the rounded rank quantiles of the sorted sample,
/// slid off duplicate runs so edges stay strictly increasing.
fn equal_frequency_edges(sorted: &[f64], bins: usize) -> Vec<f64> {
    let n = sorted.len();
    let mut edges: Vec<f64> = Vec::with_capacity(bins - 1);
    for i in 1..bins {
        let target = ((i * n) + bins / 2) / bins;
        let target = target.clamp(1, n - 1);
        // find the first strict boundary at or after the target rank
        let mut cut = None;
        for p in target..n {
            if sorted[p - 1] < sorted[p] {
                cut = Some(p);
                break;
            }
        }
        if cut.is_none() {
            for p in (1..target).rev() {
                if sorted[p - 1] < sorted[p] {
                    cut = Some(p);
                    break;
                }
            }
        }
        if let Some(p) = cut {
            let edge = (sorted[p - 1] + sorted[p]) / 2.0;
            if edges.last().is_none_or(|last| edge > *last) {
                edges.push(edge);
            }
        }
    }
    edges
}
