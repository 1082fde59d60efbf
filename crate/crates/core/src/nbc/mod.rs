//! Five-class naive Bayes classifier.
//!
//! Priors are (count(c)+a)/(N+5a) and per-attribute conditionals
//! (count(f,c)+a)/(count(c)+a*bins(F)) with Laplace smoothing a; records
//! missing an attribute are excluded from that attribute's counts only, and
//! missing attributes contribute nothing at prediction (they are
//! marginalized, not imputed). Posteriors accumulate in log space to avoid
//! underflow and expose the per-record evidence (the normalizing constant).

mod io;
mod prior_table;

pub use io::{read_model, read_model_file, write_model};
pub use prior_table::{builtin_table6, load_prior_table, seed_model_from_table, PriorTable};

use crate::ingest::{AttrId, ClassLabel, PatientRecord, CLASS_COUNT};
use crate::preprocess::{AttrBins, DiscretizedView, FeatureSubset};

#[derive(Debug, thiserror::Error)]
pub enum NbcError {
    #[error("no labeled records to fit on")]
    EmptyTrainingSet,
    #[error("smoothing alpha must be finite and nonnegative, got {0}")]
    InvalidAlpha(f64),
    #[error("attribute {0} is not discretized in this view")]
    UnknownAttribute(AttrId),
    #[error("prior table line {line}: expected {expected} fields, found {got}")]
    RowArity { line: usize, expected: usize, got: usize },
    #[error("prior table line {line}: {symptom} value {value} outside (0,1)")]
    ValueOutOfRange { line: usize, symptom: String, value: f64 },
    #[error("prior table header {0:?} matches neither the canonical nor the alias class names")]
    BadHeader(String),
    #[error("symptom {0:?} is not a schema attribute")]
    UnknownSymptomName(String),
    #[error("class priors must be nonnegative and sum to 1, got {0:?}")]
    InvalidPriors(Vec<f64>),
    #[error("model file line {line}: {message}")]
    BadModelFile { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Per-attribute class-conditional bin distributions.
#[derive(Debug, Clone, PartialEq)]
pub struct AttrConditional {
    pub attr: AttrId,
    pub name: String,
    pub bins: AttrBins,
    /// `cond[class][bin]` = P(bin | class); every row sums to 1.
    pub cond: Vec<Vec<f64>>,
}

/// A fitted model: class priors plus conditionals for the retained subset.
/// Immutable after fit; prediction is pure.
#[derive(Debug, Clone, PartialEq)]
pub struct NbcModel {
    alpha: f64,
    class_counts: [usize; CLASS_COUNT],
    class_priors: [f64; CLASS_COUNT],
    attrs: Vec<AttrConditional>,
}

/// Probability vector over the five severity classes.
#[derive(Debug, Clone, PartialEq)]
pub struct Posterior {
    pub probs: [f64; CLASS_COUNT],
    pub predicted: ClassLabel,
    /// Log of the per-record normalizing constant (the evidence).
    pub log_evidence: f64,
}

impl NbcModel {
    pub fn new(
        alpha: f64,
        class_counts: [usize; CLASS_COUNT],
        class_priors: [f64; CLASS_COUNT],
        attrs: Vec<AttrConditional>,
    ) -> Self {
        NbcModel { alpha, class_counts, class_priors, attrs }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn class_counts(&self) -> &[usize; CLASS_COUNT] {
        &self.class_counts
    }

    pub fn class_priors(&self) -> &[f64; CLASS_COUNT] {
        &self.class_priors
    }

    pub fn attrs(&self) -> &[AttrConditional] {
        &self.attrs
    }

    pub fn retained_ids(&self) -> Vec<AttrId> {
        self.attrs.iter().map(|a| a.attr).collect()
    }

    /// Classes fitted with a zero prior (possible only with alpha = 0).
    pub fn zero_prior_classes(&self) -> Vec<ClassLabel> {
        ClassLabel::ALL
            .into_iter()
            .filter(|c| self.class_priors[c.code() as usize] == 0.0)
            .collect()
    }

    /// Posterior over classes given per-attribute bin assignments.
    pub fn posterior_with(&self, bin_for: impl Fn(&AttrConditional) -> Option<usize>) -> Posterior {
        let mut logp = [0.0f64; CLASS_COUNT];
        for (c, slot) in logp.iter_mut().enumerate() {
            *slot = self.class_priors[c].ln();
        }
        for conditional in &self.attrs {
            if let Some(bin) = bin_for(conditional) {
                for (c, slot) in logp.iter_mut().enumerate() {
                    *slot += conditional.cond[c][bin].ln();
                }
            }
        }
        let max = logp.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut probs = [0.0f64; CLASS_COUNT];
        let mut sum = 0.0;
        for (c, lp) in logp.iter().enumerate() {
            let p = (lp - max).exp();
            probs[c] = p;
            sum += p;
        }
        for p in probs.iter_mut() {
            *p /= sum;
        }
        let mut predicted = 0usize;
        for (c, p) in probs.iter().enumerate() {
            if *p > probs[predicted] {
                predicted = c;
            }
        }
        Posterior {
            probs,
            predicted: ClassLabel::from_code(predicted as u8).expect("class index in range"),
            log_evidence: max + sum.ln(),
        }
    }

    /// Posterior for a raw record. Missing attributes are skipped; values
    /// outside an attribute's category set clamp to the nearest bin.
    pub fn posterior(&self, record: &PatientRecord) -> Posterior {
        self.posterior_with(|conditional| {
            record.value(conditional.attr).map(|value| {
                conditional.bins.bin_of(value).unwrap_or_else(|| {
                    log::warn!(
                        "patient {}: attribute {} value {} unseen at fit time, clamped to nearest bin",
                        record.patient_id,
                        conditional.attr,
                        value
                    );
                    conditional.bins.nearest_bin(value)
                })
            })
        })
    }

    /// Posterior for a record of an already-discretized view.
    pub fn posterior_binned(&self, view: &DiscretizedView, record: usize) -> Posterior {
        self.posterior_with(|conditional| view.bin_index(record, conditional.attr))
    }

    pub fn predict(&self, record: &PatientRecord) -> ClassLabel {
        self.posterior(record).predicted
    }
}

/// Fit on every labeled record of the view.
pub fn fit(view: &DiscretizedView, subset: &FeatureSubset, alpha: f64) -> Result<NbcModel, NbcError> {
    let indices: Vec<usize> = (0..view.n_records()).collect();
    fit_on(view, &subset.retained_ids(), alpha, &indices)
}

/// Fit on a subset of record indices (unlabeled ones are skipped).
pub fn fit_on(
    view: &DiscretizedView,
    attrs: &[AttrId],
    alpha: f64,
    indices: &[usize],
) -> Result<NbcModel, NbcError> {
    if !alpha.is_finite() || alpha < 0.0 {
        return Err(NbcError::InvalidAlpha(alpha));
    }
    let labels = view.labels();
    let mut class_counts = [0usize; CLASS_COUNT];
    let mut total = 0usize;
    for &i in indices {
        if let Some(label) = labels[i] {
            class_counts[label.code() as usize] += 1;
            total += 1;
        }
    }
    if total == 0 {
        return Err(NbcError::EmptyTrainingSet);
    }
    let denom = total as f64 + alpha * CLASS_COUNT as f64;
    let mut class_priors = [0.0f64; CLASS_COUNT];
    for (c, prior) in class_priors.iter_mut().enumerate() {
        *prior = (class_counts[c] as f64 + alpha) / denom;
    }

    let schema = view.schema();
    let mut conditionals = Vec::with_capacity(attrs.len());
    for &attr in attrs {
        let bins = view.bins_for(attr).ok_or(NbcError::UnknownAttribute(attr))?.clone();
        let n_bins = bins.bin_count();
        if n_bins == 0 {
            // attribute never observed; it can contribute nothing
            continue;
        }
        let mut counts = vec![vec![0usize; n_bins]; CLASS_COUNT];
        let mut present = [0usize; CLASS_COUNT];
        for &i in indices {
            if let (Some(label), Some(bin)) = (labels[i], view.bin_index(i, attr)) {
                counts[label.code() as usize][bin] += 1;
                present[label.code() as usize] += 1;
            }
        }
        let mut cond = vec![vec![0.0f64; n_bins]; CLASS_COUNT];
        for c in 0..CLASS_COUNT {
            let denom = present[c] as f64 + alpha * n_bins as f64;
            for b in 0..n_bins {
                cond[c][b] = if denom > 0.0 {
                    (counts[c][b] as f64 + alpha) / denom
                } else {
                    // alpha = 0 and no record of this class observed the
                    // attribute: fall back to uniform so rows still sum to 1
                    1.0 / n_bins as f64
                };
            }
        }
        conditionals.push(AttrConditional {
            attr,
            name: schema.name_of(attr).to_string(),
            bins,
            cond,
        });
    }
    Ok(NbcModel { alpha, class_counts, class_priors, attrs: conditionals })
}
