//! Filter and wrapper feature-selection stages.
//!
//! The filter stage removes unusable symptoms (identifier/unused attributes
//! and those beyond the missing-ratio cap), drops attributes whose symmetric
//! uncertainty against the label falls under the relevance threshold, and
//! eliminates redundant attributes dominated by a stronger one. The wrapper
//! stage then greedily grows a subset by internal cross-validated naive-Bayes
//! accuracy until improvements fall to the stopping epsilon.

mod discretize;
mod filter;
mod wrapper;

pub use discretize::{discretize, AttrBins, DiscretizedView};
pub use filter::{filter_select, symmetric_uncertainty, SuTarget};
pub use wrapper::{wrapper_select, WrapperStep, WrapperTrace};

use std::fmt;
use std::path::Path;

use crate::ingest::{AttrId, AttributeSchema, Dataset, PatientRecord};
use crate::nbc::NbcError;

#[derive(Debug, thiserror::Error)]
pub enum SelectError {
    #[error("discretization needs at least 2 bins, got {0}")]
    InvalidBinCount(usize),
    #[error("attributes {a} and {b} share no co-observed records")]
    NoCoverage { a: AttrId, b: AttrId },
    #[error("attribute {0} is not discretized in this view")]
    UnknownAttribute(AttrId),
    #[error("config line {line}: {message}")]
    InvalidConfig { line: usize, message: String },
    #[error("subset csv line {line}: {message}")]
    InvalidSubsetCsv { line: usize, message: String },
    #[error(transparent)]
    Model(#[from] NbcError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Thresholds and determinism knobs for both selection stages.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionConfig {
    /// Attributes missing in more than this fraction of records are dropped.
    pub missing_ratio_cap: f64,
    /// Minimum symmetric uncertainty against the label (delta).
    pub relevance_threshold: f64,
    /// Wrapper stops when the best accuracy improvement is at most this.
    pub wrapper_epsilon: f64,
    /// Folds of the wrapper's internal stratified cross-validation.
    pub wrapper_folds: usize,
    /// Seed for fold assignment (and any other randomized choice).
    pub seed: u64,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        SelectionConfig {
            missing_ratio_cap: 0.5,
            relevance_threshold: 0.01,
            wrapper_epsilon: 0.001,
            wrapper_folds: 5,
            seed: 0,
        }
    }
}

impl SelectionConfig {
    /// Parse a line-oriented `key = value` config. All keys are optional.
    pub fn parse(text: &str) -> Result<Self, SelectError> {
        let mut config = SelectionConfig::default();
        for (lineno, raw_line) in text.lines().enumerate() {
            let line = raw_line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let lineno = lineno + 1;
            let (key, value) = line.split_once('=').ok_or_else(|| SelectError::InvalidConfig {
                line: lineno,
                message: format!("expected `key = value`, found {line:?}"),
            })?;
            let key = key.trim();
            let value = value.trim();
            let bad = |message: String| SelectError::InvalidConfig { line: lineno, message };
            match key {
                "missing_ratio_cap" => {
                    config.missing_ratio_cap =
                        value.parse().map_err(|_| bad(format!("bad fraction {value:?}")))?
                }
                "relevance_threshold" => {
                    config.relevance_threshold =
                        value.parse().map_err(|_| bad(format!("bad threshold {value:?}")))?
                }
                "wrapper_epsilon" => {
                    config.wrapper_epsilon =
                        value.parse().map_err(|_| bad(format!("bad epsilon {value:?}")))?
                }
                "wrapper_folds" => {
                    config.wrapper_folds =
                        value.parse().map_err(|_| bad(format!("bad fold count {value:?}")))?
                }
                "seed" => {
                    config.seed = value.parse().map_err(|_| bad(format!("bad seed {value:?}")))?
                }
                other => return Err(bad(format!("unknown key {other:?}"))),
            }
        }
        config.validate()?;
        Ok(config)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, SelectError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<(), SelectError> {
        let check = |name: &str, v: f64| {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(SelectError::InvalidConfig {
                    line: 0,
                    message: format!("{name} must be finite and nonnegative, got {v}"),
                })
            }
        };
        check("missing_ratio_cap", self.missing_ratio_cap)?;
        if self.missing_ratio_cap > 1.0 {
            return Err(SelectError::InvalidConfig {
                line: 0,
                message: format!("missing_ratio_cap must be in [0,1], got {}", self.missing_ratio_cap),
            });
        }
        check("relevance_threshold", self.relevance_threshold)?;
        if self.wrapper_epsilon < 0.0 || self.wrapper_epsilon.is_nan() {
            return Err(SelectError::InvalidConfig {
                line: 0,
                message: format!("wrapper_epsilon must be nonnegative, got {}", self.wrapper_epsilon),
            });
        }
        if self.wrapper_folds < 2 {
            return Err(SelectError::InvalidConfig {
                line: 0,
                message: format!("wrapper_folds must be at least 2, got {}", self.wrapper_folds),
            });
        }
        Ok(())
    }
}

/// Why an attribute left the candidate set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RemovalReason {
    Identifier,
    ExcessMissing,
    LowRelevance,
    Redundant,
    BelowWrapperThreshold,
}

impl RemovalReason {
    pub fn as_str(self) -> &'static str {
        match self {
            RemovalReason::Identifier => "identifier",
            RemovalReason::ExcessMissing => "excess_missing",
            RemovalReason::LowRelevance => "low_relevance",
            RemovalReason::Redundant => "redundant",
            RemovalReason::BelowWrapperThreshold => "below_wrapper_threshold",
        }
    }

    pub fn parse(token: &str) -> Option<Self> {
        Some(match token {
            "identifier" => RemovalReason::Identifier,
            "excess_missing" => RemovalReason::ExcessMissing,
            "low_relevance" => RemovalReason::LowRelevance,
            "redundant" => RemovalReason::Redundant,
            "below_wrapper_threshold" => RemovalReason::BelowWrapperThreshold,
            _ => return None,
        })
    }
}

impl fmt::Display for RemovalReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RetainedAttr {
    pub id: AttrId,
    /// Stage score: symmetric uncertainty against the label for the filter,
    /// internal accuracy at acceptance for the wrapper.
    pub score: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RemovedAttr {
    pub id: AttrId,
    pub reason: RemovalReason,
    /// Supporting number where one exists: the missing ratio for
    /// `excess_missing`, the label SU for relevance/redundancy removals.
    pub score: Option<f64>,
}

/// Outcome of a selection stage: retained ids in stage order plus removal
/// provenance. Retained and removed ids partition the symptom attributes.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeatureSubset {
    pub retained: Vec<RetainedAttr>,
    pub removed: Vec<RemovedAttr>,
}

impl FeatureSubset {
    pub fn retained_ids(&self) -> Vec<AttrId> {
        self.retained.iter().map(|r| r.id).collect()
    }

    pub fn contains(&self, id: AttrId) -> bool {
        self.retained.iter().any(|r| r.id == id)
    }

    pub fn removal_reason(&self, id: AttrId) -> Option<RemovalReason> {
        self.removed.iter().find(|r| r.id == id).map(|r| r.reason)
    }

    /// True when no attribute survived the stage.
    pub fn is_empty_selection(&self) -> bool {
        self.retained.is_empty()
    }

    /// `attribute_id,name,status,reason,score` with retained rows first.
    pub fn to_csv(&self, schema: &AttributeSchema) -> String {
        let mut out = String::from("attribute_id,name,status,reason,score\n");
        for r in &self.retained {
            out.push_str(&format!(
                "{},{},retained,,{}\n",
                r.id,
                schema.name_of(r.id),
                r.score.map(fmt_score).unwrap_or_default()
            ));
        }
        let mut removed: Vec<&RemovedAttr> = self.removed.iter().collect();
        removed.sort_by_key(|r| r.id);
        for r in removed {
            out.push_str(&format!(
                "{},{},removed,{},{}\n",
                r.id,
                schema.name_of(r.id),
                r.reason,
                r.score.map(fmt_score).unwrap_or_default()
            ));
        }
        out
    }

    pub fn from_csv(text: &str, _schema: &AttributeSchema) -> Result<Self, SelectError> {
        let mut subset = FeatureSubset::default();
        for (lineno, raw_line) in text.lines().enumerate() {
            let line = raw_line.trim();
            if line.is_empty() || (lineno == 0 && line.starts_with("attribute_id")) {
                continue;
            }
            let lineno = lineno + 1;
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 5 {
                return Err(SelectError::InvalidSubsetCsv {
                    line: lineno,
                    message: format!("expected 5 fields, found {}", fields.len()),
                });
            }
            let id: u8 = fields[0].parse().map_err(|_| SelectError::InvalidSubsetCsv {
                line: lineno,
                message: format!("bad attribute id {:?}", fields[0]),
            })?;
            let id = AttrId::new(id).map_err(|_| SelectError::InvalidSubsetCsv {
                line: lineno,
                message: format!("attribute id {} outside 1..=76", fields[0]),
            })?;
            let score = if fields[4].is_empty() {
                None
            } else {
                Some(fields[4].parse().map_err(|_| SelectError::InvalidSubsetCsv {
                    line: lineno,
                    message: format!("bad score {:?}", fields[4]),
                })?)
            };
            match fields[2] {
                "retained" => subset.retained.push(RetainedAttr { id, score }),
                "removed" => {
                    let reason =
                        RemovalReason::parse(fields[3]).ok_or_else(|| SelectError::InvalidSubsetCsv {
                            line: lineno,
                            message: format!("unknown removal reason {:?}", fields[3]),
                        })?;
                    subset.removed.push(RemovedAttr { id, reason, score });
                }
                other => {
                    return Err(SelectError::InvalidSubsetCsv {
                        line: lineno,
                        message: format!("unknown status {other:?}"),
                    })
                }
            }
        }
        Ok(subset)
    }
}

fn fmt_score(v: f64) -> String {
    format!("{v}")
}

/// Remove identifier/unused attributes and those missing in more than
/// `missing_ratio_cap` of the records. Everything else stays, in id order.
pub fn drop_unusable(dataset: &Dataset, config: &SelectionConfig) -> FeatureSubset {
    let schema = dataset.schema();
    let n = dataset.len();
    let mut subset = FeatureSubset::default();
    for id in schema.symptom_ids() {
        let descriptor = schema.descriptor(id).expect("symptom ids come from the schema");
        if descriptor.kind.is_excluded() {
            subset.removed.push(RemovedAttr { id, reason: RemovalReason::Identifier, score: None });
            continue;
        }
        let missing = dataset.records().iter().filter(|r| r.value(id).is_none()).count();
        let ratio = if n == 0 { 0.0 } else { missing as f64 / n as f64 };
        if ratio > config.missing_ratio_cap {
            subset.removed.push(RemovedAttr {
                id,
                reason: RemovalReason::ExcessMissing,
                score: Some(ratio),
            });
        } else {
            subset.retained.push(RetainedAttr { id, score: None });
        }
    }
    subset
}

/// Number of retained attributes with a present value in this record.
pub fn count_retained_per_record(record: &PatientRecord, after: &FeatureSubset) -> usize {
    after.retained.iter().filter(|r| record.value(r.id).is_some()).count()
}
