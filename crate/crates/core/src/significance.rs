//! Entropy, mutual information, and the symptom significance index.
//!
//! Significance of a symptom F against the disease C is S(F,C) = I(F,C)/I0,
//! where I0 is the prior entropy of C. By default I uses the standard
//! identity H(F) + H(C) - H(F,C) and C is collapsed to presence/absence; the
//! alternative "literal" form H(F,C) + H(F) + H(C) (the per-event entropy sum)
//! is kept behind a mode flag and recorded next to the standard value, since
//! the two disagree and only the standard form is bounded by I0. Logarithms
//! are base 2 throughout; the base cancels in S.

use crate::ingest::{AttrId, ClassLabel, CLASS_COUNT};
use crate::preprocess::{DiscretizedView, FeatureSubset};

#[derive(Debug, thiserror::Error)]
pub enum SignificanceError {
    #[error("distribution is empty or sums to zero")]
    EmptyDistribution,
    #[error("attribute {0} has no record co-observed with a label")]
    NoCoverage(AttrId),
    #[error("labels are degenerate: prior entropy is zero")]
    DegenerateLabels,
    #[error("attribute {0} is not discretized in this view")]
    UnknownAttribute(AttrId),
}

/// Which mutual-information expression to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MiMode {
    /// H(F) + H(C) - H(F,C).
    #[default]
    Standard,
    /// H(F,C) + H(F) + H(C), the printed per-event entropy sum.
    Literal,
}

impl MiMode {
    pub fn as_str(self) -> &'static str {
        match self {
            MiMode::Standard => "standard",
            MiMode::Literal => "literal",
        }
    }
}

/// How class labels collapse before entropy computations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LabelCollapse {
    /// Absence vs any presence, matching the two-point prior entropy.
    #[default]
    Binary,
    /// All five severity classes.
    Multiclass,
}

impl LabelCollapse {
    pub fn as_str(self) -> &'static str {
        match self {
            LabelCollapse::Binary => "binary",
            LabelCollapse::Multiclass => "multiclass",
        }
    }

    pub fn class_count(self) -> usize {
        match self {
            LabelCollapse::Binary => 2,
            LabelCollapse::Multiclass => CLASS_COUNT,
        }
    }

    pub fn collapse(self, label: ClassLabel) -> usize {
        match self {
            LabelCollapse::Binary => (label.code() as usize).min(1),
            LabelCollapse::Multiclass => label.code() as usize,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SignificanceMode {
    pub mi: MiMode,
    pub collapse: LabelCollapse,
}

/// How cell probabilities are estimated from counts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EstimationMode {
    /// Raw empirical frequencies.
    Raw,
    /// Additive smoothing over the joint cells.
    Laplace(f64),
}

/// Joint counts n(f,c) over symptom bins and class codes, with marginals.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityTable {
    counts: Vec<Vec<u32>>,
    row_totals: Vec<u32>,
    col_totals: Vec<u32>,
    total: u32,
    mode: EstimationMode,
}

impl ProbabilityTable {
    pub fn from_counts(counts: Vec<Vec<u32>>, mode: EstimationMode) -> Self {
        let n_f = counts.len();
        let n_c = counts.first().map_or(0, |row| row.len());
        let mut row_totals = vec![0u32; n_f];
        let mut col_totals = vec![0u32; n_c];
        let mut total = 0u32;
        for (f, row) in counts.iter().enumerate() {
            assert_eq!(row.len(), n_c, "ragged contingency table");
            for (c, n) in row.iter().enumerate() {
                row_totals[f] += n;
                col_totals[c] += n;
                total += n;
            }
        }
        ProbabilityTable { counts, row_totals, col_totals, total, mode }
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, usize)>, n_f: usize, n_c: usize) -> Self {
        let mut counts = vec![vec![0u32; n_c]; n_f];
        for (f, c) in pairs {
            counts[f][c] += 1;
        }
        Self::from_counts(counts, EstimationMode::Raw)
    }

    pub fn total(&self) -> u32 {
        self.total
    }

    pub fn count(&self, f: usize, c: usize) -> u32 {
        self.counts[f][c]
    }

    fn smoothing(&self) -> f64 {
        match self.mode {
            EstimationMode::Raw => 0.0,
            EstimationMode::Laplace(alpha) => alpha,
        }
    }

    fn cells(&self) -> f64 {
        (self.counts.len() * self.counts.first().map_or(0, |r| r.len())) as f64
    }

    /// P(f,c) under the table's estimation mode.
    pub fn joint(&self, f: usize, c: usize) -> f64 {
        let alpha = self.smoothing();
        (self.counts[f][c] as f64 + alpha) / (self.total as f64 + alpha * self.cells())
    }

    pub fn marginal_f(&self, f: usize) -> f64 {
        (0..self.col_totals.len()).map(|c| self.joint(f, c)).sum()
    }

    pub fn marginal_c(&self, c: usize) -> f64 {
        (0..self.row_totals.len()).map(|f| self.joint(f, c)).sum()
    }

    pub fn entropy_f(&self) -> f64 {
        entropy_of_probs((0..self.counts.len()).map(|f| self.marginal_f(f)))
    }

    pub fn entropy_c(&self) -> f64 {
        entropy_of_probs((0..self.col_totals.len()).map(|c| self.marginal_c(c)))
    }

    pub fn joint_entropy(&self) -> f64 {
        entropy_of_probs(
            self.counts
                .iter()
                .enumerate()
                .flat_map(|(f, row)| (0..row.len()).map(move |c| (f, c)))
                .map(|(f, c)| self.joint(f, c)),
        )
    }

    /// I(F;C) = H(F) + H(C) - H(F,C), in bits.
    pub fn mutual_information_standard(&self) -> f64 {
        self.entropy_f() + self.entropy_c() - self.joint_entropy()
    }

    /// The per-event entropy sum H(F,C) + H(F) + H(C), in bits.
    pub fn mutual_information_literal(&self) -> f64 {
        self.joint_entropy() + self.entropy_f() + self.entropy_c()
    }
}

/// Shannon entropy in bits of a weight vector, normalized internally.
/// Zero weights contribute nothing (0 log 0 = 0).
pub fn entropy(weights: &[f64]) -> Result<f64, SignificanceError> {
    if weights.is_empty() || weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(SignificanceError::EmptyDistribution);
    }
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(SignificanceError::EmptyDistribution);
    }
    Ok(entropy_of_probs(weights.iter().map(|w| w / total)))
}

fn entropy_of_probs(probs: impl IntoIterator<Item = f64>) -> f64 {
    let mut h = 0.0;
    for p in probs {
        if p > 0.0 {
            h -= p * p.log2();
        }
    }
    h
}

/// Count pairs (attribute bin, collapsed class) over records where both are
/// observed, as a raw-frequency table.
pub fn contingency_table(
    view: &DiscretizedView,
    attr: AttrId,
    collapse: LabelCollapse,
) -> Result<ProbabilityTable, SignificanceError> {
    let bins = view.bins_for(attr).ok_or(SignificanceError::UnknownAttribute(attr))?;
    let n_f = bins.bin_count().max(1);
    let n_c = collapse.class_count();
    let mut pairs = Vec::new();
    for (record, label) in view.labels().iter().enumerate() {
        if let (Some(bin), Some(label)) = (view.bin_index(record, attr), label) {
            pairs.push((bin, collapse.collapse(*label)));
        }
    }
    if pairs.is_empty() {
        return Err(SignificanceError::NoCoverage(attr));
    }
    Ok(ProbabilityTable::from_pairs(pairs, n_f, n_c))
}

/// Mutual information in bits between one symptom and the (collapsed) disease
/// variable, over records where the symptom is present and the label usable.
pub fn mutual_information(
    view: &DiscretizedView,
    attr: AttrId,
    mode: MiMode,
    collapse: LabelCollapse,
) -> Result<f64, SignificanceError> {
    let table = contingency_table(view, attr, collapse)?;
    Ok(match mode {
        MiMode::Standard => table.mutual_information_standard(),
        MiMode::Literal => table.mutual_information_literal(),
    })
}

/// Prior entropy of the disease variable in bits, over usable labels.
pub fn prior_entropy(
    labels: &[Option<ClassLabel>],
    collapse: LabelCollapse,
) -> Result<f64, SignificanceError> {
    let mut counts = vec![0.0f64; collapse.class_count()];
    let mut any = false;
    for label in labels.iter().flatten() {
        counts[collapse.collapse(*label)] += 1.0;
        any = true;
    }
    if !any {
        return Err(SignificanceError::EmptyDistribution);
    }
    entropy(&counts)
}

/// One symptom's significance against the disease variable.
#[derive(Debug, Clone, PartialEq)]
pub struct SignificanceScore {
    pub attr: AttrId,
    /// Mutual information in bits.
    pub i_bits: f64,
    /// Prior entropy of the disease variable in bits.
    pub i0_bits: f64,
    /// Significance index I/I0.
    pub s: f64,
    /// 1-based position after ranking.
    pub rank: usize,
}

/// Score one symptom. The label collapse used for I matches the one used for
/// I0 by construction.
pub fn significance(
    view: &DiscretizedView,
    attr: AttrId,
    mode: SignificanceMode,
) -> Result<SignificanceScore, SignificanceError> {
    let i0 = prior_entropy(view.labels(), mode.collapse)?;
    if i0 <= 0.0 {
        return Err(SignificanceError::DegenerateLabels);
    }
    let i = mutual_information(view, attr, mode.mi, mode.collapse)?;
    Ok(SignificanceScore { attr, i_bits: i, i0_bits: i0, s: i / i0, rank: 1 })
}

/// Rank every retained symptom by descending significance; ties break toward
/// the lower attribute id. Attributes without label coverage score zero.
pub fn rank_symptoms(
    view: &DiscretizedView,
    subset: &FeatureSubset,
    mode: SignificanceMode,
) -> Result<Vec<SignificanceScore>, SignificanceError> {
    let mut scores = Vec::with_capacity(subset.retained.len());
    for retained in &subset.retained {
        match significance(view, retained.id, mode) {
            Ok(score) => scores.push(score),
            Err(SignificanceError::NoCoverage(attr)) => {
                let i0 = prior_entropy(view.labels(), mode.collapse)?;
                scores.push(SignificanceScore { attr, i_bits: 0.0, i0_bits: i0, s: 0.0, rank: 1 });
            }
            Err(e) => return Err(e),
        }
    }
    scores.sort_by(|a, b| b.s.total_cmp(&a.s).then(a.attr.cmp(&b.attr)));
    for (i, score) in scores.iter_mut().enumerate() {
        score.rank = i + 1;
    }
    Ok(scores)
}

/// Standard and literal rankings side by side; equality between the two is
/// never assumed.
#[derive(Debug, Clone, PartialEq)]
pub struct Ranking {
    pub standard: Vec<SignificanceScore>,
    pub literal: Vec<SignificanceScore>,
    pub collapse: LabelCollapse,
}

impl Ranking {
    pub fn compute(
        view: &DiscretizedView,
        subset: &FeatureSubset,
        collapse: LabelCollapse,
    ) -> Result<Self, SignificanceError> {
        Ok(Ranking {
            standard: rank_symptoms(view, subset, SignificanceMode { mi: MiMode::Standard, collapse })?,
            literal: rank_symptoms(view, subset, SignificanceMode { mi: MiMode::Literal, collapse })?,
            collapse,
        })
    }
}

/// `rank,attribute_id,name,I_bits,I0_bits,S`
pub fn ranking_to_csv(scores: &[SignificanceScore], schema: &crate::ingest::AttributeSchema) -> String {
    let mut out = String::from("rank,attribute_id,name,I_bits,I0_bits,S\n");
    for score in scores {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            score.rank,
            score.attr,
            schema.name_of(score.attr),
            score.i_bits,
            score.i0_bits,
            score.s
        ));
    }
    out
}
