//! Stratified cross-validation, confusion matrices and summary metrics.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::ingest::{label_of, ClassLabel, Dataset, CLASS_COUNT};
use crate::nbc::{self, NbcError};
use crate::preprocess::{DiscretizedView, FeatureSubset};

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("{labeled} labeled records cannot fill {k} folds (need k >= 2 and at least k records)")]
    TooFewRecords { labeled: usize, k: usize },
    #[error(transparent)]
    Model(#[from] NbcError),
}

/// A partition of the labeled record indices into k folds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPlan {
    pub folds: Vec<Vec<usize>>,
    pub seed: u64,
}

impl FoldPlan {
    pub fn k(&self) -> usize {
        self.folds.len()
    }

    /// Indices outside the given fold, ascending.
    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        let mut indices: Vec<usize> = self
            .folds
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != fold)
            .flat_map(|(_, f)| f.iter().copied())
            .collect();
        indices.sort_unstable();
        indices
    }
}

/// Stratified fold assignment over label slots: per class, a seeded shuffle
/// followed by round-robin dealing, so per-class fold counts differ by at
/// most one. Unlabeled slots are left out.
pub fn fold_labels(labels: &[Option<ClassLabel>], k: usize, seed: u64) -> Result<FoldPlan, EvalError> {
    let labeled = labels.iter().flatten().count();
    if k < 2 || labeled < k {
        return Err(EvalError::TooFewRecords { labeled, k });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds: Vec<Vec<usize>> = vec![Vec::new(); k];
    for class in ClassLabel::ALL {
        let mut members: Vec<usize> = labels
            .iter()
            .enumerate()
            .filter_map(|(i, l)| (*l == Some(class)).then_some(i))
            .collect();
        members.shuffle(&mut rng);
        for (offset, index) in members.into_iter().enumerate() {
            folds[offset % k].push(index);
        }
    }
    for fold in folds.iter_mut() {
        fold.sort_unstable();
    }
    Ok(FoldPlan { folds, seed })
}

/// Stratified k-fold plan over a dataset's records. Records without a usable
/// label are excluded from every fold.
pub fn stratified_kfold(dataset: &Dataset, k: usize, seed: u64) -> Result<FoldPlan, EvalError> {
    let labels: Vec<Option<ClassLabel>> =
        dataset.records().iter().map(|r| label_of(r).ok()).collect();
    fold_labels(&labels, k, seed)
}

/// 5x5 counts; rows are true classes, columns predictions.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ConfusionMatrix {
    cells: [[usize; CLASS_COUNT]; CLASS_COUNT],
}

impl ConfusionMatrix {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, truth: ClassLabel, predicted: ClassLabel) {
        self.cells[truth.code() as usize][predicted.code() as usize] += 1;
    }

    pub fn get(&self, truth: ClassLabel, predicted: ClassLabel) -> usize {
        self.cells[truth.code() as usize][predicted.code() as usize]
    }

    pub fn total(&self) -> usize {
        self.cells.iter().flatten().sum()
    }

    pub fn trace(&self) -> usize {
        (0..CLASS_COUNT).map(|c| self.cells[c][c]).sum()
    }

    pub fn row_total(&self, class: usize) -> usize {
        self.cells[class].iter().sum()
    }

    pub fn col_total(&self, class: usize) -> usize {
        self.cells.iter().map(|row| row[class]).sum()
    }

    /// Counts collapsed to absence (class 0) vs presence (classes 1..4):
    /// `[[tn, fp], [fn, tp]]`.
    pub fn binary_collapse(&self) -> [[usize; 2]; 2] {
        let mut out = [[0usize; 2]; 2];
        for (t, row) in self.cells.iter().enumerate() {
            for (p, n) in row.iter().enumerate() {
                out[t.min(1)][p.min(1)] += n;
            }
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("true\\predicted,absence,starting,mild,moderate,serious\n");
        for class in ClassLabel::ALL {
            out.push_str(class.name());
            for p in 0..CLASS_COUNT {
                out.push_str(&format!(",{}", self.cells[class.code() as usize][p]));
            }
            out.push('\n');
        }
        out
    }

    pub fn render_text(&self) -> String {
        let mut out = String::from("true\\pred   absence  starting      mild  moderate   serious\n");
        for class in ClassLabel::ALL {
            out.push_str(&format!("{:<9}", class.name()));
            for p in 0..CLASS_COUNT {
                out.push_str(&format!("{:>10}", self.cells[class.code() as usize][p]));
            }
            out.push('\n');
        }
        out
    }
}

/// Summary metrics derived from a confusion matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    pub accuracy: f64,
    pub precision: [f64; CLASS_COUNT],
    pub recall: [f64; CLASS_COUNT],
    pub macro_f1: f64,
    /// Accuracy of always predicting the most common true class.
    pub majority_baseline: f64,
    /// Accuracy after collapsing to absence vs presence.
    pub binary_accuracy: f64,
}

impl Metrics {
    pub fn from_confusion(confusion: &ConfusionMatrix) -> Metrics {
        let total = confusion.total().max(1) as f64;
        let accuracy = confusion.trace() as f64 / total;
        let mut precision = [0.0f64; CLASS_COUNT];
        let mut recall = [0.0f64; CLASS_COUNT];
        let mut f1_sum = 0.0;
        for c in 0..CLASS_COUNT {
            let tp = confusion.cells[c][c] as f64;
            let col = confusion.col_total(c) as f64;
            let row = confusion.row_total(c) as f64;
            precision[c] = if col > 0.0 { tp / col } else { 0.0 };
            recall[c] = if row > 0.0 { tp / row } else { 0.0 };
            let denom = precision[c] + recall[c];
            f1_sum += if denom > 0.0 { 2.0 * precision[c] * recall[c] / denom } else { 0.0 };
        }
        let majority =
            (0..CLASS_COUNT).map(|c| confusion.row_total(c)).max().unwrap_or(0) as f64 / total;
        let binary = confusion.binary_collapse();
        let binary_accuracy = (binary[0][0] + binary[1][1]) as f64 / total;
        Metrics {
            accuracy,
            precision,
            recall,
            macro_f1: f1_sum / CLASS_COUNT as f64,
            majority_baseline: majority,
            binary_accuracy,
        }
    }
}

/// Outcome of one record during cross-validation.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordPrediction {
    pub index: usize,
    pub patient_id: i64,
    pub truth: ClassLabel,
    pub predicted: ClassLabel,
    pub probs: [f64; CLASS_COUNT],
    /// Log of the posterior normalizing constant (the evidence).
    pub log_evidence: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub metrics: Metrics,
    pub confusion: ConfusionMatrix,
    pub predicted_distribution: [usize; CLASS_COUNT],
    pub excluded_unlabeled: usize,
    pub records: Vec<RecordPrediction>,
}

/// Generic fold driver: fit on the complement of each fold, score its
/// members. `fit` receives ascending training indices; `predict` maps a
/// fitted model and a record index to a class.
pub fn cross_validate_with<M>(
    labels: &[Option<ClassLabel>],
    plan: &FoldPlan,
    mut fit: impl FnMut(&[usize]) -> Result<M, EvalError>,
    mut predict: impl FnMut(&M, usize) -> ClassLabel,
) -> Result<(ConfusionMatrix, Vec<(usize, ClassLabel)>), EvalError> {
    let mut confusion = ConfusionMatrix::new();
    let mut predictions = Vec::new();
    for fold in 0..plan.k() {
        let train = plan.train_indices(fold);
        let model = fit(&train)?;
        for &index in &plan.folds[fold] {
            let truth = labels[index].expect("folds contain labeled records only");
            let predicted = predict(&model, index);
            confusion.add(truth, predicted);
            predictions.push((index, predicted));
        }
    }
    predictions.sort_unstable_by_key(|(index, _)| *index);
    Ok((confusion, predictions))
}

/// Cross-validate the naive Bayes classifier over an already-selected subset:
/// per fold, fit on the remaining folds and score the held-out records.
pub fn evaluate(
    view: &DiscretizedView,
    subset: &FeatureSubset,
    k: usize,
    seed: u64,
    alpha: f64,
) -> Result<Evaluation, EvalError> {
    let labels = view.labels();
    let plan = fold_labels(labels, k, seed)?;
    let attrs = subset.retained_ids();
    let mut confusion = ConfusionMatrix::new();
    let mut records = Vec::new();
    for fold in 0..plan.k() {
        let train = plan.train_indices(fold);
        let model = nbc::fit_on(view, &attrs, alpha, &train)?;
        for &index in &plan.folds[fold] {
            let truth = labels[index].expect("folds contain labeled records only");
            let posterior = model.posterior_binned(view, index);
            confusion.add(truth, posterior.predicted);
            records.push(RecordPrediction {
                index,
                patient_id: view.patient_ids()[index],
                truth,
                predicted: posterior.predicted,
                probs: posterior.probs,
                log_evidence: posterior.log_evidence,
            });
        }
    }
    records.sort_unstable_by_key(|r| r.index);

    let mut predicted_distribution = [0usize; CLASS_COUNT];
    for record in &records {
        predicted_distribution[record.predicted.code() as usize] += 1;
    }
    let excluded_unlabeled = labels.len() - labels.iter().flatten().count();
    Ok(Evaluation {
        metrics: Metrics::from_confusion(&confusion),
        confusion,
        predicted_distribution,
        excluded_unlabeled,
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn labels_of(counts: [usize; CLASS_COUNT]) -> Vec<Option<ClassLabel>> {
        let mut labels = Vec::new();
        for (code, n) in counts.iter().enumerate() {
            let label = Some(ClassLabel::from_code(code as u8).unwrap());
            labels.extend(std::iter::repeat_n(label, *n));
        }
        labels
    }

    #[test]
    fn ten_records_one_class_five_folds_of_two() {
        let labels = labels_of([10, 0, 0, 0, 0]);
        let plan = fold_labels(&labels, 5, 0).unwrap();
        assert_eq!(plan.k(), 5);
        for fold in &plan.folds {
            assert_eq!(fold.len(), 2);
        }
    }

    #[test]
    fn cleveland_counts_split_into_32_or_33_absence_per_fold() {
        let labels = labels_of([164, 55, 36, 35, 13]);
        let plan = fold_labels(&labels, 5, 42).unwrap();
        for fold in &plan.folds {
            let absence = fold.iter().filter(|i| labels[**i] == Some(ClassLabel::Absence)).count();
            assert!(absence == 32 || absence == 33, "absence count {absence}");
        }
        // folds partition all labeled records
        let mut all: Vec<usize> = plan.folds.iter().flatten().copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..303).collect::<Vec<usize>>());
    }

    #[test]
    fn stratified_kfold_partitions_a_dataset() {
        let dataset = crate::synth::cleveland();
        let plan = stratified_kfold(&dataset, 5, 42).unwrap();
        let mut all: Vec<usize> = plan.folds.iter().flatten().copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..303).collect::<Vec<usize>>());
        for fold in &plan.folds {
            let absence = fold
                .iter()
                .filter(|i| label_of(dataset.record(**i)).ok() == Some(ClassLabel::Absence))
                .count();
            assert!(absence == 32 || absence == 33);
        }
    }

    #[test]
    fn zero_or_one_folds_is_too_few() {
        let labels = labels_of([10, 0, 0, 0, 0]);
        assert!(matches!(fold_labels(&labels, 0, 0), Err(EvalError::TooFewRecords { .. })));
        assert!(matches!(fold_labels(&labels, 1, 0), Err(EvalError::TooFewRecords { .. })));
        // more folds than labeled records
        assert!(matches!(fold_labels(&labels, 11, 0), Err(EvalError::TooFewRecords { .. })));
    }

    #[test]
    fn unlabeled_records_stay_out_of_folds() {
        let mut labels = labels_of([6, 4, 0, 0, 0]);
        labels.push(None);
        labels.push(None);
        let plan = fold_labels(&labels, 2, 7).unwrap();
        let all: Vec<usize> = plan.folds.iter().flatten().copied().collect();
        assert_eq!(all.len(), 10);
        assert!(all.iter().all(|i| labels[*i].is_some()));
    }

    #[test]
    fn fold_assignment_is_deterministic_per_seed() {
        let labels = labels_of([20, 10, 5, 5, 5]);
        let a = fold_labels(&labels, 5, 9).unwrap();
        let b = fold_labels(&labels, 5, 9).unwrap();
        assert_eq!(a, b);
        let c = fold_labels(&labels, 5, 10).unwrap();
        assert_ne!(a, c, "different seeds should shuffle differently");
    }

    #[test]
    fn perfect_predictor_scores_one_with_diagonal_matrix() {
        let labels = labels_of([4, 4, 4, 4, 4]);
        let plan = fold_labels(&labels, 4, 0).unwrap();
        let (confusion, _) = cross_validate_with(
            &labels,
            &plan,
            |_| Ok(()),
            |_, index| labels[index].unwrap(),
        )
        .unwrap();
        let metrics = Metrics::from_confusion(&confusion);
        assert_eq!(metrics.accuracy, 1.0);
        assert_eq!(confusion.trace(), 20);
        assert_eq!(confusion.total(), 20);
        for t in ClassLabel::ALL {
            for p in ClassLabel::ALL {
                if t != p {
                    assert_eq!(confusion.get(t, p), 0);
                }
            }
        }
    }

    #[test]
    fn majority_predictor_scores_the_majority_rate() {
        let labels = labels_of([164, 55, 36, 35, 13]);
        let plan = fold_labels(&labels, 5, 0).unwrap();
        let (confusion, _) = cross_validate_with(
            &labels,
            &plan,
            |_| Ok(()),
            |_, _| ClassLabel::Absence,
        )
        .unwrap();
        let metrics = Metrics::from_confusion(&confusion);
        assert_abs_diff_eq!(metrics.accuracy, 164.0 / 303.0, epsilon = 1e-12);
        assert_abs_diff_eq!(metrics.majority_baseline, 164.0 / 303.0, epsilon = 1e-12);
        assert_abs_diff_eq!(metrics.binary_accuracy, 164.0 / 303.0, epsilon = 1e-12);
        assert_eq!(confusion.total(), 303);
    }

    #[test]
    fn metrics_stay_in_unit_range() {
        let mut confusion = ConfusionMatrix::new();
        for (t, p, n) in [(0u8, 0u8, 5usize), (0, 1, 2), (1, 1, 3), (2, 4, 4), (4, 4, 1)] {
            for _ in 0..n {
                confusion.add(ClassLabel::from_code(t).unwrap(), ClassLabel::from_code(p).unwrap());
            }
        }
        let metrics = Metrics::from_confusion(&confusion);
        let mut values = vec![
            metrics.accuracy,
            metrics.macro_f1,
            metrics.majority_baseline,
            metrics.binary_accuracy,
        ];
        values.extend(metrics.precision);
        values.extend(metrics.recall);
        for v in values {
            assert!((0.0..=1.0).contains(&v), "metric {v} out of range");
        }
        assert_abs_diff_eq!(metrics.accuracy, confusion.trace() as f64 / confusion.total() as f64);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn folds_partition_and_stratify(
                counts in proptest::collection::vec(0usize..40, CLASS_COUNT),
                k in 2usize..6,
                seed in 0u64..500,
            ) {
                let mut array = [0usize; CLASS_COUNT];
                array.copy_from_slice(&counts);
                let labels = labels_of(array);
                let labeled = labels.iter().flatten().count();
                prop_assume!(labeled >= k);
                let plan = fold_labels(&labels, k, seed).unwrap();
                // partition
                let mut all: Vec<usize> = plan.folds.iter().flatten().copied().collect();
                all.sort_unstable();
                let expected: Vec<usize> =
                    labels.iter().enumerate().filter_map(|(i, l)| l.map(|_| i)).collect();
                prop_assert_eq!(all, expected);
                // stratification: per-class counts differ by at most 1
                for class in ClassLabel::ALL {
                    let per_fold: Vec<usize> = plan
                        .folds
                        .iter()
                        .map(|f| f.iter().filter(|i| labels[**i] == Some(class)).count())
                        .collect();
                    let min = per_fold.iter().min().unwrap();
                    let max = per_fold.iter().max().unwrap();
                    prop_assert!(max - min <= 1, "class {class:?} spread {per_fold:?}");
                }
            }
        }
    }
}
