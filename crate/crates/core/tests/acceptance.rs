//! Acceptance suite: one test per release criterion, each printing a
//! pass/fail line. Run with `cargo test -p cardiopipe-core --test acceptance
//! -- --nocapture` to see the lines.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cardiopipe_core::blackboard::{run_pipeline, PipelineConfig};
use cardiopipe_core::ingest::{
    class_distribution, parse_raw, read_raw_file, AttrId, AttributeSchema, ClassLabel, Dataset,
    PatientRecord, ATTRIBUTE_COUNT, CLASS_COUNT,
};
use cardiopipe_core::nbc::{self, builtin_table6, seed_model_from_table, NbcModel};
use cardiopipe_core::preprocess::{discretize, filter_select, wrapper_select, SelectionConfig};
use cardiopipe_core::report::emit_tables;
use cardiopipe_core::significance::{
    significance, EstimationMode, LabelCollapse, MiMode, ProbabilityTable, SignificanceMode,
};
use cardiopipe_core::synth;

fn criterion<T>(number: u8, name: &str, check: impl FnOnce() -> T) -> T {
    match catch_unwind(AssertUnwindSafe(check)) {
        Ok(value) => {
            println!("[acceptance] criterion {number:>2} ({name}): PASS");
            value
        }
        Err(panic) => {
            println!("[acceptance] criterion {number:>2} ({name}): FAIL");
            std::panic::resume_unwind(panic);
        }
    }
}

fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

fn raw_files() -> [(&'static str, &'static str); 4] {
    [
        ("cleveland", "cleveland.data"),
        ("hungarian", "hungarian.data"),
        ("switzerland", "switzerland.data"),
        ("long-beach-va", "long-beach-va.data"),
    ]
}

const TABLE7: [(&str, [usize; 5]); 4] = [
    ("cleveland", [164, 55, 36, 35, 13]),
    ("hungarian", [188, 37, 26, 28, 15]),
    ("switzerland", [8, 48, 32, 30, 5]),
    ("long-beach-va", [51, 56, 41, 42, 10]),
];

#[test]
fn criterion_01_dataset_counts() {
    criterion(1, "dataset record counts", || {
        let schema = AttributeSchema::heart76();
        let started = Instant::now();
        let counts: Vec<usize> = raw_files()
            .iter()
            .map(|(_, file)| read_raw_file(data_dir().join(file), &schema).unwrap().len())
            .collect();
        let elapsed = started.elapsed();
        assert_eq!(counts, vec![303, 294, 123, 200]);
        assert!(elapsed < Duration::from_secs(1), "ingest took {elapsed:?}");
    });
}

#[test]
fn criterion_02_label_distributions() {
    criterion(2, "severity label distributions", || {
        let schema = AttributeSchema::heart76();
        for (name, expected) in TABLE7 {
            let file = format!("{name}.data");
            let dataset = read_raw_file(data_dir().join(file), &schema).unwrap();
            assert_eq!(class_distribution(&dataset).unwrap(), expected, "{name}");
        }
    });
}

/// Independent oracle: sum over cells of p(f,c) * log2(p(f,c) / (p(f) p(c))).
fn mi_brute_force(counts: &[Vec<u32>]) -> f64 {
    let total: u32 = counts.iter().flatten().sum();
    let n = total as f64;
    let n_c = counts[0].len();
    let row: Vec<f64> = counts.iter().map(|r| r.iter().sum::<u32>() as f64 / n).collect();
    let col: Vec<f64> = (0..n_c).map(|c| counts.iter().map(|r| r[c]).sum::<u32>() as f64 / n).collect();
    let mut mi = 0.0;
    for (f, r) in counts.iter().enumerate() {
        for (c, cell) in r.iter().enumerate() {
            if *cell > 0 {
                let p = *cell as f64 / n;
                mi += p * (p / (row[f] * col[c])).log2();
            }
        }
    }
    mi
}

fn random_table(rng: &mut ChaCha8Rng) -> Vec<Vec<u32>> {
    loop {
        let n_f = rng.gen_range(2..=6);
        let n_c = rng.gen_range(2..=5);
        let counts: Vec<Vec<u32>> =
            (0..n_f).map(|_| (0..n_c).map(|_| rng.gen_range(0..=50)).collect()).collect();
        if counts.iter().flatten().sum::<u32>() > 0 {
            return counts;
        }
    }
}

#[test]
fn criterion_03_mi_oracle_equivalence() {
    criterion(3, "mutual-information oracle over 1000 random tables", || {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let started = Instant::now();
        for _ in 0..1000 {
            let counts = random_table(&mut rng);
            let table = ProbabilityTable::from_counts(counts.clone(), EstimationMode::Raw);
            let ours = table.mutual_information_standard();
            let oracle = mi_brute_force(&counts);
            assert!(
                (ours - oracle).abs() < 1e-12,
                "MI mismatch: {ours} vs oracle {oracle} on {counts:?}"
            );
        }
        let elapsed = started.elapsed();
        assert!(elapsed < Duration::from_secs(5), "oracle sweep took {elapsed:?}");
    });
}

/// Raw record builder: everything missing except the provided cells.
fn record_with(cells: &[(u8, f64)], label: Option<u8>) -> Vec<(u8, String)> {
    let mut row: Vec<(u8, String)> = cells.iter().map(|(id, v)| (*id, format!("{v}"))).collect();
    if let Some(code) = label {
        row.push((58, code.to_string()));
    }
    row
}

fn dataset_from(rows: &[Vec<(u8, String)>]) -> Dataset {
    let mut text = String::new();
    for row in rows {
        let mut tokens: Vec<String> = vec!["-9".into(); ATTRIBUTE_COUNT - 1];
        for (id, token) in row {
            tokens[*id as usize - 1] = token.clone();
        }
        tokens.push("name".into());
        text.push_str(&tokens.join(" "));
        text.push('\n');
    }
    parse_raw(&text, &AttributeSchema::heart76(), "synthetic").unwrap()
}

#[test]
fn criterion_04_entropy_mi_properties() {
    criterion(4, "entropy and significance properties", || {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..300 {
            let counts = random_table(&mut rng);
            let table = ProbabilityTable::from_counts(counts.clone(), EstimationMode::Raw);
            let mi = table.mutual_information_standard();
            assert!(mi >= -1e-9, "negative MI {mi}");
            assert!(
                mi <= table.entropy_f().min(table.entropy_c()) + 1e-9,
                "MI above its entropy bound"
            );
            // symmetry under transposition
            let n_c = counts[0].len();
            let transposed: Vec<Vec<u32>> =
                (0..n_c).map(|c| counts.iter().map(|r| r[c]).collect()).collect();
            let flipped = ProbabilityTable::from_counts(transposed, EstimationMode::Raw)
                .mutual_information_standard();
            assert!((mi - flipped).abs() < 1e-12, "MI not symmetric: {mi} vs {flipped}");
        }

        // balanced binary labels; sex copies the label, painloc is independent
        let rows: Vec<Vec<(u8, String)>> = (0..8)
            .map(|i| {
                let label = (i % 2) as u8;
                let noise = ((i / 2) % 2) as f64;
                record_with(&[(4, label as f64), (5, noise)], Some(label))
            })
            .collect();
        let view = discretize(&dataset_from(&rows), 4).unwrap();
        let mode = SignificanceMode { mi: MiMode::Standard, collapse: LabelCollapse::Binary };
        let copy = significance(&view, AttrId::new(4).unwrap(), mode).unwrap();
        assert!((copy.s - 1.0).abs() < 1e-9, "label copy S = {}", copy.s);
        let noise = significance(&view, AttrId::new(5).unwrap(), mode).unwrap();
        assert!(noise.s.abs() < 1e-9, "independent S = {}", noise.s);
    });
}

/// Direct Bayes enumeration without log space.
fn direct_posterior(model: &NbcModel, bins: &[Option<usize>]) -> [f64; CLASS_COUNT] {
    let mut joint = [0.0f64; CLASS_COUNT];
    for (c, slot) in joint.iter_mut().enumerate() {
        let mut p = model.class_priors()[c];
        for (conditional, bin) in model.attrs().iter().zip(bins) {
            if let Some(b) = bin {
                p *= conditional.cond[c][*b];
            }
        }
        *slot = p;
    }
    let total: f64 = joint.iter().sum();
    joint.map(|p| p / total)
}

#[test]
fn criterion_05_nbc_oracle_equivalence() {
    criterion(5, "posterior oracle and normalization", || {
        use cardiopipe_core::preprocess::AttrBins;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        // binary symptom slots to draw model attributes from
        let slots: [u8; 4] = [4, 5, 6, 7];
        for _ in 0..500 {
            let n_attrs = rng.gen_range(1..=4);
            let mut priors = [0.0f64; CLASS_COUNT];
            let mut total = 0.0;
            for p in priors.iter_mut() {
                *p = rng.gen_range(0.05..1.0);
                total += *p;
            }
            for p in priors.iter_mut() {
                *p /= total;
            }
            let attrs = (0..n_attrs)
                .map(|i| {
                    let cond: Vec<Vec<f64>> = (0..CLASS_COUNT)
                        .map(|_| {
                            let p = rng.gen_range(0.01..0.99);
                            vec![1.0 - p, p]
                        })
                        .collect();
                    cardiopipe_core::nbc::AttrConditional {
                        attr: AttrId::new(slots[i]).unwrap(),
                        name: format!("a{i}"),
                        bins: AttrBins::Categories(vec![0.0, 1.0]),
                        cond,
                    }
                })
                .collect();
            let model = NbcModel::new(0.0, [0; CLASS_COUNT], priors, attrs);
            // all bin combinations including missing
            for mask in 0..3u32.pow(n_attrs as u32) {
                let mut bins: Vec<Option<usize>> = Vec::with_capacity(n_attrs);
                let mut rest = mask;
                for _ in 0..n_attrs {
                    bins.push(match rest % 3 {
                        0 => Some(0),
                        1 => Some(1),
                        _ => None,
                    });
                    rest /= 3;
                }
                let by_attr = |c: &cardiopipe_core::nbc::AttrConditional| {
                    let idx = slots.iter().position(|s| AttrId::new(*s).unwrap() == c.attr).unwrap();
                    bins[idx]
                };
                let ours = model.posterior_with(by_attr);
                let oracle = direct_posterior(&model, &bins);
                for (a, b) in ours.probs.iter().zip(&oracle) {
                    assert!((a - b).abs() < 1e-12, "posterior {a} vs oracle {b}");
                }
            }
        }

        // posterior normalization on every record of every dataset
        for dataset in synth::all_four() {
            let view = discretize(&dataset, 4).unwrap();
            let config = SelectionConfig::default();
            let subset = filter_select(&dataset, &view, &config).unwrap();
            let model = nbc::fit(&view, &subset, 1.0).unwrap();
            for record in dataset.records() {
                let posterior = model.posterior(record);
                let sum: f64 = posterior.probs.iter().sum();
                assert!((sum - 1.0).abs() < 1e-9, "posterior sums to {sum}");
            }
        }
    });
}

#[test]
fn criterion_06_prior_table_fidelity() {
    criterion(6, "shipped likelihood table fidelity", || {
        const EXPECTED: [(&str, [f64; 5]); 19] = [
            ("painloc", [0.3, 0.4, 0.6, 0.7, 0.9]),
            ("painexer", [0.1, 0.4, 0.7, 0.85, 0.89]),
            ("relrest", [0.2, 0.34, 0.4, 0.7, 0.8]),
            ("pncaden", [0.1, 0.43, 0.5, 0.6, 0.7]),
            ("cp", [0.3, 0.2, 0.3, 0.4, 0.8]),
            ("trestbps", [0.3, 0.4, 0.45, 0.5, 0.76]),
            ("htn", [0.2, 0.2, 0.4, 0.5, 0.7]),
            ("chol", [0.3, 0.3, 0.5, 0.6, 0.778]),
            ("smoke", [0.23, 0.4, 0.45, 0.5, 0.8]),
            ("cigs", [0.14, 0.4, 0.4, 0.5, 0.9]),
            ("years", [0.15, 0.3, 0.4, 0.466, 0.8]),
            ("fbs", [0.16, 0.2, 0.3, 0.4, 0.7]),
            ("dm", [0.3, 0.3, 0.4, 0.5, 0.888]),
            ("famhist", [0.3, 0.333, 0.388, 0.5, 0.677]),
            ("restecg", [0.1, 0.12, 0.2, 0.3, 0.55]),
            ("ekgmo", [0.2, 0.3, 0.4, 0.5, 0.6]),
            ("ekgday", [0.3, 0.3, 0.4, 0.488, 0.7]),
            ("ekgyr", [0.2, 0.3, 0.395, 0.4, 0.9]),
            ("dig", [0.23, 0.3, 0.35, 0.455, 0.8]),
        ];
        let table = builtin_table6();
        assert_eq!(table.len(), EXPECTED.len());
        for (name, values) in EXPECTED {
            assert_eq!(table.get(name), Some(&values), "row {name}");
        }
        // serialize -> parse round-trips every value
        let reparsed = nbc::load_prior_table(&table.to_csv()).unwrap();
        assert_eq!(&reparsed, table);

        // uniform priors, only painloc present: posterior is the row over 2.9
        let model = seed_model_from_table(table, [0.2; CLASS_COUNT]).unwrap();
        let mut record = PatientRecord::new(1, vec![None; ATTRIBUTE_COUNT], "t".into()).unwrap();
        record.set_value(AttrId::new(5).unwrap(), Some(1.0));
        let posterior = model.posterior(&record);
        let expected = [0.3, 0.4, 0.6, 0.7, 0.9].map(|v| v / 2.9);
        for (p, e) in posterior.probs.iter().zip(&expected) {
            assert!((p - e).abs() < 1e-6, "posterior {p} vs {e}");
        }
        assert_eq!(posterior.predicted, ClassLabel::Serious);
    });
}

#[test]
fn criterion_07_pipeline_beats_majority_baseline() {
    criterion(7, "cross-validated pipeline beats the majority baseline", || {
        let started = Instant::now();
        let outcome = run_pipeline(synth::cleveland(), &PipelineConfig::default()).unwrap();
        let report = outcome.report;
        let elapsed = started.elapsed();
        let binary = report.evaluation.metrics.binary_accuracy;
        let baseline = 164.0 / 303.0;
        assert!(
            binary > baseline,
            "binary-collapse accuracy {binary} does not exceed the majority baseline {baseline}"
        );
        assert!(elapsed < Duration::from_secs(10), "pipeline took {elapsed:?}");
    });
}

#[test]
fn criterion_08_selection_properties_and_determinism() {
    criterion(8, "selection properties and byte-identical reruns", || {
        let config = SelectionConfig::default();
        for dataset in synth::all_four() {
            // filter idempotence: blanking the removed attributes and
            // re-running reproduces the same retained list
            let view = discretize(&dataset, 4).unwrap();
            let first = filter_select(&dataset, &view, &config).unwrap();
            let mut stripped = dataset.records().to_vec();
            for record in stripped.iter_mut() {
                for removed in &first.removed {
                    record.set_value(removed.id, None);
                }
            }
            let dataset2 = Dataset::new(dataset.name.clone(), dataset.schema().clone(), stripped);
            let view2 = discretize(&dataset2, 4).unwrap();
            let second = filter_select(&dataset2, &view2, &config).unwrap();
            assert_eq!(first.retained, second.retained, "{} filter not idempotent", dataset.name);

            // wrapper trace is non-decreasing
            let (_, trace) = wrapper_select(&view, &first, &config).unwrap();
            for pair in trace.steps.windows(2) {
                assert!(
                    pair[1].accuracy >= pair[0].accuracy,
                    "{} wrapper trace regressed",
                    dataset.name
                );
            }
        }

        // two runs with the same seed produce byte-identical reports and manifests
        let schema = AttributeSchema::heart76();
        let pipeline_config = PipelineConfig::default();
        let run_a = run_pipeline(synth::cleveland(), &pipeline_config).unwrap();
        let run_b = run_pipeline(synth::cleveland(), &pipeline_config).unwrap();
        let (report_a, manifest_a) = (run_a.report, run_a.manifest);
        let (report_b, manifest_b) = (run_b.report, run_b.manifest);
        assert_eq!(report_a.render_text(&schema), report_b.render_text(&schema));
        assert_eq!(manifest_a.render_text(), manifest_b.render_text());
        assert_eq!(manifest_a.digests(), manifest_b.digests());
    });
}

#[test]
fn criterion_09_retained_count_tables_emitted() {
    criterion(9, "per-record retained-count tables", || {
        let config = PipelineConfig::default();
        let reports: Vec<_> = synth::all_four()
            .into_iter()
            .map(|ds| run_pipeline(ds, &config).unwrap().report.as_ref().clone())
            .collect();
        let document = emit_tables(&reports, builtin_table6());
        for (name, _) in TABLE7 {
            let file = format!("retained_counts_{name}.csv");
            let (_, contents) = document
                .csv_files
                .iter()
                .find(|(f, _)| *f == file)
                .unwrap_or_else(|| panic!("missing {file}"));
            let mut lines = contents.lines();
            assert_eq!(lines.next(), Some("PID,FILTER,WRAPPER"), "{file} header");
            let report = reports.iter().find(|r| r.dataset_name == name).unwrap();
            assert_eq!(lines.count(), report.record_count, "{file} row count");
        }
        // the aggregate text carries the dataset and distribution tables
        assert!(document.text.contains("CLEVELAND"));
        assert!(document.text.contains("303"));
    });
}

#[test]
fn criterion_10_end_to_end_runtime() {
    criterion(10, "full pipeline runtime over all four datasets", || {
        let started = Instant::now();
        let config = PipelineConfig::default();
        for dataset in synth::all_four() {
            run_pipeline(dataset, &config).unwrap();
        }
        let elapsed = started.elapsed();
        assert!(elapsed < Duration::from_secs(60), "pipeline sweep took {elapsed:?}");
    });
}
