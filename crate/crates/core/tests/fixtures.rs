//! Integration checks over the committed dataset fixtures under `data/`.

use std::path::PathBuf;

use cardiopipe_core::ingest::{
    label_of, parse_processed, read_processed_file, read_raw_file, serialize_raw, AttrId,
    AttributeSchema, ClassLabel, Dataset,
};
use cardiopipe_core::preprocess::{
    discretize, drop_unusable, filter_select, RemovalReason, SelectionConfig,
};
use cardiopipe_core::significance::{rank_symptoms, LabelCollapse, MiMode, SignificanceMode};
use cardiopipe_core::synth;

fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

#[test]
fn committed_files_match_the_generator() {
    // guards against fixture drift: the checked-in bytes are exactly what
    // the generator emits
    let schema = AttributeSchema::heart76();
    for profile in synth::profiles() {
        let path = data_dir().join(format!("{}.data", profile.name));
        let committed = std::fs::read_to_string(&path).unwrap();
        let generated = serialize_raw(&synth::generate(&profile));
        assert_eq!(committed, generated, "{} differs from its generator", profile.name);
        let parsed = read_raw_file(&path, &schema).unwrap();
        assert_eq!(parsed.records(), synth::generate(&profile).records());
    }
}

#[test]
fn raw_files_round_trip() {
    let schema = AttributeSchema::heart76();
    for name in ["cleveland", "hungarian", "switzerland", "long-beach-va"] {
        let dataset = read_raw_file(data_dir().join(format!("{name}.data")), &schema).unwrap();
        let reparsed = cardiopipe_core::ingest::parse_raw(&serialize_raw(&dataset), &schema, name).unwrap();
        assert_eq!(reparsed.records(), dataset.records(), "{name} round trip");
    }
}

#[test]
fn processed_sample_parses_and_agrees_with_cleveland_labels() {
    let schema = AttributeSchema::processed14();
    let processed =
        read_processed_file(data_dir().join("processed.cleveland.data"), &schema).unwrap();
    assert_eq!(processed.len(), 303);
    let raw = read_raw_file(data_dir().join("cleveland.data"), &AttributeSchema::heart76()).unwrap();
    for (a, b) in processed.records().iter().zip(raw.records()) {
        assert_eq!(label_of(a).ok(), label_of(b).ok());
        assert_eq!(a.value(AttrId::new(3).unwrap()), b.value(AttrId::new(3).unwrap()));
    }
}

#[test]
fn cleveland_age_bins_hold_a_quarter_each() {
    // equal-frequency discretization of an integer attribute: occupancy is
    // 303/4 up to duplicate-value rounding; frozen from the first verified run
    let view = discretize(&synth::cleveland(), 4).unwrap();
    let occupancy = view.bin_occupancy(AttrId::new(3).unwrap());
    assert_eq!(occupancy, vec![79, 76, 72, 76]);
    for count in &occupancy {
        let diff = (*count as f64 - 303.0 / 4.0).abs();
        assert!(diff <= 5.0, "bin occupancy {count} strays from 303/4");
    }
}

#[test]
fn swiss_cholesterol_is_dropped_with_its_computed_ratio() {
    let dataset = synth::switzerland();
    let subset = drop_unusable(&dataset, &SelectionConfig::default());
    let chol = AttrId::new(12).unwrap();
    let removal = subset.removed.iter().find(|r| r.id == chol).expect("chol removed");
    assert_eq!(removal.reason, RemovalReason::ExcessMissing);
    assert_eq!(removal.score, Some(109.0 / 123.0));
}

#[test]
fn removing_a_non_retained_attribute_never_changes_the_selection() {
    let dataset = synth::cleveland();
    let config = SelectionConfig::default();
    let view = discretize(&dataset, 4).unwrap();
    let baseline = filter_select(&dataset, &view, &config).unwrap();
    // blank a few removed attributes one at a time
    let victims: Vec<AttrId> = baseline.removed.iter().step_by(7).map(|r| r.id).collect();
    for victim in victims {
        let mut records = dataset.records().to_vec();
        for record in records.iter_mut() {
            record.set_value(victim, None);
        }
        let altered = Dataset::new(dataset.name.clone(), dataset.schema().clone(), records);
        let altered_view = discretize(&altered, 4).unwrap();
        let result = filter_select(&altered, &altered_view, &config).unwrap();
        assert_eq!(
            result.retained, baseline.retained,
            "removing non-retained {victim} changed the selection"
        );
    }
}

#[test]
fn cleveland_ranking_is_stable_and_oracle_guarded() {
    // deterministic ranking of the 13-attribute processed subset
    let schema = AttributeSchema::processed14();
    let dataset =
        read_processed_file(data_dir().join("processed.cleveland.data"), &schema).unwrap();
    let view = discretize(&dataset, 4).unwrap();
    let subset = cardiopipe_core::preprocess::FeatureSubset {
        retained: schema
            .descriptors()
            .iter()
            .filter(|d| d.id != cardiopipe_core::ingest::LABEL_ATTR)
            .map(|d| cardiopipe_core::preprocess::RetainedAttr { id: d.id, score: None })
            .collect(),
        removed: vec![],
    };
    let mode = SignificanceMode { mi: MiMode::Standard, collapse: LabelCollapse::Binary };
    let first = rank_symptoms(&view, &subset, mode).unwrap();
    let second = rank_symptoms(&view, &subset, mode).unwrap();
    assert_eq!(first, second);
    assert_eq!(first.len(), 13);
    assert_eq!(first[0].rank, 1);
    // every score is consistent with a direct recomputation of I/I0
    for score in &first {
        assert!((score.s - score.i_bits / score.i0_bits).abs() < 1e-12);
        assert!(score.i_bits >= 0.0);
    }
    // ranks descend with S
    for pair in first.windows(2) {
        assert!(pair[0].s >= pair[1].s);
        assert_eq!(pair[1].rank, pair[0].rank + 1);
    }
}

#[test]
fn empty_processed_stream_yields_no_records() {
    let schema = AttributeSchema::processed14();
    let dataset = parse_processed("", &schema, "empty").unwrap();
    assert!(dataset.is_empty());
}

#[test]
fn mutual_information_respects_its_entropy_bound_on_every_attribute() {
    use cardiopipe_core::significance::contingency_table;
    for dataset in synth::all_four() {
        let view = discretize(&dataset, 4).unwrap();
        for id in dataset.schema().selectable_ids() {
            let table = match contingency_table(&view, id, LabelCollapse::Multiclass) {
                Ok(table) => table,
                Err(_) => continue, // attribute never co-observed with a label
            };
            let mi = table.mutual_information_standard();
            let bound = table.entropy_f().min(table.entropy_c());
            assert!(mi >= -1e-9, "{}: attribute {id} has negative MI {mi}", dataset.name);
            assert!(
                mi <= bound + 1e-9,
                "{}: attribute {id} MI {mi} above bound {bound}",
                dataset.name
            );
        }
    }
}

#[test]
fn all_fixture_labels_are_valid() {
    for dataset in synth::all_four() {
        for record in dataset.records() {
            let label = label_of(record).unwrap();
            assert!(label <= ClassLabel::Serious);
        }
    }
}
