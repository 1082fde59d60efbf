//! Parsing of raw (76-value) and processed (14-column) heart-disease files
//! into validated in-memory datasets.
//!
//! Raw files are whitespace-separated numeric tokens; every record holds 75
//! numbers followed by the literal terminator token `name`, and `-9` encodes
//! a missing value. Processed files are comma-separated 14-field lines with
//! `?` for missing. Both parse into the same 76-slot record layout.

pub mod schema;

use std::fmt;
use std::path::Path;
use std::sync::Arc;

pub use schema::{
    AttrId, AttributeDescriptor, AttributeKind, AttributeRole, AttributeSchema, ATTRIBUTE_COUNT,
    CLASS_COUNT, LABEL_ATTR,
};

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("record {record}: terminator at token offset {offset} closes a record of {got} values (expected 76)")]
    TokenCountMismatch { record: usize, offset: usize, got: usize },
    #[error("record {record}, attribute {attr}: token {token:?} is not numeric")]
    NonNumericToken { record: usize, attr: usize, token: String },
    #[error("stream ended mid-record: record {record} holds {got} of 76 values")]
    TruncatedRecord { record: usize, got: usize },
    #[error("line {line}: expected {expected} comma-separated fields, found {got}")]
    FieldCountMismatch { line: usize, expected: usize, got: usize },
    #[error("patient {patient_id}: label cell is missing")]
    MissingLabel { patient_id: i64 },
    #[error("patient {patient_id}: label value {value} outside 0..4")]
    LabelOutOfRange { patient_id: i64, value: f64 },
    #[error("schema line {line}: {message}")]
    InvalidSchema { line: usize, message: String },
    #[error("record holds {got} cells, the layout has {expected}")]
    BadRecordLength { got: usize, expected: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Five-class disease severity, in ascending order of the dataset codes 0..4.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ClassLabel {
    Absence = 0,
    Starting = 1,
    Mild = 2,
    Moderate = 3,
    Serious = 4,
}

impl ClassLabel {
    pub const ALL: [ClassLabel; CLASS_COUNT] = [
        ClassLabel::Absence,
        ClassLabel::Starting,
        ClassLabel::Mild,
        ClassLabel::Moderate,
        ClassLabel::Serious,
    ];

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<ClassLabel> {
        ClassLabel::ALL.get(code as usize).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            ClassLabel::Absence => "absence",
            ClassLabel::Starting => "starting",
            ClassLabel::Mild => "mild",
            ClassLabel::Moderate => "moderate",
            ClassLabel::Serious => "serious",
        }
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One patient's 76 attribute cells. `None` is the missing sentinel for both
/// input encodings (`-9` raw, `?` processed).
#[derive(Debug, Clone, PartialEq)]
pub struct PatientRecord {
    pub patient_id: i64,
    values: Vec<Option<f64>>,
    pub source: String,
}

impl PatientRecord {
    pub fn new(patient_id: i64, values: Vec<Option<f64>>, source: String) -> Result<Self, IngestError> {
        if values.len() != ATTRIBUTE_COUNT {
            return Err(IngestError::BadRecordLength { got: values.len(), expected: ATTRIBUTE_COUNT });
        }
        Ok(PatientRecord { patient_id, values, source })
    }

    pub fn value(&self, id: AttrId) -> Option<f64> {
        self.values[id.slot()]
    }

    pub fn values(&self) -> &[Option<f64>] {
        &self.values
    }

    pub fn set_value(&mut self, id: AttrId, value: Option<f64>) {
        self.values[id.slot()] = value;
    }

    pub fn label_cell(&self) -> Option<f64> {
        self.value(LABEL_ATTR)
    }
}

/// A parsed dataset: shared schema plus records in file order.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub name: String,
    schema: Arc<AttributeSchema>,
    records: Vec<PatientRecord>,
}

impl Dataset {
    pub fn new(name: impl Into<String>, schema: Arc<AttributeSchema>, records: Vec<PatientRecord>) -> Self {
        Dataset { name: name.into(), schema, records }
    }

    pub fn schema(&self) -> &Arc<AttributeSchema> {
        &self.schema
    }

    pub fn records(&self) -> &[PatientRecord] {
        &self.records
    }

    pub fn record(&self, index: usize) -> &PatientRecord {
        &self.records[index]
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

const RAW_MISSING: f64 = -9.0;
const RAW_TERMINATOR: &str = "name";

/// Parse the raw whitespace-separated format. Requires a full 76-slot schema.
///
/// Each record is 76 consecutive tokens whose final token is the literal
/// `name`; the terminator is stored as a missing cell in slot 76.
pub fn parse_raw(input: &str, schema: &Arc<AttributeSchema>, source: &str) -> Result<Dataset, IngestError> {
    if !schema.is_full() {
        return Err(IngestError::InvalidSchema {
            line: 0,
            message: format!("raw format needs the full 76-slot schema, got {} descriptors", schema.len()),
        });
    }
    let mut records = Vec::new();
    let mut current: Vec<Option<f64>> = Vec::with_capacity(ATTRIBUTE_COUNT);
    for (offset, token) in input.split_whitespace().enumerate() {
        let position = current.len();
        if token == RAW_TERMINATOR {
            if position != ATTRIBUTE_COUNT - 1 {
                return Err(IngestError::TokenCountMismatch {
                    record: records.len(),
                    offset,
                    got: position + 1,
                });
            }
            current.push(None);
            let patient_id = current[0].map(|v| v as i64).unwrap_or(records.len() as i64 + 1);
            records.push(PatientRecord::new(patient_id, current, source.to_string())?);
            current = Vec::with_capacity(ATTRIBUTE_COUNT);
            continue;
        }
        if position == ATTRIBUTE_COUNT - 1 {
            // 76th token of the record is not the terminator
            return Err(IngestError::TokenCountMismatch {
                record: records.len(),
                offset,
                got: ATTRIBUTE_COUNT,
            });
        }
        let value: f64 = token.parse().map_err(|_| IngestError::NonNumericToken {
            record: records.len(),
            attr: position + 1,
            token: token.to_string(),
        })?;
        current.push(if value == RAW_MISSING { None } else { Some(value) });
    }
    if !current.is_empty() {
        return Err(IngestError::TruncatedRecord { record: records.len(), got: current.len() });
    }
    Ok(Dataset::new(source, schema.clone(), records))
}

/// Parse the comma-separated processed format against a projection schema.
///
/// Fields map positionally onto the schema's descriptors; uncovered slots of
/// the 76-slot layout stay missing. Patient ids are the 1-based line ordinal
/// unless the projection covers attribute 1.
pub fn parse_processed(
    input: &str,
    schema: &Arc<AttributeSchema>,
    source: &str,
) -> Result<Dataset, IngestError> {
    let width = schema.len();
    let mut records = Vec::new();
    for (lineno, raw_line) in input.lines().enumerate() {
        let line = raw_line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != width {
            return Err(IngestError::FieldCountMismatch {
                line: lineno + 1,
                expected: width,
                got: fields.len(),
            });
        }
        let mut values: Vec<Option<f64>> = vec![None; ATTRIBUTE_COUNT];
        for (descriptor, field) in schema.descriptors().iter().zip(&fields) {
            let token = field.trim();
            if token == "?" {
                continue;
            }
            let value: f64 = token.parse().map_err(|_| IngestError::NonNumericToken {
                record: records.len(),
                attr: descriptor.id.get() as usize,
                token: token.to_string(),
            })?;
            values[descriptor.id.slot()] = Some(value);
        }
        let patient_id = values[0].map(|v| v as i64).unwrap_or(records.len() as i64 + 1);
        records.push(PatientRecord::new(patient_id, values, source.to_string())?);
    }
    Ok(Dataset::new(source, schema.clone(), records))
}

pub fn read_raw_file(path: impl AsRef<Path>, schema: &Arc<AttributeSchema>) -> Result<Dataset, IngestError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    parse_raw(&text, schema, &source_name(path))
}

pub fn read_processed_file(
    path: impl AsRef<Path>,
    schema: &Arc<AttributeSchema>,
) -> Result<Dataset, IngestError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    parse_processed(&text, schema, &source_name(path))
}

fn source_name(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "dataset".into())
}

/// Map a record's label cell to its severity class.
pub fn label_of(record: &PatientRecord) -> Result<ClassLabel, IngestError> {
    let value = record
        .label_cell()
        .ok_or(IngestError::MissingLabel { patient_id: record.patient_id })?;
    if value.fract() != 0.0 || !(0.0..=4.0).contains(&value) {
        return Err(IngestError::LabelOutOfRange { patient_id: record.patient_id, value });
    }
    Ok(ClassLabel::from_code(value as u8).expect("range checked"))
}

/// Per-class record counts in Absence..Serious order. Every record must carry
/// a valid label.
pub fn class_distribution(dataset: &Dataset) -> Result<[usize; CLASS_COUNT], IngestError> {
    let mut counts = [0usize; CLASS_COUNT];
    for record in dataset.records() {
        counts[label_of(record)?.code() as usize] += 1;
    }
    Ok(counts)
}

/// Lenient distribution for reporting: counts over labeled records plus the
/// number of records without a usable label.
pub fn labeled_distribution(dataset: &Dataset) -> ([usize; CLASS_COUNT], usize) {
    let mut counts = [0usize; CLASS_COUNT];
    let mut unlabeled = 0usize;
    for record in dataset.records() {
        match label_of(record) {
            Ok(label) => counts[label.code() as usize] += 1,
            Err(_) => unlabeled += 1,
        }
    }
    (counts, unlabeled)
}

/// Serialize to the raw exchange format; parsing the output reproduces the
/// records exactly. Missing cells become `-9`, slot 76 becomes `name`.
pub fn serialize_raw(dataset: &Dataset) -> String {
    let mut out = String::new();
    for record in dataset.records() {
        for (slot, cell) in record.values().iter().enumerate() {
            if slot == ATTRIBUTE_COUNT - 1 {
                out.push_str(RAW_TERMINATOR);
                out.push('\n');
                break;
            }
            match cell {
                Some(v) => {
                    out.push_str(&format_cell(*v));
                    out.push(if (slot + 1) % 8 == 0 { '\n' } else { ' ' });
                }
                None => {
                    out.push_str("-9");
                    out.push(if (slot + 1) % 8 == 0 { '\n' } else { ' ' });
                }
            }
        }
    }
    out
}

/// Serialize the slots covered by a projection schema as processed CSV lines.
pub fn serialize_processed(dataset: &Dataset, schema: &AttributeSchema) -> String {
    let mut out = String::new();
    for record in dataset.records() {
        let fields: Vec<String> = schema
            .descriptors()
            .iter()
            .map(|d| match record.value(d.id) {
                Some(v) => format_cell(v),
                None => "?".to_string(),
            })
            .collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

/// Shortest decimal form that round-trips through `f64` parsing.
pub fn format_cell(value: f64) -> String {
    format!("{value}")
}

/// Non-fatal consistency findings over a parsed dataset.
#[derive(Debug, Clone, PartialEq)]
pub enum ValidationWarning {
    /// Attribute 8 disagrees with the sum of attributes 5, 6 and 7.
    PncadenMismatch { patient_id: i64, stored: f64, expected: f64 },
    /// Label cell present but outside the 0..4 code range.
    BadLabel { patient_id: i64, value: f64 },
}

impl fmt::Display for ValidationWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidationWarning::PncadenMismatch { patient_id, stored, expected } => write!(
                f,
                "patient {patient_id}: pncaden stores {stored} but painloc+painexer+relrest = {expected}"
            ),
            ValidationWarning::BadLabel { patient_id, value } => {
                write!(f, "patient {patient_id}: label value {value} outside 0..4")
            }
        }
    }
}

pub fn validate(dataset: &Dataset) -> Vec<ValidationWarning> {
    let mut warnings = Vec::new();
    let painloc = AttrId::new(5).unwrap();
    let painexer = AttrId::new(6).unwrap();
    let relrest = AttrId::new(7).unwrap();
    let pncaden = AttrId::new(8).unwrap();
    for record in dataset.records() {
        if let (Some(a), Some(b), Some(c), Some(stored)) = (
            record.value(painloc),
            record.value(painexer),
            record.value(relrest),
            record.value(pncaden),
        ) {
            let expected = a + b + c;
            if stored != expected {
                warnings.push(ValidationWarning::PncadenMismatch {
                    patient_id: record.patient_id,
                    stored,
                    expected,
                });
            }
        }
        if let Some(value) = record.label_cell() {
            if value.fract() != 0.0 || !(0.0..=4.0).contains(&value) {
                warnings.push(ValidationWarning::BadLabel { patient_id: record.patient_id, value });
            }
        }
    }
    warnings
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raw_record_tokens(label: &str) -> Vec<String> {
        // 75 numeric tokens + terminator; attribute i carries value i except
        // the label slot.
        let mut tokens: Vec<String> = (1..=75).map(|i| i.to_string()).collect();
        tokens[LABEL_ATTR.slot()] = label.to_string();
        tokens.push(RAW_TERMINATOR.to_string());
        tokens
    }

    #[test]
    fn parses_handmade_record_with_label_3() {
        let text = raw_record_tokens("3").join(" ");
        let ds = parse_raw(&text, &AttributeSchema::heart76(), "synthetic").unwrap();
        assert_eq!(ds.len(), 1);
        let record = ds.record(0);
        assert_eq!(record.label_cell(), Some(3.0));
        assert_eq!(label_of(record).unwrap(), ClassLabel::Moderate);
        assert_eq!(record.patient_id, 1);
        assert_eq!(record.value(AttrId::new(3).unwrap()), Some(3.0));
        // round-trip
        let again = parse_raw(&serialize_raw(&ds), &AttributeSchema::heart76(), "synthetic").unwrap();
        assert_eq!(again.records(), ds.records());
    }

    #[test]
    fn empty_stream_yields_empty_dataset() {
        let ds = parse_raw("", &AttributeSchema::heart76(), "empty").unwrap();
        assert_eq!(ds.len(), 0);
        assert_eq!(class_distribution(&ds).unwrap(), [0, 0, 0, 0, 0]);
    }

    #[test]
    fn minus_nine_maps_to_missing() {
        let mut tokens = raw_record_tokens("0");
        tokens[2] = "-9".into(); // age
        tokens[9] = "-9.0".into(); // trestbps
        let ds = parse_raw(&tokens.join(" "), &AttributeSchema::heart76(), "m").unwrap();
        let record = ds.record(0);
        assert_eq!(record.value(AttrId::new(3).unwrap()), None);
        assert_eq!(record.value(AttrId::new(10).unwrap()), None);
    }

    #[test]
    fn early_terminator_is_token_count_mismatch() {
        let err = parse_raw("1 2 name", &AttributeSchema::heart76(), "bad").unwrap_err();
        assert!(matches!(err, IngestError::TokenCountMismatch { record: 0, offset: 2, got: 3 }), "{err:?}");
    }

    #[test]
    fn numeric_token_in_terminator_slot_is_token_count_mismatch() {
        let mut tokens = raw_record_tokens("0");
        tokens[75] = "7".into(); // number where the terminator belongs
        let err = parse_raw(&tokens.join(" "), &AttributeSchema::heart76(), "bad").unwrap_err();
        assert!(matches!(err, IngestError::TokenCountMismatch { got: 76, .. }), "{err:?}");
    }

    #[test]
    fn garbage_token_is_non_numeric() {
        let err = parse_raw("1 2 bogus", &AttributeSchema::heart76(), "bad").unwrap_err();
        match err {
            IngestError::NonNumericToken { record: 0, attr: 3, token } => assert_eq!(token, "bogus"),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn truncated_stream_is_reported() {
        let err = parse_raw("1 2 3 4", &AttributeSchema::heart76(), "bad").unwrap_err();
        assert!(matches!(err, IngestError::TruncatedRecord { record: 0, got: 4 }), "{err:?}");
    }

    #[test]
    fn parses_processed_line_with_label_0() {
        let line = "63.0,1.0,1.0,145.0,233.0,1.0,2.0,150.0,0.0,2.3,3.0,0.0,6.0,0";
        let ds = parse_processed(line, &AttributeSchema::processed14(), "proc").unwrap();
        assert_eq!(ds.len(), 1);
        let record = ds.record(0);
        assert_eq!(label_of(record).unwrap(), ClassLabel::Absence);
        assert_eq!(record.value(AttrId::new(3).unwrap()), Some(63.0)); // age
        assert_eq!(record.value(AttrId::new(40).unwrap()), Some(2.3)); // oldpeak
        assert_eq!(record.value(AttrId::new(51).unwrap()), Some(6.0)); // thal
        // uncovered slot stays missing
        assert_eq!(record.value(AttrId::new(5).unwrap()), None);
        assert_eq!(record.patient_id, 1);
    }

    #[test]
    fn question_mark_maps_to_missing() {
        let line = "63.0,1.0,1.0,145.0,233.0,1.0,2.0,150.0,0.0,2.3,3.0,?,6.0,0";
        let ds = parse_processed(line, &AttributeSchema::processed14(), "proc").unwrap();
        assert_eq!(ds.record(0).value(AttrId::new(44).unwrap()), None); // ca, field 12
    }

    #[test]
    fn empty_processed_stream_is_empty_dataset() {
        let ds = parse_processed("", &AttributeSchema::processed14(), "proc").unwrap();
        assert_eq!(ds.len(), 0);
    }

    #[test]
    fn processed_field_count_mismatch() {
        let err = parse_processed("1,2,3", &AttributeSchema::processed14(), "proc").unwrap_err();
        assert!(matches!(err, IngestError::FieldCountMismatch { line: 1, expected: 14, got: 3 }), "{err:?}");
    }

    #[test]
    fn label_codes_map_bijectively() {
        for code in 0..=4u8 {
            let label = ClassLabel::from_code(code).unwrap();
            assert_eq!(label.code(), code);
        }
        assert_eq!(ClassLabel::from_code(0), Some(ClassLabel::Absence));
        assert_eq!(ClassLabel::from_code(4), Some(ClassLabel::Serious));
        assert_eq!(ClassLabel::from_code(5), None);
        assert!(ClassLabel::Absence < ClassLabel::Serious);
    }

    #[test]
    fn missing_label_is_an_error() {
        let mut tokens = raw_record_tokens("-9");
        tokens[0] = "42".into();
        let ds = parse_raw(&tokens.join(" "), &AttributeSchema::heart76(), "m").unwrap();
        let err = label_of(ds.record(0)).unwrap_err();
        assert!(matches!(err, IngestError::MissingLabel { patient_id: 42 }), "{err:?}");
    }

    #[test]
    fn out_of_range_label_is_an_error() {
        let ds = parse_raw(&raw_record_tokens("7").join(" "), &AttributeSchema::heart76(), "m").unwrap();
        let err = label_of(ds.record(0)).unwrap_err();
        assert!(matches!(err, IngestError::LabelOutOfRange { value, .. } if value == 7.0), "{err:?}");
    }

    #[test]
    fn distribution_counts_sum_to_record_count() {
        let mut text = String::new();
        for label in ["0", "4", "0", "2"] {
            text.push_str(&raw_record_tokens(label).join(" "));
            text.push('\n');
        }
        let ds = parse_raw(&text, &AttributeSchema::heart76(), "mix").unwrap();
        let counts = class_distribution(&ds).unwrap();
        assert_eq!(counts, [2, 0, 1, 0, 1]);
        assert_eq!(counts.iter().sum::<usize>(), ds.len());
    }

    #[test]
    fn pncaden_mismatch_warns_but_parses() {
        let mut tokens = raw_record_tokens("0");
        tokens[4] = "1".into(); // painloc
        tokens[5] = "1".into(); // painexer
        tokens[6] = "0".into(); // relrest
        tokens[7] = "3".into(); // pncaden, should be 2
        let ds = parse_raw(&tokens.join(" "), &AttributeSchema::heart76(), "w").unwrap();
        let warnings = validate(&ds);
        assert_eq!(warnings.len(), 1);
        assert!(matches!(
            warnings[0],
            ValidationWarning::PncadenMismatch { stored, expected, .. } if stored == 3.0 && expected == 2.0
        ));
    }

    mod roundtrip {
        use super::*;
        use proptest::prelude::*;

        fn cell_strategy() -> impl Strategy<Value = Option<f64>> {
            prop_oneof![
                2 => Just(None),
                5 => (-400i32..2000).prop_map(|v| Some(v as f64)),
                3 => (-4000i32..4000).prop_map(|v| Some(v as f64 / 10.0)),
            ]
        }

        proptest! {
            #[test]
            fn serialize_then_parse_preserves_records(
                rows in proptest::collection::vec(
                    proptest::collection::vec(cell_strategy(), ATTRIBUTE_COUNT - 1),
                    0..6,
                )
            ) {
                let schema = AttributeSchema::heart76();
                let records: Vec<PatientRecord> = rows
                    .into_iter()
                    .enumerate()
                    .map(|(i, mut cells)| {
                        // -9 is reserved for missing in the raw encoding
                        for c in cells.iter_mut() {
                            if *c == Some(-9.0) {
                                *c = None;
                            }
                        }
                        cells.push(None); // name slot
                        let pid = cells[0].map(|v| v as i64).unwrap_or(i as i64 + 1);
                        PatientRecord::new(pid, cells, "prop".into()).unwrap()
                    })
                    .collect();
                let ds = Dataset::new("prop", schema.clone(), records);
                let text = serialize_raw(&ds);
                let parsed = parse_raw(&text, &schema, "prop").unwrap();
                prop_assert_eq!(parsed.records(), ds.records());
            }
        }
    }
}
