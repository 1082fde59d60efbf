//! Externally supplied symptom likelihood tables.
//!
//! The CSV holds one row per symptom with five values, read as the
//! class-conditional presence probabilities P(symptom present | class) for
//! absence..serious (rows do not sum to 1 across classes, so they cannot be
//! class priors). The canonical header names the classes ABSENCE, STARTING,
//! MILD, MODERATE, SERIOUS; the alias spelling NORMAL, STARTING, LOW, MILD,
//! SERIOUS is accepted positionally.

use std::sync::OnceLock;

use crate::ingest::{AttributeSchema, CLASS_COUNT};
use crate::preprocess::AttrBins;

use super::{AttrConditional, NbcError, NbcModel};

#[derive(Debug, Clone, PartialEq)]
pub struct PriorRow {
    /// Lower-cased symptom name.
    pub name: String,
    /// P(present | class) for the five classes in code order.
    pub values: [f64; CLASS_COUNT],
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PriorTable {
    rows: Vec<PriorRow>,
}

impl PriorTable {
    pub fn rows(&self) -> &[PriorRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<&[f64; CLASS_COUNT]> {
        let lower = name.trim().to_ascii_lowercase();
        self.rows.iter().find(|r| r.name == lower).map(|r| &r.values)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("SYMPTOM,ABSENCE,STARTING,MILD,MODERATE,SERIOUS\n");
        for row in &self.rows {
            out.push_str(&row.name.to_ascii_uppercase());
            for v in row.values {
                out.push_str(&format!(",{v}"));
            }
            out.push('\n');
        }
        out
    }
}

const CANONICAL_HEADER: [&str; CLASS_COUNT] = ["absence", "starting", "mild", "moderate", "serious"];
const ALIAS_HEADER: [&str; CLASS_COUNT] = ["normal", "starting", "low", "mild", "serious"];

/// Parse a symptom likelihood CSV. Values must lie strictly inside (0,1).
pub fn load_prior_table(text: &str) -> Result<PriorTable, NbcError> {
    let mut rows = Vec::new();
    let mut lines = text.lines().enumerate();
    let header = loop {
        match lines.next() {
            Some((lineno, raw)) if raw.trim().is_empty() => {
                let _ = lineno;
                continue;
            }
            Some((_, raw)) => break raw,
            None => return Ok(PriorTable::default()),
        }
    };
    let header_fields: Vec<String> =
        header.split(',').map(|f| f.trim().to_ascii_lowercase()).collect();
    if header_fields.len() != CLASS_COUNT + 1 || header_fields[0] != "symptom" {
        return Err(NbcError::BadHeader(header.to_string()));
    }
    let classes = &header_fields[1..];
    if classes != CANONICAL_HEADER && classes != ALIAS_HEADER {
        return Err(NbcError::BadHeader(header.to_string()));
    }
    for (lineno, raw_line) in lines {
        let line = raw_line.trim();
        if line.is_empty() {
            continue;
        }
        let lineno = lineno + 1;
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != CLASS_COUNT + 1 {
            return Err(NbcError::RowArity { line: lineno, expected: CLASS_COUNT + 1, got: fields.len() });
        }
        let name = fields[0].to_ascii_lowercase();
        let mut values = [0.0f64; CLASS_COUNT];
        for (c, field) in fields[1..].iter().enumerate() {
            let value: f64 = field.parse().map_err(|_| NbcError::ValueOutOfRange {
                line: lineno,
                symptom: name.clone(),
                value: f64::NAN,
            })?;
            if !(value > 0.0 && value < 1.0) {
                return Err(NbcError::ValueOutOfRange { line: lineno, symptom: name.clone(), value });
            }
            values[c] = value;
        }
        rows.push(PriorRow { name, values });
    }
    Ok(PriorTable { rows })
}

/// The symptom likelihood table shipped with the crate.
pub fn builtin_table6() -> &'static PriorTable {
    static TABLE: OnceLock<PriorTable> = OnceLock::new();
    TABLE.get_or_init(|| {
        load_prior_table(include_str!("../../data/table6.csv")).expect("built-in prior table must parse")
    })
}

/// Build a binary-attribute model from a likelihood table: P(present|c) from
/// the row, P(absent|c) its complement. Symptom names must exist in the
/// 76-attribute schema.
pub fn seed_model_from_table(
    table: &PriorTable,
    class_priors: [f64; CLASS_COUNT],
) -> Result<NbcModel, NbcError> {
    let sum: f64 = class_priors.iter().sum();
    if class_priors.iter().any(|p| !p.is_finite() || *p < 0.0) || (sum - 1.0).abs() > 1e-9 {
        return Err(NbcError::InvalidPriors(class_priors.to_vec()));
    }
    let schema = AttributeSchema::heart76();
    let mut attrs = Vec::with_capacity(table.len());
    for row in table.rows() {
        let descriptor = schema
            .by_name(&row.name)
            .ok_or_else(|| NbcError::UnknownSymptomName(row.name.clone()))?;
        let cond: Vec<Vec<f64>> = row.values.iter().map(|v| vec![1.0 - v, *v]).collect();
        attrs.push(AttrConditional {
            attr: descriptor.id,
            name: descriptor.name.clone(),
            bins: AttrBins::Categories(vec![0.0, 1.0]),
            cond,
        });
    }
    Ok(NbcModel::new(0.0, [0; CLASS_COUNT], class_priors, attrs))
}
