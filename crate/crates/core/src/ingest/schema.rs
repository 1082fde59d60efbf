//! The 76-attribute record schema and its file format.
//!
//! Schemas are data, not code: the canonical 76-attribute layout and the
//! 14-column processed layout both ship as TSV files embedded in the crate
//! and loadable from disk (`id<TAB>name<TAB>kind<TAB>role[<TAB>categories]`).

use std::fmt;
use std::path::Path;
use std::sync::{Arc, OnceLock};

use super::IngestError;

/// Number of slots in the full record layout.
pub const ATTRIBUTE_COUNT: usize = 76;

/// Number of severity classes.
pub const CLASS_COUNT: usize = 5;

/// 1-based attribute position in the 76-slot record layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AttrId(u8);

impl AttrId {
    pub fn new(id: u8) -> Result<Self, IngestError> {
        if id == 0 || id as usize > ATTRIBUTE_COUNT {
            return Err(IngestError::InvalidSchema {
                line: 0,
                message: format!("attribute id {id} outside 1..=76"),
            });
        }
        Ok(AttrId(id))
    }

    pub fn get(self) -> u8 {
        self.0
    }

    /// Zero-based slot index into a record's value vector.
    pub fn slot(self) -> usize {
        self.0 as usize - 1
    }
}

impl fmt::Display for AttrId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

/// The diagnosis attribute ("num").
pub const LABEL_ATTR: AttrId = AttrId(58);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttributeKind {
    Continuous,
    Categorical,
    Binary,
    DatePart,
    Identifier,
    Unused,
}

impl AttributeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            AttributeKind::Continuous => "continuous",
            AttributeKind::Categorical => "categorical",
            AttributeKind::Binary => "binary",
            AttributeKind::DatePart => "date-part",
            AttributeKind::Identifier => "identifier",
            AttributeKind::Unused => "unused",
        }
    }

    fn parse(token: &str) -> Option<Self> {
        Some(match token {
            "continuous" => AttributeKind::Continuous,
            "categorical" => AttributeKind::Categorical,
            "binary" => AttributeKind::Binary,
            "date-part" => AttributeKind::DatePart,
            "identifier" => AttributeKind::Identifier,
            "unused" => AttributeKind::Unused,
            _ => return None,
        })
    }

    /// Identifier and unused attributes are parsed and stored but never enter
    /// selection or modeling.
    pub fn is_excluded(self) -> bool {
        matches!(self, AttributeKind::Identifier | AttributeKind::Unused)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttributeRole {
    Symptom,
    Label,
    Metadata,
}

impl AttributeRole {
    pub fn as_str(self) -> &'static str {
        match self {
            AttributeRole::Symptom => "symptom",
            AttributeRole::Label => "label",
            AttributeRole::Metadata => "metadata",
        }
    }

    fn parse(token: &str) -> Option<Self> {
        Some(match token {
            "symptom" => AttributeRole::Symptom,
            "label" => AttributeRole::Label,
            "metadata" => AttributeRole::Metadata,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttributeDescriptor {
    pub id: AttrId,
    pub name: String,
    pub kind: AttributeKind,
    pub role: AttributeRole,
    /// Documented value set for categorical attributes, sorted ascending.
    /// Binary attributes implicitly use `[0, 1]`.
    pub categories: Vec<f64>,
}

const BINARY_CATEGORIES: [f64; 2] = [0.0, 1.0];

impl AttributeDescriptor {
    /// The fixed category set, if this attribute has one.
    pub fn category_values(&self) -> Option<&[f64]> {
        match self.kind {
            AttributeKind::Binary => Some(&BINARY_CATEGORIES),
            AttributeKind::Categorical => Some(&self.categories),
            _ => None,
        }
    }
}

/// An ordered list of attribute descriptors.
///
/// The full raw layout has exactly 76 descriptors with ids 1..=76; projected
/// layouts (such as the 14-column processed format) list only the covered
/// attributes, in file column order, with ids referring to the 76-slot layout.
#[derive(Debug, Clone)]
pub struct AttributeSchema {
    descriptors: Vec<AttributeDescriptor>,
    label_index: usize,
}

impl AttributeSchema {
    pub fn parse(text: &str) -> Result<Self, IngestError> {
        let mut descriptors: Vec<AttributeDescriptor> = Vec::new();
        for (lineno, raw_line) in text.lines().enumerate() {
            let line = raw_line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let lineno = lineno + 1;
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() < 4 || fields.len() > 5 {
                return Err(IngestError::InvalidSchema {
                    line: lineno,
                    message: format!("expected 4 or 5 tab-separated fields, found {}", fields.len()),
                });
            }
            let id: u8 = fields[0].parse().map_err(|_| IngestError::InvalidSchema {
                line: lineno,
                message: format!("bad attribute id {:?}", fields[0]),
            })?;
            let id = AttrId::new(id).map_err(|_| IngestError::InvalidSchema {
                line: lineno,
                message: format!("attribute id {} outside 1..=76", fields[0]),
            })?;
            let name = fields[1].trim().to_string();
            if name.is_empty() {
                return Err(IngestError::InvalidSchema {
                    line: lineno,
                    message: "empty attribute name".into(),
                });
            }
            let kind = AttributeKind::parse(fields[2]).ok_or_else(|| IngestError::InvalidSchema {
                line: lineno,
                message: format!("unknown kind {:?}", fields[2]),
            })?;
            let role = AttributeRole::parse(fields[3]).ok_or_else(|| IngestError::InvalidSchema {
                line: lineno,
                message: format!("unknown role {:?}", fields[3]),
            })?;
            let mut categories = Vec::new();
            if let Some(cats) = fields.get(4) {
                for tok in cats.split(',') {
                    let v: f64 = tok.trim().parse().map_err(|_| IngestError::InvalidSchema {
                        line: lineno,
                        message: format!("bad category value {tok:?}"),
                    })?;
                    categories.push(v);
                }
                categories.sort_by(f64::total_cmp);
                categories.dedup();
            }
            if kind == AttributeKind::Categorical && categories.is_empty() {
                return Err(IngestError::InvalidSchema {
                    line: lineno,
                    message: format!("categorical attribute {name} lists no categories"),
                });
            }
            descriptors.push(AttributeDescriptor { id, name, kind, role, categories });
        }
        Self::from_descriptors(descriptors)
    }

    pub fn from_descriptors(descriptors: Vec<AttributeDescriptor>) -> Result<Self, IngestError> {
        if descriptors.is_empty() {
            return Err(IngestError::InvalidSchema {
                line: 0,
                message: "schema lists no attributes".into(),
            });
        }
        let mut seen_ids = [false; ATTRIBUTE_COUNT];
        let mut label_index = None;
        for (i, d) in descriptors.iter().enumerate() {
            if seen_ids[d.id.slot()] {
                return Err(IngestError::InvalidSchema {
                    line: 0,
                    message: format!("attribute id {} listed twice", d.id),
                });
            }
            seen_ids[d.id.slot()] = true;
            if d.role == AttributeRole::Label {
                if label_index.is_some() {
                    return Err(IngestError::InvalidSchema {
                        line: 0,
                        message: "more than one label attribute".into(),
                    });
                }
                label_index = Some(i);
            }
        }
        let label_index = label_index.ok_or_else(|| IngestError::InvalidSchema {
            line: 0,
            message: "no label attribute".into(),
        })?;
        Ok(AttributeSchema { descriptors, label_index })
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, IngestError> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    /// The built-in 76-attribute schema.
    pub fn heart76() -> Arc<AttributeSchema> {
        static SCHEMA: OnceLock<Arc<AttributeSchema>> = OnceLock::new();
        SCHEMA
            .get_or_init(|| {
                let schema = AttributeSchema::parse(include_str!("../../data/heart76.tsv"))
                    .expect("built-in heart76 schema must parse");
                schema.validate_full().expect("built-in heart76 schema must be complete");
                Arc::new(schema)
            })
            .clone()
    }

    /// The built-in 14-column processed-format schema.
    pub fn processed14() -> Arc<AttributeSchema> {
        static SCHEMA: OnceLock<Arc<AttributeSchema>> = OnceLock::new();
        SCHEMA
            .get_or_init(|| {
                Arc::new(
                    AttributeSchema::parse(include_str!("../../data/processed14.tsv"))
                        .expect("built-in processed14 schema must parse"),
                )
            })
            .clone()
    }

    pub fn len(&self) -> usize {
        self.descriptors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.descriptors.is_empty()
    }

    /// Descriptors in declaration order (file column order for projections).
    pub fn descriptors(&self) -> &[AttributeDescriptor] {
        &self.descriptors
    }

    pub fn descriptor(&self, id: AttrId) -> Option<&AttributeDescriptor> {
        self.descriptors.iter().find(|d| d.id == id)
    }

    /// Case-insensitive name lookup.
    pub fn by_name(&self, name: &str) -> Option<&AttributeDescriptor> {
        let lower = name.trim().to_ascii_lowercase();
        self.descriptors.iter().find(|d| d.name == lower)
    }

    pub fn label(&self) -> &AttributeDescriptor {
        &self.descriptors[self.label_index]
    }

    pub fn name_of(&self, id: AttrId) -> &str {
        self.descriptor(id).map(|d| d.name.as_str()).unwrap_or("?")
    }

    /// True when every one of the 76 slots is described.
    pub fn is_full(&self) -> bool {
        self.descriptors.len() == ATTRIBUTE_COUNT
    }

    /// Symptom-role attributes, the candidate universe for feature selection.
    pub fn symptom_ids(&self) -> impl Iterator<Item = AttrId> + '_ {
        self.descriptors
            .iter()
            .filter(|d| d.role == AttributeRole::Symptom)
            .map(|d| d.id)
    }

    /// Symptom attributes that are eligible for selection and modeling.
    pub fn selectable_ids(&self) -> impl Iterator<Item = AttrId> + '_ {
        self.descriptors
            .iter()
            .filter(|d| d.role == AttributeRole::Symptom && !d.kind.is_excluded())
            .map(|d| d.id)
    }

    /// Validate the invariants of the complete raw layout: 76 descriptors,
    /// ids 1..=76 once each, "num" (58) as the unique label, and the
    /// documented identifier/unused attributes carrying an excluded kind.
    pub fn validate_full(&self) -> Result<(), IngestError> {
        if !self.is_full() {
            return Err(IngestError::InvalidSchema {
                line: 0,
                message: format!("full schema needs 76 descriptors, found {}", self.len()),
            });
        }
        let label = self.label();
        if label.id != LABEL_ATTR || label.name != "num" {
            return Err(IngestError::InvalidSchema {
                line: 0,
                message: format!("label must be attribute 58 \"num\", found {} {:?}", label.id, label.name),
            });
        }
        const EXCLUDED_IDS: [u8; 16] = [1, 2, 36, 45, 46, 52, 53, 54, 69, 70, 71, 72, 73, 74, 75, 76];
        for id in EXCLUDED_IDS {
            let d = self.descriptor(AttrId(id)).expect("full schema covers all slots");
            if !d.kind.is_excluded() {
                return Err(IngestError::InvalidSchema {
                    line: 0,
                    message: format!("attribute {id} ({}) must have kind identifier or unused", d.name),
                });
            }
        }
        Ok(())
    }
}
