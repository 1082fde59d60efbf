//! Versioned line-oriented model files.
//!
//! Floats are written in Rust's shortest round-trip decimal form, so reading
//! a file back reproduces every probability bit for bit and re-serializing
//! yields identical bytes.

use std::path::Path;

use crate::ingest::{AttrId, CLASS_COUNT};
use crate::preprocess::AttrBins;

use super::{AttrConditional, NbcError, NbcModel};

const MAGIC: &str = "cardiopipe-model v1";

pub fn write_model(model: &NbcModel) -> String {
    let mut out = String::new();
    out.push_str(MAGIC);
    out.push('\n');
    out.push_str(&format!("alpha {}\n", model.alpha()));
    out.push_str(&format!(
        "class_counts {}\n",
        model.class_counts().map(|c| c.to_string()).join(" ")
    ));
    out.push_str(&format!("priors {}\n", join_floats(model.class_priors())));
    out.push_str(&format!("attrs {}\n", model.attrs().len()));
    for conditional in model.attrs() {
        match &conditional.bins {
            AttrBins::Categories(values) => out.push_str(&format!(
                "attr {} {} categories {}\n",
                conditional.attr,
                conditional.name,
                join_floats(values)
            )),
            AttrBins::Edges(edges) => out.push_str(&format!(
                "attr {} {} edges {}\n",
                conditional.attr,
                conditional.name,
                join_floats(edges)
            )),
        }
        for (class, row) in conditional.cond.iter().enumerate() {
            out.push_str(&format!("cond {} {} {}\n", conditional.attr, class, join_floats(row)));
        }
    }
    out.push_str("end\n");
    out
}

fn join_floats(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v}")).collect::<Vec<_>>().join(" ")
}

pub fn read_model(text: &str) -> Result<NbcModel, NbcError> {
    let mut lines = text.lines().enumerate().peekable();
    let bad = |line: usize, message: String| NbcError::BadModelFile { line: line + 1, message };

    let (lineno, magic) = lines.next().ok_or_else(|| bad(0, "empty model file".into()))?;
    if magic.trim() != MAGIC {
        return Err(bad(lineno, format!("expected header {MAGIC:?}, found {magic:?}")));
    }

    let alpha = parse_keyed_floats(&mut lines, "alpha", 1)?[0];
    let counts = parse_keyed_floats(&mut lines, "class_counts", CLASS_COUNT)?;
    let mut class_counts = [0usize; CLASS_COUNT];
    for (slot, v) in class_counts.iter_mut().zip(&counts) {
        *slot = *v as usize;
    }
    let priors = parse_keyed_floats(&mut lines, "priors", CLASS_COUNT)?;
    let mut class_priors = [0.0f64; CLASS_COUNT];
    class_priors.copy_from_slice(&priors);
    let attr_count = parse_keyed_floats(&mut lines, "attrs", 1)?[0] as usize;

    let mut attrs = Vec::with_capacity(attr_count);
    for _ in 0..attr_count {
        let (lineno, line) = lines.next().ok_or_else(|| bad(usize::MAX - 1, "truncated model file".into()))?;
        let mut tokens = line.split_whitespace();
        if tokens.next() != Some("attr") {
            return Err(bad(lineno, format!("expected attr line, found {line:?}")));
        }
        let id: u8 = tokens
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| bad(lineno, "bad attribute id".into()))?;
        let attr = AttrId::new(id).map_err(|_| bad(lineno, format!("attribute id {id} outside 1..=76")))?;
        let name = tokens.next().ok_or_else(|| bad(lineno, "missing attribute name".into()))?.to_string();
        let shape = tokens.next().ok_or_else(|| bad(lineno, "missing bin shape".into()))?;
        let values: Vec<f64> = tokens
            .map(|t| t.parse().map_err(|_| bad(lineno, format!("bad float {t:?}"))))
            .collect::<Result<_, _>>()?;
        let bins = match shape {
            "categories" => AttrBins::Categories(values),
            "edges" => AttrBins::Edges(values),
            other => return Err(bad(lineno, format!("unknown bin shape {other:?}"))),
        };
        let n_bins = bins.bin_count();
        let mut cond = Vec::with_capacity(CLASS_COUNT);
        for class in 0..CLASS_COUNT {
            let (lineno, line) =
                lines.next().ok_or_else(|| bad(usize::MAX - 1, "truncated model file".into()))?;
            let mut tokens = line.split_whitespace();
            if tokens.next() != Some("cond") {
                return Err(bad(lineno, format!("expected cond line, found {line:?}")));
            }
            let got_id: Option<u8> = tokens.next().and_then(|t| t.parse().ok());
            let got_class: Option<usize> = tokens.next().and_then(|t| t.parse().ok());
            if got_id != Some(id) || got_class != Some(class) {
                return Err(bad(lineno, format!("cond line out of order: {line:?}")));
            }
            let row: Vec<f64> = tokens
                .map(|t| t.parse().map_err(|_| bad(lineno, format!("bad float {t:?}"))))
                .collect::<Result<_, _>>()?;
            if row.len() != n_bins {
                return Err(bad(lineno, format!("expected {n_bins} probabilities, found {}", row.len())));
            }
            cond.push(row);
        }
        attrs.push(AttrConditional { attr, name, bins, cond });
    }
    match lines.next() {
        Some((_, line)) if line.trim() == "end" => {}
        Some((lineno, line)) => return Err(bad(lineno, format!("expected end marker, found {line:?}"))),
        None => return Err(bad(usize::MAX - 1, "missing end marker".into())),
    }
    Ok(NbcModel::new(alpha, class_counts, class_priors, attrs))
}

fn parse_keyed_floats<'a>(
    lines: &mut impl Iterator<Item = (usize, &'a str)>,
    key: &str,
    expected: usize,
) -> Result<Vec<f64>, NbcError> {
    let (lineno, line) = lines
        .next()
        .ok_or(NbcError::BadModelFile { line: 0, message: format!("missing {key} line") })?;
    let bad = |message: String| NbcError::BadModelFile { line: lineno + 1, message };
    let mut tokens = line.split_whitespace();
    if tokens.next() != Some(key) {
        return Err(bad(format!("expected {key} line, found {line:?}")));
    }
    let values: Vec<f64> = tokens
        .map(|t| t.parse().map_err(|_| bad(format!("bad float {t:?}"))))
        .collect::<Result<_, _>>()?;
    if values.len() != expected {
        return Err(bad(format!("expected {expected} values for {key}, found {}", values.len())));
    }
    Ok(values)
}

pub fn read_model_file(path: impl AsRef<Path>) -> Result<NbcModel, NbcError> {
    read_model(&std::fs::read_to_string(path)?)
}
