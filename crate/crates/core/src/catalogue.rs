//! Catalogue codes, call numbers, catalogue records and the cataloguing
//! canons (consistence, sought heading, local variation).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::facet::SubjectHeading;
use crate::model::{path_of, Finding, Identifier, IdentifierError, RuleCode};

pub const VALUE_PLACEHOLDER: &str = "{value}";

#[derive(Debug, Error)]
pub enum CatalogueError {
    #[error("catalogue code parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{path}: {source}")]
    Identifier {
        path: String,
        source: IdentifierError,
    },
    #[error("resource type {resource_type} declares field `{key}` twice")]
    DuplicateField { resource_type: String, key: String },
    #[error("resource type {resource_type} reuses order {order}")]
    DuplicateOrder { resource_type: String, order: i64 },
    #[error("exemption references unknown field {resource_type}/{key}")]
    UnknownExemption { resource_type: String, key: String },
    #[error("local variation references unknown field `{0}`")]
    UnknownVariationField(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CallNumberError {
    #[error("surname `{0}` contains no letters")]
    NoLetters(String),
    #[error("year {0} is not a 4-digit number")]
    BadYear(u32),
    #[error("accession number must be positive")]
    ZeroAccession,
    #[error("call number `{0}` already exists even with accession suffix")]
    DuplicateAccession(String),
    #[error("book part `{0}` does not match [A-Z]{{1,3}}[0-9]{{2}}([0-9]+)?")]
    BadBookPart(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RecordError {
    #[error("unknown resource type `{0}`")]
    UnknownType(String),
    #[error("unknown field keys: {}", .0.join(", "))]
    UnknownFields(Vec<String>),
    #[error("missing required fields: {}", .0.join(", "))]
    MissingRequired(Vec<String>),
    #[error(transparent)]
    Identifier(#[from] IdentifierError),
    #[error("accession number must be positive")]
    ZeroAccession,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    pub key: Identifier,
    pub required: bool,
    pub sought: bool,
    pub order: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContextExemption {
    pub resource_type: Identifier,
    pub field: Identifier,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LocalVariation {
    pub field: Identifier,
    pub template: String,
}

impl LocalVariation {
    pub fn apply(&self, value: &str) -> String {
        self.template.replace(VALUE_PLACEHOLDER, value)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CatalogueCode {
    pub id: Identifier,
    /// Field specs per resource type, sorted by `order`.
    #[serde(default)]
    pub resource_types: BTreeMap<Identifier, Vec<FieldSpec>>,
    #[serde(default)]
    pub context_exemptions: Vec<ContextExemption>,
    #[serde(default)]
    pub local_variations: Vec<LocalVariation>,
}

impl CatalogueCode {
    pub fn fields(&self, resource_type: &str) -> Option<&[FieldSpec]> {
        self.resource_types.get(resource_type).map(Vec::as_slice)
    }

    fn is_exempt(&self, resource_type: &str, key: &str) -> bool {
        self.context_exemptions
            .iter()
            .any(|e| e.resource_type.as_str() == resource_type && e.field.as_str() == key)
    }

    fn variation(&self, key: &str) -> Option<&LocalVariation> {
        self.local_variations.iter().find(|v| v.field.as_str() == key)
    }
}

pub fn load_catalogue_code(document: &str) -> Result<CatalogueCode, CatalogueError> {
    let mut code: CatalogueCode =
        serde_json::from_str(document).map_err(|e| CatalogueError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
    for (name, specs) in code.resource_types.iter_mut() {
        let mut keys = BTreeSet::new();
        let mut orders = BTreeSet::new();
        for spec in specs.iter() {
            if !keys.insert(spec.key.clone()) {
                return Err(CatalogueError::DuplicateField {
                    resource_type: name.to_string(),
                    key: spec.key.to_string(),
                });
            }
            if !orders.insert(spec.order) {
                return Err(CatalogueError::DuplicateOrder {
                    resource_type: name.to_string(),
                    order: spec.order,
                });
            }
        }
        specs.sort_by_key(|s| s.order);
    }
    for e in &code.context_exemptions {
        let known = code
            .fields(e.resource_type.as_str())
            .is_some_and(|specs| specs.iter().any(|s| s.key == e.field));
        if !known {
            return Err(CatalogueError::UnknownExemption {
                resource_type: e.resource_type.to_string(),
                key: e.field.to_string(),
            });
        }
    }
    for v in &code.local_variations {
        let known = code
            .resource_types
            .values()
            .any(|specs| specs.iter().any(|s| s.key == v.field));
        if !known {
            return Err(CatalogueError::UnknownVariationField(v.field.to_string()));
        }
    }
    Ok(code)
}

/// Shelf identifier: class number plus book number.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CallNumber {
    pub class_part: String,
    pub book_part: String,
}

fn is_book_part(text: &str) -> bool {
    let letters = text.chars().take_while(|c| c.is_ascii_uppercase()).count();
    let digits = &text[letters..];
    (1..=3).contains(&letters) && digits.len() >= 2 && digits.chars().all(|c| c.is_ascii_digit())
}

impl CallNumber {
    pub fn new(
        class_part: impl Into<String>,
        book_part: impl Into<String>,
    ) -> Result<Self, CallNumberError> {
        let book_part = book_part.into();
        if !is_book_part(&book_part) {
            return Err(CallNumberError::BadBookPart(book_part));
        }
        Ok(CallNumber {
            class_part: class_part.into(),
            book_part,
        })
    }
}

impl fmt::Display for CallNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.class_part, self.book_part)
    }
}

/// Book part = first three ASCII letters of the surname, uppercased, plus the
/// last two digits of the year. On collision with `existing` the accession
/// number is appended.
pub fn make_call_number(
    class_number: &str,
    surname: &str,
    year: u32,
    accession: u64,
    existing: &BTreeSet<CallNumber>,
) -> Result<CallNumber, CallNumberError> {
    let letters: String = surname
        .chars()
        .filter(char::is_ascii_alphabetic)
        .take(3)
        .map(|c| c.to_ascii_uppercase())
        .collect();
    if letters.is_empty() {
        return Err(CallNumberError::NoLetters(surname.to_string()));
    }
    if !(1000..=9999).contains(&year) {
        return Err(CallNumberError::BadYear(year));
    }
    if accession == 0 {
        return Err(CallNumberError::ZeroAccession);
    }
    let plain = CallNumber::new(class_number, format!("{letters}{:02}", year % 100))?;
    if !existing.contains(&plain) {
        return Ok(plain);
    }
    let suffixed = CallNumber::new(class_number, format!("{}{accession}", plain.book_part))?;
    if existing.contains(&suffixed) {
        return Err(CallNumberError::DuplicateAccession(suffixed.to_string()));
    }
    Ok(suffixed)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordField {
    pub key: Identifier,
    pub value: String,
}

/// Serialized with keys in the order record_id, resource_type, call_number,
/// accession_number, headings, fields.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatalogueRecord {
    pub record_id: Identifier,
    pub resource_type: Identifier,
    pub call_number: CallNumber,
    pub accession_number: u64,
    pub headings: Vec<SubjectHeading>,
    pub fields: Vec<RecordField>,
}

impl CatalogueRecord {
    pub fn field(&self, key: &str) -> Option<&str> {
        self.fields
            .iter()
            .find(|f| f.key.as_str() == key)
            .map(|f| f.value.as_str())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("record serializes")
    }
}

pub fn build_record(
    code: &CatalogueCode,
    resource_type: &str,
    imprint: &BTreeMap<String, String>,
    headings: Vec<SubjectHeading>,
    call_number: CallNumber,
    accession: u64,
) -> Result<CatalogueRecord, RecordError> {
    let specs = code
        .fields(resource_type)
        .ok_or_else(|| RecordError::UnknownType(resource_type.to_string()))?;
    if accession == 0 {
        return Err(RecordError::ZeroAccession);
    }
    let unknown: Vec<String> = imprint
        .keys()
        .filter(|k| !specs.iter().any(|s| s.key.as_str() == k.as_str()))
        .cloned()
        .collect();
    if !unknown.is_empty() {
        return Err(RecordError::UnknownFields(unknown));
    }
    let missing: Vec<String> = specs
        .iter()
        .filter(|s| s.required && !imprint.contains_key(s.key.as_str()))
        .map(|s| s.key.to_string())
        .collect();
    if !missing.is_empty() {
        return Err(RecordError::MissingRequired(missing));
    }
    let fields = specs
        .iter()
        .filter_map(|s| {
            imprint.get(s.key.as_str()).map(|value| RecordField {
                key: s.key.clone(),
                value: match code.variation(s.key.as_str()) {
                    Some(v) => v.apply(value),
                    None => value.clone(),
                },
            })
        })
        .collect();
    Ok(CatalogueRecord {
        record_id: Identifier::new(format!("{resource_type}-{accession}"))?,
        resource_type: Identifier::new(resource_type)?,
        call_number,
        accession_number: accession,
        headings,
        fields,
    })
}

fn derives_from_chain(heading: &SubjectHeading, record: &CatalogueRecord) -> bool {
    !heading.reference.is_empty() && record.call_number.class_part.starts_with(&heading.reference)
}

fn derives_from_sought_field(
    heading: &SubjectHeading,
    record: &CatalogueRecord,
    specs: &[FieldSpec],
) -> bool {
    record.fields.iter().any(|f| {
        f.value == heading.heading
            && specs.iter().any(|s| s.key == f.key && s.sought)
    })
}

pub fn lint_records(code: &CatalogueCode, records: &[CatalogueRecord]) -> Vec<Finding> {
    let cid = code.id.as_str();
    let mut findings = Vec::new();

    let mut by_type: BTreeMap<&str, Vec<&CatalogueRecord>> = BTreeMap::new();
    for r in records {
        by_type.entry(r.resource_type.as_str()).or_default().push(r);
    }

    for (resource_type, group) in &by_type {
        let Some(specs) = code.fields(resource_type) else {
            for r in group {
                findings.push(Finding::new(
                    RuleCode::CC1,
                    path_of([cid, r.record_id.as_str()]),
                    format!("resource type `{resource_type}` is not in the catalogue code"),
                ));
            }
            continue;
        };
        let union: BTreeSet<&str> = group
            .iter()
            .flat_map(|r| r.fields.iter().map(|f| f.key.as_str()))
            .collect();
        for r in group {
            let present: BTreeSet<&str> = r.fields.iter().map(|f| f.key.as_str()).collect();
            let missing: Vec<&str> = union
                .difference(&present)
                .copied()
                .filter(|k| !code.is_exempt(resource_type, k))
                .collect();
            if !missing.is_empty() {
                findings.push(Finding::new(
                    RuleCode::CC1,
                    path_of([cid, r.record_id.as_str()]),
                    format!("record lacks {} present on other {resource_type} records", missing.join(", ")),
                ));
            }
            let foreign: Vec<&str> = present
                .iter()
                .copied()
                .filter(|k| !specs.iter().any(|s| s.key.as_str() == *k))
                .collect();
            if !foreign.is_empty() {
                findings.push(Finding::new(
                    RuleCode::CC1,
                    path_of([cid, r.record_id.as_str()]),
                    format!("fields {} are not specified for {resource_type}", foreign.join(", ")),
                ));
            }
            for (i, h) in r.headings.iter().enumerate() {
                if !derives_from_chain(h, r) && !derives_from_sought_field(h, r, specs) {
                    findings.push(Finding::new(
                        RuleCode::CC2,
                        format!("{cid}/{}/headings/{i}", r.record_id),
                        format!("heading `{}` derives from no chain link or sought field", h.heading),
                    ));
                }
            }
        }
    }

    let used: BTreeSet<&str> = records
        .iter()
        .flat_map(|r| r.fields.iter().map(|f| f.key.as_str()))
        .collect();
    for v in &code.local_variations {
        let placeholders = v.template.matches(VALUE_PLACEHOLDER).count();
        if used.contains(v.field.as_str()) && placeholders != 1 {
            findings.push(Finding::new(
                RuleCode::CC3,
                path_of([cid, "local_variations", v.field.as_str()]),
                format!("template `{}` has {placeholders} `{{value}}` placeholders", v.template),
            ));
        }
    }

    findings.sort();
    findings
}
