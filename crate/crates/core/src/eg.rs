//! Entity graph assembly: declarative dataset mappings, typed ingestion of
//! tabular sources, graph building with IRI minting, and snapshots.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::etg::{DataType, SchemaGraph};
use crate::export::{export_jsongraph, export_ntriples};
use crate::model::{
    mint_iri, mint_iri_str, Finding, Identifier, Iri, IriError, MintError, RuleCode,
    Timestamp, TimestampError,
};

pub const XSD: &str = "http://www.w3.org/2001/XMLSchema#";

/// Predicate name reserved for the single type triple of each entity.
pub const TYPE_PROPERTY: &str = "type";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LiteralType {
    String,
    Integer,
    Date,
}

impl LiteralType {
    pub const ALL: [LiteralType; 3] = [LiteralType::String, LiteralType::Integer, LiteralType::Date];

    pub fn as_str(self) -> &'static str {
        match self {
            LiteralType::String => "string",
            LiteralType::Integer => "integer",
            LiteralType::Date => "date",
        }
    }

    pub fn xsd_iri(self) -> String {
        format!("{XSD}{}", self.as_str())
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.as_str() == name)
    }

    pub fn from_xsd_iri(iri: &str) -> Option<Self> {
        iri.strip_prefix(XSD).and_then(Self::from_name)
    }

    pub fn data_type(self) -> DataType {
        match self {
            LiteralType::String => DataType::String,
            LiteralType::Integer => DataType::Integer,
            LiteralType::Date => DataType::Date,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    pub lexical: String,
    pub datatype: LiteralType,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Iri(Iri),
    Literal(Literal),
}

impl Term {
    pub fn as_iri(&self) -> Option<&Iri> {
        match self {
            Term::Iri(i) => Some(i),
            Term::Literal(_) => None,
        }
    }
}

pub(crate) fn escape_literal(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '"' => out.push_str("\\\""),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out
}

/// N-Triples form: `<iri>` or `"lexical"^^<datatype>`.
impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Iri(i) => write!(f, "<{i}>"),
            Term::Literal(l) => write!(
                f,
                "\"{}\"^^<{}>",
                escape_literal(&l.lexical),
                l.datatype.xsd_iri()
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Triple {
    pub subject: Iri,
    pub predicate: Iri,
    pub object: Term,
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}> <{}> {} .", self.subject, self.predicate, self.object)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct TypedValue {
    pub property: Identifier,
    pub literal: Literal,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entity {
    pub iri: Iri,
    pub type_id: Identifier,
    pub values: Vec<TypedValue>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntityGraph {
    pub iri: Iri,
    pub timestamp: Timestamp,
    pub vocabulary: Iri,
    pub sources: Vec<Identifier>,
    /// Sorted by IRI.
    pub entities: Vec<Entity>,
    /// Sorted by (subject, predicate, object).
    pub triples: Vec<Triple>,
}

impl EntityGraph {
    pub fn entity_count(&self) -> usize {
        self.entities.len()
    }

    pub fn triple_count(&self) -> usize {
        self.triples.len()
    }

    pub fn entity(&self, iri: &str) -> Option<&Entity> {
        self.entities
            .binary_search_by(|e| e.iri.as_str().cmp(iri))
            .ok()
            .map(|i| &self.entities[i])
    }

    pub fn property_iri(&self, name: &str) -> Iri {
        vocabulary_iri(&self.vocabulary, "prop", name)
    }

    pub fn type_iri(&self, type_id: &str) -> Iri {
        vocabulary_iri(&self.vocabulary, "type", type_id)
    }

    /// Local property name of a predicate minted under this vocabulary.
    pub fn property_name<'a>(&self, predicate: &'a Iri) -> Option<&'a str> {
        predicate
            .as_str()
            .strip_prefix(self.vocabulary.as_str())
            .and_then(|rest| rest.strip_prefix("/prop/"))
    }

    /// Object-property triples, i.e. links between entities.
    pub fn links(&self) -> impl Iterator<Item = &Triple> {
        let type_predicate = self.property_iri(TYPE_PROPERTY);
        self.triples
            .iter()
            .filter(move |t| t.predicate != type_predicate && matches!(t.object, Term::Iri(_)))
    }

    /// Rebuilds triples from entities and links and sorts everything.
    pub(crate) fn assemble(
        iri: Iri,
        timestamp: Timestamp,
        vocabulary: Iri,
        sources: Vec<Identifier>,
        mut entities: Vec<Entity>,
        links: Vec<(Iri, Identifier, Iri)>,
    ) -> Self {
        let mut eg = EntityGraph {
            iri,
            timestamp,
            vocabulary,
            sources,
            entities: Vec::new(),
            triples: Vec::new(),
        };
        let type_predicate = eg.property_iri(TYPE_PROPERTY);
        let mut triples = BTreeSet::new();
        for e in &mut entities {
            e.values.sort();
            e.values.dedup();
            triples.insert(Triple {
                subject: e.iri.clone(),
                predicate: type_predicate.clone(),
                object: Term::Iri(eg.type_iri(e.type_id.as_str())),
            });
            for v in &e.values {
                triples.insert(Triple {
                    subject: e.iri.clone(),
                    predicate: eg.property_iri(v.property.as_str()),
                    object: Term::Literal(v.literal.clone()),
                });
            }
        }
        for (s, p, o) in links {
            triples.insert(Triple {
                subject: s,
                predicate: eg.property_iri(p.as_str()),
                object: Term::Iri(o),
            });
        }
        entities.sort_by(|a, b| a.iri.cmp(&b.iri));
        eg.entities = entities;
        eg.triples = triples.into_iter().collect();
        eg
    }
}

fn vocabulary_iri(vocabulary: &Iri, kind: &str, name: &str) -> Iri {
    mint_iri_str(vocabulary, &[kind, name]).expect("vocabulary names are identifiers")
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DanglingPolicy {
    #[default]
    Error,
    Skip,
    Stub,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataMap {
    pub column: String,
    pub property: Identifier,
    pub datatype: LiteralType,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkMap {
    pub column: String,
    pub property: Identifier,
    pub target: Identifier,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetMap {
    pub id: Identifier,
    #[serde(rename = "type")]
    pub type_id: Identifier,
    /// Path of the CSV or JSON source, relative to the mapping file.
    pub source: String,
    pub id_column: String,
    #[serde(default)]
    pub data_maps: Vec<DataMap>,
    #[serde(default)]
    pub link_maps: Vec<LinkMap>,
    #[serde(default)]
    pub dangling_policy: DanglingPolicy,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MappingSpec {
    pub datasets: Vec<DatasetMap>,
}

impl MappingSpec {
    pub fn dataset(&self, id: &str) -> Option<&DatasetMap> {
        self.datasets.iter().find(|d| d.id.as_str() == id)
    }
}

#[derive(Debug, Error)]
pub enum MappingError {
    #[error("mapping parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("mapping lists no datasets")]
    Empty,
    #[error("duplicate dataset `{0}`")]
    DuplicateDataset(String),
    #[error("{dataset}: type `{type_id}` is not grounded in the schema graph")]
    UnknownType { dataset: String, type_id: String },
    #[error("{dataset}: type name `{0}` is reserved", .type_id)]
    ReservedType { dataset: String, type_id: String },
    #[error("{dataset}: `{property}` is not a {kind} property of {type_id}")]
    UnknownProperty {
        dataset: String,
        type_id: String,
        property: String,
        kind: &'static str,
    },
    #[error("{dataset}: `{property}` is declared {declared}, mapped as {mapped}")]
    DatatypeMismatch {
        dataset: String,
        property: String,
        declared: &'static str,
        mapped: &'static str,
    },
    #[error("{dataset}: property `{property}` mapped more than once")]
    DuplicateProperty { dataset: String, property: String },
    #[error("{dataset}: link target dataset `{target}` is not in the mapping")]
    UnknownTarget { dataset: String, target: String },
    #[error("{dataset}: link `{property}` expects {range}, target dataset holds {found}")]
    RangeMismatch {
        dataset: String,
        property: String,
        range: String,
        found: String,
    },
    #[error("{dataset}: id_column is empty")]
    EmptyIdColumn { dataset: String },
}

pub fn load_mapping_spec(document: &str, schema: &SchemaGraph) -> Result<MappingSpec, MappingError> {
    let spec: MappingSpec = serde_json::from_str(document).map_err(|e| MappingError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    validate_mapping_spec(&spec, schema)?;
    Ok(spec)
}

pub fn validate_mapping_spec(spec: &MappingSpec, schema: &SchemaGraph) -> Result<(), MappingError> {
    if spec.datasets.is_empty() {
        return Err(MappingError::Empty);
    }
    let mut ids = BTreeSet::new();
    for d in &spec.datasets {
        if !ids.insert(&d.id) {
            return Err(MappingError::DuplicateDataset(d.id.to_string()));
        }
    }
    let grounded = schema.grounded_types();
    for d in &spec.datasets {
        let dataset = d.id.to_string();
        if matches!(d.type_id.as_str(), "eg" | "etg") {
            return Err(MappingError::ReservedType {
                dataset,
                type_id: d.type_id.to_string(),
            });
        }
        if !grounded.contains(&d.type_id) {
            return Err(MappingError::UnknownType {
                dataset,
                type_id: d.type_id.to_string(),
            });
        }
        if d.id_column.trim().is_empty() {
            return Err(MappingError::EmptyIdColumn { dataset });
        }
        let mut mapped = BTreeSet::new();
        let data = schema.etg.effective_data_properties(d.type_id.as_str());
        for m in &d.data_maps {
            let unknown = || MappingError::UnknownProperty {
                dataset: dataset.clone(),
                type_id: d.type_id.to_string(),
                property: m.property.to_string(),
                kind: "data",
            };
            if m.property.as_str() == TYPE_PROPERTY {
                return Err(unknown());
            }
            let declared = data.iter().find(|p| p.name == m.property).ok_or_else(unknown)?;
            if declared.datatype != m.datatype.data_type() {
                return Err(MappingError::DatatypeMismatch {
                    dataset,
                    property: m.property.to_string(),
                    declared: declared.datatype.as_str(),
                    mapped: m.datatype.as_str(),
                });
            }
            if !mapped.insert(&m.property) {
                return Err(MappingError::DuplicateProperty {
                    dataset,
                    property: m.property.to_string(),
                });
            }
        }
        let objects = schema.etg.effective_object_properties(d.type_id.as_str());
        for m in &d.link_maps {
            let declared = objects
                .iter()
                .find(|p| p.name == m.property && m.property.as_str() != TYPE_PROPERTY)
                .ok_or_else(|| MappingError::UnknownProperty {
                    dataset: dataset.clone(),
                    type_id: d.type_id.to_string(),
                    property: m.property.to_string(),
                    kind: "object",
                })?;
            let target = spec.dataset(m.target.as_str()).ok_or_else(|| MappingError::UnknownTarget {
                dataset: dataset.clone(),
                target: m.target.to_string(),
            })?;
            if !schema.etg.is_a(target.type_id.as_str(), declared.range.as_str()) {
                return Err(MappingError::RangeMismatch {
                    dataset,
                    property: m.property.to_string(),
                    range: declared.range.to_string(),
                    found: target.type_id.to_string(),
                });
            }
            if !mapped.insert(&m.property) {
                return Err(MappingError::DuplicateProperty {
                    dataset,
                    property: m.property.to_string(),
                });
            }
        }
    }
    Ok(())
}

#[derive(Debug, Error)]
pub enum TableError {
    #[error("table has no header row")]
    MissingHeader,
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
    #[error("JSON table error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("JSON table must be an array of flat objects (item {0})")]
    NotFlat(usize),
    #[error("{}: {source}", .path.display())]
    Io { path: PathBuf, source: io::Error },
}

/// A header row plus string cells; empty cells are absent.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RawTable {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<Option<String>>>,
}

fn cell(text: &str) -> Option<String> {
    (!text.trim().is_empty()).then(|| text.to_string())
}

impl RawTable {
    pub fn from_csv(text: &str) -> Result<Self, TableError> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(false)
            .from_reader(text.as_bytes());
        let headers: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
        if headers.is_empty() || headers.iter().all(|h| h.trim().is_empty()) {
            return Err(TableError::MissingHeader);
        }
        let mut rows = Vec::new();
        for record in reader.records() {
            rows.push(record?.iter().map(cell).collect());
        }
        Ok(RawTable { headers, rows })
    }

    pub fn from_json(text: &str) -> Result<Self, TableError> {
        let items: Vec<serde_json::Value> = serde_json::from_str(text)?;
        let mut headers: Vec<String> = Vec::new();
        let mut objects = Vec::with_capacity(items.len());
        for (i, item) in items.into_iter().enumerate() {
            let serde_json::Value::Object(map) = item else {
                return Err(TableError::NotFlat(i));
            };
            let mut row = BTreeMap::new();
            for (k, v) in map {
                let text = match v {
                    serde_json::Value::Null => None,
                    serde_json::Value::String(s) => cell(&s),
                    serde_json::Value::Number(n) => Some(n.to_string()),
                    serde_json::Value::Bool(b) => Some(b.to_string()),
                    _ => return Err(TableError::NotFlat(i)),
                };
                if !headers.contains(&k) {
                    headers.push(k.clone());
                }
                row.insert(k, text);
            }
            objects.push(row);
        }
        if headers.is_empty() {
            return Err(TableError::MissingHeader);
        }
        let rows = objects
            .into_iter()
            .map(|mut row| headers.iter().map(|h| row.remove(h).flatten()).collect())
            .collect();
        Ok(RawTable { headers, rows })
    }

    /// Reads `.json` files as JSON arrays and everything else as CSV.
    pub fn read(path: &Path) -> Result<Self, TableError> {
        let text = fs::read_to_string(path).map_err(|source| TableError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
            Self::from_json(&text)
        } else {
            Self::from_csv(&text)
        }
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.headers.iter().position(|h| h == name)
    }
}

/// Casts a cell to the lexical form of `datatype`, or `None` if it does not fit.
pub fn cast_value(text: &str, datatype: LiteralType) -> Option<String> {
    match datatype {
        LiteralType::String => Some(text.to_string()),
        LiteralType::Integer => {
            let t = text.trim();
            let (negative, digits) = match t.as_bytes().first()? {
                b'-' => (true, &t[1..]),
                b'+' => (false, &t[1..]),
                _ => (false, t),
            };
            if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
                return None;
            }
            let trimmed = digits.trim_start_matches('0');
            Some(match (trimmed.is_empty(), negative) {
                (true, _) => "0".to_string(),
                (false, true) => format!("-{trimmed}"),
                (false, false) => trimmed.to_string(),
            })
        }
        LiteralType::Date => {
            let t = text.trim();
            if t.len() == 4 && t.bytes().all(|b| b.is_ascii_digit()) {
                return Some(format!("{t}-01-01"));
            }
            let ok = t.len() == 10 && NaiveDate::parse_from_str(t, "%Y-%m-%d").is_ok();
            ok.then(|| t.to_string())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypedRow {
    pub id: Identifier,
    pub values: Vec<TypedValue>,
    /// (object property, target row id)
    pub links: Vec<(Identifier, Identifier)>,
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{dataset}: id column `{column}` is not in the header")]
    MissingIdColumn { dataset: String, column: String },
    #[error("{dataset}: mapped column `{column}` is not in the header")]
    MissingColumn { dataset: String, column: String },
    #[error(transparent)]
    Table(#[from] TableError),
}

pub fn ingest_dataset(
    entry: &DatasetMap,
    table: &RawTable,
) -> Result<(Vec<TypedRow>, Vec<Finding>), IngestError> {
    if table.headers.is_empty() {
        return Err(TableError::MissingHeader.into());
    }
    let dataset = entry.id.as_str();
    let id_col = table
        .column(&entry.id_column)
        .ok_or_else(|| IngestError::MissingIdColumn {
            dataset: dataset.to_string(),
            column: entry.id_column.clone(),
        })?;
    let locate = |column: &str| {
        table.column(column).ok_or_else(|| IngestError::MissingColumn {
            dataset: dataset.to_string(),
            column: column.to_string(),
        })
    };
    let data_cols: Vec<(usize, &DataMap)> = entry
        .data_maps
        .iter()
        .map(|m| locate(&m.column).map(|i| (i, m)))
        .collect::<Result<_, _>>()?;
    let link_cols: Vec<(usize, &LinkMap)> = entry
        .link_maps
        .iter()
        .map(|m| locate(&m.column).map(|i| (i, m)))
        .collect::<Result<_, _>>()?;

    let mut findings = Vec::new();
    let mut rows: Vec<TypedRow> = Vec::new();
    let mut seen = BTreeSet::new();
    for (n, raw) in table.rows.iter().enumerate() {
        let row_no = n + 1;
        let at = |column: &str| format!("{dataset}/{row_no}/{column}");
        let get = |i: usize| raw.get(i).and_then(Option::as_deref);
        let id = match get(id_col).map(|t| Identifier::new(t.trim())) {
            Some(Ok(id)) => id,
            Some(Err(e)) => {
                findings.push(Finding::new(RuleCode::IG3, at(&entry.id_column), e.to_string()));
                continue;
            }
            None => {
                findings.push(Finding::new(RuleCode::IG3, at(&entry.id_column), "row id is missing"));
                continue;
            }
        };
        if !seen.insert(id.clone()) {
            findings.push(Finding::new(
                RuleCode::IG2,
                at(&entry.id_column),
                format!("duplicate row id `{id}`; first occurrence kept"),
            ));
            continue;
        }
        let mut values = Vec::new();
        for (i, m) in &data_cols {
            let Some(text) = get(*i) else { continue };
            match cast_value(text, m.datatype) {
                Some(lexical) => values.push(TypedValue {
                    property: m.property.clone(),
                    literal: Literal {
                        lexical,
                        datatype: m.datatype,
                    },
                }),
                None => findings.push(Finding::new(
                    RuleCode::IG1,
                    at(&m.column),
                    format!("`{text}` is not a valid {}; cell dropped", m.datatype.as_str()),
                )),
            }
        }
        let mut links = Vec::new();
        for (i, m) in &link_cols {
            let Some(text) = get(*i) else { continue };
            match Identifier::new(text.trim()) {
                Ok(target) => links.push((m.property.clone(), target)),
                Err(_) => findings.push(Finding::new(
                    RuleCode::IG1,
                    at(&m.column),
                    format!("`{text}` is not a valid row id; cell dropped"),
                )),
            }
        }
        rows.push(TypedRow { id, values, links });
    }
    findings.sort();
    Ok((rows, findings))
}

#[derive(Debug, Error)]
pub enum BuildError {
    #[error("dangling links under the error policy")]
    Dangling(Vec<Finding>),
    #[error("no ingested rows for dataset `{0}`")]
    MissingDataset(String),
    #[error("ingested dataset `{0}` is not in the mapping")]
    UnmappedDataset(String),
    #[error("entity {0} is produced by more than one row")]
    DuplicateEntity(String),
    #[error(transparent)]
    Mapping(#[from] MappingError),
    #[error(transparent)]
    Mint(#[from] MintError),
}

/// Assembles the graph from ingested rows keyed by dataset id.
pub fn build_entity_graph(
    schema: &SchemaGraph,
    spec: &MappingSpec,
    datasets: &BTreeMap<Identifier, Vec<TypedRow>>,
    base: &Iri,
    at: Timestamp,
) -> Result<(EntityGraph, Vec<Finding>), BuildError> {
    validate_mapping_spec(spec, schema)?;
    for id in datasets.keys() {
        if spec.dataset(id.as_str()).is_none() {
            return Err(BuildError::UnmappedDataset(id.to_string()));
        }
    }
    let rows_of = |d: &DatasetMap| {
        datasets
            .get(&d.id)
            .ok_or_else(|| BuildError::MissingDataset(d.id.to_string()))
    };

    let mint = |type_id: &Identifier, id: &Identifier| mint_iri(base, &[type_id.clone(), id.clone()]);
    let mut entities: BTreeMap<Iri, Entity> = BTreeMap::new();
    let mut ids: BTreeMap<&Identifier, BTreeSet<&Identifier>> = BTreeMap::new();
    for d in &spec.datasets {
        let present = ids.entry(&d.id).or_default();
        for row in rows_of(d)? {
            let iri = mint(&d.type_id, &row.id)?;
            if entities.contains_key(&iri) {
                return Err(BuildError::DuplicateEntity(iri.to_string()));
            }
            present.insert(&row.id);
            entities.insert(
                iri.clone(),
                Entity {
                    iri,
                    type_id: d.type_id.clone(),
                    values: row.values.clone(),
                },
            );
        }
    }

    let mut findings = Vec::new();
    let mut dangling = Vec::new();
    let mut links = Vec::new();
    for d in &spec.datasets {
        for row in rows_of(d)? {
            let subject = mint(&d.type_id, &row.id)?;
            for (property, target_id) in &row.links {
                let m = d
                    .link_maps
                    .iter()
                    .find(|m| &m.property == property)
                    .expect("ingested links come from link maps");
                let target = spec.dataset(m.target.as_str()).expect("validated target");
                let object = mint(&target.type_id, target_id)?;
                let path = format!("{}/{}/{}", d.id, row.id, m.column);
                if ids[&target.id].contains(target_id) {
                    links.push((subject.clone(), property.clone(), object));
                    continue;
                }
                match d.dangling_policy {
                    DanglingPolicy::Error => dangling.push(Finding::new(
                        RuleCode::DL1,
                        path,
                        format!("`{target_id}` is not a row of {}", target.id),
                    )),
                    DanglingPolicy::Skip => findings.push(Finding::new(
                        RuleCode::DL2,
                        path,
                        format!("`{target_id}` is not a row of {}; link dropped", target.id),
                    )),
                    DanglingPolicy::Stub => {
                        findings.push(Finding::new(
                            RuleCode::DL3,
                            path,
                            format!("`{target_id}` is not a row of {}; stub {} created", target.id, target.type_id),
                        ));
                        entities.entry(object.clone()).or_insert_with(|| Entity {
                            iri: object.clone(),
                            type_id: target.type_id.clone(),
                            values: Vec::new(),
                        });
                        links.push((subject.clone(), property.clone(), object));
                    }
                }
            }
        }
    }
    if !dangling.is_empty() {
        dangling.sort();
        return Err(BuildError::Dangling(dangling));
    }

    let vocabulary = mint_iri_str(base, &["etg", schema.etg.id.as_str()])?;
    let iri = mint_iri_str(base, &["eg", &at.to_segment()])?;
    let sources = spec.datasets.iter().map(|d| d.id.clone()).collect();
    let eg = EntityGraph::assemble(
        iri,
        at,
        vocabulary,
        sources,
        entities.into_values().collect(),
        links,
    );
    findings.sort();
    Ok((eg, findings))
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Table(#[from] TableError),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Build(#[from] BuildError),
}

/// Reads every mapped source relative to `source_dir`, ingests, and builds.
/// Ingestion errors (IG2, IG3) are returned as findings alongside the graph.
pub fn build_from_sources(
    schema: &SchemaGraph,
    spec: &MappingSpec,
    source_dir: &Path,
    base: &Iri,
    at: Timestamp,
) -> Result<(EntityGraph, Vec<Finding>), PipelineError> {
    let mut findings = Vec::new();
    let mut datasets = BTreeMap::new();
    for d in &spec.datasets {
        let table = RawTable::read(&source_dir.join(&d.source))?;
        let (rows, f) = ingest_dataset(d, &table)?;
        findings.extend(f);
        datasets.insert(d.id.clone(), rows);
    }
    let (eg, f) = build_entity_graph(schema, spec, &datasets, base, at)?;
    findings.extend(f);
    findings.sort();
    Ok((eg, findings))
}

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("graph JSON error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("bad IRI in graph: {0}")]
    Iri(#[from] IriError),
    #[error("bad timestamp in graph: {0}")]
    Timestamp(#[from] TimestampError),
    #[error("graph counts {declared:?} do not match contents {actual:?}")]
    Counts {
        declared: (usize, usize),
        actual: (usize, usize),
    },
    #[error("link endpoint {0} is not an entity")]
    Dangling(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileDigest {
    pub name: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub eg_iri: Iri,
    pub timestamp: Timestamp,
    pub files: Vec<FileDigest>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Snapshot {
    pub directory: PathBuf,
    pub manifest: Manifest,
}

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("{} exists; pass force to overwrite", .0.display())]
    Exists(PathBuf),
    #[error("{}: {source}", .path.display())]
    Io { path: PathBuf, source: io::Error },
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn manifest_bytes(manifest: &Manifest) -> Vec<u8> {
    let mut text = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    text.push('\n');
    text.into_bytes()
}

/// Writes the N-Triples and JSON exports plus a digest manifest.
pub fn snapshot(eg: &EntityGraph, out_dir: &Path, force: bool) -> Result<Snapshot, SnapshotError> {
    let segment = eg.timestamp.to_segment();
    let exports = [
        (format!("eg-{segment}.nt"), export_ntriples(eg)),
        (format!("eg-{segment}.json"), export_jsongraph(eg)),
    ];
    let manifest = Manifest {
        eg_iri: eg.iri.clone(),
        timestamp: eg.timestamp,
        files: exports
            .iter()
            .map(|(name, bytes)| FileDigest {
                name: name.clone(),
                sha256: sha256_hex(bytes),
            })
            .collect(),
    };
    let mut files: Vec<(String, Vec<u8>)> = exports.into_iter().collect();
    files.push(("manifest.json".to_string(), manifest_bytes(&manifest)));

    if !force {
        if let Some((name, _)) = files.iter().find(|(name, _)| out_dir.join(name).exists()) {
            return Err(SnapshotError::Exists(out_dir.join(name)));
        }
    }
    let io_err = |path: &Path| {
        let path = path.to_path_buf();
        move |source| SnapshotError::Io { path, source }
    };
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    for (name, bytes) in &files {
        let path = out_dir.join(name);
        fs::write(&path, bytes).map_err(io_err(&path))?;
    }
    Ok(Snapshot {
        directory: out_dir.to_path_buf(),
        manifest,
    })
}

/// Checks counts and referential closure of a loaded graph.
pub fn check_graph(eg: &EntityGraph) -> Result<(), GraphError> {
    let iris: BTreeSet<&Iri> = eg.entities.iter().map(|e| &e.iri).collect();
    for t in eg.links() {
        for end in [&t.subject, t.object.as_iri().expect("links have IRI objects")] {
            if !iris.contains(end) {
                return Err(GraphError::Dangling(end.to_string()));
            }
        }
    }
    Ok(())
}
