//! Entity Type Graphs: typed schemas of entity types with data and object
//! properties, their canon linter, a file-backed repository, and grounding
//! of lightweight ontologies into schema graphs.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    has_errors, path_of, Finding, Identifier, IdentifierError, Label, LabelError, Provenance,
    RuleCode, Timestamp, DEFAULT_LANGUAGE,
};
use crate::ontology::{validate_backbone, LightweightOntology};
use crate::schedule::reticence_hits;

#[derive(Debug, Error)]
pub enum EtgError {
    #[error("ETG parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{path}: {source}")]
    Label { path: String, source: LabelError },
    #[error("duplicate type id `{0}`")]
    DuplicateType(String),
    #[error("type `{id}` has undefined parent `{parent}`")]
    DanglingParent { id: String, parent: String },
    #[error("type hierarchy has a cycle through `{0}`")]
    Cycle(String),
    #[error("type hierarchy needs exactly one root, found [{}]", .0.join(", "))]
    Roots(Vec<String>),
    #[error("property `{property}` refers to undefined type `{target}`")]
    DanglingProperty { property: String, target: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DataType {
    String,
    Integer,
    Date,
    Iri,
}

impl DataType {
    pub fn as_str(self) -> &'static str {
        match self {
            DataType::String => "string",
            DataType::Integer => "integer",
            DataType::Date => "date",
            DataType::Iri => "iri",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataProperty {
    pub name: Identifier,
    pub domain: Identifier,
    pub datatype: DataType,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub identifying: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectProperty {
    pub name: Identifier,
    pub domain: Identifier,
    pub range: Identifier,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntityType {
    pub id: Identifier,
    pub label: Label,
    pub parent: Option<Identifier>,
    pub differentiating: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntityTypeGraph {
    pub id: Identifier,
    pub types: Vec<EntityType>,
    pub data_properties: Vec<DataProperty>,
    pub object_properties: Vec<ObjectProperty>,
    pub provenance: Provenance,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TypeDoc {
    id: Identifier,
    label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    language: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    parent: Option<Identifier>,
    #[serde(default)]
    differentiating: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EtgDoc {
    id: Identifier,
    types: Vec<TypeDoc>,
    #[serde(default)]
    data_properties: Vec<DataProperty>,
    #[serde(default)]
    object_properties: Vec<ObjectProperty>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    provenance: Option<Provenance>,
}

/// Parses an ETG, keeping defects the linter reports (duplicate type ids,
/// unresolved property domains and ranges). Hierarchy defects are errors.
pub fn read_etg(document: &str) -> Result<EntityTypeGraph, EtgError> {
    let doc: EtgDoc = serde_json::from_str(document).map_err(|e| EtgError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let mut types = Vec::with_capacity(doc.types.len());
    for (i, t) in doc.types.into_iter().enumerate() {
        let language = t.language.unwrap_or_else(|| DEFAULT_LANGUAGE.to_string());
        let label = Label::new(t.label, language).map_err(|source| EtgError::Label {
            path: format!("types/{i}/label"),
            source,
        })?;
        types.push(EntityType {
            id: t.id,
            label,
            parent: t.parent,
            differentiating: t.differentiating,
        });
    }
    let provenance = doc.provenance.unwrap_or_else(|| Provenance {
        source_id: doc.id.clone(),
        timestamp: Timestamp::epoch(),
    });
    let etg = EntityTypeGraph {
        id: doc.id,
        types,
        data_properties: doc.data_properties,
        object_properties: doc.object_properties,
        provenance,
    };
    check_hierarchy(&etg)?;
    Ok(etg)
}

fn check_hierarchy(etg: &EntityTypeGraph) -> Result<(), EtgError> {
    let roots: Vec<String> = etg
        .types
        .iter()
        .filter(|t| t.parent.is_none())
        .map(|t| t.id.to_string())
        .collect();
    if roots.len() != 1 {
        return Err(EtgError::Roots(roots));
    }
    for t in &etg.types {
        if let Some(p) = &t.parent {
            if etg.type_by_id(p.as_str()).is_none() {
                return Err(EtgError::DanglingParent {
                    id: t.id.to_string(),
                    parent: p.to_string(),
                });
            }
        }
        let mut seen = BTreeSet::from([t.id.as_str()]);
        let mut at = t.parent.as_ref();
        while let Some(p) = at {
            if !seen.insert(p.as_str()) {
                return Err(EtgError::Cycle(t.id.to_string()));
            }
            at = etg.type_by_id(p.as_str()).and_then(|x| x.parent.as_ref());
        }
    }
    Ok(())
}

/// Parses and fully resolves an ETG.
pub fn load_etg(document: &str) -> Result<EntityTypeGraph, EtgError> {
    let etg = read_etg(document)?;
    let mut ids = BTreeSet::new();
    for t in &etg.types {
        if !ids.insert(t.id.as_str()) {
            return Err(EtgError::DuplicateType(t.id.to_string()));
        }
    }
    for (name, target) in etg.property_endpoints() {
        if !ids.contains(target.as_str()) {
            return Err(EtgError::DanglingProperty {
                property: name.to_string(),
                target: target.to_string(),
            });
        }
    }
    Ok(etg)
}

impl EntityTypeGraph {
    pub fn type_by_id(&self, id: &str) -> Option<&EntityType> {
        self.types.iter().find(|t| t.id.as_str() == id)
    }

    pub fn root(&self) -> &EntityType {
        self.types
            .iter()
            .find(|t| t.parent.is_none())
            .expect("checked at load")
    }

    /// The type followed by its ancestors up to the root.
    pub fn chain(&self, id: &str) -> Vec<&EntityType> {
        let mut out: Vec<&EntityType> = Vec::new();
        let mut at = self.type_by_id(id);
        while let Some(t) = at {
            if out.iter().any(|o| o.id == t.id) {
                break;
            }
            out.push(t);
            at = t.parent.as_ref().and_then(|p| self.type_by_id(p.as_str()));
        }
        out
    }

    /// Whether `id` is `ancestor` or lies below it.
    pub fn is_a(&self, id: &str, ancestor: &str) -> bool {
        self.chain(id).iter().any(|t| t.id.as_str() == ancestor)
    }

    pub fn children(&self, id: &str) -> Vec<&EntityType> {
        self.types
            .iter()
            .filter(|t| t.parent.as_ref().is_some_and(|p| p.as_str() == id))
            .collect()
    }

    /// Data properties declared on the type or inherited.
    pub fn effective_data_properties(&self, id: &str) -> Vec<&DataProperty> {
        let chain: BTreeSet<&str> = self.chain(id).iter().map(|t| t.id.as_str()).collect();
        self.data_properties
            .iter()
            .filter(|p| chain.contains(p.domain.as_str()))
            .collect()
    }

    pub fn effective_object_properties(&self, id: &str) -> Vec<&ObjectProperty> {
        let chain: BTreeSet<&str> = self.chain(id).iter().map(|t| t.id.as_str()).collect();
        self.object_properties
            .iter()
            .filter(|p| chain.contains(p.domain.as_str()))
            .collect()
    }

    fn property_endpoints(&self) -> Vec<(&Identifier, &Identifier)> {
        let mut out: Vec<(&Identifier, &Identifier)> =
            self.data_properties.iter().map(|p| (&p.name, &p.domain)).collect();
        for p in &self.object_properties {
            out.push((&p.name, &p.domain));
            out.push((&p.name, &p.range));
        }
        out
    }

    pub fn to_json(&self) -> String {
        let doc = EtgDoc {
            id: self.id.clone(),
            types: self
                .types
                .iter()
                .map(|t| TypeDoc {
                    id: t.id.clone(),
                    label: t.label.text.clone(),
                    language: (t.label.language != DEFAULT_LANGUAGE)
                        .then(|| t.label.language.clone()),
                    parent: t.parent.clone(),
                    differentiating: t.differentiating.clone(),
                })
                .collect(),
            data_properties: self.data_properties.clone(),
            object_properties: self.object_properties.clone(),
            provenance: Some(self.provenance.clone()),
        };
        serde_json::to_string_pretty(&doc).expect("ETG serializes") + "\n"
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CanonConfig {
    #[serde(default)]
    pub stoplist: Vec<String>,
    #[serde(default)]
    pub disabled: BTreeSet<RuleCode>,
}

impl CanonConfig {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

pub fn lint_etg(etg: &EntityTypeGraph, config: &CanonConfig) -> Vec<Finding> {
    let mut findings = Vec::new();
    let tpath = |id: &str| path_of([etg.id.as_str(), "types", id]);
    let ppath = |name: &str| path_of([etg.id.as_str(), "properties", name]);

    // IC4 and NP2 by label key
    let mut by_label: BTreeMap<String, Vec<&EntityType>> = BTreeMap::new();
    for t in &etg.types {
        by_label.entry(t.label.key()).or_default().push(t);
    }
    for (key, owners) in by_label.iter().filter(|(_, o)| o.len() > 1) {
        let mut by_parent: BTreeMap<Option<&str>, Vec<&str>> = BTreeMap::new();
        for t in owners {
            by_parent
                .entry(t.parent.as_ref().map(Identifier::as_str))
                .or_default()
                .push(t.id.as_str());
        }
        for (parent, ids) in by_parent.iter().filter(|(_, ids)| ids.len() > 1) {
            findings.push(Finding::new(
                RuleCode::IC4,
                tpath(parent.unwrap_or("")),
                format!("sibling types {} share label `{key}`", ids.join(", ")),
            ));
        }
        if by_parent.len() > 1 {
            let ids: Vec<&str> = owners.iter().map(|t| t.id.as_str()).collect();
            findings.push(Finding::new(
                RuleCode::NP2,
                tpath(ids[0]),
                format!("label `{key}` names types {} in different arrays", ids.join(", ")),
            ));
        }
    }

    // NP1
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for t in &etg.types {
        *counts.entry(t.id.as_str()).or_default() += 1;
    }
    for (id, n) in counts.iter().filter(|(_, n)| **n > 1) {
        findings.push(Finding::new(
            RuleCode::NP1,
            tpath(id),
            format!("type id declared {n} times"),
        ));
    }

    for t in &etg.types {
        // CH1
        if t.parent.is_some() {
            let inherited: BTreeSet<&str> = etg
                .chain(t.id.as_str())
                .iter()
                .skip(1)
                .flat_map(|a| a.differentiating.iter().map(String::as_str))
                .collect();
            if !t.differentiating.iter().any(|d| !inherited.contains(d.as_str())) {
                findings.push(Finding::new(
                    RuleCode::CH1,
                    tpath(t.id.as_str()),
                    "type adds no differentiating property to its parent",
                ));
            }
        }
        // VP1
        let hits = reticence_hits(&t.label.text, &config.stoplist);
        if !hits.is_empty() {
            findings.push(Finding::new(
                RuleCode::VP1,
                tpath(t.id.as_str()),
                format!("label `{}` uses {}", t.label.text, hits.join(", ")),
            ));
        }
    }

    // EP2
    let known: BTreeSet<&str> = counts.keys().copied().collect();
    for (name, target) in etg.property_endpoints() {
        if !known.contains(target.as_str()) {
            findings.push(Finding::new(
                RuleCode::EP2,
                ppath(name.as_str()),
                format!("refers to undefined type `{target}`"),
            ));
        }
    }

    // EP1, EP3
    let mut declared: HashMap<&str, Vec<&str>> = HashMap::new();
    for p in &etg.data_properties {
        declared.entry(p.domain.as_str()).or_default().push(p.name.as_str());
    }
    for p in &etg.object_properties {
        declared.entry(p.domain.as_str()).or_default().push(p.name.as_str());
    }
    let root = etg.root().id.as_str();
    for t in &etg.types {
        let id = t.id.as_str();
        if id != root
            && !etg
                .effective_data_properties(id)
                .iter()
                .any(|p| p.identifying)
        {
            findings.push(Finding::new(
                RuleCode::EP1,
                tpath(id),
                "no identifying data property on the type or its ancestors",
            ));
        }
        let own = declared.get(id).cloned().unwrap_or_default();
        let mut seen = BTreeSet::new();
        let ancestors = etg.chain(id);
        for name in own {
            let inherited_from = ancestors.iter().skip(1).find(|a| {
                declared
                    .get(a.id.as_str())
                    .is_some_and(|names| names.contains(&name))
            });
            if !seen.insert(name) {
                findings.push(Finding::new(
                    RuleCode::EP3,
                    tpath(id),
                    format!("property `{name}` declared twice on the type"),
                ));
            } else if let Some(a) = inherited_from {
                findings.push(Finding::new(
                    RuleCode::EP3,
                    tpath(id),
                    format!("property `{name}` redeclares the one inherited from {}", a.id),
                ));
            }
        }
    }

    findings.retain(|f| !config.disabled.contains(&f.code));
    findings.sort();
    findings.dedup();
    findings
}

#[derive(Debug, Error)]
pub enum RepoError {
    #[error("ETG has lint errors")]
    Lint(Vec<Finding>),
    #[error("{id} version {version} is already in the repository")]
    Duplicate { id: String, version: String },
    #[error("catalogue entry {id} {version} has no file at {}", .path.display())]
    MissingFile {
        id: String,
        version: String,
        path: PathBuf,
    },
    #[error("bad version: {0}")]
    Version(#[from] IdentifierError),
    #[error("catalogue is malformed: {0}")]
    Catalogue(#[from] serde_json::Error),
    #[error("no entry {id} version {version}")]
    NotFound { id: String, version: String },
    #[error(transparent)]
    Etg(#[from] EtgError),
    #[error("{}: {source}", .path.display())]
    Io { path: PathBuf, source: io::Error },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> RepoError + '_ {
    move |source| RepoError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LintStatus {
    Clean,
    Warnings,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RepoEntry {
    pub id: Identifier,
    pub tags: Vec<String>,
    pub version: Identifier,
    pub lint_status: LintStatus,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CatalogueDoc {
    entries: Vec<RepoEntry>,
}

#[derive(Debug, Clone)]
pub struct EtgRepository {
    pub root_dir: PathBuf,
    pub entries: Vec<RepoEntry>,
}

impl EtgRepository {
    /// Opens a repository, treating a missing catalogue as empty.
    pub fn open(root_dir: impl Into<PathBuf>) -> Result<Self, RepoError> {
        let root_dir = root_dir.into();
        let catalogue = root_dir.join("catalogue.json");
        let entries = match fs::read_to_string(&catalogue) {
            Ok(text) => serde_json::from_str::<CatalogueDoc>(&text)?.entries,
            Err(e) if e.kind() == io::ErrorKind::NotFound => Vec::new(),
            Err(e) => return Err(io_err(&catalogue)(e)),
        };
        let repo = EtgRepository { root_dir, entries };
        for e in &repo.entries {
            let path = repo.etg_path(&e.id, &e.version);
            if !path.is_file() {
                return Err(RepoError::MissingFile {
                    id: e.id.to_string(),
                    version: e.version.to_string(),
                    path,
                });
            }
        }
        Ok(repo)
    }

    pub fn etg_path(&self, id: &Identifier, version: &Identifier) -> PathBuf {
        self.root_dir
            .join(id.as_str())
            .join(format!("{version}.etg.json"))
    }

    /// Admits a lint-clean ETG; warnings are recorded in the entry.
    pub fn add(
        &mut self,
        etg: &EntityTypeGraph,
        tags: &[String],
        version: &str,
        config: &CanonConfig,
    ) -> Result<RepoEntry, RepoError> {
        let version = Identifier::new(version)?;
        let findings = lint_etg(etg, config);
        if has_errors(&findings) {
            return Err(RepoError::Lint(findings));
        }
        if self
            .entries
            .iter()
            .any(|e| e.id == etg.id && e.version == version)
        {
            return Err(RepoError::Duplicate {
                id: etg.id.to_string(),
                version: version.to_string(),
            });
        }
        let path = self.etg_path(&etg.id, &version);
        let dir = path.parent().expect("etg path has a parent");
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        fs::write(&path, etg.to_json()).map_err(io_err(&path))?;

        let mut tags: Vec<String> = tags.to_vec();
        tags.sort();
        tags.dedup();
        let entry = RepoEntry {
            id: etg.id.clone(),
            tags,
            version,
            lint_status: if findings.is_empty() {
                LintStatus::Clean
            } else {
                LintStatus::Warnings
            },
        };
        self.entries.push(entry.clone());
        let catalogue = self.root_dir.join("catalogue.json");
        let doc = CatalogueDoc {
            entries: self.entries.clone(),
        };
        let text = serde_json::to_string_pretty(&doc)? + "\n";
        fs::write(&catalogue, text).map_err(io_err(&catalogue))?;
        Ok(entry)
    }

    /// Entries sharing a tag with `tags`, or all entries for an empty query.
    pub fn find(&self, tags: &[String]) -> Vec<&RepoEntry> {
        let mut out: Vec<&RepoEntry> = self
            .entries
            .iter()
            .filter(|e| tags.is_empty() || e.tags.iter().any(|t| tags.contains(t)))
            .collect();
        out.sort_by(|a, b| a.id.cmp(&b.id).then_with(|| a.version.cmp(&b.version)));
        out
    }

    pub fn load(&self, id: &str, version: &str) -> Result<EntityTypeGraph, RepoError> {
        let entry = self
            .entries
            .iter()
            .find(|e| e.id.as_str() == id && e.version.as_str() == version)
            .ok_or_else(|| RepoError::NotFound {
                id: id.to_string(),
                version: version.to_string(),
            })?;
        let path = self.etg_path(&entry.id, &entry.version);
        let text = fs::read_to_string(&path).map_err(io_err(&path))?;
        Ok(load_etg(&text)?)
    }
}

pub fn repo_add(
    repo: &mut EtgRepository,
    etg: &EntityTypeGraph,
    tags: &[String],
    version: &str,
) -> Result<RepoEntry, RepoError> {
    repo.add(etg, tags, version, &CanonConfig::default())
}

pub fn repo_find<'a>(repo: &'a EtgRepository, tags: &[String]) -> Vec<&'a RepoEntry> {
    repo.find(tags)
}

#[derive(Debug, Error)]
pub enum GroundError {
    #[error("ontology is not a valid backbone")]
    InvalidOntology(Vec<Finding>),
    #[error("ETG has lint errors")]
    EtgNotClean(Vec<Finding>),
    #[error("mapping names unknown ontology node or class `{0}`")]
    UnknownNode(String),
    #[error("mapping names unknown entity type `{0}`")]
    UnknownType(String),
    #[error("root `{0}` matches no entity type and is not mapped")]
    RootUngroundable(String),
    #[error("grounding file is malformed: {0}")]
    Mapping(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct EffectiveProperties {
    pub data: BTreeSet<Identifier>,
    pub object: BTreeSet<Identifier>,
}

/// A lightweight ontology whose every node is assigned an ETG type.
#[derive(Debug, Clone)]
pub struct SchemaGraph {
    pub ontology: LightweightOntology,
    pub etg: EntityTypeGraph,
    pub grounding: BTreeMap<Identifier, Identifier>,
    pub effective_properties: BTreeMap<Identifier, EffectiveProperties>,
}

#[derive(Serialize)]
struct SchemaGraphDoc<'a> {
    ontology_root: &'a Identifier,
    etg: &'a Identifier,
    grounding: &'a BTreeMap<Identifier, Identifier>,
    effective_properties: &'a BTreeMap<Identifier, EffectiveProperties>,
}

impl SchemaGraph {
    pub fn type_of(&self, node: &str) -> Option<&Identifier> {
        self.grounding.get(node)
    }

    /// Entity types some node grounds to.
    pub fn grounded_types(&self) -> BTreeSet<&Identifier> {
        self.grounding.values().collect()
    }

    pub fn effective_for_type(&self, type_id: &str) -> EffectiveProperties {
        EffectiveProperties {
            data: self
                .etg
                .effective_data_properties(type_id)
                .into_iter()
                .map(|p| p.name.clone())
                .collect(),
            object: self
                .etg
                .effective_object_properties(type_id)
                .into_iter()
                .map(|p| p.name.clone())
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        let doc = SchemaGraphDoc {
            ontology_root: &self.ontology.root,
            etg: &self.etg.id,
            grounding: &self.grounding,
            effective_properties: &self.effective_properties,
        };
        serde_json::to_string_pretty(&doc).expect("schema graph serializes") + "\n"
    }
}

/// Reads a grounding map: JSON object from node id or class name to type id.
pub fn load_grounding_map(document: &str) -> Result<BTreeMap<String, Identifier>, GroundError> {
    Ok(serde_json::from_str(document)?)
}

pub fn ground(
    ontology: &LightweightOntology,
    etg: &EntityTypeGraph,
    mapping: &BTreeMap<String, Identifier>,
) -> Result<(SchemaGraph, Vec<Finding>), GroundError> {
    let backbone = validate_backbone(ontology);
    if has_errors(&backbone) {
        return Err(GroundError::InvalidOntology(backbone));
    }
    let lint = lint_etg(etg, &CanonConfig::default());
    if has_errors(&lint) {
        return Err(GroundError::EtgNotClean(lint));
    }

    let mut explicit: BTreeMap<&str, &Identifier> = BTreeMap::new();
    for (key, type_id) in mapping {
        let node = ontology
            .node(key)
            .or_else(|| ontology.node_for_class(key))
            .ok_or_else(|| GroundError::UnknownNode(key.clone()))?;
        if etg.type_by_id(type_id.as_str()).is_none() {
            return Err(GroundError::UnknownType(type_id.to_string()));
        }
        explicit.insert(node.id.as_str(), type_id);
    }

    let mut by_label: BTreeMap<String, Vec<&Identifier>> = BTreeMap::new();
    for t in &etg.types {
        by_label.entry(t.label.key()).or_default().push(&t.id);
    }

    let mut grounding: BTreeMap<Identifier, Identifier> = BTreeMap::new();
    let mut findings = Vec::new();
    let mut queue = vec![ontology.root.as_str()];
    while let Some(id) = queue.pop() {
        let node = ontology.node(id).expect("queued nodes exist");
        let direct = explicit.get(id).copied().or_else(|| {
            match by_label.get(&node.label.trim().to_lowercase()) {
                Some(ids) if ids.len() == 1 => Some(ids[0]),
                _ => None,
            }
        });
        let type_id = match direct {
            Some(t) => t.clone(),
            None => {
                let Some(parent) = &node.parent else {
                    return Err(GroundError::RootUngroundable(id.to_string()));
                };
                let inherited = grounding[parent].clone();
                findings.push(Finding::new(
                    RuleCode::GR1,
                    format!("ontology/{id}"),
                    format!("no mapping or label match; inherits {inherited} from {parent}"),
                ));
                inherited
            }
        };
        grounding.insert(node.id.clone(), type_id);
        let mut children: Vec<&str> = ontology.children(id).iter().map(|c| c.id.as_str()).collect();
        children.reverse();
        queue.extend(children);
    }

    let mut schema = SchemaGraph {
        ontology: ontology.clone(),
        etg: etg.clone(),
        grounding,
        effective_properties: BTreeMap::new(),
    };
    schema.effective_properties = schema
        .grounding
        .iter()
        .map(|(node, t)| (node.clone(), schema.effective_for_type(t.as_str())))
        .collect();
    findings.sort();
    Ok((schema, findings))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexsem::load_lexsem;
    use crate::ontology::{build_lightweight_ontology, DatasetSchema, SchemaClass};
    use serde_json::{json, Value};

    const DU: &str = include_str!("../../../fixtures/du.etg.json");
    const LEX: &str = include_str!("../../../fixtures/lexsem-en.json");

    fn du() -> EntityTypeGraph {
        load_etg(DU).unwrap()
    }

    fn du_value() -> Value {
        serde_json::from_str(DU).unwrap()
    }

    fn codes(findings: &[Finding]) -> Vec<RuleCode> {
        findings.iter().map(|f| f.code).collect()
    }

    fn lint_value(v: &Value) -> Vec<RuleCode> {
        codes(&lint_etg(&read_etg(&v.to_string()).unwrap(), &CanonConfig::default()))
    }

    fn ontology(classes: &[&str]) -> LightweightOntology {
        let schema = DatasetSchema {
            classes: classes
                .iter()
                .map(|c| SchemaClass {
                    name: Identifier::new(c).unwrap(),
                    attributes: vec![],
                })
                .collect(),
        };
        build_lightweight_ontology(&load_lexsem(LEX).unwrap(), "en", &schema)
            .unwrap()
            .0
    }

    fn book_mapping() -> BTreeMap<String, Identifier> {
        BTreeMap::from([("en-book-1".to_string(), Identifier::new("Publication").unwrap())])
    }

    #[test]
    fn du_fixture_loads_clean() {
        let etg = du();
        assert_eq!(etg.types.len(), 5);
        assert_eq!(etg.root().id.as_str(), "Entity");
        assert!(lint_etg(&etg, &CanonConfig::default()).is_empty());
        let names: Vec<&str> = etg
            .effective_object_properties("Organization")
            .iter()
            .map(|p| p.name.as_str())
            .collect();
        assert_eq!(names, vec!["headquarteredIn", "foundedBy"]);
        assert_eq!(load_etg(&etg.to_json()).unwrap(), etg);
    }

    #[test]
    fn load_errors() {
        let mut v = du_value();
        v["object_properties"][2]["range"] = json!("Placee");
        assert!(matches!(
            load_etg(&v.to_string()),
            Err(EtgError::DanglingProperty { .. })
        ));
        let mut v = du_value();
        v["types"][2]["id"] = json!("Person");
        assert!(matches!(load_etg(&v.to_string()), Err(EtgError::DuplicateType(_))));
        let mut v = du_value();
        v["types"][0]["parent"] = json!("Person");
        assert!(load_etg(&v.to_string()).is_err());
        let types_only = json!({"id": "t", "types": [{"id": "Thing", "label": "Thing"}]});
        assert!(load_etg(&types_only.to_string()).is_ok());
    }

    #[test]
    fn seeded_lint_codes() {
        let mut v = du_value();
        v["data_properties"]
            .as_array_mut()
            .unwrap()
            .retain(|p| p["domain"] != "Organization");
        assert_eq!(lint_value(&v), vec![RuleCode::EP1]);

        let mut v = du_value();
        v["types"][1]["label"] = json!("Agent");
        v["types"][2]["label"] = json!("agent");
        assert_eq!(lint_value(&v), vec![RuleCode::IC4]);

        let mut v = du_value();
        v["object_properties"][0]["range"] = json!("Ghost");
        assert_eq!(lint_value(&v), vec![RuleCode::EP2]);

        let mut v = du_value();
        v["data_properties"]
            .as_array_mut()
            .unwrap()
            .push(json!({"name": "title", "domain": "Publication", "datatype": "string"}));
        assert_eq!(lint_value(&v), vec![RuleCode::EP3]);

        let mut v = du_value();
        v["types"][1]["differentiating"] = json!([]);
        assert_eq!(lint_value(&v), vec![RuleCode::CH1]);
    }

    #[test]
    fn reticence_and_disabled_codes() {
        let etg = du();
        let config = CanonConfig {
            stoplist: vec!["place".into()],
            disabled: BTreeSet::new(),
        };
        assert_eq!(codes(&lint_etg(&etg, &config)), vec![RuleCode::VP1]);
        let config = CanonConfig {
            stoplist: vec!["place".into()],
            disabled: BTreeSet::from([RuleCode::VP1]),
        };
        assert!(lint_etg(&etg, &config).is_empty());
    }

    #[test]
    fn grounding_du_three_classes() {
        let o = ontology(&["Book", "Person", "Organization"]);
        let (sg, findings) = ground(&o, &du(), &book_mapping()).unwrap();
        assert!(findings.is_empty(), "{findings:?}");
        assert_eq!(sg.grounding.len(), o.nodes.len());
        assert_eq!(sg.type_of("en-book-1").unwrap().as_str(), "Publication");
        assert_eq!(sg.type_of("en-publication-1").unwrap().as_str(), "Publication");
        assert_eq!(sg.type_of("en-org-1").unwrap().as_str(), "Organization");
        assert!(sg.effective_properties["en-book-1"].object.contains("author"));
    }

    #[test]
    fn grounding_by_class_name_key() {
        let o = ontology(&["Book", "Person", "Organization"]);
        let mapping = BTreeMap::from([("Book".to_string(), Identifier::new("Publication").unwrap())]);
        let (sg, _) = ground(&o, &du(), &mapping).unwrap();
        assert_eq!(sg.type_of("en-book-1").unwrap().as_str(), "Publication");
    }

    #[test]
    fn reconfigured_leaf_inherits() {
        let mut o = ontology(&["Book", "Person", "Organization"]);
        o.add_leaf("en-book-1", Identifier::new("Widget").unwrap(), "widget", None)
            .unwrap();
        let (sg, findings) = ground(&o, &du(), &book_mapping()).unwrap();
        assert_eq!(codes(&findings), vec![RuleCode::GR1]);
        assert_eq!(sg.type_of("Widget").unwrap().as_str(), "Publication");
        assert_eq!(sg.grounding.len(), o.nodes.len());
        for node in &o.nodes {
            if let Some(p) = &node.parent {
                let child = &sg.effective_properties[&node.id];
                let parent = &sg.effective_properties[p];
                if sg.etg.is_a(sg.grounding[&node.id].as_str(), sg.grounding[p].as_str()) {
                    assert!(child.data.is_superset(&parent.data));
                }
            }
        }
    }

    #[test]
    fn grounding_errors() {
        let o = ontology(&["Book"]);
        let mut v = du_value();
        v["types"][0]["label"] = json!("Anything");
        let etg = load_etg(&v.to_string()).unwrap();
        assert!(matches!(
            ground(&o, &etg, &BTreeMap::new()),
            Err(GroundError::RootUngroundable(_))
        ));
        let bad = BTreeMap::from([("nowhere".to_string(), Identifier::new("Person").unwrap())]);
        assert!(matches!(ground(&o, &du(), &bad), Err(GroundError::UnknownNode(_))));
        let bad = BTreeMap::from([("Book".to_string(), Identifier::new("Ghost").unwrap())]);
        assert!(matches!(ground(&o, &du(), &bad), Err(GroundError::UnknownType(_))));
    }

    #[test]
    fn repository_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mut repo = EtgRepository::open(dir.path()).unwrap();
        let tags = vec!["university".to_string()];
        let entry = repo_add(&mut repo, &du(), &tags, "1.0").unwrap();
        assert_eq!(entry.lint_status, LintStatus::Clean);
        assert!(matches!(
            repo_add(&mut repo, &du(), &tags, "1.0"),
            Err(RepoError::Duplicate { .. })
        ));

        let reopened = EtgRepository::open(dir.path()).unwrap();
        assert_eq!(repo_find(&reopened, &tags).len(), 1);
        assert_eq!(repo_find(&reopened, &[]).len(), 1);
        assert!(repo_find(&reopened, &["nonexistent".to_string()]).is_empty());
        assert_eq!(reopened.load("du", "1.0").unwrap(), du());
        assert!(dir.path().join("du/1.0.etg.json").is_file());

        let mut v = du_value();
        v["data_properties"]
            .as_array_mut()
            .unwrap()
            .retain(|p| p["domain"] != "Organization");
        let broken = read_etg(&v.to_string()).unwrap();
        match repo_add(&mut repo, &broken, &tags, "2.0") {
            Err(RepoError::Lint(f)) => assert_eq!(codes(&f), vec![RuleCode::EP1]),
            other => panic!("expected lint refusal, got {other:?}"),
        }
    }
}
