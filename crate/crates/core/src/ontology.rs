//! Lightweight ontologies: backbone is-a trees spliced from lexical hypernym
//! paths of the classes in a dataset schema.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lexsem::{LexicalSemanticResource, LexsemError};
use crate::model::{Finding, Identifier, RuleCode};

#[derive(Debug, Error)]
pub enum OntologyError {
    #[error("schema parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("duplicate schema class `{0}`")]
    DuplicateClass(String),
    #[error("{class}.{attribute}: reference target `{target}` is not a schema class")]
    UnknownTarget {
        class: String,
        attribute: String,
        target: String,
    },
    #[error("{class}.{attribute}: {datatype} attributes take no target")]
    UnexpectedTarget {
        class: String,
        attribute: String,
        datatype: String,
    },
    #[error("{class}.{attribute}: reference attribute needs a target")]
    MissingTarget { class: String, attribute: String },
    #[error("schema has no classes")]
    EmptySchema,
    #[error("language {0} has no root synset")]
    NoRoot(String),
    #[error("classes {first} and {second} resolve to the same sense {synset}")]
    SharedSense {
        first: String,
        second: String,
        synset: String,
    },
    #[error("node id `{0}` already exists")]
    DuplicateNode(String),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error(transparent)]
    Lexsem(#[from] LexsemError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttributeType {
    String,
    Integer,
    Date,
    Reference,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemaAttribute {
    pub name: Identifier,
    pub datatype: AttributeType,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<Identifier>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemaClass {
    pub name: Identifier,
    #[serde(default)]
    pub attributes: Vec<SchemaAttribute>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSchema {
    pub classes: Vec<SchemaClass>,
}

pub fn load_dataset_schema(document: &str) -> Result<DatasetSchema, OntologyError> {
    let schema: DatasetSchema =
        serde_json::from_str(document).map_err(|e| OntologyError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
    schema.validate()?;
    Ok(schema)
}

impl DatasetSchema {
    pub fn validate(&self) -> Result<(), OntologyError> {
        let mut names = BTreeSet::new();
        for c in &self.classes {
            if !names.insert(&c.name) {
                return Err(OntologyError::DuplicateClass(c.name.to_string()));
            }
        }
        for c in &self.classes {
            for a in &c.attributes {
                match (a.datatype, &a.target) {
                    (AttributeType::Reference, None) => {
                        return Err(OntologyError::MissingTarget {
                            class: c.name.to_string(),
                            attribute: a.name.to_string(),
                        })
                    }
                    (AttributeType::Reference, Some(t)) if !names.contains(t) => {
                        return Err(OntologyError::UnknownTarget {
                            class: c.name.to_string(),
                            attribute: a.name.to_string(),
                            target: t.to_string(),
                        })
                    }
                    (AttributeType::Reference, Some(_)) | (_, None) => {}
                    (other, Some(_)) => {
                        return Err(OntologyError::UnexpectedTarget {
                            class: c.name.to_string(),
                            attribute: a.name.to_string(),
                            datatype: format!("{other:?}").to_lowercase(),
                        })
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OntologyNode {
    pub id: Identifier,
    pub label: String,
    pub synset: Option<Identifier>,
    pub class: Option<Identifier>,
    pub parent: Option<Identifier>,
}

/// Nodes are kept as a parent-pointer list so that malformed trees can be
/// represented and reported by [`validate_backbone`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LightweightOntology {
    pub nodes: Vec<OntologyNode>,
    pub root: Identifier,
}

#[derive(Serialize)]
struct CanonicalNode<'a> {
    id: &'a str,
    label: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    synset: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    class: Option<&'a str>,
    children: Vec<CanonicalNode<'a>>,
}

impl LightweightOntology {
    pub fn node(&self, id: &str) -> Option<&OntologyNode> {
        self.nodes.iter().find(|n| n.id.as_str() == id)
    }

    pub fn node_for_class(&self, class: &str) -> Option<&OntologyNode> {
        self.nodes
            .iter()
            .find(|n| n.class.as_ref().is_some_and(|c| c.as_str() == class))
    }

    /// Children sorted by label, then id.
    pub fn children(&self, id: &str) -> Vec<&OntologyNode> {
        let mut out: Vec<&OntologyNode> = self
            .nodes
            .iter()
            .filter(|n| n.parent.as_ref().is_some_and(|p| p.as_str() == id))
            .collect();
        out.sort_by(|a, b| a.label.cmp(&b.label).then_with(|| a.id.cmp(&b.id)));
        out
    }

    /// Ancestors of `id`, nearest first. Stops on dangling parents or cycles.
    pub fn ancestors(&self, id: &str) -> Vec<&OntologyNode> {
        let mut out: Vec<&OntologyNode> = Vec::new();
        let mut at = self.node(id).and_then(|n| n.parent.as_ref());
        while let Some(p) = at {
            let Some(node) = self.node(p.as_str()) else { break };
            if out.iter().any(|n| n.id == node.id) || node.id.as_str() == id {
                break;
            }
            out.push(node);
            at = node.parent.as_ref();
        }
        out
    }

    pub fn add_leaf(
        &mut self,
        parent: &str,
        id: Identifier,
        label: impl Into<String>,
        class: Option<Identifier>,
    ) -> Result<(), OntologyError> {
        let parent = self
            .node(parent)
            .ok_or_else(|| OntologyError::UnknownNode(parent.to_string()))?
            .id
            .clone();
        if self.node(id.as_str()).is_some() {
            return Err(OntologyError::DuplicateNode(id.to_string()));
        }
        self.nodes.push(OntologyNode {
            id,
            label: label.into(),
            synset: None,
            class,
            parent: Some(parent),
        });
        Ok(())
    }

    fn canonical_node<'a>(&'a self, node: &'a OntologyNode, depth: usize) -> CanonicalNode<'a> {
        let children = if depth > self.nodes.len() {
            Vec::new()
        } else {
            self.children(node.id.as_str())
                .into_iter()
                .map(|c| self.canonical_node(c, depth + 1))
                .collect()
        };
        CanonicalNode {
            id: node.id.as_str(),
            label: &node.label,
            synset: node.synset.as_ref().map(Identifier::as_str),
            class: node.class.as_ref().map(Identifier::as_str),
            children,
        }
    }

    /// JSON tree from the root with children sorted by label.
    pub fn to_canonical_json(&self) -> String {
        match self.node(self.root.as_str()) {
            Some(root) => serde_json::to_string_pretty(&self.canonical_node(root, 0))
                .expect("ontology serializes"),
            None => "null".to_string(),
        }
    }
}

/// `CreativeWork` -> `creative work`, `date_of_birth` -> `date of birth`.
pub fn class_phrase(name: &str) -> String {
    let chars: Vec<char> = name.chars().collect();
    let mut words: Vec<String> = Vec::new();
    let mut current = String::new();
    for (i, &c) in chars.iter().enumerate() {
        if matches!(c, '_' | '-' | '.' | ' ') {
            if !current.is_empty() {
                words.push(std::mem::take(&mut current));
            }
            continue;
        }
        if c.is_uppercase() && !current.is_empty() {
            let prev = chars[i - 1];
            let next_lower = chars.get(i + 1).is_some_and(|n| n.is_lowercase());
            if prev.is_lowercase() || prev.is_ascii_digit() || (prev.is_uppercase() && next_lower) {
                words.push(std::mem::take(&mut current));
            }
        }
        current.extend(c.to_lowercase());
    }
    if !current.is_empty() {
        words.push(current);
    }
    words.join(" ")
}

fn unique_sibling_label(
    nodes: &[OntologyNode],
    parent: &Identifier,
    label: &str,
    id: &Identifier,
) -> String {
    let taken = nodes
        .iter()
        .any(|n| n.parent.as_ref() == Some(parent) && n.label.to_lowercase() == label.to_lowercase());
    if taken {
        format!("{label} ({id})")
    } else {
        label.to_string()
    }
}

pub fn build_lightweight_ontology(
    lexsem: &LexicalSemanticResource,
    language: &str,
    schema: &DatasetSchema,
) -> Result<(LightweightOntology, Vec<Finding>), OntologyError> {
    lexsem.hierarchy(language)?;
    if schema.classes.is_empty() {
        return Err(OntologyError::EmptySchema);
    }
    let root = lexsem
        .root(language)?
        .ok_or_else(|| OntologyError::NoRoot(language.to_string()))?;
    let mut nodes = vec![OntologyNode {
        id: root.id.clone(),
        label: root.lemmas[0].clone(),
        synset: Some(root.id.clone()),
        class: None,
        parent: None,
    }];
    let mut position: HashMap<Identifier, usize> = HashMap::from([(root.id.clone(), 0)]);
    let mut findings = Vec::new();

    for class in &schema.classes {
        let phrase = class_phrase(class.name.as_str());
        let last = phrase.rsplit(' ').next().unwrap_or_default().to_string();
        let sense = lexsem
            .resolve_sense(&phrase, language)
            .or_else(|_| lexsem.resolve_sense(&last, language))
            .ok();
        let Some(sense) = sense else {
            if position.contains_key(&class.name) {
                return Err(OntologyError::DuplicateNode(class.name.to_string()));
            }
            let label = unique_sibling_label(&nodes, &root.id, &phrase, &class.name);
            position.insert(class.name.clone(), nodes.len());
            nodes.push(OntologyNode {
                id: class.name.clone(),
                label,
                synset: None,
                class: Some(class.name.clone()),
                parent: Some(root.id.clone()),
            });
            findings.push(Finding::new(
                RuleCode::LO1,
                format!("ontology/{}", class.name),
                format!("class `{}` (\"{phrase}\") has no {language} sense; attached under the root", class.name),
            ));
            continue;
        };

        let path = lexsem.hypernym_path(language, sense.id.as_str())?;
        let mut parent: Option<Identifier> = None;
        for synset in path.iter().rev() {
            if !position.contains_key(&synset.id) {
                let parent_id = parent.clone().expect("root node exists");
                let label = unique_sibling_label(&nodes, &parent_id, &synset.lemmas[0], &synset.id);
                position.insert(synset.id.clone(), nodes.len());
                nodes.push(OntologyNode {
                    id: synset.id.clone(),
                    label,
                    synset: Some(synset.id.clone()),
                    class: None,
                    parent: Some(parent_id),
                });
            }
            parent = Some(synset.id.clone());
        }
        let node = &mut nodes[position[&sense.id]];
        if let Some(first) = &node.class {
            return Err(OntologyError::SharedSense {
                first: first.to_string(),
                second: class.name.to_string(),
                synset: sense.id.to_string(),
            });
        }
        node.class = Some(class.name.clone());
    }

    Ok((
        LightweightOntology {
            nodes,
            root: root.id.clone(),
        },
        findings,
    ))
}

pub fn validate_backbone(ontology: &LightweightOntology) -> Vec<Finding> {
    let mut findings = Vec::new();
    let path = |id: &str| format!("ontology/{id}");

    let roots: Vec<&OntologyNode> = ontology.nodes.iter().filter(|n| n.parent.is_none()).collect();
    if roots.len() != 1 || roots[0].id != ontology.root {
        let listed: Vec<&str> = roots.iter().map(|n| n.id.as_str()).collect();
        findings.push(Finding::new(
            RuleCode::LO2,
            path(ontology.root.as_str()),
            format!("expected the single root {}, found roots [{}]", ontology.root, listed.join(", ")),
        ));
    }

    let mut by_id: BTreeMap<&str, usize> = BTreeMap::new();
    for n in &ontology.nodes {
        *by_id.entry(n.id.as_str()).or_default() += 1;
    }
    for (id, count) in by_id.iter().filter(|(_, c)| **c > 1) {
        findings.push(Finding::new(
            RuleCode::LO3,
            path(id),
            format!("node appears {count} times"),
        ));
    }
    let mut reported: BTreeSet<Vec<&str>> = BTreeSet::new();
    for n in &ontology.nodes {
        if let Some(p) = &n.parent {
            if !by_id.contains_key(p.as_str()) {
                findings.push(Finding::new(
                    RuleCode::LO3,
                    path(n.id.as_str()),
                    format!("parent `{p}` does not exist"),
                ));
                continue;
            }
        }
        let mut trail: Vec<&str> = vec![n.id.as_str()];
        let mut at = n.parent.as_ref();
        while let Some(p) = at {
            if let Some(pos) = trail.iter().position(|t| *t == p.as_str()) {
                let mut cycle = trail[pos..].to_vec();
                cycle.sort();
                if pos == 0 && reported.insert(cycle.clone()) {
                    findings.push(Finding::new(
                        RuleCode::LO3,
                        path(cycle[0]),
                        format!("is-a cycle through {}", cycle.join(", ")),
                    ));
                }
                break;
            }
            trail.push(p.as_str());
            at = ontology.node(p.as_str()).and_then(|x| x.parent.as_ref());
        }
    }

    let mut siblings: BTreeMap<(&str, String), Vec<&str>> = BTreeMap::new();
    for n in &ontology.nodes {
        if let Some(p) = &n.parent {
            siblings
                .entry((p.as_str(), n.label.trim().to_lowercase()))
                .or_default()
                .push(n.id.as_str());
        }
    }
    for ((parent, label), ids) in siblings.iter().filter(|(_, ids)| ids.len() > 1) {
        findings.push(Finding::new(
            RuleCode::LO4,
            path(parent),
            format!("children {} share label `{label}`", ids.join(", ")),
        ));
    }

    findings.sort();
    findings
}
