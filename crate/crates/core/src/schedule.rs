//! Faceted classification schedules and the canon linter.
//!
//! A schedule is a base class plus one array tree per facet category. Each
//! concept carries a relative notation segment; the full notation of a
//! concept is the concatenation of segments from its array root down to it.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::Deserialize;
use thiserror::Error;

use crate::model::{
    path_of, Finding, Identifier, IdentifierError, Label, LabelError, RuleCode,
};

/// Characters that may separate facets inside a class number.
pub const INDICATORS: [char; 5] = [',', ';', ':', '.', '\''];

#[derive(Debug, Error)]
pub enum ScheduleError {
    #[error("schedule parse error at line {line}, column {column}: {message}")]
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
    #[error("{path}: {source}")]
    Label { path: String, source: LabelError },
    #[error("{path}: notation `{notation}` must be non-empty ASCII letters and digits")]
    BadNotation { path: String, notation: String },
    #[error("category code `{0}` must be a single ASCII letter")]
    BadCategoryCode(String),
    #[error("indicator `{0}` must be one of , ; : . '")]
    BadIndicator(String),
    #[error("duplicate category code `{0}`")]
    DuplicateCode(char),
    #[error("duplicate indicator `{0}`")]
    DuplicateIndicator(char),
    #[error("duplicate characteristic `{0}` in succession")]
    DuplicateCharacteristic(String),
    #[error("{path}: characteristic `{name}` is not in the succession")]
    UnknownCharacteristic { path: String, name: String },
    #[error("{path}: dangling reference `{parent}`")]
    DanglingParent { path: String, parent: String },
    #[error("duplicate concept id `{id}` in category {category}")]
    DuplicateConcept { category: char, id: String },
    #[error("parent cycle through concept `{id}` in category {category}")]
    ParentCycle { category: char, id: String },
    #[error("unknown concept `{0}`")]
    UnknownConcept(String),
    #[error("unknown category `{0}`")]
    UnknownCategory(char),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ResolveError {
    #[error("unknown category `{0}`")]
    UnknownCategory(char),
    #[error("no concept in category {category} has notation `{notation}`")]
    NoMatch { category: char, notation: String },
    #[error("notation `{notation}` is ambiguous in category {category} ({count} concepts)")]
    Ambiguous {
        category: char,
        notation: String,
        count: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Characteristic {
    pub name: Identifier,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Concept {
    pub id: Identifier,
    /// Relative notation segment.
    pub notation: String,
    pub label: Label,
    /// `(characteristic name, value)`; absent for the base.
    pub characteristic_value: Option<(Identifier, String)>,
    pub parent: Option<Identifier>,
    pub sought: bool,
    pub residual: bool,
    pub ordinal: i64,
}

impl Concept {
    pub fn characteristic(&self) -> Option<&Identifier> {
        self.characteristic_value.as_ref().map(|(name, _)| name)
    }

    pub fn value(&self) -> Option<&str> {
        self.characteristic_value.as_ref().map(|(_, v)| v.as_str())
    }
}

#[derive(Debug, Clone)]
pub struct FacetCategory {
    pub code: char,
    pub indicator: char,
    pub characteristic: Identifier,
    /// The category's array tree, in file order.
    pub concepts: Vec<Concept>,
    index: HashMap<Identifier, usize>,
    // keyed by parent position; `None` is the root array
    members: BTreeMap<Option<usize>, Vec<usize>>,
    full_notations: Vec<String>,
    parents: Vec<Option<usize>>,
}

impl FacetCategory {
    pub fn concept(&self, id: &str) -> Option<&Concept> {
        self.index.get(id).map(|&i| &self.concepts[i])
    }

    pub fn full_notation(&self, id: &str) -> Option<&str> {
        self.index.get(id).map(|&i| self.full_notations[i].as_str())
    }

    pub fn roots(&self) -> Vec<&Concept> {
        self.sorted_members(None)
    }

    fn sorted_members(&self, parent: Option<usize>) -> Vec<&Concept> {
        let mut out: Vec<&Concept> = self
            .members
            .get(&parent)
            .map(|m| m.iter().map(|&i| &self.concepts[i]).collect())
            .unwrap_or_default();
        out.sort_by(|a, b| a.ordinal.cmp(&b.ordinal).then_with(|| a.notation.cmp(&b.notation)));
        out
    }

    /// Ids from the array root down to `id`, inclusive.
    pub fn path_to(&self, id: &str) -> Option<Vec<&Concept>> {
        let mut at = *self.index.get(id)?;
        let mut path = vec![&self.concepts[at]];
        while let Some(parent) = self.parents[at] {
            path.push(&self.concepts[parent]);
            at = parent;
        }
        path.reverse();
        Some(path)
    }

    /// Every chain of concepts whose concatenated segments spell `notation`.
    fn matching_chains(&self, notation: &str) -> Vec<Vec<usize>> {
        let mut found = Vec::new();
        let mut stack = Vec::new();
        self.walk(None, notation, &mut stack, &mut found);
        found
    }

    fn walk(
        &self,
        parent: Option<usize>,
        remaining: &str,
        stack: &mut Vec<usize>,
        found: &mut Vec<Vec<usize>>,
    ) {
        let Some(members) = self.members.get(&parent) else {
            return;
        };
        for &m in members {
            let segment = self.concepts[m].notation.as_str();
            if let Some(rest) = remaining.strip_prefix(segment) {
                stack.push(m);
                if rest.is_empty() {
                    found.push(stack.clone());
                } else {
                    self.walk(Some(m), rest, stack, found);
                }
                stack.pop();
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct ClassificationSchedule {
    pub id: Identifier,
    pub base: Concept,
    pub succession: Vec<Characteristic>,
    pub categories: Vec<FacetCategory>,
    pub reticence_stoplist: Vec<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ScheduleDoc {
    id: String,
    base: BaseDoc,
    succession: Vec<String>,
    #[serde(default)]
    stoplist: Vec<String>,
    #[serde(default)]
    categories: Vec<CategoryDoc>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BaseDoc {
    id: String,
    notation: String,
    label: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CategoryDoc {
    code: String,
    indicator: String,
    characteristic: String,
    #[serde(default)]
    concepts: Vec<ConceptDoc>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConceptDoc {
    id: String,
    notation: String,
    label: String,
    value: String,
    parent: Option<String>,
    sought: Option<bool>,
    residual: Option<bool>,
    characteristic: Option<String>,
    ordinal: i64,
}

fn ident(path: &str, text: &str) -> Result<Identifier, ScheduleError> {
    Identifier::new(text).map_err(|source| ScheduleError::Identifier {
        path: path.to_string(),
        source,
    })
}

fn label(path: &str, text: &str) -> Result<Label, ScheduleError> {
    Label::en(text).map_err(|source| ScheduleError::Label {
        path: path.to_string(),
        source,
    })
}

fn notation(path: &str, text: &str) -> Result<String, ScheduleError> {
    if text.is_empty() || !text.chars().all(|c| c.is_ascii_alphanumeric()) {
        return Err(ScheduleError::BadNotation {
            path: path.to_string(),
            notation: text.to_string(),
        });
    }
    Ok(text.to_string())
}

fn single_char(text: &str) -> Option<char> {
    let mut chars = text.chars();
    let c = chars.next()?;
    chars.next().is_none().then_some(c)
}

pub fn load_schedule(document: &str) -> Result<ClassificationSchedule, ScheduleError> {
    let doc: ScheduleDoc = serde_json::from_str(document).map_err(|e| ScheduleError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let id = ident("id", &doc.id)?;

    let mut succession = Vec::new();
    let mut known = BTreeSet::new();
    for name in &doc.succession {
        let name = ident("succession", name)?;
        if !known.insert(name.clone()) {
            return Err(ScheduleError::DuplicateCharacteristic(name.to_string()));
        }
        succession.push(Characteristic {
            name,
            description: String::new(),
        });
    }

    let base = Concept {
        id: ident("base/id", &doc.base.id)?,
        notation: notation("base/notation", &doc.base.notation)?,
        label: label("base/label", &doc.base.label)?,
        characteristic_value: None,
        parent: None,
        sought: true,
        residual: false,
        ordinal: 0,
    };

    let mut codes = BTreeSet::new();
    let mut indicators = BTreeSet::new();
    let mut categories = Vec::new();
    for cat in doc.categories {
        let code = single_char(&cat.code)
            .filter(|c| c.is_ascii_alphabetic())
            .ok_or_else(|| ScheduleError::BadCategoryCode(cat.code.clone()))?;
        let indicator = single_char(&cat.indicator)
            .filter(|c| INDICATORS.contains(c))
            .ok_or_else(|| ScheduleError::BadIndicator(cat.indicator.clone()))?;
        if !codes.insert(code) {
            return Err(ScheduleError::DuplicateCode(code));
        }
        if !indicators.insert(indicator) {
            return Err(ScheduleError::DuplicateIndicator(indicator));
        }
        let cat_path = format!("categories/{code}");
        let characteristic = ident(&cat_path, &cat.characteristic)?;
        if !known.contains(&characteristic) {
            return Err(ScheduleError::UnknownCharacteristic {
                path: cat_path,
                name: characteristic.to_string(),
            });
        }
        let mut concepts = Vec::with_capacity(cat.concepts.len());
        for c in cat.concepts {
            let path = format!("{cat_path}/{}", c.id);
            let own = match &c.characteristic {
                Some(name) => ident(&path, name)?,
                None => characteristic.clone(),
            };
            if !known.contains(&own) {
                return Err(ScheduleError::UnknownCharacteristic {
                    path,
                    name: own.to_string(),
                });
            }
            concepts.push(Concept {
                id: ident(&path, &c.id)?,
                notation: notation(&path, &c.notation)?,
                label: label(&path, &c.label)?,
                characteristic_value: Some((own, c.value)),
                parent: c.parent.as_deref().map(|p| ident(&path, p)).transpose()?,
                sought: c.sought.unwrap_or(true),
                residual: c.residual.unwrap_or(false),
                ordinal: c.ordinal,
            });
        }
        categories.push(index_category(code, indicator, characteristic, concepts)?);
    }

    Ok(ClassificationSchedule {
        id,
        base,
        succession,
        categories,
        reticence_stoplist: doc.stoplist.iter().map(|w| w.to_lowercase()).collect(),
    })
}

fn index_category(
    code: char,
    indicator: char,
    characteristic: Identifier,
    concepts: Vec<Concept>,
) -> Result<FacetCategory, ScheduleError> {
    let mut index = HashMap::new();
    for (i, c) in concepts.iter().enumerate() {
        if index.insert(c.id.clone(), i).is_some() {
            return Err(ScheduleError::DuplicateConcept {
                category: code,
                id: c.id.to_string(),
            });
        }
    }
    let mut parents = Vec::with_capacity(concepts.len());
    let mut members: BTreeMap<Option<usize>, Vec<usize>> = BTreeMap::new();
    for (i, c) in concepts.iter().enumerate() {
        let parent = match &c.parent {
            None => None,
            Some(p) => Some(*index.get(p).ok_or_else(|| ScheduleError::DanglingParent {
                path: format!("categories/{code}/{}", c.id),
                parent: p.to_string(),
            })?),
        };
        parents.push(parent);
        members.entry(parent).or_default().push(i);
    }
    let mut full_notations = vec![String::new(); concepts.len()];
    for i in 0..concepts.len() {
        let mut at = i;
        let mut chain = vec![i];
        while let Some(p) = parents[at] {
            if chain.len() > concepts.len() {
                return Err(ScheduleError::ParentCycle {
                    category: code,
                    id: concepts[i].id.to_string(),
                });
            }
            chain.push(p);
            at = p;
        }
        full_notations[i] = chain
            .iter()
            .rev()
            .map(|&c| concepts[c].notation.as_str())
            .collect();
    }
    Ok(FacetCategory {
        code,
        indicator,
        characteristic,
        concepts,
        index,
        members,
        full_notations,
        parents,
    })
}

/// Lint options: which arrays are declared exhaustive (by array path, e.g.
/// `MED/E/4`) and which rules are switched off.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LintConfig {
    #[serde(default)]
    pub exhaustive: BTreeSet<String>,
    #[serde(default)]
    pub disabled: BTreeSet<RuleCode>,
}

impl LintConfig {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// Whole-word, case-insensitive stoplist hits in `text`.
pub(crate) fn reticence_hits<'a>(text: &str, stoplist: &'a [String]) -> Vec<&'a str> {
    let words: BTreeSet<String> = text
        .split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
        .collect();
    stoplist
        .iter()
        .filter(|s| words.contains(&s.to_lowercase()))
        .map(String::as_str)
        .collect()
}

impl ClassificationSchedule {
    pub fn category(&self, code: char) -> Option<&FacetCategory> {
        self.categories.iter().find(|c| c.code == code)
    }

    fn succession_index(&self, name: &Identifier) -> usize {
        self.succession
            .iter()
            .position(|c| &c.name == name)
            .expect("characteristic names are checked at load")
    }

    /// Resolves a full notation within one category's array tree.
    pub fn resolve_notation(
        &self,
        category: char,
        full_notation: &str,
    ) -> Result<Vec<&Concept>, ResolveError> {
        let cat = self
            .category(category)
            .ok_or(ResolveError::UnknownCategory(category))?;
        let mut chains = cat.matching_chains(full_notation);
        match chains.len() {
            0 => Err(ResolveError::NoMatch {
                category,
                notation: full_notation.to_string(),
            }),
            1 => Ok(chains
                .pop()
                .unwrap()
                .into_iter()
                .map(|i| &cat.concepts[i])
                .collect()),
            count => Err(ResolveError::Ambiguous {
                category,
                notation: full_notation.to_string(),
                count,
            }),
        }
    }

    /// Children of a concept ordered by ordinal then notation. The children of
    /// the base are the category roots, category by category.
    pub fn children(&self, concept_id: &str) -> Result<Vec<&Concept>, ScheduleError> {
        if self.base.id.as_str() == concept_id {
            return Ok(self.categories.iter().flat_map(|c| c.roots()).collect());
        }
        for cat in &self.categories {
            if let Some(&i) = cat.index.get(concept_id) {
                return Ok(cat.sorted_members(Some(i)));
            }
        }
        Err(ScheduleError::UnknownConcept(concept_id.to_string()))
    }

    pub fn lint(&self, config: &LintConfig) -> Vec<Finding> {
        lint_schedule(self, config)
    }
}

pub fn lint_schedule(schedule: &ClassificationSchedule, config: &LintConfig) -> Vec<Finding> {
    let mut findings = Vec::new();
    let sid = schedule.id.as_str();

    let mut label_owners: Vec<(String, &Label)> = vec![(path_of([sid]), &schedule.base.label)];
    let mut id_paths: BTreeMap<&str, Vec<String>> = BTreeMap::new();
    id_paths
        .entry(schedule.base.id.as_str())
        .or_default()
        .push(schedule.base.notation.clone());

    for cat in &schedule.categories {
        let code = cat.code.to_string();
        let concept_path = |i: usize| {
            let mut parts = vec![sid.to_string(), code.clone()];
            let chain = cat.path_to(cat.concepts[i].id.as_str()).unwrap_or_default();
            parts.extend(chain.iter().map(|c| c.id.to_string()));
            parts.join("/")
        };

        for (parent, members) in &cat.members {
            let array_path = match parent {
                None => path_of([sid, code.as_str()]),
                Some(p) => concept_path(*p),
            };

            // IC1
            let names: BTreeSet<&Identifier> = members
                .iter()
                .filter_map(|&m| cat.concepts[m].characteristic())
                .collect();
            if names.len() > 1 {
                let listed: Vec<&str> = names.iter().map(|n| n.as_str()).collect();
                findings.push(Finding::new(
                    RuleCode::IC1,
                    &array_path,
                    format!("array mixes characteristics {}", listed.join(", ")),
                ));
            }

            // IC3
            if !config.exhaustive.contains(&array_path)
                && !members.iter().any(|&m| cat.concepts[m].residual)
            {
                findings.push(Finding::new(
                    RuleCode::IC3,
                    &array_path,
                    "array is neither declared exhaustive nor has a residual member",
                ));
            }

            // IC4
            let mut by_value: BTreeMap<String, Vec<&str>> = BTreeMap::new();
            let mut by_label: BTreeMap<String, Vec<&str>> = BTreeMap::new();
            for &m in members {
                let c = &cat.concepts[m];
                if let Some(v) = c.value() {
                    let key = v.trim().to_lowercase();
                    if !key.is_empty() {
                        by_value.entry(key).or_default().push(c.id.as_str());
                    }
                }
                by_label.entry(c.label.key()).or_default().push(c.id.as_str());
            }
            for (value, ids) in by_value.iter().filter(|(_, ids)| ids.len() > 1) {
                findings.push(Finding::new(
                    RuleCode::IC4,
                    &array_path,
                    format!("siblings {} share characteristic value `{value}`", ids.join(", ")),
                ));
            }
            for (text, ids) in by_label.iter().filter(|(_, ids)| ids.len() > 1) {
                findings.push(Finding::new(
                    RuleCode::IC4,
                    &array_path,
                    format!("siblings {} share label `{text}`", ids.join(", ")),
                ));
            }

            // IC5
            if members
                .windows(2)
                .any(|w| cat.concepts[w[0]].ordinal > cat.concepts[w[1]].ordinal)
            {
                findings.push(Finding::new(
                    RuleCode::IC5,
                    &array_path,
                    "siblings are not stored in non-decreasing ordinal order",
                ));
            }
        }

        for (i, c) in cat.concepts.iter().enumerate() {
            let path = concept_path(i);
            label_owners.push((path.clone(), &c.label));
            id_paths
                .entry(c.id.as_str())
                .or_default()
                .push(format!("{code}:{}", cat.full_notations[i]));

            if c.value().is_none_or(|v| v.trim().is_empty()) {
                findings.push(Finding::new(
                    RuleCode::CH1,
                    &path,
                    "concept introduces no characteristic value",
                ));
            }
            let Some(parent) = cat.parents[i] else {
                continue;
            };
            let (Some(own), Some(up)) = (c.characteristic(), cat.concepts[parent].characteristic())
            else {
                continue;
            };
            let own_at = schedule.succession_index(own);
            let up_at = schedule.succession_index(up);
            // IC2
            if own_at < up_at {
                findings.push(Finding::new(
                    RuleCode::IC2,
                    &path,
                    format!("characteristic `{own}` precedes parent's `{up}` in the succession"),
                ));
            }
            // CH1
            if own_at > up_at + 1 {
                let skipped: Vec<&str> = schedule.succession[up_at + 1..own_at]
                    .iter()
                    .map(|c| c.name.as_str())
                    .collect();
                findings.push(Finding::new(
                    RuleCode::CH1,
                    &path,
                    format!("division skips {}", skipped.join(", ")),
                ));
            }
        }

        // NP2
        let mut by_notation: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        for (i, c) in cat.concepts.iter().enumerate() {
            by_notation
                .entry(cat.full_notations[i].as_str())
                .or_default()
                .push(c.id.as_str());
        }
        for (notation, ids) in by_notation.iter().filter(|(_, ids)| ids.len() > 1) {
            findings.push(Finding::new(
                RuleCode::NP2,
                path_of([sid, code.as_str(), notation]),
                format!("notation resolves to concepts {}", ids.join(", ")),
            ));
        }
    }

    // VP1
    for (path, label) in &label_owners {
        let hits = reticence_hits(&label.text, &schedule.reticence_stoplist);
        if !hits.is_empty() {
            findings.push(Finding::new(
                RuleCode::VP1,
                path,
                format!("label `{}` uses {}", label.text, hits.join(", ")),
            ));
        }
    }

    // NP1
    for (id, notations) in id_paths.iter().filter(|(_, n)| n.len() > 1) {
        findings.push(Finding::new(
            RuleCode::NP1,
            path_of([sid, id]),
            format!("identifier maps to notations {}", notations.join(", ")),
        ));
    }

    findings.retain(|f| !config.disabled.contains(&f.code));
    findings.sort();
    findings
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::{json, Value};

    const MED: &str = include_str!("../../../fixtures/med.json");
    const MED_LINT: &str = include_str!("../../../fixtures/med.lint.json");

    fn med() -> ClassificationSchedule {
        load_schedule(MED).unwrap()
    }

    fn config() -> LintConfig {
        LintConfig::from_json(MED_LINT).unwrap()
    }

    fn med_value() -> Value {
        serde_json::from_str(MED).unwrap()
    }

    fn concept_mut<'a>(doc: &'a mut Value, code: &str, id: &str) -> &'a mut Value {
        doc["categories"]
            .as_array_mut()
            .unwrap()
            .iter_mut()
            .find(|c| c["code"] == code)
            .unwrap()["concepts"]
            .as_array_mut()
            .unwrap()
            .iter_mut()
            .find(|c| c["id"] == id)
            .unwrap()
    }

    fn lint_value(doc: &Value) -> Vec<RuleCode> {
        let schedule = load_schedule(&doc.to_string()).unwrap();
        lint_schedule(&schedule, &config())
            .into_iter()
            .map(|f| f.code)
            .collect()
    }

    #[test]
    fn loads_med_fixture() {
        let s = med();
        assert_eq!(s.base.notation, "L");
        assert_eq!(s.base.label.text, "Medicine");
        let codes: Vec<char> = s.categories.iter().map(|c| c.code).collect();
        assert_eq!(codes, vec!['P', 'E', 'S', 'T']);
        assert_eq!(s.category('E').unwrap().full_notation("421"), Some("421"));
    }

    #[test]
    fn dangling_parent_is_reported() {
        let mut doc = med_value();
        concept_mut(&mut doc, "E", "421")["parent"] = json!("XX");
        let err = load_schedule(&doc.to_string()).unwrap_err();
        assert!(matches!(err, ScheduleError::DanglingParent { ref parent, .. } if parent == "XX"));
    }

    #[test]
    fn duplicate_concept_in_category_is_rejected() {
        let mut doc = med_value();
        concept_mut(&mut doc, "E", "5")["id"] = json!("4");
        assert!(matches!(
            load_schedule(&doc.to_string()),
            Err(ScheduleError::DuplicateConcept { category: 'E', .. })
        ));
    }

    #[test]
    fn unknown_keys_and_syntax_errors() {
        let mut doc = med_value();
        doc["colour"] = json!("red");
        assert!(matches!(
            load_schedule(&doc.to_string()),
            Err(ScheduleError::Parse { .. })
        ));
        let err = load_schedule("{\n  \"id\": ").unwrap_err();
        assert!(matches!(err, ScheduleError::Parse { line: 2, .. }));
    }

    #[test]
    fn base_only_schedule_is_valid() {
        let doc = json!({
            "id": "X", "base": {"id": "X", "notation": "X", "label": "Thing"},
            "succession": [], "categories": []
        });
        let s = load_schedule(&doc.to_string()).unwrap();
        assert!(s.categories.is_empty());
        assert!(lint_schedule(&s, &LintConfig::default()).is_empty());
    }

    #[test]
    fn clean_fixture_lints_clean() {
        assert_eq!(lint_schedule(&med(), &config()), vec![]);
    }

    #[test]
    fn duplicate_sibling_label_is_ic4() {
        let mut doc = med_value();
        concept_mut(&mut doc, "E", "5")["label"] = json!("Disease");
        assert_eq!(lint_value(&doc), vec![RuleCode::IC4]);
    }

    #[test]
    fn stoplist_hit_is_vp1() {
        let mut doc = med_value();
        concept_mut(&mut doc, "E", "5")["label"] = json!("Worthless remedies");
        doc["stoplist"] = json!(["worthless"]);
        assert_eq!(lint_value(&doc), vec![RuleCode::VP1]);
        // whole-word only
        concept_mut(&mut doc, "E", "5")["label"] = json!("Worthlessness");
        assert_eq!(lint_value(&doc), vec![]);
    }

    #[test]
    fn missing_exhaustive_declaration_is_ic3_warning() {
        let mut cfg = config();
        cfg.exhaustive.remove("MED/T");
        let findings = lint_schedule(&med(), &cfg);
        assert_eq!(findings.len(), 1);
        assert_eq!(findings[0].code, RuleCode::IC3);
        assert_eq!(findings[0].path, "MED/T");
        assert!(!findings[0].is_error());
    }

    #[test]
    fn residual_member_satisfies_ic3() {
        let mut cfg = config();
        cfg.exhaustive.remove("MED/T");
        let mut doc = med_value();
        concept_mut(&mut doc, "T", "N8")["residual"] = json!(true);
        let s = load_schedule(&doc.to_string()).unwrap();
        assert!(lint_schedule(&s, &cfg).is_empty());
    }

    #[test]
    fn disabled_rules_are_dropped() {
        let mut cfg = config();
        cfg.exhaustive.clear();
        cfg.disabled.insert(RuleCode::IC3);
        assert!(lint_schedule(&med(), &cfg).is_empty());
    }

    #[test]
    fn resolve_examples() {
        let s = med();
        let path: Vec<&str> = s
            .resolve_notation('E', "421")
            .unwrap()
            .iter()
            .map(|c| c.label.text.as_str())
            .collect();
        assert_eq!(path, vec!["Disease", "Tropical disease"]);
        let ids: Vec<&str> = s
            .resolve_notation('P', "9C")
            .unwrap()
            .iter()
            .map(|c| c.id.as_str())
            .collect();
        assert_eq!(ids, vec!["9C"]);
        assert!(matches!(
            s.resolve_notation('E', "zz"),
            Err(ResolveError::NoMatch { .. })
        ));
        assert!(matches!(
            s.resolve_notation('M', "4"),
            Err(ResolveError::UnknownCategory('M'))
        ));
    }

    #[test]
    fn resolve_backtracks_past_greedy_prefix() {
        let doc = json!({
            "id": "G", "base": {"id": "G", "notation": "G", "label": "General"},
            "succession": ["A"],
            "categories": [{"code": "P", "indicator": ",", "characteristic": "A", "concepts": [
                {"id": "x", "notation": "4", "label": "X", "value": "x", "ordinal": 1},
                {"id": "y", "notation": "42", "label": "Y", "value": "y", "ordinal": 2},
                {"id": "x1", "notation": "21", "label": "X1", "value": "x1", "parent": "x", "ordinal": 1},
                {"id": "y1", "notation": "5", "label": "Y1", "value": "y1", "parent": "y", "ordinal": 1}
            ]}]
        });
        let s = load_schedule(&doc.to_string()).unwrap();
        let ids: Vec<&str> = s
            .resolve_notation('P', "421")
            .unwrap()
            .iter()
            .map(|c| c.id.as_str())
            .collect();
        assert_eq!(ids, vec!["x", "x1"]);
    }

    #[test]
    fn homonymous_notation_is_ambiguous_and_np2() {
        let mut doc = med_value();
        // `4` + `21` and a new root `42` + `1` both spell 421
        let cat = doc["categories"][1]["concepts"].as_array_mut().unwrap();
        cat.push(json!({"id": "42", "notation": "42", "label": "Parasites", "value": "parasites", "ordinal": 3}));
        cat.push(json!({"id": "421x", "notation": "1", "label": "Worms", "value": "worms", "parent": "42", "ordinal": 1}));
        let s = load_schedule(&doc.to_string()).unwrap();
        assert!(matches!(
            s.resolve_notation('E', "421"),
            Err(ResolveError::Ambiguous { count: 2, .. })
        ));
        let mut cfg = config();
        cfg.exhaustive.insert("MED/E/42".into());
        let codes: Vec<RuleCode> = lint_schedule(&s, &cfg).into_iter().map(|f| f.code).collect();
        assert_eq!(codes, vec![RuleCode::NP2]);
    }

    #[test]
    fn children_examples() {
        let s = med();
        let kids: Vec<&str> = s.children("4").unwrap().iter().map(|c| c.id.as_str()).collect();
        assert_eq!(kids, vec!["421"]);
        assert!(s.children("N7").unwrap().is_empty());
        assert!(matches!(s.children("nope"), Err(ScheduleError::UnknownConcept(_))));
        assert_eq!(s.children("L").unwrap().len(), 8);
    }

    #[test]
    fn every_concept_round_trips_through_its_notation() {
        let s = med();
        for cat in &s.categories {
            for c in &cat.concepts {
                let full = cat.full_notation(c.id.as_str()).unwrap();
                let path = s.resolve_notation(cat.code, full).unwrap();
                assert_eq!(path.last().unwrap().id, c.id);
            }
        }
    }

    #[test]
    fn lint_is_deterministic() {
        let mut doc = med_value();
        concept_mut(&mut doc, "E", "5")["label"] = json!("Disease");
        concept_mut(&mut doc, "P", "9E")["ordinal"] = json!(0);
        let s = load_schedule(&doc.to_string()).unwrap();
        let a = format!("{:?}", lint_schedule(&s, &LintConfig::default()));
        let b = format!("{:?}", lint_schedule(&s, &LintConfig::default()));
        assert_eq!(a, b);
    }
}
