//! WordNet-like lexical-semantic resource: per-language genus/differentia
//! hierarchies of word senses.

use std::collections::{BTreeMap, BTreeSet};

use serde::Deserialize;
use thiserror::Error;

use crate::model::{is_language_tag, Identifier, IdentifierError};

#[derive(Debug, Error)]
pub enum LexsemError {
    #[error("lexsem parse error at line {line}, column {column}: {message}")]
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
    #[error("`{0}` is not a language tag")]
    BadLanguage(String),
    #[error("synset {0} has no lemmas")]
    NoLemmas(String),
    #[error("duplicate synset id `{0}`")]
    DuplicateSynset(String),
    #[error("synset {id} has dangling genus `{genus}`")]
    DanglingGenus { id: String, genus: String },
    #[error("genus cycle {{{}}}", .0.join(","))]
    Cycle(Vec<String>),
    #[error("language {language} has several roots: {}", .roots.join(", "))]
    MultipleRoots {
        language: String,
        roots: Vec<String>,
    },
    #[error("synset {0} must list at least one differentia not inherited from its genus")]
    NoDifferentia(String),
    #[error("catalogue entry references unknown {language} synset `{root}`")]
    UnknownCatalogueRoot { language: String, root: String },
    #[error("language `{0}` is not in the resource")]
    UnknownLanguage(String),
    #[error("lemma `{lemma}` not found in {language}")]
    LemmaNotFound { lemma: String, language: String },
    #[error("unknown synset `{0}`")]
    UnknownSynset(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Synset {
    pub id: Identifier,
    pub language: String,
    pub lemmas: Vec<String>,
    pub gloss: String,
    pub genus: Option<Identifier>,
    pub differentia: Vec<String>,
}

#[derive(Debug, Clone, Default)]
pub struct Hierarchy {
    pub synsets: BTreeMap<Identifier, Synset>,
    pub root: Option<Identifier>,
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HierarchyDescriptor {
    pub language: String,
    pub domain: String,
    pub root: Identifier,
}

#[derive(Debug, Clone)]
pub struct LexicalSemanticResource {
    pub id: Identifier,
    pub hierarchies: BTreeMap<String, Hierarchy>,
    pub catalogue: Vec<HierarchyDescriptor>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LexsemDoc {
    id: String,
    languages: BTreeMap<String, LanguageDoc>,
    #[serde(default)]
    catalogue: Vec<HierarchyDescriptor>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LanguageDoc {
    synsets: Vec<SynsetDoc>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SynsetDoc {
    id: String,
    lemmas: Vec<String>,
    #[serde(default)]
    gloss: String,
    genus: Option<String>,
    #[serde(default)]
    differentia: Vec<String>,
}

fn ident(path: &str, text: &str) -> Result<Identifier, LexsemError> {
    Identifier::new(text).map_err(|source| LexsemError::Identifier {
        path: path.to_string(),
        source,
    })
}

pub fn load_lexsem(document: &str) -> Result<LexicalSemanticResource, LexsemError> {
    let doc: LexsemDoc = serde_json::from_str(document).map_err(|e| LexsemError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let id = ident("id", &doc.id)?;
    let mut hierarchies = BTreeMap::new();
    for (language, lang_doc) in doc.languages {
        if !is_language_tag(&language) {
            return Err(LexsemError::BadLanguage(language));
        }
        let mut synsets = BTreeMap::new();
        for s in lang_doc.synsets {
            let path = format!("{language}/{}", s.id);
            let sid = ident(&path, &s.id)?;
            let lemmas: Vec<String> = s
                .lemmas
                .iter()
                .map(|l| l.trim().to_lowercase())
                .filter(|l| !l.is_empty())
                .collect();
            if lemmas.is_empty() {
                return Err(LexsemError::NoLemmas(s.id));
            }
            let synset = Synset {
                id: sid.clone(),
                language: language.clone(),
                lemmas,
                gloss: s.gloss,
                genus: s.genus.as_deref().map(|g| ident(&path, g)).transpose()?,
                differentia: s.differentia,
            };
            if synsets.insert(sid, synset).is_some() {
                return Err(LexsemError::DuplicateSynset(s.id));
            }
        }
        let root = check_hierarchy(&language, &synsets)?;
        hierarchies.insert(language, Hierarchy { synsets, root });
    }
    for entry in &doc.catalogue {
        let known = hierarchies
            .get(&entry.language)
            .is_some_and(|h| h.synsets.contains_key(&entry.root));
        if !known {
            return Err(LexsemError::UnknownCatalogueRoot {
                language: entry.language.clone(),
                root: entry.root.to_string(),
            });
        }
    }
    Ok(LexicalSemanticResource {
        id,
        hierarchies,
        catalogue: doc.catalogue,
    })
}

fn check_hierarchy(
    language: &str,
    synsets: &BTreeMap<Identifier, Synset>,
) -> Result<Option<Identifier>, LexsemError> {
    for s in synsets.values() {
        if let Some(g) = &s.genus {
            if !synsets.contains_key(g) {
                return Err(LexsemError::DanglingGenus {
                    id: s.id.to_string(),
                    genus: g.to_string(),
                });
            }
        }
    }
    for start in synsets.keys() {
        let mut seen: Vec<&Identifier> = Vec::new();
        let mut at = Some(start);
        while let Some(id) = at {
            if let Some(pos) = seen.iter().position(|s| *s == id) {
                let mut members: Vec<String> = seen[pos..].iter().map(|s| s.to_string()).collect();
                members.sort();
                return Err(LexsemError::Cycle(members));
            }
            seen.push(id);
            at = synsets[id].genus.as_ref();
        }
    }
    let roots: Vec<&Identifier> = synsets.values().filter(|s| s.genus.is_none()).map(|s| &s.id).collect();
    if roots.len() > 1 {
        return Err(LexsemError::MultipleRoots {
            language: language.to_string(),
            roots: roots.iter().map(|r| r.to_string()).collect(),
        });
    }
    // genus links are acyclic and resolved at this point
    for s in synsets.values() {
        let Some(genus) = &s.genus else { continue };
        let inherited = inherited_from(synsets, genus);
        if !s.differentia.iter().any(|d| !inherited.contains(d.as_str())) {
            return Err(LexsemError::NoDifferentia(s.id.to_string()));
        }
    }
    Ok(roots.first().map(|r| (*r).clone()))
}

fn inherited_from<'a>(
    synsets: &'a BTreeMap<Identifier, Synset>,
    id: &Identifier,
) -> BTreeSet<&'a str> {
    let mut out = BTreeSet::new();
    let mut at = synsets.get(id);
    while let Some(s) = at {
        out.extend(s.differentia.iter().map(String::as_str));
        at = s.genus.as_ref().and_then(|g| synsets.get(g));
    }
    out
}

impl LexicalSemanticResource {
    pub fn hierarchy(&self, language: &str) -> Result<&Hierarchy, LexsemError> {
        self.hierarchies
            .get(language)
            .ok_or_else(|| LexsemError::UnknownLanguage(language.to_string()))
    }

    pub fn synset(&self, language: &str, id: &str) -> Result<&Synset, LexsemError> {
        self.hierarchy(language)?
            .synsets
            .get(id)
            .ok_or_else(|| LexsemError::UnknownSynset(id.to_string()))
    }

    pub fn root(&self, language: &str) -> Result<Option<&Synset>, LexsemError> {
        let h = self.hierarchy(language)?;
        Ok(h.root.as_ref().map(|r| &h.synsets[r]))
    }

    /// First sense: among synsets listing the lemma, the one with the
    /// smallest id.
    pub fn resolve_sense(&self, lemma: &str, language: &str) -> Result<&Synset, LexsemError> {
        let wanted = lemma.trim().to_lowercase();
        self.hierarchy(language)?
            .synsets
            .values()
            .find(|s| s.lemmas.contains(&wanted))
            .ok_or_else(|| LexsemError::LemmaNotFound {
                lemma: lemma.to_string(),
                language: language.to_string(),
            })
    }

    /// Genus chain from the synset up to the language root.
    pub fn hypernym_path(&self, language: &str, id: &str) -> Result<Vec<&Synset>, LexsemError> {
        let h = self.hierarchy(language)?;
        let mut path = vec![self.synset(language, id)?];
        while let Some(genus) = &path.last().unwrap().genus {
            path.push(&h.synsets[genus]);
        }
        Ok(path)
    }

    /// Union of differentia along the genus chain.
    pub fn inherited_properties(
        &self,
        language: &str,
        id: &str,
    ) -> Result<BTreeSet<&str>, LexsemError> {
        let h = self.hierarchy(language)?;
        let synset = self.synset(language, id)?;
        Ok(inherited_from(&h.synsets, &synset.id))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    const LEX: &str = include_str!("../../../fixtures/lexsem-en.json");

    fn lex() -> LexicalSemanticResource {
        load_lexsem(LEX).unwrap()
    }

    fn one_language(synsets: serde_json::Value) -> String {
        json!({"id": "t", "languages": {"en": {"synsets": synsets}}}).to_string()
    }

    #[test]
    fn resolves_senses() {
        let l = lex();
        assert_eq!(l.resolve_sense("organization", "en").unwrap().id.as_str(), "en-org-1");
        assert_eq!(l.resolve_sense("ORGANIZATION", "en").unwrap().id.as_str(), "en-org-1");
        assert!(matches!(
            l.resolve_sense("zzz", "en"),
            Err(LexsemError::LemmaNotFound { .. })
        ));
        assert!(matches!(
            l.resolve_sense("book", "it"),
            Err(LexsemError::UnknownLanguage(_))
        ));
    }

    #[test]
    fn first_sense_is_smallest_id() {
        assert_eq!(lex().resolve_sense("book", "en").unwrap().id.as_str(), "en-book-1");
    }

    #[test]
    fn hypernym_paths() {
        let l = lex();
        let path: Vec<&str> = l
            .hypernym_path("en", "en-publisher-1")
            .unwrap()
            .iter()
            .map(|s| s.lemmas[0].as_str())
            .collect();
        assert_eq!(path, vec!["publisher", "organization", "entity"]);
        assert_eq!(l.hypernym_path("en", "en-entity-1").unwrap().len(), 1);
        assert!(matches!(
            l.hypernym_path("en", "nope"),
            Err(LexsemError::UnknownSynset(_))
        ));
    }

    #[test]
    fn cycle_is_reported() {
        let doc = one_language(json!([
            {"id": "A", "lemmas": ["a"], "genus": "B", "differentia": ["x"]},
            {"id": "B", "lemmas": ["b"], "genus": "A", "differentia": ["y"]}
        ]));
        match load_lexsem(&doc) {
            Err(LexsemError::Cycle(members)) => assert_eq!(members, vec!["A", "B"]),
            other => panic!("expected cycle, got {other:?}"),
        }
    }

    #[test]
    fn load_errors() {
        let dangling = one_language(json!([{"id": "A", "lemmas": ["a"], "genus": "Z", "differentia": ["x"]}]));
        assert!(matches!(load_lexsem(&dangling), Err(LexsemError::DanglingGenus { .. })));
        let dup = one_language(json!([{"id": "A", "lemmas": ["a"]}, {"id": "A", "lemmas": ["b"]}]));
        assert!(matches!(load_lexsem(&dup), Err(LexsemError::DuplicateSynset(_))));
        let two_roots = one_language(json!([{"id": "A", "lemmas": ["a"]}, {"id": "B", "lemmas": ["b"]}]));
        assert!(matches!(load_lexsem(&two_roots), Err(LexsemError::MultipleRoots { .. })));
        let no_diff = one_language(json!([
            {"id": "A", "lemmas": ["a"], "differentia": ["x"]},
            {"id": "B", "lemmas": ["b"], "genus": "A", "differentia": ["x"]}
        ]));
        assert!(matches!(load_lexsem(&no_diff), Err(LexsemError::NoDifferentia(_))));
    }

    #[test]
    fn single_root_file_is_valid() {
        let doc = one_language(json!([{"id": "A", "lemmas": ["Thing"]}]));
        let l = load_lexsem(&doc).unwrap();
        assert_eq!(l.root("en").unwrap().unwrap().lemmas, vec!["thing"]);
    }

    #[test]
    fn inherited_properties_grow_strictly() {
        let l = lex();
        for s in l.hierarchy("en").unwrap().synsets.values() {
            let Some(genus) = &s.genus else { continue };
            let own = l.inherited_properties("en", s.id.as_str()).unwrap();
            let up = l.inherited_properties("en", genus.as_str()).unwrap();
            assert!(own.is_superset(&up) && own.len() > up.len(), "{}", s.id);
        }
    }
}
