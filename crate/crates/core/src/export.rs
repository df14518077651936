//! Entity graph exporters: N-Triples lines, a compact JSON graph, and a
//! formal-concept-analysis context. All outputs are byte-deterministic.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eg::{
    check_graph, Entity, EntityGraph, GraphError, Literal, LiteralType, Term, Triple, TypedValue,
};
use crate::model::{Identifier, Iri, Timestamp};

/// The triples of `eg` as sorted N-Triples lines.
pub fn export_ntriples(eg: &EntityGraph) -> Vec<u8> {
    ntriples_bytes(&eg.triples)
}

pub fn ntriples_bytes(triples: &[Triple]) -> Vec<u8> {
    let mut lines: Vec<String> = triples.iter().map(Triple::to_string).collect();
    lines.sort();
    lines.dedup();
    let mut out = Vec::new();
    for line in lines {
        out.extend_from_slice(line.as_bytes());
        out.push(b'\n');
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct NTriplesError {
    pub line: usize,
    pub message: String,
}

struct LineParser<'a> {
    rest: &'a str,
    line: usize,
}

impl<'a> LineParser<'a> {
    fn fail<T>(&self, message: impl Into<String>) -> Result<T, NTriplesError> {
        Err(NTriplesError {
            line: self.line,
            message: message.into(),
        })
    }

    fn skip_ws(&mut self) {
        self.rest = self.rest.trim_start_matches([' ', '\t']);
    }

    fn iri(&mut self) -> Result<Iri, NTriplesError> {
        self.skip_ws();
        let Some(body) = self.rest.strip_prefix('<') else {
            return self.fail("expected `<`");
        };
        let Some(end) = body.find('>') else {
            return self.fail("unterminated IRI");
        };
        let iri = match Iri::parse(&body[..end]) {
            Ok(i) => i,
            Err(e) => return self.fail(e.to_string()),
        };
        self.rest = &body[end + 1..];
        Ok(iri)
    }

    fn object(&mut self) -> Result<Term, NTriplesError> {
        self.skip_ws();
        let Some(body) = self.rest.strip_prefix('"') else {
            return self.iri().map(Term::Iri);
        };
        let mut lexical = String::new();
        let mut chars = body.char_indices();
        let end = loop {
            match chars.next() {
                None => return self.fail("unterminated literal"),
                Some((i, '"')) => break i,
                Some((_, '\\')) => match chars.next() {
                    Some((_, '\\')) => lexical.push('\\'),
                    Some((_, '"')) => lexical.push('"'),
                    Some((_, 'n')) => lexical.push('\n'),
                    Some((_, 'r')) => lexical.push('\r'),
                    Some((_, 't')) => lexical.push('\t'),
                    _ => return self.fail("bad escape in literal"),
                },
                Some((_, c)) => lexical.push(c),
            }
        };
        let Some(after) = body[end + 1..].strip_prefix("^^") else {
            return self.fail("literal needs a ^^<datatype>");
        };
        self.rest = after;
        let dt = self.iri()?;
        match LiteralType::from_xsd_iri(dt.as_str()) {
            Some(datatype) => Ok(Term::Literal(Literal { lexical, datatype })),
            None => self.fail(format!("unsupported datatype {dt}")),
        }
    }
}

/// Parses the N-Triples subset produced by [`export_ntriples`].
pub fn parse_ntriples(text: &str) -> Result<Vec<Triple>, NTriplesError> {
    let mut triples = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        if raw.trim().is_empty() {
            continue;
        }
        let mut p = LineParser {
            rest: raw,
            line: i + 1,
        };
        let subject = p.iri()?;
        let predicate = p.iri()?;
        let object = p.object()?;
        p.skip_ws();
        if p.rest.trim_end() != "." {
            return p.fail("expected ` .` at end of line");
        }
        triples.push(Triple {
            subject,
            predicate,
            object,
        });
    }
    Ok(triples)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Counts {
    entities: usize,
    triples: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Metadata {
    iri: Iri,
    timestamp: Timestamp,
    vocabulary: Iri,
    sources: Vec<Identifier>,
    counts: Counts,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ValueDoc {
    property: Identifier,
    datatype: LiteralType,
    value: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EntityDoc {
    iri: Iri,
    #[serde(rename = "type")]
    type_id: Identifier,
    values: Vec<ValueDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LinkDoc {
    subject: Iri,
    property: Identifier,
    object: Iri,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphDoc {
    metadata: Metadata,
    entities: Vec<EntityDoc>,
    links: Vec<LinkDoc>,
}

/// Compact JSON with keys in the order
/// `metadata{iri,timestamp,vocabulary,sources,counts{entities,triples}}`,
/// `entities[{iri,type,values[{property,datatype,value}]}]`,
/// `links[{subject,property,object}]`.
pub fn export_jsongraph(eg: &EntityGraph) -> Vec<u8> {
    let links = eg
        .links()
        .map(|t| LinkDoc {
            subject: t.subject.clone(),
            property: Identifier::new(eg.property_name(&t.predicate).expect("minted predicate"))
                .expect("property names are identifiers"),
            object: t.object.as_iri().expect("links have IRI objects").clone(),
        })
        .collect();
    let doc = GraphDoc {
        metadata: Metadata {
            iri: eg.iri.clone(),
            timestamp: eg.timestamp,
            vocabulary: eg.vocabulary.clone(),
            sources: eg.sources.clone(),
            counts: Counts {
                entities: eg.entity_count(),
                triples: eg.triple_count(),
            },
        },
        entities: eg
            .entities
            .iter()
            .map(|e| EntityDoc {
                iri: e.iri.clone(),
                type_id: e.type_id.clone(),
                values: e
                    .values
                    .iter()
                    .map(|v| ValueDoc {
                        property: v.property.clone(),
                        datatype: v.literal.datatype,
                        value: v.literal.lexical.clone(),
                    })
                    .collect(),
            })
            .collect(),
        links,
    };
    serde_json::to_vec(&doc).expect("graph serializes")
}

impl EntityGraph {
    /// Loads a graph written by [`export_jsongraph`].
    pub fn from_json(text: &str) -> Result<Self, GraphError> {
        let doc: GraphDoc = serde_json::from_str(text)?;
        let entities = doc
            .entities
            .into_iter()
            .map(|e| Entity {
                iri: e.iri,
                type_id: e.type_id,
                values: e
                    .values
                    .into_iter()
                    .map(|v| TypedValue {
                        property: v.property,
                        literal: Literal {
                            lexical: v.value,
                            datatype: v.datatype,
                        },
                    })
                    .collect(),
            })
            .collect();
        let links = doc
            .links
            .into_iter()
            .map(|l| (l.subject, l.property, l.object))
            .collect();
        let m = doc.metadata;
        let eg = EntityGraph::assemble(m.iri, m.timestamp, m.vocabulary, m.sources, entities, links);
        let actual = (eg.entity_count(), eg.triple_count());
        let declared = (m.counts.entities, m.counts.triples);
        if actual != declared {
            return Err(GraphError::Counts { declared, actual });
        }
        check_graph(&eg)?;
        Ok(eg)
    }
}

/// Entity by property/type incidence matrix as CSV.
pub fn export_fca(eg: &EntityGraph) -> Vec<u8> {
    let mut attributes: BTreeMap<&Iri, BTreeSet<String>> = BTreeMap::new();
    for e in &eg.entities {
        let set = attributes.entry(&e.iri).or_default();
        set.insert(format!("type:{}", e.type_id));
        for v in &e.values {
            set.insert(v.property.to_string());
        }
    }
    for t in eg.links() {
        if let Some(name) = eg.property_name(&t.predicate) {
            attributes
                .entry(&t.subject)
                .or_default()
                .insert(name.to_string());
        }
    }
    let columns: BTreeSet<&String> = attributes.values().flatten().collect();

    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let header = std::iter::once("entity").chain(columns.iter().map(|c| c.as_str()));
    writer.write_record(header).expect("in-memory write");
    for (iri, set) in &attributes {
        let row = std::iter::once(iri.as_str()).chain(
            columns
                .iter()
                .map(|c| if set.contains(*c) { "1" } else { "0" }),
        );
        writer.write_record(row).expect("in-memory write");
    }
    writer.into_inner().expect("in-memory flush")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    NTriples,
    Json,
    Fca,
}

impl ExportFormat {
    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "nt" => Some(ExportFormat::NTriples),
            "json" => Some(ExportFormat::Json),
            "fca" => Some(ExportFormat::Fca),
            _ => None,
        }
    }

    pub fn export(self, eg: &EntityGraph) -> Vec<u8> {
        match self {
            ExportFormat::NTriples => export_ntriples(eg),
            ExportFormat::Json => export_jsongraph(eg),
            ExportFormat::Fca => export_fca(eg),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iri(s: &str) -> Iri {
        Iri::parse(s).unwrap()
    }

    fn id(s: &str) -> Identifier {
        Identifier::new(s).unwrap()
    }

    fn small_graph() -> EntityGraph {
        let base = "https://x.org/g";
        let entities = vec![
            Entity {
                iri: iri(&format!("{base}/Organization/hr")),
                type_id: id("Organization"),
                values: vec![TypedValue {
                    property: id("name"),
                    literal: Literal {
                        lexical: "Harper & Row, \"Inc\"\n".into(),
                        datatype: LiteralType::String,
                    },
                }],
            },
            Entity {
                iri: iri(&format!("{base}/Place/m")),
                type_id: id("Place"),
                values: vec![],
            },
        ];
        let links = vec![(
            iri(&format!("{base}/Organization/hr")),
            id("headquarteredIn"),
            iri(&format!("{base}/Place/m")),
        )];
        EntityGraph::assemble(
            iri(&format!("{base}/eg/2024-01-01T00-00-00Z")),
            Timestamp::parse("2024-01-01T00:00:00Z").unwrap(),
            iri(&format!("{base}/etg/du")),
            vec![id("orgs"), id("places")],
            entities,
            links,
        )
    }

    fn empty_graph() -> EntityGraph {
        EntityGraph::assemble(
            iri("https://x.org/g/eg/1970-01-01T00-00-00Z"),
            Timestamp::epoch(),
            iri("https://x.org/g/etg/du"),
            vec![],
            vec![],
            vec![],
        )
    }

    #[test]
    fn ntriples_shape_and_round_trip() {
        let eg = small_graph();
        let bytes = export_ntriples(&eg);
        let text = String::from_utf8(bytes.clone()).unwrap();
        assert_eq!(text.lines().count(), eg.triple_count());
        assert!(text.ends_with(" .\n"));
        assert!(text.contains(
            "\"Harper & Row, \\\"Inc\\\"\\n\"^^<http://www.w3.org/2001/XMLSchema#string> ."
        ));
        let lines: Vec<&str> = text.lines().collect();
        let mut sorted = lines.clone();
        sorted.sort();
        assert_eq!(lines, sorted);
        let reparsed = parse_ntriples(&text).unwrap();
        assert_eq!(ntriples_bytes(&reparsed), bytes);
        assert!(export_ntriples(&empty_graph()).is_empty());
    }

    #[test]
    fn ntriples_parse_errors() {
        assert!(parse_ntriples("<a:b/c> <a:b/d> \"x\" .").is_err());
        assert!(parse_ntriples("<https://a/b> <https://a/c> <https://a/d>").is_err());
        assert!(parse_ntriples("<https://a/b> <https://a/c> \"x\"^^<https://a/dt> .").is_err());
    }

    #[test]
    fn jsongraph_exact_bytes_and_reload() {
        let eg = empty_graph();
        assert_eq!(
            String::from_utf8(export_jsongraph(&eg)).unwrap(),
            r#"{"metadata":{"iri":"https://x.org/g/eg/1970-01-01T00-00-00Z","timestamp":"1970-01-01T00:00:00Z","vocabulary":"https://x.org/g/etg/du","sources":[],"counts":{"entities":0,"triples":0}},"entities":[],"links":[]}"#
        );
        let eg = small_graph();
        let bytes = export_jsongraph(&eg);
        let back = EntityGraph::from_json(std::str::from_utf8(&bytes).unwrap()).unwrap();
        assert_eq!(back, eg);
        assert_eq!(export_jsongraph(&back), bytes);
    }

    #[test]
    fn jsongraph_rejects_bad_counts() {
        let text = String::from_utf8(export_jsongraph(&small_graph()))
            .unwrap()
            .replace("\"triples\":4", "\"triples\":9");
        assert!(matches!(
            EntityGraph::from_json(&text),
            Err(GraphError::Counts { .. })
        ));
    }

    #[test]
    fn fca_matrix() {
        let text = String::from_utf8(export_fca(&small_graph())).unwrap();
        assert_eq!(
            text,
            "entity,headquarteredIn,name,type:Organization,type:Place\n\
             https://x.org/g/Organization/hr,1,1,1,0\n\
             https://x.org/g/Place/m,0,0,0,1\n"
        );
        assert_eq!(String::from_utf8(export_fca(&empty_graph())).unwrap(), "entity\n");
    }

    #[test]
    fn formats() {
        assert_eq!(ExportFormat::parse("nt"), Some(ExportFormat::NTriples));
        assert_eq!(ExportFormat::parse("bogus"), None);
    }
}
